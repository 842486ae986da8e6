#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cfaforge/cfa.hpp"
#include "cfaforge/cfg_build.hpp"
#include "cfaforge/interp.hpp"
#include "cfaforge/optimizer.hpp"
#include "cfaforge/parser.hpp"
#include "cfaforge/slicer.hpp"
#include "cfaforge/typecheck.hpp"
#include "cfaforge/verifier.hpp"

namespace cfaforge {

// Which abstracted branch to materialize when a witness is slice-tainted:
// the one nearest the error location, or a seeded random choice.
enum class PhiSelect { Nearest, Random };

struct RunConfig {
  SlicerKind slicer = SlicerKind::Backward;
  bool optimizations = true;
  SearchOrder search = SearchOrder::Bfs;
  int timeout_sec = 180;
  std::string solver_cmd;
  uint64_t seed = 0;
  int jobs = 1;
  long max_arg_nodes = 1000000;
  int max_cegar_iters = 200;
  PhiSelect phi_select = PhiSelect::Nearest;
};

// Three-letter shorthand: slicer initial, optimizations T/F, search B/D.
inline std::string config_abbrev(const RunConfig& c) {
  std::string s = "?";
  switch (c.slicer) {
    case SlicerKind::None: s = "N"; break;
    case SlicerKind::Backward: s = "B"; break;
    case SlicerKind::Thin: s = "T"; break;
    case SlicerKind::Value: s = "V"; break;
  }
  s += c.optimizations ? 'T' : 'F';
  s += c.search == SearchOrder::Bfs ? 'B' : 'D';
  return s;
}

inline RunConfig parse_config_abbrev(const std::string& s, RunConfig base = {}) {
  if (s.size() != 3) throw std::invalid_argument("config shorthand must be three letters: " + s);
  switch (s[0]) {
    case 'N': base.slicer = SlicerKind::None; break;
    case 'B': base.slicer = SlicerKind::Backward; break;
    case 'T': base.slicer = SlicerKind::Thin; break;
    case 'V': base.slicer = SlicerKind::Value; break;
    default: throw std::invalid_argument("bad slicer letter in config: " + s);
  }
  switch (s[1]) {
    case 'T': base.optimizations = true; break;
    case 'F': base.optimizations = false; break;
    default: throw std::invalid_argument("bad optimization letter in config: " + s);
  }
  switch (s[2]) {
    case 'B': base.search = SearchOrder::Bfs; break;
    case 'D': base.search = SearchOrder::Dfs; break;
    default: throw std::invalid_argument("bad search letter in config: " + s);
  }
  return base;
}

// The sixteen-point matrix: four slicers, optimizations on/off, two searches.
inline std::vector<RunConfig> full_config_matrix(RunConfig base = {}) {
  std::vector<RunConfig> out;
  for (SlicerKind sl : {SlicerKind::None, SlicerKind::Backward, SlicerKind::Thin, SlicerKind::Value})
    for (bool opt : {true, false})
      for (SearchOrder se : {SearchOrder::Bfs, SearchOrder::Dfs}) {
        RunConfig c = base;
        c.slicer = sl;
        c.optimizations = opt;
        c.search = se;
        out.push_back(c);
      }
  return out;
}

struct SliceReport {
  std::string file;
  int slice_no = 0;
  RunConfig config;
  Safety safe = Safety::Unknown;
  long init_locs = 0;
  long init_edges = 0;
  long end_locs = 0;
  long end_edges = 0;
  long arg_size = 0;
  long arg_size_cumulative = 0;
  long optimization_time_ms = 0;  // covers slicing, refinement, and lowering too
  long verification_time_ms = 0;
  int refinements = 0;
  int cegar_iterations = 0;
  std::string reason;
  bool has_witness = false;
  Counterexample witness;
};

inline std::string slice_id(const SliceReport& r) {
  return r.file + "#" + std::to_string(r.slice_no);
}

// Full execution record used by the testing oracles: store snapshots are
// taken before each instruction executes.
struct ExecutionTrace {
  struct Step {
    int instr;
    std::map<std::string, int32_t> store;
  };
  std::vector<Step> steps;
  std::vector<std::pair<int, bool>> assert_outcomes;
  RunResult result;
};

inline ExecutionTrace interpret(const Cfg& cfg, HavocSource& havoc, long max_steps = 200000) {
  ExecutionTrace tr;
  Interpreter in(cfg, havoc);
  in.set_observer([&](const Instruction& n, const std::map<std::string, int32_t>& store) {
    tr.steps.push_back({n.id, store});
    if (n.kind == InstrKind::Assert) {
      try {
        tr.assert_outcomes.push_back({n.id, eval_expr(n.expr, store) != 0});
      } catch (const Trap&) {
      }
    }
  });
  tr.result = in.run(max_steps);
  return tr;
}

inline ExecutionTrace interpret(const Cfg& cfg, const std::vector<int32_t>& havoc_stream,
                                long max_steps = 200000) {
  SequenceHavoc h(havoc_stream);
  return interpret(cfg, h, max_steps);
}

namespace pipeline_detail {

using Clock = std::chrono::steady_clock;

inline long ms_between(Clock::time_point a, Clock::time_point b) {
  return (long)std::chrono::duration_cast<std::chrono::milliseconds>(b - a).count();
}

inline Slice whole_program_slice(const Cfg& cfg) {
  Slice s;
  s.slice_cfg = cfg;
  for (const auto& n : cfg.nodes) s.retained.insert(n.id);
  return s;
}

inline int choose_phi(const std::vector<int>& phis, PhiSelect strategy, std::mt19937_64& rng) {
  if (strategy == PhiSelect::Nearest) return phis.back();  // closest to the error location
  std::vector<int> unique = phis;
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  return unique[std::uniform_int_distribution<size_t>(0, unique.size() - 1)(rng)];
}

}  // namespace pipeline_detail

// Verifies one slice (or the whole program), re-slicing and re-verifying as
// long as unsafe witnesses cross abstracted-branch havocs. Such a witness may
// be a slicing artifact; one that avoids every abstracted branch is final.
// The abstracted set shrinks each round, so the loop terminates.
inline SliceReport verify_unit(const std::string& file, int slice_no, const Cfg& whole,
                               const Pdg* pdg, Slice slice, const RunConfig& config,
                               long shared_opt_ms) {
  using namespace pipeline_detail;
  auto t_start = Clock::now();
  auto deadline = t_start + std::chrono::seconds(config.timeout_sec);

  SliceReport rep;
  rep.file = file;
  rep.slice_no = slice_no;
  rep.config = config;
  rep.optimization_time_ms = shared_opt_ms;

  auto t0 = Clock::now();
  Cfa cfa = cfg_to_cfa(slice.slice_cfg);
  rep.optimization_time_ms += ms_between(t0, Clock::now());
  rep.init_locs = cfa.num_locations;
  rep.init_edges = (long)cfa.edges.size();

  std::mt19937_64 rng(config.seed ^
                      (std::hash<std::string>{}(file) + 0x9e3779b97f4a7c15ULL * (uint64_t)(slice_no + 1)));

  bool can_refine = pdg && (config.slicer == SlicerKind::Thin || config.slicer == SlicerKind::Value);
  while (true) {
    long remaining = (long)std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    if (remaining <= 0) {
      rep.safe = Safety::Unknown;
      rep.reason = "timeout";
      break;
    }
    VerifierLimits vl;
    vl.max_cegar_iters = config.max_cegar_iters;
    vl.max_arg_nodes = config.max_arg_nodes;
    vl.timeout_ms = remaining;
    vl.solver_cmd = config.solver_cmd;
    Verdict v = check_cfa(cfa, config.search, vl);
    rep.verification_time_ms += v.verification_time_ms;
    rep.arg_size = v.arg_size;
    rep.arg_size_cumulative += v.arg_size;
    rep.cegar_iterations += v.iterations;
    rep.reason = v.reason;
    if (v.safe == Safety::Unsafe) {
      std::vector<int> phis = phi_ids_on_path(cfa, v.witness.edges);
      if (!phis.empty() && can_refine && !slice.abstracted.empty()) {
        int pick = choose_phi(phis, config.phi_select, rng);
        auto r0 = Clock::now();
        slice = refine_slice(slice, *pdg, whole, pick, config.slicer);
        cfa = cfg_to_cfa(slice.slice_cfg);
        rep.optimization_time_ms += ms_between(r0, Clock::now());
        ++rep.refinements;
        continue;
      }
      rep.safe = Safety::Unsafe;
      rep.witness = v.witness;
      rep.has_witness = true;
    } else {
      rep.safe = v.safe;
    }
    break;
  }
  rep.end_locs = cfa.num_locations;
  rep.end_edges = (long)cfa.edges.size();
  return rep;
}

// Frontend to verdicts for one source file: parse, check, inline, optionally
// optimize, slice per assertion (or keep the whole program), lower, verify.
// Slices run on a small worker pool; report order follows slice order.
inline std::vector<SliceReport> run_pipeline(const std::string& source_path,
                                             const RunConfig& config) {
  using namespace pipeline_detail;
  std::ifstream in(source_path);
  if (!in) throw std::runtime_error("cannot read " + source_path);
  std::stringstream buf;
  buf << in.rdbuf();

  Program prog = typecheck(parse(buf.str()));
  Cfg whole = inline_functions(prog);

  long shared_opt_ms = 0;
  if (config.optimizations) {
    auto t0 = Clock::now();
    optimize(whole);
    shared_opt_ms += ms_between(t0, Clock::now());
  }

  struct Unit {
    int no;
    std::optional<SliceCriterion> criterion;  // empty: whole program
  };
  std::vector<Unit> units;
  std::optional<Pdg> pdg;
  if (config.slicer == SlicerKind::None) {
    units.push_back({0, std::nullopt});
  } else {
    try {
      std::vector<SliceCriterion> criteria = extract_criteria(whole);
      auto t0 = Clock::now();
      pdg = build_pdg(whole);
      shared_opt_ms += ms_between(t0, Clock::now());
      for (size_t i = 0; i < criteria.size(); ++i) units.push_back({(int)i, criteria[i]});
    } catch (const NoAssertError&) {
      units.push_back({0, std::nullopt});  // nothing to slice on; check the whole program
    }
  }

  std::vector<SliceReport> reports(units.size());
  auto run_unit = [&](size_t idx) {
    const Unit& u = units[idx];
    try {
      long opt_ms = shared_opt_ms;
      Slice slice;
      if (u.criterion) {
        auto t0 = Clock::now();
        slice = make_slice(*pdg, whole, *u.criterion, config.slicer);
        opt_ms += ms_between(t0, Clock::now());
      } else {
        slice = whole_program_slice(whole);
      }
      reports[idx] =
          verify_unit(source_path, u.no, whole, pdg ? &*pdg : nullptr, std::move(slice), config, opt_ms);
    } catch (const std::exception& e) {
      SliceReport rep;
      rep.file = source_path;
      rep.slice_no = u.no;
      rep.config = config;
      rep.safe = Safety::Unknown;
      rep.reason = e.what();
      reports[idx] = rep;
    }
  };

  int jobs = std::max(1, config.jobs);
  if (jobs == 1 || units.size() <= 1) {
    for (size_t i = 0; i < units.size(); ++i) run_unit(i);
  } else {
    std::atomic<size_t> next{0};
    auto worker = [&] {
      for (size_t i; (i = next.fetch_add(1)) < units.size();) run_unit(i);
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < std::min<int>(jobs, (int)units.size()); ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return reports;
}

enum class MetricsFormat { Csv, Jsonl };

inline const char* kMetricsHeader =
    "File,SliceNo,Slicer,Optimizations,Search,Safe,InitLocs,InitEdges,ArgSize,EndLocs,EndEdges,"
    "OptimizationTimeMs,VerificationTimeMs";

inline std::string emit_metrics(const std::vector<SliceReport>& reports, MetricsFormat format) {
  std::string out;
  if (format == MetricsFormat::Csv) {
    out += kMetricsHeader;
    out += '\n';
    for (const auto& r : reports) {
      out += r.file;
      out += ',' + std::to_string(r.slice_no);
      out += ',';
      out += to_string(r.config.slicer);
      out += ',';
      out += r.config.optimizations ? "true" : "false";
      out += ',';
      out += to_string(r.config.search);
      out += ',';
      out += to_string(r.safe);
      out += ',' + std::to_string(r.init_locs);
      out += ',' + std::to_string(r.init_edges);
      out += ',' + std::to_string(r.arg_size);
      out += ',' + std::to_string(r.end_locs);
      out += ',' + std::to_string(r.end_edges);
      out += ',' + std::to_string(r.optimization_time_ms);
      out += ',' + std::to_string(r.verification_time_ms);
      out += '\n';
    }
    return out;
  }
  for (const auto& r : reports) {
    nlohmann::json j;
    j["id"] = slice_id(r);
    j["file"] = r.file;
    j["sliceNo"] = r.slice_no;
    j["slicer"] = to_string(r.config.slicer);
    j["optimizations"] = r.config.optimizations;
    j["search"] = to_string(r.config.search);
    j["safe"] = to_string(r.safe);
    j["initLocs"] = r.init_locs;
    j["initEdges"] = r.init_edges;
    j["argSize"] = r.arg_size;
    j["argSizeCumulative"] = r.arg_size_cumulative;
    j["endLocs"] = r.end_locs;
    j["endEdges"] = r.end_edges;
    j["optimizationTimeMs"] = r.optimization_time_ms;
    j["verificationTimeMs"] = r.verification_time_ms;
    j["refinements"] = r.refinements;
    j["cegarIterations"] = r.cegar_iterations;
    if (!r.reason.empty()) j["reason"] = r.reason;
    out += j.dump();
    out += '\n';
  }
  return out;
}

// Whole-run verdict: any unsafe slice condemns the program; otherwise any
// unknown leaves the question open; all safe means safe.
inline int aggregate_exit(const std::vector<SliceReport>& reports) {
  bool any_unknown = false;
  for (const auto& r : reports) {
    if (r.safe == Safety::Unsafe) return 1;
    if (r.safe == Safety::Unknown) any_unknown = true;
  }
  return any_unknown ? 2 : 0;
}

// Cross product of files and configurations. Per-file frontend failures
// become unknown rows so one bad file cannot sink a corpus run.
inline std::vector<SliceReport> corpus_run(const std::vector<std::string>& files,
                                           const std::vector<RunConfig>& matrix) {
  std::vector<SliceReport> all;
  for (const auto& file : files) {
    for (const auto& config : matrix) {
      try {
        std::vector<SliceReport> reports = run_pipeline(file, config);
        for (auto& r : reports) all.push_back(std::move(r));
      } catch (const std::exception& e) {
        SliceReport rep;
        rep.file = file;
        rep.config = config;
        rep.safe = Safety::Unknown;
        rep.reason = e.what();
        all.push_back(std::move(rep));
      }
    }
  }
  return all;
}

}  // namespace cfaforge
