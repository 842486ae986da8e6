#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cfaforge/dataflow.hpp"
#include "cfaforge/pipeline.hpp"
#include "cfaforge/printer.hpp"

namespace fs = std::filesystem;
using namespace cfaforge;

namespace {

struct CommonFlags {
  std::string slicer = "backward";
  bool optimize = true;
  std::string search = "bfs";
  int timeout = 180;
  int jobs = 1;
  uint64_t seed = 0;
  std::string solver_cmd;
  std::string out_path;
  std::string format = "csv";
  std::string config_abbrev;
  std::string phi_select = "nearest";
  long max_arg_nodes = 1000000;
  int max_cegar_iters = 200;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--slicer", f.slicer, "Slicing mode")
      ->check(CLI::IsMember({"none", "backward", "thin", "value"}));
  cmd->add_flag("--optimize,!--no-optimize", f.optimize, "Run the optimizer before slicing");
  cmd->add_option("--search", f.search, "Exploration order")->check(CLI::IsMember({"bfs", "dfs"}));
  cmd->add_option("--timeout", f.timeout, "Per-slice timeout in seconds");
  cmd->add_option("--jobs", f.jobs, "Parallel slice workers");
  cmd->add_option("--seed", f.seed, "Seed for randomized choices");
  cmd->add_option("--solver-cmd", f.solver_cmd, "External solver command (SMT-LIB over stdio)");
  cmd->add_option("--out", f.out_path, "Write metrics to this file instead of standard output");
  cmd->add_option("--format", f.format, "Metrics format")->check(CLI::IsMember({"csv", "jsonl"}));
  cmd->add_option("--config", f.config_abbrev,
                  "Three-letter shorthand (slicer initial, T/F optimizations, B/D search)");
  cmd->add_option("--phi-select", f.phi_select, "Abstracted-branch refinement choice")
      ->check(CLI::IsMember({"nearest", "random"}));
  cmd->add_option("--max-arg-nodes", f.max_arg_nodes, "Abstract reachability graph node cap");
  cmd->add_option("--max-cegar-iters", f.max_cegar_iters, "Refinement iteration cap");
}

RunConfig to_config(const CommonFlags& f) {
  RunConfig c;
  if (!f.config_abbrev.empty()) c = parse_config_abbrev(f.config_abbrev, c);
  if (f.config_abbrev.empty()) {
    static const std::map<std::string, SlicerKind> slicers = {
        {"none", SlicerKind::None},
        {"backward", SlicerKind::Backward},
        {"thin", SlicerKind::Thin},
        {"value", SlicerKind::Value}};
    c.slicer = slicers.at(f.slicer);
    c.optimizations = f.optimize;
    c.search = f.search == "dfs" ? SearchOrder::Dfs : SearchOrder::Bfs;
  }
  c.timeout_sec = f.timeout;
  c.jobs = f.jobs;
  c.seed = f.seed;
  c.max_arg_nodes = f.max_arg_nodes;
  c.max_cegar_iters = f.max_cegar_iters;
  c.phi_select = f.phi_select == "random" ? PhiSelect::Random : PhiSelect::Nearest;
  c.solver_cmd = f.solver_cmd;
  if (c.solver_cmd.empty())
    if (const char* env = std::getenv("CFAFORGE_SOLVER")) c.solver_cmd = env;
  return c;
}

int write_output(const std::string& path, const std::string& data) {
  if (path.empty()) {
    std::fputs(data.c_str(), stdout);
    return 0;
  }
  std::ofstream out(path);
  if (!out) {
    std::fprintf(stderr, "cfaforge: cannot write %s\n", path.c_str());
    return 3;
  }
  out << data;
  return 0;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Cfg frontend(const std::string& path, bool optimize_flag) {
  Program prog = typecheck(parse(read_file(path)));
  Cfg cfg = inline_functions(prog);
  if (optimize_flag) optimize(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cfaforge: slice C programs per assertion and verify error reachability"};
  app.require_subcommand(1);

  CommonFlags vf, sf, df, cf;
  std::string verify_file, slice_file, dump_file, corpus_dir, dump_what = "cfa";

  CLI::App* verify = app.add_subcommand("verify", "Verify every assertion slice of one file");
  verify->add_option("file", verify_file, "C source file")->required();
  add_common(verify, vf);

  CLI::App* slc = app.add_subcommand("slice", "Print the slices of one file");
  slc->add_option("file", slice_file, "C source file")->required();
  add_common(slc, sf);

  CLI::App* dump = app.add_subcommand("dump", "Dump an intermediate representation");
  dump->add_option("file", dump_file, "C source file")->required();
  dump->add_option("--dump", dump_what, "Representation to dump")
      ->check(CLI::IsMember({"ast", "cfg", "pdg", "cfa"}));
  add_common(dump, df);

  CLI::App* corpus = app.add_subcommand("corpus", "Run a configuration matrix over a directory");
  corpus->add_option("dir", corpus_dir, "Directory of .c files")->required();
  add_common(corpus, cf);
  std::vector<std::string> matrix_abbrevs;
  corpus->add_option("--matrix", matrix_abbrevs,
                     "Config shorthands to run (default: the full sixteen)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  try {
    if (verify->parsed()) {
      RunConfig config = to_config(vf);
      std::vector<SliceReport> reports = run_pipeline(verify_file, config);
      std::string data =
          emit_metrics(reports, vf.format == "jsonl" ? MetricsFormat::Jsonl : MetricsFormat::Csv);
      int io = write_output(vf.out_path, data);
      return io != 0 ? io : aggregate_exit(reports);
    }

    if (slc->parsed()) {
      RunConfig config = to_config(sf);
      Cfg whole = frontend(slice_file, config.optimizations);
      std::string out;
      if (config.slicer == SlicerKind::None) {
        out += "# whole program\n" + to_text(whole);
      } else {
        std::vector<SliceCriterion> criteria = extract_criteria(whole);
        Pdg pdg = build_pdg(whole);
        for (size_t i = 0; i < criteria.size(); ++i) {
          Slice s = make_slice(pdg, whole, criteria[i], config.slicer);
          out += "# slice " + std::to_string(i) + " criterion " +
                 std::to_string(criteria[i].instruction) + "\n";
          out += to_text(s.slice_cfg);
        }
      }
      return write_output(sf.out_path, out);
    }

    if (dump->parsed()) {
      RunConfig config = to_config(df);
      std::string out;
      if (dump_what == "ast") {
        Program prog = typecheck(parse(read_file(dump_file)));
        out = dump_ast(prog);
      } else {
        Cfg whole = frontend(dump_file, config.optimizations);
        if (dump_what == "cfg") {
          out = to_dot(whole);
        } else if (dump_what == "pdg") {
          out = pdg_to_dot(whole, build_pdg(whole));
        } else {
          if (config.slicer == SlicerKind::None) {
            out = to_text(cfg_to_cfa(whole));
          } else {
            std::vector<SliceCriterion> criteria = extract_criteria(whole);
            Pdg pdg = build_pdg(whole);
            for (size_t i = 0; i < criteria.size(); ++i) {
              Slice s = make_slice(pdg, whole, criteria[i], config.slicer);
              out += "# slice " + std::to_string(i) + "\n";
              out += to_text(cfg_to_cfa(s.slice_cfg));
            }
          }
        }
      }
      return write_output(df.out_path, out);
    }

    // corpus
    RunConfig base = to_config(cf);
    std::vector<RunConfig> matrix;
    if (matrix_abbrevs.empty()) {
      matrix = full_config_matrix(base);
    } else {
      for (const auto& a : matrix_abbrevs) matrix.push_back(parse_config_abbrev(a, base));
    }
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(corpus_dir))
      if (entry.is_regular_file() && entry.path().extension() == ".c")
        files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    std::vector<SliceReport> all = corpus_run(files, matrix);
    std::string data =
        emit_metrics(all, cf.format == "jsonl" ? MetricsFormat::Jsonl : MetricsFormat::Csv);
    int io = write_output(cf.out_path, data);
    return io != 0 ? io : aggregate_exit(all);
  } catch (const Error& e) {
    std::fprintf(stderr, "cfaforge: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cfaforge: %s\n", e.what());
    return 3;
  }
}
