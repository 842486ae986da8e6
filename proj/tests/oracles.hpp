#pragma once

// Independent reference computations. Each one answers the same question as
// a production analysis by the most literal method available (path
// enumeration, node removal, exhaustive evaluation) so the two
// implementations share no code or technique.

#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cfaforge/cfg.hpp"
#include "cfaforge/dataflow.hpp"
#include "cfaforge/formula.hpp"
#include "cfaforge/slicer.hpp"

namespace testoracle {

using cfaforge::Cfg;
using cfaforge::ExprPtr;
using cfaforge::InstrKind;
using cfaforge::Model;

// Does a path def -> ... -> target exist along which no intermediate node
// redefines v? Simple paths suffice: removing a cycle from a witness path
// cannot introduce a redefinition.
inline bool def_reaches(const Cfg& cfg, int def, int target, const std::string& v) {
  std::set<int> on_path;
  std::function<bool(int)> walk = [&](int u) -> bool {
    if (u == target) return true;
    auto d = instr_defines(cfg.node(u));
    if (d && *d == v) return false;
    if (u == cfg.entry_id) return false;  // entry implicitly defines everything
    if (!on_path.insert(u).second) return false;
    for (const auto& e : cfg.out(u))
      if (walk(e.to)) return true;
    on_path.erase(u);
    return false;
  };
  for (const auto& e : cfg.out(def))
    if (walk(e.to)) return true;
  return false;
}

inline std::set<std::pair<std::string, int>> brute_reaching_at(const Cfg& cfg, int n) {
  std::set<std::pair<std::string, int>> result;
  auto vars = all_variables(cfg);
  for (const auto& d : cfg.nodes) {
    if (d.id == cfg.entry_id) {
      for (const auto& v : vars)
        if (def_reaches(cfg, d.id, n, v)) result.insert({v, d.id});
      continue;
    }
    auto defined = instr_defines(d);
    if (defined && def_reaches(cfg, d.id, n, *defined)) result.insert({*defined, d.id});
  }
  return result;
}

// p post-dominates n when removing p cuts every route from n to exit.
inline bool brute_postdom(const Cfg& cfg, int p, int n) {
  if (p == n) return true;
  if (n == cfg.exit_id) return false;
  std::set<int> seen{n};
  std::vector<int> work{n};
  while (!work.empty()) {
    int u = work.back();
    work.pop_back();
    if (u == cfg.exit_id) return false;
    for (const auto& e : cfg.out(u)) {
      if (e.to == p) continue;
      if (seen.insert(e.to).second) work.push_back(e.to);
    }
  }
  return true;
}

// Control dependence from first principles: some outcome of the branch
// commits to n, some other outcome may avoid it.
inline std::set<int> brute_ctrl_deps(const Cfg& cfg, int n) {
  std::set<int> deps;
  for (const auto& b : cfg.nodes) {
    bool is_branch =
        b.kind == InstrKind::Branch || b.kind == InstrKind::AbstractPredicate;
    if (is_branch) {
      bool some_commits = false;
      for (const auto& e : cfg.out(b.id))
        if (brute_postdom(cfg, n, e.to)) some_commits = true;
      bool strictly_above = n != b.id && brute_postdom(cfg, n, b.id);
      if (some_commits && !strictly_above) deps.insert(b.id);
    } else if (b.id == cfg.entry_id && !cfg.out(b.id).empty()) {
      if (n != cfg.exit_id && brute_postdom(cfg, n, cfg.out(b.id)[0].to)) deps.insert(b.id);
    }
  }
  return deps;
}

// First value-impacting node reachable from `start`, with the branch gamma's
// out-edges removed so every considered path stops at its first gamma
// occurrence. A node qualifies when a path reaches it without crossing any
// other impacting node and it can still reach gamma; reaching gamma clean
// contributes the marker.
inline std::set<int> brute_first_impact(const Cfg& cfg, const std::set<int>& vi, int gamma,
                                        int start) {
  if (start == gamma) return {cfaforge::detail::kNoImpact};

  auto succs_of = [&](int u) {
    std::vector<int> out;
    if (u == gamma) return out;
    for (const auto& e : cfg.out(u)) out.push_back(e.to);
    return out;
  };

  auto reaches_gamma = [&](int from) {
    std::set<int> seen{from};
    std::vector<int> work{from};
    while (!work.empty()) {
      int u = work.back();
      work.pop_back();
      if (u == gamma) return true;
      for (int s : succs_of(u))
        if (seen.insert(s).second) work.push_back(s);
    }
    return false;
  };

  std::set<int> result;
  std::set<int> on_path;
  std::function<void(int)> walk = [&](int u) {
    if (u == gamma) {
      result.insert(cfaforge::detail::kNoImpact);
      return;
    }
    if (vi.count(u)) {
      if (reaches_gamma(u)) result.insert(u);
      return;
    }
    if (!on_path.insert(u).second) return;
    for (int s : succs_of(u)) walk(s);
    on_path.erase(u);
  };
  walk(start);
  return result;
}

// Exhaustive satisfiability over a finite window. An assignment on which
// evaluation traps does not satisfy the formula.
struct EnumVerdict {
  bool sat = false;
  Model model;
};

inline EnumVerdict enumerate_sat(const ExprPtr& f, const std::vector<std::string>& vars, int lo,
                                 int hi) {
  EnumVerdict out;
  std::vector<int> point(vars.size(), lo);
  while (true) {
    Model m;
    for (size_t i = 0; i < vars.size(); ++i) m[vars[i]] = point[i];
    try {
      if (cfaforge::eval_formula(f, m)) {
        out.sat = true;
        out.model = m;
        return out;
      }
    } catch (const cfaforge::EvalUndefined&) {
    }
    size_t i = 0;
    for (; i < point.size(); ++i) {
      if (point[i] < hi) {
        ++point[i];
        break;
      }
      point[i] = lo;
    }
    if (i == point.size()) break;
  }
  return out;
}

}  // namespace testoracle
