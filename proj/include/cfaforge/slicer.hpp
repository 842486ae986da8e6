#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cfaforge/cfg.hpp"
#include "cfaforge/dataflow.hpp"

namespace cfaforge {

struct SliceCriterion {
  int instruction = -1;
  std::set<std::string> variables;
};

enum class SlicerKind { None, Backward, Thin, Value };

inline const char* to_string(SlicerKind k) {
  switch (k) {
    case SlicerKind::None: return "NONE";
    case SlicerKind::Backward: return "BACKWARD";
    case SlicerKind::Thin: return "THIN";
    case SlicerKind::Value: return "VALUE";
  }
  return "?";
}

struct Slice {
  SliceCriterion criterion;
  std::vector<SliceCriterion> extra_criteria;  // added by refinement rounds
  std::set<int> retained;
  std::set<int> abstracted;  // branch ids replaced by abstract predicates
  Cfg slice_cfg;
  int refinement_count = 0;
};

// One criterion per assert node, in instruction-id (source) order.
inline std::vector<SliceCriterion> extract_criteria(const Cfg& cfg) {
  std::vector<int> ids;
  for (const auto& n : cfg.nodes)
    if (n.kind == InstrKind::Assert) ids.push_back(n.id);
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) throw NoAssertError();
  std::vector<SliceCriterion> out;
  for (int id : ids) {
    SliceCriterion c;
    c.instruction = id;
    for (const auto& v : instr_reads(cfg.node(id))) c.variables.insert(v);
    out.push_back(std::move(c));
  }
  return out;
}

namespace detail {

// Shared per-CFG analysis state for slicing one or more criteria.
struct SliceContext {
  const Cfg& cfg;
  const Pdg& pdg;
  ReachingDefs rd;
  PostDominators pd;

  SliceContext(const Cfg& c, const Pdg& p)
      : cfg(c), pdg(p), rd(compute_reaching_defs(c)), pd(compute_postdominators(c)) {}
};

// Definitions of the criterion's variables that reach the criterion node.
inline std::set<int> criterion_seeds(const SliceContext& ctx, const SliceCriterion& crit) {
  std::set<int> seeds;
  for (const auto& v : crit.variables)
    for (int d : ctx.rd.defs_for(crit.instruction, v)) seeds.insert(d);
  return seeds;
}

inline std::set<int> closure(const Pdg& pdg, std::set<int> start, bool data, bool ctrl) {
  std::vector<int> work(start.begin(), start.end());
  while (!work.empty()) {
    int id = work.back();
    work.pop_back();
    if (data)
      for (int d : pdg.data.at(id))
        if (start.insert(d).second) work.push_back(d);
    if (ctrl)
      for (int c : pdg.ctrl.at(id))
        if (start.insert(c).second) work.push_back(c);
  }
  return start;
}

// First value-impacting node reachable along paths ending at the first visit
// of gamma. kNoImpact stands for a path that reaches gamma without touching
// any value-impacting node.
constexpr int kNoImpact = -1;

inline std::map<int, std::set<int>> first_impact_sets(const Cfg& cfg, const std::set<int>& vi,
                                                      int gamma) {
  // Successor map with gamma's out-edges removed: paths stop at first visit.
  std::map<int, std::vector<int>> succs;
  std::map<int, std::vector<int>> preds;
  for (const auto& n : cfg.nodes) {
    succs[n.id];
    preds[n.id];
  }
  for (const auto& n : cfg.nodes) {
    if (n.id == gamma) continue;
    for (const auto& e : cfg.out(n.id)) {
      succs[n.id].push_back(e.to);
      preds[e.to].push_back(n.id);
    }
  }

  // Nodes with at least one path to gamma in the pruned graph.
  std::set<int> reach{gamma};
  std::vector<int> work{gamma};
  while (!work.empty()) {
    int id = work.back();
    work.pop_back();
    for (int p : preds[id])
      if (reach.insert(p).second) work.push_back(p);
  }

  std::map<int, std::set<int>> first;
  for (const auto& n : cfg.nodes) first[n.id];
  first[gamma] = {kNoImpact};
  for (int id : reach)
    if (id != gamma && vi.count(id)) first[id] = {id};

  bool changed = true;
  while (changed) {
    changed = false;
    for (int id : reach) {
      if (id == gamma || vi.count(id)) continue;
      for (int m : succs[id])
        for (int f : first[m])
          if (first[id].insert(f).second) changed = true;
    }
  }
  return first;
}

// Condition 3: some value-impacting t is the first value-impacting node
// along a path from one successor but not along a path from the other.
inline bool decides_first_impact(const std::set<int>& f1, const std::set<int>& f2) {
  auto check = [](const std::set<int>& a, const std::set<int>& b) {
    for (int t : a) {
      if (t == kNoImpact) continue;
      if (b.size() > 1 || (b.size() == 1 && *b.begin() != t)) return true;
    }
    return false;
  };
  return check(f1, f2) || check(f2, f1);
}

// Least set of value-impacting instructions for one criterion.
inline std::set<int> value_impact_set(const SliceContext& ctx, const SliceCriterion& crit) {
  std::set<int> vi = closure(ctx.pdg, criterion_seeds(ctx, crit), true, false);
  while (true) {
    auto first = first_impact_sets(ctx.cfg, vi, crit.instruction);
    std::set<int> added;
    for (const auto& n : ctx.cfg.nodes) {
      if (n.kind != InstrKind::Branch || vi.count(n.id) || n.id == crit.instruction) continue;
      int t1 = branch_target(ctx.cfg, n.id, true);
      int t2 = branch_target(ctx.cfg, n.id, false);
      if (decides_first_impact(first.at(t1), first.at(t2))) added.insert(n.id);
    }
    if (added.empty()) return vi;
    for (int b : added) vi.insert(b);
    vi = closure(ctx.pdg, std::move(vi), true, false);
  }
}

// Branches that (transitively) control a kept node but are not kept get
// abstracted to nondeterministic predicates.
inline std::set<int> abstracted_branches(const SliceContext& ctx, const std::set<int>& retained) {
  std::set<int> abs;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& n : ctx.cfg.nodes) {
      if (!retained.count(n.id) && !abs.count(n.id)) continue;
      for (int c : ctx.pdg.ctrl.at(n.id)) {
        if (ctx.cfg.node(c).kind != InstrKind::Branch) continue;
        if (retained.count(c) || abs.count(c)) continue;
        abs.insert(c);
        changed = true;
      }
    }
  }
  return abs;
}

// Rebuilds a CFG over the kept nodes, splicing control flow through removed
// ones: a removed straight-line node forwards to its successor, a removed
// branch forwards to its immediate postdominator (its whole exclusive region
// is removed with it).
inline Cfg extract_slice_cfg(const SliceContext& ctx, const std::set<int>& retained,
                             const std::set<int>& abstracted) {
  std::set<int> kept = retained;
  for (int b : abstracted) kept.insert(b);

  std::map<int, int> memo;
  std::function<int(int)> next_kept = [&](int id) -> int {
    auto it = memo.find(id);
    if (it != memo.end()) return it->second;
    int result;
    if (kept.count(id)) {
      result = id;
    } else if (ctx.cfg.node(id).kind == InstrKind::Branch) {
      result = next_kept(ctx.pd.ipdom.at(id));
    } else {
      const auto& out = ctx.cfg.out(id);
      if (out.size() != 1)
        throw InternalError("removed node " + std::to_string(id) + " has no unique successor");
      result = next_kept(out[0].to);
    }
    memo[id] = result;
    return result;
  };

  Cfg sliced;
  sliced.name = ctx.cfg.name;
  sliced.entry_id = ctx.cfg.entry_id;
  sliced.exit_id = ctx.cfg.exit_id;
  for (const auto& n : ctx.cfg.nodes) {
    if (!kept.count(n.id)) continue;
    Instruction copy = n;
    if (abstracted.count(n.id)) {
      copy.kind = InstrKind::AbstractPredicate;
      copy.expr = nullptr;
      copy.pred_id = n.id;
    }
    sliced.add_node(std::move(copy));
  }
  sliced.next_id = ctx.cfg.next_id;
  for (const auto& n : ctx.cfg.nodes) {
    if (!kept.count(n.id)) continue;
    for (const auto& e : ctx.cfg.out(n.id)) sliced.add_edge(n.id, next_kept(e.to), e.label);
  }
  normalize(sliced);
  return sliced;
}

inline Slice slice_multi(const SliceContext& ctx, const std::vector<SliceCriterion>& criteria,
                         SlicerKind kind) {
  std::set<int> retained;
  for (const auto& crit : criteria) {
    retained.insert(crit.instruction);
    switch (kind) {
      case SlicerKind::Backward: {
        std::set<int> start = criterion_seeds(ctx, crit);
        start.insert(crit.instruction);
        for (int n : closure(ctx.pdg, std::move(start), true, true)) retained.insert(n);
        break;
      }
      case SlicerKind::Thin:
        for (int n : closure(ctx.pdg, criterion_seeds(ctx, crit), true, false))
          retained.insert(n);
        break;
      case SlicerKind::Value:
        for (int n : value_impact_set(ctx, crit)) retained.insert(n);
        break;
      case SlicerKind::None:
        throw InternalError("slice_multi called with SlicerKind::None");
    }
  }
  retained.insert(ctx.cfg.entry_id);
  retained.insert(ctx.cfg.exit_id);

  Slice s;
  s.criterion = criteria.front();
  s.extra_criteria.assign(criteria.begin() + 1, criteria.end());
  if (kind != SlicerKind::Backward) s.abstracted = abstracted_branches(ctx, retained);
  s.retained = retained;
  s.slice_cfg = extract_slice_cfg(ctx, retained, s.abstracted);
  return s;
}

}  // namespace detail

inline Slice backward_slice(const Pdg& pdg, const Cfg& cfg, const SliceCriterion& criterion) {
  detail::SliceContext ctx(cfg, pdg);
  return detail::slice_multi(ctx, {criterion}, SlicerKind::Backward);
}

inline Slice thin_slice(const Pdg& pdg, const Cfg& cfg, const SliceCriterion& criterion) {
  detail::SliceContext ctx(cfg, pdg);
  return detail::slice_multi(ctx, {criterion}, SlicerKind::Thin);
}

inline Slice value_slice(const Pdg& pdg, const Cfg& cfg, const SliceCriterion& criterion) {
  detail::SliceContext ctx(cfg, pdg);
  return detail::slice_multi(ctx, {criterion}, SlicerKind::Value);
}

inline Slice make_slice(const Pdg& pdg, const Cfg& cfg, const SliceCriterion& criterion,
                        SlicerKind kind) {
  detail::SliceContext ctx(cfg, pdg);
  return detail::slice_multi(ctx, {criterion}, kind);
}

// Re-slices with the abstracted branch added as a criterion. The result
// keeps strictly more instructions; iterating until `abstracted` is empty
// converges to the backward slice.
inline Slice refine_slice(const Slice& slice, const Pdg& pdg, const Cfg& cfg, int predicate,
                          SlicerKind strategy = SlicerKind::Value) {
  if (!slice.abstracted.count(predicate))
    throw UnknownPredicateError("branch " + std::to_string(predicate) +
                                " is not an abstract predicate of this slice");
  if (strategy != SlicerKind::Thin && strategy != SlicerKind::Value)
    throw InternalError("refinement strategy must be thin or value");

  std::vector<SliceCriterion> criteria{slice.criterion};
  for (const auto& c : slice.extra_criteria) criteria.push_back(c);
  SliceCriterion added;
  added.instruction = predicate;
  for (const auto& v : instr_reads(cfg.node(predicate))) added.variables.insert(v);
  criteria.push_back(std::move(added));

  detail::SliceContext ctx(cfg, pdg);
  Slice refined = detail::slice_multi(ctx, criteria, strategy);
  refined.refinement_count = slice.refinement_count + 1;
  return refined;
}

}  // namespace cfaforge
