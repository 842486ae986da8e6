#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "cfaforge/cfg.hpp"
#include "cfaforge/dataflow.hpp"
#include "cfaforge/interp.hpp"

namespace cfaforge {

struct OptStats {
  int iterations = 0;
  int folds = 0;
  int propagations = 0;
  int branches_removed = 0;
  bool hit_cap = false;
  bool division_by_zero = false;  // a literal division by zero was left in place
};

namespace detail {

inline bool is_literal(const ExprPtr& e) {
  return e->kind == Expr::Kind::IntLit || e->kind == Expr::Kind::BoolLit;
}

inline bool literal_truth(const ExprPtr& e) {
  return e->kind == Expr::Kind::BoolLit ? e->bool_value : e->int_value != 0;
}

inline ExprPtr literal_of(Type type, int32_t value, SourcePos pos) {
  if (type == Type::Bool) return make_bool(value != 0, pos);
  return make_int(value, pos);
}

// Folds literal-only subexpressions bottom-up, with the interpreter's 32-bit
// wraparound semantics. Divisions by a literal zero are left untouched.
inline ExprPtr fold_expr(const ExprPtr& e, OptStats& stats) {
  switch (e->kind) {
    case Expr::Kind::Unary: {
      ExprPtr a = fold_expr(e->args[0], stats);
      if (is_literal(a)) {
        ++stats.folds;
        return literal_of(e->type, eval_expr(make_unary(e->un_op, a, e->pos), {}), e->pos);
      }
      if (a == e->args[0]) return e;
      return make_unary(e->un_op, a, e->pos);
    }
    case Expr::Kind::Binary: {
      ExprPtr a = fold_expr(e->args[0], stats);
      ExprPtr b = fold_expr(e->args[1], stats);
      if (is_literal(a) && is_literal(b)) {
        if ((e->bin_op == BinOp::Div || e->bin_op == BinOp::Mod) && b->int_value == 0) {
          stats.division_by_zero = true;
        } else {
          ++stats.folds;
          return literal_of(e->type, eval_expr(make_binary(e->bin_op, a, b, e->pos), {}), e->pos);
        }
      }
      if (a == e->args[0] && b == e->args[1]) return e;
      return make_binary(e->bin_op, a, b, e->pos);
    }
    default:
      return e;
  }
}

inline bool fold_pass(Cfg& cfg, OptStats& stats) {
  int before = stats.folds;
  for (auto& n : cfg.nodes) {
    if (n.expr) n.expr = fold_expr(n.expr, stats);
    for (auto& a : n.havoc_args) a = fold_expr(a, stats);
  }
  return stats.folds != before;
}

// Replaces a variable read by a literal when every definition reaching the
// node is an assignment of that same literal. Entry and havoc definitions
// leave the value unknown and block propagation.
inline bool propagate_pass(Cfg& cfg, OptStats& stats) {
  ReachingDefs rd = compute_reaching_defs(cfg);
  bool changed = false;
  for (auto& n : cfg.nodes) {
    for (const auto& v : instr_reads(n)) {
      auto defs = rd.defs_for(n.id, v);
      if (defs.empty()) continue;
      ExprPtr value;
      bool ok = true;
      for (int d : defs) {
        const Instruction& def = cfg.node(d);
        if (def.kind != InstrKind::Assign || !is_literal(def.expr)) {
          ok = false;
          break;
        }
        if (!value)
          value = def.expr;
        else if (!expr_equal(value, def.expr))
          ok = false;
        if (!ok) break;
      }
      if (!ok || !value) continue;
      if (n.expr && expr_mentions(n.expr, v)) {
        n.expr = expr_subst(n.expr, v, value);
        changed = true;
        ++stats.propagations;
      }
      for (auto& a : n.havoc_args) {
        if (expr_mentions(a, v)) {
          a = expr_subst(a, v, value);
          changed = true;
          ++stats.propagations;
        }
      }
    }
  }
  return changed;
}

inline bool exit_reachable_without_edge(const Cfg& cfg, int branch_id, int doomed_to,
                                        EdgeLabel doomed_label) {
  std::set<int> seen{cfg.entry_id};
  std::vector<int> work{cfg.entry_id};
  while (!work.empty()) {
    int id = work.back();
    work.pop_back();
    for (const auto& e : cfg.out(id)) {
      if (id == branch_id && e.to == doomed_to && e.label == doomed_label) continue;
      if (seen.insert(e.to).second) work.push_back(e.to);
    }
  }
  return seen.count(cfg.exit_id) > 0;
}

// Turns branches with a literal condition into skips wired to the taken
// side. Skipped when cutting the untaken edge would disconnect the exit
// node (an always-true loop condition guards the only path out).
inline bool dead_branch_pass(Cfg& cfg, OptStats& stats) {
  bool changed = false;
  for (int id : cfg.node_ids()) {
    Instruction& n = cfg.node(id);
    if (n.kind != InstrKind::Branch || !is_literal(n.expr)) continue;
    bool taken = literal_truth(n.expr);
    int survivor = branch_target(cfg, id, taken);
    int doomed = branch_target(cfg, id, !taken);
    EdgeLabel doomed_label = taken ? EdgeLabel::False : EdgeLabel::True;
    if (!exit_reachable_without_edge(cfg, id, doomed, doomed_label)) continue;
    n.kind = InstrKind::Skip;
    n.expr = nullptr;
    cfg.out(id) = {{survivor, EdgeLabel::None}};
    ++stats.branches_removed;
    changed = true;
  }
  if (changed) normalize(cfg);
  return changed;
}

}  // namespace detail

// Runs folding, literal propagation, and dead-branch elimination to a
// fixpoint (capped). Node ids are never renumbered, only removed.
inline OptStats optimize(Cfg& cfg, int max_iterations = 50) {
  OptStats stats;
  for (int i = 0; i < max_iterations; ++i) {
    ++stats.iterations;
    bool changed = false;
    changed |= detail::fold_pass(cfg, stats);
    changed |= detail::propagate_pass(cfg, stats);
    changed |= detail::dead_branch_pass(cfg, stats);
    if (!changed) return stats;
  }
  stats.hit_cap = true;
  return stats;
}

}  // namespace cfaforge
