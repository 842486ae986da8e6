#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cfaforge/cfg.hpp"

namespace cfaforge {

struct CfaOp {
  enum class Kind { Assign, Assume, Havoc };
  Kind kind = Kind::Assume;
  std::string var;   // Assign / Havoc target
  ExprPtr expr;      // Assign rhs / Assume condition
  Type havoc_type = Type::Int;
};

inline CfaOp assign_op(std::string var, ExprPtr expr) {
  return {CfaOp::Kind::Assign, std::move(var), std::move(expr), Type::Int};
}
inline CfaOp assume_op(ExprPtr cond) { return {CfaOp::Kind::Assume, "", std::move(cond), Type::Int}; }
inline CfaOp havoc_op(std::string var, Type t = Type::Int) {
  return {CfaOp::Kind::Havoc, std::move(var), nullptr, t};
}

inline std::string render(const CfaOp& op) {
  switch (op.kind) {
    case CfaOp::Kind::Assign: return op.var + " := " + to_string(op.expr);
    case CfaOp::Kind::Assume: return "assume(" + to_string(op.expr) + ")";
    case CfaOp::Kind::Havoc: return "havoc(" + op.var + ")";
  }
  return "?";
}

struct CfaEdge {
  int from;
  CfaOp op;
  int to;
};

// Locations are dense ids: 0 = initial, 1 = error, 2 = exit, 3.. interior.
struct Cfa {
  std::string name;
  int num_locations = 3;
  std::vector<CfaEdge> edges;
  static constexpr int kInitial = 0;
  static constexpr int kError = 1;
  static constexpr int kExit = 2;

  std::vector<const CfaEdge*> out(int loc) const {
    std::vector<const CfaEdge*> result;
    for (const auto& e : edges)
      if (e.from == loc) result.push_back(&e);
    return result;
  }
};

inline std::string to_text(const Cfa& cfa) {
  std::string s;
  std::vector<CfaEdge> sorted = cfa.edges;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const CfaEdge& a, const CfaEdge& b) { return a.from < b.from; });
  for (const auto& e : sorted)
    s += std::to_string(e.from) + " --[" + render(e.op) + "]--> " + std::to_string(e.to) + "\n";
  return s;
}

// Lowers a normalized CFG to a CFA. Instructions move onto edges between
// program-counter locations; skip chains are compressed away; each assert
// contributes an assume(!cond) edge into the error location next to its
// assume(cond) continuation; abstract predicates become a havoc of a fresh
// boolean followed by an assume fork on it.
inline Cfa cfg_to_cfa(const Cfg& cfg) {
  Cfa cfa;
  cfa.name = cfg.name;

  // Location representative per node: skips forward to their successor.
  std::map<int, int> rep;  // node id -> node id carrying its location
  std::function<int(int, int)> find_rep = [&](int id, int depth) -> int {
    if (depth > int(cfg.nodes.size()))
      throw NoExitPathError("skip cycle with no way out at node " + std::to_string(id));
    auto it = rep.find(id);
    if (it != rep.end()) return it->second;
    const Instruction& n = cfg.node(id);
    int r = id;
    if (n.kind == InstrKind::Skip) r = find_rep(cfg.out(id)[0].to, depth + 1);
    rep[id] = r;
    return r;
  };
  for (const auto& n : cfg.nodes) find_rep(n.id, 0);

  // Dense location numbering, interior representatives in node-id order.
  std::map<int, int> loc;
  loc[cfg.entry_id] = Cfa::kInitial;
  loc[cfg.exit_id] = Cfa::kExit;
  int next_loc = 3;
  std::vector<int> ids = cfg.node_ids();
  std::sort(ids.begin(), ids.end());
  for (int id : ids) {
    if (rep.at(id) != id || id == cfg.entry_id || id == cfg.exit_id) continue;
    loc[id] = next_loc++;
  }
  auto loc_of = [&](int node_id) { return loc.at(rep.at(node_id)); };

  for (int id : ids) {
    if (rep.at(id) != id) continue;
    const Instruction& n = cfg.node(id);
    switch (n.kind) {
      case InstrKind::Entry:
        cfa.edges.push_back({Cfa::kInitial, assume_op(make_bool(true, n.pos)), loc_of(cfg.out(id)[0].to)});
        break;
      case InstrKind::Exit:
      case InstrKind::Skip:
        break;
      case InstrKind::Assign:
        cfa.edges.push_back({loc.at(id), assign_op(n.var, n.expr), loc_of(cfg.out(id)[0].to)});
        break;
      case InstrKind::Havoc:
        cfa.edges.push_back(
            {loc.at(id), havoc_op(n.var, n.havoc_type), loc_of(cfg.out(id)[0].to)});
        break;
      case InstrKind::Assume:
        cfa.edges.push_back({loc.at(id), assume_op(n.expr), loc_of(cfg.out(id)[0].to)});
        break;
      case InstrKind::Assert:
        cfa.edges.push_back({loc.at(id), assume_op(negate_expr(n.expr)), Cfa::kError});
        cfa.edges.push_back({loc.at(id), assume_op(n.expr), loc_of(cfg.out(id)[0].to)});
        break;
      case InstrKind::Branch: {
        int t = branch_target(cfg, id, true);
        int f = branch_target(cfg, id, false);
        cfa.edges.push_back({loc.at(id), assume_op(n.expr), loc_of(t)});
        cfa.edges.push_back({loc.at(id), assume_op(negate_expr(n.expr)), loc_of(f)});
        break;
      }
      case InstrKind::AbstractPredicate: {
        int t = branch_target(cfg, id, true);
        int f = branch_target(cfg, id, false);
        std::string b = "phi#" + std::to_string(n.pred_id);
        ExprPtr bvar = make_var(b, Type::Bool, n.pos);
        int mid = next_loc++;
        cfa.edges.push_back({loc.at(id), havoc_op(b, Type::Bool), mid});
        cfa.edges.push_back({mid, assume_op(bvar), loc_of(t)});
        cfa.edges.push_back({mid, assume_op(make_unary(UnOp::Not, bvar, n.pos)), loc_of(f)});
        break;
      }
    }
  }
  cfa.num_locations = next_loc;
  return cfa;
}

}  // namespace cfaforge
