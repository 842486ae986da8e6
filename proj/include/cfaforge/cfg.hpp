#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "cfaforge/ast.hpp"

namespace cfaforge {

enum class InstrKind {
  Entry,
  Exit,
  Assign,
  Branch,
  Assume,
  Assert,
  Havoc,
  Skip,
  AbstractPredicate,
};

inline const char* to_string(InstrKind k) {
  switch (k) {
    case InstrKind::Entry: return "entry";
    case InstrKind::Exit: return "exit";
    case InstrKind::Assign: return "assign";
    case InstrKind::Branch: return "branch";
    case InstrKind::Assume: return "assume";
    case InstrKind::Assert: return "assert";
    case InstrKind::Havoc: return "havoc";
    case InstrKind::Skip: return "skip";
    default: return "phi";
  }
}

enum class EdgeLabel { None, True, False };

struct Edge {
  int to;
  EdgeLabel label = EdgeLabel::None;
};

struct Instruction {
  int id = -1;
  InstrKind kind = InstrKind::Skip;
  std::string var;                  // Assign / Havoc target
  ExprPtr expr;                     // Assign rhs, Branch / Assume / Assert condition
  std::vector<ExprPtr> havoc_args;  // extern call arguments (data reads)
  std::string callee;               // extern callee, for rendering
  Type havoc_type = Type::Int;      // Havoc: type of the unconstrained value
  int pred_id = -1;                 // AbstractPredicate: abstracted branch's original id
  SourcePos pos;
};

inline std::string render(const Instruction& n) {
  switch (n.kind) {
    case InstrKind::Entry: return "entry";
    case InstrKind::Exit: return "exit";
    case InstrKind::Skip: return "skip";
    case InstrKind::Assign: return n.var + " := " + to_string(n.expr);
    case InstrKind::Branch: return "branch(" + to_string(n.expr) + ")";
    case InstrKind::Assume: return "assume(" + to_string(n.expr) + ")";
    case InstrKind::Assert: return "assert(" + to_string(n.expr) + ")";
    case InstrKind::AbstractPredicate: return "phi#" + std::to_string(n.pred_id);
    case InstrKind::Havoc: {
      if (n.callee.empty()) return "havoc(" + n.var + ")";
      std::string s = n.var + " := " + n.callee + "(";
      for (size_t i = 0; i < n.havoc_args.size(); ++i) {
        if (i) s += ", ";
        s += to_string(n.havoc_args[i]);
      }
      return s + ") [havoc]";
    }
  }
  return "?";
}

// Variables read by an instruction. Havoc reads its extern-call arguments
// (the value stays unconstrained, but the data dependence is real).
inline std::vector<std::string> instr_reads(const Instruction& n) {
  std::vector<std::string> out;
  switch (n.kind) {
    case InstrKind::Assign:
    case InstrKind::Branch:
    case InstrKind::Assume:
    case InstrKind::Assert:
      collect_vars(n.expr, out);
      break;
    case InstrKind::Havoc:
      for (const auto& a : n.havoc_args) collect_vars(a, out);
      break;
    default:
      break;
  }
  return out;
}

inline std::optional<std::string> instr_defines(const Instruction& n) {
  if (n.kind == InstrKind::Assign || n.kind == InstrKind::Havoc) return n.var;
  return std::nullopt;
}

struct Cfg {
  std::string name;
  std::vector<Instruction> nodes;
  std::vector<std::vector<Edge>> succs;
  int entry_id = -1;
  int exit_id = -1;
  int next_id = 0;

  int add_node(Instruction n) {
    if (n.id < 0) n.id = next_id;
    next_id = std::max(next_id, n.id + 1);
    index_.emplace(n.id, static_cast<int>(nodes.size()));
    nodes.push_back(std::move(n));
    succs.emplace_back();
    return nodes.back().id;
  }

  void add_edge(int from, int to, EdgeLabel label = EdgeLabel::None) {
    succs[index(from)].push_back({to, label});
  }

  bool has_node(int id) const { return index_.count(id) > 0; }
  const Instruction& node(int id) const { return nodes[index(id)]; }
  Instruction& node(int id) { return nodes[index(id)]; }
  const std::vector<Edge>& out(int id) const { return succs[index(id)]; }
  std::vector<Edge>& out(int id) { return succs[index(id)]; }

  int index(int id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw InternalError("unknown node id " + std::to_string(id));
    return it->second;
  }

  std::vector<int> node_ids() const {
    std::vector<int> ids;
    ids.reserve(nodes.size());
    for (const auto& n : nodes) ids.push_back(n.id);
    return ids;
  }

  // Predecessor map (id -> list of (pred id, label)).
  std::map<int, std::vector<std::pair<int, EdgeLabel>>> predecessors() const {
    std::map<int, std::vector<std::pair<int, EdgeLabel>>> preds;
    for (const auto& n : nodes) preds[n.id];
    for (const auto& n : nodes)
      for (const auto& e : succs[index(n.id)]) preds[e.to].push_back({n.id, e.label});
    return preds;
  }

  std::set<int> reachable_from(int start) const {
    std::set<int> seen;
    std::deque<int> work{start};
    seen.insert(start);
    while (!work.empty()) {
      int id = work.front();
      work.pop_front();
      for (const auto& e : out(id))
        if (seen.insert(e.to).second) work.push_back(e.to);
    }
    return seen;
  }

  // Ids of nodes from which exit is reachable.
  std::set<int> reaches_exit() const {
    auto preds = predecessors();
    std::set<int> seen{exit_id};
    std::deque<int> work{exit_id};
    while (!work.empty()) {
      int id = work.front();
      work.pop_front();
      for (const auto& [p, label] : preds[id])
        if (seen.insert(p).second) work.push_back(p);
    }
    return seen;
  }

  void remove_nodes(const std::set<int>& doomed) {
    std::vector<Instruction> keep_nodes;
    std::vector<std::vector<Edge>> keep_succs;
    for (size_t i = 0; i < nodes.size(); ++i) {
      if (doomed.count(nodes[i].id)) continue;
      std::vector<Edge> edges;
      for (const auto& e : succs[i])
        if (!doomed.count(e.to)) edges.push_back(e);
      keep_nodes.push_back(nodes[i]);
      keep_succs.push_back(std::move(edges));
    }
    nodes = std::move(keep_nodes);
    succs = std::move(keep_succs);
    index_.clear();
    for (size_t i = 0; i < nodes.size(); ++i) index_.emplace(nodes[i].id, static_cast<int>(i));
  }

 private:
  std::unordered_map<int, int> index_;
};

// Prunes nodes unreachable from entry (exit is structural and always kept) and
// validates the shape: branches have exactly two out-edges labeled true/false,
// everything else at most one, entry has no predecessors, exit no successors.
inline void normalize(Cfg& cfg) {
  auto reachable = cfg.reachable_from(cfg.entry_id);
  reachable.insert(cfg.exit_id);
  std::set<int> doomed;
  for (int id : cfg.node_ids())
    if (!reachable.count(id)) doomed.insert(id);
  if (!doomed.empty()) cfg.remove_nodes(doomed);

  for (const auto& n : cfg.nodes) {
    const auto& edges = cfg.out(n.id);
    if (n.kind == InstrKind::Branch || n.kind == InstrKind::AbstractPredicate) {
      bool ok = edges.size() == 2 &&
                ((edges[0].label == EdgeLabel::True && edges[1].label == EdgeLabel::False) ||
                 (edges[0].label == EdgeLabel::False && edges[1].label == EdgeLabel::True));
      if (!ok) throw InternalError("branch node " + std::to_string(n.id) + " is malformed");
    } else if (n.kind == InstrKind::Exit) {
      if (!edges.empty()) throw InternalError("exit node has successors");
    } else if (edges.size() != 1) {
      throw InternalError("node " + std::to_string(n.id) + " (" + render(n) +
                          ") must have exactly one successor");
    }
  }
  auto preds = cfg.predecessors();
  if (!preds[cfg.entry_id].empty()) throw InternalError("entry node has predecessors");
}

inline int branch_target(const Cfg& cfg, int branch_id, bool taken) {
  for (const auto& e : cfg.out(branch_id))
    if ((e.label == EdgeLabel::True) == taken) return e.to;
  throw InternalError("branch without " + std::string(taken ? "true" : "false") + " edge");
}

inline bool instr_equal(const Instruction& a, const Instruction& b) {
  if (a.id != b.id || a.kind != b.kind || a.var != b.var || a.callee != b.callee ||
      a.pred_id != b.pred_id)
    return false;
  if ((a.expr == nullptr) != (b.expr == nullptr)) return false;
  if (a.expr && !expr_equal(a.expr, b.expr)) return false;
  if (a.havoc_args.size() != b.havoc_args.size()) return false;
  for (size_t i = 0; i < a.havoc_args.size(); ++i)
    if (!expr_equal(a.havoc_args[i], b.havoc_args[i])) return false;
  return true;
}

inline bool cfg_equal(const Cfg& a, const Cfg& b) {
  if (a.entry_id != b.entry_id || a.exit_id != b.exit_id) return false;
  if (a.nodes.size() != b.nodes.size()) return false;
  for (const auto& n : a.nodes) {
    if (!b.has_node(n.id)) return false;
    if (!instr_equal(n, b.node(n.id))) return false;
    auto ea = a.out(n.id);
    auto eb = b.out(n.id);
    if (ea.size() != eb.size()) return false;
    auto key = [](const Edge& e) { return std::make_pair(e.to, static_cast<int>(e.label)); };
    std::vector<std::pair<int, int>> ka, kb;
    for (const auto& e : ea) ka.push_back(key(e));
    for (const auto& e : eb) kb.push_back(key(e));
    std::sort(ka.begin(), ka.end());
    std::sort(kb.begin(), kb.end());
    if (ka != kb) return false;
  }
  return true;
}

inline std::string escape_dot(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

inline std::string to_text(const Cfg& cfg) {
  std::string out;
  auto ids = cfg.node_ids();
  std::sort(ids.begin(), ids.end());
  for (int id : ids) {
    out += std::to_string(id) + ": " + render(cfg.node(id));
    auto edges = cfg.out(id);
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
      return std::make_pair(a.to, static_cast<int>(a.label)) <
             std::make_pair(b.to, static_cast<int>(b.label));
    });
    for (size_t i = 0; i < edges.size(); ++i) {
      out += i == 0 ? "  -> " : ", ";
      if (edges[i].label == EdgeLabel::True) out += "T:";
      if (edges[i].label == EdgeLabel::False) out += "F:";
      out += std::to_string(edges[i].to);
    }
    out += '\n';
  }
  return out;
}

inline std::string to_dot(const Cfg& cfg) {
  std::string out = "digraph cfg {\n";
  auto ids = cfg.node_ids();
  std::sort(ids.begin(), ids.end());
  for (int id : ids) {
    const auto& n = cfg.node(id);
    const char* shape = "box";
    if (n.kind == InstrKind::Branch || n.kind == InstrKind::AbstractPredicate) shape = "diamond";
    if (n.kind == InstrKind::Entry || n.kind == InstrKind::Exit) shape = "oval";
    out += "  n" + std::to_string(id) + " [shape=" + shape + ",label=\"" +
           escape_dot(render(n)) + "\"];\n";
  }
  for (int id : ids) {
    auto edges = cfg.out(id);
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
      return std::make_pair(a.to, static_cast<int>(a.label)) <
             std::make_pair(b.to, static_cast<int>(b.label));
    });
    for (const auto& e : edges) {
      out += "  n" + std::to_string(id) + " -> n" + std::to_string(e.to);
      if (e.label == EdgeLabel::True) out += " [label=\"T\"]";
      if (e.label == EdgeLabel::False) out += " [label=\"F\"]";
      out += ";\n";
    }
  }
  out += "}\n";
  return out;
}

}  // namespace cfaforge
