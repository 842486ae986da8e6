#pragma once

#include <iterator>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cfaforge/cfg.hpp"

namespace cfaforge {

// Reaching definitions. The entry node acts as an implicit definition of
// every variable, so a read with no preceding write has a definite source.
struct ReachingDefs {
  // Definitions live at each node's entry: (variable, defining node id).
  std::map<int, std::set<std::pair<std::string, int>>> in;

  // Use-def chains: defs reaching node `n` for variable `v`.
  std::set<int> defs_for(int n, const std::string& v) const {
    std::set<int> out;
    auto it = in.find(n);
    if (it == in.end()) return out;
    for (const auto& [var, def] : it->second)
      if (var == v) out.insert(def);
    return out;
  }
};

inline std::set<std::string> all_variables(const Cfg& cfg) {
  std::set<std::string> vars;
  for (const auto& n : cfg.nodes) {
    for (const auto& v : instr_reads(n)) vars.insert(v);
    if (auto d = instr_defines(n)) vars.insert(*d);
  }
  return vars;
}

inline ReachingDefs compute_reaching_defs(const Cfg& cfg) {
  auto vars = all_variables(cfg);
  std::map<int, std::set<std::pair<std::string, int>>> out;
  ReachingDefs rd;
  for (const auto& n : cfg.nodes) {
    rd.in[n.id];
    out[n.id];
  }
  for (const auto& v : vars) out[cfg.entry_id].insert({v, cfg.entry_id});

  auto preds = cfg.predecessors();
  std::vector<int> work = cfg.node_ids();
  while (!work.empty()) {
    int id = work.back();
    work.pop_back();
    std::set<std::pair<std::string, int>> in;
    for (const auto& [p, label] : preds[id]) {
      (void)label;
      for (const auto& d : out[p]) in.insert(d);
    }
    const Instruction& n = cfg.node(id);
    std::set<std::pair<std::string, int>> o = in;
    if (auto def = instr_defines(n)) {
      for (auto it = o.begin(); it != o.end();)
        it = it->first == *def ? o.erase(it) : std::next(it);
      o.insert({*def, id});
    }
    if (id == cfg.entry_id)
      for (const auto& v : vars) o.insert({v, id});
    bool changed = in != rd.in[id] || o != out[id];
    rd.in[id] = std::move(in);
    if (changed) {
      out[id] = std::move(o);
      for (const auto& e : cfg.out(id)) work.push_back(e.to);
    }
  }
  return rd;
}

struct PostDominators {
  std::map<int, std::set<int>> pdom;  // reflexive
  std::map<int, int> ipdom;           // exit maps to -1
};

// Requires every node to reach exit; a goto-only infinite loop violates that.
inline PostDominators compute_postdominators(const Cfg& cfg) {
  auto covered = cfg.reaches_exit();
  for (const auto& n : cfg.nodes)
    if (!covered.count(n.id))
      throw NoExitPathError("node " + std::to_string(n.id) + " (" + render(n) +
                            ") cannot reach the exit node");

  auto ids = cfg.node_ids();
  std::set<int> all(ids.begin(), ids.end());
  PostDominators pd;
  for (int id : ids) pd.pdom[id] = (id == cfg.exit_id) ? std::set<int>{id} : all;

  bool changed = true;
  while (changed) {
    changed = false;
    for (int id : ids) {
      if (id == cfg.exit_id) continue;
      std::set<int> meet;
      bool first = true;
      for (const auto& e : cfg.out(id)) {
        if (first) {
          meet = pd.pdom[e.to];
          first = false;
        } else {
          std::set<int> tmp;
          for (int x : meet)
            if (pd.pdom[e.to].count(x)) tmp.insert(x);
          meet = std::move(tmp);
        }
      }
      meet.insert(id);
      if (meet != pd.pdom[id]) {
        pd.pdom[id] = std::move(meet);
        changed = true;
      }
    }
  }

  for (int id : ids) {
    if (id == cfg.exit_id) {
      pd.ipdom[id] = -1;
      continue;
    }
    int best = -1;
    size_t best_size = 0;
    for (int c : pd.pdom[id]) {
      if (c == id) continue;
      size_t sz = pd.pdom[c].size();
      if (best == -1 || sz > best_size) {
        best = c;
        best_size = sz;
      }
    }
    pd.ipdom[id] = best;
  }
  return pd;
}

// Control dependence: node n depends on branch b when one of b's outcomes
// always reaches n and the other may avoid it. Computed by walking the
// postdominator tree from each branch successor up to (excluding) the
// branch's immediate postdominator; a loop header ends up dependent on
// itself. Nodes executed unconditionally depend on the entry node.
inline std::map<int, std::set<int>> compute_control_deps(const Cfg& cfg,
                                                         const PostDominators& pd) {
  std::map<int, std::set<int>> deps;
  for (const auto& n : cfg.nodes) deps[n.id];
  for (const auto& b : cfg.nodes) {
    if (b.kind != InstrKind::Branch && b.kind != InstrKind::AbstractPredicate) continue;
    int stop = pd.ipdom.at(b.id);
    for (const auto& e : cfg.out(b.id)) {
      int cur = e.to;
      while (cur != stop && cur != -1) {
        deps[cur].insert(b.id);
        cur = pd.ipdom.at(cur);
      }
    }
  }
  // Entry behaves like a branch whose other arm jumps straight to exit.
  if (!cfg.out(cfg.entry_id).empty()) {
    int cur = cfg.out(cfg.entry_id)[0].to;
    while (cur != cfg.exit_id && cur != -1) {
      deps[cur].insert(cfg.entry_id);
      cur = pd.ipdom.at(cur);
    }
  }
  return deps;
}

// Program dependence graph over CFG node ids.
struct Pdg {
  std::map<int, std::set<int>> data;  // node -> definition nodes it reads
  std::map<int, std::set<int>> ctrl;  // node -> nodes controlling it
};

inline Pdg build_pdg(const Cfg& cfg, const ReachingDefs& rd, const PostDominators& pd) {
  Pdg pdg;
  for (const auto& n : cfg.nodes) {
    pdg.data[n.id];
    for (const auto& v : instr_reads(n))
      for (int def : rd.defs_for(n.id, v)) pdg.data[n.id].insert(def);
  }
  pdg.ctrl = compute_control_deps(cfg, pd);
  return pdg;
}

inline Pdg build_pdg(const Cfg& cfg) {
  auto rd = compute_reaching_defs(cfg);
  auto pd = compute_postdominators(cfg);
  return build_pdg(cfg, rd, pd);
}

inline std::string pdg_to_dot(const Cfg& cfg, const Pdg& pdg) {
  std::string s = "digraph pdg {\n  node [fontname=\"monospace\"];\n";
  auto ids = cfg.node_ids();
  std::sort(ids.begin(), ids.end());
  for (int id : ids)
    s += "  n" + std::to_string(id) + " [label=\"" + std::to_string(id) + ": " +
         escape_dot(render(cfg.node(id))) + "\"];\n";
  for (int id : ids) {
    for (int d : pdg.data.at(id))
      s += "  n" + std::to_string(d) + " -> n" + std::to_string(id) + " [color=blue];\n";
    for (int c : pdg.ctrl.at(id))
      s += "  n" + std::to_string(c) + " -> n" + std::to_string(id) +
           " [color=red, style=dashed];\n";
  }
  s += "}\n";
  return s;
}

}  // namespace cfaforge
