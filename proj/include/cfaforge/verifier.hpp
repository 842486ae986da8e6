#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cfaforge/cfa.hpp"
#include "cfaforge/diag.hpp"
#include "cfaforge/formula.hpp"
#include "cfaforge/smtlib.hpp"
#include "cfaforge/solver.hpp"

namespace cfaforge {

enum class TriBool : int8_t { False = -1, Unknown = 0, True = 1 };

// Predicates tracked by the abstraction. Grows monotonically during a run;
// canonical keys make duplicate discoveries observable.
struct Precision {
  std::vector<ExprPtr> predicates;
  std::set<std::string> keys;

  bool add(const ExprPtr& p) {
    std::string k = canonical_atom_key(p);
    if (!keys.insert(k).second) return false;
    predicates.push_back(p);
    return true;
  }
  bool knows(const ExprPtr& p) const { return keys.count(canonical_atom_key(p)) > 0; }
  size_t size() const { return predicates.size(); }
};

struct ArgNode {
  int id = -1;
  int location = -1;
  std::vector<TriBool> state;  // parallel to Precision::predicates
  int parent = -1;
  int in_edge = -1;     // index into Cfa::edges for parent -> this
  int covered_by = -1;  // covered nodes are not expanded
};

struct Arg {
  std::vector<ArgNode> nodes;
};

enum class SearchOrder { Bfs, Dfs };

inline const char* to_string(SearchOrder s) { return s == SearchOrder::Bfs ? "BFS" : "DFS"; }

enum class FeasStatus { Feasible, Infeasible, Undecided };

struct Counterexample {
  std::vector<int> edges;  // indices into Cfa::edges, initial location to error
  FeasStatus status = FeasStatus::Undecided;
  int failure_index = -1;  // length of the shortest unsat prefix when infeasible
  Model model;             // SSA-versioned (name@k) model when feasible
  std::vector<int64_t> havoc_values;  // havoc results in path order when feasible
};

enum class Safety { Safe, Unsafe, Unknown };

inline const char* to_string(Safety s) {
  switch (s) {
    case Safety::Safe: return "true";
    case Safety::Unsafe: return "false";
    case Safety::Unknown: return "unknown";
  }
  return "unknown";
}

struct Verdict {
  Safety safe = Safety::Unknown;
  long arg_size = 0;  // node count of the last exploration
  int iterations = 0;
  long verification_time_ms = 0;
  Counterexample witness;  // populated iff unsafe
  std::string reason;      // why unknown, empty otherwise
};

struct VerifierLimits {
  int max_cegar_iters = 200;
  long max_arg_nodes = 1000000;
  long timeout_ms = 180000;
  SolverLimits solver;
  std::string solver_cmd;  // external fallback for queries the builtin cannot decide
  long solver_cmd_timeout_ms = 30000;
};

// Decision context threaded through every satisfiability query.
struct DecideCtx {
  SolverLimits limits;
  std::string external_cmd;
  long external_timeout_ms = 30000;
};

// Internal solver first; an external process (when configured) breaks ties.
// External answers are trusted for unsat and model-checked for sat, so a
// misbehaving command can only cost precision, never soundness.
inline SolverVerdict decide(const ExprPtr& f, const DecideCtx& ctx = {}) {
  SolverVerdict v = solve(f, ctx.limits);
  if (v.status != SolveStatus::Unknown || ctx.external_cmd.empty()) return v;
  try {
    SolverVerdict ext = solve_external(f, ctx.external_cmd, ctx.external_timeout_ms);
    if (ext.status == SolveStatus::Sat) {
      if (!eval_formula(f, ext.model)) return v;
      return ext;
    }
    if (ext.status == SolveStatus::Unsat) return ext;
  } catch (const ExternalSolverError&) {
    // untranslatable formula or a broken command: stay unknown
  } catch (const EvalUndefined&) {
  }
  return v;
}

inline SolverVerdict decide_conjunction(const std::vector<ExprPtr>& cs, const DecideCtx& ctx = {},
                                        bool want_core = false) {
  SolverVerdict v = solve_conjunction(cs, ctx.limits, want_core);
  if (v.status != SolveStatus::Unknown || ctx.external_cmd.empty()) return v;
  SolverVerdict ext = decide(make_conjunction(cs), ctx);
  if (ext.status == SolveStatus::Unknown) return v;
  return ext;
}

namespace verifier_detail {

using Clock = std::chrono::steady_clock;

inline bool past(const Clock::time_point& deadline) { return Clock::now() >= deadline; }

inline ExprPtr state_constraint(const Precision& prec, const std::vector<TriBool>& state) {
  std::vector<ExprPtr> parts;
  for (size_t i = 0; i < state.size(); ++i) {
    if (state[i] == TriBool::True)
      parts.push_back(prec.predicates[i]);
    else if (state[i] == TriBool::False)
      parts.push_back(make_unary(UnOp::Not, prec.predicates[i]));
  }
  return make_conjunction(parts);
}

// Entailment helper: does the context force p one way? Solver unknowns
// degrade to TriBool::Unknown, which stays a sound over-approximation.
inline TriBool entailed(const ExprPtr& context, const ExprPtr& p, const DecideCtx& ctx) {
  SolverVerdict neg = decide(make_binary(BinOp::And, context, make_unary(UnOp::Not, p)), ctx);
  if (neg.status == SolveStatus::Unsat) return TriBool::True;
  SolverVerdict yes = decide(make_binary(BinOp::And, context, p), ctx);
  if (yes.status == SolveStatus::Unsat) return TriBool::False;
  return TriBool::Unknown;
}

}  // namespace verifier_detail

// Cartesian post: each predicate is updated independently. Returns nothing
// when an assume makes the state unsatisfiable (no successor).
inline std::optional<std::vector<TriBool>> abstract_post(const std::vector<TriBool>& state,
                                                         const CfaOp& op, const Precision& prec,
                                                         const DecideCtx& ctx = {}) {
  using namespace verifier_detail;
  std::vector<TriBool> next(prec.size(), TriBool::Unknown);
  ExprPtr sc = state_constraint(prec, state);
  switch (op.kind) {
    case CfaOp::Kind::Assume: {
      SolverVerdict feas = decide(make_binary(BinOp::And, sc, op.expr), ctx);
      if (feas.status == SolveStatus::Unsat) return std::nullopt;
      ExprPtr strengthened = make_binary(BinOp::And, sc, op.expr);
      for (size_t i = 0; i < prec.size(); ++i)
        next[i] =
            state[i] != TriBool::Unknown ? state[i] : entailed(strengthened, prec.predicates[i], ctx);
      return next;
    }
    case CfaOp::Kind::Assign: {
      for (size_t i = 0; i < prec.size(); ++i) {
        ExprPtr wp = expr_subst(prec.predicates[i], op.var, op.expr);
        next[i] = entailed(sc, wp, ctx);
      }
      return next;
    }
    case CfaOp::Kind::Havoc: {
      for (size_t i = 0; i < prec.size(); ++i)
        next[i] = expr_mentions(prec.predicates[i], op.var) ? TriBool::Unknown : state[i];
      return next;
    }
  }
  return next;
}

struct ExploreResult {
  bool reached_error = false;
  std::vector<int> path_edges;  // set when reached_error
  long nodes = 0;
  bool node_cap_hit = false;
  bool timed_out = false;
  Arg arg;
};

// Worklist exploration of the abstract reachability graph. A node is covered
// when an uncovered node at the same location componentwise subsumes it
// (unknown generalizes either definite value).
inline ExploreResult explore(const Cfa& cfa, const Precision& prec, SearchOrder search,
                             const VerifierLimits& lim = {},
                             std::optional<verifier_detail::Clock::time_point> deadline = {}) {
  using namespace verifier_detail;
  DecideCtx ctx{lim.solver, lim.solver_cmd, lim.solver_cmd_timeout_ms};
  ExploreResult res;
  Arg& arg = res.arg;
  std::unordered_map<int, std::vector<int>> by_location;  // uncovered node ids per location

  // Per-edge abstract post cache; states recur heavily around loops.
  std::map<std::pair<int, std::string>, std::optional<std::vector<TriBool>>> post_cache;
  auto state_key = [](const std::vector<TriBool>& st) {
    std::string k;
    k.reserve(st.size());
    for (TriBool t : st) k.push_back((char)('1' + (int)t));
    return k;
  };

  auto subsumes = [](const std::vector<TriBool>& gen, const std::vector<TriBool>& spec) {
    for (size_t i = 0; i < gen.size(); ++i)
      if (gen[i] != TriBool::Unknown && gen[i] != spec[i]) return false;
    return true;
  };

  std::unordered_map<int, std::vector<std::pair<int, const CfaEdge*>>> out_edges;
  for (size_t i = 0; i < cfa.edges.size(); ++i)
    out_edges[cfa.edges[i].from].push_back({(int)i, &cfa.edges[i]});

  auto make_path = [&](int node_id) {
    std::vector<int> path;
    for (int n = node_id; arg.nodes[n].parent >= 0; n = arg.nodes[n].parent)
      path.push_back(arg.nodes[n].in_edge);
    std::reverse(path.begin(), path.end());
    return path;
  };

  std::deque<int> worklist;
  {
    ArgNode root;
    root.id = 0;
    root.location = Cfa::kInitial;
    root.state.assign(prec.size(), TriBool::Unknown);
    arg.nodes.push_back(root);
    by_location[root.location].push_back(0);
    worklist.push_back(0);
  }

  int tick = 0;
  while (!worklist.empty()) {
    if (deadline && (++tick & 63) == 0 && past(*deadline)) {
      res.timed_out = true;
      break;
    }
    int cur;
    if (search == SearchOrder::Bfs) {
      cur = worklist.front();
      worklist.pop_front();
    } else {
      cur = worklist.back();
      worklist.pop_back();
    }
    const int loc = arg.nodes[cur].location;
    auto oit = out_edges.find(loc);
    if (oit == out_edges.end()) continue;
    for (const auto& [edge_idx, edge] : oit->second) {
      std::optional<std::vector<TriBool>> post;
      auto ck = std::make_pair(edge_idx, state_key(arg.nodes[cur].state));
      auto hit = post_cache.find(ck);
      if (hit != post_cache.end()) {
        post = hit->second;
      } else {
        post = abstract_post(arg.nodes[cur].state, edge->op, prec, ctx);
        post_cache.emplace(std::move(ck), post);
      }
      if (!post) continue;

      ArgNode child;
      child.id = (int)arg.nodes.size();
      child.location = edge->to;
      child.state = *post;
      child.parent = cur;
      child.in_edge = edge_idx;
      arg.nodes.push_back(child);
      res.nodes = (long)arg.nodes.size();
      if ((long)arg.nodes.size() > lim.max_arg_nodes) {
        res.node_cap_hit = true;
        return res;
      }
      if (child.location == Cfa::kError) {
        res.reached_error = true;
        res.path_edges = make_path(child.id);
        return res;
      }
      bool covered = false;
      for (int other : by_location[child.location]) {
        if (subsumes(arg.nodes[other].state, child.state)) {
          arg.nodes[child.id].covered_by = other;
          covered = true;
          break;
        }
      }
      if (!covered) {
        by_location[child.location].push_back(child.id);
        worklist.push_back(child.id);
      }
    }
  }
  res.nodes = (long)arg.nodes.size();
  return res;
}

namespace verifier_detail {

// SSA path constraint: every assignment and havoc bumps the version of its
// target; reads use the current version.
struct PathConstraint {
  std::vector<ExprPtr> conjuncts;              // one entry per edge (true for havoc)
  std::vector<std::pair<size_t, std::string>> havoc_slots;  // edge pos -> SSA name
};

inline ExprPtr version_expr(const ExprPtr& e, const std::map<std::string, int>& versions) {
  switch (e->kind) {
    case Expr::Kind::IntLit:
    case Expr::Kind::BoolLit:
      return e;
    case Expr::Kind::Var: {
      auto it = versions.find(e->name);
      int v = it == versions.end() ? 0 : it->second;
      return make_var(e->name + "@" + std::to_string(v), e->type);
    }
    case Expr::Kind::Unary:
      return make_unary(e->un_op, version_expr(e->args[0], versions));
    case Expr::Kind::Binary:
      return make_binary(e->bin_op, version_expr(e->args[0], versions),
                         version_expr(e->args[1], versions));
    case Expr::Kind::Call:
      throw InternalError("call on a verification path");
  }
  throw InternalError("bad expression");
}

inline PathConstraint path_constraint(const Cfa& cfa, const std::vector<int>& edges) {
  PathConstraint pc;
  std::map<std::string, int> versions;
  for (size_t i = 0; i < edges.size(); ++i) {
    const CfaOp& op = cfa.edges[edges[i]].op;
    switch (op.kind) {
      case CfaOp::Kind::Assume:
        pc.conjuncts.push_back(version_expr(op.expr, versions));
        break;
      case CfaOp::Kind::Assign: {
        ExprPtr rhs = version_expr(op.expr, versions);
        int v = ++versions[op.var];
        pc.conjuncts.push_back(
            make_binary(BinOp::Eq, make_var(op.var + "@" + std::to_string(v), op.expr->type), rhs));
        break;
      }
      case CfaOp::Kind::Havoc: {
        int v = ++versions[op.var];
        pc.havoc_slots.push_back({i, op.var + "@" + std::to_string(v)});
        pc.conjuncts.push_back(make_bool(true));
        break;
      }
    }
  }
  return pc;
}

}  // namespace verifier_detail

// Concrete feasibility of an abstract counterexample path. Infeasible paths
// report the length of the shortest contradictory prefix (binary search; the
// property "prefix unsat implies extension unsat" makes it monotone).
inline Counterexample check_feasibility(const Cfa& cfa, const std::vector<int>& path_edges,
                                        const DecideCtx& ctx = {}) {
  using namespace verifier_detail;
  Counterexample cex;
  cex.edges = path_edges;
  PathConstraint pc = path_constraint(cfa, path_edges);

  SolverVerdict full = decide_conjunction(pc.conjuncts, ctx);
  if (full.status == SolveStatus::Unknown) {
    cex.status = FeasStatus::Undecided;
    return cex;
  }
  if (full.status == SolveStatus::Sat) {
    cex.status = FeasStatus::Feasible;
    cex.model = full.model;
    for (const auto& [pos, name] : pc.havoc_slots) {
      auto it = full.model.find(name);
      cex.havoc_values.push_back(it == full.model.end() ? 0 : it->second);
    }
    return cex;
  }

  cex.status = FeasStatus::Infeasible;
  size_t lo = 1, hi = pc.conjuncts.size();
  while (lo < hi) {
    size_t mid = lo + (hi - lo) / 2;
    std::vector<ExprPtr> prefix(pc.conjuncts.begin(), pc.conjuncts.begin() + (long)mid);
    SolveStatus st = decide_conjunction(prefix, ctx).status;
    if (st == SolveStatus::Unsat)
      hi = mid;
    else
      lo = mid + 1;  // sat or unknown: need a longer prefix
  }
  cex.failure_index = (int)lo;
  return cex;
}

// Rebuilds a normalized linear atom as an expression (sum of scaled
// variables compared against the bound). Empty when it does not fit int32.
inline ExprPtr rebuild_atom(const LinearAtom& a, BinOp cmp) {
  ExprPtr sum;
  for (const auto& [v, c] : a.coeffs) {
    if (c > INT32_MAX || c < INT32_MIN) return ExprPtr{};
    ExprPtr term = c == 1 ? make_var(v) : make_binary(BinOp::Mul, make_int((int32_t)c), make_var(v));
    sum = sum ? make_binary(BinOp::Add, sum, term) : term;
  }
  if (!sum || a.bound > INT32_MAX || a.bound < INT32_MIN) return ExprPtr{};
  return make_binary(cmp, sum, make_int((int32_t)a.bound));
}

inline ExprPtr rebuild_le_atom(const LinearAtom& a) { return rebuild_atom(a, BinOp::Le); }

// Canonical shape for discovered predicates: positive polarity, linear
// comparisons rebuilt from their normal form so equivalent spellings merge.
inline ExprPtr canonicalize_predicate(const ExprPtr& e) {
  ExprPtr x = e;
  bool neg = false;
  while (x->kind == Expr::Kind::Unary && x->un_op == UnOp::Not) {
    x = x->args[0];
    neg = !neg;
  }
  if (x->kind == Expr::Kind::Var) return x;
  if (x->kind != Expr::Kind::Binary || !is_comparison(x->bin_op)) return neg ? negate_expr(x) : x;
  BinOp op = x->bin_op;
  if (neg) {
    ExprPtr flipped = negate_expr(x);
    if (flipped->kind == Expr::Kind::Binary) {
      op = flipped->bin_op;
      x = flipped;
    }
  }
  if (x->args[0]->type != Type::Int) {
    // Boolean equality: track the positive form.
    return op == BinOp::Ne ? make_binary(BinOp::Eq, x->args[0], x->args[1]) : x;
  }
  if (op == BinOp::Ne) op = BinOp::Eq;  // polarity is tracked by the tri-valued state

  if (op == BinOp::Eq) {
    auto atoms = comparison_atoms(BinOp::Eq, x->args[0], x->args[1]);
    if (atoms) {
      // Normalize the sign so x==y and y==x meet; reuse the lower render key.
      LinearAtom first = (*atoms)[0];
      LinearAtom second = (*atoms)[1];
      const LinearAtom& pick = render(first) <= render(second) ? first : second;
      if (ExprPtr r = rebuild_atom(pick, BinOp::Eq)) return r;
    }
    return make_binary(BinOp::Eq, x->args[0], x->args[1]);
  }
  auto atoms = comparison_atoms(op, x->args[0], x->args[1]);
  if (atoms && atoms->size() == 1)
    if (ExprPtr r = rebuild_le_atom((*atoms)[0])) return r;
  return x;
}

// Weakest-precondition predicate discovery along an infeasible prefix: the
// atoms of every intermediate WP become candidate predicates. When the
// solver produced an unsat core, atoms over core variables are preferred.
inline std::vector<ExprPtr> derive_predicates(const Cfa& cfa, const std::vector<int>& path_edges,
                                              int failure_index, const Precision& prec,
                                              const DecideCtx& ctx = {}) {
  using namespace verifier_detail;
  if (failure_index <= 0 || failure_index > (int)path_edges.size())
    throw InternalError("bad failure index");

  // WP chain: start from the condition of the last assume of the prefix and
  // walk backward, collecting atoms at every step.
  std::vector<ExprPtr> chain;
  int last = failure_index - 1;
  const CfaOp& last_op = cfa.edges[path_edges[last]].op;
  ExprPtr q = last_op.kind == CfaOp::Kind::Assume ? last_op.expr : make_bool(false);
  chain.push_back(q);
  for (int i = last - 1; i >= 0; --i) {
    const CfaOp& op = cfa.edges[path_edges[i]].op;
    switch (op.kind) {
      case CfaOp::Kind::Assume:
        q = make_binary(BinOp::Or, make_unary(UnOp::Not, op.expr), q);
        break;
      case CfaOp::Kind::Assign:
        q = expr_subst(q, op.var, op.expr);
        break;
      case CfaOp::Kind::Havoc: {
        // wp(havoc v, Q) quantifies v; drop the atoms that mention it.
        std::vector<ExprPtr> keep;
        for (const auto& a : flatten_conjuncts(q))
          if (!expr_mentions(a, op.var)) keep.push_back(a);
        q = make_conjunction(keep);
        break;
      }
    }
    chain.push_back(q);
  }

  std::vector<ExprPtr> raw_atoms;
  for (const auto& step : chain) collect_atoms(step, raw_atoms);

  // Core-variable preference: restrict to atoms over variables that appear in
  // a minimized unsat core of the prefix, when one is available.
  std::set<std::string> core_vars;
  {
    std::vector<ExprPtr> prefix;
    PathConstraint pc = path_constraint(cfa, path_edges);
    for (int i = 0; i < failure_index; ++i) prefix.push_back(pc.conjuncts[i]);
    SolverVerdict v = decide_conjunction(prefix, ctx, true);
    if (v.status == SolveStatus::Unsat)
      for (const auto& c : v.core)
        for (const auto& name : expr_vars(c)) {
          auto at = name.find('@');
          core_vars.insert(at == std::string::npos ? name : name.substr(0, at));
        }
  }

  // Linear equalities are tracked as their two inequality halves: Cartesian
  // states then express one-sided bounds (x >= 1 as "x <= 0 is false"),
  // which single equality predicates cannot.
  auto split_halves = [](const ExprPtr& canon) {
    std::vector<ExprPtr> parts;
    if (canon->kind == Expr::Kind::Binary && canon->bin_op == BinOp::Eq &&
        canon->args[0]->type == Type::Int) {
      if (auto atoms = comparison_atoms(BinOp::Le, canon->args[0], canon->args[1])) {
        auto rev = comparison_atoms(BinOp::Ge, canon->args[0], canon->args[1]);
        if (rev) {
          ExprPtr lo = rebuild_le_atom((*atoms)[0]);
          ExprPtr hi = rebuild_le_atom((*rev)[0]);
          if (lo && hi) {
            parts.push_back(lo);
            parts.push_back(hi);
            return parts;
          }
        }
      }
    }
    parts.push_back(canon);
    return parts;
  };

  auto admit = [&](const std::vector<ExprPtr>& atoms, bool filter_by_core) {
    std::vector<ExprPtr> out;
    std::set<std::string> seen;
    for (const auto& a : atoms) {
      // Literal-only atoms carry no refinement value.
      bool ground = expr_vars(a).empty();
      if (ground) continue;
      if (filter_by_core && !core_vars.empty()) {
        bool overlap = false;
        for (const auto& v : expr_vars(a))
          if (core_vars.count(v)) {
            overlap = true;
            break;
          }
        if (!overlap) continue;
      }
      ExprPtr canon = canonicalize_predicate(a);
      if (!canon) continue;
      for (const auto& part : split_halves(canon)) {
        std::string key = canonical_atom_key(part);
        if (!seen.insert(key).second) continue;
        if (prec.keys.count(key)) continue;
        out.push_back(part);
      }
    }
    return out;
  };

  std::vector<ExprPtr> fresh = admit(raw_atoms, true);
  if (fresh.empty()) fresh = admit(raw_atoms, false);
  if (fresh.empty()) throw RefinementStuck();
  return fresh;
}

// CEGAR driver: explore, check the counterexample, refine, repeat. All
// resource exhaustion funnels into an unknown verdict with a reason.
inline Verdict check_cfa(const Cfa& cfa, SearchOrder search, const VerifierLimits& lim = {}) {
  using namespace verifier_detail;
  DecideCtx ctx{lim.solver, lim.solver_cmd, lim.solver_cmd_timeout_ms};
  auto start = Clock::now();
  auto deadline = start + std::chrono::milliseconds(lim.timeout_ms);
  auto elapsed_ms = [&] {
    return (long)std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start)
        .count();
  };

  Verdict verdict;
  Precision prec;
  for (int iter = 1; iter <= lim.max_cegar_iters; ++iter) {
    verdict.iterations = iter;
    if (past(deadline)) {
      verdict.reason = "timeout";
      break;
    }
    ExploreResult ex = explore(cfa, prec, search, lim, deadline);
    verdict.arg_size = ex.nodes;
    if (ex.timed_out) {
      verdict.reason = "timeout";
      break;
    }
    if (ex.node_cap_hit) {
      verdict.reason = "node-cap";
      break;
    }
    if (!ex.reached_error) {
      verdict.safe = Safety::Safe;
      break;
    }
    Counterexample cex = check_feasibility(cfa, ex.path_edges, ctx);
    if (cex.status == FeasStatus::Undecided) {
      verdict.reason = "solver-unknown";
      break;
    }
    if (cex.status == FeasStatus::Feasible) {
      verdict.safe = Safety::Unsafe;
      verdict.witness = cex;
      break;
    }
    try {
      std::vector<ExprPtr> fresh =
          derive_predicates(cfa, ex.path_edges, cex.failure_index, prec, ctx);
      for (const auto& p : fresh) prec.add(p);
    } catch (const RefinementStuck&) {
      verdict.reason = "refinement-stuck";
      break;
    }
    if (iter == lim.max_cegar_iters) verdict.reason = "iteration-cap";
  }
  verdict.verification_time_ms = elapsed_ms();
  return verdict;
}

// Abstract-predicate havocs mark slice-level nondeterminism; a witness that
// crosses one may be an artifact of slicing rather than a real failure.
inline std::vector<int> phi_ids_on_path(const Cfa& cfa, const std::vector<int>& path_edges) {
  std::vector<int> ids;
  for (int e : path_edges) {
    const CfaOp& op = cfa.edges[e].op;
    if (op.kind == CfaOp::Kind::Havoc && op.var.rfind("phi#", 0) == 0)
      ids.push_back((int)std::strtol(op.var.c_str() + 4, nullptr, 10));
  }
  return ids;
}

}  // namespace cfaforge
