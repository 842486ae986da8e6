#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cfaforge/ast.hpp"
#include "cfaforge/diag.hpp"
#include "cfaforge/formula.hpp"

namespace cfaforge {

enum class SolveStatus { Sat, Unsat, Unknown };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Sat: return "sat";
    case SolveStatus::Unsat: return "unsat";
    case SolveStatus::Unknown: return "unknown";
  }
  return "unknown";
}

struct SolverVerdict {
  SolveStatus status = SolveStatus::Unknown;
  Model model;                // meaningful iff status == Sat
  std::vector<ExprPtr> core;  // meaningful iff status == Unsat and a core was requested
};

struct SolverLimits {
  int branch_nodes = 4000;         // branch-and-bound node budget per theory check
  int64_t branch_window = 1 << 20; // |value| ceiling while branching / box searching
  int box_nodes = 20000;           // interval-search node budget per theory check
  int theory_checks = 5000;        // cap on theory consultations per solve
  long work_budget = 2000000;      // total elementary steps per solve call
};

namespace solver_detail {

// Shared effort accounting so a single solve call cannot run away no matter
// how the budget splits between the boolean and theory layers.
struct WorkMeter {
  long used = 0;
  long budget = 0;
  bool spend(long n) {
    used += n;
    return used <= budget;
  }
  bool out() const { return used > budget; }
};

struct Overflow {};
using I128 = __int128;

inline int64_t chk(I128 v) {
  static const I128 kLim = (I128)1 << 62;
  if (v > kLim || v < -kLim) throw Overflow{};
  return (int64_t)v;
}

// ---- rationals (for the relaxation during elimination) ---------------------

struct Rat {
  int64_t num = 0;
  int64_t den = 1;
};

inline Rat make_rat(I128 n, I128 d) {
  if (d < 0) {
    n = -n;
    d = -d;
  }
  I128 a = n < 0 ? -n : n;
  I128 g = 1;
  {
    I128 x = a, y = d;
    while (y != 0) {
      I128 t = x % y;
      x = y;
      y = t;
    }
    g = x == 0 ? 1 : x;
  }
  return Rat{chk(n / g), chk(d / g)};
}

inline Rat rat_of(int64_t n) { return Rat{n, 1}; }

inline int rat_cmp(const Rat& a, const Rat& b) {
  I128 l = (I128)a.num * b.den;
  I128 r = (I128)b.num * a.den;
  return l < r ? -1 : (l > r ? 1 : 0);
}

inline bool rat_is_int(const Rat& a) { return a.den == 1; }

inline int64_t rat_floor(const Rat& a) { return detail::floor_div(a.num, a.den); }
inline int64_t rat_ceil(const Rat& a) { return detail::ceil_div(a.num, a.den); }

inline Rat rat_mid(const Rat& a, const Rat& b) {
  return make_rat((I128)a.num * b.den + (I128)b.num * a.den, (I128)2 * a.den * b.den);
}

// ---- linear systems ---------------------------------------------------------

// Substitution record: var := sum(coeffs) + constant, with integer coefficients.
struct EqSub {
  std::string var;
  std::map<std::string, int64_t> coeffs;
  int64_t constant = 0;
};

inline std::string atom_key(const LinearAtom& a) { return render(a); }

inline LinearAtom negate_atom(const LinearAtom& a) {
  LinearAtom n;
  for (const auto& [v, c] : a.coeffs) n.coeffs[v] = chk(-(I128)c);
  n.bound = chk(-(I128)a.bound - 1);
  detail::tighten(n);
  return n;
}

// 0 <= bound constraints are trivially decided.
inline bool is_trivial_true(const LinearAtom& a) { return a.coeffs.empty() && a.bound >= 0; }
inline bool is_trivial_false(const LinearAtom& a) { return a.coeffs.empty() && a.bound < 0; }

// Replaces var with the right-hand side of `sub` inside `a`.
inline void apply_sub(LinearAtom& a, const EqSub& sub) {
  auto it = a.coeffs.find(sub.var);
  if (it == a.coeffs.end()) return;
  int64_t f = it->second;
  a.coeffs.erase(it);
  for (const auto& [v, c] : sub.coeffs) {
    I128 acc = (I128)a.coeffs[v] + (I128)f * c;
    a.coeffs[v] = chk(acc);
    if (a.coeffs[v] == 0) a.coeffs.erase(v);
  }
  a.bound = chk((I128)a.bound - (I128)f * sub.constant);
  detail::tighten(a);
}

enum class LinStatus { Sat, Unsat, Unknown };

class LinearSolver {
 public:
  LinearSolver(const SolverLimits& lim, WorkMeter& meter) : lim_(lim), meter_(meter) {}

  LinStatus solve(std::vector<LinearAtom> cons, Model& out) {
    nodes_ = 0;
    try {
      return solve_rec(std::move(cons), out);
    } catch (const Overflow&) {
      return LinStatus::Unknown;
    }
  }

 private:
  // Finds a pair of constraints forming an equality v = rhs with coefficient
  // +-1 on v and substitutes it away. Assignments along a path produce these
  // in bulk, and substitution avoids the blowup elimination would cause.
  std::vector<EqSub> substitute_equalities(std::vector<LinearAtom>& cons) {
    std::vector<EqSub> subs;
    bool changed = true;
    while (changed) {
      changed = false;
      if (!meter_.spend(1 + (long)cons.size())) throw Overflow{};
      std::map<std::string, size_t> seen;
      for (size_t i = 0; i < cons.size(); ++i) seen[atom_key(cons[i])] = i;
      for (size_t i = 0; i < cons.size() && !changed; ++i) {
        LinearAtom neg;
        bool ok = true;
        try {
          neg = negate_atom(cons[i]);
        } catch (const Overflow&) {
          ok = false;
        }
        if (!ok) continue;
        // The negation pair of an equality is "mirror with bound -k": the
        // exact-mirror constraint sum(-c) <= -k equals neg with bound+1 undone.
        LinearAtom mirror;
        for (const auto& [v, c] : cons[i].coeffs) mirror.coeffs[v] = chk(-(I128)c);
        mirror.bound = chk(-(I128)cons[i].bound);
        detail::tighten(mirror);
        auto it = seen.find(atom_key(mirror));
        if (it == seen.end() || it->second == i) continue;
        // cons[i]: sum c*x <= k and mirror present: sum c*x >= k, so = k.
        // Pick a variable with coefficient +-1 to solve for.
        std::string pivot;
        int64_t pc = 0;
        for (const auto& [v, c] : cons[i].coeffs)
          if (c == 1 || c == -1) {
            pivot = v;
            pc = c;
            break;
          }
        if (pivot.empty()) continue;
        EqSub sub;
        sub.var = pivot;
        for (const auto& [v, c] : cons[i].coeffs)
          if (v != pivot) sub.coeffs[v] = chk(-(I128)c * pc);
        sub.constant = chk((I128)cons[i].bound * pc);
        size_t j = it->second;
        std::vector<LinearAtom> next;
        next.reserve(cons.size());
        for (size_t t = 0; t < cons.size(); ++t) {
          if (t == i || t == j) continue;
          LinearAtom a = cons[t];
          apply_sub(a, sub);
          if (!is_trivial_true(a)) next.push_back(a);
        }
        cons = std::move(next);
        subs.push_back(std::move(sub));
        changed = true;
      }
    }
    return subs;
  }

  // Fourier-Motzkin elimination with integer tightening; returns a rational
  // point of the tightened system or nothing when it is infeasible.
  std::optional<std::map<std::string, Rat>> fm(std::vector<LinearAtom> cons) {
    if (!meter_.spend(4 + (long)cons.size())) throw Overflow{};
    for (const auto& a : cons)
      if (is_trivial_false(a)) return std::nullopt;
    std::vector<std::string> vars;
    {
      std::map<std::string, int> count;
      for (const auto& a : cons)
        for (const auto& kv : a.coeffs) count[kv.first]++;
      for (const auto& kv : count) vars.push_back(kv.first);
    }
    if (vars.empty()) return std::map<std::string, Rat>{};

    // Pick the variable whose elimination creates the fewest combinations.
    std::string best;
    long best_cost = -1;
    for (const auto& v : vars) {
      long pos = 0, neg = 0;
      for (const auto& a : cons) {
        auto it = a.coeffs.find(v);
        if (it == a.coeffs.end()) continue;
        (it->second > 0 ? pos : neg)++;
      }
      long cost = pos * neg;
      if (best_cost < 0 || cost < best_cost) {
        best_cost = cost;
        best = v;
      }
    }

    std::vector<LinearAtom> pos, neg, rest;
    for (auto& a : cons) {
      auto it = a.coeffs.find(best);
      if (it == a.coeffs.end()) {
        if (!is_trivial_true(a)) rest.push_back(std::move(a));
      } else if (it->second > 0) {
        pos.push_back(std::move(a));
      } else {
        neg.push_back(std::move(a));
      }
    }
    std::vector<LinearAtom> reduced = rest;
    for (const auto& p : pos) {
      int64_t a = p.coeffs.at(best);
      for (const auto& n : neg) {
        int64_t b = -n.coeffs.at(best);
        LinearAtom comb;
        for (const auto& [v, c] : p.coeffs)
          if (v != best) comb.coeffs[v] = chk((I128)c * b);
        for (const auto& [v, c] : n.coeffs) {
          if (v == best) continue;
          I128 acc = (I128)comb.coeffs[v] + (I128)c * a;
          comb.coeffs[v] = chk(acc);
          if (comb.coeffs[v] == 0) comb.coeffs.erase(v);
        }
        comb.bound = chk((I128)p.bound * b + (I128)n.bound * a);
        detail::tighten(comb);
        if (is_trivial_false(comb)) return std::nullopt;
        if (!is_trivial_true(comb)) reduced.push_back(std::move(comb));
      }
    }
    auto sub = fm(std::move(reduced));
    if (!sub) return std::nullopt;

    // Bounds on `best` under the sub-model.
    auto residue = [&](const LinearAtom& a) {
      // sum over vars != best of c * value, as a rational.
      I128 num = 0, den = 1;
      for (const auto& [v, c] : a.coeffs) {
        if (v == best) continue;
        Rat val = rat_of(0);
        auto it = sub->find(v);
        if (it != sub->end()) val = it->second;
        // num/den + c*val
        num = num * val.den + (I128)c * val.num * den;
        den = den * val.den;
        Rat norm = make_rat(num, den);
        num = norm.num;
        den = norm.den;
      }
      return make_rat(num, den);
    };
    std::optional<Rat> lo, hi;
    for (const auto& a : pos) {
      int64_t c = a.coeffs.at(best);
      Rat r = residue(a);
      Rat b = make_rat((I128)a.bound * r.den - (I128)r.num, (I128)c * r.den);
      if (!hi || rat_cmp(b, *hi) < 0) hi = b;
    }
    for (const auto& a : neg) {
      int64_t c = a.coeffs.at(best);  // negative
      Rat r = residue(a);
      Rat b = make_rat((I128)a.bound * r.den - (I128)r.num, (I128)c * r.den);
      if (!lo || rat_cmp(b, *lo) > 0) lo = b;
    }
    if (lo && hi && rat_cmp(*lo, *hi) > 0) return std::nullopt;

    Rat value = rat_of(0);
    if (lo && hi) {
      int64_t li = rat_ceil(*lo), ui = rat_floor(*hi);
      if (li <= ui)
        value = rat_of(std::clamp<int64_t>(0, li, ui));
      else
        value = rat_mid(*lo, *hi);
    } else if (hi) {
      value = rat_of(std::min<int64_t>(0, rat_floor(*hi)));
    } else if (lo) {
      value = rat_of(std::max<int64_t>(0, rat_ceil(*lo)));
    }
    (*sub)[best] = value;
    return sub;
  }

  LinStatus solve_rec(std::vector<LinearAtom> cons, Model& out) {
    if (!meter_.spend(8)) return LinStatus::Unknown;
    std::vector<EqSub> subs = substitute_equalities(cons);
    for (const auto& a : cons)
      if (is_trivial_false(a)) return LinStatus::Unsat;
    auto rat = fm(cons);
    if (!rat) return LinStatus::Unsat;

    std::string frac_var;
    Rat frac_val;
    for (const auto& [v, r] : *rat)
      if (!rat_is_int(r)) {
        frac_var = v;
        frac_val = r;
        break;
      }
    if (frac_var.empty()) {
      Model m;
      for (const auto& [v, r] : *rat) m[v] = r.num;
      // Recover substituted variables in reverse order.
      for (auto it = subs.rbegin(); it != subs.rend(); ++it) {
        I128 acc = it->constant;
        for (const auto& [v, c] : it->coeffs) {
          auto f = m.find(v);
          acc += (I128)c * (f == m.end() ? 0 : f->second);
        }
        m[it->var] = chk(acc);
      }
      out = std::move(m);
      return LinStatus::Sat;
    }

    if (++nodes_ > lim_.branch_nodes) return LinStatus::Unknown;
    int64_t f = rat_floor(frac_val);
    if (f >= lim_.branch_window || f + 1 <= -lim_.branch_window) return LinStatus::Unknown;

    auto with_bound = [&](int64_t sign, int64_t bound) {
      std::vector<LinearAtom> next = cons;
      LinearAtom a;
      a.coeffs[frac_var] = sign;
      a.bound = bound;
      next.push_back(a);
      return next;
    };
    Model m1;
    LinStatus r1 = solve_rec(with_bound(1, f), m1);
    if (r1 == LinStatus::Sat) {
      for (auto it = subs.rbegin(); it != subs.rend(); ++it) {
        I128 acc = it->constant;
        for (const auto& [v, c] : it->coeffs) {
          auto fit = m1.find(v);
          acc += (I128)c * (fit == m1.end() ? 0 : fit->second);
        }
        m1[it->var] = chk(acc);
      }
      out = std::move(m1);
      return LinStatus::Sat;
    }
    Model m2;
    LinStatus r2 = solve_rec(with_bound(-1, chk(-(I128)f - 1)), m2);
    if (r2 == LinStatus::Sat) {
      for (auto it = subs.rbegin(); it != subs.rend(); ++it) {
        I128 acc = it->constant;
        for (const auto& [v, c] : it->coeffs) {
          auto fit = m2.find(v);
          acc += (I128)c * (fit == m2.end() ? 0 : fit->second);
        }
        m2[it->var] = chk(acc);
      }
      out = std::move(m2);
      return LinStatus::Sat;
    }
    if (r1 == LinStatus::Unsat && r2 == LinStatus::Unsat) return LinStatus::Unsat;
    return LinStatus::Unknown;
  }

  SolverLimits lim_;
  WorkMeter& meter_;
  int nodes_ = 0;
};

// ---- interval search for conjunctions with nonlinear atoms ------------------

struct IV {
  I128 lo, hi;
};

inline IV iv_point(I128 v) { return {v, v}; }

// Endpoints stay within +-2^62 so that corner products of two clamped
// intervals (at most 2^124) cannot overflow __int128. Formula constants are
// far below the cap, so clamped endpoints never flip a comparison verdict.
static const I128 kIvCap = (I128)1 << 62;

inline I128 iv_clamp(I128 v) { return v > kIvCap ? kIvCap : (v < -kIvCap ? -kIvCap : v); }

inline IV iv_make(I128 lo, I128 hi) { return {iv_clamp(lo), iv_clamp(hi)}; }

inline IV iv_full() { return {-kIvCap, kIvCap}; }

inline I128 i128_floor_half(I128 v) {
  I128 q = v / 2;
  if (v % 2 != 0 && v < 0) --q;
  return q;
}

inline IV iv_eval(const ExprPtr& e, const std::map<std::string, IV>& box, const Model& fixed) {
  switch (e->kind) {
    case Expr::Kind::IntLit: return iv_point(e->int_value);
    case Expr::Kind::BoolLit: return iv_point(e->bool_value ? 1 : 0);
    case Expr::Kind::Var: {
      auto it = box.find(e->name);
      if (it != box.end()) return it->second;
      auto f = fixed.find(e->name);
      return iv_point(f == fixed.end() ? 0 : f->second);
    }
    case Expr::Kind::Unary: {
      IV a = iv_eval(e->args[0], box, fixed);
      if (e->un_op == UnOp::Neg) return iv_make(-a.hi, -a.lo);
      // logical not over {0,1}-ish values
      bool can_zero = a.lo <= 0 && a.hi >= 0;
      bool can_nonzero = a.lo != 0 || a.hi != 0;
      return iv_make(can_nonzero ? 0 : 1, can_zero ? 1 : 0);
    }
    case Expr::Kind::Binary: {
      IV a = iv_eval(e->args[0], box, fixed);
      IV b = iv_eval(e->args[1], box, fixed);
      auto tri_to_iv = [](int t) { return t > 0 ? iv_point(1) : (t < 0 ? iv_point(0) : iv_make(0, 1)); };
      auto cmp_tri = [&](BinOp op) -> int {
        switch (op) {
          case BinOp::Lt: return a.hi < b.lo ? 1 : (a.lo >= b.hi ? -1 : 0);
          case BinOp::Le: return a.hi <= b.lo ? 1 : (a.lo > b.hi ? -1 : 0);
          case BinOp::Gt: return a.lo > b.hi ? 1 : (a.hi <= b.lo ? -1 : 0);
          case BinOp::Ge: return a.lo >= b.hi ? 1 : (a.hi < b.lo ? -1 : 0);
          case BinOp::Eq:
            if (a.lo == a.hi && b.lo == b.hi && a.lo == b.lo) return 1;
            return (a.hi < b.lo || b.hi < a.lo) ? -1 : 0;
          case BinOp::Ne:
            if (a.hi < b.lo || b.hi < a.lo) return 1;
            return (a.lo == a.hi && b.lo == b.hi && a.lo == b.lo) ? -1 : 0;
          default: return 0;
        }
      };
      switch (e->bin_op) {
        case BinOp::Add: return iv_make(a.lo + b.lo, a.hi + b.hi);
        case BinOp::Sub: return iv_make(a.lo - b.hi, a.hi - b.lo);
        case BinOp::Mul: {
          I128 c1 = a.lo * b.lo, c2 = a.lo * b.hi, c3 = a.hi * b.lo, c4 = a.hi * b.hi;
          return iv_make(std::min(std::min(c1, c2), std::min(c3, c4)),
                         std::max(std::max(c1, c2), std::max(c3, c4)));
        }
        case BinOp::Div: {
          if (b.lo <= 0 && b.hi >= 0) return iv_full();
          I128 c1 = a.lo / b.lo, c2 = a.lo / b.hi, c3 = a.hi / b.lo, c4 = a.hi / b.hi;
          return iv_make(std::min(std::min(c1, c2), std::min(c3, c4)),
                         std::max(std::max(c1, c2), std::max(c3, c4)));
        }
        case BinOp::Mod: {
          if (b.lo <= 0 && b.hi >= 0) return iv_full();
          I128 m = std::max(b.hi < 0 ? -b.lo : b.hi, b.lo > 0 ? b.hi : -b.lo) - 1;
          I128 lo = a.lo >= 0 ? 0 : -m;
          I128 hi = a.hi <= 0 ? 0 : m;
          return iv_make(lo, hi);
        }
        case BinOp::And: {
          IV ta = a, tb = b;
          bool both_true = (ta.lo > 0 || ta.hi < 0) && (tb.lo > 0 || tb.hi < 0);
          bool some_false = (ta.lo == 0 && ta.hi == 0) || (tb.lo == 0 && tb.hi == 0);
          return some_false ? iv_point(0) : (both_true ? iv_point(1) : iv_make(0, 1));
        }
        case BinOp::Or: {
          bool some_true = (a.lo > 0 || a.hi < 0) || (b.lo > 0 || b.hi < 0);
          bool both_false = (a.lo == 0 && a.hi == 0) && (b.lo == 0 && b.hi == 0);
          return both_false ? iv_point(0) : (some_true ? iv_point(1) : iv_make(0, 1));
        }
        default:
          return tri_to_iv(cmp_tri(e->bin_op));
      }
    }
    case Expr::Kind::Call: return iv_full();
  }
  return iv_full();
}

// -1 definitely false, 1 definitely true, 0 undecided.
inline int iv_truth(const ExprPtr& e, const std::map<std::string, IV>& box, const Model& fixed) {
  IV r = iv_eval(e, box, fixed);
  if (r.lo > 0 || r.hi < 0) return 1;
  if (r.lo == 0 && r.hi == 0) return -1;
  return 0;
}

enum class BoxStatus { Sat, Exhausted, Budget };

// Searches integer boxes for a point satisfying `whole`. The per-assignment
// `goals` only prune: division and modulo make atoms partial functions, so a
// point can satisfy the formula through short-circuit evaluation without any
// consistent truth assignment for the trapping atoms. Verifying the whole
// formula at candidate points keeps those points reachable.
class BoxSearch {
 public:
  BoxSearch(std::vector<ExprPtr> goals, ExprPtr whole, Model fixed, const SolverLimits& lim,
            WorkMeter& meter)
      : goals_(std::move(goals)),
        whole_(std::move(whole)),
        fixed_(std::move(fixed)),
        lim_(lim),
        meter_(meter) {}

  // Sat -> model found; Exhausted -> no point anywhere in the window.
  BoxStatus run(const std::vector<std::string>& vars, Model& out) {
    std::map<std::string, IV> box;
    for (const auto& v : vars) box[v] = iv_make(-lim_.branch_window, lim_.branch_window);
    nodes_ = 0;
    budget_out_ = false;
    if (search(box, out)) return BoxStatus::Sat;
    return budget_out_ ? BoxStatus::Budget : BoxStatus::Exhausted;
  }

 private:
  bool exact_check(const Model& point, Model& out) const {
    Model m = fixed_;
    for (const auto& [v, x] : point) m[v] = x;
    try {
      if (!eval_formula(whole_, m)) return false;
    } catch (const EvalUndefined&) {
      return false;
    }
    out = m;
    return true;
  }

  bool search(std::map<std::string, IV>& box, Model& out) {
    if (budget_out_) return false;
    if (++nodes_ > lim_.box_nodes || !meter_.spend(2 + 4 * (long)goals_.size())) {
      budget_out_ = true;
      return false;
    }
    bool all_true = true;
    for (const auto& g : goals_) {
      int t = iv_truth(g, box, fixed_);
      if (t < 0) return false;
      if (t == 0) all_true = false;
    }
    Model mid;
    for (const auto& [v, iv] : box) mid[v] = (int64_t)i128_floor_half(iv.lo + iv.hi);
    // When every goal holds over the whole box any point works; keep
    // splitting if the exact check disagrees rather than trusting the
    // interval result.
    if (all_true && exact_check(mid, out)) return true;

    // Split the widest axis; singleton box means the midpoint test was exact.
    std::string widest;
    I128 width = 0;
    for (const auto& [v, iv] : box)
      if (iv.hi - iv.lo > width) {
        width = iv.hi - iv.lo;
        widest = v;
      }
    if (widest.empty()) return exact_check(mid, out);

    IV orig = box[widest];
    I128 m = i128_floor_half(orig.lo + orig.hi);
    box[widest] = {orig.lo, m};
    if (search(box, out)) {
      box[widest] = orig;
      return true;
    }
    box[widest] = {m + 1, orig.hi};
    bool r = search(box, out);
    box[widest] = orig;
    return r;
  }

  std::vector<ExprPtr> goals_;
  ExprPtr whole_;
  Model fixed_;
  SolverLimits lim_;
  WorkMeter& meter_;
  int nodes_ = 0;
  bool budget_out_ = false;
};

// ---- atoms and the boolean skeleton -----------------------------------------

struct TAtom {
  enum class Kind { Lin, Bool, Raw } kind;
  LinearAtom lin;   // Kind::Lin
  std::string name; // Kind::Bool
  ExprPtr raw;      // Kind::Raw, positive form
};

struct Node {
  enum class K { And, Or, Lit, True, False } k = K::True;
  std::vector<Node> kids;
  int lit = 0;  // +-(atom_index + 1) when k == Lit
};

class AtomTable {
 public:
  int intern_lin(const LinearAtom& a) {
    std::string key = "L:" + render(a);
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    TAtom t;
    t.kind = TAtom::Kind::Lin;
    t.lin = a;
    atoms_.push_back(std::move(t));
    index_[key] = (int)atoms_.size() - 1;
    return (int)atoms_.size() - 1;
  }
  int intern_bool(const std::string& name) {
    std::string key = "B:" + name;
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    TAtom t;
    t.kind = TAtom::Kind::Bool;
    t.name = name;
    atoms_.push_back(std::move(t));
    index_[key] = (int)atoms_.size() - 1;
    return (int)atoms_.size() - 1;
  }
  int intern_raw(const ExprPtr& e) {
    std::string key = "R:" + to_string(e);
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    TAtom t;
    t.kind = TAtom::Kind::Raw;
    t.raw = e;
    atoms_.push_back(std::move(t));
    index_[key] = (int)atoms_.size() - 1;
    return (int)atoms_.size() - 1;
  }
  const std::vector<TAtom>& atoms() const { return atoms_; }
  size_t size() const { return atoms_.size(); }

 private:
  std::vector<TAtom> atoms_;
  std::map<std::string, int> index_;
};

inline Node make_lit(int lit) {
  Node n;
  n.k = Node::K::Lit;
  n.lit = lit;
  return n;
}

inline Node make_const(bool b) {
  Node n;
  n.k = b ? Node::K::True : Node::K::False;
  return n;
}

inline Node make_gate(Node::K k, std::vector<Node> kids) {
  // Constant folding keeps the skeleton small.
  std::vector<Node> flat;
  for (auto& c : kids) {
    if (k == Node::K::And) {
      if (c.k == Node::K::False) return make_const(false);
      if (c.k == Node::K::True) continue;
    } else {
      if (c.k == Node::K::True) return make_const(true);
      if (c.k == Node::K::False) continue;
    }
    if (c.k == k) {
      for (auto& g : c.kids) flat.push_back(std::move(g));
    } else {
      flat.push_back(std::move(c));
    }
  }
  if (flat.empty()) return make_const(k == Node::K::And);
  if (flat.size() == 1) return std::move(flat[0]);
  Node n;
  n.k = k;
  n.kids = std::move(flat);
  return n;
}

class NnfBuilder {
 public:
  explicit NnfBuilder(AtomTable& table) : table_(table) {}

  Node build(const ExprPtr& e, bool neg) {
    switch (e->kind) {
      case Expr::Kind::BoolLit: return make_const(e->bool_value != neg);
      case Expr::Kind::IntLit: return make_const((e->int_value != 0) != neg);
      case Expr::Kind::Var: {
        if (e->type == Type::Bool) {
          int a = table_.intern_bool(e->name);
          return make_lit(neg ? -(a + 1) : (a + 1));
        }
        return build_cmp(BinOp::Ne, e, make_int(0), neg);
      }
      case Expr::Kind::Unary:
        if (e->un_op == UnOp::Not) return build(e->args[0], !neg);
        throw InternalError("arithmetic expression used as a formula");
      case Expr::Kind::Binary: {
        if (is_logical(e->bin_op)) {
          bool conj = (e->bin_op == BinOp::And) != neg;
          return make_gate(conj ? Node::K::And : Node::K::Or,
                           {build(e->args[0], neg), build(e->args[1], neg)});
        }
        if (is_comparison(e->bin_op)) {
          if (e->args[0]->type == Type::Bool) return build_bool_cmp(e, neg);
          return build_cmp(e->bin_op, e->args[0], e->args[1], neg);
        }
        throw InternalError("arithmetic expression used as a formula");
      }
      case Expr::Kind::Call:
        throw InternalError("unresolved call inside a formula");
    }
    throw InternalError("bad formula expression");
  }

 private:
  Node build_bool_cmp(const ExprPtr& e, bool neg) {
    bool want_eq = (e->bin_op == BinOp::Eq) != neg;
    const ExprPtr& a = e->args[0];
    const ExprPtr& b = e->args[1];
    if (want_eq)
      return make_gate(Node::K::Or,
                       {make_gate(Node::K::And, {build(a, false), build(b, false)}),
                        make_gate(Node::K::And, {build(a, true), build(b, true)})});
    return make_gate(Node::K::Or,
                     {make_gate(Node::K::And, {build(a, false), build(b, true)}),
                      make_gate(Node::K::And, {build(a, true), build(b, false)})});
  }

  Node build_cmp(BinOp op, const ExprPtr& lhs, const ExprPtr& rhs, bool neg) {
    if (neg) {
      switch (op) {
        case BinOp::Lt: op = BinOp::Ge; break;
        case BinOp::Le: op = BinOp::Gt; break;
        case BinOp::Gt: op = BinOp::Le; break;
        case BinOp::Ge: op = BinOp::Lt; break;
        case BinOp::Eq: op = BinOp::Ne; break;
        case BinOp::Ne: op = BinOp::Eq; break;
        default: break;
      }
    }
    if (op == BinOp::Ne)
      return make_gate(Node::K::Or, {build_cmp(BinOp::Lt, lhs, rhs, false),
                                     build_cmp(BinOp::Gt, lhs, rhs, false)});
    if (op == BinOp::Eq)
      return make_gate(Node::K::And, {build_cmp(BinOp::Le, lhs, rhs, false),
                                      build_cmp(BinOp::Ge, lhs, rhs, false)});
    auto atoms = comparison_atoms(op, lhs, rhs);
    if (atoms && atoms->size() == 1) {
      const LinearAtom& a = (*atoms)[0];
      if (is_trivial_true(a)) return make_const(true);
      if (is_trivial_false(a)) return make_const(false);
      return make_lit(table_.intern_lin(a) + 1);
    }
    int idx = table_.intern_raw(make_binary(op, lhs, rhs));
    return make_lit(idx + 1);
  }

  AtomTable& table_;
};

// ---- CNF + DPLL --------------------------------------------------------------

struct Cnf {
  int num_vars = 0;
  std::vector<std::vector<int>> clauses;  // literal: +-(var + 1)
};

inline int tseitin(const Node& n, Cnf& cnf) {
  switch (n.k) {
    case Node::K::Lit:
      return n.lit;
    case Node::K::True:
    case Node::K::False:
      throw InternalError("constant reached CNF conversion");
    case Node::K::And:
    case Node::K::Or: {
      std::vector<int> kids;
      kids.reserve(n.kids.size());
      for (const auto& k : n.kids) kids.push_back(tseitin(k, cnf));
      int g = ++cnf.num_vars;
      if (n.k == Node::K::And) {
        std::vector<int> back{g};
        for (int l : kids) {
          cnf.clauses.push_back({-g, l});
          back.push_back(-l);
        }
        cnf.clauses.push_back(std::move(back));
      } else {
        std::vector<int> fwd{-g};
        for (int l : kids) {
          cnf.clauses.push_back({g, -l});
          fwd.push_back(l);
        }
        cnf.clauses.push_back(std::move(fwd));
      }
      return g;
    }
  }
  throw InternalError("bad skeleton node");
}

struct TheoryOutcome {
  LinStatus status = LinStatus::Unknown;
  Model model;
};

inline TheoryOutcome theory_check(const std::vector<TAtom>& atoms, const std::vector<int8_t>& vals,
                                  const ExprPtr& whole, const SolverLimits& lim, WorkMeter& meter) {
  Model bools;
  std::vector<LinearAtom> lin;
  std::vector<ExprPtr> raw;
  try {
    for (size_t i = 0; i < atoms.size(); ++i) {
      if (vals[i] == 0) continue;
      const TAtom& a = atoms[i];
      switch (a.kind) {
        case TAtom::Kind::Bool:
          bools[a.name] = vals[i] > 0 ? 1 : 0;
          break;
        case TAtom::Kind::Lin:
          lin.push_back(vals[i] > 0 ? a.lin : negate_atom(a.lin));
          break;
        case TAtom::Kind::Raw:
          raw.push_back(vals[i] > 0 ? a.raw : negate_expr(a.raw));
          break;
      }
    }
  } catch (const Overflow&) {
    return {LinStatus::Unknown, {}};
  }

  LinearSolver ls(lim, meter);
  Model lin_model;
  LinStatus lr = lin.empty() ? LinStatus::Sat : ls.solve(lin, lin_model);
  if (lr == LinStatus::Unsat) return {LinStatus::Unsat, {}};

  if (raw.empty()) {
    if (lr == LinStatus::Unknown) return {LinStatus::Unknown, {}};
    Model m = std::move(lin_model);
    for (const auto& [v, x] : bools) m[v] = x;
    return {LinStatus::Sat, std::move(m)};
  }

  // Nonlinear atoms present: search a bounded box jointly, keeping the linear
  // side as extra pruning constraints.
  std::vector<ExprPtr> goals = raw;
  std::set<std::string> vars;
  for (const auto& g : raw)
    for (const auto& v : expr_vars(g))
      if (bools.find(v) == bools.end()) vars.insert(v);
  for (const auto& a : lin) {
    // Rebuild the atom as an expression so the box search can prune with it.
    if (a.bound > INT32_MAX || a.bound < INT32_MIN) return {LinStatus::Unknown, {}};
    ExprPtr sum;
    for (const auto& [v, c] : a.coeffs) {
      if (c > INT32_MAX || c < INT32_MIN) return {LinStatus::Unknown, {}};
      ExprPtr term =
          c == 1 ? make_var(v) : make_binary(BinOp::Mul, make_int((int32_t)c), make_var(v));
      sum = sum ? make_binary(BinOp::Add, sum, term) : term;
      vars.insert(v);
    }
    if (!sum) sum = make_int(0);
    goals.push_back(make_binary(BinOp::Le, sum, make_int((int32_t)a.bound)));
  }
  BoxSearch bs(goals, whole, bools, lim, meter);
  Model m;
  BoxStatus br = bs.run(std::vector<std::string>(vars.begin(), vars.end()), m);
  if (br == BoxStatus::Sat) return {LinStatus::Sat, std::move(m)};
  if (br == BoxStatus::Exhausted) {
    // The window was covered completely. If the linear side pins every
    // searched variable inside the window, nothing exists outside it either.
    std::map<std::string, std::pair<bool, bool>> bounded;  // var -> (<=, >=)
    for (const auto& a : lin) {
      if (a.coeffs.size() != 1) continue;
      const auto& [v, c] = *a.coeffs.begin();
      int64_t mag = detail::floor_div(a.bound, c < 0 ? -c : c);
      if (mag >= lim.branch_window) continue;
      if (c > 0)
        bounded[v].first = true;
      else
        bounded[v].second = true;
    }
    bool all_bounded = true;
    for (const auto& v : vars)
      if (!bounded[v].first || !bounded[v].second) {
        all_bounded = false;
        break;
      }
    if (all_bounded) return {LinStatus::Unsat, {}};
  }
  return {LinStatus::Unknown, {}};
}

class Dpll {
 public:
  Dpll(Cnf cnf, const std::vector<TAtom>& atoms, ExprPtr whole, const SolverLimits& lim)
      : cnf_(std::move(cnf)), atoms_(atoms), whole_(std::move(whole)), lim_(lim) {
    meter_.budget = lim.work_budget;
  }

  SolveStatus run(Model& out) {
    std::vector<int8_t> assign(cnf_.num_vars + 1, 0);
    bool sat = dfs(assign);
    if (sat) {
      out = std::move(model_);
      return SolveStatus::Sat;
    }
    return saw_unknown_ ? SolveStatus::Unknown : SolveStatus::Unsat;
  }

 private:
  static int8_t lit_value(const std::vector<int8_t>& a, int lit) {
    int8_t v = a[std::abs(lit)];
    return lit > 0 ? v : (int8_t)-v;
  }

  bool unit_propagate(std::vector<int8_t>& a) {
    bool changed = true;
    while (changed) {
      changed = false;
      if (!meter_.spend((long)cnf_.clauses.size())) return true;  // give up quietly
      for (const auto& cl : cnf_.clauses) {
        int unassigned = 0;
        int last = 0;
        bool satisfied = false;
        for (int lit : cl) {
          int8_t v = lit_value(a, lit);
          if (v > 0) {
            satisfied = true;
            break;
          }
          if (v == 0) {
            ++unassigned;
            last = lit;
          }
        }
        if (satisfied) continue;
        if (unassigned == 0) return false;
        if (unassigned == 1) {
          a[std::abs(last)] = last > 0 ? 1 : -1;
          changed = true;
        }
      }
    }
    return true;
  }

  bool dfs(std::vector<int8_t> a) {
    if (meter_.out()) {
      saw_unknown_ = true;
      return false;
    }
    if (!unit_propagate(a)) return false;
    if (meter_.out()) {
      saw_unknown_ = true;
      return false;
    }
    int branch = 0;
    for (size_t i = 1; i <= atoms_.size(); ++i)
      if (a[i] == 0) {
        branch = (int)i;
        break;
      }
    if (branch == 0) {
      if (++checks_ > lim_.theory_checks) {
        saw_unknown_ = true;
        return false;
      }
      std::vector<int8_t> vals(atoms_.size(), 0);
      for (size_t i = 0; i < atoms_.size(); ++i) vals[i] = a[i + 1];
      TheoryOutcome t = theory_check(atoms_, vals, whole_, lim_, meter_);
      if (t.status == LinStatus::Sat) {
        model_ = std::move(t.model);
        return true;
      }
      if (t.status == LinStatus::Unknown) saw_unknown_ = true;
      std::vector<int> block;
      block.reserve(atoms_.size());
      for (size_t i = 0; i < atoms_.size(); ++i)
        block.push_back(a[i + 1] > 0 ? -(int)(i + 1) : (int)(i + 1));
      cnf_.clauses.push_back(std::move(block));
      return false;
    }
    {
      std::vector<int8_t> t = a;
      t[branch] = 1;
      if (dfs(std::move(t))) return true;
    }
    a[branch] = -1;
    return dfs(std::move(a));
  }

  Cnf cnf_;
  const std::vector<TAtom>& atoms_;
  ExprPtr whole_;
  SolverLimits lim_;
  WorkMeter meter_;
  int checks_ = 0;
  bool saw_unknown_ = false;
  Model model_;
};

}  // namespace solver_detail

// Decides satisfiability of a boolean expression over integer and boolean
// variables. Integers are mathematical (no wraparound); see the interpreter
// for the 32-bit execution semantics.
inline SolverVerdict solve(const ExprPtr& f, const SolverLimits& limits = {}) {
  using namespace solver_detail;
  AtomTable table;
  Node root;
  try {
    root = NnfBuilder(table).build(f, false);
  } catch (const Overflow&) {
    return {SolveStatus::Unknown, {}, {}};
  }
  if (root.k == Node::K::True) return {SolveStatus::Sat, {}, {}};
  if (root.k == Node::K::False) return {SolveStatus::Unsat, {}, {}};

  Cnf cnf;
  cnf.num_vars = (int)table.size();
  int root_lit = tseitin(root, cnf);
  cnf.clauses.push_back({root_lit});

  Dpll dpll(std::move(cnf), table.atoms(), f, limits);
  Model model;
  SolveStatus st = dpll.run(model);
  if (st == SolveStatus::Sat) {
    // A model must actually satisfy the formula; degrade to unknown if the
    // theory layer produced something inconsistent (conservative guard).
    try {
      if (!eval_formula(f, model)) return {SolveStatus::Unknown, {}, {}};
    } catch (const EvalUndefined&) {
      return {SolveStatus::Unknown, {}, {}};
    }
    return {SolveStatus::Sat, std::move(model), {}};
  }
  return {st, {}, {}};
}

// Conjunction entry point; with want_core, unsat results carry a subset of
// the input conjuncts that is itself unsat (deletion-minimized).
inline SolverVerdict solve_conjunction(const std::vector<ExprPtr>& conjuncts,
                                       const SolverLimits& limits = {}, bool want_core = false) {
  SolverVerdict v = solve(make_conjunction(conjuncts), limits);
  if (v.status != SolveStatus::Unsat || !want_core) return v;
  std::vector<ExprPtr> core = conjuncts;
  size_t i = 0;
  while (core.size() > 1 && i < core.size()) {
    std::vector<ExprPtr> candidate;
    candidate.reserve(core.size() - 1);
    for (size_t j = 0; j < core.size(); ++j)
      if (j != i) candidate.push_back(core[j]);
    if (solve(make_conjunction(candidate), limits).status == SolveStatus::Unsat)
      core = std::move(candidate);
    else
      ++i;
  }
  v.core = std::move(core);
  return v;
}

}  // namespace cfaforge
