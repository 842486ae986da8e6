#pragma once

#include <cstdint>
#include <iterator>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "cfaforge/ast.hpp"
#include "cfaforge/diag.hpp"

namespace cfaforge {

// Variable assignment over mathematical (64-bit, non-wrapping) integers.
// Booleans are 0/1.
using Model = std::map<std::string, int64_t>;

struct EvalUndefined {
  std::string reason;
};

// Evaluates an expression over mathematical integers (the solver's domain,
// unlike the interpreter's wrapping 32-bit one). Division by zero throws.
inline int64_t eval_formula_int(const ExprPtr& e, const Model& m) {
  switch (e->kind) {
    case Expr::Kind::IntLit:
      return e->int_value;
    case Expr::Kind::BoolLit:
      return e->bool_value ? 1 : 0;
    case Expr::Kind::Var: {
      auto it = m.find(e->name);
      return it == m.end() ? 0 : it->second;
    }
    case Expr::Kind::Unary:
      if (e->un_op == UnOp::Neg) return -eval_formula_int(e->args[0], m);
      return eval_formula_int(e->args[0], m) == 0 ? 1 : 0;
    case Expr::Kind::Binary: {
      if (e->bin_op == BinOp::And)
        return eval_formula_int(e->args[0], m) != 0 && eval_formula_int(e->args[1], m) != 0;
      if (e->bin_op == BinOp::Or)
        return eval_formula_int(e->args[0], m) != 0 || eval_formula_int(e->args[1], m) != 0;
      int64_t a = eval_formula_int(e->args[0], m);
      int64_t b = eval_formula_int(e->args[1], m);
      switch (e->bin_op) {
        case BinOp::Add: return a + b;
        case BinOp::Sub: return a - b;
        case BinOp::Mul: return a * b;
        case BinOp::Div:
          if (b == 0) throw EvalUndefined{"division by zero"};
          return a / b;
        case BinOp::Mod:
          if (b == 0) throw EvalUndefined{"modulo by zero"};
          return a % b;
        case BinOp::Lt: return a < b;
        case BinOp::Le: return a <= b;
        case BinOp::Gt: return a > b;
        case BinOp::Ge: return a >= b;
        case BinOp::Eq: return a == b;
        case BinOp::Ne: return a != b;
        default: break;
      }
      throw EvalUndefined{"unexpected operator"};
    }
    case Expr::Kind::Call:
      throw EvalUndefined{"call in formula"};
  }
  throw EvalUndefined{"bad expression"};
}

inline bool eval_formula(const ExprPtr& e, const Model& m) {
  return eval_formula_int(e, m) != 0;
}

inline void flatten_conjuncts(const ExprPtr& e, std::vector<ExprPtr>& out) {
  if (e->kind == Expr::Kind::Binary && e->bin_op == BinOp::And) {
    flatten_conjuncts(e->args[0], out);
    flatten_conjuncts(e->args[1], out);
    return;
  }
  out.push_back(e);
}

inline std::vector<ExprPtr> flatten_conjuncts(const ExprPtr& e) {
  std::vector<ExprPtr> out;
  flatten_conjuncts(e, out);
  return out;
}

inline ExprPtr make_conjunction(const std::vector<ExprPtr>& cs) {
  if (cs.empty()) return make_bool(true);
  ExprPtr acc = cs[0];
  for (size_t i = 1; i < cs.size(); ++i) acc = make_binary(BinOp::And, acc, cs[i]);
  return acc;
}

// Atoms of a boolean formula: comparisons, boolean variables, boolean
// literals. Negations are stripped (atoms are collected positively).
inline void collect_atoms(const ExprPtr& e, std::vector<ExprPtr>& out) {
  if (e->kind == Expr::Kind::Unary && e->un_op == UnOp::Not) {
    collect_atoms(e->args[0], out);
    return;
  }
  if (e->kind == Expr::Kind::Binary && is_logical(e->bin_op)) {
    collect_atoms(e->args[0], out);
    collect_atoms(e->args[1], out);
    return;
  }
  if (e->kind == Expr::Kind::Binary && is_comparison(e->bin_op) && e->args[0]->type == Type::Bool) {
    // Boolean (in)equality: descend into both sides.
    collect_atoms(e->args[0], out);
    collect_atoms(e->args[1], out);
    return;
  }
  if (e->kind == Expr::Kind::BoolLit) return;
  out.push_back(e);
}

// --- Linear forms -----------------------------------------------------------

// Sum of coeff * var plus a constant. `linear` is false when the expression
// contains multiplication of variables, division, or modulo.
struct LinearTerm {
  std::map<std::string, int64_t> coeffs;
  int64_t constant = 0;
  bool linear = true;
};

namespace detail {

inline bool add_overflow(int64_t a, int64_t b, int64_t& out) {
  return __builtin_add_overflow(a, b, &out);
}
inline bool mul_overflow(int64_t a, int64_t b, int64_t& out) {
  return __builtin_mul_overflow(a, b, &out);
}

inline void lin_add(LinearTerm& acc, const LinearTerm& other, int64_t scale) {
  if (!acc.linear || !other.linear) {
    acc.linear = false;
    return;
  }
  int64_t scaled;
  if (mul_overflow(other.constant, scale, scaled) ||
      add_overflow(acc.constant, scaled, acc.constant)) {
    acc.linear = false;
    return;
  }
  for (const auto& [v, c] : other.coeffs) {
    int64_t sc;
    if (mul_overflow(c, scale, sc) || add_overflow(acc.coeffs[v], sc, acc.coeffs[v])) {
      acc.linear = false;
      return;
    }
  }
}

}  // namespace detail

// Linearizes an int-typed expression; marks nonlinear when it is not a
// linear integer combination.
inline LinearTerm linearize(const ExprPtr& e) {
  LinearTerm t;
  switch (e->kind) {
    case Expr::Kind::IntLit:
      t.constant = e->int_value;
      return t;
    case Expr::Kind::BoolLit:
      t.constant = e->bool_value ? 1 : 0;
      return t;
    case Expr::Kind::Var:
      t.coeffs[e->name] = 1;
      return t;
    case Expr::Kind::Unary: {
      if (e->un_op != UnOp::Neg) {
        t.linear = false;
        return t;
      }
      LinearTerm a = linearize(e->args[0]);
      detail::lin_add(t, a, -1);
      t.linear = t.linear && a.linear;
      return t;
    }
    case Expr::Kind::Binary: {
      if (e->bin_op == BinOp::Add || e->bin_op == BinOp::Sub) {
        LinearTerm a = linearize(e->args[0]);
        LinearTerm b = linearize(e->args[1]);
        if (!a.linear || !b.linear) {
          t.linear = false;
          return t;
        }
        t = a;
        detail::lin_add(t, b, e->bin_op == BinOp::Add ? 1 : -1);
        return t;
      }
      if (e->bin_op == BinOp::Mul) {
        LinearTerm a = linearize(e->args[0]);
        LinearTerm b = linearize(e->args[1]);
        if (a.linear && a.coeffs.empty()) {
          t = LinearTerm{};
          detail::lin_add(t, b, a.constant);
          t.linear = t.linear && b.linear;
          return t;
        }
        if (b.linear && b.coeffs.empty()) {
          t = LinearTerm{};
          detail::lin_add(t, a, b.constant);
          t.linear = t.linear && a.linear;
          return t;
        }
        t.linear = false;
        return t;
      }
      t.linear = false;  // div, mod, or a stray boolean op
      return t;
    }
    case Expr::Kind::Call:
      t.linear = false;
      return t;
  }
  t.linear = false;
  return t;
}

// Canonical linear constraint: sum coeff*var <= bound, gcd-reduced with the
// bound floored (sound and exact over the integers).
struct LinearAtom {
  std::map<std::string, int64_t> coeffs;
  int64_t bound = 0;
};

namespace detail {

inline int64_t floor_div(int64_t a, int64_t b) {
  int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline int64_t ceil_div(int64_t a, int64_t b) {
  int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) == (b < 0))) ++q;
  return q;
}

inline void tighten(LinearAtom& a) {
  int64_t g = 0;
  for (const auto& [v, c] : a.coeffs) g = std::gcd(g, c < 0 ? -c : c);
  if (g > 1) {
    for (auto& [v, c] : a.coeffs) c /= g;
    a.bound = floor_div(a.bound, g);
  }
}

}  // namespace detail

// Builds `lhs - rhs <= bound` style atoms for a comparison over int operands.
// Lt/Gt tighten by one (integer semantics); Eq yields two atoms; Ne is not
// representable as a single atom (callers split it into a disjunction).
// Returns nothing if either side is nonlinear.
inline std::optional<std::vector<LinearAtom>> comparison_atoms(BinOp op, const ExprPtr& lhs,
                                                               const ExprPtr& rhs) {
  LinearTerm l = linearize(lhs);
  LinearTerm r = linearize(rhs);
  if (!l.linear || !r.linear) return std::nullopt;
  LinearTerm d = l;
  detail::lin_add(d, r, -1);
  if (!d.linear) return std::nullopt;
  for (auto it = d.coeffs.begin(); it != d.coeffs.end();)
    it = it->second == 0 ? d.coeffs.erase(it) : std::next(it);

  auto leq = [&](int64_t sign, int64_t bound) {
    LinearAtom a;
    for (const auto& [v, c] : d.coeffs) a.coeffs[v] = sign * c;
    a.bound = bound;
    detail::tighten(a);
    return a;
  };
  // d = lhs - rhs (variables part) with constant d.constant.
  std::vector<LinearAtom> out;
  switch (op) {
    case BinOp::Le: out.push_back(leq(1, -d.constant)); break;
    case BinOp::Lt: out.push_back(leq(1, -d.constant - 1)); break;
    case BinOp::Ge: out.push_back(leq(-1, d.constant)); break;
    case BinOp::Gt: out.push_back(leq(-1, d.constant - 1)); break;
    case BinOp::Eq:
      out.push_back(leq(1, -d.constant));
      out.push_back(leq(-1, d.constant));
      break;
    default:
      return std::nullopt;  // Ne handled by the caller as a disjunction
  }
  return out;
}

inline std::string render(const LinearAtom& a) {
  std::string s;
  if (a.coeffs.empty()) s = "0";
  bool first = true;
  for (const auto& [v, c] : a.coeffs) {
    if (!first) s += " + ";
    first = false;
    if (c == 1)
      s += v;
    else
      s += std::to_string(c) + "*" + v;
  }
  return s + " <= " + std::to_string(a.bound);
}

// Canonical identity for a predicate/atom expression: linear comparisons
// normalize to a sign-canonical linear form, everything else to its rendered
// text. Two syntactically different but linearly identical atoms (x < 11 vs
// x <= 10) collapse to one key.
inline std::string canonical_atom_key(const ExprPtr& e) {
  ExprPtr x = e;
  bool neg = false;
  while (x->kind == Expr::Kind::Unary && x->un_op == UnOp::Not) {
    x = x->args[0];
    neg = !neg;
  }
  if (x->kind == Expr::Kind::Binary && is_comparison(x->bin_op) &&
      x->args[0]->type == Type::Int) {
    BinOp op = neg ? negate_expr(x)->bin_op : x->bin_op;
    if (op == BinOp::Le || op == BinOp::Lt || op == BinOp::Ge || op == BinOp::Gt) {
      auto atoms = comparison_atoms(op, x->args[0], x->args[1]);
      if (atoms && atoms->size() == 1) return render((*atoms)[0]);
    }
    if (op == BinOp::Eq || op == BinOp::Ne) {
      auto atoms = comparison_atoms(BinOp::Eq, x->args[0], x->args[1]);
      if (atoms) {
        // Sign-normalize: the Eq pair is symmetric, order the two halves.
        std::string k1 = render((*atoms)[0]);
        std::string k2 = render((*atoms)[1]);
        if (k2 < k1) std::swap(k1, k2);
        return std::string(op == BinOp::Eq ? "eq{" : "ne{") + k1 + " & " + k2 + "}";
      }
    }
  }
  return (neg ? "!(" + to_string(x) + ")" : to_string(x));
}

}  // namespace cfaforge
