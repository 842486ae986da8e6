#pragma once

// Random inputs for the property suites: structured source programs whose
// loops always terminate, raw control-flow graphs for the dataflow oracles,
// and formulas for the solver differentials.

#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cfaforge/ast.hpp"
#include "cfaforge/cfg.hpp"

namespace testgen {

using cfaforge::BinOp;
using cfaforge::Cfg;
using cfaforge::EdgeLabel;
using cfaforge::ExprPtr;
using cfaforge::Instruction;
using cfaforge::InstrKind;
using cfaforge::make_binary;
using cfaforge::make_unary;
using cfaforge::Type;
using cfaforge::UnOp;

class ProgramGen {
 public:
  explicit ProgramGen(uint64_t seed, int max_stmts = 40)
      : rng_(seed), budget_(2 + (int)(rng_() % (uint64_t)std::max(1, max_stmts - 1))) {}

  std::string generate() {
    out_ = "extern int nd(void);\n\nint main(void) {\n";
    for (const auto& v : vars_) {
      line(1, "int " + v + " = " + std::to_string((int)(rng_() % 17) - 8) + ";");
    }
    while (budget_ > 0) stmt(1, 0);
    if (asserts_ == 0) line(1, "assert(" + vars_[(size_t)pick(vars_.size())] + " < 1000);");
    line(1, "return 0;");
    out_ += "}\n";
    return out_;
  }

 private:
  std::mt19937_64 rng_;
  int budget_;
  int loops_ = 0;
  int asserts_ = 0;
  std::string out_;
  std::vector<std::string> vars_{"a", "b", "c", "d", "e"};
  std::vector<std::string> readable_{"a", "b", "c", "d", "e"};

  int pick(size_t n) { return (int)(rng_() % (uint64_t)n); }

  void line(int indent, const std::string& text) {
    out_.append((size_t)indent * 2, ' ');
    out_ += text;
    out_ += '\n';
  }

  std::string int_expr(int depth) {
    if (depth <= 0 || pick(3) == 0) {
      if (pick(2) == 0) return readable_[(size_t)pick(readable_.size())];
      int v = (int)(rng_() % 17) - 8;
      return v < 0 ? "(" + std::to_string(v) + ")" : std::to_string(v);
    }
    std::string a = int_expr(depth - 1);
    std::string b = int_expr(depth - 1);
    switch (pick(5)) {
      case 0: return "(" + a + " + " + b + ")";
      case 1: return "(" + a + " - " + b + ")";
      case 2: return "(" + a + " * " + b + ")";
      case 3: return "(" + a + " / " + std::to_string(2 + pick(5)) + ")";
      default: return "(" + a + " % " + std::to_string(2 + pick(5)) + ")";
    }
  }

  std::string cond_expr(int depth) {
    if (depth <= 0 || pick(3) != 0) {
      static const char* cmp[] = {"<", "<=", ">", ">=", "==", "!="};
      return "(" + int_expr(1) + " " + cmp[pick(6)] + " " + int_expr(1) + ")";
    }
    switch (pick(3)) {
      case 0: return "(" + cond_expr(depth - 1) + " && " + cond_expr(depth - 1) + ")";
      case 1: return "(" + cond_expr(depth - 1) + " || " + cond_expr(depth - 1) + ")";
      default: return "(!" + cond_expr(depth - 1) + ")";
    }
  }

  void stmt(int indent, int depth) {
    --budget_;
    int roll = pick(100);
    if (roll < 40 || depth >= 3) {
      line(indent, vars_[(size_t)pick(vars_.size())] + " = " + int_expr(2) + ";");
      return;
    }
    if (roll < 55) {
      line(indent, vars_[(size_t)pick(vars_.size())] + " = nd();");
      return;
    }
    if (roll < 70) {
      line(indent, "if " + cond_expr(2) + " {");
      block(indent + 1, depth + 1);
      if (pick(2) == 0) {
        line(indent, "} else {");
        block(indent + 1, depth + 1);
      }
      line(indent, "}");
      return;
    }
    if (roll < 85) {
      // Counter-driven loop: the counter is read-only for the body, so the
      // loop always terminates.
      std::string t = "t" + std::to_string(loops_++);
      int bound = 1 + pick(5);
      line(indent, "int " + t + " = 0;");
      line(indent, "while (" + t + " < " + std::to_string(bound) + ") {");
      readable_.push_back(t);
      block(indent + 1, depth + 1);
      readable_.pop_back();
      line(indent + 1, t + " = " + t + " + 1;");
      line(indent, "}");
      return;
    }
    line(indent, "assert" + cond_expr(2) + ";");
    ++asserts_;
  }

  void block(int indent, int depth) {
    int n = 1 + pick(3);
    for (int i = 0; i < n && budget_ > 0; ++i) stmt(indent, depth);
  }
};

inline std::string gen_program(uint64_t seed, int max_stmts = 40) {
  return ProgramGen(seed, max_stmts).generate();
}

// Raw control-flow graph with arbitrary (possibly irreducible) shape. Every
// node reaches exit, which the post-dominator computation requires.
inline Cfg gen_cfg(uint64_t seed, int max_interior = 10) {
  std::mt19937_64 rng(seed);
  auto pick = [&](int n) { return (int)(rng() % (uint64_t)n); };
  static const char* names[] = {"x", "y", "z"};

  Cfg cfg;
  Instruction entry;
  entry.kind = InstrKind::Entry;
  cfg.entry_id = cfg.add_node(entry);
  Instruction exit_n;
  exit_n.kind = InstrKind::Exit;
  cfg.exit_id = cfg.add_node(exit_n);

  int k = 1 + pick(max_interior);
  std::vector<int> interior;
  for (int i = 0; i < k; ++i) {
    Instruction n;
    switch (pick(4)) {
      case 0: {
        n.kind = InstrKind::Assign;
        n.var = names[pick(3)];
        n.expr = make_binary(BinOp::Add, cfaforge::make_var(names[pick(3)]),
                             cfaforge::make_int(pick(5)));
        break;
      }
      case 1: {
        n.kind = InstrKind::Branch;
        n.expr = make_binary(BinOp::Lt, cfaforge::make_var(names[pick(3)]),
                             cfaforge::make_int(pick(7)));
        break;
      }
      case 2:
        n.kind = InstrKind::Havoc;
        n.var = names[pick(3)];
        n.callee = "nd";
        break;
      default:
        n.kind = InstrKind::Skip;
        break;
    }
    interior.push_back(cfg.add_node(n));
  }

  auto any_target = [&]() {
    int r = pick((int)interior.size() + 1);
    return r == (int)interior.size() ? cfg.exit_id : interior[(size_t)r];
  };
  cfg.add_edge(cfg.entry_id, any_target());
  for (int id : interior) {
    if (cfg.node(id).kind == InstrKind::Branch) {
      cfg.add_edge(id, any_target(), EdgeLabel::True);
      cfg.add_edge(id, any_target(), EdgeLabel::False);
    } else {
      cfg.add_edge(id, any_target());
    }
  }
  cfaforge::normalize(cfg);

  // Rewire dead-end cycles until exit is reachable from everywhere.
  while (true) {
    auto ok = cfg.reaches_exit();
    int bad = -1;
    for (const auto& n : cfg.nodes)
      if (!ok.count(n.id)) {
        bad = n.id;
        break;
      }
    if (bad < 0) break;
    cfg.out(bad).back().to = cfg.exit_id;
  }
  cfaforge::normalize(cfg);
  return cfg;
}

// Linear comparison leaves: optional literal scaling only.
inline ExprPtr gen_linear_term(std::mt19937_64& rng, const std::vector<std::string>& vars,
                               int depth) {
  auto pick = [&](int n) { return (int)(rng() % (uint64_t)n); };
  if (depth <= 0 || pick(3) == 0) {
    if (pick(3) == 0) return cfaforge::make_int(pick(17) - 8);
    ExprPtr v = cfaforge::make_var(vars[(size_t)pick((int)vars.size())]);
    if (pick(4) == 0) return make_binary(BinOp::Mul, cfaforge::make_int(pick(9) - 4), v);
    return v;
  }
  ExprPtr a = gen_linear_term(rng, vars, depth - 1);
  ExprPtr b = gen_linear_term(rng, vars, depth - 1);
  return make_binary(pick(2) == 0 ? BinOp::Add : BinOp::Sub, a, b);
}

// Arbitrary arithmetic leaves, including division, modulo, and products of
// variables; exercises the nonlinear fallback.
inline ExprPtr gen_any_term(std::mt19937_64& rng, const std::vector<std::string>& vars,
                            int depth) {
  auto pick = [&](int n) { return (int)(rng() % (uint64_t)n); };
  if (depth <= 0 || pick(3) == 0) {
    if (pick(3) == 0) return cfaforge::make_int(pick(17) - 8);
    return cfaforge::make_var(vars[(size_t)pick((int)vars.size())]);
  }
  ExprPtr a = gen_any_term(rng, vars, depth - 1);
  ExprPtr b = gen_any_term(rng, vars, depth - 1);
  static const BinOp ops[] = {BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Mod};
  return make_binary(ops[pick(5)], a, b);
}

template <typename TermFn>
inline ExprPtr gen_formula_with(std::mt19937_64& rng, const std::vector<std::string>& vars,
                                int depth, TermFn&& term) {
  auto pick = [&](int n) { return (int)(rng() % (uint64_t)n); };
  if (depth <= 0 || pick(4) == 0) {
    static const BinOp cmps[] = {BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge, BinOp::Eq, BinOp::Ne};
    return make_binary(cmps[pick(6)], term(rng, vars, 2), term(rng, vars, 2));
  }
  switch (pick(3)) {
    case 0:
      return make_binary(BinOp::And, gen_formula_with(rng, vars, depth - 1, term),
                         gen_formula_with(rng, vars, depth - 1, term));
    case 1:
      return make_binary(BinOp::Or, gen_formula_with(rng, vars, depth - 1, term),
                         gen_formula_with(rng, vars, depth - 1, term));
    default:
      return make_unary(UnOp::Not, gen_formula_with(rng, vars, depth - 1, term));
  }
}

inline ExprPtr gen_linear_formula(std::mt19937_64& rng, const std::vector<std::string>& vars,
                                  int depth = 3) {
  return gen_formula_with(rng, vars, depth,
                          [](std::mt19937_64& r, const std::vector<std::string>& v, int d) {
                            return gen_linear_term(r, v, d);
                          });
}

inline ExprPtr gen_any_formula(std::mt19937_64& rng, const std::vector<std::string>& vars,
                               int depth = 3) {
  return gen_formula_with(rng, vars, depth,
                          [](std::mt19937_64& r, const std::vector<std::string>& v, int d) {
                            return gen_any_term(r, v, d);
                          });
}

// Conjoins lo <= v <= hi for every variable, making the formula decidable by
// exhaustive enumeration over the same window.
inline ExprPtr clamp_vars(ExprPtr f, const std::vector<std::string>& vars, int lo, int hi) {
  for (const auto& v : vars) {
    f = make_binary(BinOp::And, f,
                    make_binary(BinOp::And,
                                make_binary(BinOp::Ge, cfaforge::make_var(v), cfaforge::make_int(lo)),
                                make_binary(BinOp::Le, cfaforge::make_var(v), cfaforge::make_int(hi))));
  }
  return f;
}

}  // namespace testgen
