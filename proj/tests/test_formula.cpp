#include <catch2/catch_amalgamated.hpp>

#include "cfaforge/formula.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace cfaforge;

namespace {

ExprPtr v(const std::string& n) { return make_var(n); }
ExprPtr n(int32_t k) { return make_int(k); }
ExprPtr bin(BinOp op, ExprPtr a, ExprPtr b) { return make_binary(op, std::move(a), std::move(b)); }

}  // namespace

TEST_CASE("formula evaluation uses 64-bit math integers") {
  Model m{{"x", 5}, {"y", -3}};
  CHECK(eval_formula_int(bin(BinOp::Add, v("x"), v("y")), m) == 2);
  CHECK(eval_formula_int(bin(BinOp::Mul, v("x"), v("y")), m) == -15);
  CHECK(eval_formula_int(bin(BinOp::Sub, n(0), v("y")), m) == 3);
  CHECK(eval_formula_int(make_unary(UnOp::Neg, v("x")), m) == -5);

  // No 32-bit wraparound in the solver's domain.
  Model big{{"x", 2000000000}};
  CHECK(eval_formula_int(bin(BinOp::Add, v("x"), v("x")), big) == 4000000000LL);

  // Unbound variables read as zero.
  CHECK(eval_formula_int(v("ghost"), m) == 0);
}

TEST_CASE("formula evaluation truncates division toward zero") {
  Model m{{"a", -7}, {"b", 2}};
  CHECK(eval_formula_int(bin(BinOp::Div, v("a"), v("b")), m) == -3);
  CHECK(eval_formula_int(bin(BinOp::Mod, v("a"), v("b")), m) == -1);
  CHECK_THROWS_AS(eval_formula_int(bin(BinOp::Div, v("a"), n(0)), m), EvalUndefined);
  CHECK_THROWS_AS(eval_formula_int(bin(BinOp::Mod, v("a"), n(0)), m), EvalUndefined);
}

TEST_CASE("boolean connectives evaluate with short-circuit semantics") {
  Model m{{"x", 1}};
  ExprPtr divz = bin(BinOp::Div, n(1), n(0));
  // Right operand never evaluated when the left decides.
  CHECK_FALSE(eval_formula(bin(BinOp::And, make_bool(false), bin(BinOp::Eq, divz, n(0))), m));
  CHECK(eval_formula(bin(BinOp::Or, make_bool(true), bin(BinOp::Eq, divz, n(0))), m));
  CHECK(eval_formula(make_unary(UnOp::Not, make_bool(false)), m));
  CHECK(eval_formula(bin(BinOp::Le, v("x"), n(1)), m));
  CHECK_FALSE(eval_formula(bin(BinOp::Lt, v("x"), n(1)), m));
}

TEST_CASE("conjunct flattening and rebuilding round-trips") {
  ExprPtr a = bin(BinOp::Lt, v("x"), n(3));
  ExprPtr b = bin(BinOp::Ge, v("y"), n(0));
  ExprPtr c = bin(BinOp::Eq, v("z"), n(7));
  ExprPtr conj = bin(BinOp::And, bin(BinOp::And, a, b), c);

  std::vector<ExprPtr> parts = flatten_conjuncts(conj);
  REQUIRE(parts.size() == 3);
  CHECK(expr_equal(parts[0], a));
  CHECK(expr_equal(parts[1], b));
  CHECK(expr_equal(parts[2], c));

  ExprPtr rebuilt = make_conjunction(parts);
  for (int64_t x : {0, 2, 3})
    for (int64_t y : {-1, 0}) {
      Model m{{"x", x}, {"y", y}, {"z", 7}};
      CHECK(eval_formula(rebuilt, m) == eval_formula(conj, m));
    }

  ExprPtr empty = make_conjunction({});
  CHECK(eval_formula(empty, Model{}));
}

TEST_CASE("atom collection strips negation and ignores literals") {
  ExprPtr cmp1 = bin(BinOp::Lt, v("x"), n(3));
  ExprPtr cmp2 = bin(BinOp::Eq, v("y"), n(0));
  ExprPtr f = bin(BinOp::Or, make_unary(UnOp::Not, cmp1), bin(BinOp::And, cmp2, make_bool(true)));
  std::vector<ExprPtr> atoms;
  collect_atoms(f, atoms);
  REQUIRE(atoms.size() == 2);
  CHECK(expr_equal(atoms[0], cmp1));
  CHECK(expr_equal(atoms[1], cmp2));
}

TEST_CASE("atom collection descends through boolean equality") {
  ExprPtr lhs = bin(BinOp::Lt, v("x"), n(3));
  ExprPtr rhs = make_var("flag", Type::Bool);
  ExprPtr f = bin(BinOp::Eq, lhs, rhs);
  std::vector<ExprPtr> atoms;
  collect_atoms(f, atoms);
  REQUIRE(atoms.size() == 2);
  CHECK(expr_equal(atoms[0], lhs));
  CHECK(expr_equal(atoms[1], rhs));
}

TEST_CASE("linearize handles linear combinations") {
  // 2*x - 3*y + 4
  ExprPtr e = bin(BinOp::Add, bin(BinOp::Sub, bin(BinOp::Mul, n(2), v("x")),
                                  bin(BinOp::Mul, n(3), v("y"))),
                  n(4));
  LinearTerm t = linearize(e);
  REQUIRE(t.linear);
  CHECK(t.coeffs.at("x") == 2);
  CHECK(t.coeffs.at("y") == -3);
  CHECK(t.constant == 4);

  // x*5 works too (constant on either side).
  LinearTerm t2 = linearize(bin(BinOp::Mul, v("x"), n(5)));
  REQUIRE(t2.linear);
  CHECK(t2.coeffs.at("x") == 5);

  LinearTerm t3 = linearize(make_unary(UnOp::Neg, bin(BinOp::Add, v("x"), n(1))));
  REQUIRE(t3.linear);
  CHECK(t3.coeffs.at("x") == -1);
  CHECK(t3.constant == -1);
}

TEST_CASE("linearize rejects nonlinear expressions") {
  CHECK_FALSE(linearize(bin(BinOp::Mul, v("x"), v("y"))).linear);
  CHECK_FALSE(linearize(bin(BinOp::Div, v("x"), n(2))).linear);
  CHECK_FALSE(linearize(bin(BinOp::Mod, v("x"), n(2))).linear);
  CHECK_FALSE(linearize(make_call("f", {})).linear);
  // Coefficient overflow degrades to nonlinear instead of wrapping.
  ExprPtr huge = v("x");
  for (int i = 0; i < 12; ++i) huge = bin(BinOp::Mul, n(1000000), huge);
  CHECK_FALSE(linearize(huge).linear);
}

TEST_CASE("comparison atoms normalize to <= with integer tightening") {
  auto a = comparison_atoms(BinOp::Lt, v("x"), n(11));
  REQUIRE(a);
  REQUIRE(a->size() == 1);
  CHECK((*a)[0].coeffs == std::map<std::string, int64_t>{{"x", 1}});
  CHECK((*a)[0].bound == 10);

  auto b = comparison_atoms(BinOp::Le, v("x"), n(10));
  REQUIRE(b);
  CHECK((*b)[0].bound == 10);
  CHECK(render((*a)[0]) == render((*b)[0]));

  auto c = comparison_atoms(BinOp::Gt, v("x"), v("y"));
  REQUIRE(c);
  REQUIRE(c->size() == 1);
  CHECK((*c)[0].coeffs == std::map<std::string, int64_t>{{"x", -1}, {"y", 1}});
  CHECK((*c)[0].bound == -1);

  auto d = comparison_atoms(BinOp::Ge, v("x"), n(3));
  REQUIRE(d);
  CHECK((*d)[0].coeffs == std::map<std::string, int64_t>{{"x", -1}});
  CHECK((*d)[0].bound == -3);
}

TEST_CASE("equality splits into two bounding atoms") {
  auto a = comparison_atoms(BinOp::Eq, v("x"), n(5));
  REQUIRE(a);
  REQUIRE(a->size() == 2);
  CHECK((*a)[0].coeffs == std::map<std::string, int64_t>{{"x", 1}});
  CHECK((*a)[0].bound == 5);
  CHECK((*a)[1].coeffs == std::map<std::string, int64_t>{{"x", -1}});
  CHECK((*a)[1].bound == -5);

  CHECK_FALSE(comparison_atoms(BinOp::Ne, v("x"), n(5)).has_value());
  CHECK_FALSE(comparison_atoms(BinOp::Lt, bin(BinOp::Mul, v("x"), v("y")), n(0)).has_value());
}

TEST_CASE("comparison atoms gcd-reduce with a floored bound") {
  // 2x + 2y <= 5 tightens to x + y <= 2.
  ExprPtr lhs = bin(BinOp::Add, bin(BinOp::Mul, n(2), v("x")), bin(BinOp::Mul, n(2), v("y")));
  auto a = comparison_atoms(BinOp::Le, lhs, n(5));
  REQUIRE(a);
  CHECK((*a)[0].coeffs == std::map<std::string, int64_t>{{"x", 1}, {"y", 1}});
  CHECK((*a)[0].bound == 2);

  // 3x <= -7 tightens to x <= -3 (floor of -7/3).
  auto b = comparison_atoms(BinOp::Le, bin(BinOp::Mul, n(3), v("x")), n(-7));
  REQUIRE(b);
  CHECK((*b)[0].coeffs == std::map<std::string, int64_t>{{"x", 1}});
  CHECK((*b)[0].bound == -3);
}

TEST_CASE("tightened atoms keep the same integer solutions") {
  std::mt19937_64 rng(20260814);
  std::vector<std::string> vars{"x", "y", "z"};
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    ExprPtr lhs = testgen::gen_linear_term(rng, vars, 2);
    ExprPtr rhs = testgen::gen_linear_term(rng, vars, 2);
    BinOp ops[] = {BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge, BinOp::Eq};
    BinOp op = ops[rng() % 5];
    auto atoms = comparison_atoms(op, lhs, rhs);
    if (!atoms) continue;
    ExprPtr orig = bin(op, lhs, rhs);
    for (int64_t x = -4; x <= 4; ++x)
      for (int64_t y = -4; y <= 4; ++y)
        for (int64_t z = -4; z <= 4; ++z) {
          Model m{{"x", x}, {"y", y}, {"z", z}};
          bool atoms_hold = true;
          for (const LinearAtom& a : *atoms) {
            int64_t sum = 0;
            for (const auto& [var, coef] : a.coeffs) sum += coef * m.at(var);
            atoms_hold = atoms_hold && sum <= a.bound;
          }
          REQUIRE(atoms_hold == eval_formula(orig, m));
          ++checked;
        }
  }
  CHECK(checked > 100000);
}

TEST_CASE("canonical keys collapse equivalent comparisons") {
  CHECK(canonical_atom_key(bin(BinOp::Lt, v("x"), n(11))) ==
        canonical_atom_key(bin(BinOp::Le, v("x"), n(10))));
  // A negation flips the comparison before keying.
  CHECK(canonical_atom_key(make_unary(UnOp::Not, bin(BinOp::Ge, v("x"), n(11)))) ==
        canonical_atom_key(bin(BinOp::Le, v("x"), n(10))));
  CHECK(canonical_atom_key(make_unary(UnOp::Not, make_unary(UnOp::Not, bin(BinOp::Lt, v("x"), n(11))))) ==
        canonical_atom_key(bin(BinOp::Lt, v("x"), n(11))));
  // Equalities are symmetric.
  CHECK(canonical_atom_key(bin(BinOp::Eq, v("x"), v("y"))) ==
        canonical_atom_key(bin(BinOp::Eq, v("y"), v("x"))));
  // x != y and !(x == y) agree; both differ from the equality key.
  CHECK(canonical_atom_key(bin(BinOp::Ne, v("x"), v("y"))) ==
        canonical_atom_key(make_unary(UnOp::Not, bin(BinOp::Eq, v("x"), v("y")))));
  CHECK(canonical_atom_key(bin(BinOp::Ne, v("x"), v("y"))) !=
        canonical_atom_key(bin(BinOp::Eq, v("x"), v("y"))));
  // Distinct constraints stay distinct.
  CHECK(canonical_atom_key(bin(BinOp::Lt, v("x"), n(11))) !=
        canonical_atom_key(bin(BinOp::Lt, v("x"), n(12))));
  CHECK(canonical_atom_key(bin(BinOp::Lt, v("x"), n(3))) !=
        canonical_atom_key(bin(BinOp::Lt, v("y"), n(3))));
}

TEST_CASE("canonical keys fall back to rendered text off the linear fragment") {
  ExprPtr nl = bin(BinOp::Lt, bin(BinOp::Mul, v("x"), v("y")), n(0));
  std::string k = canonical_atom_key(nl);
  CHECK(k == canonical_atom_key(nl));
  CHECK(canonical_atom_key(make_unary(UnOp::Not, nl)) != k);
  CHECK(canonical_atom_key(make_unary(UnOp::Not, nl)).substr(0, 2) == "!(");
}

TEST_CASE("canonical keys respect semantic equivalence on random linear atoms") {
  std::mt19937_64 rng(77001);
  std::vector<std::string> vars{"x", "y"};
  for (int trial = 0; trial < 400; ++trial) {
    ExprPtr a = testgen::gen_linear_formula(rng, vars, 1);
    ExprPtr b = testgen::gen_linear_formula(rng, vars, 1);
    std::vector<ExprPtr> aa, bb;
    collect_atoms(a, aa);
    collect_atoms(b, bb);
    if (aa.size() != 1 || bb.size() != 1) continue;
    if (canonical_atom_key(aa[0]) != canonical_atom_key(bb[0])) continue;
    // Same key must mean same truth table.
    for (int64_t x = -6; x <= 6; ++x)
      for (int64_t y = -6; y <= 6; ++y) {
        Model m{{"x", x}, {"y", y}};
        REQUIRE(eval_formula(aa[0], m) == eval_formula(bb[0], m));
      }
  }
}
