#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "cfaforge/solver.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace cfaforge;

namespace {

ExprPtr v(const std::string& n) { return make_var(n); }
ExprPtr n(int32_t k) { return make_int(k); }
ExprPtr bin(BinOp op, ExprPtr a, ExprPtr b) { return make_binary(op, std::move(a), std::move(b)); }

}  // namespace

TEST_CASE("solver decides simple linear facts") {
  SolverVerdict sat = solve(bin(BinOp::And, bin(BinOp::Lt, v("x"), n(5)),
                                bin(BinOp::Gt, v("x"), n(2))));
  REQUIRE(sat.status == SolveStatus::Sat);
  CHECK(sat.model.at("x") > 2);
  CHECK(sat.model.at("x") < 5);

  SolverVerdict unsat = solve(bin(BinOp::And, bin(BinOp::Lt, v("x"), n(3)),
                                  bin(BinOp::Gt, v("x"), n(2))));
  CHECK(unsat.status == SolveStatus::Unsat);

  CHECK(solve(make_bool(true)).status == SolveStatus::Sat);
  CHECK(solve(make_bool(false)).status == SolveStatus::Unsat);

  // x != x is unsat; x != y is sat.
  CHECK(solve(bin(BinOp::Ne, v("x"), v("x"))).status == SolveStatus::Unsat);
  CHECK(solve(bin(BinOp::Ne, v("x"), v("y"))).status == SolveStatus::Sat);
}

TEST_CASE("solver handles disjunction and negation") {
  ExprPtr f = bin(BinOp::Or, bin(BinOp::And, bin(BinOp::Eq, v("x"), n(1)),
                                 bin(BinOp::Eq, v("x"), n(2))),
                  bin(BinOp::Eq, v("y"), n(7)));
  SolverVerdict r = solve(f);
  REQUIRE(r.status == SolveStatus::Sat);
  CHECK(eval_formula(f, r.model));

  ExprPtr g = make_unary(UnOp::Not, bin(BinOp::Or, bin(BinOp::Le, v("x"), n(10)),
                                        bin(BinOp::Gt, v("x"), n(4))));
  CHECK(solve(g).status == SolveStatus::Unsat);
}

TEST_CASE("solver agrees with exhaustive enumeration on bounded linear formulas") {
  std::mt19937_64 rng(411007);
  std::vector<std::string> vars{"x", "y", "z"};
  int sat_count = 0, unsat_count = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    ExprPtr body = testgen::gen_linear_formula(rng, vars, 3);
    ExprPtr f = testgen::clamp_vars(body, vars, -8, 8);
    SolverVerdict got = solve(f);
    testoracle::EnumVerdict want = testoracle::enumerate_sat(f, vars, -8, 8);
    INFO("trial " << trial << ": " << to_string(f));
    REQUIRE(got.status != SolveStatus::Unknown);
    REQUIRE((got.status == SolveStatus::Sat) == want.sat);
    if (got.status == SolveStatus::Sat) {
      REQUIRE(eval_formula(f, got.model));
      ++sat_count;
    } else {
      ++unsat_count;
    }
  }
  // The generator should exercise both outcomes.
  CHECK(sat_count > 200);
  CHECK(unsat_count > 100);
}

TEST_CASE("solver stays sound on nonlinear formulas") {
  std::mt19937_64 rng(52101);
  std::vector<std::string> vars{"x", "y"};
  int decided = 0;
  for (int trial = 0; trial < 600; ++trial) {
    ExprPtr body = testgen::gen_any_formula(rng, vars, 3);
    ExprPtr f = testgen::clamp_vars(body, vars, -6, 6);
    SolverVerdict got = solve(f);
    testoracle::EnumVerdict want = testoracle::enumerate_sat(f, vars, -6, 6);
    INFO("trial " << trial << ": " << to_string(f));
    if (got.status == SolveStatus::Sat) {
      REQUIRE(eval_formula(f, got.model));
      ++decided;
    } else if (got.status == SolveStatus::Unsat) {
      REQUIRE_FALSE(want.sat);
      ++decided;
    }
  }
  // Unknown is allowed off the linear fragment, but not the common case.
  CHECK(decided > 400);
}

TEST_CASE("unsat cores are subsets that stay unsat alone") {
  std::vector<ExprPtr> conjuncts{
      bin(BinOp::Ge, v("x"), n(0)),
      bin(BinOp::Le, v("y"), n(100)),
      bin(BinOp::Lt, v("x"), v("y")),
      bin(BinOp::Lt, v("y"), v("x")),
      bin(BinOp::Eq, v("z"), n(3)),
  };
  SolverVerdict r = solve_conjunction(conjuncts, {}, true);
  REQUIRE(r.status == SolveStatus::Unsat);
  REQUIRE_FALSE(r.core.empty());
  CHECK(r.core.size() <= conjuncts.size());
  for (const ExprPtr& c : r.core) {
    bool member = false;
    for (const ExprPtr& orig : conjuncts) member = member || expr_equal(c, orig);
    CHECK(member);
  }
  CHECK(solve(make_conjunction(r.core)).status == SolveStatus::Unsat);
  // x<y and y<x alone already conflict; the core should not drag in z.
  for (const ExprPtr& c : r.core) CHECK_FALSE(expr_mentions(c, "z"));
}

TEST_CASE("cores on random unsat conjunctions re-solve unsat") {
  std::mt19937_64 rng(99120);
  std::vector<std::string> vars{"x", "y"};
  int cores_checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    std::vector<ExprPtr> cs;
    int parts = 2 + int(rng() % 4);
    for (int i = 0; i < parts; ++i)
      cs.push_back(testgen::clamp_vars(testgen::gen_linear_formula(rng, vars, 2), vars, -8, 8));
    SolverVerdict r = solve_conjunction(cs, {}, true);
    if (r.status != SolveStatus::Unsat) continue;
    REQUIRE_FALSE(r.core.empty());
    SolverVerdict again = solve(make_conjunction(r.core));
    REQUIRE(again.status == SolveStatus::Unsat);
    ++cores_checked;
  }
  CHECK(cores_checked > 30);
}

TEST_CASE("exhausted work budget degrades to unknown") {
  SolverLimits tiny;
  tiny.work_budget = 5;
  tiny.branch_nodes = 1;
  tiny.box_nodes = 1;
  tiny.theory_checks = 1;
  std::mt19937_64 rng(3);
  std::vector<std::string> vars{"x", "y", "z"};
  for (int trial = 0; trial < 50; ++trial) {
    ExprPtr f = testgen::clamp_vars(testgen::gen_any_formula(rng, vars, 3), vars, -8, 8);
    SolverVerdict r = solve(f, tiny);
    if (r.status == SolveStatus::Sat) CHECK(eval_formula(f, r.model));
    // Unsat under a starved budget must still be genuine.
    if (r.status == SolveStatus::Unsat)
      CHECK_FALSE(testoracle::enumerate_sat(f, vars, -8, 8).sat);
  }
}

TEST_CASE("solver finds models outside small windows") {
  // Only satisfiable far from zero.
  ExprPtr f = bin(BinOp::Ge, v("x"), n(100000));
  SolverVerdict r = solve(f);
  REQUIRE(r.status == SolveStatus::Sat);
  CHECK(r.model.at("x") >= 100000);

  ExprPtr g = bin(BinOp::And, bin(BinOp::Ge, bin(BinOp::Add, v("x"), v("y")), n(5000)),
                  bin(BinOp::Le, bin(BinOp::Sub, v("x"), v("y")), n(-9000)));
  SolverVerdict r2 = solve(g);
  REQUIRE(r2.status == SolveStatus::Sat);
  CHECK(eval_formula(g, r2.model));
}

TEST_CASE("boolean variables solve alongside integers") {
  ExprPtr f = bin(BinOp::And, make_var("p", Type::Bool),
                  bin(BinOp::And, make_unary(UnOp::Not, make_var("q", Type::Bool)),
                      bin(BinOp::Eq, v("x"), n(4))));
  SolverVerdict r = solve(f);
  REQUIRE(r.status == SolveStatus::Sat);
  CHECK(r.model.at("p") != 0);
  CHECK(r.model.at("q") == 0);
  CHECK(r.model.at("x") == 4);

  CHECK(solve(bin(BinOp::And, make_var("p", Type::Bool),
                  make_unary(UnOp::Not, make_var("p", Type::Bool))))
            .status == SolveStatus::Unsat);
}
