#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cfaforge/smtlib.hpp"
#include "cfaforge/verifier.hpp"

using namespace cfaforge;

namespace {

ExprPtr v(const std::string& n) { return make_var(n); }
ExprPtr n(int32_t k) { return make_int(k); }
ExprPtr bin(BinOp op, ExprPtr a, ExprPtr b) { return make_binary(op, std::move(a), std::move(b)); }

// Fake solver commands must drain stdin before replying or the writer side
// dies on a closed pipe.
std::string fake(const std::string& reply) {
  return "cat > /dev/null; printf '" + reply + "'";
}

}  // namespace

TEST_CASE("translation covers the linear fragment") {
  using smt_detail::translate;
  CHECK(translate(n(-3)) == "(- 3)");
  CHECK(translate(n(7)) == "7");
  CHECK(translate(make_bool(true)) == "true");
  CHECK(translate(v("x")) == "|x|");
  CHECK(translate(bin(BinOp::Lt, v("x"), n(4))) == "(< |x| 4)");
  CHECK(translate(bin(BinOp::Ne, v("x"), v("y"))) == "(not (= |x| |y|))");
  CHECK(translate(make_unary(UnOp::Not, make_var("p", Type::Bool))) == "(not |p|)");
  CHECK(translate(bin(BinOp::Mul, n(3), v("x"))) == "(* 3 |x|)");
  CHECK(translate(make_unary(UnOp::Neg, v("x"))) == "(- |x|)");
}

TEST_CASE("translation refuses operations outside the logic") {
  using smt_detail::translate;
  CHECK_THROWS_AS(translate(bin(BinOp::Mul, v("x"), v("y"))), ExternalSolverError);
  CHECK_THROWS_AS(translate(bin(BinOp::Div, v("x"), n(2))), ExternalSolverError);
  CHECK_THROWS_AS(translate(bin(BinOp::Mod, v("x"), n(2))), ExternalSolverError);
  CHECK_THROWS_AS(translate(make_call("f", {})), ExternalSolverError);
}

TEST_CASE("value answers parse including negatives and booleans") {
  using namespace smt_detail;
  auto toks = tokenize_sexpr("((|x| 5) (|y| (- 3)) (|p| true) (|q| false))");
  Model m = parse_values(toks, 0);
  CHECK(m.at("x") == 5);
  CHECK(m.at("y") == -3);
  CHECK(m.at("p") == 1);
  CHECK(m.at("q") == 0);
}

TEST_CASE("tokenizer keeps quoted symbols intact") {
  using namespace smt_detail;
  auto toks = tokenize_sexpr("(|weird name| 1)");
  REQUIRE(toks.size() == 4);
  CHECK(toks[1] == "weird name");
}

TEST_CASE("external solve parses verdicts from the command") {
  ExprPtr f = bin(BinOp::Gt, v("x"), n(2));

  SolverVerdict sat = solve_external(f, fake("sat\\n((|x| 5))\\n"));
  REQUIRE(sat.status == SolveStatus::Sat);
  CHECK(sat.model.at("x") == 5);

  SolverVerdict neg = solve_external(f, fake("sat\\n((|x| (- 3)))\\n"));
  REQUIRE(neg.status == SolveStatus::Sat);
  CHECK(neg.model.at("x") == -3);

  CHECK(solve_external(f, fake("unsat\\n")).status == SolveStatus::Unsat);
  CHECK(solve_external(f, fake("unknown\\n")).status == SolveStatus::Unknown);
}

TEST_CASE("external solve rejects garbage and missing commands") {
  ExprPtr f = bin(BinOp::Gt, v("x"), n(2));
  CHECK_THROWS_AS(solve_external(f, fake("segfault lol\\n")), ExternalSolverError);
  CHECK_THROWS_AS(solve_external(f, "/no/such/binary_zzz"), ExternalSolverError);
}

TEST_CASE("external solve kills a stalled command at the deadline") {
  ExprPtr f = bin(BinOp::Gt, v("x"), n(2));
  CHECK_THROWS_AS(solve_external(f, "cat > /dev/null; sleep 30", 300), ExternalSolverError);
}

TEST_CASE("emitted problem is well-formed smt text") {
  ExprPtr f = bin(BinOp::And, bin(BinOp::Le, v("x"), n(3)), make_var("flag", Type::Bool));
  std::string capture = "smt_problem_capture.txt";
  std::remove(capture.c_str());
  solve_external(f, "cat > " + capture + "; printf 'sat\\n((|x| 1) (|flag| true))\\n'");
  std::ifstream in(capture);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  CHECK(text.find("(set-logic QF_LIA)") != std::string::npos);
  CHECK(text.find("(set-option :produce-models true)") != std::string::npos);
  CHECK(text.find("(declare-fun |x| () Int)") != std::string::npos);
  CHECK(text.find("(declare-fun |flag| () Bool)") != std::string::npos);
  CHECK(text.find("(assert (and (<= |x| 3) |flag|))") != std::string::npos);
  CHECK(text.find("(check-sat)") != std::string::npos);
  CHECK(text.find("(get-value (") != std::string::npos);
  std::remove(capture.c_str());
}

TEST_CASE("decide prefers the internal verdict") {
  DecideCtx ctx;
  // Poison command would fail loudly if it ever ran.
  ctx.external_cmd = "/no/such/binary_zzz";
  ExprPtr easy = bin(BinOp::Lt, v("x"), n(5));
  SolverVerdict r = decide(easy, ctx);
  CHECK(r.status == SolveStatus::Sat);
  CHECK(eval_formula(easy, r.model));
}

TEST_CASE("decide consults the external command only on unknown") {
  // var*var with a huge window defeats the internal search quickly under a
  // starved budget, forcing the external path.
  ExprPtr hard = bin(BinOp::Eq, bin(BinOp::Mul, v("x"), v("y")), n(1000003));
  DecideCtx starved;
  starved.limits.work_budget = 50;
  starved.limits.theory_checks = 1;
  starved.limits.branch_nodes = 1;
  starved.limits.box_nodes = 1;
  REQUIRE(solve(hard, starved.limits).status == SolveStatus::Unknown);

  // Nonlinear multiplication is untranslatable: decide stays unknown.
  starved.external_cmd = fake("sat\\n((|x| 1) (|y| 1000003))\\n");
  CHECK(decide(hard, starved).status == SolveStatus::Unknown);

  // A translatable formula with a lying external model is rejected.
  // 7x + 11y == 1 is sat (x=-3, y=2) but needs search the budget denies.
  ExprPtr linear = bin(BinOp::Eq,
                       bin(BinOp::Add, bin(BinOp::Mul, n(7), v("x")),
                           bin(BinOp::Mul, n(11), v("y"))),
                       n(1));
  DecideCtx lying = starved;
  lying.external_cmd = fake("sat\\n((|x| 0) (|y| 0))\\n");
  REQUIRE(solve(linear, lying.limits).status == SolveStatus::Unknown);
  CHECK(decide(linear, lying).status == SolveStatus::Unknown);

  // A truthful external model is accepted.
  DecideCtx honest = starved;
  honest.external_cmd = fake("sat\\n((|x| (- 3)) (|y| 2))\\n");
  SolverVerdict good = decide(linear, honest);
  REQUIRE(good.status == SolveStatus::Sat);
  CHECK(good.model.at("x") == -3);
  CHECK(good.model.at("y") == 2);

  // External unsat is trusted as stated.
  DecideCtx uns = starved;
  uns.external_cmd = fake("unsat\\n");
  CHECK(decide(linear, uns).status == SolveStatus::Unsat);

  // A broken command leaves the internal verdict in place.
  DecideCtx broken = starved;
  broken.external_cmd = "/no/such/binary_zzz";
  CHECK(decide(linear, broken).status == SolveStatus::Unknown);
}
