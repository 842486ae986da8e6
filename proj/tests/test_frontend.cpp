#include <catch2/catch_amalgamated.hpp>

#include "cfaforge/cfg_build.hpp"
#include "cfaforge/interp.hpp"
#include "cfaforge/parser.hpp"
#include "cfaforge/printer.hpp"
#include "cfaforge/typecheck.hpp"
#include "generators.hpp"

using namespace cfaforge;
using Catch::Matchers::ContainsSubstring;

namespace {

// Parse, typecheck, inline, and run to completion with the given inputs.
RunResult exec(const std::string& src, std::vector<int32_t> inputs = {}) {
  Program prog = typecheck(parse(src));
  Cfg cfg = inline_functions(prog);
  SequenceHavoc h(std::move(inputs));
  return run_cfg(cfg, h);
}

}  // namespace

TEST_CASE("programs round-trip through the printer") {
  const char* sources[] = {
      "int main(void) { int x = 1; if (x == 1) { x = 2; } else { x = 3; } return x; }",
      "extern int nd(void);\nint main(void) { int i = 0; while (i < 5) { i = i + nd(); } return 0; }",
      "int g = 4;\nint helper(int a, int b) { return a - b; }\n"
      "int main(void) { assert(helper(g, 1) == 3); return 0; }",
      "int main(void) { int i = 0; do { i = i + 1; } while (i < 3); assert(i == 3); return 0; }",
      "int main(void) {\n  int x = 2; int r = 0;\n  switch (x) {\n    case 1: r = 1; break;\n"
      "    case 2: r = 2;\n    case 3: r = r + 10; break;\n    default: r = -1;\n  }\n"
      "  return r;\n}",
      "int main(void) { int i = 0; top: i = i + 1; if (i < 4) { goto top; } return i; }",
  };
  for (const char* src : sources) {
    INFO(src);
    Program once = parse(src);
    Program again = parse(print_program(once));
    CHECK(program_equal(once, again));
  }
}

TEST_CASE("lexer rejects what the dialect leaves out") {
  CHECK_THROWS_AS(parse("int main(void) { int x = 1.5; }"), UnsupportedFeatureError);
  CHECK_THROWS_AS(parse("#include <stdio.h>"), UnsupportedFeatureError);
  CHECK_THROWS_AS(parse("int main(void) { char c; }"), UnsupportedFeatureError);
  CHECK_THROWS_AS(parse("int main(void) { int x = $; }"), LexError);
  CHECK_THROWS_AS(parse("/* never closed"), LexError);
  CHECK_THROWS_AS(parse("int main(void) { int x = 99999999999; }"), LexError);
  CHECK_THROWS_AS(parse("int main(void) { int x = 0; x += 1; }"), UnsupportedFeatureError);
}

TEST_CASE("parser reports malformed programs") {
  CHECK_THROWS_AS(parse("int main(void) { int x = 1 }"), ParseError);
  CHECK_THROWS_AS(parse("extern int f(void) { return 1; }"), ParseError);
  CHECK_THROWS_AS(parse("int main(void) { case 1: return 0; }"), ParseError);
  CHECK_THROWS_AS(parse("int main(void) { void x; }"), ParseError);
  CHECK_THROWS_AS(parse("int main(void) { if (1) { return 0; }"), ParseError);
  CHECK_THROWS_WITH(parse("int main(void) { do { } (0); }"), ContainsSubstring("while"));
  CHECK_THROWS_AS(parse("int main(void) { int* p; }"), UnsupportedFeatureError);
  CHECK_THROWS_AS(parse("int main(void) { int a[3]; }"), UnsupportedFeatureError);
}

TEST_CASE("typechecker enforces scope and type rules") {
  CHECK_THROWS_WITH(typecheck(parse("int main(void) { x = 1; return 0; }")),
                    ContainsSubstring("undeclared variable x"));
  CHECK_THROWS_WITH(typecheck(parse("int main(void) { int x = 0; int x = 1; return 0; }")),
                    ContainsSubstring("redeclaration of x"));
  CHECK_THROWS_WITH(typecheck(parse("int main(void) { return f(); }")),
                    ContainsSubstring("undeclared function f"));
  CHECK_THROWS_WITH(typecheck(parse("int f(int a) { return a; } int main(void) { return f(); }")),
                    ContainsSubstring("wrong number of arguments"));
  CHECK_THROWS_WITH(typecheck(parse("int main(void) { bool b = 3; return 0; }")),
                    ContainsSubstring("initializer type mismatch"));
  CHECK_THROWS_WITH(typecheck(parse("int main(void) { break; }")),
                    ContainsSubstring("break outside loop or switch"));
  CHECK_THROWS_WITH(typecheck(parse("int main(void) { continue; }")),
                    ContainsSubstring("continue outside loop"));
  CHECK_THROWS_WITH(typecheck(parse("int main(void) { goto skip; return 0; }")),
                    ContainsSubstring("goto to undefined label"));
  CHECK_THROWS_WITH(typecheck(parse("int main(void) { a: a: return 0; }")),
                    ContainsSubstring("duplicate label"));
  CHECK_THROWS_WITH(
      typecheck(parse("int main(void) { switch (2) { case 1: case 1: break; } return 0; }")),
      ContainsSubstring("duplicate case"));
  CHECK_THROWS_WITH(typecheck(parse("int main(void) { bool b = true; switch (b) { } return 0; }")),
                    ContainsSubstring("switch condition must be int"));
  CHECK_THROWS_WITH(typecheck(parse("int assert(void) { return 0; }")),
                    ContainsSubstring("'assert' is reserved"));
  CHECK_THROWS_WITH(typecheck(parse("int main(void) { int x = assert(1); return 0; }")),
                    ContainsSubstring("assert is a statement"));
  CHECK_THROWS_WITH(typecheck(parse("int g = 1; int g = 2; int main(void) { return 0; }")),
                    ContainsSubstring("redeclaration of g"));
  CHECK_THROWS_WITH(typecheck(parse("int x = 1; int main(void) { return 0; } int y = x;")),
                    ContainsSubstring("global initializer must be a literal"));
  CHECK_THROWS_WITH(typecheck(parse("int f(void) { return 1; } int f(void) { return 2; } "
                                    "int main(void) { return 0; }")),
                    ContainsSubstring("redefinition of function f"));
  CHECK_THROWS_WITH(typecheck(parse("int f(int a); bool f(int a) { return true; } "
                                    "int main(void) { return 0; }")),
                    ContainsSubstring("conflicting declarations"));
}

TEST_CASE("prototype before definition is accepted") {
  const char* src =
      "int twice(int a);\n"
      "int main(void) { assert(twice(4) == 8); return 0; }\n"
      "int twice(int a) { return a + a; }";
  CHECK(exec(src).status == RunStatus::Exited);
}

TEST_CASE("calls are rejected where evaluation order would be ambiguous") {
  CHECK_THROWS_AS(typecheck(parse("extern int nd(void);\n"
                                  "int main(void) { bool b = true && nd() == 1; return 0; }")),
                  UnsupportedFeatureError);
  Program p = typecheck(parse("extern int nd(void);\n"
                              "int main(void) { while (nd() < 3) { } return 0; }"));
  CHECK_THROWS_AS(inline_functions(p), UnsupportedFeatureError);
}

TEST_CASE("recursion is diagnosed with the call chain") {
  CHECK_THROWS_WITH(
      inline_functions(typecheck(parse("int f(int a) { return f(a); } int main(void) { return f(1); }"))),
      ContainsSubstring("recursive call chain"));
  CHECK_THROWS_WITH(
      inline_functions(typecheck(parse("int a(void); int b(void) { return a(); } "
                                       "int a(void) { return b(); } int main(void) { return a(); }"))),
      ContainsSubstring("a -> b -> a"));
}

TEST_CASE("a program without main cannot be lowered") {
  CHECK_THROWS_AS(inline_functions(typecheck(parse("int f(void) { return 1; }"))),
                  MissingMainError);
}

TEST_CASE("multiple declarators in one statement share the scope") {
  // Regression: these used to land in a synthetic inner block and vanish.
  const char* src = "int main(void) { int i = 0, j = 2, k; k = i + j; assert(k == 2); return 0; }";
  CHECK(exec(src).status == RunStatus::Exited);

  const char* in_switch =
      "int main(void) {\n"
      "  switch (1) {\n"
      "    default: break;\n"
      "  }\n"
      "  int a = 1, b = a + 1;\n"
      "  assert(b == 2);\n"
      "  return 0;\n"
      "}";
  CHECK(exec(in_switch).status == RunStatus::Exited);
}

TEST_CASE("an inner declaration shadows without clobbering") {
  // Regression: the renamed inner x must not leak into the outer scope.
  const char* src =
      "int main(void) {\n"
      "  int x = 1;\n"
      "  if (x == 1) {\n"
      "    int x = 5;\n"
      "    x = x + 1;\n"
      "  }\n"
      "  assert(x == 1);\n"
      "  return 0;\n"
      "}";
  RunResult r = exec(src);
  CHECK(r.status == RunStatus::Exited);

  const char* loop_shadow =
      "int main(void) {\n"
      "  int i = 0; int total = 0;\n"
      "  while (i < 3) {\n"
      "    int i2 = i * 10;\n"
      "    { int total = i2; i2 = total + 1; }\n"
      "    total = total + i2;\n"
      "    i = i + 1;\n"
      "  }\n"
      "  assert(total == 33);\n"
      "  return 0;\n"
      "}";
  CHECK(exec(loop_shadow).status == RunStatus::Exited);
}

TEST_CASE("integer conditions mean nonzero") {
  CHECK(exec("int main(void) { int x = 7; if (x) { return 0; } assert(false); return 1; }").status ==
        RunStatus::Exited);
  CHECK(exec("int main(void) { int n = 3; int c = 0; while (n) { n = n - 1; c = c + 1; } "
             "assert(c == 3); return 0; }").status == RunStatus::Exited);
}

TEST_CASE("switch falls through until break") {
  const char* src =
      "int main(void) {\n"
      "  int x = 2; int r = 0;\n"
      "  switch (x) {\n"
      "    case 1: r = r + 1;\n"
      "    case 2: r = r + 10;\n"
      "    case 3: r = r + 100; break;\n"
      "    case 4: r = r + 1000;\n"
      "    default: r = r + 10000;\n"
      "  }\n"
      "  assert(r == 110);\n"
      "  return 0;\n"
      "}";
  CHECK(exec(src).status == RunStatus::Exited);

  const char* to_default =
      "int main(void) { int r = 0; switch (9) { case 1: r = 1; break; default: r = 5; } "
      "assert(r == 5); return 0; }";
  CHECK(exec(to_default).status == RunStatus::Exited);
}

TEST_CASE("goto and labels lower to plain control flow") {
  const char* src =
      "int main(void) {\n"
      "  int i = 0; int acc = 0;\n"
      "  again:\n"
      "  acc = acc + i;\n"
      "  i = i + 1;\n"
      "  if (i < 5) { goto again; }\n"
      "  assert(acc == 10);\n"
      "  return 0;\n"
      "}";
  CHECK(exec(src).status == RunStatus::Exited);
}

TEST_CASE("do-while runs the body before the test") {
  const char* src =
      "int main(void) { int i = 10; int runs = 0; do { runs = runs + 1; } while (i < 5); "
      "assert(runs == 1); return 0; }";
  CHECK(exec(src).status == RunStatus::Exited);
}

TEST_CASE("global variables initialize before main") {
  const char* src =
      "int counter = 40;\nbool armed = true;\n"
      "int main(void) { if (armed) { counter = counter + 2; } assert(counter == 42); return 0; }";
  CHECK(exec(src).status == RunStatus::Exited);
}

TEST_CASE("defined calls inline and extern calls read fresh input") {
  const char* src =
      "extern int nd(void);\n"
      "int add(int a, int b) { return a + b; }\n"
      "int main(void) {\n"
      "  int x = nd();\n"
      "  int y = add(x, 5);\n"
      "  assert(y == x + 5);\n"
      "  return 0;\n"
      "}";
  Program prog = typecheck(parse(src));
  Cfg cfg = inline_functions(prog);
  // After inlining only the extern remains as a havoc instruction.
  int havocs = 0;
  for (const auto& ins : cfg.nodes) {
    CHECK((ins.kind != InstrKind::Branch || ins.expr != nullptr));
    if (ins.kind == InstrKind::Havoc) ++havocs;
  }
  CHECK(havocs == 1);
  SequenceHavoc h(std::vector<int32_t>{17});
  RunResult r = run_cfg(cfg, h);
  CHECK(r.status == RunStatus::Exited);
}

TEST_CASE("inlined functions keep their own locals separate") {
  const char* src =
      "int square(int x) { int r = x * x; return r; }\n"
      "int main(void) { int r = 3; int s = square(4); assert(r == 3 && s == 16); return 0; }";
  CHECK(exec(src).status == RunStatus::Exited);
}

TEST_CASE("return mid-function skips the rest of the body") {
  const char* src =
      "int clamp(int v) { if (v > 10) { return 10; } if (v < 0) { return 0; } return v; }\n"
      "int main(void) { assert(clamp(99) == 10); assert(clamp(-5) == 0); assert(clamp(7) == 7); "
      "return 0; }";
  CHECK(exec(src).status == RunStatus::Exited);
}

TEST_CASE("division follows C truncation semantics") {
  const char* src =
      "int main(void) {\n"
      "  assert(7 / 2 == 3); assert((0 - 7) / 2 == 0 - 3);\n"
      "  assert(7 % 3 == 1); assert((0 - 7) % 3 == 0 - 1);\n"
      "  return 0;\n"
      "}";
  CHECK(exec(src).status == RunStatus::Exited);
}

TEST_CASE("generated programs survive the whole frontend") {
  for (uint64_t seed = 1; seed <= 500; ++seed) {
    std::string src = testgen::ProgramGen(seed).generate();
    INFO("seed " << seed);
    Program prog;
    REQUIRE_NOTHROW(prog = typecheck(parse(src)));
    Cfg cfg;
    REQUIRE_NOTHROW(cfg = inline_functions(prog));
    REQUIRE(cfg.has_node(cfg.entry_id));
    REQUIRE(cfg.has_node(cfg.exit_id));
    // Round-trip stability.
    Program again = parse(print_program(parse(src)));
    REQUIRE(program_equal(parse(src), again));
  }
}
