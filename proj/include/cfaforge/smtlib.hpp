#pragma once

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cctype>
#include <csignal>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cfaforge/ast.hpp"
#include "cfaforge/diag.hpp"
#include "cfaforge/formula.hpp"
#include "cfaforge/solver.hpp"

namespace cfaforge {

namespace smt_detail {

inline std::string quote(const std::string& name) { return "|" + name + "|"; }

inline void collect_typed_vars(const ExprPtr& e, std::map<std::string, Type>& out) {
  if (e->kind == Expr::Kind::Var) {
    out[e->name] = e->type;
    return;
  }
  for (const auto& a : e->args) collect_typed_vars(a, out);
}

// QF_LIA only: multiplication must have a literal side, div/mod are refused
// outright (their rounding disagrees with the C dialect for negatives).
inline std::string translate(const ExprPtr& e) {
  switch (e->kind) {
    case Expr::Kind::IntLit:
      return e->int_value < 0 ? "(- " + std::to_string(-(int64_t)e->int_value) + ")"
                              : std::to_string(e->int_value);
    case Expr::Kind::BoolLit:
      return e->bool_value ? "true" : "false";
    case Expr::Kind::Var:
      return quote(e->name);
    case Expr::Kind::Unary:
      if (e->un_op == UnOp::Neg) return "(- " + translate(e->args[0]) + ")";
      return "(not " + translate(e->args[0]) + ")";
    case Expr::Kind::Binary: {
      std::string a = translate(e->args[0]);
      std::string b = translate(e->args[1]);
      switch (e->bin_op) {
        case BinOp::Add: return "(+ " + a + " " + b + ")";
        case BinOp::Sub: return "(- " + a + " " + b + ")";
        case BinOp::Mul:
          if (e->args[0]->kind != Expr::Kind::IntLit && e->args[1]->kind != Expr::Kind::IntLit)
            throw ExternalSolverError("nonlinear multiplication is outside QF_LIA");
          return "(* " + a + " " + b + ")";
        case BinOp::Div:
        case BinOp::Mod:
          throw ExternalSolverError("div/mod rounding differs from SMT integers; not exported");
        case BinOp::Lt: return "(< " + a + " " + b + ")";
        case BinOp::Le: return "(<= " + a + " " + b + ")";
        case BinOp::Gt: return "(> " + a + " " + b + ")";
        case BinOp::Ge: return "(>= " + a + " " + b + ")";
        case BinOp::Eq: return "(= " + a + " " + b + ")";
        case BinOp::Ne: return "(not (= " + a + " " + b + "))";
        case BinOp::And: return "(and " + a + " " + b + ")";
        case BinOp::Or: return "(or " + a + " " + b + ")";
      }
      throw ExternalSolverError("bad operator");
    }
    case Expr::Kind::Call:
      throw ExternalSolverError("unresolved call in formula");
  }
  throw ExternalSolverError("bad expression");
}

// Runs `command` through the shell, feeding `input` on stdin and returning
// captured stdout. One process per query keeps calls trivially serialized.
inline std::string run_process(const std::string& command, const std::string& input,
                               int timeout_ms) {
  int in_pipe[2];
  int out_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
    throw ExternalSolverError("pipe creation failed");
  pid_t pid = fork();
  if (pid < 0) throw ExternalSolverError("fork failed");
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), (char*)nullptr);
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);

  size_t written = 0;
  while (written < input.size()) {
    ssize_t n = write(in_pipe[1], input.data() + written, input.size() - written);
    if (n <= 0) break;
    written += (size_t)n;
  }
  close(in_pipe[1]);

  std::string output;
  char buf[4096];
  for (;;) {
    pollfd pfd{out_pipe[0], POLLIN, 0};
    int pr = poll(&pfd, 1, timeout_ms);
    if (pr <= 0) {
      close(out_pipe[0]);
      kill(pid, SIGKILL);
      waitpid(pid, nullptr, 0);
      throw ExternalSolverError("external solver timed out or failed to respond");
    }
    ssize_t n = read(out_pipe[0], buf, sizeof buf);
    if (n < 0) {
      close(out_pipe[0]);
      kill(pid, SIGKILL);
      waitpid(pid, nullptr, 0);
      throw ExternalSolverError("read from external solver failed");
    }
    if (n == 0) break;
    output.append(buf, (size_t)n);
  }
  close(out_pipe[0]);
  int status = 0;
  waitpid(pid, &status, 0);
  if (WIFEXITED(status) && WEXITSTATUS(status) == 127)
    throw ExternalSolverError("external solver command not found");
  return output;
}

inline std::vector<std::string> tokenize_sexpr(const std::string& s) {
  std::vector<std::string> toks;
  size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace((unsigned char)c)) {
      ++i;
    } else if (c == '(' || c == ')') {
      toks.emplace_back(1, c);
      ++i;
    } else if (c == '|') {
      size_t j = s.find('|', i + 1);
      if (j == std::string::npos) break;
      toks.push_back(s.substr(i + 1, j - i - 1));
      i = j + 1;
    } else if (c == '"') {
      size_t j = s.find('"', i + 1);
      if (j == std::string::npos) break;
      toks.push_back(s.substr(i, j - i + 1));
      i = j + 1;
    } else {
      size_t j = i;
      while (j < s.size() && !std::isspace((unsigned char)s[j]) && s[j] != '(' && s[j] != ')' &&
             s[j] != '|')
        ++j;
      toks.push_back(s.substr(i, j - i));
      i = j;
    }
  }
  return toks;
}

// Parses ((x 5) (y (- 3)) (b true)) style get-value answers.
inline Model parse_values(const std::vector<std::string>& toks, size_t start) {
  Model m;
  size_t i = start;
  if (i >= toks.size() || toks[i] != "(") return m;
  ++i;
  while (i < toks.size() && toks[i] == "(") {
    ++i;
    if (i >= toks.size()) break;
    std::string name = toks[i++];
    if (i >= toks.size()) break;
    int64_t value = 0;
    if (toks[i] == "(") {
      // (- 3)
      ++i;
      if (i < toks.size() && toks[i] == "-") {
        ++i;
        if (i < toks.size()) value = -std::strtoll(toks[i].c_str(), nullptr, 10);
        ++i;
      }
      while (i < toks.size() && toks[i] != ")") ++i;
      if (i < toks.size()) ++i;
    } else if (toks[i] == "true") {
      value = 1;
      ++i;
    } else if (toks[i] == "false") {
      value = 0;
      ++i;
    } else {
      value = std::strtoll(toks[i].c_str(), nullptr, 10);
      ++i;
    }
    m[name] = value;
    if (i < toks.size() && toks[i] == ")") ++i;
  }
  return m;
}

}  // namespace smt_detail

// Serializes the formula to the standard SMT text format with the linear
// integer logic, runs the given shell command with the problem on stdin, and
// parses the verdict and model from stdout.
inline SolverVerdict solve_external(const ExprPtr& f, const std::string& command,
                                    int timeout_ms = 30000) {
  using namespace smt_detail;
  std::map<std::string, Type> vars;
  collect_typed_vars(f, vars);

  std::string problem;
  problem += "(set-option :produce-models true)\n";
  problem += "(set-logic QF_LIA)\n";
  for (const auto& [name, type] : vars)
    problem += "(declare-fun " + quote(name) + " () " + (type == Type::Bool ? "Bool" : "Int") +
               ")\n";
  problem += "(assert " + translate(f) + ")\n";
  problem += "(check-sat)\n";
  if (!vars.empty()) {
    problem += "(get-value (";
    bool first = true;
    for (const auto& [name, type] : vars) {
      if (!first) problem += " ";
      first = false;
      problem += quote(name);
    }
    problem += "))\n";
  }

  std::string out = run_process(command, problem, timeout_ms);
  auto toks = tokenize_sexpr(out);
  SolverVerdict v;
  size_t i = 0;
  for (; i < toks.size(); ++i) {
    if (toks[i] == "sat") {
      v.status = SolveStatus::Sat;
      break;
    }
    if (toks[i] == "unsat") {
      v.status = SolveStatus::Unsat;
      break;
    }
    if (toks[i] == "unknown") {
      v.status = SolveStatus::Unknown;
      break;
    }
    if (toks[i] == "error" || toks[i] == "(") continue;
  }
  if (i >= toks.size()) throw ExternalSolverError("unrecognized solver output: " + out);
  if (v.status == SolveStatus::Sat && !vars.empty()) v.model = parse_values(toks, i + 1);
  return v;
}

}  // namespace cfaforge
