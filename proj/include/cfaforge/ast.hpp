#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cfaforge/diag.hpp"

namespace cfaforge {

// The dialect has two value types; Void only occurs as a function return type.
enum class Type { Int, Bool, Void };

inline const char* to_string(Type t) {
  switch (t) {
    case Type::Int: return "int";
    case Type::Bool: return "bool";
    default: return "void";
  }
}

enum class UnOp { Neg, Not };
enum class BinOp { Add, Sub, Mul, Div, Mod, Lt, Le, Gt, Ge, Eq, Ne, And, Or };

inline bool is_comparison(BinOp op) {
  switch (op) {
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge:
    case BinOp::Eq:
    case BinOp::Ne: return true;
    default: return false;
  }
}

inline bool is_logical(BinOp op) { return op == BinOp::And || op == BinOp::Or; }

inline const char* to_string(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Mod: return "%";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::And: return "&&";
    default: return "||";
  }
}

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Immutable expression tree, shared by the AST, CFG instructions, CFA
// operations and verifier predicates.
struct Expr {
  enum class Kind { IntLit, BoolLit, Var, Unary, Binary, Call };

  Kind kind;
  Type type = Type::Int;
  SourcePos pos;

  int32_t int_value = 0;
  bool bool_value = false;
  std::string name;  // Var / Call
  UnOp un_op = UnOp::Neg;
  BinOp bin_op = BinOp::Add;
  std::vector<ExprPtr> args;  // operands or call arguments
};

inline ExprPtr make_int(int32_t v, SourcePos pos = {}) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::IntLit;
  e->type = Type::Int;
  e->int_value = v;
  e->pos = pos;
  return e;
}

inline ExprPtr make_bool(bool v, SourcePos pos = {}) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::BoolLit;
  e->type = Type::Bool;
  e->bool_value = v;
  e->pos = pos;
  return e;
}

inline ExprPtr make_var(std::string name, Type t = Type::Int, SourcePos pos = {}) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Var;
  e->type = t;
  e->name = std::move(name);
  e->pos = pos;
  return e;
}

inline ExprPtr make_unary(UnOp op, ExprPtr a, SourcePos pos = {}) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Unary;
  e->type = op == UnOp::Not ? Type::Bool : Type::Int;
  e->un_op = op;
  e->args = {std::move(a)};
  e->pos = pos;
  return e;
}

inline ExprPtr make_binary(BinOp op, ExprPtr a, ExprPtr b, SourcePos pos = {}) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Binary;
  e->type = (is_comparison(op) || is_logical(op)) ? Type::Bool : Type::Int;
  e->bin_op = op;
  e->args = {std::move(a), std::move(b)};
  e->pos = pos;
  return e;
}

inline ExprPtr make_call(std::string name, std::vector<ExprPtr> args, SourcePos pos = {}) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Call;
  e->type = Type::Int;
  e->name = std::move(name);
  e->args = std::move(args);
  e->pos = pos;
  return e;
}

inline bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Expr::Kind::IntLit: return a->int_value == b->int_value;
    case Expr::Kind::BoolLit: return a->bool_value == b->bool_value;
    case Expr::Kind::Var: return a->name == b->name;
    case Expr::Kind::Unary:
      return a->un_op == b->un_op && expr_equal(a->args[0], b->args[0]);
    case Expr::Kind::Binary:
      return a->bin_op == b->bin_op && expr_equal(a->args[0], b->args[0]) &&
             expr_equal(a->args[1], b->args[1]);
    case Expr::Kind::Call: {
      if (a->name != b->name || a->args.size() != b->args.size()) return false;
      for (size_t i = 0; i < a->args.size(); ++i)
        if (!expr_equal(a->args[i], b->args[i])) return false;
      return true;
    }
  }
  return false;
}

// Collects variable names read by an expression (in DFS order, deduplicated).
inline void collect_vars(const ExprPtr& e, std::vector<std::string>& out) {
  if (!e) return;
  if (e->kind == Expr::Kind::Var) {
    for (const auto& v : out)
      if (v == e->name) return;
    out.push_back(e->name);
    return;
  }
  for (const auto& a : e->args) collect_vars(a, out);
}

inline std::vector<std::string> expr_vars(const ExprPtr& e) {
  std::vector<std::string> out;
  collect_vars(e, out);
  return out;
}

inline bool expr_mentions(const ExprPtr& e, const std::string& var) {
  if (!e) return false;
  if (e->kind == Expr::Kind::Var) return e->name == var;
  for (const auto& a : e->args)
    if (expr_mentions(a, var)) return true;
  return false;
}

// Substitutes `replacement` for every read of `var`.
inline ExprPtr expr_subst(const ExprPtr& e, const std::string& var, const ExprPtr& replacement) {
  if (!e) return e;
  if (e->kind == Expr::Kind::Var) return e->name == var ? replacement : e;
  if (e->args.empty()) return e;
  if (!expr_mentions(e, var)) return e;
  auto copy = std::make_shared<Expr>(*e);
  for (auto& a : copy->args) a = expr_subst(a, var, replacement);
  return copy;
}

// Renames every variable read according to the map (used by the inliner).
template <typename Map>
inline ExprPtr expr_rename(const ExprPtr& e, const Map& renames) {
  if (!e) return e;
  if (e->kind == Expr::Kind::Var) {
    auto it = renames.find(e->name);
    if (it == renames.end()) return e;
    auto copy = std::make_shared<Expr>(*e);
    copy->name = it->second;
    return copy;
  }
  if (e->args.empty()) return e;
  auto copy = std::make_shared<Expr>(*e);
  for (auto& a : copy->args) a = expr_rename(a, renames);
  return copy;
}

inline int precedence(BinOp op) {
  switch (op) {
    case BinOp::Or: return 1;
    case BinOp::And: return 2;
    case BinOp::Eq:
    case BinOp::Ne: return 3;
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge: return 4;
    case BinOp::Add:
    case BinOp::Sub: return 5;
    default: return 6;  // * / %
  }
}

inline void render_expr(const ExprPtr& e, std::string& out, int parent_prec) {
  switch (e->kind) {
    case Expr::Kind::IntLit: out += std::to_string(e->int_value); return;
    case Expr::Kind::BoolLit: out += e->bool_value ? "true" : "false"; return;
    case Expr::Kind::Var: out += e->name; return;
    case Expr::Kind::Unary: {
      out += e->un_op == UnOp::Neg ? "-" : "!";
      const Expr& a = *e->args[0];
      bool atom = a.kind == Expr::Kind::IntLit || a.kind == Expr::Kind::BoolLit ||
                  a.kind == Expr::Kind::Var || a.kind == Expr::Kind::Call;
      if (atom) {
        render_expr(e->args[0], out, 0);
      } else {
        out += "(";
        render_expr(e->args[0], out, 0);
        out += ")";
      }
      return;
    }
    case Expr::Kind::Binary: {
      int prec = precedence(e->bin_op);
      bool parens = prec < parent_prec;
      if (parens) out += "(";
      render_expr(e->args[0], out, prec);
      out += " ";
      out += to_string(e->bin_op);
      out += " ";
      render_expr(e->args[1], out, prec + 1);
      if (parens) out += ")";
      return;
    }
    case Expr::Kind::Call: {
      out += e->name;
      out += "(";
      for (size_t i = 0; i < e->args.size(); ++i) {
        if (i) out += ", ";
        render_expr(e->args[i], out, 0);
      }
      out += ")";
      return;
    }
  }
}

inline std::string to_string(const ExprPtr& e) {
  if (!e) return "<null>";
  std::string out;
  render_expr(e, out, 0);
  return out;
}

// Negation with top-level simplification: comparisons flip to the complement
// operator, double negation cancels, literals invert.
inline ExprPtr negate_expr(const ExprPtr& e) {
  if (e->kind == Expr::Kind::BoolLit) return make_bool(!e->bool_value, e->pos);
  if (e->kind == Expr::Kind::Unary && e->un_op == UnOp::Not) return e->args[0];
  if (e->kind == Expr::Kind::Binary && is_comparison(e->bin_op)) {
    BinOp flipped;
    switch (e->bin_op) {
      case BinOp::Lt: flipped = BinOp::Ge; break;
      case BinOp::Le: flipped = BinOp::Gt; break;
      case BinOp::Gt: flipped = BinOp::Le; break;
      case BinOp::Ge: flipped = BinOp::Lt; break;
      case BinOp::Eq: flipped = BinOp::Ne; break;
      default: flipped = BinOp::Eq; break;
    }
    if (e->args[0]->type == Type::Int)
      return make_binary(flipped, e->args[0], e->args[1], e->pos);
  }
  return make_unary(UnOp::Not, e, e->pos);
}

struct Stmt;
using StmtPtr = std::shared_ptr<Stmt>;

struct Stmt {
  enum class Kind {
    Block,     // stmts
    Decl,      // decl_type name [init]
    Assign,    // name = expr
    If,        // cond, then_block, else_block (optional)
    While,     // cond, body
    DoWhile,   // body, cond
    Switch,    // cond, body (Case/Default markers inline, C fallthrough)
    Case,      // int_value marker inside a Switch body
    Default,   // marker inside a Switch body
    Break,
    Continue,
    Goto,      // name
    Label,     // name marker; applies to the following statement
    Return,    // optional expr
    Assert,    // cond
    ExprStmt,  // bare call expression
    Havoc,     // name; produced by the inliner for extern calls
  };

  Kind kind;
  SourcePos pos;

  Type decl_type = Type::Int;
  std::string name;
  ExprPtr expr;                             // init / rhs / cond / return value
  std::vector<ExprPtr> havoc_args;          // extern call arguments
  std::string callee;                       // extern callee (diagnostics)
  int32_t case_value = 0;
  std::vector<StmtPtr> body;                // Block / While / DoWhile / Switch
  std::vector<StmtPtr> else_body;           // If
};

inline StmtPtr make_stmt(Stmt::Kind kind, SourcePos pos = {}) {
  auto s = std::make_shared<Stmt>();
  s->kind = kind;
  s->pos = pos;
  return s;
}

struct Param {
  Type type;
  std::string name;
};

struct FunctionDecl {
  std::string name;
  Type return_type = Type::Int;
  std::vector<Param> params;
  std::optional<std::vector<StmtPtr>> body;  // nullopt: extern / prototype
  SourcePos pos;
};

struct Program {
  std::vector<StmtPtr> globals;  // Decl statements
  std::vector<FunctionDecl> functions;

  const FunctionDecl* find_function(const std::string& name) const {
    for (const auto& f : functions)
      if (f.name == name) return &f;
    return nullptr;
  }
};

inline bool stmt_equal(const StmtPtr& a, const StmtPtr& b);

inline bool stmts_equal(const std::vector<StmtPtr>& a, const std::vector<StmtPtr>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!stmt_equal(a[i], b[i])) return false;
  return true;
}

inline bool stmt_equal(const StmtPtr& a, const StmtPtr& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  if (a->decl_type != b->decl_type || a->name != b->name || a->callee != b->callee ||
      a->case_value != b->case_value)
    return false;
  if ((a->expr == nullptr) != (b->expr == nullptr)) return false;
  if (a->expr && !expr_equal(a->expr, b->expr)) return false;
  if (a->havoc_args.size() != b->havoc_args.size()) return false;
  for (size_t i = 0; i < a->havoc_args.size(); ++i)
    if (!expr_equal(a->havoc_args[i], b->havoc_args[i])) return false;
  return stmts_equal(a->body, b->body) && stmts_equal(a->else_body, b->else_body);
}

inline bool program_equal(const Program& a, const Program& b) {
  if (!stmts_equal(a.globals, b.globals)) return false;
  if (a.functions.size() != b.functions.size()) return false;
  for (size_t i = 0; i < a.functions.size(); ++i) {
    const auto& fa = a.functions[i];
    const auto& fb = b.functions[i];
    if (fa.name != fb.name || fa.return_type != fb.return_type) return false;
    if (fa.params.size() != fb.params.size()) return false;
    for (size_t j = 0; j < fa.params.size(); ++j)
      if (fa.params[j].type != fb.params[j].type || fa.params[j].name != fb.params[j].name)
        return false;
    if (fa.body.has_value() != fb.body.has_value()) return false;
    if (fa.body && !stmts_equal(*fa.body, *fb.body)) return false;
  }
  return true;
}

}  // namespace cfaforge
