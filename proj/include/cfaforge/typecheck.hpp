#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cfaforge/ast.hpp"

namespace cfaforge {

namespace detail {

class TypeChecker {
 public:
  explicit TypeChecker(const Program& prog) : in_(prog) {}

  Program run() {
    for (const auto& f : in_.functions) {
      if (f.name == "assert") throw TypeError("'assert' is reserved", f.pos);
      if (fn_index_.count(f.name)) {
        const FunctionDecl& prev = in_.functions[fn_index_[f.name]];
        // A prototype followed by a definition (or repeated prototypes) is
        // fine as long as signatures agree; two bodies are not.
        if (prev.body && f.body) throw TypeError("redefinition of function " + f.name, f.pos);
        check_signature_match(prev, f);
        if (f.body) fn_index_[f.name] = static_cast<int>(&f - in_.functions.data());
      } else {
        fn_index_[f.name] = static_cast<int>(&f - in_.functions.data());
      }
    }

    scopes_.emplace_back();
    for (const auto& g : in_.globals) out_.globals.push_back(check_global(g));
    for (const auto& f : in_.functions) {
      if (fn_index_[f.name] != static_cast<int>(&f - in_.functions.data())) continue;
      out_.functions.push_back(check_function(f));
    }
    check_recursion();
    return std::move(out_);
  }

 private:
  struct VarInfo {
    std::string unique;
    Type type;
  };

  void check_signature_match(const FunctionDecl& a, const FunctionDecl& b) {
    bool ok = a.return_type == b.return_type && a.params.size() == b.params.size();
    for (size_t i = 0; ok && i < a.params.size(); ++i) ok = a.params[i].type == b.params[i].type;
    if (!ok) throw TypeError("conflicting declarations of function " + b.name, b.pos);
  }

  StmtPtr check_global(const StmtPtr& g) {
    if (g->kind != Stmt::Kind::Decl) throw TypeError("only declarations allowed at file scope", g->pos);
    if (scopes_[0].count(g->name)) throw TypeError("redeclaration of " + g->name, g->pos);
    auto d = std::make_shared<Stmt>(*g);
    if (d->expr) {
      if (d->expr->kind != Expr::Kind::IntLit && d->expr->kind != Expr::Kind::BoolLit)
        throw TypeError("global initializer must be a literal", d->pos);
      ExprPtr init = annotate(d->expr, false);
      require(init->type == d->decl_type, "initializer type mismatch for " + d->name, d->pos);
      d->expr = init;
    }
    scopes_[0][g->name] = {g->name, g->decl_type};
    return d;
  }

  FunctionDecl check_function(const FunctionDecl& f) {
    FunctionDecl out = f;
    out.body.reset();
    if (!f.body) return out;

    current_fn_ = &f;
    used_names_.clear();
    for (auto& [name, info] : scopes_[0]) used_names_.insert(name);
    labels_.clear();
    collect_labels(*f.body);
    loop_depth_ = 0;
    switch_depth_ = 0;

    scopes_.emplace_back();
    for (const auto& p : f.params) declare(p.name, p.type, f.pos);
    out.body = check_stmts(*f.body);
    scopes_.pop_back();
    current_fn_ = nullptr;
    return out;
  }

  void collect_labels(const std::vector<StmtPtr>& stmts) {
    for (const auto& s : stmts) {
      if (s->kind == Stmt::Kind::Label) {
        if (!labels_.insert(s->name).second)
          throw TypeError("duplicate label " + s->name, s->pos);
      }
      collect_labels(s->body);
      collect_labels(s->else_body);
    }
  }

  void declare(const std::string& name, Type type, SourcePos pos) {
    if (name == "assert") throw TypeError("'assert' is reserved", pos);
    if (scopes_.back().count(name)) throw TypeError("redeclaration of " + name, pos);
    std::string unique = name;
    // Scopes flatten into one function-level namespace downstream, so a name
    // shadowing an outer declaration gets a fresh suffix here.
    while (used_names_.count(unique)) unique += "_" + std::to_string(++suffix_);
    used_names_.insert(unique);
    scopes_.back()[name] = {unique, type};
  }

  const VarInfo* lookup(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto hit = it->find(name);
      if (hit != it->end()) return &hit->second;
    }
    return nullptr;
  }

  static void require(bool cond, const std::string& msg, SourcePos pos) {
    if (!cond) throw TypeError(msg, pos);
  }

  std::vector<StmtPtr> check_stmts(const std::vector<StmtPtr>& stmts) {
    scopes_.emplace_back();
    std::vector<StmtPtr> out;
    for (const auto& s : stmts) out.push_back(check_stmt(s));
    scopes_.pop_back();
    return out;
  }

  StmtPtr check_stmt(const StmtPtr& s) {
    auto o = std::make_shared<Stmt>(*s);
    o->body.clear();
    o->else_body.clear();
    switch (s->kind) {
      case Stmt::Kind::Block:
        o->body = check_stmts(s->body);
        return o;
      case Stmt::Kind::Decl: {
        if (s->expr) {
          ExprPtr init = annotate(s->expr, false);
          require(init->type == s->decl_type,
                  "initializer type mismatch for " + s->name, s->pos);
          o->expr = init;
        }
        declare(s->name, s->decl_type, s->pos);
        o->name = lookup(s->name)->unique;
        return o;
      }
      case Stmt::Kind::Assign: {
        const VarInfo* v = lookup(s->name);
        require(v != nullptr, "assignment to undeclared variable " + s->name, s->pos);
        ExprPtr rhs = annotate(s->expr, false);
        require(rhs->type == v->type, "assignment type mismatch for " + s->name, s->pos);
        o->name = v->unique;
        o->expr = rhs;
        return o;
      }
      case Stmt::Kind::If: {
        o->expr = check_condition(s->expr);
        o->body = check_stmts(s->body);
        o->else_body = check_stmts(s->else_body);
        return o;
      }
      case Stmt::Kind::While:
      case Stmt::Kind::DoWhile: {
        o->expr = check_condition(s->expr);
        ++loop_depth_;
        o->body = check_stmts(s->body);
        --loop_depth_;
        return o;
      }
      case Stmt::Kind::Switch: {
        ExprPtr cond = annotate(s->expr, false);
        require(cond->type == Type::Int, "switch condition must be int", s->pos);
        o->expr = cond;
        std::set<int32_t> seen;
        bool has_default = false;
        for (const auto& item : s->body) {
          if (item->kind == Stmt::Kind::Case)
            require(seen.insert(item->case_value).second, "duplicate case label", item->pos);
          if (item->kind == Stmt::Kind::Default) {
            require(!has_default, "duplicate default label", item->pos);
            has_default = true;
          }
        }
        ++switch_depth_;
        o->body = check_stmts(s->body);
        --switch_depth_;
        return o;
      }
      case Stmt::Kind::Case:
      case Stmt::Kind::Default:
        return o;
      case Stmt::Kind::Break:
        require(loop_depth_ > 0 || switch_depth_ > 0, "break outside loop or switch", s->pos);
        return o;
      case Stmt::Kind::Continue:
        require(loop_depth_ > 0, "continue outside loop", s->pos);
        return o;
      case Stmt::Kind::Goto:
        require(labels_.count(s->name) > 0, "goto to undefined label " + s->name, s->pos);
        return o;
      case Stmt::Kind::Label:
        return o;
      case Stmt::Kind::Return: {
        Type want = current_fn_->return_type;
        if (s->expr) {
          require(want != Type::Void, "void function returns a value", s->pos);
          ExprPtr val = annotate(s->expr, false);
          require(val->type == want, "return type mismatch", s->pos);
          o->expr = val;
        } else {
          require(want == Type::Void, "non-void function returns without a value", s->pos);
        }
        return o;
      }
      case Stmt::Kind::Assert: {
        o->expr = check_condition(s->expr);
        return o;
      }
      case Stmt::Kind::ExprStmt: {
        require(s->expr->kind == Expr::Kind::Call, "expression statement must be a call", s->pos);
        o->expr = annotate(s->expr, true);
        return o;
      }
      case Stmt::Kind::Havoc:
        throw InternalError("havoc statement before inlining");
    }
    throw InternalError("unhandled statement kind");
  }

  // Condition positions accept bool directly or int via the c != 0 reading.
  ExprPtr check_condition(const ExprPtr& e) {
    ExprPtr a = annotate(e, false);
    return truthify(a);
  }

  ExprPtr truthify(const ExprPtr& e) {
    if (e->type == Type::Bool) return e;
    return make_binary(BinOp::Ne, e, make_int(0, e->pos), e->pos);
  }

  ExprPtr annotate(const ExprPtr& e, bool as_statement) {
    switch (e->kind) {
      case Expr::Kind::IntLit:
      case Expr::Kind::BoolLit:
        return e;
      case Expr::Kind::Var: {
        const VarInfo* v = lookup(e->name);
        require(v != nullptr, "use of undeclared variable " + e->name, e->pos);
        return make_var(v->unique, v->type, e->pos);
      }
      case Expr::Kind::Unary: {
        ExprPtr a = annotate(e->args[0], false);
        if (e->un_op == UnOp::Neg) {
          require(a->type == Type::Int, "operand of unary - must be int", e->pos);
          return make_unary(UnOp::Neg, a, e->pos);
        }
        return make_unary(UnOp::Not, truthify(a), e->pos);
      }
      case Expr::Kind::Binary: {
        ExprPtr lhs = annotate(e->args[0], false);
        ExprPtr rhs = annotate(e->args[1], false);
        BinOp op = e->bin_op;
        if (is_logical(op)) {
          // Unconditional inlining would evaluate a call in the short-circuited
          // operand eagerly, changing trap/havoc behavior; reject it up front.
          if (contains_call(e->args[1]))
            throw UnsupportedFeatureError("function call in short-circuited operand", e->pos);
          return make_binary(op, truthify(lhs), truthify(rhs), e->pos);
        }
        if (op == BinOp::Eq || op == BinOp::Ne) {
          require(lhs->type == rhs->type && lhs->type != Type::Void,
                  "operands of == / != must have matching types", e->pos);
          return make_binary(op, lhs, rhs, e->pos);
        }
        require(lhs->type == Type::Int && rhs->type == Type::Int,
                std::string("operands of ") + to_string(op) + " must be int", e->pos);
        return make_binary(op, lhs, rhs, e->pos);
      }
      case Expr::Kind::Call: {
        if (e->name == "assert")
          throw TypeError("assert is a statement, not an expression", e->pos);
        auto it = fn_index_.find(e->name);
        require(it != fn_index_.end(), "call to undeclared function " + e->name, e->pos);
        const FunctionDecl& fn = in_.functions[it->second];
        require(fn.params.size() == e->args.size(),
                "wrong number of arguments to " + e->name, e->pos);
        std::vector<ExprPtr> args;
        for (size_t i = 0; i < e->args.size(); ++i) {
          ExprPtr a = annotate(e->args[i], false);
          require(a->type == fn.params[i].type, "argument type mismatch in call to " + e->name,
                  e->pos);
          args.push_back(a);
        }
        require(as_statement || fn.return_type != Type::Void,
                "void function " + e->name + " used as a value", e->pos);
        auto c = make_call(e->name, std::move(args), e->pos);
        auto mut = std::const_pointer_cast<Expr>(c);
        mut->type = fn.return_type;
        return c;
      }
    }
    throw InternalError("unhandled expression kind");
  }

  static bool contains_call(const ExprPtr& e) {
    if (!e) return false;
    if (e->kind == Expr::Kind::Call) return true;
    for (const auto& a : e->args)
      if (contains_call(a)) return true;
    return false;
  }

  void check_recursion() {
    std::map<std::string, int> color;  // 0 new, 1 active, 2 done
    std::vector<std::string> stack;
    for (const auto& f : out_.functions)
      if (f.body && color[f.name] == 0) dfs_recursion(f, color, stack);
  }

  void dfs_recursion(const FunctionDecl& f, std::map<std::string, int>& color,
                     std::vector<std::string>& stack) {
    color[f.name] = 1;
    stack.push_back(f.name);
    std::vector<std::string> callees;
    collect_callees(*f.body, callees);
    for (const auto& c : callees) {
      const FunctionDecl* g = out_.find_function(c);
      if (!g || !g->body) continue;
      if (color[c] == 1) {
        std::string cycle;
        auto it = std::find(stack.begin(), stack.end(), c);
        for (; it != stack.end(); ++it) cycle += *it + " -> ";
        throw RecursionError("recursive call chain: " + cycle + c);
      }
      if (color[c] == 0) dfs_recursion(*g, color, stack);
    }
    stack.pop_back();
    color[f.name] = 2;
  }

  static void collect_callees(const std::vector<StmtPtr>& stmts, std::vector<std::string>& out) {
    for (const auto& s : stmts) {
      collect_callees_expr(s->expr, out);
      for (const auto& a : s->havoc_args) collect_callees_expr(a, out);
      collect_callees(s->body, out);
      collect_callees(s->else_body, out);
    }
  }

  static void collect_callees_expr(const ExprPtr& e, std::vector<std::string>& out) {
    if (!e) return;
    if (e->kind == Expr::Kind::Call) out.push_back(e->name);
    for (const auto& a : e->args) collect_callees_expr(a, out);
  }

  const Program& in_;
  Program out_;
  std::map<std::string, int> fn_index_;
  std::vector<std::map<std::string, VarInfo>> scopes_;
  std::set<std::string> used_names_;
  std::set<std::string> labels_;
  const FunctionDecl* current_fn_ = nullptr;
  int loop_depth_ = 0;
  int switch_depth_ = 0;
  int suffix_ = 0;
};

}  // namespace detail

// Returns an annotated copy: names resolved (shadowing uniquified), expression
// types filled in, int conditions desugared to `c != 0`, dialect rules enforced.
inline Program typecheck(const Program& prog) { return detail::TypeChecker(prog).run(); }

}  // namespace cfaforge
