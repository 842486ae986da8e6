#pragma once

#include <string>
#include <vector>

#include "cfaforge/ast.hpp"
#include "cfaforge/lexer.hpp"

namespace cfaforge {

namespace detail {

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Program parse_program() {
    Program prog;
    while (!at_eof()) {
      bool is_extern = false;
      if (cur().is_keyword("extern")) {
        is_extern = true;
        next();
      }
      Type ty = parse_type(true);
      Token name = expect_identifier("declaration name");
      if (cur().is_punct("(")) {
        prog.functions.push_back(parse_function_rest(ty, name, is_extern));
      } else {
        if (is_extern) throw ParseError("extern is only supported on functions", name.pos);
        if (ty == Type::Void) throw ParseError("variable cannot have void type", name.pos);
        parse_declarators(ty, name, prog.globals);
      }
    }
    return prog;
  }

 private:
  const Token& cur() const { return toks_[idx_]; }
  const Token& peek(size_t off = 1) const {
    size_t j = idx_ + off;
    return toks_[j < toks_.size() ? j : toks_.size() - 1];
  }
  bool at_eof() const { return cur().kind == Token::Kind::Eof; }
  Token next() { return toks_[idx_++]; }

  Token expect_punct(const char* p) {
    if (!cur().is_punct(p))
      throw ParseError(std::string("expected '") + p + "', got '" + describe(cur()) + "'",
                       cur().pos);
    return next();
  }
  Token expect_op(const char* p) {
    if (!cur().is_op(p))
      throw ParseError(std::string("expected '") + p + "', got '" + describe(cur()) + "'",
                       cur().pos);
    return next();
  }
  Token expect_identifier(const char* what) {
    if (cur().kind != Token::Kind::Identifier)
      throw ParseError(std::string("expected ") + what + ", got '" + describe(cur()) + "'",
                       cur().pos);
    return next();
  }

  static std::string describe(const Token& t) {
    return t.kind == Token::Kind::Eof ? "<eof>" : t.text;
  }

  Type parse_type(bool allow_void) {
    if (cur().is_keyword("int")) {
      next();
      check_no_pointer();
      return Type::Int;
    }
    if (cur().is_keyword("bool")) {
      next();
      check_no_pointer();
      return Type::Bool;
    }
    if (allow_void && cur().is_keyword("void")) {
      next();
      check_no_pointer();
      return Type::Void;
    }
    throw ParseError("expected type, got '" + describe(cur()) + "'", cur().pos);
  }

  void check_no_pointer() {
    if (cur().is_op("*")) throw UnsupportedFeatureError("pointer type", cur().pos);
  }

  FunctionDecl parse_function_rest(Type ret, const Token& name, bool is_extern) {
    FunctionDecl fn;
    fn.name = name.text;
    fn.return_type = ret;
    fn.pos = name.pos;
    expect_punct("(");
    if (!cur().is_punct(")")) {
      if (cur().is_keyword("void") && peek().is_punct(")")) {
        next();
      } else {
        for (;;) {
          Type pt = parse_type(false);
          Token pn = expect_identifier("parameter name");
          if (cur().is_punct("[")) throw UnsupportedFeatureError("array parameter", cur().pos);
          fn.params.push_back({pt, pn.text});
          if (cur().is_punct(",")) {
            next();
            continue;
          }
          break;
        }
      }
    }
    expect_punct(")");
    if (cur().is_punct(";")) {
      next();
      return fn;  // prototype: modeled as extern
    }
    if (is_extern)
      throw ParseError("extern function cannot have a body", cur().pos);
    fn.body = parse_block();
    return fn;
  }

  void parse_declarators(Type ty, Token first_name, std::vector<StmtPtr>& out) {
    Token name = first_name;
    for (;;) {
      auto d = make_stmt(Stmt::Kind::Decl, name.pos);
      d->decl_type = ty;
      d->name = name.text;
      if (cur().is_punct("[")) throw UnsupportedFeatureError("array", cur().pos);
      if (cur().is_op("=")) {
        next();
        d->expr = parse_expr();
      }
      out.push_back(std::move(d));
      if (cur().is_punct(",")) {
        next();
        check_no_pointer();
        name = expect_identifier("declaration name");
        continue;
      }
      break;
    }
    expect_punct(";");
  }

  std::vector<StmtPtr> parse_block() {
    expect_punct("{");
    std::vector<StmtPtr> stmts;
    while (!cur().is_punct("}")) {
      if (at_eof()) throw ParseError("unterminated block", cur().pos);
      parse_statement_into(stmts);
    }
    next();
    return stmts;
  }

  // Declarations land directly in the enclosing statement list: wrapping
  // `int a, b;` in a synthetic block would scope the names to themselves.
  void parse_statement_into(std::vector<StmtPtr>& out) {
    const Token& t = cur();
    if (t.is_keyword("int") || t.is_keyword("bool")) {
      Type ty = parse_type(false);
      Token name = expect_identifier("declaration name");
      parse_declarators(ty, name, out);
      return;
    }
    out.push_back(parse_statement());
  }

  StmtPtr parse_statement() {
    const Token& t = cur();

    if (t.is_punct("{")) {
      auto s = make_stmt(Stmt::Kind::Block, t.pos);
      s->body = parse_block();
      return s;
    }
    if (t.is_punct(";")) {
      next();
      return make_stmt(Stmt::Kind::Block, t.pos);  // empty statement
    }
    if (t.is_keyword("int") || t.is_keyword("bool")) {
      Type ty = parse_type(false);
      Token name = expect_identifier("declaration name");
      std::vector<StmtPtr> decls;
      parse_declarators(ty, name, decls);
      if (decls.size() == 1) return decls[0];
      auto s = make_stmt(Stmt::Kind::Block, t.pos);
      s->body = std::move(decls);
      return s;
    }
    if (t.is_keyword("void")) throw ParseError("variable cannot have void type", t.pos);
    if (t.is_keyword("if")) return parse_if();
    if (t.is_keyword("while")) return parse_while();
    if (t.is_keyword("do")) return parse_do_while();
    if (t.is_keyword("switch")) return parse_switch();
    if (t.is_keyword("case") || t.is_keyword("default"))
      throw ParseError("'" + t.text + "' label outside switch", t.pos);
    if (t.is_keyword("break")) {
      next();
      expect_punct(";");
      return make_stmt(Stmt::Kind::Break, t.pos);
    }
    if (t.is_keyword("continue")) {
      next();
      expect_punct(";");
      return make_stmt(Stmt::Kind::Continue, t.pos);
    }
    if (t.is_keyword("goto")) {
      next();
      Token label = expect_identifier("label name");
      expect_punct(";");
      auto s = make_stmt(Stmt::Kind::Goto, t.pos);
      s->name = label.text;
      return s;
    }
    if (t.is_keyword("return")) {
      next();
      auto s = make_stmt(Stmt::Kind::Return, t.pos);
      if (!cur().is_punct(";")) s->expr = parse_expr();
      expect_punct(";");
      return s;
    }
    if (t.kind == Token::Kind::Identifier) {
      if (peek().is_punct(":")) {
        Token label = next();
        next();
        auto s = make_stmt(Stmt::Kind::Label, t.pos);
        s->name = label.text;
        return s;
      }
      if (t.text == "assert" && peek().is_punct("(")) {
        next();
        next();
        auto s = make_stmt(Stmt::Kind::Assert, t.pos);
        s->expr = parse_expr();
        expect_punct(")");
        expect_punct(";");
        return s;
      }
      if (peek().is_op("=")) {
        Token name = next();
        next();
        auto s = make_stmt(Stmt::Kind::Assign, t.pos);
        s->name = name.text;
        s->expr = parse_expr();
        expect_punct(";");
        return s;
      }
      if (peek().is_punct("(")) {
        auto s = make_stmt(Stmt::Kind::ExprStmt, t.pos);
        s->expr = parse_expr();
        expect_punct(";");
        return s;
      }
      throw ParseError("expected statement, got '" + t.text + "'", t.pos);
    }
    throw ParseError("expected statement, got '" + describe(t) + "'", t.pos);
  }

  StmtPtr parse_if() {
    Token kw = next();
    expect_punct("(");
    auto s = make_stmt(Stmt::Kind::If, kw.pos);
    s->expr = parse_expr();
    expect_punct(")");
    s->body = statement_as_body();
    if (cur().is_keyword("else")) {
      next();
      s->else_body = statement_as_body();
    }
    return s;
  }

  StmtPtr parse_while() {
    Token kw = next();
    expect_punct("(");
    auto s = make_stmt(Stmt::Kind::While, kw.pos);
    s->expr = parse_expr();
    expect_punct(")");
    s->body = statement_as_body();
    return s;
  }

  StmtPtr parse_do_while() {
    Token kw = next();
    auto s = make_stmt(Stmt::Kind::DoWhile, kw.pos);
    s->body = statement_as_body();
    if (!cur().is_keyword("while"))
      throw ParseError("expected 'while' after do-body", cur().pos);
    next();
    expect_punct("(");
    s->expr = parse_expr();
    expect_punct(")");
    expect_punct(";");
    return s;
  }

  StmtPtr parse_switch() {
    Token kw = next();
    expect_punct("(");
    auto s = make_stmt(Stmt::Kind::Switch, kw.pos);
    s->expr = parse_expr();
    expect_punct(")");
    expect_punct("{");
    while (!cur().is_punct("}")) {
      if (at_eof()) throw ParseError("unterminated switch", cur().pos);
      if (cur().is_keyword("case")) {
        Token ck = next();
        bool neg = false;
        if (cur().is_op("-")) {
          neg = true;
          next();
        }
        if (cur().kind != Token::Kind::IntLit)
          throw ParseError("expected integer case label", cur().pos);
        Token lit = next();
        expect_punct(":");
        auto c = make_stmt(Stmt::Kind::Case, ck.pos);
        c->case_value = static_cast<int32_t>(neg ? -lit.value : lit.value);
        s->body.push_back(std::move(c));
        continue;
      }
      if (cur().is_keyword("default")) {
        Token dk = next();
        expect_punct(":");
        s->body.push_back(make_stmt(Stmt::Kind::Default, dk.pos));
        continue;
      }
      parse_statement_into(s->body);
    }
    next();
    return s;
  }

  std::vector<StmtPtr> statement_as_body() {
    if (cur().is_punct("{")) return parse_block();
    std::vector<StmtPtr> body;
    body.push_back(parse_statement());
    return body;
  }

  // Expression grammar, C precedence: || < && < ==/!= < relational < +- < */% < unary.
  ExprPtr parse_expr() { return parse_or(); }

  ExprPtr parse_or() {
    ExprPtr lhs = parse_and();
    while (cur().is_op("||")) {
      SourcePos p = next().pos;
      lhs = make_binary(BinOp::Or, lhs, parse_and(), p);
    }
    return lhs;
  }

  ExprPtr parse_and() {
    ExprPtr lhs = parse_equality();
    while (cur().is_op("&&")) {
      SourcePos p = next().pos;
      lhs = make_binary(BinOp::And, lhs, parse_equality(), p);
    }
    return lhs;
  }

  ExprPtr parse_equality() {
    ExprPtr lhs = parse_relational();
    for (;;) {
      BinOp op;
      if (cur().is_op("==")) op = BinOp::Eq;
      else if (cur().is_op("!=")) op = BinOp::Ne;
      else break;
      SourcePos p = next().pos;
      lhs = make_binary(op, lhs, parse_relational(), p);
    }
    return lhs;
  }

  ExprPtr parse_relational() {
    ExprPtr lhs = parse_additive();
    for (;;) {
      BinOp op;
      if (cur().is_op("<")) op = BinOp::Lt;
      else if (cur().is_op("<=")) op = BinOp::Le;
      else if (cur().is_op(">")) op = BinOp::Gt;
      else if (cur().is_op(">=")) op = BinOp::Ge;
      else break;
      SourcePos p = next().pos;
      lhs = make_binary(op, lhs, parse_additive(), p);
    }
    return lhs;
  }

  ExprPtr parse_additive() {
    ExprPtr lhs = parse_multiplicative();
    for (;;) {
      BinOp op;
      if (cur().is_op("+")) op = BinOp::Add;
      else if (cur().is_op("-")) op = BinOp::Sub;
      else break;
      SourcePos p = next().pos;
      lhs = make_binary(op, lhs, parse_multiplicative(), p);
    }
    return lhs;
  }

  ExprPtr parse_multiplicative() {
    ExprPtr lhs = parse_unary();
    for (;;) {
      BinOp op;
      if (cur().is_op("*")) op = BinOp::Mul;
      else if (cur().is_op("/")) op = BinOp::Div;
      else if (cur().is_op("%")) op = BinOp::Mod;
      else break;
      SourcePos p = next().pos;
      lhs = make_binary(op, lhs, parse_unary(), p);
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    if (cur().is_op("-")) {
      SourcePos p = next().pos;
      ExprPtr operand = parse_unary();
      if (operand->kind == Expr::Kind::IntLit)
        return make_int(static_cast<int32_t>(-static_cast<int64_t>(operand->int_value)), p);
      return make_unary(UnOp::Neg, operand, p);
    }
    if (cur().is_op("!")) {
      SourcePos p = next().pos;
      return make_unary(UnOp::Not, parse_unary(), p);
    }
    if (cur().is_op("*")) throw UnsupportedFeatureError("pointer dereference", cur().pos);
    if (cur().is_op("+")) {  // unary plus is a no-op
      next();
      return parse_unary();
    }
    return parse_primary();
  }

  ExprPtr parse_primary() {
    const Token& t = cur();
    if (t.kind == Token::Kind::IntLit) {
      next();
      return make_int(static_cast<int32_t>(t.value), t.pos);
    }
    if (t.is_keyword("true")) {
      next();
      return make_bool(true, t.pos);
    }
    if (t.is_keyword("false")) {
      next();
      return make_bool(false, t.pos);
    }
    if (t.is_punct("(")) {
      next();
      ExprPtr e = parse_expr();
      expect_punct(")");
      return e;
    }
    if (t.kind == Token::Kind::Identifier) {
      Token name = next();
      if (cur().is_punct("(")) {
        next();
        std::vector<ExprPtr> args;
        if (!cur().is_punct(")")) {
          for (;;) {
            args.push_back(parse_expr());
            if (cur().is_punct(",")) {
              next();
              continue;
            }
            break;
          }
        }
        expect_punct(")");
        return make_call(name.text, std::move(args), name.pos);
      }
      return make_var(name.text, Type::Int, name.pos);
    }
    throw ParseError("expected expression, got '" + describe(t) + "'", t.pos);
  }

  std::vector<Token> toks_;
  size_t idx_ = 0;
};

}  // namespace detail

inline Program parse(const std::vector<Token>& tokens) {
  return detail::Parser(tokens).parse_program();
}

inline Program parse(const std::string& source) { return parse(tokenize(source)); }

}  // namespace cfaforge
