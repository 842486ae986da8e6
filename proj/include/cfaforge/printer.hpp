#pragma once

#include <string>

#include "cfaforge/ast.hpp"

namespace cfaforge {

namespace detail {

inline void print_stmts(const std::vector<StmtPtr>& stmts, std::string& out, int indent);

inline void print_indent(std::string& out, int indent) { out.append(indent * 2, ' '); }

inline void print_block(const std::vector<StmtPtr>& body, std::string& out, int indent) {
  out += "{\n";
  print_stmts(body, out, indent + 1);
  print_indent(out, indent);
  out += "}";
}

inline void print_stmt(const StmtPtr& s, std::string& out, int indent) {
  print_indent(out, indent);
  switch (s->kind) {
    case Stmt::Kind::Block:
      print_block(s->body, out, indent);
      out += "\n";
      return;
    case Stmt::Kind::Decl:
      out += to_string(s->decl_type);
      out += " " + s->name;
      if (s->expr) out += " = " + to_string(s->expr);
      out += ";\n";
      return;
    case Stmt::Kind::Assign:
      out += s->name + " = " + to_string(s->expr) + ";\n";
      return;
    case Stmt::Kind::If:
      out += "if (" + to_string(s->expr) + ") ";
      print_block(s->body, out, indent);
      if (!s->else_body.empty()) {
        out += " else ";
        print_block(s->else_body, out, indent);
      }
      out += "\n";
      return;
    case Stmt::Kind::While:
      out += "while (" + to_string(s->expr) + ") ";
      print_block(s->body, out, indent);
      out += "\n";
      return;
    case Stmt::Kind::DoWhile:
      out += "do ";
      print_block(s->body, out, indent);
      out += " while (" + to_string(s->expr) + ");\n";
      return;
    case Stmt::Kind::Switch:
      out += "switch (" + to_string(s->expr) + ") ";
      print_block(s->body, out, indent);
      out += "\n";
      return;
    case Stmt::Kind::Case:
      out += "case " + std::to_string(s->case_value) + ":\n";
      return;
    case Stmt::Kind::Default:
      out += "default:\n";
      return;
    case Stmt::Kind::Break:
      out += "break;\n";
      return;
    case Stmt::Kind::Continue:
      out += "continue;\n";
      return;
    case Stmt::Kind::Goto:
      out += "goto " + s->name + ";\n";
      return;
    case Stmt::Kind::Label:
      out += s->name + ":\n";
      return;
    case Stmt::Kind::Return:
      out += "return";
      if (s->expr) out += " " + to_string(s->expr);
      out += ";\n";
      return;
    case Stmt::Kind::Assert:
      out += "assert(" + to_string(s->expr) + ");\n";
      return;
    case Stmt::Kind::ExprStmt:
      out += to_string(s->expr) + ";\n";
      return;
    case Stmt::Kind::Havoc:
      // Only appears post-inlining; rendered as its source form.
      out += s->name + " = " + s->callee + "(";
      for (size_t i = 0; i < s->havoc_args.size(); ++i) {
        if (i) out += ", ";
        out += to_string(s->havoc_args[i]);
      }
      out += ");\n";
      return;
  }
}

inline void print_stmts(const std::vector<StmtPtr>& stmts, std::string& out, int indent) {
  for (const auto& s : stmts) print_stmt(s, out, indent);
}

}  // namespace detail

inline std::string print_program(const Program& prog) {
  std::string out;
  for (const auto& g : prog.globals) detail::print_stmt(g, out, 0);
  if (!prog.globals.empty()) out += "\n";
  for (const auto& f : prog.functions) {
    out += to_string(f.return_type);
    out += " " + f.name + "(";
    for (size_t i = 0; i < f.params.size(); ++i) {
      if (i) out += ", ";
      out += to_string(f.params[i].type);
      out += " " + f.params[i].name;
    }
    out += ")";
    if (f.body) {
      out += " ";
      detail::print_block(*f.body, out, 0);
      out += "\n\n";
    } else {
      out += ";\n\n";
    }
  }
  return out;
}

// Indented textual AST, used by the dump subcommand.
namespace detail {

inline void dump_stmt(const StmtPtr& s, std::string& out, int indent);

inline void dump_stmts(const char* tag, const std::vector<StmtPtr>& stmts, std::string& out,
                       int indent) {
  if (stmts.empty()) return;
  print_indent(out, indent);
  out += tag;
  out += ":\n";
  for (const auto& s : stmts) dump_stmt(s, out, indent + 1);
}

inline void dump_stmt(const StmtPtr& s, std::string& out, int indent) {
  print_indent(out, indent);
  switch (s->kind) {
    case Stmt::Kind::Block: out += "block\n"; break;
    case Stmt::Kind::Decl:
      out += std::string("decl ") + to_string(s->decl_type) + " " + s->name;
      if (s->expr) out += " = " + to_string(s->expr);
      out += "\n";
      break;
    case Stmt::Kind::Assign: out += "assign " + s->name + " = " + to_string(s->expr) + "\n"; break;
    case Stmt::Kind::If: out += "if " + to_string(s->expr) + "\n"; break;
    case Stmt::Kind::While: out += "while " + to_string(s->expr) + "\n"; break;
    case Stmt::Kind::DoWhile: out += "do-while " + to_string(s->expr) + "\n"; break;
    case Stmt::Kind::Switch: out += "switch " + to_string(s->expr) + "\n"; break;
    case Stmt::Kind::Case: out += "case " + std::to_string(s->case_value) + "\n"; break;
    case Stmt::Kind::Default: out += "default\n"; break;
    case Stmt::Kind::Break: out += "break\n"; break;
    case Stmt::Kind::Continue: out += "continue\n"; break;
    case Stmt::Kind::Goto: out += "goto " + s->name + "\n"; break;
    case Stmt::Kind::Label: out += "label " + s->name + "\n"; break;
    case Stmt::Kind::Return:
      out += "return";
      if (s->expr) out += " " + to_string(s->expr);
      out += "\n";
      break;
    case Stmt::Kind::Assert: out += "assert " + to_string(s->expr) + "\n"; break;
    case Stmt::Kind::ExprStmt: out += "call " + to_string(s->expr) + "\n"; break;
    case Stmt::Kind::Havoc: out += "havoc " + s->name + "\n"; break;
  }
  dump_stmts("then", s->body, out, indent + 1);
  dump_stmts("else", s->else_body, out, indent + 1);
}

}  // namespace detail

inline std::string dump_ast(const Program& prog) {
  std::string out;
  for (const auto& g : prog.globals) detail::dump_stmt(g, out, 0);
  for (const auto& f : prog.functions) {
    out += std::string("function ") + to_string(f.return_type) + " " + f.name + "(";
    for (size_t i = 0; i < f.params.size(); ++i) {
      if (i) out += ", ";
      out += std::string(to_string(f.params[i].type)) + " " + f.params[i].name;
    }
    out += f.body ? ")\n" : ") extern\n";
    if (f.body)
      for (const auto& s : *f.body) detail::dump_stmt(s, out, 1);
  }
  return out;
}

}  // namespace cfaforge
