#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cfaforge/ast.hpp"
#include "cfaforge/cfg.hpp"

namespace cfaforge {

struct CallGraph {
  std::vector<std::string> functions;                       // declaration order
  std::map<std::string, std::vector<std::string>> callees;  // one entry per call site
  std::set<std::string> defined;

  bool is_extern(const std::string& fn) const { return !defined.count(fn); }

  // Defined functions ordered callees-first (valid because recursion is
  // rejected by the typechecker).
  std::vector<std::string> bottom_up_order() const {
    std::vector<std::string> order;
    std::set<std::string> done;
    std::function<void(const std::string&)> visit = [&](const std::string& fn) {
      if (done.count(fn) || !defined.count(fn)) return;
      done.insert(fn);
      auto it = callees.find(fn);
      if (it != callees.end())
        for (const auto& c : it->second) visit(c);
      order.push_back(fn);
    };
    for (const auto& fn : functions) visit(fn);
    return order;
  }
};

inline CallGraph build_call_graph(const Program& prog) {
  CallGraph cg;
  for (const auto& f : prog.functions) {
    cg.functions.push_back(f.name);
    if (f.body) cg.defined.insert(f.name);
    cg.callees[f.name];
  }
  std::function<void(const ExprPtr&, std::vector<std::string>&)> visit_expr =
      [&](const ExprPtr& e, std::vector<std::string>& out) {
        if (!e) return;
        if (e->kind == Expr::Kind::Call) out.push_back(e->name);
        for (const auto& a : e->args) visit_expr(a, out);
      };
  std::function<void(const std::vector<StmtPtr>&, std::vector<std::string>&)> visit_stmts =
      [&](const std::vector<StmtPtr>& stmts, std::vector<std::string>& out) {
        for (const auto& s : stmts) {
          visit_expr(s->expr, out);
          for (const auto& a : s->havoc_args) visit_expr(a, out);
          visit_stmts(s->body, out);
          visit_stmts(s->else_body, out);
        }
      };
  for (const auto& f : prog.functions)
    if (f.body) visit_stmts(*f.body, cg.callees[f.name]);
  return cg;
}

namespace detail {

// Rewrites statements so that calls only occur in statement position:
// extern calls become Havoc statements, defined calls (when enabled) are
// replaced by renamed copies of the callee body.
class CallFlattener {
 public:
  CallFlattener(const Program& prog, bool inline_defined)
      : prog_(prog), inline_defined_(inline_defined) {
    collect_used_names();
  }

  std::vector<StmtPtr> flatten_body(const std::string& fn_name,
                                    const std::vector<StmtPtr>& body) {
    if (inline_defined_) {
      CallGraph cg = build_call_graph(prog_);
      for (const auto& name : cg.bottom_up_order()) {
        const FunctionDecl* f = prog_.find_function(name);
        if (f && f->body && !processed_.count(name)) processed_[name] = flatten_stmts(*f->body);
      }
      auto it = processed_.find(fn_name);
      if (it != processed_.end()) return it->second;
    }
    return flatten_stmts(body);
  }

 private:
  void collect_used_names() {
    std::function<void(const std::vector<StmtPtr>&)> walk = [&](const std::vector<StmtPtr>& ss) {
      for (const auto& s : ss) {
        if (!s->name.empty()) used_.insert(s->name);
        walk(s->body);
        walk(s->else_body);
      }
    };
    walk(prog_.globals);
    for (const auto& f : prog_.functions) {
      for (const auto& p : f.params) used_.insert(p.name);
      if (f.body) walk(*f.body);
    }
  }

  std::string fresh(const char* base) {
    std::string name;
    do {
      name = std::string(base) + std::to_string(counter_++);
    } while (used_.count(name));
    used_.insert(name);
    return name;
  }

  std::vector<StmtPtr> flatten_stmts(const std::vector<StmtPtr>& stmts) {
    std::vector<StmtPtr> out;
    for (const auto& s : stmts) flatten_stmt(s, out);
    return out;
  }

  void flatten_stmt(const StmtPtr& s, std::vector<StmtPtr>& out) {
    switch (s->kind) {
      case Stmt::Kind::Decl: {
        if (s->expr && s->expr->kind == Expr::Kind::Call) {
          emit_call_into(s->expr, s->name, s->decl_type, true, out);
          return;
        }
        if (s->expr && contains_call(s->expr)) {
          auto d = std::make_shared<Stmt>(*s);
          d->expr = flatten_expr(s->expr, out);
          out.push_back(std::move(d));
          return;
        }
        out.push_back(s);
        return;
      }
      case Stmt::Kind::Assign: {
        if (s->expr->kind == Expr::Kind::Call) {
          emit_call_into(s->expr, s->name, s->expr->type, false, out);
          return;
        }
        if (contains_call(s->expr)) {
          auto a = std::make_shared<Stmt>(*s);
          a->expr = flatten_expr(s->expr, out);
          out.push_back(std::move(a));
          return;
        }
        out.push_back(s);
        return;
      }
      case Stmt::Kind::ExprStmt: {
        const ExprPtr& call = s->expr;
        const FunctionDecl* fn = prog_.find_function(call->name);
        if (fn && fn->body && inline_defined_) {
          std::vector<ExprPtr> args;
          for (const auto& a : call->args) args.push_back(flatten_expr(a, out));
          emit_inline(*fn, args, "", out);
          return;
        }
        if (fn && fn->body) throw InternalError("call to defined function " + call->name +
                                                "; inline functions first");
        if (call->type == Type::Void) {
          for (const auto& a : call->args)
            if (contains_call(a)) flatten_expr(a, out);
          return;  // extern void call: no observable effect
        }
        emit_call_into(call, fresh("__v"), call->type, true, out);
        return;
      }
      case Stmt::Kind::If: {
        auto c = std::make_shared<Stmt>(*s);
        c->expr = flatten_expr(s->expr, out);
        c->body = flatten_stmts(s->body);
        c->else_body = flatten_stmts(s->else_body);
        out.push_back(std::move(c));
        return;
      }
      case Stmt::Kind::While:
      case Stmt::Kind::DoWhile: {
        if (contains_call(s->expr))
          throw UnsupportedFeatureError("function call in loop condition", s->pos);
        auto c = std::make_shared<Stmt>(*s);
        c->body = flatten_stmts(s->body);
        out.push_back(std::move(c));
        return;
      }
      case Stmt::Kind::Switch: {
        auto c = std::make_shared<Stmt>(*s);
        c->expr = flatten_expr(s->expr, out);
        c->body = flatten_stmts(s->body);
        out.push_back(std::move(c));
        return;
      }
      case Stmt::Kind::Return:
      case Stmt::Kind::Assert: {
        if (s->expr && contains_call(s->expr)) {
          auto c = std::make_shared<Stmt>(*s);
          c->expr = flatten_expr(s->expr, out);
          out.push_back(std::move(c));
          return;
        }
        out.push_back(s);
        return;
      }
      case Stmt::Kind::Block: {
        auto c = std::make_shared<Stmt>(*s);
        c->body = flatten_stmts(s->body);
        out.push_back(std::move(c));
        return;
      }
      default:
        out.push_back(s);
        return;
    }
  }

  // Emits the statements computing `call` into variable `target`.
  void emit_call_into(const ExprPtr& call, const std::string& target, Type type,
                      bool declare_target, std::vector<StmtPtr>& out) {
    const FunctionDecl* fn = prog_.find_function(call->name);
    std::vector<ExprPtr> args;
    for (const auto& a : call->args) args.push_back(flatten_expr(a, out));
    if (!fn || !fn->body) {
      auto h = make_stmt(Stmt::Kind::Havoc, call->pos);
      h->name = target;
      h->decl_type = type;
      h->callee = call->name;
      h->havoc_args = std::move(args);
      out.push_back(std::move(h));
      return;
    }
    if (!inline_defined_)
      throw InternalError("call to defined function " + call->name + "; inline functions first");
    std::string result = emit_inline(*fn, args, fresh("__r"), out);
    auto a = make_stmt(declare_target ? Stmt::Kind::Decl : Stmt::Kind::Assign, call->pos);
    a->name = target;
    a->decl_type = type;
    a->expr = make_var(result, type, call->pos);
    out.push_back(std::move(a));
  }

  ExprPtr flatten_expr(const ExprPtr& e, std::vector<StmtPtr>& out) {
    if (!e || !contains_call(e)) return e;
    if (e->kind == Expr::Kind::Call) {
      const FunctionDecl* fn = prog_.find_function(e->name);
      std::vector<ExprPtr> args;
      for (const auto& a : e->args) args.push_back(flatten_expr(a, out));
      if (!fn || !fn->body) {
        std::string tmp = fresh("__t");
        auto h = make_stmt(Stmt::Kind::Havoc, e->pos);
        h->name = tmp;
        h->decl_type = e->type;
        h->callee = e->name;
        h->havoc_args = std::move(args);
        out.push_back(std::move(h));
        return make_var(tmp, e->type, e->pos);
      }
      if (!inline_defined_)
        throw InternalError("call to defined function " + e->name + "; inline functions first");
      std::string result = emit_inline(*fn, args, fresh("__r"), out);
      return make_var(result, e->type, e->pos);
    }
    auto copy = std::make_shared<Expr>(*e);
    for (auto& a : copy->args) a = flatten_expr(a, out);
    return copy;
  }

  // Splices a renamed copy of `fn`'s processed body; returns the result
  // variable name ("" for void calls).
  std::string emit_inline(const FunctionDecl& fn, const std::vector<ExprPtr>& args,
                          const std::string& result, std::vector<StmtPtr>& out) {
    const auto& body = processed_.at(fn.name);
    std::string suffix = "__i" + std::to_string(inline_counter_++);

    std::map<std::string, std::string> renames;
    for (const auto& p : fn.params) renames[p.name] = unique_rename(p.name, suffix);
    collect_renames(body, suffix, renames);
    std::string exit_label = unique_rename("__end_" + fn.name, suffix);

    if (!result.empty()) {
      auto rd = make_stmt(Stmt::Kind::Decl, fn.pos);
      rd->name = result;
      rd->decl_type = fn.return_type;
      rd->expr = fn.return_type == Type::Bool ? make_bool(false, fn.pos) : make_int(0, fn.pos);
      out.push_back(std::move(rd));
    }
    for (size_t i = 0; i < fn.params.size(); ++i) {
      auto pd = make_stmt(Stmt::Kind::Decl, fn.pos);
      pd->name = renames.at(fn.params[i].name);
      pd->decl_type = fn.params[i].type;
      pd->expr = args[i];
      out.push_back(std::move(pd));
    }
    for (const auto& s : body) out.push_back(rename_stmt(s, renames, result, exit_label));
    auto el = make_stmt(Stmt::Kind::Label, fn.pos);
    el->name = exit_label;
    out.push_back(std::move(el));
    return result;
  }

  std::string unique_rename(const std::string& base, const std::string& suffix) {
    std::string name = base + suffix;
    while (used_.count(name)) name += "_";
    used_.insert(name);
    return name;
  }

  void collect_renames(const std::vector<StmtPtr>& stmts, const std::string& suffix,
                       std::map<std::string, std::string>& renames) {
    for (const auto& s : stmts) {
      if ((s->kind == Stmt::Kind::Decl || s->kind == Stmt::Kind::Havoc ||
           s->kind == Stmt::Kind::Label) &&
          !renames.count(s->name))
        renames[s->name] = unique_rename(s->name, suffix);
      collect_renames(s->body, suffix, renames);
      collect_renames(s->else_body, suffix, renames);
    }
  }

  StmtPtr rename_stmt(const StmtPtr& s, const std::map<std::string, std::string>& renames,
                      const std::string& result, const std::string& exit_label) {
    if (s->kind == Stmt::Kind::Return) {
      auto block = make_stmt(Stmt::Kind::Block, s->pos);
      if (s->expr && !result.empty()) {
        auto a = make_stmt(Stmt::Kind::Assign, s->pos);
        a->name = result;
        a->expr = expr_rename(s->expr, renames);
        block->body.push_back(std::move(a));
      }
      auto g = make_stmt(Stmt::Kind::Goto, s->pos);
      g->name = exit_label;
      block->body.push_back(std::move(g));
      return block;
    }
    auto c = std::make_shared<Stmt>(*s);
    auto it = renames.find(s->name);
    if (it != renames.end() &&
        (s->kind == Stmt::Kind::Decl || s->kind == Stmt::Kind::Assign ||
         s->kind == Stmt::Kind::Havoc || s->kind == Stmt::Kind::Label ||
         s->kind == Stmt::Kind::Goto))
      c->name = it->second;
    if (s->expr) c->expr = expr_rename(s->expr, renames);
    c->havoc_args.clear();
    for (const auto& a : s->havoc_args) c->havoc_args.push_back(expr_rename(a, renames));
    c->body.clear();
    for (const auto& b : s->body) c->body.push_back(rename_stmt(b, renames, result, exit_label));
    c->else_body.clear();
    for (const auto& b : s->else_body)
      c->else_body.push_back(rename_stmt(b, renames, result, exit_label));
    return c;
  }

  static bool contains_call(const ExprPtr& e) {
    if (!e) return false;
    if (e->kind == Expr::Kind::Call) return true;
    for (const auto& a : e->args)
      if (contains_call(a)) return true;
    return false;
  }

  const Program& prog_;
  bool inline_defined_;
  std::set<std::string> used_;
  std::map<std::string, std::vector<StmtPtr>> processed_;
  int counter_ = 0;
  int inline_counter_ = 0;
};

// Lowers flattened statements to a CFG. Join points after if/else and after
// loops with breaks are explicit skip nodes; while-loop exits without breaks
// flow straight to the continuation.
class Lowerer {
 public:
  explicit Lowerer(std::string name) { cfg_.name = std::move(name); }

  Cfg run(const std::vector<StmtPtr>& stmts, const std::string& ret_var) {
    ret_var_ = ret_var;
    Instruction entry;
    entry.kind = InstrKind::Entry;
    cfg_.entry_id = cfg_.add_node(entry);
    pending_ = {{cfg_.entry_id, EdgeLabel::None}};
    lower_stmts(stmts);
    Instruction exit;
    exit.kind = InstrKind::Exit;
    cfg_.exit_id = cfg_.add_node(exit);
    attach(pending_, cfg_.exit_id);
    attach(returns_, cfg_.exit_id);
    normalize(cfg_);
    return std::move(cfg_);
  }

 private:
  using Pending = std::vector<std::pair<int, EdgeLabel>>;

  struct FlowCtx {
    int continue_target = -1;  // -1 for switch contexts
    Pending breaks;
  };

  void attach(const Pending& pend, int target) {
    for (const auto& [from, label] : pend) cfg_.add_edge(from, target, label);
  }

  int make(Instruction n) {
    int id = cfg_.add_node(std::move(n));
    attach(pending_, id);
    pending_ = {{id, EdgeLabel::None}};
    return id;
  }

  int raw_skip(SourcePos pos) {
    Instruction n;
    n.kind = InstrKind::Skip;
    n.pos = pos;
    return cfg_.add_node(n);
  }

  int label_node(const std::string& name, SourcePos pos) {
    auto it = labels_.find(name);
    if (it != labels_.end()) return it->second;
    int id = raw_skip(pos);
    labels_[name] = id;
    return id;
  }

  void lower_stmts(const std::vector<StmtPtr>& stmts) {
    for (const auto& s : stmts) lower_stmt(s);
  }

  void lower_stmt(const StmtPtr& s) {
    switch (s->kind) {
      case Stmt::Kind::Block:
        lower_stmts(s->body);
        return;
      case Stmt::Kind::Decl: {
        Instruction n;
        n.var = s->name;
        n.pos = s->pos;
        if (s->expr) {
          n.kind = InstrKind::Assign;
          n.expr = s->expr;
        } else {
          n.kind = InstrKind::Havoc;  // uninitialized: value unconstrained
          n.havoc_type = s->decl_type;
        }
        make(std::move(n));
        return;
      }
      case Stmt::Kind::Assign: {
        Instruction n;
        n.kind = InstrKind::Assign;
        n.var = s->name;
        n.expr = s->expr;
        n.pos = s->pos;
        make(std::move(n));
        return;
      }
      case Stmt::Kind::Havoc: {
        Instruction n;
        n.kind = InstrKind::Havoc;
        n.var = s->name;
        n.havoc_args = s->havoc_args;
        n.callee = s->callee;
        n.havoc_type = s->decl_type;
        n.pos = s->pos;
        make(std::move(n));
        return;
      }
      case Stmt::Kind::If: {
        Instruction b;
        b.kind = InstrKind::Branch;
        b.expr = s->expr;
        b.pos = s->pos;
        int bid = make(std::move(b));
        pending_ = {{bid, EdgeLabel::True}};
        lower_stmts(s->body);
        Pending after_then = pending_;
        pending_ = {{bid, EdgeLabel::False}};
        lower_stmts(s->else_body);
        for (const auto& p : after_then) pending_.push_back(p);
        Instruction join;
        join.kind = InstrKind::Skip;
        join.pos = s->pos;
        make(std::move(join));
        return;
      }
      case Stmt::Kind::While: {
        Instruction b;
        b.kind = InstrKind::Branch;
        b.expr = s->expr;
        b.pos = s->pos;
        int bid = make(std::move(b));
        ctx_.push_back({bid, {}});
        pending_ = {{bid, EdgeLabel::True}};
        lower_stmts(s->body);
        attach(pending_, bid);  // back edges
        pending_ = {{bid, EdgeLabel::False}};
        finish_loop(s->pos);
        return;
      }
      case Stmt::Kind::DoWhile: {
        Instruction head;
        head.kind = InstrKind::Skip;
        head.pos = s->pos;
        int head_id = make(std::move(head));
        int cond_id = raw_skip(s->pos);  // continue target
        ctx_.push_back({cond_id, {}});
        lower_stmts(s->body);
        attach(pending_, cond_id);
        pending_ = {{cond_id, EdgeLabel::None}};
        Instruction b;
        b.kind = InstrKind::Branch;
        b.expr = s->expr;
        b.pos = s->pos;
        int bid = make(std::move(b));
        cfg_.add_edge(bid, head_id, EdgeLabel::True);
        pending_ = {{bid, EdgeLabel::False}};
        finish_loop(s->pos);
        return;
      }
      case Stmt::Kind::Switch: {
        lower_switch(s);
        return;
      }
      case Stmt::Kind::Break: {
        for (auto it = ctx_.rbegin(); it != ctx_.rend(); ++it) {
          for (const auto& p : pending_) it->breaks.push_back(p);
          pending_.clear();
          return;
        }
        throw InternalError("break outside loop or switch");
      }
      case Stmt::Kind::Continue: {
        for (auto it = ctx_.rbegin(); it != ctx_.rend(); ++it) {
          if (it->continue_target < 0) continue;
          attach(pending_, it->continue_target);
          pending_.clear();
          return;
        }
        throw InternalError("continue outside loop");
      }
      case Stmt::Kind::Goto: {
        attach(pending_, label_node(s->name, s->pos));
        pending_.clear();
        return;
      }
      case Stmt::Kind::Label: {
        int id = label_node(s->name, s->pos);
        attach(pending_, id);
        pending_ = {{id, EdgeLabel::None}};
        return;
      }
      case Stmt::Kind::Return: {
        if (s->expr) {
          Instruction n;
          n.kind = InstrKind::Assign;
          n.var = ret_var_;
          n.expr = s->expr;
          n.pos = s->pos;
          make(std::move(n));
        }
        for (const auto& p : pending_) returns_.push_back(p);
        pending_.clear();
        return;
      }
      case Stmt::Kind::Assert: {
        Instruction n;
        n.kind = InstrKind::Assert;
        n.expr = s->expr;
        n.pos = s->pos;
        make(std::move(n));
        return;
      }
      case Stmt::Kind::ExprStmt:
        return;  // flattened away
      case Stmt::Kind::Case:
      case Stmt::Kind::Default:
        throw InternalError("stray switch label");
    }
  }

  void finish_loop(SourcePos pos) {
    FlowCtx ctx = ctx_.back();
    ctx_.pop_back();
    if (!ctx.breaks.empty()) {
      for (const auto& p : ctx.breaks) pending_.push_back(p);
      Instruction join;
      join.kind = InstrKind::Skip;
      join.pos = pos;
      make(std::move(join));
    }
  }

  void lower_switch(const StmtPtr& s) {
    std::map<const Stmt*, int> marker_nodes;
    int default_node = -1;
    for (const auto& item : s->body) {
      if (item->kind == Stmt::Kind::Case)
        marker_nodes[item.get()] = raw_skip(item->pos);
      else if (item->kind == Stmt::Kind::Default)
        default_node = marker_nodes[item.get()] = raw_skip(item->pos);
    }

    // Dispatch chain: one equality branch per case, in source order.
    for (const auto& item : s->body) {
      if (item->kind != Stmt::Kind::Case) continue;
      Instruction b;
      b.kind = InstrKind::Branch;
      b.expr = make_binary(BinOp::Eq, s->expr, make_int(item->case_value, item->pos), item->pos);
      b.pos = item->pos;
      int bid = make(std::move(b));
      cfg_.add_edge(bid, marker_nodes[item.get()], EdgeLabel::True);
      pending_ = {{bid, EdgeLabel::False}};
    }
    Pending no_match;
    if (default_node >= 0) {
      attach(pending_, default_node);
    } else {
      no_match = pending_;
    }
    pending_.clear();

    ctx_.push_back({-1, {}});
    for (const auto& item : s->body) {
      if (item->kind == Stmt::Kind::Case || item->kind == Stmt::Kind::Default) {
        int id = marker_nodes[item.get()];
        attach(pending_, id);  // fallthrough from the previous case body
        pending_ = {{id, EdgeLabel::None}};
        continue;
      }
      lower_stmt(item);
    }
    FlowCtx ctx = ctx_.back();
    ctx_.pop_back();
    for (const auto& p : ctx.breaks) pending_.push_back(p);
    for (const auto& p : no_match) pending_.push_back(p);
    Instruction join;
    join.kind = InstrKind::Skip;
    join.pos = s->pos;
    make(std::move(join));
  }

  Cfg cfg_;
  Pending pending_;
  Pending returns_;
  std::vector<FlowCtx> ctx_;
  std::map<std::string, int> labels_;
  std::string ret_var_;
};

}  // namespace detail

// Lowers one typechecked function. Calls to body-less externs become havoc
// instructions; calls to defined functions must have been inlined already.
inline Cfg build_cfg(const Program& prog, const FunctionDecl& fn) {
  if (!fn.body) throw InternalError("cannot build CFG for extern function " + fn.name);
  detail::CallFlattener flattener(prog, false);
  auto stmts = flattener.flatten_body(fn.name, *fn.body);
  return detail::Lowerer(fn.name).run(stmts, "__" + fn.name + "_ret");
}

// Whole-program CFG: globals first, then main's body with every call to a
// defined function replaced by a renamed copy of its body (bottom-up over the
// call graph, so helper bodies are call-free when spliced).
inline Cfg inline_functions(const Program& prog, const CallGraph& cg) {
  const FunctionDecl* main_fn = prog.find_function("main");
  if (!main_fn || !main_fn->body) throw MissingMainError();
  (void)cg;

  detail::CallFlattener flattener(prog, true);
  auto body = flattener.flatten_body("main", *main_fn->body);

  std::vector<StmtPtr> stmts;
  for (const auto& g : prog.globals) stmts.push_back(g);
  for (const auto& p : main_fn->params) {
    auto d = make_stmt(Stmt::Kind::Decl, main_fn->pos);
    d->decl_type = p.type;
    d->name = p.name;
    stmts.push_back(std::move(d));
  }
  for (auto& s : body) stmts.push_back(std::move(s));
  return detail::Lowerer("main").run(stmts, "__main_ret");
}

inline Cfg inline_functions(const Program& prog) {
  return inline_functions(prog, build_call_graph(prog));
}

}  // namespace cfaforge
