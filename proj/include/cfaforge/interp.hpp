#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cfaforge/cfg.hpp"

namespace cfaforge {

// Supplies values for havoc instructions during concrete execution.
class HavocSource {
 public:
  virtual ~HavocSource() = default;
  virtual int32_t next(int instr_id, int visit) = 0;
};

// Replays a fixed list of values in program order; 0 once exhausted.
class SequenceHavoc : public HavocSource {
 public:
  SequenceHavoc() = default;
  explicit SequenceHavoc(std::vector<int32_t> values) : values_(std::move(values)) {}

  int32_t next(int, int) override {
    if (pos_ >= values_.size()) return 0;
    return values_[pos_++];
  }

  size_t consumed() const { return pos_; }

 private:
  std::vector<int32_t> values_;
  size_t pos_ = 0;
};

// Deterministic pseudo-random values keyed by (seed, instruction id, visit
// count). Instruction ids are stable across slicing and optimization, so two
// program variants see identical values at the instructions they share.
class KeyedHavoc : public HavocSource {
 public:
  explicit KeyedHavoc(uint64_t seed, int32_t magnitude = 64)
      : seed_(seed), magnitude_(magnitude) {}

  int32_t next(int instr_id, int visit) override {
    uint64_t x = seed_ ^ (uint64_t(uint32_t(instr_id)) << 32) ^ uint64_t(uint32_t(visit));
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    x ^= x >> 31;
    // Small signed range: loop bounds in test programs stay reachable.
    return int32_t(x % uint64_t(2 * magnitude_ + 1)) - magnitude_;
  }

 private:
  uint64_t seed_;
  int32_t magnitude_;
};

enum class RunStatus {
  Exited,        // reached the exit node
  AssertFailed,  // an assert condition evaluated to false
  Blocked,       // an assume condition evaluated to false
  Trapped,       // runtime fault (division by zero)
  StepLimit,     // step budget exhausted
};

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Exited: return "exited";
    case RunStatus::AssertFailed: return "assert-failed";
    case RunStatus::Blocked: return "blocked";
    case RunStatus::Trapped: return "trapped";
    case RunStatus::StepLimit: return "step-limit";
  }
  return "?";
}

struct RunResult {
  RunStatus status = RunStatus::Exited;
  long steps = 0;
  int stop_node = -1;  // node where execution ended (assert/trap/limit)
  std::map<std::string, int32_t> vars;
  std::string trap_message;
};

namespace detail {

inline int32_t wrap32(int64_t v) { return int32_t(uint32_t(uint64_t(v))); }

}  // namespace detail

// Evaluates an expression over 32-bit two's-complement integers with C
// semantics: wraparound arithmetic, truncating division, and nonzero = true
// for logical operators. Reads of unknown variables yield 0. Division or
// modulo by zero throws Trap.
struct Trap {
  std::string message;
};

inline int32_t eval_expr(const ExprPtr& e, const std::map<std::string, int32_t>& vars) {
  switch (e->kind) {
    case Expr::Kind::IntLit:
      return detail::wrap32(e->int_value);
    case Expr::Kind::BoolLit:
      return e->bool_value ? 1 : 0;
    case Expr::Kind::Var: {
      auto it = vars.find(e->name);
      return it == vars.end() ? 0 : it->second;
    }
    case Expr::Kind::Unary: {
      int32_t v = eval_expr(e->args[0], vars);
      if (e->un_op == UnOp::Neg) return detail::wrap32(-int64_t(v));
      return v == 0 ? 1 : 0;
    }
    case Expr::Kind::Binary: {
      if (e->bin_op == BinOp::And)
        return eval_expr(e->args[0], vars) != 0 && eval_expr(e->args[1], vars) != 0 ? 1 : 0;
      if (e->bin_op == BinOp::Or)
        return eval_expr(e->args[0], vars) != 0 || eval_expr(e->args[1], vars) != 0 ? 1 : 0;
      int64_t a = eval_expr(e->args[0], vars);
      int64_t b = eval_expr(e->args[1], vars);
      switch (e->bin_op) {
        case BinOp::Add: return detail::wrap32(a + b);
        case BinOp::Sub: return detail::wrap32(a - b);
        case BinOp::Mul: return detail::wrap32(a * b);
        case BinOp::Div:
          if (b == 0) throw Trap{"division by zero"};
          if (a == INT32_MIN && b == -1) return INT32_MIN;
          return detail::wrap32(a / b);
        case BinOp::Mod:
          if (b == 0) throw Trap{"modulo by zero"};
          if (a == INT32_MIN && b == -1) return 0;
          return detail::wrap32(a % b);
        case BinOp::Lt: return a < b ? 1 : 0;
        case BinOp::Le: return a <= b ? 1 : 0;
        case BinOp::Gt: return a > b ? 1 : 0;
        case BinOp::Ge: return a >= b ? 1 : 0;
        case BinOp::Eq: return a == b ? 1 : 0;
        case BinOp::Ne: return a != b ? 1 : 0;
        default: throw Trap{"unexpected operator"};
      }
    }
    case Expr::Kind::Call:
      throw Trap{"call in CFG expression"};
  }
  throw Trap{"bad expression"};
}

// Small-step execution over a CFG. The optional observer runs before each
// instruction executes, with the pre-state.
class Interpreter {
 public:
  using Observer = std::function<void(const Instruction&, const std::map<std::string, int32_t>&)>;

  Interpreter(const Cfg& cfg, HavocSource& havoc) : cfg_(cfg), havoc_(havoc) {}

  void set_observer(Observer obs) { observer_ = std::move(obs); }

  RunResult run(long max_steps = 200000) {
    RunResult r;
    int at = cfg_.entry_id;
    while (true) {
      if (r.steps >= max_steps) {
        r.status = RunStatus::StepLimit;
        r.stop_node = at;
        break;
      }
      const Instruction& n = cfg_.node(at);
      if (observer_) observer_(n, vars_);
      ++r.steps;
      try {
        if (n.kind == InstrKind::Exit) {
          r.status = RunStatus::Exited;
          r.stop_node = at;
          break;
        }
        if (n.kind == InstrKind::Assert && eval_expr(n.expr, vars_) == 0) {
          r.status = RunStatus::AssertFailed;
          r.stop_node = at;
          break;
        }
        if (n.kind == InstrKind::Assume && eval_expr(n.expr, vars_) == 0) {
          r.status = RunStatus::Blocked;
          r.stop_node = at;
          break;
        }
        at = exec(n);
      } catch (const Trap& t) {
        r.status = RunStatus::Trapped;
        r.stop_node = at;
        r.trap_message = t.message;
        break;
      }
    }
    r.vars = vars_;
    return r;
  }

 private:
  int exec(const Instruction& n) {
    switch (n.kind) {
      case InstrKind::Assign:
        vars_[n.var] = eval_expr(n.expr, vars_);
        break;
      case InstrKind::Havoc: {
        for (const auto& a : n.havoc_args) eval_expr(a, vars_);  // may trap
        int32_t v = havoc_.next(n.id, visits_[n.id]++);
        vars_[n.var] = n.havoc_type == Type::Bool ? (v & 1) : v;
        break;
      }
      case InstrKind::Branch:
        return branch_target(cfg_, n.id, eval_expr(n.expr, vars_) != 0);
      case InstrKind::AbstractPredicate:
        throw Trap{"abstract predicate in concrete execution"};
      default:
        break;  // entry, skip, assume(true-case), assert(true-case)
    }
    const auto& out = cfg_.out(n.id);
    if (out.size() != 1) throw Trap{"node without unique successor"};
    return out[0].to;
  }

  const Cfg& cfg_;
  HavocSource& havoc_;
  Observer observer_;
  std::map<std::string, int32_t> vars_;
  std::map<int, int> visits_;
};

inline RunResult run_cfg(const Cfg& cfg, HavocSource& havoc, long max_steps = 200000) {
  return Interpreter(cfg, havoc).run(max_steps);
}

}  // namespace cfaforge
