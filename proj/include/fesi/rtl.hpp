#pragma once

// The target language: three-address telescopes ending in a guard, a value,
// and at most one guarded write per memory element. Also holds passes 2 and
// 3: effect linearization (the merge combinator) and three-address
// conversion of the bound expressions.

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fesi/ir.hpp"
#include "fesi/lang.hpp"
#include "fesi/sem.hpp"
#include "fesi/types.hpp"

namespace fesi {

// Three-address expressions: every operand is a variable; constants are
// their own bindings.
struct RtlExpr {
  enum class Op {
    Var,
    ConstUnit,
    ConstBool,
    ConstWord,
    Input,        // ref
    ReadReg,      // ref
    ReadRegfile,  // ref, args: [addr]
    Mux,          // args: [cond, then, else]
    And,
    Or,
    Xor,
    Not,
    Add,
    Sub,
    Eq,
    Le,
    Lt,
    MkTuple,
    Proj,  // args: [tuple]; proj_index
  };

  Op op = Op::ConstUnit;
  std::vector<Var> args;
  bool bval = false;
  int width = 0;
  uint64_t bits = 0;
  size_t proj_index = 0;
  MemberRef ref;
};

struct RtlWrite {
  Var data;
  std::optional<Var> addr;  // register files only
  Var enable;               // bool
};

struct RtlBinding {
  Var var;
  RtlExpr expr;
};

// One write slot per element makes the one-write-per-element invariant
// structural: there is nowhere to put a second write.
struct RtlBlock {
  MemEnv env;
  std::vector<RtlBinding> bindings;
  Var guard;
  Var value;
  std::vector<std::optional<RtlWrite>> writes;  // one slot per element
  uint32_t var_limit = 0;
};

// Appends fresh bindings to a block under construction. Exposed so the merge
// and linearize combinators can be exercised directly in tests.
class RtlEmitter {
 public:
  explicit RtlEmitter(RtlBlock& block) : block_(block) {}

  Var bind(Ty ty, RtlExpr e) {
    Var v{block_.var_limit++, std::move(ty)};
    block_.bindings.push_back({v, std::move(e)});
    return v;
  }

  Var const_bool(bool b) {
    RtlExpr e;
    e.op = RtlExpr::Op::ConstBool;
    e.bval = b;
    return bind(Ty::boolean(), std::move(e));
  }

  // Shared constant-false wire, created on first use; missing branches of an
  // effect tree mux their enable against it.
  Var false_wire() {
    if (!false_wire_) false_wire_ = const_bool(false);
    return *false_wire_;
  }

  Var mux(const Var& cond, const Var& t, const Var& f) {
    RtlExpr e;
    e.op = RtlExpr::Op::Mux;
    e.args = {cond, t, f};
    return bind(t.ty, std::move(e));
  }

  Var orb(const Var& a, const Var& b) {
    RtlExpr e;
    e.op = RtlExpr::Op::Or;
    e.args = {a, b};
    return bind(Ty::boolean(), std::move(e));
  }

 private:
  RtlBlock& block_;
  std::optional<Var> false_wire_;
};

// Collapse two candidate writes (a before b in program order) into one:
// enable is the disjunction, data and address are selected by a's enable, so
// a wins whenever it fires.
inline RtlWrite merge_writes(RtlEmitter& em, const RtlWrite& a, const RtlWrite& b) {
  RtlWrite out;
  out.enable = em.orb(a.enable, b.enable);
  out.data = em.mux(a.enable, a.data, b.data);
  if (a.addr.has_value() != b.addr.has_value())
    throw std::logic_error("merge_writes: register/register-file kind mismatch");
  if (a.addr) out.addr = em.mux(a.enable, *a.addr, *b.addr);
  return out;
}

// Flatten a nested effect tree into at most one write. resolve maps the
// tree's variables into the block under construction.
inline std::optional<RtlWrite> linearize_effects(RtlEmitter& em, const EffTree& t,
                                                 const std::function<Var(const Var&)>& resolve) {
  switch (t.kind) {
    case EffTree::Kind::Empty:
      return std::nullopt;
    case EffTree::Kind::Write: {
      RtlWrite w;
      w.data = resolve(t.data);
      if (t.addr) w.addr = resolve(*t.addr);
      w.enable = resolve(t.enable);
      return w;
    }
    case EffTree::Kind::Seq: {
      auto first = linearize_effects(em, t.kids[0], resolve);
      auto second = linearize_effects(em, t.kids[1], resolve);
      if (!first) return second;
      if (!second) return first;
      return merge_writes(em, *first, *second);
    }
    case EffTree::Kind::Branch: {
      Var cond = resolve(t.cond);
      auto then_w = linearize_effects(em, t.kids[0], resolve);
      auto else_w = linearize_effects(em, t.kids[1], resolve);
      if (!then_w && !else_w) return std::nullopt;
      RtlWrite out;
      if (then_w && else_w) {
        out.enable = em.mux(cond, then_w->enable, else_w->enable);
        out.data = em.mux(cond, then_w->data, else_w->data);
        if (then_w->addr) out.addr = em.mux(cond, *then_w->addr, *else_w->addr);
      } else if (then_w) {
        out.enable = em.mux(cond, then_w->enable, em.false_wire());
        out.data = then_w->data;
        out.addr = then_w->addr;
      } else {
        out.enable = em.mux(cond, em.false_wire(), else_w->enable);
        out.data = else_w->data;
        out.addr = else_w->addr;
      }
      return out;
    }
  }
  return std::nullopt;
}

namespace detail {

struct RtlCompiler {
  explicit RtlCompiler(const IrBlock& input) : in(input) {}

  const IrBlock& in;
  RtlBlock out;
  RtlEmitter em{out};
  std::unordered_map<uint32_t, Var> map;  // ir variable -> rtl variable

  Var resolve(const Var& v) const {
    auto it = map.find(v.id);
    if (it == map.end()) throw std::logic_error("rtl: unbound ir variable");
    return it->second;
  }

  // Hoist every compound operand of a pure expression into its own binding.
  Var lower_expr(const Expr& e) {
    using Op = Expr::Op;
    if (e.op == Op::Var) return resolve(e.var);
    RtlExpr r;
    switch (e.op) {
      case Op::ConstUnit: r.op = RtlExpr::Op::ConstUnit; break;
      case Op::ConstBool:
        r.op = RtlExpr::Op::ConstBool;
        r.bval = e.bval;
        break;
      case Op::ConstWord:
        r.op = RtlExpr::Op::ConstWord;
        r.width = e.width;
        r.bits = e.bits;
        break;
      case Op::And: r.op = RtlExpr::Op::And; break;
      case Op::Or: r.op = RtlExpr::Op::Or; break;
      case Op::Xor: r.op = RtlExpr::Op::Xor; break;
      case Op::Not: r.op = RtlExpr::Op::Not; break;
      case Op::Add: r.op = RtlExpr::Op::Add; break;
      case Op::Sub: r.op = RtlExpr::Op::Sub; break;
      case Op::Eq: r.op = RtlExpr::Op::Eq; break;
      case Op::Le: r.op = RtlExpr::Op::Le; break;
      case Op::Lt: r.op = RtlExpr::Op::Lt; break;
      case Op::Mux: r.op = RtlExpr::Op::Mux; break;
      case Op::MkTuple: r.op = RtlExpr::Op::MkTuple; break;
      case Op::Proj:
        r.op = RtlExpr::Op::Proj;
        r.proj_index = e.proj_index;
        break;
      case Op::Var: break;  // handled above
    }
    Ty ty = lowered_ty(e);
    for (const auto& k : e.kids) r.args.push_back(lower_expr(k));
    return em.bind(std::move(ty), std::move(r));
  }

  // expr_ty over an expression whose variables are ir variables; their
  // annotations carry the types.
  static Ty lowered_ty(const Expr& e) { return expr_ty(e); }

  void run() {
    out.env = in.env;
    for (const auto& bind : in.bindings) {
      Var lowered;
      switch (bind.expr.kind) {
        case IrExpr::Kind::Pure:
          lowered = lower_expr(bind.expr.expr);
          break;
        case IrExpr::Kind::ReadReg: {
          RtlExpr r;
          r.op = RtlExpr::Op::ReadReg;
          r.ref = bind.expr.ref;
          lowered = em.bind(bind.var.ty, std::move(r));
          break;
        }
        case IrExpr::Kind::ReadInput: {
          RtlExpr r;
          r.op = RtlExpr::Op::Input;
          r.ref = bind.expr.ref;
          lowered = em.bind(bind.var.ty, std::move(r));
          break;
        }
        case IrExpr::Kind::ReadRegfile: {
          Var addr = lower_expr(bind.expr.expr);
          RtlExpr r;
          r.op = RtlExpr::Op::ReadRegfile;
          r.ref = bind.expr.ref;
          r.args = {addr};
          lowered = em.bind(bind.var.ty, std::move(r));
          break;
        }
      }
      map.emplace(bind.var.id, lowered);
    }
    out.guard = resolve(in.guard);
    out.value = resolve(in.value);
    out.writes.resize(in.env.size());
    auto res = [&](const Var& v) { return resolve(v); };
    for (size_t i = 0; i < in.effects.size(); ++i)
      out.writes[i] = linearize_effects(em, in.effects[i], res);
  }
};

}  // namespace detail

// Passes 2 and 3: three-address conversion plus effect linearization.
inline RtlBlock compile_to_rtl(const IrBlock& b) {
  detail::RtlCompiler c(b);
  c.run();
  return std::move(c.out);
}

// Evaluate one three-address expression against bound values and the
// pre-step state.
inline Value eval_rtl_expr(const Env& vals, const MemState& gamma, const RtlExpr& e) {
  using Op = RtlExpr::Op;
  auto arg = [&](size_t i) -> const Value& { return env_get(vals, e.args[i]); };
  switch (e.op) {
    case Op::Var: return arg(0);
    case Op::ConstUnit: return Value::unit();
    case Op::ConstBool: return Value::boolean(e.bval);
    case Op::ConstWord: return Value::word(e.width, e.bits);
    case Op::Input:
    case Op::ReadReg: return gamma.cells[e.ref.index].one;
    case Op::ReadRegfile: return gamma.cells[e.ref.index].arr[arg(0).bits];
    case Op::Mux: return arg(0).b ? arg(1) : arg(2);
    case Op::And: return Value::boolean(arg(0).b && arg(1).b);
    case Op::Or: return Value::boolean(arg(0).b || arg(1).b);
    case Op::Xor: return Value::boolean(arg(0).b != arg(1).b);
    case Op::Not: return Value::boolean(!arg(0).b);
    case Op::Add: return Value::word(arg(0).width, arg(0).bits + arg(1).bits);
    case Op::Sub: return Value::word(arg(0).width, arg(0).bits - arg(1).bits);
    case Op::Eq: return Value::boolean(arg(0).bits == arg(1).bits);
    case Op::Le: return Value::boolean(arg(0).bits <= arg(1).bits);
    case Op::Lt: return Value::boolean(arg(0).bits < arg(1).bits);
    case Op::MkTuple: {
      std::vector<Value> elems;
      elems.reserve(e.args.size());
      for (size_t i = 0; i < e.args.size(); ++i) elems.push_back(arg(i));
      return Value::tuple(std::move(elems));
    }
    case Op::Proj: return arg(0).elems[e.proj_index];
  }
  throw std::logic_error("eval_rtl_expr: unknown node");
}

// Next-state function of a block: evaluate the telescope in order; a false
// guard holds every element, otherwise each write whose enable is true is
// committed.
inline std::optional<std::pair<Value, MemState>> rtl_next(const MemState& gamma,
                                                          const RtlBlock& b) {
  Env vals(b.var_limit);
  for (const auto& bind : b.bindings)
    env_set(vals, bind.var, eval_rtl_expr(vals, gamma, bind.expr));
  if (!env_get(vals, b.guard).b) return std::nullopt;
  Delta d = empty_delta(b.env);
  for (size_t i = 0; i < b.writes.size(); ++i) {
    if (!b.writes[i]) continue;
    const RtlWrite& w = *b.writes[i];
    if (!env_get(vals, w.enable).b) continue;
    std::optional<uint64_t> addr;
    if (w.addr) addr = env_get(vals, *w.addr).bits;
    d = delta_insert(b.env, std::move(d), i, addr, env_get(vals, w.data));
  }
  return std::make_pair(env_get(vals, b.value), commit(b.env, gamma, d));
}

// Structural invariants: well-scoped telescope, bool guard/enables, writes
// type-consistent with their elements, inputs never written. Three-address
// form and one-write-per-element hold by construction of the types.
inline bool rtl_well_formed(const RtlBlock& b) {
  std::vector<bool> bound(b.var_limit, false);
  auto ok = [&](const Var& v) { return v.id < bound.size() && bound[v.id]; };
  for (const auto& bind : b.bindings) {
    if (bind.var.id >= b.var_limit || bound[bind.var.id]) return false;
    for (const auto& a : bind.expr.args)
      if (!ok(a)) return false;
    switch (bind.expr.op) {
      case RtlExpr::Op::Input:
        if (bind.expr.ref.index >= b.env.size() ||
            b.env[bind.expr.ref.index].kind != Mem::Kind::Input)
          return false;
        break;
      case RtlExpr::Op::ReadReg:
        if (bind.expr.ref.index >= b.env.size() ||
            b.env[bind.expr.ref.index].kind != Mem::Kind::Reg)
          return false;
        break;
      case RtlExpr::Op::ReadRegfile:
        if (bind.expr.ref.index >= b.env.size() ||
            b.env[bind.expr.ref.index].kind != Mem::Kind::Regfile)
          return false;
        break;
      default: break;
    }
    bound[bind.var.id] = true;
  }
  if (!ok(b.guard) || b.guard.ty != Ty::boolean() || !ok(b.value)) return false;
  if (b.writes.size() != b.env.size()) return false;
  for (size_t i = 0; i < b.writes.size(); ++i) {
    if (!b.writes[i]) continue;
    const RtlWrite& w = *b.writes[i];
    const Mem& m = b.env[i];
    if (m.kind == Mem::Kind::Input) return false;
    if (!ok(w.data) || !ok(w.enable) || w.enable.ty != Ty::boolean()) return false;
    if (w.data.ty != m.ty) return false;
    if (m.kind == Mem::Kind::Regfile) {
      if (!w.addr || !ok(*w.addr) || w.addr->ty != Ty::word(m.addr_width)) return false;
    } else if (w.addr) {
      return false;
    }
  }
  return true;
}

inline size_t binding_count(const RtlBlock& b) { return b.bindings.size(); }

inline std::string to_string(const RtlExpr& e) {
  using Op = RtlExpr::Op;
  auto x = [](const Var& v) { return "x" + std::to_string(v.id); };
  auto bin = [&](const char* name) {
    return std::string("(") + name + " " + x(e.args[0]) + " " + x(e.args[1]) + ")";
  };
  switch (e.op) {
    case Op::Var: return x(e.args[0]);
    case Op::ConstUnit: return "()";
    case Op::ConstBool: return e.bval ? "true" : "false";
    case Op::ConstWord: return std::to_string(e.bits) + ":" + std::to_string(e.width);
    case Op::Input: return "!in" + std::to_string(e.ref.index);
    case Op::ReadReg: return "!reg" + std::to_string(e.ref.index);
    case Op::ReadRegfile:
      return "read rf" + std::to_string(e.ref.index) + "[" + x(e.args[0]) + "]";
    case Op::Mux: return "(mux " + x(e.args[0]) + " " + x(e.args[1]) + " " + x(e.args[2]) + ")";
    case Op::And: return bin("and");
    case Op::Or: return bin("or");
    case Op::Xor: return bin("xor");
    case Op::Not: return "(not " + x(e.args[0]) + ")";
    case Op::Add: return bin("add");
    case Op::Sub: return bin("sub");
    case Op::Eq: return bin("eq");
    case Op::Le: return bin("le");
    case Op::Lt: return bin("lt");
    case Op::MkTuple: {
      std::string s = "(tuple";
      for (const auto& a : e.args) s += " " + x(a);
      return s + ")";
    }
    case Op::Proj: return "(proj " + std::to_string(e.proj_index) + " " + x(e.args[0]) + ")";
  }
  return "?";
}

inline std::string to_string(const RtlBlock& b) {
  std::string out = "rtl block over [";
  for (size_t i = 0; i < b.env.size(); ++i) {
    if (i) out += "; ";
    out += to_string(b.env[i]);
  }
  out += "]\n";
  for (const auto& bind : b.bindings)
    out += "  x" + std::to_string(bind.var.id) + " : " + to_string(bind.var.ty) + " := " +
           to_string(bind.expr) + "\n";
  out += "  guard x" + std::to_string(b.guard.id) + " value x" + std::to_string(b.value.id) + "\n";
  for (size_t i = 0; i < b.writes.size(); ++i) {
    out += "  write[" + std::to_string(i) + "]: ";
    if (!b.writes[i]) {
      out += "none\n";
      continue;
    }
    const RtlWrite& w = *b.writes[i];
    out += "data=x" + std::to_string(w.data.id);
    if (w.addr) out += " addr=x" + std::to_string(w.addr->id);
    out += " en=x" + std::to_string(w.enable.id) + "\n";
  }
  return out;
}

}  // namespace fesi
