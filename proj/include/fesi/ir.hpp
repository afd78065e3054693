#pragma once

// First compilation pass: A-normal form with control flow resolved into data
// flow. An action becomes a telescope of named bindings that ends in a
// guard, a result value, and one nested effect tree per memory element.
//
// Control flow disappears by construction: both orElse branches are compiled
// and bound unconditionally (hardware evaluates both anyway), aborting is
// represented by a false guard, and clashing writes are kept apart in
// Seq/Branch trees until the linearization pass collapses them.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fesi/lang.hpp"
#include "fesi/sem.hpp"
#include "fesi/typecheck.hpp"
#include "fesi/types.hpp"

namespace fesi {

// Expressions bindable in the telescope: pure source expressions over
// already-bound variables, extended with memory reads. Reads are pure here
// because they consult the pre-step state only.
struct IrExpr {
  enum class Kind { Pure, ReadReg, ReadInput, ReadRegfile };

  Kind kind = Kind::Pure;
  Expr expr;      // Pure payload; ReadRegfile address expression
  MemberRef ref;  // read forms

  static IrExpr pure(Expr e) { return IrExpr{Kind::Pure, std::move(e), {}}; }
  static IrExpr read_reg(MemberRef r) { return IrExpr{Kind::ReadReg, {}, r}; }
  static IrExpr read_input(MemberRef r) { return IrExpr{Kind::ReadInput, {}, r}; }
  static IrExpr read_regfile(MemberRef r, Expr addr) {
    return IrExpr{Kind::ReadRegfile, std::move(addr), r};
  }
};

// Per-element tree of conditional writes. Seq means program order: on a
// clash the first write that fires wins.
struct EffTree {
  enum class Kind { Empty, Write, Branch, Seq };

  Kind kind = Kind::Empty;
  Var data;                 // Write
  std::optional<Var> addr;  // Write, register files only
  Var enable;               // Write
  Var cond;                 // Branch
  std::vector<EffTree> kids;  // Branch: [then, else]; Seq: [first, second]

  static EffTree empty() { return EffTree{}; }
  static EffTree write(Var data, std::optional<Var> addr, Var enable) {
    EffTree t;
    t.kind = Kind::Write;
    t.data = std::move(data);
    t.addr = std::move(addr);
    t.enable = std::move(enable);
    return t;
  }
  static EffTree branch(Var cond, EffTree then_t, EffTree else_t) {
    EffTree t;
    t.kind = Kind::Branch;
    t.cond = std::move(cond);
    t.kids.push_back(std::move(then_t));
    t.kids.push_back(std::move(else_t));
    return t;
  }
  static EffTree seq(EffTree first, EffTree second) {
    EffTree t;
    t.kind = Kind::Seq;
    t.kids.push_back(std::move(first));
    t.kids.push_back(std::move(second));
    return t;
  }
};

struct IrBinding {
  Var var;
  IrExpr expr;
};

struct IrBlock {
  MemEnv env;
  std::vector<IrBinding> bindings;  // binding i defines variable id i
  Var guard;                        // bool: false means the step aborts
  Var value;
  std::vector<EffTree> effects;  // one per element of env
  uint32_t var_limit = 0;        // all variable ids are < var_limit
};

namespace detail {

struct IrCompiler {
  const MemEnv& menv;
  IrBlock block;
  std::unordered_map<uint32_t, Var> subst;  // source variable -> telescope variable

  Var fresh(Ty t) {
    Var v{block.var_limit++, std::move(t)};
    return v;
  }

  Expr subst_expr(const Expr& e) {
    if (e.op == Expr::Op::Var) {
      auto it = subst.find(e.var.id);
      if (it == subst.end()) throw std::logic_error("ir: unbound source variable");
      return e_var(it->second);
    }
    Expr out = e;
    for (auto& k : out.kids) k = subst_expr(k);
    return out;
  }

  // Name an expression, reusing the variable when it already is one.
  Var bind_pure(Expr e) {
    if (e.op == Expr::Op::Var) return e.var;
    Var v = fresh(expr_ty(e));
    block.bindings.push_back({v, IrExpr::pure(std::move(e))});
    return v;
  }

  Var bind_read(IrExpr e, Ty t) {
    Var v = fresh(std::move(t));
    block.bindings.push_back({v, std::move(e)});
    return v;
  }

  Var bind_unit() { return bind_pure(e_unit()); }

  struct Flow {
    Var guard;
    Var value;
    std::vector<EffTree> effects;
  };

  std::vector<EffTree> no_effects() const {
    return std::vector<EffTree>(menv.size());
  }

  static std::vector<EffTree> seq_effects(std::vector<EffTree> a, std::vector<EffTree> b) {
    for (size_t i = 0; i < a.size(); ++i) {
      if (b[i].kind == EffTree::Kind::Empty) continue;
      if (a[i].kind == EffTree::Kind::Empty)
        a[i] = std::move(b[i]);
      else
        a[i] = EffTree::seq(std::move(a[i]), std::move(b[i]));
    }
    return a;
  }

  std::vector<EffTree> branch_effects(const Var& cond, std::vector<EffTree> t,
                                      std::vector<EffTree> f) const {
    std::vector<EffTree> out(menv.size());
    for (size_t i = 0; i < out.size(); ++i) {
      if (t[i].kind == EffTree::Kind::Empty && f[i].kind == EffTree::Kind::Empty) continue;
      out[i] = EffTree::branch(cond, std::move(t[i]), std::move(f[i]));
    }
    return out;
  }

  Flow compile(const Action& a, const Var& guard) {
    using Op = Action::Op;
    switch (a.op) {
      case Op::Return:
        return {guard, bind_pure(subst_expr(a.expr)), no_effects()};
      case Op::Bind: {
        Flow first = compile(a.kids[0], guard);
        subst.emplace(a.binder.id, first.value);
        Flow rest = compile(a.kids[1], first.guard);
        return {rest.guard, rest.value,
                seq_effects(std::move(first.effects), std::move(rest.effects))};
      }
      case Op::Assert: {
        Var g = bind_pure(e_and(e_var(guard), subst_expr(a.expr)));
        return {g, bind_unit(), no_effects()};
      }
      case Op::OrElse: {
        // Both branches restart from the incoming guard: the right branch
        // is alive exactly when the left aborts.
        Flow left = compile(a.kids[0], guard);
        Flow right = compile(a.kids[1], guard);
        Var g = bind_pure(e_or(e_var(left.guard), e_var(right.guard)));
        Var v = bind_pure(e_mux(e_var(left.guard), e_var(left.value), e_var(right.value)));
        return {g, v,
                branch_effects(left.guard, std::move(left.effects), std::move(right.effects))};
      }
      case Op::RegRead:
        return {guard, bind_read(IrExpr::read_reg(a.ref), menv[a.ref.index].ty), no_effects()};
      case Op::InputRead:
        return {guard, bind_read(IrExpr::read_input(a.ref), menv[a.ref.index].ty), no_effects()};
      case Op::RegfileRead:
        return {guard,
                bind_read(IrExpr::read_regfile(a.ref, subst_expr(a.expr)), menv[a.ref.index].ty),
                no_effects()};
      case Op::RegWrite: {
        Var data = bind_pure(subst_expr(a.expr));
        auto eff = no_effects();
        eff[a.ref.index] = EffTree::write(data, std::nullopt, guard);
        return {guard, bind_unit(), std::move(eff)};
      }
      case Op::RegfileWrite: {
        Var addr = bind_pure(subst_expr(a.expr));
        Var data = bind_pure(subst_expr(a.expr2));
        auto eff = no_effects();
        eff[a.ref.index] = EffTree::write(data, addr, guard);
        return {guard, bind_unit(), std::move(eff)};
      }
    }
    throw std::logic_error("ir: unknown action node");
  }
};

}  // namespace detail

// Pass 1. Precondition: a typechecks against env.
inline IrBlock compile_to_ir(const MemEnv& env, const Action& a) {
  detail::IrCompiler c{env, {}, {}};
  c.block.env = env;
  Var g0 = c.bind_pure(e_bool(true));
  detail::IrCompiler::Flow flow = c.compile(a, g0);
  c.block.guard = flow.guard;
  c.block.value = flow.value;
  c.block.effects = std::move(flow.effects);
  return std::move(c.block);
}

// Fold a nested effect tree down to the single write (if any) that fires
// under the given variable values: a write fires iff its enable is true, a
// branch selects by its condition, a sequence prefers the first side that
// fires.
inline std::optional<Delta::Pending> fold_effect_tree(const Env& vals, const EffTree& t) {
  switch (t.kind) {
    case EffTree::Kind::Empty:
      return std::nullopt;
    case EffTree::Kind::Write: {
      if (!env_get(vals, t.enable).b) return std::nullopt;
      std::optional<uint64_t> addr;
      if (t.addr) addr = env_get(vals, *t.addr).bits;
      return Delta::Pending{addr, env_get(vals, t.data)};
    }
    case EffTree::Kind::Branch:
      return env_get(vals, t.cond).b ? fold_effect_tree(vals, t.kids[0])
                                     : fold_effect_tree(vals, t.kids[1]);
    case EffTree::Kind::Seq: {
      auto first = fold_effect_tree(vals, t.kids[0]);
      return first ? first : fold_effect_tree(vals, t.kids[1]);
    }
  }
  return std::nullopt;
}

// Per-pass differential oracle: evaluates the telescope in order, then
// either holds the state (guard false) or commits the folded effects.
inline std::optional<std::pair<Value, MemState>> eval_ir(const MemState& gamma,
                                                         const IrBlock& b) {
  Env vals(b.var_limit);
  for (const auto& bind : b.bindings) {
    Value v;
    switch (bind.expr.kind) {
      case IrExpr::Kind::Pure:
        v = eval_expr(vals, bind.expr.expr);
        break;
      case IrExpr::Kind::ReadReg:
      case IrExpr::Kind::ReadInput:
        v = gamma.cells[bind.expr.ref.index].one;
        break;
      case IrExpr::Kind::ReadRegfile: {
        Value addr = eval_expr(vals, bind.expr.expr);
        v = gamma.cells[bind.expr.ref.index].arr[addr.bits];
        break;
      }
    }
    env_set(vals, bind.var, std::move(v));
  }
  if (!env_get(vals, b.guard).b) return std::nullopt;
  Delta d = empty_delta(b.env);
  for (size_t i = 0; i < b.effects.size(); ++i) {
    auto w = fold_effect_tree(vals, b.effects[i]);
    if (w) d = delta_insert(b.env, std::move(d), i, w->addr, std::move(w->v));
  }
  return std::make_pair(env_get(vals, b.value), commit(b.env, gamma, d));
}

namespace detail {

inline bool expr_vars_bound(const Expr& e, const std::vector<bool>& bound) {
  if (e.op == Expr::Op::Var) return e.var.id < bound.size() && bound[e.var.id];
  for (const auto& k : e.kids)
    if (!expr_vars_bound(k, bound)) return false;
  return true;
}

inline bool tree_vars_bound(const EffTree& t, const std::vector<bool>& bound) {
  auto ok = [&](const Var& v) { return v.id < bound.size() && bound[v.id]; };
  switch (t.kind) {
    case EffTree::Kind::Empty: return true;
    case EffTree::Kind::Write:
      return ok(t.data) && ok(t.enable) && (!t.addr || ok(*t.addr));
    case EffTree::Kind::Branch:
      return ok(t.cond) && tree_vars_bound(t.kids[0], bound) && tree_vars_bound(t.kids[1], bound);
    case EffTree::Kind::Seq:
      return tree_vars_bound(t.kids[0], bound) && tree_vars_bound(t.kids[1], bound);
  }
  return false;
}

}  // namespace detail

// Structural sanity: every binding defines a new variable and uses only
// earlier ones; guard, value and effects reference bound variables; the
// guard is a bool.
inline bool ir_well_scoped(const IrBlock& b) {
  std::vector<bool> bound(b.var_limit, false);
  for (const auto& bind : b.bindings) {
    if (bind.var.id >= b.var_limit || bound[bind.var.id]) return false;
    switch (bind.expr.kind) {
      case IrExpr::Kind::Pure:
        if (!detail::expr_vars_bound(bind.expr.expr, bound)) return false;
        break;
      case IrExpr::Kind::ReadRegfile:
        if (bind.expr.ref.index >= b.env.size()) return false;
        if (!detail::expr_vars_bound(bind.expr.expr, bound)) return false;
        break;
      case IrExpr::Kind::ReadReg:
      case IrExpr::Kind::ReadInput:
        if (bind.expr.ref.index >= b.env.size()) return false;
        break;
    }
    bound[bind.var.id] = true;
  }
  auto ok = [&](const Var& v) { return v.id < bound.size() && bound[v.id]; };
  if (!ok(b.guard) || !ok(b.value)) return false;
  if (b.guard.ty != Ty::boolean()) return false;
  if (b.effects.size() != b.env.size()) return false;
  for (const auto& t : b.effects)
    if (!detail::tree_vars_bound(t, bound)) return false;
  return true;
}

namespace detail {

inline std::string efftree_str(const EffTree& t) {
  switch (t.kind) {
    case EffTree::Kind::Empty: return "empty";
    case EffTree::Kind::Write: {
      std::string s = "write data=x" + std::to_string(t.data.id);
      if (t.addr) s += " addr=x" + std::to_string(t.addr->id);
      s += " en=x" + std::to_string(t.enable.id);
      return s;
    }
    case EffTree::Kind::Branch:
      return "branch x" + std::to_string(t.cond.id) + " (" + efftree_str(t.kids[0]) + ") (" +
             efftree_str(t.kids[1]) + ")";
    case EffTree::Kind::Seq:
      return "seq (" + efftree_str(t.kids[0]) + ") (" + efftree_str(t.kids[1]) + ")";
  }
  return "?";
}

}  // namespace detail

inline std::string to_string(const IrBlock& b) {
  std::string out = "ir block over [";
  for (size_t i = 0; i < b.env.size(); ++i) {
    if (i) out += "; ";
    out += to_string(b.env[i]);
  }
  out += "]\n";
  for (const auto& bind : b.bindings) {
    out += "  x" + std::to_string(bind.var.id) + " : " + to_string(bind.var.ty) + " := ";
    switch (bind.expr.kind) {
      case IrExpr::Kind::Pure: out += detail::expr_str(bind.expr.expr); break;
      case IrExpr::Kind::ReadReg: out += "!reg" + std::to_string(bind.expr.ref.index); break;
      case IrExpr::Kind::ReadInput: out += "!in" + std::to_string(bind.expr.ref.index); break;
      case IrExpr::Kind::ReadRegfile:
        out += "read rf" + std::to_string(bind.expr.ref.index) + "[" +
               detail::expr_str(bind.expr.expr) + "]";
        break;
    }
    out += "\n";
  }
  out += "  guard x" + std::to_string(b.guard.id) + " value x" + std::to_string(b.value.id) + "\n";
  for (size_t i = 0; i < b.effects.size(); ++i)
    out += "  effects[" + std::to_string(i) + "]: " + detail::efftree_str(b.effects[i]) + "\n";
  return out;
}

}  // namespace fesi
