#pragma once

// Reference interpreter for source actions: the big-step rules and the
// top-level next-state function. Every compiler pass is judged against this
// module, so it is written for clarity over speed.
//
// Two deliberate peculiarities of the semantics live here:
//   - reads-before-writes: reads consult the pre-step state only, never the
//     pending updates;
//   - first-write-wins: on clashing writes to one element, the earliest in
//     program order is committed (delta_insert ignores the rest).

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fesi/lang.hpp"
#include "fesi/types.hpp"

namespace fesi {

// Variable environment, indexed by variable id. Entries are written once
// (binders are unique), so in-place extension behaves persistently and
// orElse branches cannot observe each other's bindings.
using Env = std::vector<std::optional<Value>>;

inline void env_set(Env& env, const Var& x, Value v) {
  if (env.size() <= x.id) env.resize(x.id + 1);
  env[x.id] = std::move(v);
}

inline const Value& env_get(const Env& env, const Var& x) {
  if (x.id >= env.size() || !env[x.id]) throw std::logic_error("unbound variable in eval");
  return *env[x.id];
}

// Absent means the action aborted; the held state is the caller's concern.
using StepResult = std::optional<std::pair<Value, Delta>>;

// Standard evaluation of a side-effect-free expression. Word add/sub are
// modular in 2^width; comparisons are unsigned.
inline Value eval_expr(const Env& env, const Expr& e) {
  using Op = Expr::Op;
  switch (e.op) {
    case Op::Var: return env_get(env, e.var);
    case Op::ConstUnit: return Value::unit();
    case Op::ConstBool: return Value::boolean(e.bval);
    case Op::ConstWord: return Value::word(e.width, e.bits);
    case Op::And:
      return Value::boolean(eval_expr(env, e.kids[0]).b && eval_expr(env, e.kids[1]).b);
    case Op::Or:
      return Value::boolean(eval_expr(env, e.kids[0]).b || eval_expr(env, e.kids[1]).b);
    case Op::Xor:
      return Value::boolean(eval_expr(env, e.kids[0]).b != eval_expr(env, e.kids[1]).b);
    case Op::Not: return Value::boolean(!eval_expr(env, e.kids[0]).b);
    case Op::Add: {
      Value a = eval_expr(env, e.kids[0]);
      Value b = eval_expr(env, e.kids[1]);
      return Value::word(a.width, a.bits + b.bits);
    }
    case Op::Sub: {
      Value a = eval_expr(env, e.kids[0]);
      Value b = eval_expr(env, e.kids[1]);
      return Value::word(a.width, a.bits - b.bits);
    }
    case Op::Eq: {
      Value a = eval_expr(env, e.kids[0]);
      return Value::boolean(a.bits == eval_expr(env, e.kids[1]).bits);
    }
    case Op::Le: {
      Value a = eval_expr(env, e.kids[0]);
      return Value::boolean(a.bits <= eval_expr(env, e.kids[1]).bits);
    }
    case Op::Lt: {
      Value a = eval_expr(env, e.kids[0]);
      return Value::boolean(a.bits < eval_expr(env, e.kids[1]).bits);
    }
    case Op::Mux:
      return eval_expr(env, e.kids[0]).b ? eval_expr(env, e.kids[1])
                                         : eval_expr(env, e.kids[2]);
    case Op::MkTuple: {
      std::vector<Value> elems;
      elems.reserve(e.kids.size());
      for (const auto& k : e.kids) elems.push_back(eval_expr(env, k));
      return Value::tuple(std::move(elems));
    }
    case Op::Proj: return eval_expr(env, e.kids[0]).elems[e.proj_index];
  }
  throw std::logic_error("eval_expr: unknown node");
}

// Big-step evaluation of an action in state gamma with pending updates
// delta. Evaluation order is strictly left-then-right inside bind.
inline StepResult eval_action(const MemEnv& menv, const MemState& gamma, Delta delta, Env& env,
                              const Action& a) {
  using Op = Action::Op;
  switch (a.op) {
    case Op::Return:
      return std::make_pair(eval_expr(env, a.expr), std::move(delta));
    case Op::Bind: {
      StepResult first = eval_action(menv, gamma, std::move(delta), env, a.kids[0]);
      if (!first) return std::nullopt;
      env_set(env, a.binder, std::move(first->first));
      return eval_action(menv, gamma, std::move(first->second), env, a.kids[1]);
    }
    case Op::Assert: {
      if (!eval_expr(env, a.expr).b) return std::nullopt;
      return std::make_pair(Value::unit(), std::move(delta));
    }
    case Op::OrElse: {
      // The left branch runs with the incoming updates; if it aborts, its
      // effects are discarded and the right branch restarts from the same
      // incoming updates.
      StepResult left = eval_action(menv, gamma, delta, env, a.kids[0]);
      if (left) return left;
      return eval_action(menv, gamma, std::move(delta), env, a.kids[1]);
    }
    case Op::RegRead:
      return std::make_pair(gamma.cells[a.ref.index].one, std::move(delta));
    case Op::InputRead:
      return std::make_pair(gamma.cells[a.ref.index].one, std::move(delta));
    case Op::RegfileRead: {
      Value addr = eval_expr(env, a.expr);
      return std::make_pair(gamma.cells[a.ref.index].arr[addr.bits], std::move(delta));
    }
    case Op::RegWrite: {
      Value v = eval_expr(env, a.expr);
      return std::make_pair(Value::unit(),
                            delta_insert(menv, std::move(delta), a.ref.index, std::nullopt,
                                         std::move(v)));
    }
    case Op::RegfileWrite: {
      Value addr = eval_expr(env, a.expr);
      Value v = eval_expr(env, a.expr2);
      return std::make_pair(Value::unit(),
                            delta_insert(menv, std::move(delta), a.ref.index, addr.bits,
                                         std::move(v)));
    }
  }
  throw std::logic_error("eval_action: unknown node");
}

// One synchronous step: run the action from an empty update set and commit.
// Absent means the step aborted and the state is held unchanged.
inline std::optional<std::pair<Value, MemState>> next(const MemEnv& menv, const MemState& gamma,
                                                      const Action& a) {
  Env env;
  StepResult r = eval_action(menv, gamma, empty_delta(menv), env, a);
  if (!r) return std::nullopt;
  return std::make_pair(std::move(r->first), commit(menv, gamma, r->second));
}

// Clocked execution: before each step the cycle's input values are
// substituted into the state, then the action runs once. Records the output
// (absent on abort) and the post-commit state for every cycle.
//
// input_traces holds one list of values per Input element of menv, in
// declaration order; each list must cover all requested cycles.
inline std::vector<std::pair<std::optional<Value>, MemState>> simulate(
    const MemEnv& menv, MemState gamma, const Action& a,
    const std::vector<std::vector<Value>>& input_traces, size_t cycles) {
  std::vector<size_t> input_elems;
  for (size_t i = 0; i < menv.size(); ++i)
    if (menv[i].kind == Mem::Kind::Input) input_elems.push_back(i);
  if (input_traces.size() != input_elems.size())
    throw std::invalid_argument("simulate: expected one trace per input element");
  for (const auto& tr : input_traces)
    if (tr.size() < cycles) throw std::invalid_argument("simulate: trace shorter than cycle count");

  std::vector<std::pair<std::optional<Value>, MemState>> out;
  out.reserve(cycles);
  for (size_t c = 0; c < cycles; ++c) {
    for (size_t k = 0; k < input_elems.size(); ++k) {
      const Value& v = input_traces[k][c];
      if (!value_has_type(v, menv[input_elems[k]].ty))
        throw std::invalid_argument("simulate: trace value has the wrong type");
      gamma.cells[input_elems[k]].one = v;
    }
    auto r = next(menv, gamma, a);
    if (r) {
      gamma = std::move(r->second);
      out.emplace_back(std::move(r->first), gamma);
    } else {
      out.emplace_back(std::nullopt, gamma);
    }
  }
  return out;
}

}  // namespace fesi
