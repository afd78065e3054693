#pragma once

// Hardware implementation of the stack machine: one action per machine
// step. The stack lives in a register file with a stack-pointer register,
// the store in a second register file, the code in a third addressed by the
// program counter. Dynamic checks (stack bounds, arithmetic range) abort the
// step, so the machine stalls exactly where the specification is stuck or
// leaves machine range.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fesi/circuits/vm.hpp"
#include "fesi/lang.hpp"
#include "fesi/types.hpp"

namespace fesi {

inline constexpr size_t kSmCode = 0;   // regfile of (opcode, operand) pairs
inline constexpr size_t kSmPc = 1;     // program counter register
inline constexpr size_t kSmStack = 2;  // stack register file
inline constexpr size_t kSmSp = 3;     // stack pointer = number of live entries
inline constexpr size_t kSmStore = 4;  // variable store register file

inline Ty sm_instr_ty(int n) { return Ty::tuple({Ty::word(4), Ty::word(n)}); }

inline MemEnv stack_machine_env(int n) {
  if (n < 2 || n > 16) throw std::invalid_argument("stack machine: width must be in [2,16]");
  Ty val = Ty::word(n);
  return {Mem::regfile(n, sm_instr_ty(n)), Mem::reg(val), Mem::regfile(n, val), Mem::reg(val),
          Mem::regfile(n, val)};
}

namespace detail {

inline Action sm_chain(Builder& bld, std::vector<Action> steps) {
  Action acc = std::move(steps.back());
  for (size_t i = steps.size() - 1; i-- > 0;) acc = bld.seq(std::move(steps[i]), std::move(acc));
  return acc;
}

}  // namespace detail

// Fetch code[pc], dispatch on the opcode, implement each instruction with
// its dynamic checks. The final branch of the dispatch asserts false, so
// halt and undefined opcodes stall the machine, as does any failed check
// inside a taken branch (its orElse fallthrough finds no other opcode
// matching).
inline Action stack_machine_circuit(int n) {
  Builder bld(stack_machine_env(n));
  auto w = [&](uint64_t v) { return e_word(n, v); };
  const uint64_t cap = word_mask(n);  // stack capacity is 2^n - 1 entries

  return bld.bind(bld.reg_read(kSmPc), [&](Var pc) {
    return bld.bind(bld.rf_read(kSmCode, e_var(pc)), [&](Var instr) {
      return bld.bind(bld.ret(e_proj(e_var(instr), 0)), [&](Var op) {
        return bld.bind(bld.ret(e_proj(e_var(instr), 1)), [&](Var arg) {
          return bld.bind(bld.reg_read(kSmSp), [&](Var sp) {
            auto pc_plus_1 = [&] { return e_add(e_var(pc), w(1)); };
            auto sp_minus = [&](uint64_t k) { return e_sub(e_var(sp), w(k)); };

            // push v, advance pc; aborts when the stack is full.
            auto push_step = [&](Expr v) {
              return detail::sm_chain(
                  bld, {bld.assert_(e_le(e_var(sp), w(cap - 1))),
                        bld.rf_write(kSmStack, e_var(sp), std::move(v)),
                        bld.reg_write(kSmSp, e_add(e_var(sp), w(1))),
                        bld.reg_write(kSmPc, pc_plus_1())});
            };

            Action h_const = push_step(e_var(arg));

            Action h_var = bld.bind(bld.rf_read(kSmStore, e_var(arg)),
                                    [&](Var v) { return push_step(e_var(v)); });

            Action h_setvar = bld.seq(
                bld.assert_(e_le(w(1), e_var(sp))),
                bld.bind(bld.rf_read(kSmStack, sp_minus(1)), [&](Var v) {
                  return detail::sm_chain(
                      bld, {bld.rf_write(kSmStore, e_var(arg), e_var(v)),
                            bld.reg_write(kSmSp, sp_minus(1)),
                            bld.reg_write(kSmPc, pc_plus_1())});
                }));

            // Shared shape of add/sub: pop two, push the result over the
            // operands' slot. `check` guards the arithmetic range.
            auto arith_step = [&](auto mk_result, auto mk_check) {
              return bld.seq(
                  bld.assert_(e_le(w(2), e_var(sp))),
                  bld.bind(bld.rf_read(kSmStack, sp_minus(1)), [&](Var n2) {
                    return bld.bind(bld.rf_read(kSmStack, sp_minus(2)), [&](Var n1) {
                      return bld.bind(bld.ret(mk_result(n1, n2)), [&](Var res) {
                        return detail::sm_chain(
                            bld, {bld.assert_(mk_check(n1, n2, res)),
                                  bld.rf_write(kSmStack, sp_minus(2), e_var(res)),
                                  bld.reg_write(kSmSp, sp_minus(1)),
                                  bld.reg_write(kSmPc, pc_plus_1())});
                      });
                    });
                  }));
            };

            // Overflow check: modular n1+n2 dipped below n1 iff it wrapped.
            Action h_add = arith_step(
                [&](Var n1, Var n2) { return e_add(e_var(n1), e_var(n2)); },
                [&](Var n1, Var, Var res) { return e_not(e_lt(e_var(res), e_var(n1))); });
            Action h_sub = arith_step(
                [&](Var n1, Var n2) { return e_sub(e_var(n1), e_var(n2)); },
                [&](Var n1, Var n2, Var) { return e_le(e_var(n2), e_var(n1)); });

            // Branch targets wrap modulo 2^n; a target past the program
            // fetches a halt-filled slot next step and stalls there.
            Action h_bfwd = bld.reg_write(kSmPc, e_add(pc_plus_1(), e_var(arg)));
            Action h_bbwd = bld.reg_write(kSmPc, e_sub(pc_plus_1(), e_var(arg)));

            auto bcond_step = [&](auto mk_cond) {
              return bld.seq(
                  bld.assert_(e_le(w(2), e_var(sp))),
                  bld.bind(bld.rf_read(kSmStack, sp_minus(1)), [&](Var n2) {
                    return bld.bind(bld.rf_read(kSmStack, sp_minus(2)), [&](Var n1) {
                      return detail::sm_chain(
                          bld,
                          {bld.reg_write(kSmSp, sp_minus(2)),
                           bld.reg_write(kSmPc, e_mux(mk_cond(n1, n2),
                                                      e_add(pc_plus_1(), e_var(arg)),
                                                      pc_plus_1()))});
                    });
                  }));
            };

            Action h_beq =
                bcond_step([&](Var n1, Var n2) { return e_eq(e_var(n1), e_var(n2)); });
            Action h_bne = bcond_step(
                [&](Var n1, Var n2) { return e_not(e_eq(e_var(n1), e_var(n2))); });
            Action h_ble =
                bcond_step([&](Var n1, Var n2) { return e_le(e_var(n1), e_var(n2)); });
            Action h_bgt = bcond_step(
                [&](Var n1, Var n2) { return e_not(e_le(e_var(n1), e_var(n2))); });

            auto opcode_is = [&](VmOp o) {
              return e_eq(e_var(op), e_word(4, static_cast<uint64_t>(o)));
            };

            // halt (and any undefined opcode) reaches the final assert.
            Action dispatch = bld.assert_(e_bool(false));
            std::vector<std::pair<VmOp, Action*>> handlers = {
                {VmOp::BcondGt, &h_bgt},   {VmOp::BcondLe, &h_ble},
                {VmOp::BcondNe, &h_bne},   {VmOp::BcondEq, &h_beq},
                {VmOp::Bbwd, &h_bbwd},     {VmOp::Bfwd, &h_bfwd},
                {VmOp::Sub, &h_sub},       {VmOp::Add, &h_add},
                {VmOp::Setvar, &h_setvar}, {VmOp::Var, &h_var},
                {VmOp::Const, &h_const},
            };
            for (auto& [o, h] : handlers)
              dispatch = bld.ifte(opcode_is(o), std::move(*h), std::move(dispatch));
            return dispatch;
          });
        });
      });
    });
  });
}

// --- Loading and the simulation relation ----------------------------------

inline Value encode_instr_value(int n, const VmInstr& i) {
  auto [op, arg] = encode_instr(i);
  return Value::tuple({Value::word(4, op), Value::word(n, arg)});
}

// Zeroed machine with the program in code memory; unused slots hold halt.
inline MemState load_program(int n, const std::vector<VmInstr>& prog) {
  MemEnv env = stack_machine_env(n);
  if (prog.size() > env[kSmCode].entries())
    throw std::invalid_argument("load_program: program does not fit the code memory");
  MemState st = initial_state(env);
  for (size_t j = 0; j < env[kSmCode].entries(); ++j)
    st.cells[kSmCode].arr[j] =
        encode_instr_value(n, j < prog.size() ? prog[j] : VmInstr{VmOp::Halt, 0});
  return st;
}

// The logical relation between the two encodings of machine state: code
// decodes to the program, pc and stack-pointer registers match, the live
// stack prefix matches bottom-up, and the store agrees on every identifier
// the specification side has set.
inline bool states_related(const VmState& s, const MemState& m, int n) {
  const uint64_t mask = word_mask(n);
  const uint64_t entries = uint64_t{1} << n;
  if (s.pc > mask || s.code.size() > entries) return false;
  if (s.stack.size() > entries - 1) return false;
  if (m.cells.size() != 5) return false;

  for (size_t j = 0; j < s.code.size(); ++j) {
    const Value& v = m.cells[kSmCode].arr[j];
    auto d = decode_instr(v.elems[0].bits, v.elems[1].bits);
    if (!d || !(*d == s.code[j])) return false;
  }
  if (m.cells[kSmPc].one.bits != s.pc) return false;
  if (m.cells[kSmSp].one.bits != s.stack.size()) return false;
  for (size_t i = 0; i < s.stack.size(); ++i) {
    if (s.stack[i] > mask) return false;
    if (m.cells[kSmStack].arr[i].bits != s.stack[i]) return false;
  }
  for (const auto& [x, v] : s.store) {
    if (x > mask || v > mask) return false;
    if (m.cells[kSmStore].arr[x].bits != v) return false;
  }
  return true;
}

// Whether the (existing) step out of s stays within the bounds the machine
// can encode faithfully: results fit the word width, pushes fit the stack,
// subtraction does not truncate, branch targets do not wrap. Only steps that
// satisfy this participate in the simulation claim.
inline bool step_in_machine_bounds(const VmState& s, int n) {
  const uint64_t mask = word_mask(n);
  if (s.pc >= s.code.size()) return false;
  const VmInstr i = s.code[s.pc];
  auto pc_ok = [&](uint64_t target) { return target <= mask; };
  auto push_ok = [&] { return s.stack.size() + 1 <= mask; };  // capacity 2^n - 1
  auto top2 = [&](uint64_t& n1, uint64_t& n2) {
    n2 = s.stack[s.stack.size() - 1];
    n1 = s.stack[s.stack.size() - 2];
  };
  switch (i.op) {
    case VmOp::Const:
      return i.arg <= mask && push_ok() && pc_ok(s.pc + 1);
    case VmOp::Var:
      return i.arg <= mask && vm_store_get(s, i.arg) <= mask && push_ok() && pc_ok(s.pc + 1);
    case VmOp::Setvar:
      return i.arg <= mask && pc_ok(s.pc + 1);
    case VmOp::Add: {
      uint64_t n1, n2;
      top2(n1, n2);
      return n1 + n2 <= mask && pc_ok(s.pc + 1);
    }
    case VmOp::Sub: {
      uint64_t n1, n2;
      top2(n1, n2);
      return n2 <= n1 && pc_ok(s.pc + 1);
    }
    case VmOp::Bfwd:
      return pc_ok(s.pc + 1 + i.arg);
    case VmOp::Bbwd:
      return i.arg <= s.pc + 1 && pc_ok(s.pc + 1 - i.arg);
    case VmOp::BcondEq:
    case VmOp::BcondNe:
    case VmOp::BcondLe:
    case VmOp::BcondGt:
      return pc_ok(s.pc + 1 + i.arg) && pc_ok(s.pc + 1);
    case VmOp::Halt:
      return false;
  }
  return false;
}

}  // namespace fesi
