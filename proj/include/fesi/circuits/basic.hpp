#pragma once

// The two introductory circuits: a combinational half adder and a counter
// that increments while its tick input is high. Circuit inputs are modelled
// as Input memory elements, so a "free variable" of the original combinator
// presentation becomes a declared element driven by the outside world.

#include <utility>

#include "fesi/lang.hpp"
#include "fesi/types.hpp"

namespace fesi {

inline MemEnv hadd_env() {
  return {Mem::input(Ty::boolean()), Mem::input(Ty::boolean())};
}

// do carry <- ret (a && b); do sum <- ret (a ^ b); ret (carry, sum)
inline Action hadd_circuit() {
  Builder b(hadd_env());
  return b.bind(b.input_read(0), [&](Var a) {
    return b.bind(b.input_read(1), [&](Var in_b) {
      return b.bind(b.ret(e_and(e_var(a), e_var(in_b))), [&](Var carry) {
        return b.bind(b.ret(e_xor(e_var(a), e_var(in_b))), [&](Var sum) {
          return b.ret(e_tuple({e_var(carry), e_var(sum)}));
        });
      });
    });
  });
}

// Element 0 is the counter register, element 1 the tick input.
inline MemEnv counter_env(int width) {
  return {Mem::reg(Ty::word(width)), Mem::input(Ty::boolean())};
}

// do x <- !reg; do t <- !tick; do _ <- if t then reg ::= x + 1 else ret ();
// ret x  — the output is the old value of the counter.
inline Action counter_circuit(int width) {
  Builder b(counter_env(width));
  return b.bind(b.reg_read(0), [&](Var x) {
    return b.bind(b.input_read(1), [&](Var tick) {
      Action incr = b.reg_write(0, e_add(e_var(x), e_word(width, 1)));
      Action skip = b.ret(e_unit());
      return b.seq(b.ifte(e_var(tick), std::move(incr), std::move(skip)),
                   b.ret(e_var(x)));
    });
  });
}

}  // namespace fesi
