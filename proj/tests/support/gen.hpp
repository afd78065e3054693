#pragma once

// Random well-typed program generator, built on the public builder API. Used
// for the generative typechecking property and as extra fuzz for the pass
// preservation suites.

#include <cstdint>
#include <random>
#include <vector>

#include "fesi/lang.hpp"
#include "fesi/types.hpp"

namespace fesi::testing {

class ProgramGen {
 public:
  ProgramGen(std::mt19937_64& rng, Builder& bld) : rng_(rng), bld_(bld) {}

  Action gen_action(const Ty& ty, int depth) {
    scope_.clear();
    return gen(ty, depth);
  }

 private:
  uint64_t pick(uint64_t n) { return rng_() % n; }

  Expr gen_expr(const Ty& ty, int depth) {
    // Prefer an in-scope variable of the right type when one exists.
    if (depth <= 0 || pick(3) == 0) {
      std::vector<const Var*> candidates;
      for (const Var& v : scope_)
        if (v.ty == ty) candidates.push_back(&v);
      if (!candidates.empty() && pick(4) != 0) return e_var(*candidates[pick(candidates.size())]);
      return gen_const(ty);
    }
    switch (ty.kind) {
      case Ty::Kind::Bool:
        switch (pick(7)) {
          case 0: return e_and(gen_expr(ty, depth - 1), gen_expr(ty, depth - 1));
          case 1: return e_or(gen_expr(ty, depth - 1), gen_expr(ty, depth - 1));
          case 2: return e_xor(gen_expr(ty, depth - 1), gen_expr(ty, depth - 1));
          case 3: return e_not(gen_expr(ty, depth - 1));
          case 4: {
            Ty w = Ty::word(4);
            switch (pick(3)) {
              case 0: return e_eq(gen_expr(w, depth - 1), gen_expr(w, depth - 1));
              case 1: return e_le(gen_expr(w, depth - 1), gen_expr(w, depth - 1));
              default: return e_lt(gen_expr(w, depth - 1), gen_expr(w, depth - 1));
            }
          }
          default:
            return e_mux(gen_expr(Ty::boolean(), depth - 1), gen_expr(ty, depth - 1),
                         gen_expr(ty, depth - 1));
        }
      case Ty::Kind::Int:
        switch (pick(4)) {
          case 0: return e_add(gen_expr(ty, depth - 1), gen_expr(ty, depth - 1));
          case 1: return e_sub(gen_expr(ty, depth - 1), gen_expr(ty, depth - 1));
          case 2:
            return e_mux(gen_expr(Ty::boolean(), depth - 1), gen_expr(ty, depth - 1),
                         gen_expr(ty, depth - 1));
          default: return gen_const(ty);
        }
      case Ty::Kind::Tuple:
        if (!ty.elems.empty() && pick(2) == 0) {
          std::vector<Expr> elems;
          for (const Ty& t : ty.elems) elems.push_back(gen_expr(t, depth - 1));
          return e_tuple(std::move(elems));
        }
        return gen_const(ty);
      case Ty::Kind::Unit:
        return e_unit();
    }
    return gen_const(ty);
  }

  Expr gen_const(const Ty& ty) {
    switch (ty.kind) {
      case Ty::Kind::Unit: return e_unit();
      case Ty::Kind::Bool: return e_bool(pick(2) == 0);
      case Ty::Kind::Int: return e_word(ty.width, rng_());
      case Ty::Kind::Tuple: {
        std::vector<Expr> elems;
        for (const Ty& t : ty.elems) elems.push_back(gen_const(t));
        return e_tuple(std::move(elems));
      }
    }
    return e_unit();
  }

  // Memory actions whose result type matches, if the environment has any.
  std::vector<Action> mem_actions(const Ty& ty, int depth) {
    std::vector<Action> out;
    const MemEnv& env = bld_.env();
    for (size_t i = 0; i < env.size(); ++i) {
      const Mem& m = env[i];
      if (m.ty == ty) {
        if (m.kind == Mem::Kind::Reg) out.push_back(bld_.reg_read(i));
        if (m.kind == Mem::Kind::Input) out.push_back(bld_.input_read(i));
        if (m.kind == Mem::Kind::Regfile)
          out.push_back(bld_.rf_read(i, gen_expr(Ty::word(m.addr_width), depth - 1)));
      }
      if (ty.kind == Ty::Kind::Unit) {
        if (m.kind == Mem::Kind::Reg)
          out.push_back(bld_.reg_write(i, gen_expr(m.ty, depth - 1)));
        if (m.kind == Mem::Kind::Regfile)
          out.push_back(bld_.rf_write(i, gen_expr(Ty::word(m.addr_width), depth - 1),
                                      gen_expr(m.ty, depth - 1)));
      }
    }
    return out;
  }

  Action gen(const Ty& ty, int depth) {
    if (depth <= 0) return bld_.ret(gen_expr(ty, 1));
    switch (pick(6)) {
      case 0: {  // bind
        Ty sub = random_small_ty();
        Action first = gen(sub, depth - 1);
        return bld_.bind(std::move(first), [&](Var x) {
          scope_.push_back(x);
          Action rest = gen(ty, depth - 1);
          scope_.pop_back();
          return rest;
        });
      }
      case 1:
        return bld_.or_else(gen(ty, depth - 1), gen(ty, depth - 1));
      case 2:
        return bld_.ifte(gen_expr(Ty::boolean(), 2), gen(ty, depth - 1), gen(ty, depth - 1));
      case 3:
        if (ty.kind == Ty::Kind::Unit) return bld_.assert_(gen_expr(Ty::boolean(), 2));
        return bld_.ret(gen_expr(ty, depth));
      case 4: {
        auto mem = mem_actions(ty, depth);
        if (!mem.empty()) return std::move(mem[pick(mem.size())]);
        return bld_.ret(gen_expr(ty, depth));
      }
      default:
        return bld_.ret(gen_expr(ty, depth));
    }
  }

  Ty random_small_ty() {
    switch (pick(4)) {
      case 0: return Ty::boolean();
      case 1: return Ty::word(4);
      case 2: return Ty::unit();
      default: return Ty::tuple({Ty::boolean(), Ty::word(4)});
    }
  }

  std::mt19937_64& rng_;
  Builder& bld_;
  std::vector<Var> scope_;
};

// A random memory environment mixing all three element kinds.
inline MemEnv random_env(std::mt19937_64& rng) {
  MemEnv env;
  size_t n = 1 + rng() % 4;
  for (size_t i = 0; i < n; ++i) {
    Ty ty = (rng() % 2 == 0) ? Ty::word(4) : Ty::boolean();
    switch (rng() % 3) {
      case 0: env.push_back(Mem::input(ty)); break;
      case 1: env.push_back(Mem::reg(ty)); break;
      default: env.push_back(Mem::regfile(2, ty)); break;
    }
  }
  return env;
}

}  // namespace fesi::testing
