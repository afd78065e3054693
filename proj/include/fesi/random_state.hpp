#pragma once

// Seeded random machine states for the differential suites: words uniform in
// [0, 2^w), fair booleans, register files entry-wise uniform.

#include <cstdint>
#include <random>

#include "fesi/types.hpp"

namespace fesi {

inline Value random_value(std::mt19937_64& rng, const Ty& t) {
  switch (t.kind) {
    case Ty::Kind::Unit: return Value::unit();
    case Ty::Kind::Bool: return Value::boolean((rng() & 1) != 0);
    case Ty::Kind::Int: return Value::word(t.width, rng() & word_mask(t.width));
    case Ty::Kind::Tuple: {
      std::vector<Value> elems;
      elems.reserve(t.elems.size());
      for (const auto& e : t.elems) elems.push_back(random_value(rng, e));
      return Value::tuple(std::move(elems));
    }
  }
  return Value::unit();
}

inline MemState random_state(std::mt19937_64& rng, const MemEnv& env) {
  MemState st;
  st.cells.resize(env.size());
  for (size_t i = 0; i < env.size(); ++i) {
    if (env[i].kind == Mem::Kind::Regfile) {
      st.cells[i].arr.reserve(env[i].entries());
      for (uint64_t j = 0; j < env[i].entries(); ++j)
        st.cells[i].arr.push_back(random_value(rng, env[i].ty));
    } else {
      st.cells[i].one = random_value(rng, env[i].ty);
    }
  }
  return st;
}

}  // namespace fesi
