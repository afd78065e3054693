#pragma once

// The whole compiler: ANF, three-address RTL, then the two lightweight
// optimizations. Every stage is kept so the differential harness can check
// preservation at each boundary, not just end to end.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <variant>

#include "fesi/bdd_pass.hpp"
#include "fesi/cse.hpp"
#include "fesi/ir.hpp"
#include "fesi/rtl.hpp"
#include "fesi/typecheck.hpp"

namespace fesi {

struct PipelineOptions {
  bool run_cse = true;
  bool run_bdd = true;
  size_t bdd_node_budget = 1'000'000;
};

struct CompiledStages {
  IrBlock ir;
  RtlBlock rtl;
  std::optional<RtlBlock> after_cse;
  std::optional<RtlBlock> after_bdd;
  BddPassStats bdd_stats;

  const RtlBlock& final_block() const {
    if (after_bdd) return *after_bdd;
    if (after_cse) return *after_cse;
    return rtl;
  }
};

// Typechecks, then runs all enabled passes. Throws std::invalid_argument on
// a type error; everything after the checker is total.
inline CompiledStages compile_pipeline(const MemEnv& env, const Action& a,
                                       PipelineOptions opts = {}) {
  auto tc = typecheck(env, a);
  if (auto* te = std::get_if<TypeError>(&tc))
    throw std::invalid_argument("type error: " + te->message);
  CompiledStages s;
  s.ir = compile_to_ir(env, a);
  s.rtl = compile_to_rtl(s.ir);
  if (opts.run_cse) s.after_cse = cse(s.rtl);
  if (opts.run_bdd)
    s.after_bdd = bdd_pass(opts.run_cse ? *s.after_cse : s.rtl, opts.bdd_node_budget,
                           &s.bdd_stats);
  return s;
}

struct StageStats {
  size_t ir_bindings = 0;
  size_t rtl_bindings = 0;
  std::optional<size_t> cse_bindings;
  std::optional<size_t> bdd_bindings;
};

inline StageStats stage_stats(const CompiledStages& s) {
  StageStats st;
  st.ir_bindings = s.ir.bindings.size();
  st.rtl_bindings = s.rtl.bindings.size();
  if (s.after_cse) st.cse_bindings = s.after_cse->bindings.size();
  if (s.after_bdd) st.bdd_bindings = s.after_bdd->bindings.size();
  return st;
}

}  // namespace fesi
