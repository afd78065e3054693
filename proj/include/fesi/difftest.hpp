#pragma once

// Differential testing of the compiler: run seeded random states through the
// source interpreter and through every pass boundary, demand exact equality
// of presence, value and full state. On divergence the offending state is
// greedily minimized (fields zeroed while the divergence persists).

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fesi/pipeline.hpp"
#include "fesi/random_state.hpp"
#include "fesi/sem.hpp"

namespace fesi {

using StepOutcome = std::optional<std::pair<Value, MemState>>;

struct DifftestOptions {
  size_t trials = 1000;
  uint64_t seed = 1;
  bool minimize = true;
};

struct Divergence {
  std::string stage;  // boundary that diverged: "ir", "rtl", "cse", "bdd"
  size_t trial = 0;
  MemState state;     // offending (minimized) pre-step state
  std::string detail;
};

struct DifftestReport {
  bool pass = true;
  size_t trials = 0;
  uint64_t seed = 0;
  std::vector<std::string> stages;
  std::optional<Divergence> divergence;
};

namespace detail {

inline std::string outcome_str(const MemEnv& env, const StepOutcome& o) {
  if (!o) return "aborted (state held)";
  return "value " + to_string(o->first) + "\n" + to_string(env, o->second);
}

inline std::string describe_mismatch(const MemEnv& env, const StepOutcome& want,
                                     const StepOutcome& got) {
  return "source interpreter:\n" + outcome_str(env, want) + "stage interpreter:\n" +
         outcome_str(env, got);
}

}  // namespace detail

// The per-stage evaluators for a compiled pipeline, in boundary order.
inline std::vector<std::pair<std::string, std::function<StepOutcome(const MemState&)>>>
stage_evaluators(const CompiledStages& stages) {
  std::vector<std::pair<std::string, std::function<StepOutcome(const MemState&)>>> evals;
  evals.emplace_back("ir", [&stages](const MemState& g) { return eval_ir(g, stages.ir); });
  evals.emplace_back("rtl", [&stages](const MemState& g) { return rtl_next(g, stages.rtl); });
  if (stages.after_cse)
    evals.emplace_back("cse",
                       [&stages](const MemState& g) { return rtl_next(g, *stages.after_cse); });
  if (stages.after_bdd)
    evals.emplace_back("bdd",
                       [&stages](const MemState& g) { return rtl_next(g, *stages.after_bdd); });
  return evals;
}

inline DifftestReport difftest_stages(const MemEnv& env, const Action& action,
                                      const CompiledStages& stages,
                                      DifftestOptions opts = {}) {
  auto evals = stage_evaluators(stages);

  DifftestReport report;
  report.trials = opts.trials;
  report.seed = opts.seed;
  for (const auto& [name, fn] : evals) report.stages.push_back(name);

  // Returns the first diverging stage for this state, if any.
  auto diverging_stage = [&](const MemState& g)
      -> std::optional<std::pair<std::string, std::string>> {
    StepOutcome want = next(env, g, action);
    for (const auto& [name, fn] : evals) {
      StepOutcome got = fn(g);
      if (got != want)
        return std::make_pair(name, detail::describe_mismatch(env, want, got));
    }
    return std::nullopt;
  };

  std::mt19937_64 rng(opts.seed);
  for (size_t t = 0; t < opts.trials; ++t) {
    MemState g = random_state(rng, env);
    auto div = diverging_stage(g);
    if (!div) continue;

    if (opts.minimize) {
      // Greedy zeroing, repeated to a fixpoint.
      bool changed = true;
      while (changed) {
        changed = false;
        for (size_t i = 0; i < env.size(); ++i) {
          if (env[i].kind == Mem::Kind::Regfile) {
            for (auto& entry : g.cells[i].arr) {
              Value z = zero_value(env[i].ty);
              if (entry == z) continue;
              Value saved = entry;
              entry = z;
              if (diverging_stage(g))
                changed = true;
              else
                entry = saved;
            }
          } else {
            Value z = zero_value(env[i].ty);
            if (g.cells[i].one == z) continue;
            Value saved = g.cells[i].one;
            g.cells[i].one = z;
            if (diverging_stage(g))
              changed = true;
            else
              g.cells[i].one = saved;
          }
        }
      }
      div = diverging_stage(g);
    }

    report.pass = false;
    report.divergence = Divergence{div->first, t, std::move(g), div->second};
    return report;
  }
  return report;
}

inline std::string format_report(const MemEnv& env, const DifftestReport& r) {
  std::string out = "difftest: trials=" + std::to_string(r.trials) +
                    " seed=" + std::to_string(r.seed) + " stages=";
  for (size_t i = 0; i < r.stages.size(); ++i) {
    if (i) out += ",";
    out += r.stages[i];
  }
  out += "\n";
  if (r.pass) {
    out += "PASS: source next = stage next at every boundary\n";
    return out;
  }
  const Divergence& d = *r.divergence;
  out += "FAIL: divergence at stage '" + d.stage + "' (trial " + std::to_string(d.trial) + ")\n";
  out += "minimized counterexample state:\n" + to_string(env, d.state);
  out += d.detail;
  return out;
}

}  // namespace fesi
