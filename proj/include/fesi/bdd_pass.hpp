#pragma once

// Semantic common-subexpression elimination on Booleans. Every bool-typed
// binding is annotated with a BDD node: opaque sources (reads, word
// comparisons, bool projections) become fresh BDD variables in
// first-appearance order, boolean operators and muxes map to BDD
// operations. A binding whose node is the constant true/false is replaced by
// that constant; one whose node was seen before is dropped and its uses
// rerouted. On node-budget overflow the offending binding is kept verbatim —
// the pass degrades, it never fails.

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "fesi/bdd.hpp"
#include "fesi/rtl.hpp"

namespace fesi {

struct BddPassStats {
  size_t store_nodes = 0;          // nodes allocated while annotating
  size_t bindings_eliminated = 0;  // duplicates dropped
  size_t constants_folded = 0;     // bindings replaced by true/false
};

inline RtlBlock bdd_pass(const RtlBlock& b, size_t node_budget = 1'000'000,
                         BddPassStats* stats = nullptr) {
  BddStore store(node_budget);
  std::vector<std::optional<NodeId>> var_node(b.var_limit);
  std::unordered_map<NodeId, Var> node_var;
  std::vector<std::optional<Var>> reroute(b.var_limit);
  uint32_t next_bdd_var = 0;

  auto resolve = [&](const Var& v) -> Var {
    return v.id < reroute.size() && reroute[v.id] ? *reroute[v.id] : v;
  };
  // Bool variables with no computed node (opaque sources, overflow
  // leftovers) get a fresh BDD variable the first time they are used.
  auto node_of_var = [&](const Var& v) -> NodeId {
    if (!var_node[v.id]) var_node[v.id] = store.mk_var(next_bdd_var++);
    return *var_node[v.id];
  };

  RtlBlock out;
  out.env = b.env;
  out.var_limit = b.var_limit;
  for (const auto& bind : b.bindings) {
    RtlExpr e = bind.expr;
    for (auto& a : e.args) a = resolve(a);
    if (bind.var.ty != Ty::boolean()) {
      out.bindings.push_back({bind.var, std::move(e)});
      continue;
    }

    std::optional<NodeId> n;
    try {
      using Op = RtlExpr::Op;
      switch (e.op) {
        case Op::ConstBool: n = e.bval ? BddStore::kTrue : BddStore::kFalse; break;
        case Op::Var: n = node_of_var(e.args[0]); break;
        case Op::And: n = store.and_(node_of_var(e.args[0]), node_of_var(e.args[1])); break;
        case Op::Or: n = store.or_(node_of_var(e.args[0]), node_of_var(e.args[1])); break;
        case Op::Xor: n = store.xor_(node_of_var(e.args[0]), node_of_var(e.args[1])); break;
        case Op::Not: n = store.not_(node_of_var(e.args[0])); break;
        case Op::Mux:
          n = store.ite(node_of_var(e.args[0]), node_of_var(e.args[1]), node_of_var(e.args[2]));
          break;
        default:
          // Opaque bool source: reads, word comparisons, projections.
          n = store.mk_var(next_bdd_var++);
          break;
      }
    } catch (const BddOverflow&) {
      n = std::nullopt;  // keep the binding untouched; later uses go opaque
    }

    if (n) {
      auto it = node_var.find(*n);
      if (it != node_var.end()) {
        reroute[bind.var.id] = it->second;
        if (stats) ++stats->bindings_eliminated;
        continue;
      }
      node_var.emplace(*n, bind.var);
      var_node[bind.var.id] = *n;
      if (*n == BddStore::kTrue || *n == BddStore::kFalse) {
        if (stats && e.op != RtlExpr::Op::ConstBool) ++stats->constants_folded;
        RtlExpr c;
        c.op = RtlExpr::Op::ConstBool;
        c.bval = (*n == BddStore::kTrue);
        e = std::move(c);
      }
    }
    out.bindings.push_back({bind.var, std::move(e)});
  }
  if (stats) stats->store_nodes = store.node_count();

  out.guard = resolve(b.guard);
  out.value = resolve(b.value);
  out.writes.resize(b.writes.size());
  for (size_t i = 0; i < b.writes.size(); ++i) {
    if (!b.writes[i]) continue;
    RtlWrite w = *b.writes[i];
    w.data = resolve(w.data);
    w.enable = resolve(w.enable);
    if (w.addr) w.addr = resolve(*w.addr);
    out.writes[i] = std::move(w);
  }
  return out;
}

}  // namespace fesi
