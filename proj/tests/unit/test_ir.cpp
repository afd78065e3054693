#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "../support/corpus.hpp"
#include "../support/gen.hpp"
#include "fesi/ir.hpp"
#include "fesi/random_state.hpp"
#include "fesi/sem.hpp"
#include "fesi/typecheck.hpp"

using namespace fesi;

TEST_CASE("a bare return compiles to guard true and an empty effect list") {
  Builder b({});
  IrBlock blk = compile_to_ir({}, b.ret(e_bool(true)));
  REQUIRE(blk.bindings.size() == 2);  // the constant-true guard, then the value
  CHECK(blk.guard.id == blk.bindings[0].var.id);
  CHECK(blk.value.id == blk.bindings[1].var.id);
  CHECK(blk.effects.empty());
  CHECK(ir_well_scoped(blk));

  MemState g;
  auto r = eval_ir(g, blk);
  REQUIRE(r.has_value());
  CHECK(r->first == Value::boolean(true));
}

TEST_CASE("the counter compiles to a single branch effect tree") {
  MemEnv env = counter_env(4);
  IrBlock blk = compile_to_ir(env, counter_circuit(4));
  REQUIRE(blk.effects.size() == 2);
  CHECK(blk.effects[0].kind == EffTree::Kind::Branch);
  CHECK(blk.effects[1].kind == EffTree::Kind::Empty);
  CHECK(ir_well_scoped(blk));
}

TEST_CASE("counter: ir agrees with the source semantics on every state") {
  MemEnv env = counter_env(4);
  Action a = counter_circuit(4);
  IrBlock blk = compile_to_ir(env, a);
  for (uint64_t reg = 0; reg < 16; ++reg)
    for (bool tick : {false, true}) {
      MemState g = initial_state(env);
      g.cells[0].one = Value::word(4, reg);
      g.cells[1].one = Value::boolean(tick);
      CHECK(eval_ir(g, blk) == next(env, g, a));
    }
}

TEST_CASE("orElse guard is the disjunction and the value a mux") {
  Builder b({});
  Action a = b.or_else(b.seq(b.assert_(e_bool(false)), b.ret(e_word(4, 7))), b.ret(e_word(4, 0)));
  REQUIRE(typechecks({}, a));
  IrBlock blk = compile_to_ir({}, a);
  CHECK(ir_well_scoped(blk));

  // The last two pure bindings are or(ga, gb) and mux(ga, va, vb).
  const IrExpr& guard_expr = blk.bindings[blk.guard.id].expr;
  REQUIRE(guard_expr.kind == IrExpr::Kind::Pure);
  CHECK(guard_expr.expr.op == Expr::Op::Or);
  const IrExpr& value_expr = blk.bindings[blk.value.id].expr;
  REQUIRE(value_expr.kind == IrExpr::Kind::Pure);
  CHECK(value_expr.expr.op == Expr::Op::Mux);

  MemState g;
  auto r = eval_ir(g, blk);
  REQUIRE(r.has_value());
  CHECK(r->first == Value::word(4, 0));
}

TEST_CASE("effect folding: program order, branches, enables") {
  MemEnv env = {Mem::reg(Ty::word(4))};
  Builder b(env);
  // Seq of two always-enabled writes commits the first.
  Action two_writes = b.seq(b.reg_write(0, e_word(4, 1)), b.reg_write(0, e_word(4, 2)));
  IrBlock blk = compile_to_ir(env, two_writes);
  MemState g = initial_state(env);
  auto r = eval_ir(g, blk);
  REQUIRE(r.has_value());
  CHECK(r->second.cells[0].one == Value::word(4, 1));

  // A branch whose condition is false suppresses the write.
  Builder b2(env);
  Action gated = b2.ifte(e_bool(false), b2.reg_write(0, e_word(4, 1)), b2.ret(e_unit()));
  IrBlock blk2 = compile_to_ir(env, gated);
  auto r2 = eval_ir(g, blk2);
  REQUIRE(r2.has_value());
  CHECK(r2->second.cells[0].one == Value::word(4, 0));

  // All-empty effects with a true guard: state unchanged, value returned.
  Builder b3(env);
  IrBlock blk3 = compile_to_ir(env, b3.ret(e_word(4, 9)));
  auto r3 = eval_ir(g, blk3);
  REQUIRE(r3.has_value());
  CHECK(r3->first == Value::word(4, 9));
  CHECK(r3->second == g);
}

TEST_CASE("each variable is bound exactly once, in order") {
  for (const auto& entry : fesi::testing::corpus()) {
    IrBlock blk = compile_to_ir(entry.env, entry.action);
    CHECK(ir_well_scoped(blk));
    CHECK(blk.bindings.size() == blk.var_limit);
    for (size_t i = 0; i < blk.bindings.size(); ++i) CHECK(blk.bindings[i].var.id == i);
  }
}

TEST_CASE("telescope size is linear in the source size") {
  for (const auto& entry : fesi::testing::corpus()) {
    IrBlock blk = compile_to_ir(entry.env, entry.action);
    CHECK(blk.bindings.size() <= 4 * action_size(entry.action));
  }
}

TEST_CASE("pass 1 preserves the next-state function on the corpus") {
  std::mt19937_64 rng(11);
  for (const auto& entry : fesi::testing::corpus()) {
    IrBlock blk = compile_to_ir(entry.env, entry.action);
    for (int i = 0; i < 200; ++i) {
      MemState g = random_state(rng, entry.env);
      if (eval_ir(g, blk) != next(entry.env, g, entry.action)) {
        FAIL("ir divergence on " << entry.name);
      }
    }
  }
}

TEST_CASE("pass 1 preserves the next-state function on random programs") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 150; ++i) {
    MemEnv env = fesi::testing::random_env(rng);
    Builder bld(env);
    fesi::testing::ProgramGen gen(rng, bld);
    Action a = gen.gen_action((i % 2) ? Ty::word(4) : Ty::unit(), 4);
    REQUIRE(typechecks(env, a));
    IrBlock blk = compile_to_ir(env, a);
    CHECK(ir_well_scoped(blk));
    for (int t = 0; t < 25; ++t) {
      MemState g = random_state(rng, env);
      if (eval_ir(g, blk) != next(env, g, a)) {
        CAPTURE(to_string(a));
        FAIL("ir divergence on random program");
      }
    }
  }
}

TEST_CASE("ir dump is deterministic") {
  IrBlock blk = compile_to_ir(counter_env(4), counter_circuit(4));
  CHECK(to_string(blk) == to_string(blk));
  CHECK(to_string(blk).find("guard") != std::string::npos);
}
