#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "../support/gen.hpp"
#include "fesi/circuits/basic.hpp"
#include "fesi/lang.hpp"
#include "fesi/sem.hpp"
#include "fesi/typecheck.hpp"

using namespace fesi;

namespace {

Ty tc_ok(const MemEnv& env, const Action& a) {
  auto r = typecheck(env, a);
  if (auto* te = std::get_if<TypeError>(&r)) FAIL("unexpected type error: " << te->message);
  return std::get<Ty>(r);
}

std::string tc_err(const MemEnv& env, const Action& a) {
  auto r = typecheck(env, a);
  REQUIRE(std::holds_alternative<TypeError>(r));
  return std::get<TypeError>(r).message;
}

}  // namespace

TEST_CASE("well-typed boolean return over the empty environment") {
  Builder b({});
  CHECK(tc_ok({}, b.ret(e_and(e_bool(true), e_bool(false)))) == Ty::boolean());
}

TEST_CASE("writing an input is a type error") {
  MemEnv env = {Mem::input(Ty::word(4))};
  Action a;
  a.op = Action::Op::RegWrite;
  a.ref = MemberRef{0, Mem::Kind::Reg};
  a.expr = e_word(4, 1);
  CHECK(tc_err(env, a).find("input") != std::string::npos);
}

TEST_CASE("mixed-width addition is a type error") {
  Builder b({});
  CHECK(tc_err({}, b.ret(e_add(e_word(4, 1), e_word(8, 1)))).find("widths differ") !=
        std::string::npos);
}

TEST_CASE("more checker edges") {
  Builder b({});
  // use before binding
  Action use_free = b.ret(e_var(Var{99, Ty::boolean()}));
  CHECK(tc_err({}, use_free).find("use before binding") != std::string::npos);

  // mux branch mismatch
  CHECK(tc_err({}, b.ret(e_mux(e_bool(true), e_bool(false), e_word(4, 0)))).find("mux") !=
        std::string::npos);

  // projection out of range
  CHECK(tc_err({}, b.ret(e_proj(e_tuple({e_bool(true)}), 3))).find("proj") != std::string::npos);

  // orElse branches must agree
  CHECK(tc_err({}, b.or_else(b.ret(e_bool(true)), b.ret(e_word(4, 0)))).find("orElse") !=
        std::string::npos);

  // regfile address width must match
  MemEnv env = {Mem::regfile(3, Ty::word(4))};
  Builder b2(env);
  CHECK(tc_err(env, b2.rf_read(0, e_word(4, 0))).find("address") != std::string::npos);

  // assert takes a bool
  CHECK(tc_err({}, b.assert_(e_word(4, 0))).find("assert") != std::string::npos);

  // binder may not be reused
  Builder b3({});
  Var x = b3.fresh(Ty::boolean());
  Action inner;
  inner.op = Action::Op::Bind;
  inner.binder = x;
  inner.kids = {b3.ret(e_bool(true)), b3.ret(e_var(x))};
  Action outer;
  outer.op = Action::Op::Bind;
  outer.binder = x;
  outer.kids = {b3.ret(e_bool(false)), inner};
  CHECK(tc_err({}, outer).find("twice") != std::string::npos);
}

TEST_CASE("half adder typechecks to a pair of booleans") {
  CHECK(tc_ok(hadd_env(), hadd_circuit()) == Ty::tuple({Ty::boolean(), Ty::boolean()}));
}

TEST_CASE("counter typechecks at every width") {
  for (int n : {1, 4, 8, 64}) CHECK(tc_ok(counter_env(n), counter_circuit(n)) == Ty::word(n));
}

TEST_CASE("ifte on a true condition evaluates the then branch") {
  Builder b({});
  Action a = b.ifte(e_bool(true), b.ret(e_word(4, 1)), b.ret(e_word(4, 2)));
  REQUIRE(tc_ok({}, a) == Ty::word(4));
  MemState g;
  auto r = next({}, g, a);
  REQUIRE(r.has_value());
  CHECK(r->first == Value::word(4, 1));
}

TEST_CASE("ifte desugaring: an aborting then-branch falls through to else") {
  // ifte is (assert c; t) orElse f, so if t aborts for a reason other than
  // the condition, f still runs.
  Builder b({});
  Action a = b.ifte(e_bool(true), b.seq(b.assert_(e_bool(false)), b.ret(e_word(4, 1))),
                    b.ret(e_word(4, 2)));
  REQUIRE(tc_ok({}, a) == Ty::word(4));
  MemState g;
  auto r = next({}, g, a);
  REQUIRE(r.has_value());
  CHECK(r->first == Value::word(4, 2));
}

TEST_CASE("typecheck is deterministic") {
  MemEnv env = counter_env(4);
  Action a = counter_circuit(4);
  auto r1 = typecheck(env, a);
  auto r2 = typecheck(env, a);
  CHECK(std::get<Ty>(r1) == std::get<Ty>(r2));

  Builder b({});
  Action bad = b.ret(e_add(e_word(4, 1), e_word(8, 1)));
  CHECK(std::get<TypeError>(typecheck({}, bad)).message ==
        std::get<TypeError>(typecheck({}, bad)).message);
}

TEST_CASE("builder output always typechecks") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 300; ++i) {
    MemEnv env = testing::random_env(rng);
    Builder bld(env);
    testing::ProgramGen gen(rng, bld);
    Ty ty = (i % 2 == 0) ? Ty::word(4) : Ty::boolean();
    Action a = gen.gen_action(ty, 4);
    auto r = typecheck(env, a);
    if (auto* te = std::get_if<TypeError>(&r))
      FAIL("random builder program failed to typecheck: " << te->message);
    CHECK(std::get<Ty>(r) == ty);
  }
}

namespace {

void rename_expr(Expr& e, uint32_t mul, uint32_t add) {
  if (e.op == Expr::Op::Var) e.var.id = e.var.id * mul + add;
  for (auto& k : e.kids) rename_expr(k, mul, add);
}

void rename_action(Action& a, uint32_t mul, uint32_t add) {
  rename_expr(a.expr, mul, add);
  rename_expr(a.expr2, mul, add);
  if (a.op == Action::Op::Bind) a.binder.id = a.binder.id * mul + add;
  for (auto& k : a.kids) rename_action(k, mul, add);
}

}  // namespace

TEST_CASE("injective renaming of variables preserves the verdict") {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 100; ++i) {
    MemEnv env = testing::random_env(rng);
    Builder bld(env);
    testing::ProgramGen gen(rng, bld);
    Action a = gen.gen_action(Ty::word(4), 4);
    Action renamed = a;
    rename_action(renamed, 7, 3);  // injective on ids
    CHECK(typechecks(env, a) == typechecks(env, renamed));
  }

  // An ill-typed program stays ill-typed under renaming.
  Builder b({});
  Action bad = b.ret(e_add(e_word(4, 1), e_word(8, 1)));
  Action bad_renamed = bad;
  rename_action(bad_renamed, 7, 3);
  CHECK_FALSE(typechecks({}, bad_renamed));
}

TEST_CASE("action pretty printer is deterministic and total") {
  Action a = counter_circuit(4);
  CHECK(to_string(a) == to_string(a));
  CHECK_FALSE(to_string(a).empty());
  CHECK(to_string(hadd_circuit()).find("ret") != std::string::npos);
}
