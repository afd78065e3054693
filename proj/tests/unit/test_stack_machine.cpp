#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <random>
#include <sstream>

#include "fesi/circuits/stack_machine.hpp"
#include "fesi/circuits/vm.hpp"
#include "fesi/pipeline.hpp"
#include "fesi/sem.hpp"
#include "fesi/typecheck.hpp"

using namespace fesi;

namespace {

std::string read_program(const char* name) {
  std::ifstream in(std::string(FESI_PROGRAMS_DIR) + "/" + name);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<VmInstr> assemble_ok(const std::string& text, int width) {
  auto r = assemble(text, width);
  if (auto* err = std::get_if<AsmError>(&r))
    FAIL("assembly failed at line " << err->line << ": " << err->message);
  return std::get<std::vector<VmInstr>>(r);
}

}  // namespace

TEST_CASE("transition relation literals") {
  // const pushes and advances
  VmState s;
  s.code = {{VmOp::Const, 7}};
  auto t = vm_step(s);
  REQUIRE(t.has_value());
  CHECK(t->pc == 1);
  CHECK(t->stack == std::vector<uint64_t>{7});

  // add pops 4 (top) and 3, pushes 7
  VmState s2;
  s2.code = {{VmOp::Add, 0}};
  s2.stack = {3, 4};
  auto t2 = vm_step(s2);
  REQUIRE(t2.has_value());
  CHECK(t2->stack == std::vector<uint64_t>{7});

  // sub is natural subtraction in the specification machine
  VmState s3;
  s3.code = {{VmOp::Sub, 0}};
  s3.stack = {3, 4};
  auto t3 = vm_step(s3);
  REQUIRE(t3.has_value());
  CHECK(t3->stack == std::vector<uint64_t>{0});

  // halt has no reduction
  VmState s4;
  s4.code = {{VmOp::Halt, 0}};
  CHECK_FALSE(vm_step(s4).has_value());

  // stack underflow has no reduction
  VmState s5;
  s5.code = {{VmOp::Add, 0}};
  s5.stack = {1};
  CHECK_FALSE(vm_step(s5).has_value());

  // pc outside the code has no reduction
  VmState s6;
  s6.code = {{VmOp::Const, 1}};
  s6.pc = 5;
  CHECK_FALSE(vm_step(s6).has_value());

  // setvar pops into the store
  VmState s7;
  s7.code = {{VmOp::Setvar, 3}};
  s7.stack = {9};
  auto t7 = vm_step(s7);
  REQUIRE(t7.has_value());
  CHECK(t7->stack.empty());
  CHECK(t7->store.at(3) == 9);

  // bcond pops both operands and branches on the condition
  VmState s8;
  s8.code = {{VmOp::BcondLe, 5}};
  s8.stack = {2, 3};
  auto t8 = vm_step(s8);
  REQUIRE(t8.has_value());
  CHECK(t8->pc == 6);  // 2 <= 3, taken
  CHECK(t8->stack.empty());
  s8.code = {{VmOp::BcondGt, 5}};
  auto t9 = vm_step(s8);
  REQUIRE(t9.has_value());
  CHECK(t9->pc == 1);  // 2 > 3 is false, fall through

  // var pushes the store value, defaulting to zero
  VmState s10;
  s10.code = {{VmOp::Var, 6}};
  s10.store[6] = 11;
  auto t10 = vm_step(s10);
  REQUIRE(t10.has_value());
  CHECK(t10->stack == std::vector<uint64_t>{11});
  s10.store.clear();
  CHECK(vm_step(s10)->stack == std::vector<uint64_t>{0});

  // branches move pc by 1 +/- delta; backward saturates at zero
  VmState s11;
  s11.code = {{VmOp::Bfwd, 3}};
  CHECK(vm_step(s11)->pc == 4);
  s11.code = {{VmOp::Bbwd, 7}};
  CHECK(vm_step(s11)->pc == 0);
}

TEST_CASE("assembler: frozen encoding and round trips") {
  auto prog = assemble_ok("const 7", 8);
  REQUIRE(prog.size() == 1);
  CHECK(encode_instr(prog[0]) == std::make_pair(uint64_t{0}, uint64_t{7}));

  auto halt = assemble_ok("halt", 8);
  CHECK(encode_instr(halt[0]) == std::make_pair(uint64_t{15}, uint64_t{0}));

  // decode(encode(i)) == i for every instruction kind
  for (VmOp op : {VmOp::Const, VmOp::Var, VmOp::Setvar, VmOp::Add, VmOp::Sub, VmOp::Bfwd,
                  VmOp::Bbwd, VmOp::BcondEq, VmOp::BcondNe, VmOp::BcondLe, VmOp::BcondGt,
                  VmOp::Halt}) {
    VmInstr i{op, 13};
    auto [o, a] = encode_instr(i);
    auto back = decode_instr(o, a);
    REQUIRE(back.has_value());
    CHECK(*back == i);
  }

  // invalid opcodes do not decode
  CHECK_FALSE(decode_instr(11, 0).has_value());
  CHECK_FALSE(decode_instr(14, 0).has_value());
}

TEST_CASE("assembler error paths") {
  auto bad = assemble("frobnicate 1", 8);
  REQUIRE(std::holds_alternative<AsmError>(bad));
  CHECK(std::get<AsmError>(bad).line == 1);

  auto overflow = assemble("const 256", 8);
  REQUIRE(std::holds_alternative<AsmError>(overflow));

  auto missing = assemble("const", 8);
  REQUIRE(std::holds_alternative<AsmError>(missing));

  auto comments = assemble_ok("# header\n\nconst 1 # trailing\nhalt\n", 8);
  CHECK(comments.size() == 2);
}

TEST_CASE("the machine action typechecks") {
  for (int n : {2, 4, 8}) CHECK(typechecks(stack_machine_env(n), stack_machine_circuit(n)));
  CHECK_THROWS_AS(stack_machine_env(1), std::invalid_argument);
  CHECK_THROWS_AS(stack_machine_env(17), std::invalid_argument);
}

namespace {

struct Machine {
  int n;
  MemEnv env;
  CompiledStages stages;
  Machine(int n_) : n(n_), env(stack_machine_env(n_)),
                    stages(compile_pipeline(env, stack_machine_circuit(n_))) {}

  std::optional<MemState> step(const MemState& m) const {
    auto r = rtl_next(m, stages.final_block());
    if (!r) return std::nullopt;
    return r->second;
  }
};

}  // namespace

TEST_CASE("setvar handler: pops, stores, advances") {
  Machine mach(8);
  std::vector<VmInstr> prog = {{VmOp::Setvar, 3}};
  MemState m = load_program(8, prog);
  m.cells[kSmSp].one = Value::word(8, 1);
  m.cells[kSmStack].arr[0] = Value::word(8, 42);
  auto m2 = mach.step(m);
  REQUIRE(m2.has_value());
  CHECK(m2->cells[kSmStore].arr[3] == Value::word(8, 42));
  CHECK(m2->cells[kSmSp].one == Value::word(8, 0));
  CHECK(m2->cells[kSmPc].one == Value::word(8, 1));
}

TEST_CASE("pop from an empty stack stalls the machine") {
  Machine mach(8);
  std::vector<VmInstr> prog = {{VmOp::Setvar, 0}};
  MemState m = load_program(8, prog);
  auto r = rtl_next(m, mach.stages.final_block());
  CHECK_FALSE(r.has_value());  // state held
}

TEST_CASE("halt stalls forever") {
  Machine mach(8);
  MemState m = load_program(8, {{VmOp::Halt, 0}});
  CHECK_FALSE(mach.step(m).has_value());
  CHECK_FALSE(mach.step(m).has_value());
}

TEST_CASE("stack overflow stalls instead of wrapping") {
  Machine mach(2);  // capacity 3 entries
  MemState m = load_program(2, {{VmOp::Const, 1}});
  m.cells[kSmSp].one = Value::word(2, 3);
  CHECK_FALSE(mach.step(m).has_value());
}

TEST_CASE("fresh load is related; mismatched pc is not") {
  std::vector<VmInstr> prog = assemble_ok(read_program("fibonacci.asm"), 8);
  VmState s;
  s.code = prog;
  MemState m = load_program(8, prog);
  CHECK(states_related(s, m, 8));
  m.cells[kSmPc].one = Value::word(8, 1);
  CHECK_FALSE(states_related(s, m, 8));
}

TEST_CASE("one in-bounds step preserves the relation") {
  Machine mach(8);
  std::vector<VmInstr> prog = assemble_ok(read_program("fibonacci.asm"), 8);
  VmState s;
  s.code = prog;
  MemState m = load_program(8, prog);
  auto s2 = vm_step(s);
  REQUIRE(s2.has_value());
  REQUIRE(step_in_machine_bounds(s, 8));
  auto m2 = mach.step(m);
  REQUIRE(m2.has_value());
  CHECK(states_related(*s2, *m2, 8));
}

TEST_CASE("fibonacci: specification machine and circuit both compute 55") {
  std::vector<VmInstr> prog = assemble_ok(read_program("fibonacci.asm"), 8);

  VmState s;
  s.code = prog;
  VmState final_s = vm_run(s, 1000);
  CHECK(vm_store_get(final_s, 0) == 55);

  Machine mach(8);
  MemState m = load_program(8, prog);
  for (int i = 0; i < 1000; ++i) {
    auto m2 = mach.step(m);
    if (!m2) break;
    m = std::move(*m2);
  }
  CHECK(m.cells[kSmStore].arr[0] == Value::word(8, 55));
}

TEST_CASE("lockstep simulation over the sample programs") {
  Machine mach(8);
  for (const char* name : {"fibonacci.asm", "arith.asm"}) {
    std::vector<VmInstr> prog = assemble_ok(read_program(name), 8);
    VmState s;
    s.code = prog;
    MemState m = load_program(8, prog);
    REQUIRE(states_related(s, m, 8));
    for (int step = 0; step < 1000; ++step) {
      auto s2 = vm_step(s);
      if (!s2) break;
      if (!step_in_machine_bounds(s, 8)) break;
      auto m2 = mach.step(m);
      REQUIRE(m2.has_value());
      REQUIRE(states_related(*s2, *m2, 8));
      s = std::move(*s2);
      m = std::move(*m2);
    }
  }
}
