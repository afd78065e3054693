#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "../support/corpus.hpp"
#include "fesi/pipeline.hpp"
#include "fesi/verilog.hpp"
#include "fesi/verilog_lint.hpp"

using namespace fesi;

namespace {

std::string emit_example(const MemEnv& env, const Action& a, const std::string& name) {
  CompiledStages st = compile_pipeline(env, a);
  return emit_verilog(env, st.final_block(), name);
}

std::string read_golden(const char* name) {
  std::ifstream in(std::string(FESI_GOLDEN_DIR) + "/" + name, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("flatten_width") {
  CHECK(flatten_width(Ty::unit()) == 0);
  CHECK(flatten_width(Ty::boolean()) == 1);
  CHECK(flatten_width(Ty::word(8)) == 8);
  CHECK(flatten_width(Ty::tuple({Ty::boolean(), Ty::word(3)})) == 4);
  CHECK(flatten_width(Ty::tuple({})) == 0);
  CHECK(flatten_width(Ty::tuple({Ty::unit(), Ty::word(5)})) == 5);
}

TEST_CASE("flatten/unflatten round trip") {
  Ty ty = Ty::tuple({Ty::boolean(), Ty::word(3), Ty::tuple({Ty::word(2), Ty::boolean()})});
  Value v = Value::tuple({Value::boolean(true), Value::word(3, 5),
                          Value::tuple({Value::word(2, 2), Value::boolean(false)})});
  std::vector<bool> bits;
  flatten_value(v, bits);
  REQUIRE(bits.size() == flatten_width(ty));
  uint64_t packed = 0;
  for (size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) packed |= uint64_t{1} << i;
  CHECK(value_from_flat_bits(ty, packed) == v);
}

TEST_CASE("emission is deterministic") {
  std::string a = emit_example(counter_env(4), counter_circuit(4), "counter_n4");
  std::string b = emit_example(counter_env(4), counter_circuit(4), "counter_n4");
  CHECK(a == b);
}

TEST_CASE("golden file: counter") {
  std::string text = emit_example(counter_env(4), counter_circuit(4), "counter_n4");
  CHECK(text == read_golden("counter_n4.v"));
}

TEST_CASE("golden file: sorter") {
  std::string text = emit_example(sorter_env(2, 4), sorter_circuit(2, 4), "sorter_n2_w4");
  CHECK(text == read_golden("sorter_n2_w4.v"));
}

TEST_CASE("a one-register circuit has exactly one clocked process") {
  std::string text = emit_example(counter_env(4), counter_circuit(4), "counter_n4");
  size_t count = 0;
  for (size_t pos = 0; (pos = text.find("always @(posedge clk)", pos)) != std::string::npos; ++pos)
    ++count;
  CHECK(count == 1);
  CHECK(text.find("r0 <=") != std::string::npos);
}

TEST_CASE("unit-valued circuits have no out port") {
  MemEnv env = {Mem::reg(Ty::word(4))};
  Builder b(env);
  Action a = b.reg_write(0, e_word(4, 1));
  CompiledStages st = compile_pipeline(env, a);
  std::string text = emit_verilog(env, st.final_block(), "writer");
  CHECK(text.find("output wire valid") != std::string::npos);
  CHECK(text.find("assign out") == std::string::npos);
  CHECK(text.find(" out\n") == std::string::npos);
  CHECK(verilog_lint(text).empty());
}

TEST_CASE("lint passes on every corpus module") {
  for (const auto& entry : fesi::testing::corpus()) {
    std::string text = emit_example(entry.env, entry.action, entry.name);
    auto problems = verilog_lint(text);
    for (const auto& p : problems) FAIL_CHECK(entry.name << ": " << p);
    CHECK(problems.empty());
  }
}

TEST_CASE("lint catches use before declaration and double assignment") {
  std::string bad =
      "module m(\n  input wire clk,\n  output wire valid\n);\n"
      "  assign valid = x0;\n"
      "  wire x0;\n"
      "  assign x0 = 1'b1;\n"
      "  assign x0 = 1'b0;\n"
      "endmodule\n";
  auto problems = verilog_lint(bad);
  REQUIRE(problems.size() >= 2);
}

TEST_CASE("emitted testbench is balanced and self-contained") {
  MemEnv env = counter_env(4);
  CompiledStages st = compile_pipeline(env, counter_circuit(4));
  std::string tb = emit_testbench(env, st.final_block(), "counter_n4", 8, 7);
  CHECK(tb.find("module counter_n4_tb;") != std::string::npos);
  CHECK(tb.find("endmodule") != std::string::npos);
  CHECK(tb.find("TESTBENCH PASS") != std::string::npos);
  // one dut instantiation wired to every port
  CHECK(tb.find(".clk(clk)") != std::string::npos);
  CHECK(tb.find(".in1(in1)") != std::string::npos);
}

TEST_CASE("projections that span their whole vector emit the bare wire") {
  // A one-element tuple flattens to the element width; slicing a scalar
  // wire would be illegal Verilog.
  MemEnv env = {Mem::input(Ty::tuple({Ty::boolean()}))};
  Builder b(env);
  Action a = b.bind(b.input_read(0),
                    [&](Var v) { return b.ret(e_proj(e_var(v), 0)); });
  CompiledStages st = compile_pipeline(env, a);
  std::string text = emit_verilog(env, st.final_block(), "unwrap");
  CHECK(text.find("[0:0]") == std::string::npos);
  CHECK(verilog_lint(text).empty());

  // mixed zero-width elements still slice at the right offsets
  MemEnv env2 = {Mem::input(Ty::tuple({Ty::unit(), Ty::word(3), Ty::boolean()}))};
  Builder b2(env2);
  Action a2 = b2.bind(b2.input_read(0),
                      [&](Var v) { return b2.ret(e_proj(e_var(v), 2)); });
  CompiledStages st2 = compile_pipeline(env2, a2);
  std::string text2 = emit_verilog(env2, st2.final_block(), "pick");
  CHECK(text2.find("[3:3]") != std::string::npos);
  CHECK(verilog_lint(text2).empty());
}

TEST_CASE("the backend refuses malformed blocks") {
  RtlBlock blk;  // empty: guard refers to an unbound variable
  blk.env = counter_env(4);
  blk.writes.resize(2);
  CHECK_THROWS_AS(emit_verilog(blk.env, blk, "broken"), std::invalid_argument);
}
