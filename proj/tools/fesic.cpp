// fesic: batch driver over the built-in circuit generators.
//
//   compile   — run the pass pipeline and write Verilog (plus stage dumps)
//   difftest  — random-state differential test of every pass boundary
//   simulate  — clock the source interpreter over an input trace
//   stats     — binding counts after each stage
//
// Exit codes: 0 pass, 1 semantic failure (difftest divergence), 2 usage.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "fesi/circuits/basic.hpp"
#include "fesi/circuits/sorter.hpp"
#include "fesi/circuits/stack_machine.hpp"
#include "fesi/circuits/vm.hpp"
#include "fesi/difftest.hpp"
#include "fesi/pipeline.hpp"
#include "fesi/sem.hpp"
#include "fesi/verilog.hpp"

namespace {

struct JobConfig {
  std::string example;
  int n = 4;
  int width = 8;
  bool no_cse = false;
  bool no_bdd = false;
  uint64_t seed = 1;
  size_t trials = 1000;
  std::string output;
  std::string dump_stage;
  std::string module_name;
  std::string trace_file;
  std::string program_file;
  std::string testbench_file;
  size_t cycles = 0;
  size_t tb_cycles = 16;
  std::vector<std::string> watches;
};

struct ExampleCircuit {
  fesi::MemEnv env;
  fesi::Action action;
  std::string default_name;
};

// Throws std::invalid_argument on out-of-range parameters.
ExampleCircuit make_example(const JobConfig& cfg) {
  using namespace fesi;
  if (cfg.example == "hadd") {
    return {hadd_env(), hadd_circuit(), "hadd"};
  }
  if (cfg.example == "counter") {
    if (cfg.n < 1 || cfg.n > 64)
      throw std::invalid_argument("counter: --n must be in [1,64]");
    return {counter_env(cfg.n), counter_circuit(cfg.n),
            "counter_n" + std::to_string(cfg.n)};
  }
  if (cfg.example == "sorter") {
    if (cfg.n < 1 || cfg.n > 6)
      throw std::invalid_argument("sorter: --n must be in [1,6]");
    if (cfg.width < 1 || cfg.width > 64)
      throw std::invalid_argument("sorter: --width must be in [1,64]");
    return {sorter_env(cfg.n, cfg.width), sorter_circuit(cfg.n, cfg.width),
            "sorter_n" + std::to_string(cfg.n) + "_w" + std::to_string(cfg.width)};
  }
  if (cfg.example == "stackmachine") {
    if (cfg.n < 2 || cfg.n > 16)
      throw std::invalid_argument("stackmachine: --n must be in [2,16]");
    return {stack_machine_env(cfg.n), stack_machine_circuit(cfg.n),
            "stack_machine_n" + std::to_string(cfg.n)};
  }
  throw std::invalid_argument("unknown example '" + cfg.example +
                              "' (expected sorter|stackmachine|counter|hadd)");
}

fesi::PipelineOptions pipeline_options(const JobConfig& cfg) {
  fesi::PipelineOptions opts;
  opts.run_cse = !cfg.no_cse;
  opts.run_bdd = !cfg.no_bdd;
  return opts;
}

int cmd_compile(const JobConfig& cfg) {
  ExampleCircuit ex = make_example(cfg);
  fesi::CompiledStages stages = fesi::compile_pipeline(ex.env, ex.action, pipeline_options(cfg));

  if (!cfg.dump_stage.empty()) {
    if (cfg.dump_stage == "ir") {
      std::cout << fesi::to_string(stages.ir);
    } else if (cfg.dump_stage == "rtl") {
      std::cout << fesi::to_string(stages.rtl);
    } else if (cfg.dump_stage == "cse") {
      if (!stages.after_cse) throw std::invalid_argument("--dump cse with CSE disabled");
      std::cout << fesi::to_string(*stages.after_cse);
    } else if (cfg.dump_stage == "bdd") {
      if (!stages.after_bdd) throw std::invalid_argument("--dump bdd with BDD disabled");
      std::cout << fesi::to_string(*stages.after_bdd);
    } else {
      throw std::invalid_argument("unknown dump stage '" + cfg.dump_stage +
                                  "' (expected ir|rtl|cse|bdd)");
    }
  }

  std::string module = cfg.module_name.empty() ? ex.default_name : cfg.module_name;
  std::string text = fesi::emit_verilog(ex.env, stages.final_block(), module);
  if (!cfg.output.empty()) {
    std::ofstream out(cfg.output, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open output file " + cfg.output);
    out << text;
  } else if (cfg.dump_stage.empty()) {
    std::cout << text;
  }

  if (!cfg.testbench_file.empty()) {
    std::ofstream tb(cfg.testbench_file, std::ios::binary);
    if (!tb) throw std::invalid_argument("cannot open testbench file " + cfg.testbench_file);
    tb << fesi::emit_testbench(ex.env, stages.final_block(), module, cfg.tb_cycles, cfg.seed);
  }
  return 0;
}

int cmd_difftest(const JobConfig& cfg) {
  ExampleCircuit ex = make_example(cfg);
  fesi::CompiledStages stages = fesi::compile_pipeline(ex.env, ex.action, pipeline_options(cfg));
  fesi::DifftestOptions opts;
  opts.trials = cfg.trials;
  opts.seed = cfg.seed;
  fesi::DifftestReport report = fesi::difftest_stages(ex.env, ex.action, stages, opts);
  std::cout << ex.default_name << " " << fesi::format_report(ex.env, report);
  return report.pass ? 0 : 1;
}

std::vector<std::vector<fesi::Value>> parse_trace(const JobConfig& cfg, const fesi::MemEnv& env,
                                                  size_t cycles) {
  std::vector<size_t> inputs;
  for (size_t i = 0; i < env.size(); ++i)
    if (env[i].kind == fesi::Mem::Kind::Input) inputs.push_back(i);

  std::vector<std::vector<fesi::Value>> traces(inputs.size());
  if (inputs.empty()) return traces;
  if (cfg.trace_file.empty())
    throw std::invalid_argument("this example has inputs; provide --trace FILE");

  for (size_t i : inputs)
    if (fesi::flatten_width(env[i].ty) > 64)
      throw std::invalid_argument("trace input wider than 64 bits is not supported");

  std::ifstream in(cfg.trace_file);
  if (!in) throw std::invalid_argument("cannot open trace file " + cfg.trace_file);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::vector<uint64_t> vals;
    uint64_t v;
    while (ls >> v) vals.push_back(v);
    if (vals.empty()) continue;
    if (vals.size() != inputs.size())
      throw std::invalid_argument("trace line " + std::to_string(lineno) + ": expected " +
                                  std::to_string(inputs.size()) + " values, got " +
                                  std::to_string(vals.size()));
    for (size_t k = 0; k < inputs.size(); ++k) {
      const fesi::Ty& ty = env[inputs[k]].ty;
      size_t w = fesi::flatten_width(ty);
      if (w < 64 && vals[k] >= (uint64_t{1} << w))
        throw std::invalid_argument("trace line " + std::to_string(lineno) + ": value " +
                                    std::to_string(vals[k]) + " does not fit " +
                                    std::to_string(w) + " bits");
      traces[k].push_back(fesi::value_from_flat_bits(ty, vals[k]));
    }
  }
  for (const auto& tr : traces)
    if (tr.size() < cycles)
      throw std::invalid_argument("trace covers " + std::to_string(traces[0].size()) +
                                  " cycles, need " + std::to_string(cycles));
  return traces;
}

struct Watch {
  size_t elem;
  std::optional<uint64_t> addr;
};

std::vector<Watch> parse_watches(const JobConfig& cfg, const fesi::MemEnv& env) {
  std::vector<Watch> out;
  for (const std::string& spec : cfg.watches) {
    Watch w{0, std::nullopt};
    size_t colon = spec.find(':');
    try {
      w.elem = std::stoul(spec.substr(0, colon));
      if (colon != std::string::npos) w.addr = std::stoull(spec.substr(colon + 1));
    } catch (const std::exception&) {
      throw std::invalid_argument("bad --watch '" + spec + "' (expected ELEM or ELEM:ADDR)");
    }
    if (w.elem >= env.size())
      throw std::invalid_argument("--watch element " + std::to_string(w.elem) + " out of range");
    bool is_rf = env[w.elem].kind == fesi::Mem::Kind::Regfile;
    if (is_rf != w.addr.has_value())
      throw std::invalid_argument("--watch '" + spec + "': register files need ELEM:ADDR, " +
                                  "registers and inputs plain ELEM");
    if (w.addr && *w.addr >= env[w.elem].entries())
      throw std::invalid_argument("--watch '" + spec + "': address out of range");
    out.push_back(w);
  }
  return out;
}

int cmd_simulate(const JobConfig& cfg) {
  ExampleCircuit ex = make_example(cfg);

  fesi::MemState gamma = fesi::initial_state(ex.env);
  if (cfg.example == "stackmachine") {
    if (cfg.program_file.empty())
      throw std::invalid_argument("stackmachine simulation needs --program FILE");
    std::ifstream in(cfg.program_file);
    if (!in) throw std::invalid_argument("cannot open program file " + cfg.program_file);
    std::stringstream ss;
    ss << in.rdbuf();
    auto assembled = fesi::assemble(ss.str(), cfg.n);
    if (auto* err = std::get_if<fesi::AsmError>(&assembled))
      throw std::invalid_argument(cfg.program_file + ":" + std::to_string(err->line) + ": " +
                                  err->message);
    gamma = fesi::load_program(cfg.n, std::get<std::vector<fesi::VmInstr>>(assembled));
  } else if (!cfg.program_file.empty()) {
    throw std::invalid_argument("--program only applies to the stackmachine example");
  }

  auto traces = parse_trace(cfg, ex.env, cfg.cycles);
  auto watches = parse_watches(cfg, ex.env);

  auto rows = fesi::simulate(ex.env, gamma, ex.action, traces, cfg.cycles);
  for (size_t c = 0; c < rows.size(); ++c) {
    const auto& [out, st] = rows[c];
    std::cout << "cycle " << c << ": valid=" << (out ? 1 : 0);
    if (out) std::cout << " out=" << fesi::to_string(*out);
    for (const auto& w : watches) {
      std::cout << " [" << w.elem;
      if (w.addr) std::cout << ":" << *w.addr;
      std::cout << "]=";
      const auto& cell = st.cells[w.elem];
      std::cout << fesi::to_string(w.addr ? cell.arr[*w.addr] : cell.one);
    }
    std::cout << "\n";
  }
  return 0;
}

int cmd_stats(const JobConfig& cfg) {
  ExampleCircuit ex = make_example(cfg);
  fesi::CompiledStages stages = fesi::compile_pipeline(ex.env, ex.action, pipeline_options(cfg));
  fesi::StageStats st = fesi::stage_stats(stages);
  std::cout << ex.default_name << " bindings per stage:\n";
  std::cout << "  ir   " << st.ir_bindings << "\n";
  std::cout << "  rtl  " << st.rtl_bindings << "\n";
  if (st.cse_bindings) std::cout << "  cse  " << *st.cse_bindings << "\n";
  if (st.bdd_bindings) std::cout << "  bdd  " << *st.bdd_bindings << "\n";
  if (st.bdd_bindings) {
    std::cout << "bdd store: " << stages.bdd_stats.store_nodes << " nodes, "
              << stages.bdd_stats.bindings_eliminated << " bindings eliminated, "
              << stages.bdd_stats.constants_folded << " folded to constants\n";
  }
  return 0;
}

void add_example_options(CLI::App* cmd, JobConfig& cfg) {
  cmd->add_option("--example", cfg.example, "sorter|stackmachine|counter|hadd")->required();
  cmd->add_option("--n", cfg.n, "size parameter (depth / register width / machine width)");
  cmd->add_option("--width", cfg.width, "word width (sorter)");
  cmd->add_flag("--no-cse", cfg.no_cse, "disable the CSE pass");
  cmd->add_flag("--no-bdd", cfg.no_bdd, "disable the BDD simplification pass");
  cmd->add_option("--seed", cfg.seed, "random seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fesic: guarded-atomic-action circuit compiler and test driver"};
  app.require_subcommand(1);

  JobConfig cfg;

  CLI::App* compile = app.add_subcommand("compile", "compile an example to Verilog");
  add_example_options(compile, cfg);
  compile->add_option("-o,--output", cfg.output, "Verilog output file");
  compile->add_option("--dump", cfg.dump_stage, "print a stage dump: ir|rtl|cse|bdd");
  compile->add_option("--module", cfg.module_name, "module name override");
  compile->add_option("--emit-testbench", cfg.testbench_file, "write a self-checking testbench");
  compile->add_option("--tb-cycles", cfg.tb_cycles, "testbench cycle count");

  CLI::App* difftest = app.add_subcommand("difftest", "differential test of all pass boundaries");
  add_example_options(difftest, cfg);
  difftest->add_option("--trials", cfg.trials, "number of random states");

  CLI::App* simulate = app.add_subcommand("simulate", "run the source interpreter over a trace");
  add_example_options(simulate, cfg);
  simulate->add_option("--cycles", cfg.cycles, "number of cycles")->required();
  simulate->add_option("--trace", cfg.trace_file, "input trace: one line per cycle");
  simulate->add_option("--program", cfg.program_file, "assembly program (stackmachine)");
  simulate->add_option("--watch", cfg.watches, "memory location to print: ELEM or ELEM:ADDR");

  CLI::App* stats = app.add_subcommand("stats", "binding counts per pipeline stage");
  add_example_options(stats, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // usage problems exit 2; --help exits 0
  }

  try {
    if (compile->parsed()) return cmd_compile(cfg);
    if (difftest->parsed()) return cmd_difftest(cfg);
    if (simulate->parsed()) return cmd_simulate(cfg);
    if (stats->parsed()) return cmd_stats(cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
