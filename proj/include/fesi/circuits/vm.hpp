#pragma once

// Specification-side stack machine: unbounded naturals and lists, one-step
// transition relation, plus the assembler for the fixed binary encoding the
// circuit consumes. Subtraction on naturals truncates at zero; the circuit
// refuses such steps instead, so the simulation harness only claims
// agreement for steps that stay in machine range.

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "fesi/types.hpp"

namespace fesi {

enum class VmOp : uint8_t {
  Const = 0,
  Var = 1,
  Setvar = 2,
  Add = 3,
  Sub = 4,
  Bfwd = 5,
  Bbwd = 6,
  BcondEq = 7,
  BcondNe = 8,
  BcondLe = 9,
  BcondGt = 10,
  Halt = 15,
};

struct VmInstr {
  VmOp op = VmOp::Halt;
  uint64_t arg = 0;

  bool operator==(const VmInstr&) const = default;
};

struct VmState {
  std::vector<VmInstr> code;
  uint64_t pc = 0;
  std::vector<uint64_t> stack;       // index 0 is the bottom, back() the top
  std::map<uint64_t, uint64_t> store;

  bool operator==(const VmState&) const = default;
};

// Store reads default to zero for identifiers that were never set; the
// circuit's register file starts zeroed, so the two encodings agree.
inline uint64_t vm_store_get(const VmState& s, uint64_t x) {
  auto it = s.store.find(x);
  return it == s.store.end() ? 0 : it->second;
}

// One step of the transition relation. Absent means no rule applies: halt,
// stack underflow, or the program counter outside the code.
inline std::optional<VmState> vm_step(const VmState& s) {
  if (s.pc >= s.code.size()) return std::nullopt;
  const VmInstr i = s.code[s.pc];
  VmState t = s;
  auto pop2 = [&](uint64_t& n1, uint64_t& n2) {
    n2 = t.stack.back();
    t.stack.pop_back();
    n1 = t.stack.back();
    t.stack.pop_back();
  };
  switch (i.op) {
    case VmOp::Const:
      t.stack.push_back(i.arg);
      t.pc = s.pc + 1;
      return t;
    case VmOp::Var:
      t.stack.push_back(vm_store_get(s, i.arg));
      t.pc = s.pc + 1;
      return t;
    case VmOp::Setvar: {
      if (s.stack.empty()) return std::nullopt;
      uint64_t v = t.stack.back();
      t.stack.pop_back();
      t.store[i.arg] = v;
      t.pc = s.pc + 1;
      return t;
    }
    case VmOp::Add: {
      if (s.stack.size() < 2) return std::nullopt;
      uint64_t n1, n2;
      pop2(n1, n2);
      t.stack.push_back(n1 + n2);
      t.pc = s.pc + 1;
      return t;
    }
    case VmOp::Sub: {
      if (s.stack.size() < 2) return std::nullopt;
      uint64_t n1, n2;
      pop2(n1, n2);
      t.stack.push_back(n1 >= n2 ? n1 - n2 : 0);  // natural subtraction
      t.pc = s.pc + 1;
      return t;
    }
    case VmOp::Bfwd:
      t.pc = s.pc + 1 + i.arg;
      return t;
    case VmOp::Bbwd:
      t.pc = s.pc + 1 >= i.arg ? s.pc + 1 - i.arg : 0;  // natural subtraction
      return t;
    case VmOp::BcondEq:
    case VmOp::BcondNe:
    case VmOp::BcondLe:
    case VmOp::BcondGt: {
      if (s.stack.size() < 2) return std::nullopt;
      uint64_t n1, n2;
      pop2(n1, n2);
      bool c = false;
      switch (i.op) {
        case VmOp::BcondEq: c = n1 == n2; break;
        case VmOp::BcondNe: c = n1 != n2; break;
        case VmOp::BcondLe: c = n1 <= n2; break;
        case VmOp::BcondGt: c = n1 > n2; break;
        default: break;
      }
      t.pc = c ? s.pc + 1 + i.arg : s.pc + 1;
      return t;
    }
    case VmOp::Halt:
      return std::nullopt;
  }
  return std::nullopt;
}

// Run until stuck or the step bound is hit; returns the final state.
inline VmState vm_run(VmState s, size_t max_steps) {
  for (size_t i = 0; i < max_steps; ++i) {
    auto t = vm_step(s);
    if (!t) break;
    s = std::move(*t);
  }
  return s;
}

// --- Binary encoding ------------------------------------------------------
// Opcodes occupy a 4-bit word, operands a machine word. Unused slots in the
// code memory are filled with halt by the loader, so a runaway program
// counter fetches halt and the machine stalls.

inline std::pair<uint64_t, uint64_t> encode_instr(const VmInstr& i) {
  return {static_cast<uint64_t>(i.op), i.arg};
}

inline std::optional<VmInstr> decode_instr(uint64_t op, uint64_t arg) {
  switch (op) {
    case 0: return VmInstr{VmOp::Const, arg};
    case 1: return VmInstr{VmOp::Var, arg};
    case 2: return VmInstr{VmOp::Setvar, arg};
    case 3: return VmInstr{VmOp::Add, arg};
    case 4: return VmInstr{VmOp::Sub, arg};
    case 5: return VmInstr{VmOp::Bfwd, arg};
    case 6: return VmInstr{VmOp::Bbwd, arg};
    case 7: return VmInstr{VmOp::BcondEq, arg};
    case 8: return VmInstr{VmOp::BcondNe, arg};
    case 9: return VmInstr{VmOp::BcondLe, arg};
    case 10: return VmInstr{VmOp::BcondGt, arg};
    case 15: return VmInstr{VmOp::Halt, arg};
    default: return std::nullopt;
  }
}

struct AsmError {
  size_t line = 0;
  std::string message;
};

// One instruction per line: `mnemonic [operand]`, with `#` comments and
// blank lines allowed. Operands must fit the machine word width.
inline std::variant<std::vector<VmInstr>, AsmError> assemble(const std::string& text,
                                                             int width) {
  static const std::map<std::string, std::pair<VmOp, bool>> table = {
      {"const", {VmOp::Const, true}},      {"var", {VmOp::Var, true}},
      {"setvar", {VmOp::Setvar, true}},    {"add", {VmOp::Add, false}},
      {"sub", {VmOp::Sub, false}},         {"bfwd", {VmOp::Bfwd, true}},
      {"bbwd", {VmOp::Bbwd, true}},        {"bcond_eq", {VmOp::BcondEq, true}},
      {"bcond_ne", {VmOp::BcondNe, true}}, {"bcond_le", {VmOp::BcondLe, true}},
      {"bcond_gt", {VmOp::BcondGt, true}}, {"halt", {VmOp::Halt, false}},
  };

  std::vector<VmInstr> out;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string mnemonic;
    if (!(ls >> mnemonic)) continue;  // blank or comment-only line
    auto it = table.find(mnemonic);
    if (it == table.end()) return AsmError{lineno, "unknown mnemonic '" + mnemonic + "'"};
    VmInstr instr{it->second.first, 0};
    if (it->second.second) {
      uint64_t arg;
      if (!(ls >> arg)) return AsmError{lineno, "missing operand for '" + mnemonic + "'"};
      if (arg > word_mask(width))
        return AsmError{lineno, "operand " + std::to_string(arg) + " does not fit int" +
                                    std::to_string(width)};
      instr.arg = arg;
    }
    std::string extra;
    if (ls >> extra) return AsmError{lineno, "trailing token '" + extra + "'"};
    out.push_back(instr);
  }
  return out;
}

}  // namespace fesi
