#pragma once

// Verilog-2001 backend: wires and continuous assignments for the telescope,
// one clocked process per register / register file with synchronous reset to
// zero, commits gated by (valid && write-enable). Tuples flatten to
// bit-vectors here and nowhere else; element 0 occupies the least
// significant bits.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fesi/random_state.hpp"
#include "fesi/rtl.hpp"
#include "fesi/types.hpp"

namespace fesi {

inline size_t flatten_width(const Ty& t) {
  switch (t.kind) {
    case Ty::Kind::Unit: return 0;
    case Ty::Kind::Bool: return 1;
    case Ty::Kind::Int: return static_cast<size_t>(t.width);
    case Ty::Kind::Tuple: {
      size_t w = 0;
      for (const auto& e : t.elems) w += flatten_width(e);
      return w;
    }
  }
  return 0;
}

// Flattened bits of a value, least significant first.
inline void flatten_value(const Value& v, std::vector<bool>& out) {
  switch (v.kind) {
    case Value::Kind::Unit: return;
    case Value::Kind::Bool: out.push_back(v.b); return;
    case Value::Kind::Word:
      for (int i = 0; i < v.width; ++i) out.push_back((v.bits >> i) & 1);
      return;
    case Value::Kind::Tuple:
      for (const auto& e : v.elems) flatten_value(e, out);
      return;
  }
}

// Inverse of flatten_value for types up to 64 flattened bits: rebuilds the
// structured value from a little-endian packed word.
inline Value value_from_flat_bits(const Ty& t, uint64_t bits) {
  switch (t.kind) {
    case Ty::Kind::Unit: return Value::unit();
    case Ty::Kind::Bool: return Value::boolean(bits & 1);
    case Ty::Kind::Int: return Value::word(t.width, bits);
    case Ty::Kind::Tuple: {
      std::vector<Value> elems;
      elems.reserve(t.elems.size());
      for (const auto& e : t.elems) {
        elems.push_back(value_from_flat_bits(e, bits));
        size_t w = flatten_width(e);
        bits = w >= 64 ? 0 : bits >> w;
      }
      return Value::tuple(std::move(elems));
    }
  }
  return Value::unit();
}

// Computed module interface: clk, rst, one port per nonzero-width input,
// a valid output for the guard, and an out port unless the result is
// zero-width.
struct PortSpec {
  struct Port {
    std::string name;
    size_t width = 0;
    size_t elem = 0;  // element index in the MemEnv
  };
  std::vector<Port> inputs;
  size_t out_width = 0;
};

inline PortSpec compute_ports(const MemEnv& env, const RtlBlock& b) {
  PortSpec ps;
  for (size_t i = 0; i < env.size(); ++i) {
    if (env[i].kind != Mem::Kind::Input) continue;
    size_t w = flatten_width(env[i].ty);
    if (w == 0) continue;
    ps.inputs.push_back({"in" + std::to_string(i), w, i});
  }
  ps.out_width = flatten_width(b.value.ty);
  return ps;
}

namespace detail {

inline std::string vrange(size_t width) {
  return "[" + std::to_string(width - 1) + ":0]";
}

inline std::string wire_name(const Var& v) { return "x" + std::to_string(v.id); }

// Bit offset of tuple element `index` inside the flattened parent.
inline size_t flat_offset(const Ty& tuple_ty, size_t index) {
  size_t off = 0;
  for (size_t i = 0; i < index; ++i) off += flatten_width(tuple_ty.elems[i]);
  return off;
}

inline std::string verilog_const(size_t width, uint64_t bits) {
  return std::to_string(width) + "'d" + std::to_string(bits);
}

inline std::string rtl_expr_verilog(const RtlExpr& e) {
  using Op = RtlExpr::Op;
  auto x = [&](size_t i) { return wire_name(e.args[i]); };
  switch (e.op) {
    case Op::Var: return x(0);
    case Op::ConstUnit: return "";  // zero-width, never emitted
    case Op::ConstBool: return e.bval ? "1'b1" : "1'b0";
    case Op::ConstWord: return verilog_const(static_cast<size_t>(e.width), e.bits);
    case Op::Input: return "in" + std::to_string(e.ref.index);
    case Op::ReadReg: return "r" + std::to_string(e.ref.index);
    case Op::ReadRegfile: return "rf" + std::to_string(e.ref.index) + "[" + x(0) + "]";
    case Op::Mux: return "(" + x(0) + " ? " + x(1) + " : " + x(2) + ")";
    case Op::And: return "(" + x(0) + " & " + x(1) + ")";
    case Op::Or: return "(" + x(0) + " | " + x(1) + ")";
    case Op::Xor: return "(" + x(0) + " ^ " + x(1) + ")";
    case Op::Not: return "(~" + x(0) + ")";
    case Op::Add: return "(" + x(0) + " + " + x(1) + ")";
    case Op::Sub: return "(" + x(0) + " - " + x(1) + ")";
    case Op::Eq: return "(" + x(0) + " == " + x(1) + ")";
    case Op::Le: return "(" + x(0) + " <= " + x(1) + ")";
    case Op::Lt: return "(" + x(0) + " < " + x(1) + ")";
    case Op::MkTuple: {
      // Concatenation lists the most significant part first, so tuple
      // elements appear in reverse; zero-width elements vanish.
      std::vector<std::string> parts;
      for (size_t i = e.args.size(); i-- > 0;) {
        if (flatten_width(e.args[i].ty) == 0) continue;
        parts.push_back(x(i));
      }
      if (parts.empty()) return "";
      if (parts.size() == 1) return parts[0];
      std::string s = "{";
      for (size_t i = 0; i < parts.size(); ++i) {
        if (i) s += ", ";
        s += parts[i];
      }
      return s + "}";
    }
    case Op::Proj: {
      const Ty& tt = e.args[0].ty;
      size_t off = flat_offset(tt, e.proj_index);
      size_t w = flatten_width(tt.elems[e.proj_index]);
      if (w == 0) return "";
      // A slice covering the whole vector must be the bare name: scalar
      // wires (width 1) cannot be bit-selected.
      if (w == flatten_width(tt)) return x(0);
      return x(0) + "[" + std::to_string(off + w - 1) + ":" + std::to_string(off) + "]";
    }
  }
  return "";
}

}  // namespace detail

// Emit a synthesizable module for the block. Deterministic: identical
// inputs give byte-identical text. Refuses blocks that fail the structural
// checks.
inline std::string emit_verilog(const MemEnv& env, const RtlBlock& b,
                                const std::string& module_name) {
  if (!rtl_well_formed(b))
    throw std::invalid_argument("emit_verilog: block fails structural invariants");
  PortSpec ports = compute_ports(env, b);

  std::string v;
  v += "// " + module_name + ": generated register-transfer code.\n";
  v += "// Tuple values are packed little-endian: element 0 at the LSB.\n";
  v += "// Registers reset synchronously to zero; commits happen on the rising\n";
  v += "// clock edge when valid and the per-element write-enable are high.\n";
  v += "module " + module_name + "(\n";
  v += "  input wire clk,\n";
  v += "  input wire rst";
  for (const auto& p : ports.inputs) {
    v += ",\n  input wire ";
    if (p.width > 1) v += detail::vrange(p.width) + " ";
    v += p.name;
  }
  v += ",\n  output wire valid";
  if (ports.out_width > 0) {
    v += ",\n  output wire ";
    if (ports.out_width > 1) v += detail::vrange(ports.out_width) + " ";
    v += "out";
  }
  v += "\n);\n\n";

  // State declarations first so every later reference is declared above.
  for (size_t i = 0; i < env.size(); ++i) {
    const Mem& m = env[i];
    size_t w = flatten_width(m.ty);
    if (w == 0 || m.kind == Mem::Kind::Input) continue;
    if (m.kind == Mem::Kind::Reg) {
      v += "  reg ";
      if (w > 1) v += detail::vrange(w) + " ";
      v += "r" + std::to_string(i) + ";\n";
    } else {
      v += "  reg ";
      if (w > 1) v += detail::vrange(w) + " ";
      v += "rf" + std::to_string(i) + " [0:" + std::to_string(m.entries() - 1) + "];\n";
      v += "  integer i" + std::to_string(i) + ";\n";
    }
  }
  v += "\n";

  for (const auto& bind : b.bindings) {
    size_t w = flatten_width(bind.var.ty);
    if (w == 0) continue;
    v += "  wire ";
    if (w > 1) v += detail::vrange(w) + " ";
    v += detail::wire_name(bind.var) + ";\n";
  }
  v += "\n";

  for (const auto& bind : b.bindings) {
    if (flatten_width(bind.var.ty) == 0) continue;
    v += "  assign " + detail::wire_name(bind.var) + " = " +
         detail::rtl_expr_verilog(bind.expr) + ";\n";
  }
  v += "\n";
  v += "  assign valid = " + detail::wire_name(b.guard) + ";\n";
  if (ports.out_width > 0) v += "  assign out = " + detail::wire_name(b.value) + ";\n";
  v += "\n";

  for (size_t i = 0; i < env.size(); ++i) {
    const Mem& m = env[i];
    size_t w = flatten_width(m.ty);
    if (w == 0 || m.kind == Mem::Kind::Input) continue;
    const std::optional<RtlWrite>& wr = b.writes[i];
    if (m.kind == Mem::Kind::Reg) {
      std::string name = "r" + std::to_string(i);
      v += "  always @(posedge clk) begin\n";
      v += "    if (rst) begin\n";
      v += "      " + name + " <= " + detail::verilog_const(w, 0) + ";\n";
      if (wr) {
        v += "    end else if (valid && " + detail::wire_name(wr->enable) + ") begin\n";
        v += "      " + name + " <= " + detail::wire_name(wr->data) + ";\n";
      }
      v += "    end\n";
      v += "  end\n\n";
    } else {
      std::string name = "rf" + std::to_string(i);
      std::string idx = "i" + std::to_string(i);
      v += "  always @(posedge clk) begin\n";
      v += "    if (rst) begin\n";
      v += "      for (" + idx + " = 0; " + idx + " < " + std::to_string(m.entries()) + "; " +
           idx + " = " + idx + " + 1) begin\n";
      v += "        " + name + "[" + idx + "] <= " + detail::verilog_const(w, 0) + ";\n";
      v += "      end\n";
      if (wr) {
        v += "    end else if (valid && " + detail::wire_name(wr->enable) + ") begin\n";
        v += "      " + name + "[" + detail::wire_name(*wr->addr) + "] <= " +
             detail::wire_name(wr->data) + ";\n";
      }
      v += "    end\n";
      v += "  end\n\n";
    }
  }

  v += "endmodule\n";
  return v;
}

namespace detail {

inline std::string verilog_literal(const Value& v) {
  std::vector<bool> bits;
  flatten_value(v, bits);
  std::string s = std::to_string(bits.size()) + "'b";
  for (size_t i = bits.size(); i-- > 0;) s += bits[i] ? '1' : '0';
  return s;
}

}  // namespace detail

// Self-checking testbench: drives seeded random inputs for the requested
// cycle count and compares valid/out each cycle against this simulator's
// own prediction starting from the all-zero reset state. Intended for
// cross-checking with an external Verilog simulator; not part of the test
// suite here.
inline std::string emit_testbench(const MemEnv& env, const RtlBlock& b,
                                  const std::string& module_name, size_t cycles,
                                  uint64_t seed) {
  PortSpec ports = compute_ports(env, b);
  std::mt19937_64 rng(seed);

  std::string v;
  v += "// Self-checking bench for " + module_name + " (seed " + std::to_string(seed) + ").\n";
  v += "`timescale 1ns/1ns\n";
  v += "module " + module_name + "_tb;\n";
  v += "  reg clk = 1'b0;\n";
  v += "  reg rst = 1'b1;\n";
  for (const auto& p : ports.inputs) {
    v += "  reg ";
    if (p.width > 1) v += detail::vrange(p.width) + " ";
    v += p.name + " = " + detail::verilog_const(p.width, 0) + ";\n";
  }
  v += "  wire valid;\n";
  if (ports.out_width > 0) {
    v += "  wire ";
    if (ports.out_width > 1) v += detail::vrange(ports.out_width) + " ";
    v += "out;\n";
  }
  v += "  " + module_name + " dut(.clk(clk), .rst(rst)";
  for (const auto& p : ports.inputs) v += ", ." + p.name + "(" + p.name + ")";
  v += ", .valid(valid)";
  if (ports.out_width > 0) v += ", .out(out)";
  v += ");\n";
  v += "  initial begin\n";
  v += "    #1 clk = 1'b1; #1 clk = 1'b0;\n";  // reset edge
  v += "    rst = 1'b0;\n";

  MemState gamma = initial_state(env);
  for (size_t c = 0; c < cycles; ++c) {
    for (const auto& p : ports.inputs) {
      Value in = random_value(rng, env[p.elem].ty);
      gamma.cells[p.elem].one = in;
      v += "    " + p.name + " = " + detail::verilog_literal(in) + ";\n";
    }
    v += "    #1;\n";
    auto r = rtl_next(gamma, b);
    std::string cyc = std::to_string(c);
    if (r) {
      v += "    if (valid !== 1'b1) begin $display(\"FAIL cycle " + cyc +
           ": expected valid\"); $finish; end\n";
      if (ports.out_width > 0) {
        v += "    if (out !== " + detail::verilog_literal(r->first) +
             ") begin $display(\"FAIL cycle " + cyc + ": out mismatch\"); $finish; end\n";
      }
      gamma = r->second;
    } else {
      v += "    if (valid !== 1'b0) begin $display(\"FAIL cycle " + cyc +
           ": expected abort\"); $finish; end\n";
    }
    v += "    #1 clk = 1'b1; #1 clk = 1'b0;\n";
  }
  v += "    $display(\"TESTBENCH PASS\");\n";
  v += "    $finish;\n";
  v += "  end\n";
  v += "endmodule\n";
  return v;
}

}  // namespace fesi
