#pragma once

// Circuit types, memory-element declarations, runtime values, machine state
// and pending-update sets. Everything here is a plain immutable value; the
// rest of the toolchain is pure functions over these.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fesi {

// Reified circuit types. Int widths are capped at 64 so words fit in one
// machine word; all word arithmetic is modular in 2^width.
struct Ty {
  enum class Kind { Unit, Bool, Int, Tuple };

  Kind kind = Kind::Unit;
  int width = 0;          // Int only, 1..64
  std::vector<Ty> elems;  // Tuple only; may be empty

  static Ty unit() { return Ty{}; }
  static Ty boolean() { return Ty{Kind::Bool, 0, {}}; }
  static Ty word(int width) {
    if (width < 1 || width > 64) throw std::invalid_argument("Ty::word: width must be in [1,64]");
    return Ty{Kind::Int, width, {}};
  }
  static Ty tuple(std::vector<Ty> elems) { return Ty{Kind::Tuple, 0, std::move(elems)}; }

  bool operator==(const Ty&) const = default;
};

// The three kinds of memory elements. A register file with address width n
// holds exactly 2^n entries. Inputs are read-only from inside the circuit;
// their value is driven by the outside world.
struct Mem {
  enum class Kind { Input, Reg, Regfile };

  Kind kind = Kind::Reg;
  Ty ty;
  int addr_width = 0;  // Regfile only, 1..16 in practice

  static Mem input(Ty t) { return Mem{Kind::Input, std::move(t), 0}; }
  static Mem reg(Ty t) { return Mem{Kind::Reg, std::move(t), 0}; }
  static Mem regfile(int addr_width, Ty t) {
    if (addr_width < 1 || addr_width > 30)
      throw std::invalid_argument("Mem::regfile: addr_width must be in [1,30]");
    return Mem{Kind::Regfile, std::move(t), addr_width};
  }

  uint64_t entries() const { return kind == Kind::Regfile ? (uint64_t{1} << addr_width) : 1; }

  bool operator==(const Mem&) const = default;
};

// The declared memory footprint of a circuit. Element index is the identity
// of a memory element everywhere else in the toolchain.
using MemEnv = std::vector<Mem>;

inline uint64_t word_mask(int width) {
  return width >= 64 ? ~uint64_t{0} : (uint64_t{1} << width) - 1;
}

// Runtime values inhabiting a Ty. Word magnitudes are kept strictly below
// 2^width by construction.
struct Value {
  enum class Kind { Unit, Bool, Word, Tuple };

  Kind kind = Kind::Unit;
  bool b = false;            // Bool
  int width = 0;             // Word
  uint64_t bits = 0;         // Word, < 2^width
  std::vector<Value> elems;  // Tuple

  static Value unit() { return Value{}; }
  static Value boolean(bool v) { return Value{Kind::Bool, v, 0, 0, {}}; }
  static Value word(int width, uint64_t bits) {
    if (width < 1 || width > 64) throw std::invalid_argument("Value::word: width must be in [1,64]");
    return Value{Kind::Word, false, width, bits & word_mask(width), {}};
  }
  static Value tuple(std::vector<Value> elems) {
    return Value{Kind::Tuple, false, 0, 0, std::move(elems)};
  }

  bool operator==(const Value&) const = default;
};

// True iff v structurally inhabits t, recursively for tuples.
inline bool value_has_type(const Value& v, const Ty& t) {
  switch (t.kind) {
    case Ty::Kind::Unit:
      return v.kind == Value::Kind::Unit;
    case Ty::Kind::Bool:
      return v.kind == Value::Kind::Bool;
    case Ty::Kind::Int:
      return v.kind == Value::Kind::Word && v.width == t.width &&
             v.bits <= word_mask(t.width);
    case Ty::Kind::Tuple: {
      if (v.kind != Value::Kind::Tuple || v.elems.size() != t.elems.size()) return false;
      for (size_t i = 0; i < t.elems.size(); ++i)
        if (!value_has_type(v.elems[i], t.elems[i])) return false;
      return true;
    }
  }
  return false;
}

// The all-zero inhabitant of t (false, 0-words, recursively for tuples).
inline Value zero_value(const Ty& t) {
  switch (t.kind) {
    case Ty::Kind::Unit: return Value::unit();
    case Ty::Kind::Bool: return Value::boolean(false);
    case Ty::Kind::Int: return Value::word(t.width, 0);
    case Ty::Kind::Tuple: {
      std::vector<Value> elems;
      elems.reserve(t.elems.size());
      for (const auto& e : t.elems) elems.push_back(zero_value(e));
      return Value::tuple(std::move(elems));
    }
  }
  return Value::unit();
}

// Machine state: one cell per element of the declaring MemEnv. Inputs and
// registers hold a single value, register files hold 2^addr_width entries.
struct MemState {
  struct Cell {
    Value one;               // Input / Reg
    std::vector<Value> arr;  // Regfile
    bool operator==(const Cell&) const = default;
  };
  std::vector<Cell> cells;

  bool operator==(const MemState&) const = default;
};

inline MemState initial_state(const MemEnv& env) {
  MemState st;
  st.cells.resize(env.size());
  for (size_t i = 0; i < env.size(); ++i) {
    const Mem& m = env[i];
    if (m.kind == Mem::Kind::Regfile) {
      st.cells[i].arr.assign(m.entries(), zero_value(m.ty));
    } else {
      st.cells[i].one = zero_value(m.ty);
    }
  }
  return st;
}

inline bool state_has_shape(const MemEnv& env, const MemState& st) {
  if (st.cells.size() != env.size()) return false;
  for (size_t i = 0; i < env.size(); ++i) {
    const Mem& m = env[i];
    const MemState::Cell& c = st.cells[i];
    if (m.kind == Mem::Kind::Regfile) {
      if (c.arr.size() != m.entries()) return false;
      for (const auto& v : c.arr)
        if (!value_has_type(v, m.ty)) return false;
    } else {
      if (!c.arr.empty() || !value_has_type(c.one, m.ty)) return false;
    }
  }
  return true;
}

// Pending updates for one step. At most one write per register and at most
// one (address, value) pair per register file; occupancy is per element, not
// per address, because the RTL merge allots each register file exactly one
// write port.
struct Delta {
  struct Pending {
    std::optional<uint64_t> addr;  // set for register files
    Value v;
    bool operator==(const Pending&) const = default;
  };
  std::vector<std::optional<Pending>> slots;  // one per element; Inputs stay empty

  bool operator==(const Delta&) const = default;
};

inline Delta empty_delta(const MemEnv& env) {
  Delta d;
  d.slots.resize(env.size());
  return d;
}

inline bool delta_is_empty(const Delta& d) {
  for (const auto& s : d.slots)
    if (s) return false;
  return true;
}

// Record a pending write. If the target slot is already occupied the insert
// is a no-op: only the first write in program order is committed.
inline Delta delta_insert(const MemEnv& env, Delta d, size_t index,
                          std::optional<uint64_t> addr, Value v) {
  if (index >= env.size()) throw std::logic_error("delta_insert: element index out of range");
  const Mem& m = env[index];
  switch (m.kind) {
    case Mem::Kind::Input:
      throw std::logic_error("delta_insert: inputs cannot be written");
    case Mem::Kind::Reg:
      if (addr) throw std::logic_error("delta_insert: address given for a register");
      break;
    case Mem::Kind::Regfile:
      if (!addr) throw std::logic_error("delta_insert: register file write needs an address");
      if (*addr >= m.entries()) throw std::logic_error("delta_insert: address out of range");
      break;
  }
  if (!value_has_type(v, m.ty)) throw std::logic_error("delta_insert: value/type mismatch");
  if (!d.slots[index]) d.slots[index] = Delta::Pending{addr, std::move(v)};
  return d;
}

// Apply every occupied slot of d to st; inputs and untouched locations are
// unchanged. This is the between-ticks commit: effects become visible all at
// once and never mid-step.
inline MemState commit(const MemEnv& env, MemState st, const Delta& d) {
  if (d.slots.size() != env.size() || st.cells.size() != env.size())
    throw std::logic_error("commit: shape mismatch");
  for (size_t i = 0; i < env.size(); ++i) {
    if (!d.slots[i]) continue;
    const Delta::Pending& p = *d.slots[i];
    if (env[i].kind == Mem::Kind::Regfile) {
      st.cells[i].arr[*p.addr] = p.v;
    } else {
      st.cells[i].one = p.v;
    }
  }
  return st;
}

inline std::string to_string(const Ty& t) {
  switch (t.kind) {
    case Ty::Kind::Unit: return "unit";
    case Ty::Kind::Bool: return "bool";
    case Ty::Kind::Int: return "int" + std::to_string(t.width);
    case Ty::Kind::Tuple: {
      std::string s = "(";
      for (size_t i = 0; i < t.elems.size(); ++i) {
        if (i) s += ", ";
        s += to_string(t.elems[i]);
      }
      return s + ")";
    }
  }
  return "?";
}

inline std::string to_string(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Unit: return "()";
    case Value::Kind::Bool: return v.b ? "true" : "false";
    case Value::Kind::Word: return std::to_string(v.bits);
    case Value::Kind::Tuple: {
      std::string s = "(";
      for (size_t i = 0; i < v.elems.size(); ++i) {
        if (i) s += ", ";
        s += to_string(v.elems[i]);
      }
      return s + ")";
    }
  }
  return "?";
}

inline std::string to_string(const Mem& m) {
  switch (m.kind) {
    case Mem::Kind::Input: return "input " + to_string(m.ty);
    case Mem::Kind::Reg: return "reg " + to_string(m.ty);
    case Mem::Kind::Regfile:
      return "regfile[2^" + std::to_string(m.addr_width) + "] " + to_string(m.ty);
  }
  return "?";
}

inline std::string to_string(const MemEnv& env, const MemState& st) {
  std::string out;
  for (size_t i = 0; i < env.size(); ++i) {
    out += "  [" + std::to_string(i) + "] " + to_string(env[i]) + " = ";
    if (env[i].kind == Mem::Kind::Regfile) {
      out += "[";
      for (size_t j = 0; j < st.cells[i].arr.size(); ++j) {
        if (j) out += " ";
        out += to_string(st.cells[i].arr[j]);
      }
      out += "]";
    } else {
      out += to_string(st.cells[i].one);
    }
    out += "\n";
  }
  return out;
}

}  // namespace fesi
