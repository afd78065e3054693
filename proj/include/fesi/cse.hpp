#pragma once

// Syntactic common-subexpression elimination over RTL blocks. Each binding
// is tagged with an interned symbolic value approximating its runtime value;
// a binding whose symbolic value was already produced is dropped and its
// uses rerouted to the earlier variable.
//
// Memory reads are pure within a step (reads-before-writes), so read
// expressions participate like any operator. Commutative operators
// normalize operand order before interning, which catches a+b vs b+a.

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "fesi/rtl.hpp"

namespace fesi {

// Hash-consed symbolic values: equal ids imply equal runtime values under
// every state. Ids are dense and allocated in first-construction order.
class SymTable {
 public:
  using Id = uint32_t;

  Id intern(uint32_t tag, std::vector<uint64_t> parts) {
    Key k{tag, std::move(parts)};
    auto it = map_.find(k);
    if (it != map_.end()) return it->second;
    Id id = next_++;
    map_.emplace(std::move(k), id);
    return id;
  }

  // Fresh id that never compares equal to anything else; the escape hatch
  // for bindings with no symbolic interpretation.
  Id opaque() { return next_++; }

  size_t size() const { return next_; }

 private:
  struct Key {
    uint32_t tag;
    std::vector<uint64_t> parts;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    size_t operator()(const Key& k) const {
      size_t h = k.tag;
      for (uint64_t p : k.parts) h = h * 1000003u + static_cast<size_t>(p ^ (p >> 32));
      return h;
    }
  };
  std::unordered_map<Key, Id, KeyHash> map_;
  Id next_ = 0;
};

namespace detail {

// Tags for symbolic nodes. Operator tags reuse the RtlExpr op enumeration,
// offset past the leaf tags.
enum : uint32_t {
  kSymConstUnit = 1,
  kSymConstBool,
  kSymConstWord,
  kSymInput,
  kSymReadReg,
  kSymReadRegfile,
  kSymOpBase = 64,
};

inline bool commutative(RtlExpr::Op op) {
  switch (op) {
    case RtlExpr::Op::And:
    case RtlExpr::Op::Or:
    case RtlExpr::Op::Xor:
    case RtlExpr::Op::Eq:
    case RtlExpr::Op::Add: return true;
    default: return false;
  }
}

inline SymTable::Id symbolize(SymTable& st, const std::vector<std::optional<SymTable::Id>>& var_sym,
                              const RtlExpr& e) {
  auto sym_of = [&](const Var& v) -> std::optional<SymTable::Id> {
    return v.id < var_sym.size() ? var_sym[v.id] : std::nullopt;
  };
  using Op = RtlExpr::Op;
  switch (e.op) {
    case Op::Var: {
      auto s = sym_of(e.args[0]);
      return s ? *s : st.opaque();
    }
    case Op::ConstUnit: return st.intern(kSymConstUnit, {});
    case Op::ConstBool: return st.intern(kSymConstBool, {e.bval ? 1u : 0u});
    case Op::ConstWord:
      return st.intern(kSymConstWord, {static_cast<uint64_t>(e.width), e.bits});
    case Op::Input: return st.intern(kSymInput, {e.ref.index});
    case Op::ReadReg: return st.intern(kSymReadReg, {e.ref.index});
    case Op::ReadRegfile: {
      auto addr = sym_of(e.args[0]);
      if (!addr) return st.opaque();
      return st.intern(kSymReadRegfile, {e.ref.index, *addr});
    }
    default: {
      std::vector<uint64_t> parts;
      parts.reserve(e.args.size() + 1);
      for (const auto& a : e.args) {
        auto s = sym_of(a);
        if (!s) return st.opaque();
        parts.push_back(*s);
      }
      if (commutative(e.op) && parts.size() == 2 && parts[0] > parts[1])
        std::swap(parts[0], parts[1]);
      if (e.op == Op::Proj) parts.push_back(e.proj_index);
      return st.intern(kSymOpBase + static_cast<uint32_t>(e.op), std::move(parts));
    }
  }
}

}  // namespace detail

// Symbolic value of every binding, in telescope order. Two equal entries
// denote bindings that evaluate equal under every state.
inline std::vector<SymTable::Id> rtl_symvals(const RtlBlock& b) {
  SymTable st;
  std::vector<std::optional<SymTable::Id>> var_sym(b.var_limit);
  std::vector<SymTable::Id> out;
  out.reserve(b.bindings.size());
  for (const auto& bind : b.bindings) {
    SymTable::Id s = detail::symbolize(st, var_sym, bind.expr);
    var_sym[bind.var.id] = s;
    out.push_back(s);
  }
  return out;
}

// The pass. Keeps the first binding of every symbolic value, drops the rest,
// reroutes all uses (including guard, value and writes).
inline RtlBlock cse(const RtlBlock& b) {
  SymTable st;
  std::vector<std::optional<SymTable::Id>> var_sym(b.var_limit);
  std::unordered_map<SymTable::Id, Var> sym_var;
  std::vector<std::optional<Var>> reroute(b.var_limit);

  auto resolve = [&](const Var& v) -> Var {
    return v.id < reroute.size() && reroute[v.id] ? *reroute[v.id] : v;
  };

  RtlBlock out;
  out.env = b.env;
  out.var_limit = b.var_limit;
  for (const auto& bind : b.bindings) {
    RtlExpr e = bind.expr;
    for (auto& a : e.args) a = resolve(a);
    SymTable::Id s = detail::symbolize(st, var_sym, e);
    auto it = sym_var.find(s);
    if (it != sym_var.end()) {
      reroute[bind.var.id] = it->second;
      continue;
    }
    sym_var.emplace(s, bind.var);
    var_sym[bind.var.id] = s;
    out.bindings.push_back({bind.var, std::move(e)});
  }
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
