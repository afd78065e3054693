#pragma once

// Reduced ordered BDDs with hash-consing: semantically equal Boolean
// functions get the same node id, which is what the simplification pass
// needs — equality of Boolean expressions becomes an id comparison.
//
// Variable indices increase strictly from root toward the leaves. All binary
// operations go through ite with a computed-table cache.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace fesi {

using NodeId = uint32_t;

struct BddOverflow : std::runtime_error {
  BddOverflow() : std::runtime_error("bdd: node budget exhausted") {}
};

class BddStore {
 public:
  static constexpr NodeId kFalse = 0;
  static constexpr NodeId kTrue = 1;
  static constexpr uint32_t kLeafVar = UINT32_MAX;

  explicit BddStore(size_t node_budget = 1'000'000) : budget_(node_budget) {
    nodes_.push_back({kLeafVar, kFalse, kFalse});  // false terminal
    nodes_.push_back({kLeafVar, kTrue, kTrue});    // true terminal
  }

  struct Node {
    uint32_t var;
    NodeId lo;  // value when var is false
    NodeId hi;  // value when var is true
  };

  const Node& node(NodeId n) const { return nodes_.at(n); }
  size_t node_count() const { return nodes_.size(); }

  NodeId mk_var(uint32_t var) {
    NodeId r = mk_node(var, kFalse, kTrue);
    debug_scan();
    return r;
  }

  NodeId not_(NodeId a) { return ite(a, kFalse, kTrue); }
  NodeId and_(NodeId a, NodeId b) { return ite(a, b, kFalse); }
  NodeId or_(NodeId a, NodeId b) { return ite(a, kTrue, b); }
  NodeId xor_(NodeId a, NodeId b) { return ite(a, not_(b), b); }

  NodeId ite(NodeId c, NodeId t, NodeId f) {
    NodeId r = ite_rec(c, t, f);
    debug_scan();
    return r;
  }

  // Truth-table oracle used by the canonicity tests.
  bool eval(NodeId n, const std::function<bool(uint32_t)>& assignment) const {
    while (n != kTrue && n != kFalse) {
      const Node& d = nodes_[n];
      n = assignment(d.var) ? d.hi : d.lo;
    }
    return n == kTrue;
  }

  // Full-store scan of the reduction invariants: no node with equal
  // children, no duplicate (var, lo, hi) triple, variable indices strictly
  // increasing toward the leaves. Throws on the first violation.
  void check_invariants() const {
    std::unordered_set<uint64_t> seen;
    for (NodeId n = 2; n < nodes_.size(); ++n) {
      const Node& d = nodes_[n];
      if (d.lo == d.hi) throw std::logic_error("bdd: node with identical children");
      if (d.lo >= nodes_.size() || d.hi >= nodes_.size())
        throw std::logic_error("bdd: dangling child");
      if (nodes_[d.lo].var != kLeafVar && nodes_[d.lo].var <= d.var)
        throw std::logic_error("bdd: variable order violated on low edge");
      if (nodes_[d.hi].var != kLeafVar && nodes_[d.hi].var <= d.var)
        throw std::logic_error("bdd: variable order violated on high edge");
      uint64_t key = (uint64_t(d.var) << 40) ^ (uint64_t(d.lo) << 20) ^ uint64_t(d.hi);
      if (!seen.insert(key).second) throw std::logic_error("bdd: duplicate node triple");
    }
  }

 private:
  struct CacheKey {
    NodeId c, t, f;
    bool operator==(const CacheKey&) const = default;
  };
  struct CacheHash {
    size_t operator()(const CacheKey& k) const {
      return ((size_t(k.c) * 0x9e3779b9u) ^ (size_t(k.t) << 16)) + k.f * 1000003u;
    }
  };
  struct UniqueKey {
    uint32_t var;
    NodeId lo, hi;
    bool operator==(const UniqueKey&) const = default;
  };
  struct UniqueHash {
    size_t operator()(const UniqueKey& k) const {
      return ((size_t(k.var) * 0x85ebca6bu) ^ (size_t(k.lo) << 17)) + k.hi * 2654435761u;
    }
  };

  NodeId ite_rec(NodeId c, NodeId t, NodeId f) {
    if (c == kTrue) return t;
    if (c == kFalse) return f;
    if (t == f) return t;
    if (t == kTrue && f == kFalse) return c;
    CacheKey key{c, t, f};
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    uint32_t v = top_var(c);
    v = std::min(v, top_var(t));
    v = std::min(v, top_var(f));
    NodeId lo = ite_rec(cofactor(c, v, false), cofactor(t, v, false), cofactor(f, v, false));
    NodeId hi = ite_rec(cofactor(c, v, true), cofactor(t, v, true), cofactor(f, v, true));
    NodeId r = mk_node(v, lo, hi);
    cache_.emplace(key, r);
    return r;
  }

  // Full-store re-scan after every public operation in debug builds.
  void debug_scan() const {
#ifndef NDEBUG
    check_invariants();
#endif
  }

  uint32_t top_var(NodeId n) const { return nodes_[n].var; }

  NodeId cofactor(NodeId n, uint32_t var, bool high) const {
    const Node& d = nodes_[n];
    if (d.var != var) return n;
    return high ? d.hi : d.lo;
  }

  NodeId mk_node(uint32_t var, NodeId lo, NodeId hi) {
    if (lo == hi) return lo;
    UniqueKey key{var, lo, hi};
    auto it = unique_.find(key);
    if (it != unique_.end()) return it->second;
    if (nodes_.size() >= budget_) throw BddOverflow{};
    NodeId n = static_cast<NodeId>(nodes_.size());
    nodes_.push_back({var, lo, hi});
    unique_.emplace(key, n);
    return n;
  }

  size_t budget_;
  std::vector<Node> nodes_;
  std::unordered_map<UniqueKey, NodeId, UniqueHash> unique_;
  std::unordered_map<CacheKey, NodeId, CacheHash> cache_;
};

}  // namespace fesi
