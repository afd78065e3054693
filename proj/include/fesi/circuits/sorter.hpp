#pragma once

// Bitonic sorter: a plain recursive specification over complete binary
// trees, and a circuit generator that mimics its structure step for step.
// Sequences of length 2^n are represented as trees of depth n; the circuit
// works on trees of variables and recovers tree structure from nested-pair
// results by binding projections.

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fesi/lang.hpp"
#include "fesi/pipeline.hpp"
#include "fesi/rtl.hpp"
#include "fesi/types.hpp"

namespace fesi {

// Complete binary tree of a given depth; 2^depth leaves.
template <typename T>
struct Tree {
  std::optional<T> leaf_value;
  std::vector<Tree<T>> kids;  // exactly two for a node

  static Tree leaf(T v) {
    Tree t;
    t.leaf_value = std::move(v);
    return t;
  }
  static Tree node(Tree l, Tree r) {
    Tree t;
    t.kids.push_back(std::move(l));
    t.kids.push_back(std::move(r));
    return t;
  }

  bool is_leaf() const { return leaf_value.has_value(); }
  const Tree& left() const { return kids[0]; }
  const Tree& right() const { return kids[1]; }
  int depth() const { return is_leaf() ? 0 : 1 + kids[0].depth(); }

  bool operator==(const Tree&) const = default;
};

template <typename T>
Tree<T> tree_from_leaves(const std::vector<T>& xs, size_t lo, size_t hi) {
  if (hi - lo == 1) return Tree<T>::leaf(xs[lo]);
  size_t mid = lo + (hi - lo) / 2;
  return Tree<T>::node(tree_from_leaves(xs, lo, mid), tree_from_leaves(xs, mid, hi));
}

// xs.size() must be a power of two.
template <typename T>
Tree<T> tree_from_leaves(const std::vector<T>& xs) {
  if (xs.empty() || (xs.size() & (xs.size() - 1)) != 0)
    throw std::invalid_argument("tree_from_leaves: length must be a power of two");
  return tree_from_leaves(xs, 0, xs.size());
}

template <typename T>
void tree_leaves(const Tree<T>& t, std::vector<T>& out) {
  if (t.is_leaf()) {
    out.push_back(*t.leaf_value);
    return;
  }
  tree_leaves(t.left(), out);
  tree_leaves(t.right(), out);
}

template <typename T>
std::vector<T> tree_leaves(const Tree<T>& t) {
  std::vector<T> out;
  tree_leaves(t, out);
  return out;
}

// --- Specification side -----------------------------------------------
// cmp(a, b) returns (min, max) in the standard instantiation; keeping it a
// parameter mirrors the abstract comparator of the network.

template <typename T>
Tree<T> spec_reverse(const Tree<T>& t) {
  if (t.is_leaf()) return t;
  return Tree<T>::node(spec_reverse(t.right()), spec_reverse(t.left()));
}

template <typename T, typename Cmp>
std::pair<Tree<T>, Tree<T>> spec_min_max_swap(const Cmp& cmp, const Tree<T>& l,
                                              const Tree<T>& r) {
  if (l.is_leaf()) {
    auto [x, y] = cmp(*l.leaf_value, *r.leaf_value);
    return {Tree<T>::leaf(x), Tree<T>::leaf(y)};
  }
  auto [a, b] = spec_min_max_swap(cmp, l.left(), r.left());
  auto [c, d] = spec_min_max_swap(cmp, l.right(), r.right());
  return {Tree<T>::node(std::move(a), std::move(c)), Tree<T>::node(std::move(b), std::move(d))};
}

// Merge of a bitonic sequence: swap the halves pointwise, then merge each
// half recursively.
template <typename T, typename Cmp>
Tree<T> spec_bitonic_merge(const Cmp& cmp, const Tree<T>& t) {
  if (t.is_leaf()) return t;
  auto [lo, hi] = spec_min_max_swap(cmp, t.left(), t.right());
  return Tree<T>::node(spec_bitonic_merge(cmp, lo), spec_bitonic_merge(cmp, hi));
}

// Sort both halves, reverse the second to form a bitonic sequence, merge.
template <typename T, typename Cmp>
Tree<T> spec_sort(const Cmp& cmp, const Tree<T>& t) {
  if (t.is_leaf()) return t;
  Tree<T> l = spec_sort(cmp, t.left());
  Tree<T> r = spec_sort(cmp, t.right());
  return spec_bitonic_merge(cmp, Tree<T>::node(std::move(l), spec_reverse(r)));
}

struct MinMaxCmp {
  std::pair<uint64_t, uint64_t> operator()(uint64_t a, uint64_t b) const {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  }
};

// --- Circuit side -------------------------------------------------------

// Result type of a depth-n network: nested pairs bottoming out at the
// element type.
inline Ty sorter_domain(int n, const Ty& elem) {
  if (n == 0) return elem;
  Ty sub = sorter_domain(n - 1, elem);
  return Ty::tuple({sub, sub});
}

// One input element carrying all 2^n words as nested pairs; no state.
inline MemEnv sorter_env(int n, int width) {
  return {Mem::input(sorter_domain(n, Ty::word(width)))};
}

namespace detail {

using VarTree = Tree<Var>;

// Recover the tree structure out of a nested-pair variable by binding
// projections, then continue with the tree of variables.
inline Action destructure(Builder& bld, Var v, int depth,
                          const std::function<Action(VarTree)>& k) {
  if (depth == 0) return k(VarTree::leaf(v));
  return bld.bind(bld.ret(e_proj(e_var(v), 0)), [&](Var lv) {
    return destructure(bld, lv, depth - 1, [&](VarTree lt) {
      return bld.bind(bld.ret(e_proj(e_var(v), 1)), [&](Var rv) {
        return destructure(bld, rv, depth - 1, [&](VarTree rt) {
          return k(VarTree::node(std::move(lt), std::move(rt)));
        });
      });
    });
  });
}

inline Action reverse_c(Builder& bld, const VarTree& t) {
  if (t.is_leaf()) return bld.ret(e_var(*t.leaf_value));
  return bld.bind(reverse_c(bld, t.right()), [&](Var r) {
    return bld.bind(reverse_c(bld, t.left()), [&](Var l) {
      return bld.ret(e_tuple({e_var(r), e_var(l)}));
    });
  });
}

// Compare-and-swap: min and max selected by an unsigned less-than.
inline Action cmp_swap(Builder& bld, Var x, Var y) {
  return bld.bind(bld.ret(e_lt(e_var(x), e_var(y))), [&](Var c) {
    return bld.bind(bld.ret(e_mux(e_var(c), e_var(x), e_var(y))), [&](Var mn) {
      return bld.bind(bld.ret(e_mux(e_var(c), e_var(y), e_var(x))), [&](Var mx) {
        return bld.ret(e_tuple({e_var(mn), e_var(mx)}));
      });
    });
  });
}

inline Action min_max_swap_c(Builder& bld, const VarTree& l, const VarTree& r) {
  if (l.is_leaf()) return cmp_swap(bld, *l.leaf_value, *r.leaf_value);
  return bld.bind(min_max_swap_c(bld, l.left(), r.left()), [&](Var ab) {
    return bld.bind(bld.ret(e_proj(e_var(ab), 0)), [&](Var a) {
      return bld.bind(bld.ret(e_proj(e_var(ab), 1)), [&](Var b) {
        return bld.bind(min_max_swap_c(bld, l.right(), r.right()), [&](Var cd) {
          return bld.bind(bld.ret(e_proj(e_var(cd), 0)), [&](Var c) {
            return bld.bind(bld.ret(e_proj(e_var(cd), 1)), [&](Var d) {
              return bld.ret(e_tuple({e_tuple({e_var(a), e_var(c)}),
                                      e_tuple({e_var(b), e_var(d)})}));
            });
          });
        });
      });
    });
  });
}

inline Action merge_c(Builder& bld, const VarTree& t) {
  if (t.is_leaf()) return bld.ret(e_var(*t.leaf_value));
  int d = t.depth();
  return bld.bind(min_max_swap_c(bld, t.left(), t.right()), [&](Var mm) {
    return bld.bind(bld.ret(e_proj(e_var(mm), 0)), [&](Var lo) {
      return destructure(bld, lo, d - 1, [&](VarTree lo_t) {
        return bld.bind(bld.ret(e_proj(e_var(mm), 1)), [&](Var hi) {
          return destructure(bld, hi, d - 1, [&](VarTree hi_t) {
            return bld.bind(merge_c(bld, lo_t), [&](Var ml) {
              return bld.bind(merge_c(bld, hi_t), [&](Var mh) {
                return bld.ret(e_tuple({e_var(ml), e_var(mh)}));
              });
            });
          });
        });
      });
    });
  });
}

inline Action sort_c(Builder& bld, const VarTree& t) {
  if (t.is_leaf()) return bld.ret(e_var(*t.leaf_value));
  int d = t.depth();
  return bld.bind(sort_c(bld, t.left()), [&](Var ls) {
    return bld.bind(sort_c(bld, t.right()), [&](Var rs) {
      return destructure(bld, rs, d - 1, [&](VarTree rs_t) {
        return bld.bind(reverse_c(bld, rs_t), [&](Var rr) {
          return destructure(bld, ls, d - 1, [&](VarTree ls_t) {
            return destructure(bld, rr, d - 1, [&](VarTree rr_t) {
              return merge_c(bld, VarTree::node(std::move(ls_t), std::move(rr_t)));
            });
          });
        });
      });
    });
  });
}

}  // namespace detail

// Combinational sorter over 2^n words of the given width.
inline Action sorter_circuit(int n, int width) {
  if (n < 1) throw std::invalid_argument("sorter_circuit: depth must be at least 1");
  Builder bld(sorter_env(n, width));
  return bld.bind(bld.input_read(0), [&](Var in) {
    return detail::destructure(bld, in, n,
                               [&](detail::VarTree t) { return detail::sort_c(bld, t); });
  });
}

// Pack 2^n words into the nested-pair input value (leaf order, left to
// right) and back.
inline Value sorter_pack(int n, int width, const std::vector<uint64_t>& xs, size_t lo,
                         size_t hi) {
  if (n == 0) return Value::word(width, xs[lo]);
  size_t mid = lo + (hi - lo) / 2;
  return Value::tuple({sorter_pack(n - 1, width, xs, lo, mid),
                       sorter_pack(n - 1, width, xs, mid, hi)});
}

inline Value sorter_pack(int n, int width, const std::vector<uint64_t>& xs) {
  if (xs.size() != (size_t{1} << n))
    throw std::invalid_argument("sorter_pack: need exactly 2^n words");
  return sorter_pack(n, width, xs, 0, xs.size());
}

inline void sorter_unpack(const Value& v, std::vector<uint64_t>& out) {
  if (v.kind == Value::Kind::Word) {
    out.push_back(v.bits);
    return;
  }
  for (const auto& e : v.elems) sorter_unpack(e, out);
}

inline std::vector<uint64_t> sorter_unpack(const Value& v) {
  std::vector<uint64_t> out;
  sorter_unpack(v, out);
  return out;
}

// 0-1 principle check: run the compiled sorter on every 0/1 sequence of
// length 2^n and report whether every output came out sorted.
inline bool check_zero_one_block(int n, int width, const MemEnv& env, const RtlBlock& block) {
  size_t lanes = size_t{1} << n;
  MemState gamma = initial_state(env);
  std::vector<uint64_t> xs(lanes);
  for (uint64_t mask = 0; mask < (uint64_t{1} << lanes); ++mask) {
    for (size_t i = 0; i < lanes; ++i) xs[i] = (mask >> i) & 1;
    gamma.cells[0].one = sorter_pack(n, width, xs);
    auto r = rtl_next(gamma, block);
    if (!r) return false;
    std::vector<uint64_t> out = sorter_unpack(r->first);
    for (size_t i = 1; i < out.size(); ++i)
      if (out[i - 1] > out[i]) return false;
  }
  return true;
}

inline bool check_zero_one(int n, int width = 4) {
  if (n < 1 || n > 4) throw std::invalid_argument("check_zero_one: n must be in [1,4]");
  MemEnv env = sorter_env(n, width);
  CompiledStages stages = compile_pipeline(env, sorter_circuit(n, width));
  return check_zero_one_block(n, width, env, stages.final_block());
}

}  // namespace fesi
