#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "fesi/circuits/sorter.hpp"
#include "fesi/pipeline.hpp"
#include "fesi/sem.hpp"
#include "fesi/typecheck.hpp"

using namespace fesi;

namespace {

using U64Tree = Tree<uint64_t>;

std::vector<uint64_t> random_words(std::mt19937_64& rng, int n, int width) {
  std::vector<uint64_t> xs(size_t{1} << n);
  for (auto& x : xs) x = rng() & word_mask(width);
  return xs;
}

std::optional<std::vector<uint64_t>> run_sorter(const MemEnv& env, const RtlBlock& blk, int n,
                                                int width, const std::vector<uint64_t>& xs) {
  MemState g = initial_state(env);
  g.cells[0].one = sorter_pack(n, width, xs);
  auto r = rtl_next(g, blk);
  if (!r) return std::nullopt;
  return sorter_unpack(r->first);
}

}  // namespace

TEST_CASE("tree reversal flips the leaf order") {
  U64Tree t = U64Tree::node(U64Tree::node(U64Tree::leaf(1), U64Tree::leaf(2)),
                            U64Tree::node(U64Tree::leaf(3), U64Tree::leaf(4)));
  U64Tree want = U64Tree::node(U64Tree::node(U64Tree::leaf(4), U64Tree::leaf(3)),
                               U64Tree::node(U64Tree::leaf(2), U64Tree::leaf(1)));
  CHECK(spec_reverse(t) == want);
  CHECK(tree_leaves(spec_reverse(t)) == std::vector<uint64_t>{4, 3, 2, 1});
}

TEST_CASE("min_max_swap at depth zero is the comparator itself") {
  auto [lo, hi] = spec_min_max_swap(MinMaxCmp{}, U64Tree::leaf(5), U64Tree::leaf(2));
  CHECK(lo == U64Tree::leaf(2));
  CHECK(hi == U64Tree::leaf(5));
}

TEST_CASE("spec_sort against the standard list sort") {
  CHECK(tree_leaves(spec_sort(MinMaxCmp{}, tree_from_leaves<uint64_t>({3, 1, 2, 0}))) ==
        std::vector<uint64_t>{0, 1, 2, 3});

  std::mt19937_64 rng(51);
  for (int n = 1; n <= 5; ++n)
    for (int i = 0; i < 50; ++i) {
      std::vector<uint64_t> xs = random_words(rng, n, 8);
      std::vector<uint64_t> want = xs;
      std::sort(want.begin(), want.end());
      CHECK(tree_leaves(spec_sort(MinMaxCmp{}, tree_from_leaves(xs))) == want);
    }
}

TEST_CASE("a single compare-and-swap circuit orders its pair") {
  MemEnv env = sorter_env(1, 4);
  Action a = sorter_circuit(1, 4);
  REQUIRE(typechecks(env, a));
  MemState g = initial_state(env);
  g.cells[0].one = sorter_pack(1, 4, {5, 2});
  auto r = next(env, g, a);
  REQUIRE(r.has_value());
  CHECK(sorter_unpack(r->first) == std::vector<uint64_t>{2, 5});
}

TEST_CASE("n=2 circuit sorts a sample and agrees with the spec") {
  MemEnv env = sorter_env(2, 4);
  Action a = sorter_circuit(2, 4);
  CompiledStages st = compile_pipeline(env, a);
  auto out = run_sorter(env, st.final_block(), 2, 4, {3, 1, 2, 0});
  REQUIRE(out.has_value());
  CHECK(*out == std::vector<uint64_t>{0, 1, 2, 3});
}

TEST_CASE("sorted inputs are fixpoints") {
  std::mt19937_64 rng(52);
  for (int n = 1; n <= 3; ++n) {
    MemEnv env = sorter_env(n, 8);
    CompiledStages st = compile_pipeline(env, sorter_circuit(n, 8));
    for (int i = 0; i < 30; ++i) {
      std::vector<uint64_t> xs = random_words(rng, n, 8);
      std::sort(xs.begin(), xs.end());
      auto out = run_sorter(env, st.final_block(), n, 8, xs);
      REQUIRE(out.has_value());
      CHECK(*out == xs);
    }
  }
}

TEST_CASE("circuit output equals spec_sort and is a sorted permutation") {
  std::mt19937_64 rng(53);
  for (int n = 1; n <= 3; ++n)
    for (int width : {4, 8}) {
      MemEnv env = sorter_env(n, width);
      CompiledStages st = compile_pipeline(env, sorter_circuit(n, width));
      for (int i = 0; i < 60; ++i) {
        std::vector<uint64_t> xs = random_words(rng, n, width);
        auto out = run_sorter(env, st.final_block(), n, width, xs);
        REQUIRE(out.has_value());

        CHECK(*out == tree_leaves(spec_sort(MinMaxCmp{}, tree_from_leaves(xs))));
        CHECK(std::is_sorted(out->begin(), out->end()));

        std::vector<uint64_t> as_multiset = *out;
        std::vector<uint64_t> in_multiset = xs;
        std::sort(as_multiset.begin(), as_multiset.end());
        std::sort(in_multiset.begin(), in_multiset.end());
        CHECK(as_multiset == in_multiset);
      }
    }
}

TEST_CASE("all 0/1 sequences are sorted for small depths") {
  CHECK(check_zero_one(1));
  CHECK(check_zero_one(2));
  // constant-zero input, trivially sorted, exercised by mask 0 inside
  CHECK(check_zero_one(3));
}

TEST_CASE("sorter parameter validation") {
  CHECK_THROWS_AS(sorter_circuit(0, 4), std::invalid_argument);
  CHECK_THROWS_AS(check_zero_one(5), std::invalid_argument);
}
