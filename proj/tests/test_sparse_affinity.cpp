#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "gradcheck.hpp"
#include "mcid/numerics/layers.hpp"
#include "mcid/sparse_affinity.hpp"
#include "oracles.hpp"

using namespace mcid;

namespace {

AffinityVector random_affinity(std::mt19937_64& rng, std::size_t length, double density, std::int64_t max_count) {
  std::bernoulli_distribution present(density);
  std::uniform_int_distribution<std::int64_t> count(1, max_count);
  std::vector<std::int64_t> dense(length, 0);
  for (auto& c : dense) c = present(rng) ? count(rng) : 0;
  return AffinityVector::from_dense(dense);
}

std::vector<double> densify(const SparseWeights& w) {
  std::vector<double> dense(w.length, 0.0);
  for (const auto& [i, v] : w.entries) dense[i] = v;
  return dense;
}

}  // namespace

TEST(L1Normalize, ForcedArithmetic) {
  const std::vector<std::int64_t> counts{1, 3, 0, 4};
  const auto dense = densify(l1_normalize(AffinityVector::from_dense(counts)));
  EXPECT_EQ(dense, (std::vector<double>{0.125, 0.375, 0.0, 0.5}));
}

TEST(L1Normalize, ZeroVectorStaysZero) {
  const auto w = l1_normalize(AffinityVector(7, {}));
  EXPECT_EQ(w.length, 7u);
  EXPECT_TRUE(w.entries.empty());
}

TEST(L1Normalize, SumsToOne) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    const auto v = random_affinity(rng, 50, 0.3, 1'000'000'000);
    if (v.nnz() == 0) continue;
    double total = 0.0;
    for (const auto& [i, w] : l1_normalize(v).entries) total += w;
    ASSERT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(L1Normalize, HandlesCountsBeyondThirtyTwoBits) {
  const AffinityVector v(3, {{0, 701'464'302}, {2, 64}});
  const auto w = l1_normalize(v);
  EXPECT_NEAR(w.entries[0].second + w.entries[1].second, 1.0, 1e-15);
}

TEST(TopkTruncate, SmallVectorUnchanged) {
  std::mt19937_64 rng(1);
  AffinityVector v;
  do v = random_affinity(rng, 40, 0.12, 10); while (v.nnz() != 5);
  EXPECT_EQ(topk_truncate(v, 8192), v);
}

TEST(TopkTruncate, TiesBreakTowardSmallerIndex) {
  const AffinityVector v(4, {{0, 9}, {1, 7}, {2, 7}, {3, 3}});
  const auto t = topk_truncate(v, 2);
  ASSERT_EQ(t.nnz(), 2u);
  EXPECT_EQ(t.entries()[0].index, 0u);
  EXPECT_EQ(t.entries()[1].index, 1u);
}

TEST(TopkTruncate, SingleEntryKeepsMaximum) {
  const AffinityVector v(5, {{1, 4}, {3, 11}, {4, 2}});
  const auto t = topk_truncate(v, 1);
  ASSERT_EQ(t.nnz(), 1u);
  EXPECT_EQ(t.entries()[0], (AffinityVector::Entry{3, 11}));
}

TEST(TopkTruncate, MatchesStableSortOracleAndIsIdempotent) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    std::mt19937_64 rng(seed);
    const auto v = random_affinity(rng, 60, 0.5, 6);  // many ties
    const std::size_t k = 1 + seed % 20;
    const auto t = topk_truncate(v, k);

    auto sorted = v.entries();
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.count > b.count; });
    sorted.resize(std::min(k, sorted.size()));
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.index < b.index; });

    ASSERT_EQ(t.entries(), sorted) << "seed " << seed;
    ASSERT_LE(t.nnz(), v.nnz());
    ASSERT_EQ(topk_truncate(t, k), t);
  }
}

TEST(TopkTruncate, ZeroCapIsUsageError) {
  EXPECT_THROW(topk_truncate(AffinityVector(3, {}), 0), UsageError);
}

TEST(Aggregate, OneHotSelectsRow) {
  std::mt19937_64 rng(2);
  const Var table(oracle::random_tensor({6, 4}, rng));
  const auto w = l1_normalize(AffinityVector(6, {{3, 5}}));
  const Var h = aggregate(w, table);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(h.value()[j], table.value().at(3, j));
}

TEST(Aggregate, ZeroVectorGivesZero) {
  const Var table(Tensor({6, 4}, 1.0));
  const Var h = aggregate(SparseWeights{6, {}}, table);
  for (double v : h.value().values()) EXPECT_EQ(v, 0.0);
}

TEST(Aggregate, IndexOutsideTableIsDimensionError) {
  const Var table(Tensor({3, 2}, 1.0));
  EXPECT_THROW(aggregate(SparseWeights{3, {{5, 1.0}}}, table), DimensionError);
}

TEST(Aggregate, MatchesDenseMatvec) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t k = 30;
    const Tensor e = oracle::random_tensor({k, 8}, rng);
    std::vector<SparseWeights> rows;
    for (int b = 0; b < 3; ++b) rows.push_back(l1_normalize(random_affinity(rng, k, 0.25, 100)));
    const Var h = aggregate(rows, Var(e));
    for (std::size_t b = 0; b < rows.size(); ++b) {
      const auto dense = densify(rows[b]);
      Tensor x({1, k}, dense);
      const Tensor expected = oracle::naive_matmul(x, e);
      for (std::size_t j = 0; j < 8; ++j) ASSERT_NEAR(h.value().at(b, j), expected[j], 1e-10);
    }
  }
}

TEST(Aggregate, GradientTouchesOnlyReferencedRows) {
  std::mt19937_64 rng(3);
  Var table(oracle::random_tensor({10, 4}, rng), true);
  const std::vector<SparseWeights> rows{l1_normalize(AffinityVector(10, {{1, 2}, {7, 6}})),
                                        l1_normalize(AffinityVector(10, {{4, 1}}))};
  backward(weighted_sum(aggregate(rows, table), oracle::random_tensor({2, 4}, rng)));
  for (std::size_t r = 0; r < 10; ++r) {
    const bool touched = r == 1 || r == 7 || r == 4;
    for (std::size_t j = 0; j < 4; ++j) {
      if (touched) {
        EXPECT_NE(table.grad().at(r, j), 0.0);
      } else {
        EXPECT_EQ(table.grad().at(r, j), 0.0);
      }
    }
  }
}

TEST(Aggregate, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    Var table(oracle::random_tensor({8, 3}, rng), true);
    std::vector<SparseWeights> rows{l1_normalize(random_affinity(rng, 8, 0.5, 9)),
                                    l1_normalize(random_affinity(rng, 8, 0.5, 9))};
    const Tensor probe = oracle::random_tensor({2, 3}, rng);
    ASSERT_LT(oracle::gradient_check([&] { return weighted_sum(aggregate(rows, table), probe); }, {table}), 1e-4);
  }
}
