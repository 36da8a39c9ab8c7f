#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "mcid/eval/bad_actor.hpp"
#include "mcid/eval/projection.hpp"
#include "mcid/eval/stats.hpp"
#include "mcid/eval/sweep.hpp"
#include "mcid/synthdata/dataset.hpp"

#include "oracles.hpp"

namespace mcid {
namespace {

std::vector<std::vector<double>> random_rows(std::size_t n, std::size_t c, std::mt19937_64& rng, bool with_ties) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> coarse(0, 3);
  std::vector<std::vector<double>> rows(n, std::vector<double>(c));
  for (auto& row : rows) {
    double total = 0.0;
    for (auto& p : row) {
      p = with_ties ? static_cast<double>(coarse(rng)) + 1.0 : u(rng);
      total += p;
    }
    for (auto& p : row) p /= total;
  }
  return rows;
}

Tensor to_tensor(const std::vector<std::vector<double>>& rows) {
  Tensor t({rows.size(), rows.front().size()});
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) t[i * rows[i].size() + j] = rows[i][j];
  return t;
}

Tensor one_hot(std::span<const std::size_t> labels, std::size_t c) {
  Tensor t({labels.size(), c}, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) t[i * c + labels[i]] = 1.0;
  return t;
}

double pair_distance(const Tensor& p, std::size_t i, std::size_t j) {
  double s = 0.0;
  for (std::size_t k = 0; k < p.dim(1); ++k) s += (p.at(i, k) - p.at(j, k)) * (p.at(i, k) - p.at(j, k));
  return std::sqrt(s);
}

// Folds

TEST(Folds, FullScaleSizes) {
  std::vector<std::size_t> labels(71668);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i % 56;
  const auto folds = stratified_kfold(labels, 5, 11);
  std::vector<std::size_t> sizes(5, 0);
  for (auto f : folds) ++sizes[f];
  EXPECT_EQ(sizes, (std::vector<std::size_t>{14334, 14334, 14334, 14333, 14333}));
}

TEST(Folds, OneOfEachCategoryPerFold) {
  const std::vector<std::size_t> labels{0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  const auto folds = stratified_kfold(labels, 5, 2);
  for (std::size_t f = 0; f < 5; ++f) {
    std::multiset<std::size_t> cats;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (folds[i] == f) cats.insert(labels[i]);
    EXPECT_EQ(cats, (std::multiset<std::size_t>{0, 1}));
  }
}

TEST(Folds, RolesPartitionEveryRepetition) {
  std::mt19937_64 rng(5);
  std::vector<std::size_t> labels(503);
  for (auto& l : labels) l = std::uniform_int_distribution<std::size_t>(0, 6)(rng);
  const auto folds = stratified_kfold(labels, 5, 9);
  for (std::size_t r = 0; r < 5; ++r) {
    const auto s = split_by_roles(folds, fold_roles(r, 5));
    std::vector<std::size_t> all;
    all.insert(all.end(), s.train.begin(), s.train.end());
    all.insert(all.end(), s.validation.begin(), s.validation.end());
    all.insert(all.end(), s.test.begin(), s.test.end());
    std::sort(all.begin(), all.end());
    ASSERT_EQ(all.size(), labels.size());
    for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
    for (auto i : s.test) EXPECT_EQ(folds[i], r);
    for (auto i : s.validation) EXPECT_EQ(folds[i], (r + 1) % 5);
  }
}

TEST(Folds, CategoryCountsBalanced) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::size_t> labels(200 + trial * 13);
    for (auto& l : labels) l = std::uniform_int_distribution<std::size_t>(0, 4)(rng);
    std::vector<std::size_t> per_cat(5, 0);
    for (auto l : labels) ++per_cat[l];
    if (*std::min_element(per_cat.begin(), per_cat.end()) < 5) continue;
    const auto folds = stratified_kfold(labels, 5, static_cast<std::uint64_t>(trial));
    for (std::size_t c = 0; c < 5; ++c) {
      std::vector<std::size_t> counts(5, 0);
      for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == c) ++counts[folds[i]];
      EXPECT_LE(*std::max_element(counts.begin(), counts.end()) - *std::min_element(counts.begin(), counts.end()), 1u);
    }
  }
}

TEST(Folds, TooFewMembersRejected) {
  const std::vector<std::size_t> labels{0, 0, 0, 1};
  EXPECT_THROW(stratified_kfold(labels, 3, 0), UsageError);
  EXPECT_THROW(fold_roles(0, 2), UsageError);
}

// Metrics

TEST(Metrics, AgreeWithSortingOracle) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t c = 2 + trial % 9;
    const std::size_t n = 1 + trial % 17;
    const auto rows = random_rows(n, c, rng, trial % 2 == 0);
    std::vector<std::size_t> labels(n);
    for (auto& l : labels) l = std::uniform_int_distribution<std::size_t>(0, c - 1)(rng);
    const MetricReport got = compute_metrics(to_tensor(rows), labels);
    const auto want = oracle::brute_force_metrics(rows, labels, c);
    ASSERT_NEAR(got.micro_f1, want.micro_f1, 1e-12);
    ASSERT_NEAR(got.macro_f1, want.macro_f1, 1e-12);
    ASSERT_NEAR(got.average_rank, want.average_rank, 1e-12);
    ASSERT_NEAR(got.hit_at_3, want.hit_at_3, 1e-12);
    ASSERT_NEAR(got.hit_at_5, want.hit_at_5, 1e-12);
  }
}

TEST(Metrics, AllCorrect) {
  const std::vector<std::size_t> labels{0, 3, 2, 1, 3};
  const MetricReport r = compute_metrics(one_hot(labels, 4), labels);
  EXPECT_EQ(r, (MetricReport{1.0, 1.0, 1.0, 1.0, 1.0}));
}

TEST(Metrics, OrderingProperties) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t c = 6;
    const auto rows = random_rows(12, c, rng, trial % 3 == 0);
    std::vector<std::size_t> labels(12);
    for (auto& l : labels) l = std::uniform_int_distribution<std::size_t>(0, c - 1)(rng);
    const MetricReport r = compute_metrics(to_tensor(rows), labels);
    EXPECT_LE(r.hit_at_3, r.hit_at_5);
    EXPECT_LE(r.micro_f1, r.hit_at_3);
    EXPECT_GE(r.average_rank, 1.0);
    EXPECT_EQ(r.average_rank == 1.0, r.micro_f1 == 1.0);
  }
}

TEST(Metrics, UniformPredictionRankIsMidpoint) {
  const std::size_t c = 56;
  std::vector<std::size_t> labels(c * 10);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i % c;
  const Tensor probs({labels.size(), c}, 1.0 / c);
  EXPECT_DOUBLE_EQ(compute_metrics(probs, labels).average_rank, 28.5);
}

TEST(Metrics, RejectsBadInput) {
  const std::vector<std::size_t> none;
  EXPECT_THROW(compute_metrics(Tensor({1, 3}, 0.0), none), UsageError);
  const std::vector<std::size_t> two{0, 1};
  EXPECT_THROW(compute_metrics(Tensor({3, 3}, 0.0), two), DimensionError);
  const std::vector<double> row{0.5, 0.5};
  EXPECT_THROW(true_rank(row, 2), DimensionError);
}

TEST(Metrics, SummaryUsesSampleDeviation) {
  const std::vector<MetricReport> reports{{0.2, 0, 1, 0, 0}, {0.4, 0, 3, 0, 0}};
  const auto s = summarize(reports);
  EXPECT_DOUBLE_EQ(s.mean.micro_f1, 0.3);
  EXPECT_NEAR(s.sd.micro_f1, std::sqrt(0.02), 1e-15);
  EXPECT_NEAR(s.sd.average_rank, std::sqrt(2.0), 1e-15);
}

// Welch

TEST(Welch, MatchesClosedFormAndIntegratedCdf) {
  const std::vector<double> a{0.61, 0.64, 0.60, 0.66, 0.63};
  const std::vector<double> b{0.55, 0.59, 0.50, 0.58, 0.52, 0.57};
  const double ma = 3.14 / 5, mb = 3.31 / 6;
  double va = 0, vb = 0;
  for (double x : a) va += (x - ma) * (x - ma) / 4;
  for (double x : b) vb += (x - mb) * (x - mb) / 5;
  const double t = (ma - mb) / std::sqrt(va / 5 + vb / 6);
  const double df = std::pow(va / 5 + vb / 6, 2) / (std::pow(va / 5, 2) / 4 + std::pow(vb / 6, 2) / 5);
  const WelchResult r = welch_ttest(a, b);
  EXPECT_NEAR(r.t, t, 1e-10);
  EXPECT_NEAR(r.df, df, 1e-10);
  EXPECT_NEAR(r.p_value, 2 * (1 - oracle::student_t_cdf(std::abs(t), df)), 1e-8);
}

TEST(Welch, ShiftedIntegerSamples) {
  const std::vector<double> a{1, 2, 3, 4, 5}, b{2, 3, 4, 5, 6};
  // Equal variances 2.5: t = -1 / sqrt(1), df = 8.
  const WelchResult r = welch_ttest(a, b);
  EXPECT_NEAR(r.t, -1.0, 1e-12);
  EXPECT_NEAR(r.df, 8.0, 1e-12);
  EXPECT_NEAR(r.p_value, 2 * oracle::student_t_cdf(-1.0, 8.0), 1e-8);
}

TEST(Welch, IdenticalSamplesGivePOne) {
  const std::vector<double> a{0.5, 0.6, 0.7};
  EXPECT_DOUBLE_EQ(welch_ttest(a, a).p_value, 1.0);
  const std::vector<double> flat{0.4, 0.4};
  EXPECT_DOUBLE_EQ(welch_ttest(flat, flat).p_value, 1.0);
}

TEST(Welch, SeparatedSamplesSignificant) {
  const std::vector<double> a{0.90, 0.91, 0.92, 0.905, 0.915};
  const std::vector<double> b{0.30, 0.31, 0.29, 0.305, 0.295};
  EXPECT_LT(welch_ttest(a, b).p_value, 1e-3);
  const std::vector<double> one{1.0};
  EXPECT_THROW(welch_ttest(one, b), UsageError);
}

// Bad actors

TEST(BadActor, CorruptionChangesExactlyTheChosen) {
  std::vector<std::size_t> labels(97);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i % 7;
  const auto cl = corrupt_labels(labels, 7, 0.2, 3);
  std::size_t count = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    EXPECT_EQ(cl.corrupted[i], cl.reported[i] != labels[i]);
    EXPECT_LT(cl.reported[i], 7u);
    count += cl.corrupted[i];
  }
  EXPECT_EQ(count, 19u);
  EXPECT_THROW(corrupt_labels(labels, 7, 0.0, 3), UsageError);
  EXPECT_THROW(corrupt_labels(labels, 7, 1.0, 3), UsageError);
}

TEST(BadActor, PerfectModelAtKOne) {
  std::vector<std::size_t> labels(60);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i % 5;
  const auto r = bad_actor_experiment(one_hot(labels, 5), labels, 0.1, 1, 17);
  EXPECT_DOUBLE_EQ(r.precision, 1.0);
  EXPECT_DOUBLE_EQ(r.recall, 1.0);
  EXPECT_EQ(r.flagged, 6u);
}

TEST(BadActor, NothingFlaggedAtKEqualsC) {
  std::mt19937_64 rng(2);
  std::vector<std::size_t> labels(40);
  for (auto& l : labels) l = std::uniform_int_distribution<std::size_t>(0, 5)(rng);
  const auto r = bad_actor_experiment(to_tensor(random_rows(40, 6, rng, false)), labels, 0.25, 6, 1);
  EXPECT_EQ(r.flagged, 0u);
  EXPECT_DOUBLE_EQ(r.precision, 0.0);
  EXPECT_DOUBLE_EQ(r.recall, 0.0);
}

TEST(BadActor, MatchesBruteForce) {
  std::mt19937_64 rng(31);
  const std::size_t n = 50, c = 8;
  std::vector<std::size_t> labels(n);
  for (auto& l : labels) l = std::uniform_int_distribution<std::size_t>(0, c - 1)(rng);
  const auto rows = random_rows(n, c, rng, true);
  const Tensor probs = to_tensor(rows);
  const auto cl = corrupt_labels(labels, c, 0.3, 5);
  for (std::size_t k = 1; k <= c; ++k) {
    std::size_t flagged = 0, tp = 0, positives = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool flag = oracle::sorted_rank(rows[i], cl.reported[i]) > k;
      flagged += flag;
      positives += cl.corrupted[i];
      tp += flag && cl.corrupted[i];
    }
    const auto r = score_detection(flag_bad_actors(probs, cl.reported, k), cl.corrupted, k);
    EXPECT_EQ(r.flagged, flagged);
    EXPECT_DOUBLE_EQ(r.precision, flagged ? static_cast<double>(tp) / flagged : 0.0);
    EXPECT_DOUBLE_EQ(r.recall, static_cast<double>(tp) / positives);
  }
}

TEST(BadActor, CurveShrinksWithThreshold) {
  std::mt19937_64 rng(6);
  std::vector<std::size_t> labels(300);
  for (auto& l : labels) l = std::uniform_int_distribution<std::size_t>(0, 9)(rng);
  const auto curve = bad_actor_curve(to_tensor(random_rows(300, 10, rng, false)), labels, 0.1, 4);
  ASSERT_EQ(curve.size(), 10u);
  for (std::size_t k = 1; k < curve.size(); ++k) {
    EXPECT_LE(curve[k].flagged, curve[k - 1].flagged);
    EXPECT_LE(curve[k].recall, curve[k - 1].recall);
  }
  EXPECT_THROW(flag_bad_actors(Tensor({300, 10}, 0.1), labels, 0), UsageError);
  EXPECT_THROW(flag_bad_actors(Tensor({300, 10}, 0.1), labels, 11), UsageError);
}

// Projection

TEST(Mds, TwoPointsKeepTheirDistance) {
  const Tensor x({2, 3}, std::vector<double>{0, 0, 0, 3, 4, 0});
  const Tensor p = mds_project(x);
  EXPECT_NEAR(pair_distance(p, 0, 1), 5.0, 1e-9);
}

TEST(Mds, RecoversAPlaneEmbeddedInHighDimensions) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  const std::size_t m = 30, dim = 64;
  Eigen::MatrixXd basis = Eigen::MatrixXd::NullaryExpr(dim, 2, [&] { return g(rng); });
  basis = Eigen::HouseholderQR<Eigen::MatrixXd>(basis).householderQ() * Eigen::MatrixXd::Identity(dim, 2);
  Tensor x({m, dim});
  for (std::size_t i = 0; i < m; ++i) {
    const double u = g(rng) * 3, v = g(rng);
    for (std::size_t j = 0; j < dim; ++j) x[i * dim + j] = u * basis(j, 0) + v * basis(j, 1) + 7.0;
  }
  const Tensor p = mds_project(x);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) EXPECT_NEAR(pair_distance(p, i, j), pair_distance(x, i, j), 1e-6);
}

TEST(Mds, TranslationInvariant) {
  std::mt19937_64 rng(3);
  const Tensor x = oracle::random_tensor({12, 5}, rng);
  Tensor shifted = x;
  for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] += 100.0 + static_cast<double>(i % 5);
  const Tensor a = mds_project(x), b = mds_project(shifted);
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = i + 1; j < 12; ++j) EXPECT_NEAR(pair_distance(a, i, j), pair_distance(b, i, j), 1e-6);
}

TEST(Mds, IdenticalPointsCollapseToOrigin) {
  const Tensor p = mds_project(Tensor({6, 4}, 2.5));
  for (double v : p.values()) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(mds_project(Tensor({1, 4}, 0.0)), UsageError);
}

TEST(KMeans, OneClusterPerPoint) {
  std::mt19937_64 rng(1);
  const Tensor x = oracle::random_tensor({9, 3}, rng);
  const auto r = kmeans(x, 9, 4);
  EXPECT_DOUBLE_EQ(r.inertia.back(), 0.0);
  EXPECT_EQ(std::set<std::size_t>(r.assignment.begin(), r.assignment.end()).size(), 9u);
}

TEST(KMeans, SeparatesThreeBlobs) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 0.3);
  const double centers[3][2] = {{0, 0}, {10, 0}, {0, 10}};
  Tensor x({90, 2});
  for (std::size_t i = 0; i < 90; ++i) {
    x[2 * i] = centers[i / 30][0] + g(rng);
    x[2 * i + 1] = centers[i / 30][1] + g(rng);
  }
  const auto r = kmeans(x, 3, 5);
  for (std::size_t b = 0; b < 3; ++b)
    for (std::size_t i = b * 30; i < (b + 1) * 30; ++i) EXPECT_EQ(r.assignment[i], r.assignment[b * 30]);
  EXPECT_EQ(std::set<std::size_t>(r.assignment.begin(), r.assignment.end()).size(), 3u);
  for (std::size_t i = 1; i < r.inertia.size(); ++i) EXPECT_LE(r.inertia[i], r.inertia[i - 1] + 1e-9);
  EXPECT_THROW(kmeans(x, 0, 1), UsageError);
  EXPECT_THROW(kmeans(x, 91, 1), UsageError);
}

TEST(KMeans, InertiaNeverIncreases) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const auto r = kmeans(oracle::random_tensor({60, 4}, rng), 5, static_cast<std::uint64_t>(trial));
    for (std::size_t i = 1; i < r.inertia.size(); ++i) EXPECT_LE(r.inertia[i], r.inertia[i - 1] + 1e-9);
  }
}

// Sparsity sweep

DatasetBundle sweep_bundle() {
  WorldConfig c;
  c.num_merchants = 60;
  c.num_customers = 600;
  c.days = 14;
  c.num_categories = 3;
  c.seed = 5;
  return make_bundle(c, 5);
}

RunConfig sweep_config() {
  RunConfig cfg;
  cfg.width = 8;
  cfg.blocks = 1;
  cfg.train.epochs = 3;
  cfg.train.batch_size = 16;
  cfg.seed = 2;
  return cfg;
}

TEST(Sweep, KbarAboveLargestSupportChangesNothing) {
  const DatasetBundle b = sweep_bundle();
  const FoldData probe = prepare_fold(b, 0, 1u << 20);
  std::size_t max_nnz = 0;
  for (const auto& a : probe.train.affinity) max_nnz = std::max(max_nnz, a.entries.size());
  for (const auto& a : probe.test.affinity) max_nnz = std::max(max_nnz, a.entries.size());
  for (const auto& a : probe.validation.affinity) max_nnz = std::max(max_nnz, a.entries.size());
  ASSERT_GT(max_nnz, 0u);
  const auto rows = sparsity_sweep(b, {max_nnz, 4 * max_nnz}, sweep_config());
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].metrics, rows[1].metrics);
  EXPECT_EQ(rows[0].max_nnz, rows[1].max_nnz);
}

TEST(Sweep, MemoryEstimateMonotoneInKbar) {
  const DatasetBundle b = sweep_bundle();
  const FoldData f = prepare_fold(b, 1, 1u << 20);
  double last = 0.0;
  for (std::size_t kbar = 1; kbar <= 256; kbar *= 2) {
    const double m = affinity_memory_estimate(f.train, kbar, 16, 8);
    EXPECT_GE(m, last);
    last = m;
  }
  EXPECT_THROW(sparsity_sweep(b, {8, 4}, sweep_config()), UsageError);
  EXPECT_THROW(sparsity_sweep(b, {0, 4}, sweep_config()), UsageError);
}

TEST(Sweep, CsvHasOneRowPerKbar) {
  const auto rows = sparsity_sweep(sweep_bundle(), {2, 8}, sweep_config());
  std::ostringstream out;
  write_sweep_csv(out, rows);
  const std::string s = out.str();
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 3);
  EXPECT_EQ(s.rfind("kbar,max_nnz,", 0), 0u);
}

}  // namespace
}  // namespace mcid
