#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <unistd.h>

#include "mcid/synthdata/dataset.hpp"

#include "oracles.hpp"

namespace mcid {
namespace {

WorldConfig small_world(std::uint64_t seed = 3) {
  WorldConfig c;
  c.num_merchants = 40;
  c.num_customers = 800;
  c.days = 28;
  c.num_categories = 3;
  c.seed = seed;
  return c;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag)
      : path_(std::filesystem::temp_directory_path() / ("mcid_test_" + tag + "_" + std::to_string(::getpid()))) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

TEST(World, SameSeedSameLog) {
  const World a = generate_world(small_world());
  const World b = generate_world(small_world());
  EXPECT_EQ(a.log, b.log);
  EXPECT_EQ(a.labels(), b.labels());
  EXPECT_NE(a.log, generate_world(small_world(4)).log);
}

TEST(World, NoCustomersNoTransactions) {
  WorldConfig c = small_world();
  c.num_customers = 0;
  const World w = generate_world(c);
  EXPECT_TRUE(w.log.empty());
  EXPECT_EQ(w.merchants.size(), c.num_merchants);
}

TEST(World, WeekendPeakShowsInCounts) {
  WorldConfig c;
  c.num_merchants = 20;
  c.num_customers = 2000;
  c.num_categories = 1;
  c.days = 364;
  c.late_open_fraction = 0.0;
  CategoryPattern p;
  p.name = "weekend";
  p.base_volume = 5.0;
  p.weekly = {0.6, 0.6, 0.6, 0.6, 0.6, 1.7, 1.7};
  c.categories = {p};
  const World w = generate_world(c);
  double weekday = 0, weekend = 0;
  for (const auto& t : w.log) (t.day % 7 >= 5 ? weekend : weekday) += 1;
  EXPECT_GT(weekend / (2.0 * 52), weekday / (5.0 * 52));
}

TEST(World, LabelFrequenciesMatchMixture) {
  WorldConfig c;
  c.num_merchants = 20000;
  c.num_customers = 0;
  c.num_categories = 4;
  c.category_weights = {0.1, 0.2, 0.3, 0.4};
  const auto labels = generate_world(c).labels();
  std::vector<double> counts(4, 0.0);
  for (auto l : labels) counts[l] += 1;
  for (std::size_t k = 0; k < 4; ++k) {
    const double p = c.category_weights[k];
    const double n = static_cast<double>(c.num_merchants);
    EXPECT_LE(std::abs(counts[k] - n * p), 3.0 * std::sqrt(n * p * (1 - p))) << "category " << k;
  }
}

TEST(World, RejectsInvalidConfig) {
  WorldConfig c = small_world();
  c.num_merchants = 0;
  EXPECT_THROW(validate(c), UsageError);
  c = small_world();
  c.categories = default_patterns(c.num_categories, 1);
  c.categories[0].approval_rate = 1.5;
  EXPECT_THROW(validate(c), UsageError);
  c = small_world();
  c.categories = default_patterns(c.num_categories, 1);
  c.categories[1].weekly[3] = -0.1;
  EXPECT_THROW(validate(c), UsageError);
}

TEST(World, ExtraCategoriesAreGenerated) {
  const auto patterns = default_patterns(12, 5);
  ASSERT_EQ(patterns.size(), 12u);
  std::set<std::string> names;
  for (const auto& p : patterns) names.insert(p.name);
  EXPECT_EQ(names.size(), 12u);
}

TEST(Features, WorkedDay) {
  TransactionLog log{{0, 0, 1, 10.0, true}, {0, 0, 1, 20.0, true}, {0, 0, 2, 30.0, true}, {0, 0, 3, 5.0, false}};
  const Tensor f = extract_features(log, 0, 1);
  const std::vector<double> expected{3, 1, 2, 1, 60, 5, 0.75, 0.25, 20, 5};
  ASSERT_EQ(f.shape(), (Shape{1, 10}));
  for (std::size_t i = 0; i < 10; ++i) EXPECT_DOUBLE_EQ(f[i], expected[i]) << kFeatureNames[i];
}

TEST(Features, QuietDayIsZero) {
  TransactionLog log{{1, 0, 1, 10.0, true}};
  const Tensor f = extract_features(log, 0, 3);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(f.at(0, i), 0.0);
    EXPECT_EQ(f.at(2, i), 0.0);
  }
}

TEST(Features, RatesSumToOneOnActiveDays) {
  const World w = generate_world(small_world());
  const auto all = extract_all_features(w.log, 40, 28);
  std::size_t active = 0;
  for (std::size_t row = 0; row < 40 * 28; ++row) {
    const double* f = all.data() + row * 10;
    if (f[0] + f[1] == 0) continue;
    ++active;
    EXPECT_NEAR(f[6] + f[7], 1.0, 1e-12);
  }
  EXPECT_GT(active, 0u);
}

TEST(Features, BulkMatchesPerMerchant) {
  const World w = generate_world(small_world());
  const auto all = extract_all_features(w.log, 40, 28);
  for (std::int32_t m : {0, 7, 39}) {
    const Tensor one = extract_features(w.log, m, 28);
    for (std::size_t i = 0; i < one.size(); ++i) EXPECT_EQ(one[i], all[static_cast<std::size_t>(m) * 280 + i]);
  }
}

// Partitioning the log by customer keeps every card on one side, so counts,
// distinct cards and amounts add up; rates and averages are recomputed.
TEST(Features, AdditiveOverCustomerPartitions) {
  const World w = generate_world(small_world(9));
  TransactionLog even, odd;
  for (const auto& t : w.log) (t.customer % 2 == 0 ? even : odd).push_back(t);
  for (std::int32_t m : {1, 12, 30}) {
    const Tensor whole = extract_features(w.log, m, 28);
    const Tensor a = extract_features(even, m, 28);
    const Tensor b = extract_features(odd, m, 28);
    for (std::size_t day = 0; day < 28; ++day) {
      for (std::size_t f = 0; f < 6; ++f) EXPECT_NEAR(whole.at(day, f), a.at(day, f) + b.at(day, f), 1e-9);
      const double n_appr = a.at(day, 0) + b.at(day, 0);
      const double n_decl = a.at(day, 1) + b.at(day, 1);
      if (n_appr + n_decl == 0) continue;
      EXPECT_NEAR(whole.at(day, 6), n_appr / (n_appr + n_decl), 1e-12);
      if (n_appr > 0) {
        EXPECT_NEAR(whole.at(day, 8), (a.at(day, 4) + b.at(day, 4)) / n_appr, 1e-9);
      }
    }
  }
}

TEST(Affinity, TwoMerchantsSharingTwoCustomers) {
  TransactionLog log{{0, 0, 10, 1.0, true}, {0, 0, 11, 1.0, true}, {3, 0, 12, 1.0, true},
                     {1, 1, 10, 1.0, true}, {2, 1, 11, 1.0, false}, {2, 1, 11, 1.0, true}};
  const std::vector<std::size_t> train{0, 1};
  const auto aff = build_affinity(log, 2, train);
  EXPECT_EQ(aff[0], AffinityVector(2, {{1, 2}}));
  EXPECT_EQ(aff[1], AffinityVector(2, {{0, 2}}));
}

TEST(Affinity, IsolatedMerchantHasZeroVector) {
  TransactionLog log{{0, 0, 10, 1.0, true}, {0, 1, 10, 1.0, true}, {0, 2, 99, 1.0, true}};
  const std::vector<std::size_t> train{0, 1};
  const auto aff = build_affinity(log, 3, train);
  EXPECT_EQ(aff[2].nnz(), 0u);
  EXPECT_EQ(aff[2].length(), 2u);
}

TEST(Affinity, DuplicateTrainIdsRejected) {
  const std::vector<std::size_t> train{0, 0};
  EXPECT_THROW(build_affinity({}, 2, train), UsageError);
}

TEST(Affinity, MatchesExhaustiveIntersection) {
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t merchants = 6;
    TransactionLog log;
    std::uniform_int_distribution<int> customer(0, 14), merchant(0, 5), count(5, 40);
    for (int i = count(rng); i > 0; --i) log.push_back({0, merchant(rng), customer(rng), 1.0, true});
    std::vector<std::size_t> train{4, 0, 2, 5};
    const auto aff = build_affinity(log, merchants, train);

    std::vector<std::set<std::int64_t>> customers(merchants);
    for (const auto& t : log) customers[static_cast<std::size_t>(t.merchant)].insert(t.customer);
    for (std::size_t m = 0; m < merchants; ++m) {
      std::vector<std::int64_t> dense(train.size(), 0);
      for (const auto& e : aff[m].entries()) dense[e.index] = e.count;
      for (std::size_t j = 0; j < train.size(); ++j) {
        const std::int64_t expected =
            train[j] == m ? 0 : static_cast<std::int64_t>(oracle::set_intersection_size(customers[m], customers[train[j]]));
        EXPECT_EQ(dense[j], expected) << "seed " << seed << " merchant " << m << " ref " << train[j];
      }
    }
  }
}

TEST(Affinity, RestrictionMatchesDirectConstruction) {
  const World w = generate_world(small_world(11));
  std::vector<std::size_t> everyone(40);
  std::iota(everyone.begin(), everyone.end(), std::size_t{0});
  const auto full = build_affinity(w.log, 40, everyone);
  const std::vector<std::size_t> train{3, 17, 5, 22, 39, 0};
  EXPECT_EQ(restrict_affinity(full, train), build_affinity(w.log, 40, train));
}

TEST(Affinity, CountsBoundedByCustomers) {
  const auto b = make_bundle(small_world(13));
  for (const auto& v : b.affinity)
    for (const auto& e : v.entries()) EXPECT_LE(e.count, 800);
}

TEST(Bundle, RoundTripIsExact) {
  WorldConfig c = small_world();
  c.num_merchants = 10;
  c.num_categories = 2;
  const DatasetBundle b = make_bundle(c, 2);
  TempDir dir("roundtrip");
  write_bundle(b, dir.path());
  EXPECT_EQ(read_bundle(dir.path()), b);
}

TEST(Bundle, TimeseriesBlockMustMatchManifest) {
  WorldConfig c = small_world();
  c.num_merchants = 10;
  c.num_categories = 2;
  DatasetBundle b = make_bundle(c, 2);
  TempDir dir("d9");
  write_bundle(b, dir.path());
  // Rewrite the block as if each day had 9 features.
  std::vector<double> nine(10 * 28 * 9, 1.0);
  std::ofstream out(dir.path() / "timeseries.bin", std::ios::binary | std::ios::trunc);
  detail::write_f64_le(out, nine);
  out.close();
  try {
    read_bundle(dir.path());
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.field(), "timeseries");
  }
}

TEST(Bundle, UnknownVersionNamesField) {
  WorldConfig c = small_world();
  c.num_merchants = 10;
  c.num_categories = 2;
  TempDir dir("version");
  write_bundle(make_bundle(c, 2), dir.path());
  nlohmann::json m;
  std::ifstream(dir.path() / "manifest.json") >> m;
  m["version"] = 99;
  std::ofstream(dir.path() / "manifest.json") << m.dump(2);
  try {
    read_bundle(dir.path());
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.field(), "version");
  }
}

TEST(Bundle, FullScaleShapeAccepted) {
  DatasetBundle b;
  b.num_merchants = 5;
  b.days = 911;
  b.categories = 1;
  b.feature_names.assign(kFeatureNames.begin(), kFeatureNames.end());
  b.category_names = {"only"};
  b.num_folds = 5;
  b.folds = {0, 1, 2, 3, 4};
  b.series.assign(5 * 911 * 10, 0.5);
  for (std::size_t m = 0; m < 5; ++m) b.affinity.emplace_back(5, std::vector<AffinityVector::Entry>{});
  b.labels.assign(5, 0);
  TempDir dir("full_scale");
  write_bundle(b, dir.path());
  const DatasetBundle r = read_bundle(dir.path());
  EXPECT_EQ(r.series_of(3).shape(), (Shape{911, 10}));
  EXPECT_EQ(r, b);
}

TEST(Bundle, SelfPairsRejected) {
  WorldConfig c = small_world();
  c.num_merchants = 10;
  c.num_categories = 2;
  DatasetBundle b = make_bundle(c, 2);
  b.affinity[2] = AffinityVector(10, {{2, 4}});
  TempDir dir("self");
  EXPECT_THROW(write_bundle(b, dir.path()), std::exception);
}

}  // namespace
}  // namespace mcid
