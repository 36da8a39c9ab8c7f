#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "mcid/errors.hpp"

namespace mcid {

// Transaction behaviour shared by all merchants of one category.
struct CategoryPattern {
  std::string name;
  double base_volume = 6.0;  // mean transactions per day before modulation
  std::array<double, 7> weekly{1, 1, 1, 1, 1, 1, 1};  // index = day mod 7
  double yearly_amplitude = 0.0;
  double yearly_phase = 0.0;  // days
  double approval_rate = 0.95;
  double amount_mean = 30.0;
  double amount_sd = 10.0;
  // Promotions/events: bursts start at random days (expected burst_rate per
  // 365 days) and multiply the volume by burst_gain for burst_days days.
  double burst_rate = 0.0;
  std::size_t burst_days = 1;
  double burst_gain = 1.0;
  // Multiplies WorldConfig::daily_noise_sigma for this category.
  double volatility = 1.0;

  friend bool operator==(const CategoryPattern&, const CategoryPattern&) = default;
};

struct WorldConfig {
  std::size_t num_merchants = 2000;
  std::size_t num_customers = 50000;
  std::size_t num_categories = 8;
  std::size_t num_taste_clusters = 5;
  std::size_t days = 364;
  std::uint64_t seed = 7;

  // One entry per category; filled by default_patterns() when left empty.
  std::vector<CategoryPattern> categories;
  // Relative category frequencies; uniform when empty.
  std::vector<double> category_weights;
  // Fraction of merchants whose recorded label is replaced by another category.
  double label_noise = 0.0;

  // Per-merchant heterogeneity.
  double volume_sigma = 0.6;        // log-normal spread of a merchant's volume
  double amount_sigma = 0.25;       // log-normal spread of a merchant's ticket size
  double daily_noise_sigma = 0.35;  // log-normal day-to-day volume noise
  double late_open_fraction = 0.3;  // merchants that start trading part-way through

  // Customer selection: with probability cluster_loyalty a transaction's
  // customer comes from the merchant's taste cluster, otherwise from anyone.
  // Within the cluster, category_loyalty of draws prefer customers whose
  // favourite category matches the merchant's.
  double cluster_loyalty = 0.85;
  double category_loyalty = 0.3;

  // When set, a merchant of category c in taste cluster t trades with the
  // temporal pattern of category (c + t) mod num_categories.
  bool cluster_confounded = false;

  friend bool operator==(const WorldConfig&, const WorldConfig&) = default;
};

struct Transaction {
  std::int32_t day;
  std::int32_t merchant;
  std::int64_t customer;
  double amount;
  bool approved;

  friend bool operator==(const Transaction&, const Transaction&) = default;
};

using TransactionLog = std::vector<Transaction>;

struct MerchantProfile {
  std::size_t category;       // true business type
  std::size_t label;          // reported category (differs under label noise)
  std::size_t taste_cluster;
  std::size_t pattern;        // index of the CategoryPattern it trades with
  std::size_t open_day;
};

struct World {
  TransactionLog log;
  std::vector<MerchantProfile> merchants;

  std::vector<std::size_t> labels() const {
    std::vector<std::size_t> out;
    out.reserve(merchants.size());
    for (const auto& m : merchants) out.push_back(m.label);
    return out;
  }
};

namespace detail {

inline std::array<double, 7> normalized_week(std::array<double, 7> w) {
  double mean = 0.0;
  for (double v : w) mean += v / 7.0;
  for (double& v : w) v /= mean;
  return w;
}

}  // namespace detail

// Eight hand-written archetypes; further categories are drawn from `seed`.
inline std::vector<CategoryPattern> default_patterns(std::size_t count, std::uint64_t seed) {
  using detail::normalized_week;
  // Day 0 is a Monday.
  // Pairs with similar average behaviour (weekly shape, ticket size) that
  // differ in day-to-day volatility and bursts.
  std::vector<CategoryPattern> table{
      {"grocery", 9.0, normalized_week({0.8, 0.8, 0.85, 0.9, 1.1, 1.5, 1.3}), 0.10, 330.0, 0.97, 45.0, 25.0,
       0.0, 1, 1.0, 0.4},
      {"department_store", 8.0, normalized_week({0.8, 0.8, 0.85, 0.9, 1.15, 1.5, 1.25}), 0.15, 340.0, 0.95, 55.0, 35.0,
       6.0, 3, 2.5, 1.6},
      {"fast_food", 11.0, normalized_week({1.0, 1.0, 1.0, 1.05, 1.15, 1.0, 0.8}), 0.05, 180.0, 0.96, 12.0, 4.0,
       0.0, 1, 1.0, 0.4},
      {"cafe", 10.0, normalized_week({1.0, 1.0, 1.05, 1.05, 1.1, 1.0, 0.85}), 0.10, 200.0, 0.96, 10.0, 5.0,
       8.0, 1, 3.0, 1.6},
      {"pharmacy", 6.0, normalized_week({1.15, 1.1, 1.05, 1.1, 1.1, 0.9, 0.6}), 0.20, 20.0, 0.96, 25.0, 15.0,
       0.0, 1, 1.0, 0.4},
      {"gas_station", 7.0, normalized_week({1.1, 1.05, 1.0, 1.05, 1.15, 0.9, 0.75}), 0.25, 180.0, 0.93, 35.0, 15.0,
       0.0, 1, 1.0, 1.6},
      {"restaurant", 6.0, normalized_week({0.5, 0.7, 0.8, 1.0, 1.5, 1.6, 0.9}), 0.15, 340.0, 0.95, 48.0, 22.0,
       0.0, 1, 1.0, 0.5},
      {"hotel", 5.0, normalized_week({0.6, 0.7, 0.8, 0.95, 1.45, 1.6, 0.9}), 0.35, 170.0, 0.92, 60.0, 40.0,
       5.0, 4, 2.0, 1.4},
  };

  if (count <= table.size()) {
    table.resize(count);
    return table;
  }
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (table.size() < count) {
    CategoryPattern p;
    p.name = "category_" + std::to_string(table.size());
    p.base_volume = 3.0 + 9.0 * unit(rng);
    std::array<double, 7> week{};
    for (double& v : week) v = std::max(0.05, 1.0 + 0.35 * gauss(rng));
    p.weekly = normalized_week(week);
    p.yearly_amplitude = 0.6 * unit(rng);
    p.yearly_phase = 365.0 * unit(rng);
    p.approval_rate = 0.85 + 0.14 * unit(rng);
    p.amount_mean = std::exp(std::log(8.0) + (std::log(200.0) - std::log(8.0)) * unit(rng));
    p.amount_sd = p.amount_mean * (0.2 + 0.6 * unit(rng));
    table.push_back(std::move(p));
  }
  return table;
}

inline void validate(const WorldConfig& config) {
  if (config.num_merchants == 0) throw UsageError("world: num_merchants must be positive");
  if (config.num_categories == 0) throw UsageError("world: num_categories must be positive");
  if (config.num_taste_clusters == 0) throw UsageError("world: num_taste_clusters must be positive");
  if (config.days == 0) throw UsageError("world: days must be positive");
  if (!config.categories.empty() && config.categories.size() != config.num_categories) {
    throw UsageError("world: categories lists " + std::to_string(config.categories.size()) + " patterns for " +
                     std::to_string(config.num_categories) + " categories");
  }
  if (!config.category_weights.empty()) {
    if (config.category_weights.size() != config.num_categories) {
      throw UsageError("world: category_weights size mismatch");
    }
    for (double w : config.category_weights) {
      if (!(w >= 0.0)) throw UsageError("world: category_weights must be nonnegative");
    }
  }
  for (const auto& p : config.categories) {
    for (double w : p.weekly) {
      if (!(w >= 0.0)) throw UsageError("world: weekly profile of " + p.name + " must be nonnegative");
    }
    if (!(p.approval_rate >= 0.0 && p.approval_rate <= 1.0)) {
      throw UsageError("world: approval_rate of " + p.name + " outside [0, 1]");
    }
    if (!(p.volatility >= 0.0)) throw UsageError("world: volatility of " + p.name + " must be nonnegative");
    if (!(p.burst_rate >= 0.0) || p.burst_days == 0 || !(p.burst_gain >= 0.0)) {
      throw UsageError("world: invalid burst parameters for " + p.name);
    }
    if (!(p.amount_mean > 0.0) || !(p.amount_sd >= 0.0) || !(p.base_volume >= 0.0)) {
      throw UsageError("world: invalid volume or amount distribution for " + p.name);
    }
  }
  if (!(config.label_noise >= 0.0 && config.label_noise < 1.0)) throw UsageError("world: label_noise outside [0, 1)");
  for (double f : {config.late_open_fraction, config.cluster_loyalty, config.category_loyalty}) {
    if (!(f >= 0.0 && f <= 1.0)) throw UsageError("world: loyalty/open fractions must lie in [0, 1]");
  }
}

// Expected transactions on `day` before merchant-level scaling and noise.
inline double expected_daily_volume(const CategoryPattern& p, std::size_t day) {
  const double seasonal =
      1.0 + p.yearly_amplitude * std::sin(2.0 * std::numbers::pi * (static_cast<double>(day) + p.yearly_phase) / 365.0);
  return p.base_volume * p.weekly[day % 7] * seasonal;
}

// Simulates the payment network. Deterministic in `config` (including seed);
// each merchant's stream comes from its own generator so output order is by
// merchant id then day.
inline World generate_world(WorldConfig config) {
  validate(config);
  if (config.categories.empty()) config.categories = default_patterns(config.num_categories, config.seed);
  const std::size_t clusters = config.num_taste_clusters;
  const std::size_t categories = config.num_categories;

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Customers: taste cluster and favourite category.
  std::vector<std::vector<std::int64_t>> cluster_pool(clusters);
  std::vector<std::vector<std::int64_t>> niche_pool(clusters * categories);
  {
    std::uniform_int_distribution<std::size_t> pick_cluster(0, clusters - 1);
    std::uniform_int_distribution<std::size_t> pick_category(0, categories - 1);
    for (std::size_t c = 0; c < config.num_customers; ++c) {
      const std::size_t t = pick_cluster(rng);
      const std::size_t f = pick_category(rng);
      cluster_pool[t].push_back(static_cast<std::int64_t>(c));
      niche_pool[t * categories + f].push_back(static_cast<std::int64_t>(c));
    }
  }

  World world;
  world.merchants.reserve(config.num_merchants);
  {
    std::vector<double> weights = config.category_weights;
    if (weights.empty()) weights.assign(categories, 1.0);
    std::discrete_distribution<std::size_t> pick_category(weights.begin(), weights.end());
    std::uniform_int_distribution<std::size_t> pick_cluster(0, clusters - 1);
    std::uniform_int_distribution<std::size_t> pick_other(1, std::max<std::size_t>(1, categories - 1));
    std::uniform_int_distribution<std::size_t> pick_open(0, config.days / 2);
    for (std::size_t m = 0; m < config.num_merchants; ++m) {
      MerchantProfile p{};
      p.category = pick_category(rng);
      p.taste_cluster = pick_cluster(rng);
      p.label = p.category;
      if (categories > 1 && unit(rng) < config.label_noise) p.label = (p.category + pick_other(rng)) % categories;
      p.pattern = config.cluster_confounded ? (p.category + p.taste_cluster) % categories : p.category;
      p.open_day = unit(rng) < config.late_open_fraction ? pick_open(rng) : 0;
      world.merchants.push_back(p);
    }
  }
  if (config.num_customers == 0) return world;

  for (std::size_t m = 0; m < config.num_merchants; ++m) {
    const MerchantProfile& profile = world.merchants[m];
    const CategoryPattern& pattern = config.categories[profile.pattern];
    std::seed_seq seq{config.seed, static_cast<std::uint64_t>(m), std::uint64_t{0x5eed}};
    std::mt19937_64 mrng(seq);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const double volume_scale = std::exp(config.volume_sigma * gauss(mrng) - 0.5 * config.volume_sigma * config.volume_sigma);
    const double amount_scale = std::exp(config.amount_sigma * gauss(mrng));
    // Log-normal ticket size with the pattern's mean and sd.
    const double cv2 = (pattern.amount_sd * pattern.amount_sd) / (pattern.amount_mean * pattern.amount_mean);
    const double log_sd = std::sqrt(std::log1p(cv2));
    const double log_mean = std::log(pattern.amount_mean * amount_scale) - 0.5 * log_sd * log_sd;
    std::lognormal_distribution<double> amount(log_mean, log_sd);
    std::bernoulli_distribution approve(pattern.approval_rate);

    const auto& home = cluster_pool[profile.taste_cluster];
    const auto& niche = niche_pool[profile.taste_cluster * categories + profile.category];
    auto draw_customer = [&]() -> std::int64_t {
      const double u = unit(mrng);
      if (u < config.cluster_loyalty && !home.empty()) {
        if (unit(mrng) < config.category_loyalty && !niche.empty()) {
          return niche[std::uniform_int_distribution<std::size_t>(0, niche.size() - 1)(mrng)];
        }
        return home[std::uniform_int_distribution<std::size_t>(0, home.size() - 1)(mrng)];
      }
      return std::uniform_int_distribution<std::int64_t>(0, static_cast<std::int64_t>(config.num_customers) - 1)(mrng);
    };

    const double noise_sigma = config.daily_noise_sigma * pattern.volatility;
    std::vector<double> burst(config.days, 1.0);
    if (pattern.burst_rate > 0.0) {
      std::poisson_distribution<std::size_t> num_bursts(pattern.burst_rate * static_cast<double>(config.days) / 365.0);
      std::uniform_int_distribution<std::size_t> start(0, config.days - 1);
      for (std::size_t b = num_bursts(mrng); b > 0; --b) {
        const std::size_t first = start(mrng);
        for (std::size_t day = first; day < std::min(config.days, first + pattern.burst_days); ++day) {
          burst[day] = pattern.burst_gain;
        }
      }
    }

    for (std::size_t day = profile.open_day; day < config.days; ++day) {
      const double noise = std::exp(noise_sigma * gauss(mrng) - 0.5 * noise_sigma * noise_sigma);
      const double expected = expected_daily_volume(pattern, day) * burst[day] * volume_scale * noise;
      const auto count = static_cast<std::int64_t>(std::llround(std::max(0.0, expected)));
      for (std::int64_t i = 0; i < count; ++i) {
        world.log.push_back(Transaction{static_cast<std::int32_t>(day), static_cast<std::int32_t>(m), draw_customer(),
                                        amount(mrng), approve(mrng)});
      }
    }
  }
  return world;
}

}  // namespace mcid
