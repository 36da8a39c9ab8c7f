#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcid/errors.hpp"
#include "mcid/sparse_affinity.hpp"
#include "mcid/synthdata/features.hpp"
#include "mcid/synthdata/world.hpp"

namespace mcid {

inline constexpr int kBundleVersion = 1;
inline constexpr const char* kBundleFormat = "mcid-dataset";

// On-disk exchange unit between generator, trainer and evaluator:
//   manifest.json    counts, feature names, fold assignment, generator config
//   timeseries.bin   num_merchants x n x d float64, little-endian, row-major
//   affinity.tsv     merchant_id <TAB> reference_index <TAB> count
//   labels.tsv       merchant_id <TAB> category_index
// Affinity columns index the bundle's own merchant list (reference = every
// merchant); a training run restricts them to its training merchants.
struct DatasetBundle {
  std::size_t num_merchants = 0;
  std::size_t days = 0;
  std::size_t features = kNumFeatures;
  std::size_t categories = 0;
  std::vector<std::string> feature_names;
  std::vector<std::string> category_names;
  std::size_t num_folds = 5;
  std::uint64_t fold_seed = 0;
  std::vector<std::size_t> folds;
  std::vector<double> series;
  std::vector<AffinityVector> affinity;
  std::vector<std::size_t> labels;
  nlohmann::json generator;  // provenance only; null when absent

  std::size_t affinity_length() const { return num_merchants; }

  // (n, d) series of one merchant.
  Tensor series_of(std::size_t merchant) const {
    const std::size_t block = days * features;
    return Tensor({days, features}, std::vector<double>(series.begin() + static_cast<std::ptrdiff_t>(merchant * block),
                                                        series.begin() + static_cast<std::ptrdiff_t>((merchant + 1) * block)));
  }

  friend bool operator==(const DatasetBundle&, const DatasetBundle&) = default;
};

inline void to_json(nlohmann::json& j, const CategoryPattern& p) {
  j = {{"name", p.name},
       {"base_volume", p.base_volume},
       {"weekly", p.weekly},
       {"yearly_amplitude", p.yearly_amplitude},
       {"yearly_phase", p.yearly_phase},
       {"approval_rate", p.approval_rate},
       {"amount_mean", p.amount_mean},
       {"amount_sd", p.amount_sd},
       {"burst_rate", p.burst_rate},
       {"burst_days", p.burst_days},
       {"burst_gain", p.burst_gain},
       {"volatility", p.volatility}};
}

inline void from_json(const nlohmann::json& j, CategoryPattern& p) {
  p.name = j.value("name", p.name);
  p.base_volume = j.value("base_volume", p.base_volume);
  if (j.contains("weekly")) p.weekly = j.at("weekly").get<std::array<double, 7>>();
  p.yearly_amplitude = j.value("yearly_amplitude", p.yearly_amplitude);
  p.yearly_phase = j.value("yearly_phase", p.yearly_phase);
  p.approval_rate = j.value("approval_rate", p.approval_rate);
  p.amount_mean = j.value("amount_mean", p.amount_mean);
  p.amount_sd = j.value("amount_sd", p.amount_sd);
  p.burst_rate = j.value("burst_rate", p.burst_rate);
  p.burst_days = j.value("burst_days", p.burst_days);
  p.burst_gain = j.value("burst_gain", p.burst_gain);
  p.volatility = j.value("volatility", p.volatility);
}

inline void to_json(nlohmann::json& j, const WorldConfig& c) {
  j = {{"num_merchants", c.num_merchants},
       {"num_customers", c.num_customers},
       {"num_categories", c.num_categories},
       {"num_taste_clusters", c.num_taste_clusters},
       {"days", c.days},
       {"seed", c.seed},
       {"categories", c.categories},
       {"category_weights", c.category_weights},
       {"label_noise", c.label_noise},
       {"volume_sigma", c.volume_sigma},
       {"amount_sigma", c.amount_sigma},
       {"daily_noise_sigma", c.daily_noise_sigma},
       {"late_open_fraction", c.late_open_fraction},
       {"cluster_loyalty", c.cluster_loyalty},
       {"category_loyalty", c.category_loyalty},
       {"cluster_confounded", c.cluster_confounded}};
}

// Missing keys keep their defaults, so partial config files are accepted.
inline void from_json(const nlohmann::json& j, WorldConfig& c) {
  c.num_merchants = j.value("num_merchants", c.num_merchants);
  c.num_customers = j.value("num_customers", c.num_customers);
  c.num_categories = j.value("num_categories", c.num_categories);
  c.num_taste_clusters = j.value("num_taste_clusters", c.num_taste_clusters);
  c.days = j.value("days", c.days);
  c.seed = j.value("seed", c.seed);
  if (j.contains("categories")) c.categories = j.at("categories").get<std::vector<CategoryPattern>>();
  if (j.contains("category_weights")) c.category_weights = j.at("category_weights").get<std::vector<double>>();
  c.label_noise = j.value("label_noise", c.label_noise);
  c.volume_sigma = j.value("volume_sigma", c.volume_sigma);
  c.amount_sigma = j.value("amount_sigma", c.amount_sigma);
  c.daily_noise_sigma = j.value("daily_noise_sigma", c.daily_noise_sigma);
  c.late_open_fraction = j.value("late_open_fraction", c.late_open_fraction);
  c.cluster_loyalty = j.value("cluster_loyalty", c.cluster_loyalty);
  c.category_loyalty = j.value("category_loyalty", c.category_loyalty);
  c.cluster_confounded = j.value("cluster_confounded", c.cluster_confounded);
}

namespace detail {

inline void write_f64_le(std::ostream& out, const std::vector<double>& values) {
  std::vector<unsigned char> bytes(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + static_cast<std::size_t>(b)] = static_cast<unsigned char>(bits >> (8 * b));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline std::vector<double> read_f64_le(const std::filesystem::path& path, std::size_t expected, const std::string& field) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(field, "cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  if (size != expected * 8) {
    throw FormatError(field, "expected " + std::to_string(expected * 8) + " bytes, found " + std::to_string(size));
  }
  in.seekg(0);
  std::vector<unsigned char> bytes(size);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (!in) throw FormatError(field, "truncated read");
  std::vector<double> values(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[i * 8 + static_cast<std::size_t>(b)]) << (8 * b);
    values[i] = std::bit_cast<double>(bits);
  }
  return values;
}

inline std::size_t parse_index(const std::string& token, const std::string& field) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(token, &pos);
  } catch (const std::exception&) {
    throw FormatError(field, "not an integer: '" + token + "'");
  }
  if (pos != token.size() || (!token.empty() && token[0] == '-')) throw FormatError(field, "not an integer: '" + token + "'");
  return static_cast<std::size_t>(v);
}

template <class T>
T manifest_get(const nlohmann::json& m, const char* key) {
  if (!m.contains(key)) throw FormatError(key, "missing from manifest");
  try {
    return m.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(key, e.what());
  }
}

}  // namespace detail

inline nlohmann::json bundle_manifest(const DatasetBundle& b) {
  return {{"format", kBundleFormat},
          {"version", kBundleVersion},
          {"num_merchants", b.num_merchants},
          {"n", b.days},
          {"d", b.features},
          {"k", b.affinity_length()},
          {"c", b.categories},
          {"feature_names", b.feature_names},
          {"category_names", b.category_names},
          {"num_folds", b.num_folds},
          {"fold_seed", b.fold_seed},
          {"folds", b.folds},
          {"affinity_reference", "all_merchants"},
          {"timeseries", {{"file", "timeseries.bin"}, {"dtype", "float64-le"}, {"layout", "merchant,day,feature"}}},
          {"generator", b.generator}};
}

inline void check_consistent(const DatasetBundle& b) {
  if (b.feature_names.size() != b.features) throw FormatError("feature_names", "count differs from d");
  if (b.series.size() != b.num_merchants * b.days * b.features) throw FormatError("timeseries", "size differs from manifest");
  if (b.labels.size() != b.num_merchants) throw FormatError("labels", "one label per merchant required");
  if (b.affinity.size() != b.num_merchants) throw FormatError("affinity", "one affinity vector per merchant required");
  if (!b.folds.empty() && b.folds.size() != b.num_merchants) throw FormatError("folds", "one fold per merchant required");
  for (auto f : b.folds) {
    if (f >= b.num_folds) throw FormatError("folds", "fold index out of range");
  }
  for (auto l : b.labels) {
    if (l >= b.categories) throw FormatError("labels", "category index out of range");
  }
  for (std::size_t m = 0; m < b.affinity.size(); ++m) {
    if (b.affinity[m].length() != b.affinity_length()) throw FormatError("affinity", "vector length differs from k");
    for (const auto& e : b.affinity[m].entries()) {
      if (e.index == m) throw FormatError("affinity", "self pair for merchant " + std::to_string(m));
    }
  }
}

inline void write_bundle(const DatasetBundle& b, const std::filesystem::path& dir) {
  check_consistent(b);
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "manifest.json");
    if (!out) throw FormatError("manifest", "cannot write " + (dir / "manifest.json").string());
    out << bundle_manifest(b).dump(2) << '\n';
  }
  {
    std::ofstream out(dir / "timeseries.bin", std::ios::binary);
    detail::write_f64_le(out, b.series);
    if (!out) throw FormatError("timeseries", "write failed");
  }
  {
    std::ofstream out(dir / "affinity.tsv");
    for (std::size_t m = 0; m < b.affinity.size(); ++m) {
      for (const auto& e : b.affinity[m].entries()) out << m << '\t' << e.index << '\t' << e.count << '\n';
    }
    if (!out) throw FormatError("affinity", "write failed");
  }
  {
    std::ofstream out(dir / "labels.tsv");
    for (std::size_t m = 0; m < b.labels.size(); ++m) out << m << '\t' << b.labels[m] << '\n';
    if (!out) throw FormatError("labels", "write failed");
  }
}

inline DatasetBundle read_bundle(const std::filesystem::path& dir) {
  nlohmann::json m;
  {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw FormatError("manifest", "cannot open " + (dir / "manifest.json").string());
    try {
      in >> m;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("manifest", e.what());
    }
  }
  if (detail::manifest_get<std::string>(m, "format") != kBundleFormat) throw FormatError("format", "not a dataset bundle");
  if (const int v = detail::manifest_get<int>(m, "version"); v != kBundleVersion) {
    throw FormatError("version", "unsupported version " + std::to_string(v));
  }

  DatasetBundle b;
  b.num_merchants = detail::manifest_get<std::size_t>(m, "num_merchants");
  b.days = detail::manifest_get<std::size_t>(m, "n");
  b.features = detail::manifest_get<std::size_t>(m, "d");
  b.categories = detail::manifest_get<std::size_t>(m, "c");
  if (detail::manifest_get<std::size_t>(m, "k") != b.num_merchants) throw FormatError("k", "must equal num_merchants");
  b.feature_names = detail::manifest_get<std::vector<std::string>>(m, "feature_names");
  b.category_names = detail::manifest_get<std::vector<std::string>>(m, "category_names");
  b.num_folds = detail::manifest_get<std::size_t>(m, "num_folds");
  b.fold_seed = detail::manifest_get<std::uint64_t>(m, "fold_seed");
  b.folds = detail::manifest_get<std::vector<std::size_t>>(m, "folds");
  if (m.contains("generator")) b.generator = m.at("generator");
  if (b.feature_names.size() != b.features) {
    throw FormatError("d", "manifest declares d=" + std::to_string(b.features) + " but lists " +
                               std::to_string(b.feature_names.size()) + " feature names");
  }

  b.series = detail::read_f64_le(dir / "timeseries.bin", b.num_merchants * b.days * b.features, "timeseries");

  std::vector<std::vector<AffinityVector::Entry>> entries(b.num_merchants);
  {
    std::ifstream in(dir / "affinity.tsv");
    if (!in) throw FormatError("affinity", "cannot open affinity.tsv");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      std::istringstream fields(line);
      std::string a, r, c, extra;
      if (!(fields >> a >> r >> c) || (fields >> extra)) {
        throw FormatError("affinity", "line " + std::to_string(line_no) + " does not have three columns");
      }
      const std::size_t merchant = detail::parse_index(a, "affinity");
      const std::size_t ref = detail::parse_index(r, "affinity");
      const std::size_t count = detail::parse_index(c, "affinity");
      if (merchant >= b.num_merchants || ref >= b.num_merchants) {
        throw FormatError("affinity", "line " + std::to_string(line_no) + " references an unknown merchant");
      }
      if (count == 0) throw FormatError("affinity", "line " + std::to_string(line_no) + " has a zero count");
      entries[merchant].push_back({ref, static_cast<std::int64_t>(count)});
    }
  }
  b.affinity.reserve(b.num_merchants);
  for (auto& e : entries) {
    std::sort(e.begin(), e.end(), [](const auto& x, const auto& y) { return x.index < y.index; });
    try {
      b.affinity.emplace_back(b.num_merchants, std::move(e));
    } catch (const std::invalid_argument& err) {
      throw FormatError("affinity", err.what());
    }
  }

  b.labels.assign(b.num_merchants, b.categories);
  {
    std::ifstream in(dir / "labels.tsv");
    if (!in) throw FormatError("labels", "cannot open labels.tsv");
    std::string a, c;
    std::size_t seen = 0;
    while (in >> a >> c) {
      const std::size_t merchant = detail::parse_index(a, "labels");
      if (merchant >= b.num_merchants) throw FormatError("labels", "unknown merchant " + a);
      b.labels[merchant] = detail::parse_index(c, "labels");
      ++seen;
    }
    if (seen != b.num_merchants) {
      throw FormatError("labels", "expected " + std::to_string(b.num_merchants) + " rows, found " + std::to_string(seen));
    }
  }
  check_consistent(b);
  return b;
}

}  // namespace mcid
