#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "mcid/model/encoders.hpp"
#include "mcid/synthdata/bundle.hpp"

namespace mcid {

// Per-feature z-scoring with statistics pooled over merchants and days.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer identity(std::size_t features) {
    return {std::vector<double>(features, 0.0), std::vector<double>(features, 1.0)};
  }

  // Fit over the (days, features) series of `ids`, each stored contiguously in `series`.
  static Standardizer fit(std::span<const double> series, std::size_t days, std::size_t features,
                          std::span<const std::size_t> ids) {
    if (ids.empty()) throw UsageError("standardizer: no merchants to fit on");
    Standardizer s{std::vector<double>(features, 0.0), std::vector<double>(features, 0.0)};
    const double count = static_cast<double>(ids.size() * days);
    for (std::size_t id : ids) {
      const double* row = series.data() + id * days * features;
      for (std::size_t t = 0; t < days * features; ++t) s.mean[t % features] += row[t];
    }
    for (auto& m : s.mean) m /= count;
    for (std::size_t id : ids) {
      const double* row = series.data() + id * days * features;
      for (std::size_t t = 0; t < days * features; ++t) {
        const double dev = row[t] - s.mean[t % features];
        s.scale[t % features] += dev * dev;
      }
    }
    for (auto& v : s.scale) {
      v = std::sqrt(v / count);
      if (!(v > 1e-12)) v = 1.0;
    }
    return s;
  }

  void apply(std::span<double> block) const {
    const std::size_t d = mean.size();
    for (std::size_t t = 0; t < block.size(); ++t) block[t] = (block[t] - mean[t % d]) / scale[t % d];
  }

  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

// Model-ready merchants: standardized series, prepared affinity weights, labels.
struct MerchantSet {
  std::size_t days = 0;
  std::size_t features = 0;
  std::vector<std::size_t> ids;
  std::vector<double> series;  // ids.size() x days x features
  std::vector<SparseWeights> affinity;
  std::vector<std::size_t> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const double> series_of(std::size_t i) const {
    return std::span<const double>(series).subspan(i * days * features, days * features);
  }
};

// `affinity` is indexed by merchant id and already restricted to the known
// (training) merchants.
inline MerchantSet make_merchant_set(const DatasetBundle& bundle, std::span<const std::size_t> ids,
                                     std::span<const AffinityVector> affinity, std::size_t kbar,
                                     const Standardizer& standardizer) {
  if (standardizer.mean.size() != bundle.features) throw DimensionError("merchant set: standardizer width mismatch");
  MerchantSet s;
  s.days = bundle.days;
  s.features = bundle.features;
  s.ids.assign(ids.begin(), ids.end());
  const std::size_t block = bundle.days * bundle.features;
  s.series.reserve(ids.size() * block);
  for (std::size_t id : ids) {
    if (id >= bundle.num_merchants) throw DimensionError("merchant set: id " + std::to_string(id) + " out of range");
    auto first = bundle.series.begin() + static_cast<std::ptrdiff_t>(id * block);
    s.series.insert(s.series.end(), first, first + static_cast<std::ptrdiff_t>(block));
    s.affinity.push_back(prepare_affinity(affinity[id], kbar));
    s.labels.push_back(bundle.labels[id]);
  }
  standardizer.apply(s.series);
  return s;
}

struct Batch {
  Tensor series;  // (B, days, features)
  std::vector<SparseWeights> affinity;
  std::vector<std::size_t> labels;

  std::size_t size() const { return labels.size(); }
};

inline Batch make_batch(const MerchantSet& set, std::span<const std::size_t> positions) {
  if (positions.empty()) throw UsageError("make_batch: empty batch");
  const std::size_t block = set.days * set.features;
  std::vector<double> data;
  data.reserve(positions.size() * block);
  Batch b{Tensor({1}), {}, {}};
  for (std::size_t p : positions) {
    auto s = set.series_of(p);
    data.insert(data.end(), s.begin(), s.end());
    if (!set.affinity.empty()) b.affinity.push_back(set.affinity[p]);
    b.labels.push_back(set.labels[p]);
  }
  b.series = Tensor({positions.size(), set.days, set.features}, std::move(data));
  return b;
}

}  // namespace mcid
