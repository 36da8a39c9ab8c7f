#pragma once

#include <Eigen/Dense>
#include <limits>
#include <span>

#include "mcid/model/data.hpp"

namespace mcid {

inline Tensor baseline_random(std::size_t queries, std::size_t classes) {
  if (classes == 0) throw UsageError("random baseline: no classes");
  if (queries == 0) throw UsageError("random baseline: no queries");
  return Tensor({queries, classes}, 1.0 / static_cast<double>(classes));
}

// Index of the training merchant closest in Euclidean distance; ties go to
// the lower index.
inline std::size_t nearest_neighbor(const MerchantSet& train_set, std::span<const double> query) {
  const std::size_t width = train_set.days * train_set.features;
  if (query.size() != width) throw DimensionError("1nn: query length does not match training series");
  Eigen::Map<const Eigen::VectorXd> q(query.data(), static_cast<Eigen::Index>(width));
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < train_set.size(); ++i) {
    Eigen::Map<const Eigen::VectorXd> x(train_set.series.data() + i * width, static_cast<Eigen::Index>(width));
    const double dist = (x - q).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  return best;
}

// One-hot distributions of each query's nearest training merchant's label.
inline Tensor baseline_1nn(const MerchantSet& train_set, const MerchantSet& queries, std::size_t classes) {
  if (train_set.size() == 0) throw UsageError("1nn: empty training set");
  if (queries.days != train_set.days || queries.features != train_set.features) {
    throw DimensionError("1nn: query and training series shapes differ");
  }
  Tensor out({queries.size(), classes}, 0.0);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const std::size_t label = train_set.labels[nearest_neighbor(train_set, queries.series_of(i))];
    if (label >= classes) throw DimensionError("1nn: training label outside class range");
    out[i * classes + label] = 1.0;
  }
  return out;
}

}  // namespace mcid
