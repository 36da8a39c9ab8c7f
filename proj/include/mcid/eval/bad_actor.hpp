#pragma once

#include <algorithm>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "mcid/eval/metrics.hpp"

namespace mcid {

struct CorruptedLabels {
  std::vector<std::size_t> reported;
  std::vector<bool> corrupted;
};

// Picks round(fraction * N) merchants with `seed` and moves each to a
// uniformly chosen different category.
inline CorruptedLabels corrupt_labels(std::span<const std::size_t> labels, std::size_t classes, double fraction,
                                      std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw UsageError("bad actors: fraction must lie in (0, 1)");
  if (classes < 2) throw UsageError("bad actors: need at least two categories");
  CorruptedLabels out{{labels.begin(), labels.end()}, std::vector<bool>(labels.size(), false)};
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(labels.size())));
  std::uniform_int_distribution<std::size_t> shift(1, classes - 1);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t m = order[i];
    out.reported[m] = (labels[m] + shift(rng)) % classes;
    out.corrupted[m] = true;
  }
  return out;
}

// A merchant is flagged when its reported category is not among the model's
// top k_threshold categories.
inline std::vector<bool> flag_bad_actors(const Tensor& probs, std::span<const std::size_t> reported,
                                         std::size_t k_threshold) {
  if (probs.rank() != 2 || probs.dim(0) != reported.size()) throw DimensionError("bad actors: prediction shape");
  const std::size_t c = probs.dim(1);
  if (k_threshold < 1 || k_threshold > c) throw UsageError("bad actors: k_threshold must lie in [1, c]");
  std::vector<bool> flags(reported.size());
  for (std::size_t i = 0; i < reported.size(); ++i) {
    flags[i] = true_rank(std::span<const double>(probs.data() + i * c, c), reported[i]) > k_threshold;
  }
  return flags;
}

struct DetectionResult {
  std::size_t k_threshold = 0;
  double precision = 0.0;  // 0 when nothing is flagged
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t flagged = 0;
};

inline DetectionResult score_detection(const std::vector<bool>& flags, const std::vector<bool>& corrupted,
                                       std::size_t k_threshold) {
  DetectionResult r;
  r.k_threshold = k_threshold;
  std::size_t tp = 0, positives = 0;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    r.flagged += flags[i] ? 1 : 0;
    positives += corrupted[i] ? 1 : 0;
    tp += flags[i] && corrupted[i] ? 1 : 0;
  }
  r.precision = r.flagged > 0 ? static_cast<double>(tp) / static_cast<double>(r.flagged) : 0.0;
  r.recall = positives > 0 ? static_cast<double>(tp) / static_cast<double>(positives) : 0.0;
  r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

// probs: the model's (N, c) predictions on the test merchants; labels: their
// true categories.
inline DetectionResult bad_actor_experiment(const Tensor& probs, std::span<const std::size_t> labels, double fraction,
                                            std::size_t k_threshold, std::uint64_t seed) {
  const CorruptedLabels cl = corrupt_labels(labels, probs.dim(1), fraction, seed);
  return score_detection(flag_bad_actors(probs, cl.reported, k_threshold), cl.corrupted, k_threshold);
}

// One result per k_threshold in [1, c] on a single corrupted instance.
inline std::vector<DetectionResult> bad_actor_curve(const Tensor& probs, std::span<const std::size_t> labels,
                                                    double fraction, std::uint64_t seed) {
  const CorruptedLabels cl = corrupt_labels(labels, probs.dim(1), fraction, seed);
  std::vector<DetectionResult> out;
  for (std::size_t k = 1; k <= probs.dim(1); ++k) {
    out.push_back(score_detection(flag_bad_actors(probs, cl.reported, k), cl.corrupted, k));
  }
  return out;
}

}  // namespace mcid
