#pragma once

#include <cmath>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mcid/errors.hpp"
#include "mcid/numerics/tensor.hpp"

namespace mcid {

// Rank of the true class: 1 + #{j : p[j] > p[true]} + #{j < true : p[j] == p[true]}.
// Equal probabilities are ordered by class index.
inline std::size_t true_rank(std::span<const double> probs, std::size_t label) {
  if (label >= probs.size()) throw DimensionError("rank: label " + std::to_string(label) + " outside class range");
  const double p = probs[label];
  std::size_t rank = 1;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (probs[j] > p || (j < label && probs[j] == p)) ++rank;
  }
  return rank;
}

// Predicted class: rank-1 class under the same tie rule (lowest index wins).
inline std::size_t argmax(std::span<const double> probs) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < probs.size(); ++j) {
    if (probs[j] > probs[best]) best = j;
  }
  return best;
}

struct MetricReport {
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  double average_rank = 0.0;
  double hit_at_3 = 0.0;
  double hit_at_5 = 0.0;

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

inline constexpr const char* kMetricColumns = "micro_f1,macro_f1,average_rank,hit_at_3,hit_at_5";

// probs: (N, c) rows of class probabilities.
inline MetricReport compute_metrics(const Tensor& probs, std::span<const std::size_t> labels) {
  if (labels.empty()) throw UsageError("compute_metrics: no predictions");
  if (probs.rank() != 2 || probs.dim(0) != labels.size()) {
    throw DimensionError("compute_metrics: predictions " + shape_str(probs.shape()) + " for " +
                         std::to_string(labels.size()) + " labels");
  }
  const std::size_t n = labels.size();
  const std::size_t c = probs.dim(1);
  std::vector<double> tp(c, 0.0), predicted(c, 0.0), actual(c, 0.0);
  MetricReport r;
  for (std::size_t i = 0; i < n; ++i) {
    const std::span<const double> row(probs.data() + i * c, c);
    const std::size_t rank = true_rank(row, labels[i]);
    const std::size_t guess = argmax(row);
    r.average_rank += static_cast<double>(rank);
    r.hit_at_3 += rank <= 3 ? 1.0 : 0.0;
    r.hit_at_5 += rank <= 5 ? 1.0 : 0.0;
    predicted[guess] += 1;
    actual[labels[i]] += 1;
    if (guess == labels[i]) tp[guess] += 1;
  }
  double correct = 0.0;
  for (std::size_t j = 0; j < c; ++j) {
    correct += tp[j];
    const double denom = predicted[j] + actual[j];
    r.macro_f1 += denom > 0 ? 2.0 * tp[j] / denom : 0.0;
  }
  const auto total = static_cast<double>(n);
  r.micro_f1 = correct / total;
  r.macro_f1 /= static_cast<double>(c);
  r.average_rank /= total;
  r.hit_at_3 /= total;
  r.hit_at_5 /= total;
  return r;
}

struct MetricSummary {
  MetricReport mean;
  MetricReport sd;  // sample standard deviation; 0 for a single report
};

inline MetricSummary summarize(std::span<const MetricReport> reports) {
  if (reports.empty()) throw UsageError("summarize: no reports");
  auto fields = [](MetricReport& r) {
    return std::vector<double*>{&r.micro_f1, &r.macro_f1, &r.average_rank, &r.hit_at_3, &r.hit_at_5};
  };
  MetricSummary s;
  const auto n = static_cast<double>(reports.size());
  auto mean = fields(s.mean);
  auto sd = fields(s.sd);
  for (auto r : reports) {
    auto f = fields(r);
    for (std::size_t k = 0; k < f.size(); ++k) *mean[k] += *f[k] / n;
  }
  if (reports.size() > 1) {
    for (auto r : reports) {
      auto f = fields(r);
      for (std::size_t k = 0; k < f.size(); ++k) *sd[k] += (*f[k] - *mean[k]) * (*f[k] - *mean[k]) / (n - 1);
    }
    for (double* v : sd) *v = std::sqrt(*v);
  }
  return s;
}

inline void write_metric_values(std::ostream& out, const MetricReport& r) {
  out << r.micro_f1 << ',' << r.macro_f1 << ',' << r.average_rank << ',' << r.hit_at_3 << ',' << r.hit_at_5;
}

}  // namespace mcid
