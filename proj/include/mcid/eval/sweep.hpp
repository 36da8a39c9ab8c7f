#pragma once

#include <chrono>
#include <ostream>
#include <vector>

#include "mcid/eval/experiments.hpp"

namespace mcid {

inline std::vector<std::size_t> default_kbar_values() {
  std::vector<std::size_t> v;
  for (std::size_t k = 512; k <= 65536; k *= 2) v.push_back(k);
  return v;
}

// Bytes touched per training iteration by the affinity path, for the largest
// batch of an epoch: each kept entry reads an index and a weight and reads and
// writes one embedding row (value and gradient), plus the dense (k, n_k)
// table's value, gradient and momentum buffers.
inline double affinity_memory_estimate(const MerchantSet& train_set, std::size_t kbar, std::size_t width,
                                       std::size_t batch_size) {
  std::vector<std::size_t> kept;
  kept.reserve(train_set.size());
  for (const auto& row : train_set.affinity) kept.push_back(std::min(row.entries.size(), kbar));
  std::sort(kept.rbegin(), kept.rend());
  double worst = 0.0;
  for (std::size_t i = 0; i < std::min(batch_size, kept.size()); ++i) worst += static_cast<double>(kept[i]);
  const double per_entry = 16.0 + 2.0 * 8.0 * static_cast<double>(width);
  const double table = 3.0 * 8.0 * static_cast<double>(train_set.size() * width);
  return worst * per_entry + table;
}

struct SweepRow {
  std::size_t kbar = 0;
  std::size_t max_nnz = 0;  // largest kept affinity support in the training split
  double seconds_per_iteration = 0.0;
  double memory_bytes = 0.0;
  MetricReport metrics;
};

// Trains the affinity-only model on one repetition for each kbar.
inline std::vector<SweepRow> sparsity_sweep(const DatasetBundle& bundle, const std::vector<std::size_t>& kbar_values,
                                            RunConfig cfg, std::size_t repetition = 0) {
  for (std::size_t i = 0; i < kbar_values.size(); ++i) {
    if (kbar_values[i] == 0 || (i > 0 && kbar_values[i] <= kbar_values[i - 1])) {
      throw UsageError("sparsity_sweep: kbar values must be positive and ascending");
    }
  }
  cfg.model = ModelKind::kAffinityOnly;
  std::vector<SweepRow> rows;
  for (std::size_t kbar : kbar_values) {
    cfg.kbar = kbar;
    const FoldData fold = prepare_fold(bundle, repetition, kbar);
    SweepRow row;
    row.kbar = kbar;
    for (const auto& a : fold.train.affinity) row.max_nnz = std::max(row.max_nnz, a.entries.size());
    row.memory_bytes = affinity_memory_estimate(fold.train, kbar, cfg.width, cfg.train.batch_size);
    const auto start = std::chrono::steady_clock::now();
    const FoldOutcome outcome = run_prepared_fold(bundle, fold, repetition, cfg);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const std::size_t iterations =
        cfg.train.epochs * ((fold.train.size() + cfg.train.batch_size - 1) / cfg.train.batch_size);
    row.seconds_per_iteration = seconds / static_cast<double>(iterations);
    row.metrics = outcome.metrics;
    rows.push_back(row);
  }
  return rows;
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "kbar,max_nnz,seconds_per_iteration,memory_bytes," << kMetricColumns << '\n';
  for (const auto& r : rows) {
    out << r.kbar << ',' << r.max_nnz << ',' << r.seconds_per_iteration << ',' << r.memory_bytes << ',';
    write_metric_values(out, r.metrics);
    out << '\n';
  }
}

}  // namespace mcid
