#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcid/numerics/autograd.hpp"

namespace mcid {

// Shared-customer counts of one merchant against the k known (training)
// merchants. Only nonzero counts are stored, sorted by index.
class AffinityVector {
 public:
  struct Entry {
    std::size_t index;
    std::int64_t count;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  AffinityVector() = default;

  AffinityVector(std::size_t length, std::vector<Entry> entries) : length_(length), entries_(std::move(entries)) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& e = entries_[i];
      if (e.index >= length_) {
        throw DimensionError("affinity: index " + std::to_string(e.index) + " outside length " +
                             std::to_string(length_));
      }
      if (e.count <= 0) throw UsageError("affinity: counts must be positive");
      if (i > 0 && entries_[i - 1].index >= e.index) throw UsageError("affinity: indices must strictly increase");
    }
  }

  // Builds from a dense count vector, dropping zeros.
  static AffinityVector from_dense(std::span<const std::int64_t> counts) {
    std::vector<Entry> entries;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] != 0) entries.push_back({i, counts[i]});
    }
    return AffinityVector(counts.size(), std::move(entries));
  }

  std::size_t length() const noexcept { return length_; }
  std::size_t nnz() const noexcept { return entries_.size(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }

  std::int64_t l1_norm() const {
    std::int64_t total = 0;
    for (const auto& e : entries_) total += e.count;
    return total;
  }

  friend bool operator==(const AffinityVector&, const AffinityVector&) = default;

 private:
  std::size_t length_ = 0;
  std::vector<Entry> entries_;
};

// Real-valued sparse row, the input to embedding aggregation.
struct SparseWeights {
  std::size_t length = 0;
  std::vector<std::pair<std::size_t, double>> entries;
};

inline SparseWeights l1_normalize(const AffinityVector& v) {
  SparseWeights out{v.length(), {}};
  const auto total = static_cast<double>(v.l1_norm());
  if (total == 0.0) return out;
  out.entries.reserve(v.nnz());
  for (const auto& e : v.entries()) out.entries.emplace_back(e.index, static_cast<double>(e.count) / total);
  return out;
}

// Keeps the max_nonzeros largest counts; ties at the cut go to smaller indices.
inline AffinityVector topk_truncate(const AffinityVector& v, std::size_t max_nonzeros) {
  if (max_nonzeros == 0) throw UsageError("topk_truncate: k must be at least 1");
  if (v.nnz() <= max_nonzeros) return v;
  std::vector<AffinityVector::Entry> kept = v.entries();
  std::nth_element(kept.begin(), kept.begin() + static_cast<std::ptrdiff_t>(max_nonzeros - 1), kept.end(),
                   [](const auto& a, const auto& b) { return a.count != b.count ? a.count > b.count : a.index < b.index; });
  kept.resize(max_nonzeros);
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
  return AffinityVector(v.length(), std::move(kept));
}

// h[b, :] = sum_i w_b[i] * E[i, :]. Only rows named by some w_b receive gradient.
inline Var aggregate(std::span<const SparseWeights> rows, const Var& embedding) {
  const Tensor& ev = embedding.value();
  if (ev.rank() != 2) throw DimensionError("aggregate: embedding table must be (k, n_k)");
  const std::size_t known = ev.dim(0);
  const std::size_t width = ev.dim(1);
  if (rows.empty()) throw DimensionError("aggregate: empty batch");
  Tensor h({rows.size(), width}, 0.0);
  for (std::size_t b = 0; b < rows.size(); ++b) {
    if (rows[b].length > known) {
      throw DimensionError("aggregate: affinity length " + std::to_string(rows[b].length) + " exceeds table rows " +
                           std::to_string(known));
    }
    double* out = h.data() + b * width;
    for (const auto& [index, weight] : rows[b].entries) {
      if (index >= known) {
        throw DimensionError("aggregate: index " + std::to_string(index) + " outside table of " +
                             std::to_string(known) + " rows");
      }
      const double* row = ev.data() + index * width;
      for (std::size_t j = 0; j < width; ++j) out[j] += weight * row[j];
    }
  }
  std::vector<SparseWeights> saved(rows.begin(), rows.end());
  return make_result(std::move(h), {embedding}, [saved = std::move(saved), width](detail::Node& self) {
    Tensor& de = self.parents[0]->ensure_grad();
    for (std::size_t b = 0; b < saved.size(); ++b) {
      const double* dh = self.grad.data() + b * width;
      for (const auto& [index, weight] : saved[b].entries) {
        double* row = de.data() + index * width;
        for (std::size_t j = 0; j < width; ++j) row[j] += weight * dh[j];
      }
    }
  });
}

// Single-row convenience overload returning an (n_k) vector.
inline Var aggregate(const SparseWeights& row, const Var& embedding) {
  Var h = aggregate(std::span<const SparseWeights>(&row, 1), embedding);
  Tensor reshaped = h.value().reshaped({h.value().dim(1)});
  if (!h.requires_grad()) return Var(std::move(reshaped));
  return make_result(std::move(reshaped), {h}, [](detail::Node& self) {
    Tensor& g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

}  // namespace mcid
