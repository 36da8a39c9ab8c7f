#pragma once

// Independent reference computations used by the test suites. Nothing here
// calls into the library's numeric kernels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "mcid/numerics/tensor.hpp"

namespace oracle {

using mcid::Tensor;

inline Tensor random_tensor(mcid::Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = dist(rng);
  return t;
}

// Triple loop over (t, o, i, k) with explicit bounds checks.
inline Tensor direct_conv1d(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t pad) {
  const std::size_t T = x.dim(0), cin = x.dim(1), cout = w.dim(0), K = w.dim(2);
  const std::size_t out_len = T + 2 * pad - K + 1;
  Tensor y({out_len, cout});
  for (std::size_t t = 0; t < out_len; ++t) {
    for (std::size_t o = 0; o < cout; ++o) {
      double acc = b[o];
      for (std::size_t i = 0; i < cin; ++i) {
        for (std::size_t k = 0; k < K; ++k) {
          const long src = static_cast<long>(t + k) - static_cast<long>(pad);
          if (src < 0 || src >= static_cast<long>(T)) continue;
          acc += x[static_cast<std::size_t>(src) * cin + i] * w[(o * cin + i) * K + k];
        }
      }
      y[t * cout + o] = acc;
    }
  }
  return y;
}

inline Tensor naive_matmul(const Tensor& a, const Tensor& b) {
  const std::size_t n = a.dim(0), m = a.dim(1), p = b.dim(1);
  Tensor c({n, p}, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t k = 0; k < m; ++k) c[i * p + j] += a[i * m + k] * b[k * p + j];
  return c;
}

// Central differences of a scalar function with respect to every entry of `param`.
inline Tensor finite_difference(const std::function<double()>& eval, Tensor& param, double h = 1e-5) {
  Tensor g(param.shape(), 0.0);
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double saved = param[i];
    param[i] = saved + h;
    const double up = eval();
    param[i] = saved - h;
    const double down = eval();
    param[i] = saved;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// ||a - b|| / max(||a||, ||b||), with a floor so two near-zero gradients compare equal.
inline double relative_error(const Tensor& a, const Tensor& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-8});
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Rank of the true class by explicitly sorting (probability desc, index asc).
inline std::size_t sorted_rank(const std::vector<double>& probs, std::size_t truth) {
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  return static_cast<std::size_t>(std::find(order.begin(), order.end(), truth) - order.begin()) + 1;
}

inline std::size_t set_intersection_size(const std::set<std::int64_t>& a, const std::set<std::int64_t>& b) {
  std::size_t n = 0;
  for (auto v : a) n += b.count(v);
  return n;
}

struct Metrics {
  double micro_f1, macro_f1, average_rank, hit_at_3, hit_at_5;
};

// Every metric from explicitly sorted probability lists; per-class F1 from
// precision and recall.
inline Metrics brute_force_metrics(const std::vector<std::vector<double>>& probs, const std::vector<std::size_t>& labels,
                                   std::size_t classes) {
  Metrics m{0, 0, 0, 0, 0};
  std::vector<double> tp(classes, 0), pred(classes, 0), truth(classes, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::size_t rank = sorted_rank(probs[i], labels[i]);
    std::size_t top = 0;
    for (std::size_t j = 0; j < classes; ++j)
      if (sorted_rank(probs[i], j) == 1) top = j;
    m.average_rank += static_cast<double>(rank);
    if (rank <= 3) m.hit_at_3 += 1;
    if (rank <= 5) m.hit_at_5 += 1;
    pred[top] += 1;
    truth[labels[i]] += 1;
    if (top == labels[i]) {
      tp[top] += 1;
      m.micro_f1 += 1;
    }
  }
  for (std::size_t j = 0; j < classes; ++j) {
    const double precision = pred[j] > 0 ? tp[j] / pred[j] : 0.0;
    const double recall = truth[j] > 0 ? tp[j] / truth[j] : 0.0;
    m.macro_f1 += precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
  }
  const double n = static_cast<double>(labels.size());
  m.micro_f1 /= n;
  m.macro_f1 /= static_cast<double>(classes);
  m.average_rank /= n;
  m.hit_at_3 /= n;
  m.hit_at_5 /= n;
  return m;
}

// Student-t CDF by Simpson integration of the density from 0 to |t|.
inline double student_t_cdf(double t, double df) {
  const double log_norm = std::lgamma((df + 1) / 2) - std::lgamma(df / 2) - 0.5 * std::log(df * M_PI);
  auto density = [&](double x) { return std::exp(log_norm - (df + 1) / 2 * std::log1p(x * x / df)); };
  const int n = 200000;
  const double a = std::abs(t);
  const double h = a / n;
  double sum = density(0) + density(a);
  for (int i = 1; i < n; ++i) sum += density(i * h) * (i % 2 ? 4 : 2);
  const double half = sum * h / 3;
  return t >= 0 ? 0.5 + half : 0.5 - half;
}

}  // namespace oracle
