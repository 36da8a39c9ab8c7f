#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <tuple>
#include <utility>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mcid/numerics/autograd.hpp"

namespace mcid {

enum class Mode { kTrain, kEval };

namespace detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

inline MatrixMap as_matrix(Tensor& t, std::size_t rows, std::size_t cols) {
  return MatrixMap(t.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}
inline ConstMatrixMap as_matrix(const Tensor& t, std::size_t rows, std::size_t cols) {
  return ConstMatrixMap(t.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

inline void require_rank(const Tensor& t, std::initializer_list<std::size_t> ranks, const char* op) {
  for (auto r : ranks) {
    if (t.rank() == r) return;
  }
  throw DimensionError(std::string(op) + ": unexpected input shape " + shape_str(t.shape()));
}

}  // namespace detail

// x: (N) or (B, N); weight: (N, M); bias: (M). Returns (M) or (B, M).
inline Var linear(const Var& x, const Var& weight, const Var& bias) {
  const Tensor& xv = x.value();
  const Tensor& wv = weight.value();
  detail::require_rank(xv, {1, 2}, "linear");
  if (wv.rank() != 2 || bias.value().rank() != 1 || bias.value().dim(0) != wv.dim(1)) {
    throw DimensionError("linear: weight " + shape_str(wv.shape()) + " and bias " +
                         shape_str(bias.value().shape()) + " disagree");
  }
  const std::size_t in = wv.dim(0);
  const std::size_t out = wv.dim(1);
  const std::size_t batch = xv.rank() == 1 ? 1 : xv.dim(0);
  const std::size_t x_in = xv.rank() == 1 ? xv.dim(0) : xv.dim(1);
  if (x_in != in) {
    throw DimensionError("linear: input width " + std::to_string(x_in) + " but weight expects " +
                         std::to_string(in));
  }

  Tensor y(xv.rank() == 1 ? Shape{out} : Shape{batch, out});
  auto ym = detail::as_matrix(y, batch, out);
  ym.noalias() = detail::as_matrix(xv, batch, in) * detail::as_matrix(wv, in, out);
  ym.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias.value().data(), static_cast<Eigen::Index>(out));

  return make_result(std::move(y), {x, weight, bias}, [batch, in, out](detail::Node& self) {
    auto& xn = *self.parents[0];
    auto& wn = *self.parents[1];
    auto& bn = *self.parents[2];
    auto dy = detail::as_matrix(std::as_const(self.grad), batch, out);
    if (xn.requires_grad) {
      detail::as_matrix(xn.ensure_grad(), batch, in).noalias() +=
          dy * detail::as_matrix(std::as_const(wn.value), in, out).transpose();
    }
    if (wn.requires_grad) {
      detail::as_matrix(wn.ensure_grad(), in, out).noalias() +=
          detail::as_matrix(std::as_const(xn.value), batch, in).transpose() * dy;
    }
    if (bn.requires_grad) {
      Eigen::Map<Eigen::RowVectorXd>(bn.ensure_grad().data(), static_cast<Eigen::Index>(out)) +=
          dy.colwise().sum();
    }
  });
}

// Same-length 1-D cross-correlation with zero padding.
// x: (T, C_in) or (B, T, C_in); weight: (C_out, C_in, K); bias: (C_out).
// out[t, o] = bias[o] + sum_{i,k} x[t + k - padding, i] * weight[o, i, k]
inline Var conv1d(const Var& x, const Var& weight, const Var& bias, std::size_t padding) {
  const Tensor& xv = x.value();
  const Tensor& wv = weight.value();
  detail::require_rank(xv, {2, 3}, "conv1d");
  if (wv.rank() != 3) throw DimensionError("conv1d: weight must be (C_out, C_in, K), got " + shape_str(wv.shape()));
  const std::size_t c_out = wv.dim(0);
  const std::size_t c_in = wv.dim(1);
  const std::size_t kernel = wv.dim(2);
  const bool batched = xv.rank() == 3;
  const std::size_t batch = batched ? xv.dim(0) : 1;
  const std::size_t length = batched ? xv.dim(1) : xv.dim(0);
  const std::size_t x_channels = batched ? xv.dim(2) : xv.dim(1);
  if (x_channels != c_in) {
    throw DimensionError("conv1d: input has " + std::to_string(x_channels) + " channels, weight expects " +
                         std::to_string(c_in));
  }
  if (bias.value().rank() != 1 || bias.value().dim(0) != c_out) {
    throw DimensionError("conv1d: bias shape " + shape_str(bias.value().shape()));
  }
  if (length + 2 * padding < kernel) {
    throw DimensionError("conv1d: kernel " + std::to_string(kernel) + " exceeds padded length " +
                         std::to_string(length + 2 * padding));
  }
  const std::size_t out_len = length + 2 * padding - kernel + 1;

  // Lowered form: cols (B * out_len, K * C_in) holds the padded input windows,
  // wmat (K * C_in, C_out) the kernel, so y = cols * wmat + bias.
  const std::size_t window = kernel * c_in;
  auto lower_weight = [c_in, c_out, kernel](const Tensor& w) {
    detail::RowMatrix m(kernel * c_in, c_out);
    for (std::size_t o = 0; o < c_out; ++o)
      for (std::size_t i = 0; i < c_in; ++i)
        for (std::size_t k = 0; k < kernel; ++k) m(k * c_in + i, o) = w[(o * c_in + i) * kernel + k];
    return m;
  };
  // Visits each (row of cols, tap, source row of x) with the source in range.
  auto for_each_tap = [=](auto&& fn) {
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t t = 0; t < out_len; ++t)
        for (std::size_t k = 0; k < kernel; ++k) {
          const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + k) - static_cast<std::ptrdiff_t>(padding);
          if (src < 0 || src >= static_cast<std::ptrdiff_t>(length)) continue;
          fn(b * out_len + t, k, b * length + static_cast<std::size_t>(src));
        }
  };
  auto lower_input = [=](const Tensor& xt) {
    detail::RowMatrix cols = detail::RowMatrix::Zero(static_cast<Eigen::Index>(batch * out_len),
                                                     static_cast<Eigen::Index>(window));
    for_each_tap([&](std::size_t row, std::size_t k, std::size_t src) {
      std::copy_n(xt.data() + src * c_in, c_in, cols.data() + row * window + k * c_in);
    });
    return cols;
  };

  Tensor y(batched ? Shape{batch, out_len, c_out} : Shape{out_len, c_out});
  {
    auto ym = detail::as_matrix(y, batch * out_len, c_out);
    ym.noalias() = lower_input(xv) * lower_weight(wv);
    ym.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias.value().data(), static_cast<Eigen::Index>(c_out));
  }

  return make_result(std::move(y), {x, weight, bias},
                     [=](detail::Node& self) {
                       auto& xn = *self.parents[0];
                       auto& wn = *self.parents[1];
                       auto& bn = *self.parents[2];
                       const auto dy = detail::as_matrix(self.grad, batch * out_len, c_out);
                       if (bn.requires_grad) {
                         Eigen::Map<Eigen::RowVectorXd>(bn.ensure_grad().data(), static_cast<Eigen::Index>(c_out)) +=
                             dy.colwise().sum();
                       }
                       if (wn.requires_grad) {
                         const detail::RowMatrix dw = lower_input(xn.value).transpose() * dy;
                         Tensor& gw = wn.ensure_grad();
                         for (std::size_t o = 0; o < c_out; ++o)
                           for (std::size_t i = 0; i < c_in; ++i)
                             for (std::size_t k = 0; k < kernel; ++k) gw[(o * c_in + i) * kernel + k] += dw(k * c_in + i, o);
                       }
                       if (xn.requires_grad) {
                         const detail::RowMatrix dcols = dy * lower_weight(wn.value).transpose();
                         Tensor& gx = xn.ensure_grad();
                         for_each_tap([&](std::size_t row, std::size_t k, std::size_t src) {
                           const double* from = dcols.data() + row * window + k * c_in;
                           double* to = gx.data() + src * c_in;
                           for (std::size_t i = 0; i < c_in; ++i) to[i] += from[i];
                         });
                       }
                     });
}

namespace detail {
inline Eigen::Map<Eigen::ArrayXd> as_array(Tensor& t) {
  return Eigen::Map<Eigen::ArrayXd>(t.data(), static_cast<Eigen::Index>(t.size()));
}
inline Eigen::Map<const Eigen::ArrayXd> as_array(const Tensor& t) {
  return Eigen::Map<const Eigen::ArrayXd>(t.data(), static_cast<Eigen::Index>(t.size()));
}
}  // namespace detail

inline Var relu(const Var& x) {
  Tensor y(x.shape());
  detail::as_array(y) = detail::as_array(x.value()).max(0.0);
  return make_result(std::move(y), {x}, [](detail::Node& self) {
    detail::as_array(self.parents[0]->ensure_grad()) +=
        (detail::as_array(self.value) > 0.0).select(detail::as_array(self.grad), 0.0);
  });
}

// Elementwise sum of two same-shaped tensors.
inline Var add(const Var& a, const Var& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("add: shapes " + shape_str(a.shape()) + " and " + shape_str(b.shape()));
  }
  Tensor y(a.shape());
  detail::as_array(y) = detail::as_array(a.value()) + detail::as_array(b.value());
  return make_result(std::move(y), {a, b}, [](detail::Node& self) {
    for (auto& parent : self.parents) {
      if (parent->requires_grad) detail::as_array(parent->ensure_grad()) += detail::as_array(self.grad);
    }
  });
}

// Inverted dropout. In train mode each element is zeroed with probability
// `rate` and survivors are scaled by 1 / (1 - rate); eval mode is the identity.
template <class Rng>
Var dropout(const Var& x, double rate, Mode mode, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw UsageError("dropout: rate must lie in [0, 1), got " + std::to_string(rate));
  if (mode == Mode::kEval || rate == 0.0) return x;
  const double scale = 1.0 / (1.0 - rate);
  // Compare raw 53-bit draws against the keep probability.
  static_assert(Rng::max() == std::numeric_limits<std::uint64_t>::max(), "dropout expects a 64-bit engine");
  const auto threshold = static_cast<std::uint64_t>((1.0 - rate) * 9007199254740992.0);
  Tensor mask(x.shape());
  for (auto& m : mask.values()) m = (rng() >> 11) < threshold ? scale : 0.0;
  Tensor y(x.shape());
  detail::as_array(y) = detail::as_array(x.value()) * detail::as_array(mask);
  return make_result(std::move(y), {x}, [mask = std::move(mask)](detail::Node& self) {
    detail::as_array(self.parents[0]->ensure_grad()) += detail::as_array(self.grad) * detail::as_array(mask);
  });
}

// Mean over the time axis: (T, C) -> (C), (B, T, C) -> (B, C).
inline Var global_avg_pool(const Var& x) {
  const Tensor& xv = x.value();
  detail::require_rank(xv, {2, 3}, "global_avg_pool");
  const bool batched = xv.rank() == 3;
  const std::size_t batch = batched ? xv.dim(0) : 1;
  const std::size_t length = batched ? xv.dim(1) : xv.dim(0);
  const std::size_t channels = batched ? xv.dim(2) : xv.dim(1);
  Tensor y(batched ? Shape{batch, channels} : Shape{channels});
  const double inv = 1.0 / static_cast<double>(length);
  for (std::size_t b = 0; b < batch; ++b) {
    auto xb = detail::ConstMatrixMap(xv.data() + b * length * channels, static_cast<Eigen::Index>(length),
                                     static_cast<Eigen::Index>(channels));
    Eigen::Map<Eigen::RowVectorXd>(y.data() + b * channels, static_cast<Eigen::Index>(channels)) =
        xb.colwise().sum() * inv;
  }
  return make_result(std::move(y), {x}, [batch, length, channels, inv](detail::Node& self) {
    Tensor& dx = self.parents[0]->ensure_grad();
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t t = 0; t < length; ++t)
        for (std::size_t c = 0; c < channels; ++c)
          dx[(b * length + t) * channels + c] += self.grad[b * channels + c] * inv;
  });
}

// Softmax along the last axis of a (c) or (B, c) tensor.
inline Var softmax(const Var& x) {
  const Tensor& xv = x.value();
  if (xv.empty()) throw DimensionError("softmax: empty input");
  detail::require_rank(xv, {1, 2}, "softmax");
  const std::size_t rows = xv.rank() == 1 ? 1 : xv.dim(0);
  const std::size_t cols = xv.rank() == 1 ? xv.dim(0) : xv.dim(1);
  Tensor y(xv.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = xv.data() + r * cols;
    double* out = y.data() + r * cols;
    const double peak = *std::max_element(in, in + cols);
    double total = 0.0;
    for (std::size_t j = 0; j < cols; ++j) total += (out[j] = std::exp(in[j] - peak));
    for (std::size_t j = 0; j < cols; ++j) out[j] /= total;
  }
  return make_result(std::move(y), {x}, [rows, cols](detail::Node& self) {
    Tensor& dx = self.parents[0]->ensure_grad();
    for (std::size_t r = 0; r < rows; ++r) {
      const double* p = self.value.data() + r * cols;
      const double* g = self.grad.data() + r * cols;
      double inner = 0.0;
      for (std::size_t j = 0; j < cols; ++j) inner += p[j] * g[j];
      for (std::size_t j = 0; j < cols; ++j) dx[r * cols + j] += p[j] * (g[j] - inner);
    }
  });
}

inline constexpr double kProbabilityFloor = 1e-12;

// Mean negative log-likelihood of the labelled class. probs: (c) or (B, c).
inline Var nll_loss(const Var& probs, std::span<const std::size_t> labels) {
  const Tensor& pv = probs.value();
  detail::require_rank(pv, {1, 2}, "nll_loss");
  const std::size_t rows = pv.rank() == 1 ? 1 : pv.dim(0);
  const std::size_t cols = pv.rank() == 1 ? pv.dim(0) : pv.dim(1);
  if (labels.size() != rows) {
    throw DimensionError("nll_loss: " + std::to_string(labels.size()) + " labels for " + std::to_string(rows) +
                         " rows");
  }
  double loss = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (labels[r] >= cols) {
      throw DimensionError("nll_loss: label " + std::to_string(labels[r]) + " out of range for " +
                           std::to_string(cols) + " classes");
    }
    double total = 0.0;
    for (std::size_t j = 0; j < cols; ++j) total += pv[r * cols + j];
    if (std::abs(total - 1.0) > 1e-6) {
      throw UsageError("nll_loss: probability row " + std::to_string(r) + " sums to " + std::to_string(total));
    }
    loss -= std::log(std::max(pv[r * cols + labels[r]], kProbabilityFloor));
  }
  loss /= static_cast<double>(rows);
  std::vector<std::size_t> targets(labels.begin(), labels.end());
  return make_result(Tensor({1}, std::vector<double>{loss}), {probs},
                     [rows, cols, targets = std::move(targets)](detail::Node& self) {
                       auto& pn = *self.parents[0];
                       Tensor& dp = pn.ensure_grad();
                       const double upstream = self.grad[0] / static_cast<double>(rows);
                       for (std::size_t r = 0; r < rows; ++r) {
                         const double p = pn.value[r * cols + targets[r]];
                         if (p >= kProbabilityFloor) dp[r * cols + targets[r]] -= upstream / p;
                       }
                     });
}

// Joins (B, N1) and (B, N2) into (B, N1 + N2); also accepts two vectors.
inline Var concat(const Var& a, const Var& b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  detail::require_rank(av, {1, 2}, "concat");
  if (av.rank() != bv.rank() || (av.rank() == 2 && av.dim(0) != bv.dim(0))) {
    throw DimensionError("concat: shapes " + shape_str(av.shape()) + " and " + shape_str(bv.shape()));
  }
  const std::size_t rows = av.rank() == 1 ? 1 : av.dim(0);
  const std::size_t wa = av.shape().back();
  const std::size_t wb = bv.shape().back();
  Tensor y(av.rank() == 1 ? Shape{wa + wb} : Shape{rows, wa + wb});
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(av.data() + r * wa, wa, y.data() + r * (wa + wb));
    std::copy_n(bv.data() + r * wb, wb, y.data() + r * (wa + wb) + wa);
  }
  return make_result(std::move(y), {a, b}, [rows, wa, wb](detail::Node& self) {
    auto& an = *self.parents[0];
    auto& bn = *self.parents[1];
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < wa && an.requires_grad; ++j) an.ensure_grad()[r * wa + j] += self.grad[r * (wa + wb) + j];
      for (std::size_t j = 0; j < wb && bn.requires_grad; ++j)
        bn.ensure_grad()[r * wb + j] += self.grad[r * (wa + wb) + wa + j];
    }
  });
}

// Applies a per-row generated weight matrix: out[b, j] = sum_i h[b, i] * w[b, i * c + j].
// h: (B, n) or (n); w: (B, n * c) or (n * c). Returns (B, c) or (c).
inline Var rowwise_matvec(const Var& h, const Var& w, std::size_t classes) {
  const Tensor& hv = h.value();
  const Tensor& wv = w.value();
  detail::require_rank(hv, {1, 2}, "rowwise_matvec");
  const std::size_t rows = hv.rank() == 1 ? 1 : hv.dim(0);
  const std::size_t n = hv.shape().back();
  if (wv.rank() != hv.rank() || wv.shape().back() != n * classes || (hv.rank() == 2 && wv.dim(0) != rows)) {
    throw DimensionError("rowwise_matvec: h " + shape_str(hv.shape()) + " with w " + shape_str(wv.shape()) +
                         " for " + std::to_string(classes) + " classes");
  }
  Tensor y(hv.rank() == 1 ? Shape{classes} : Shape{rows, classes});
  for (std::size_t r = 0; r < rows; ++r) {
    Eigen::Map<Eigen::RowVectorXd>(y.data() + r * classes, static_cast<Eigen::Index>(classes)).noalias() =
        Eigen::Map<const Eigen::RowVectorXd>(hv.data() + r * n, static_cast<Eigen::Index>(n)) *
        detail::ConstMatrixMap(wv.data() + r * n * classes, static_cast<Eigen::Index>(n),
                               static_cast<Eigen::Index>(classes));
  }
  return make_result(std::move(y), {h, w}, [rows, n, classes](detail::Node& self) {
    auto& hn = *self.parents[0];
    auto& wn = *self.parents[1];
    for (std::size_t r = 0; r < rows; ++r) {
      Eigen::Map<const Eigen::RowVectorXd> dy(self.grad.data() + r * classes, static_cast<Eigen::Index>(classes));
      if (hn.requires_grad) {
        Eigen::Map<Eigen::RowVectorXd>(hn.ensure_grad().data() + r * n, static_cast<Eigen::Index>(n)).noalias() +=
            dy * detail::ConstMatrixMap(wn.value.data() + r * n * classes, static_cast<Eigen::Index>(n),
                                        static_cast<Eigen::Index>(classes))
                     .transpose();
      }
      if (wn.requires_grad) {
        detail::MatrixMap(wn.ensure_grad().data() + r * n * classes, static_cast<Eigen::Index>(n),
                          static_cast<Eigen::Index>(classes))
            .noalias() +=
            Eigen::Map<const Eigen::VectorXd>(hn.value.data() + r * n, static_cast<Eigen::Index>(n)) * dy;
      }
    }
  });
}

// Scalar sum(x * weights) with constant weights. Used to probe gradients.
inline Var weighted_sum(const Var& x, const Tensor& weights) {
  if (weights.size() != x.size()) throw DimensionError("weighted_sum: size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) total += x.value()[i] * weights[i];
  return make_result(Tensor({1}, std::vector<double>{total}), {x}, [weights](detail::Node& self) {
    Tensor& dx = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += self.grad[0] * weights[i];
  });
}

}  // namespace mcid
