#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "mcid/errors.hpp"
#include "mcid/numerics/tensor.hpp"

namespace mcid {

namespace detail {

inline Eigen::MatrixXd to_matrix(const Tensor& points) {
  if (points.rank() != 2) throw DimensionError("expected an (m, dim) matrix of points");
  Eigen::MatrixXd x(static_cast<Eigen::Index>(points.dim(0)), static_cast<Eigen::Index>(points.dim(1)));
  for (std::size_t i = 0; i < points.dim(0); ++i)
    for (std::size_t j = 0; j < points.dim(1); ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = points.at(i, j);
  return x;
}

// Dominant eigenpair of a symmetric matrix by power iteration.
inline std::pair<double, Eigen::VectorXd> power_iteration(const Eigen::MatrixXd& a, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd v(a.rows());
  for (auto& x : v) x = gauss(rng);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 20000; ++it) {
    Eigen::VectorXd w = a * v;
    const double norm = w.norm();
    if (norm < 1e-300) return {0.0, v};
    w /= norm;
    if (w.dot(v) < 0) w = -w;
    const double change = (w - v).norm();
    v = w;
    lambda = v.dot(a * v);
    if (change < 1e-13) break;
  }
  return {lambda, v};
}

}  // namespace detail

// Classical (Torgerson) MDS: double-centred squared distances, top eigenpairs
// by power iteration with deflation, coordinates = v * sqrt(lambda).
inline Tensor mds_project(const Tensor& points, std::size_t out_dim = 2) {
  const Eigen::MatrixXd x = detail::to_matrix(points);
  const auto m = x.rows();
  if (m < 2) throw UsageError("mds_project: need at least two points");
  const Eigen::VectorXd sq = x.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = (sq.replicate(1, m) + sq.transpose().replicate(m, 1) - 2.0 * x * x.transpose()).cwiseMax(0.0);
  const Eigen::MatrixXd centering =
      Eigen::MatrixXd::Identity(m, m) - Eigen::MatrixXd::Constant(m, m, 1.0 / static_cast<double>(m));
  Eigen::MatrixXd b = -0.5 * centering * d2 * centering;

  Tensor out({static_cast<std::size_t>(m), out_dim}, 0.0);
  for (std::size_t k = 0; k < out_dim; ++k) {
    const auto [lambda, v] = detail::power_iteration(b, 1000 + k);
    if (lambda <= 0.0) break;
    for (Eigen::Index i = 0; i < m; ++i) out[static_cast<std::size_t>(i) * out_dim + k] = v(i) * std::sqrt(lambda);
    b -= lambda * v * v.transpose();
  }
  return out;
}

struct KMeansResult {
  std::vector<std::size_t> assignment;
  Tensor centroids;             // (k, dim)
  std::vector<double> inertia;  // after each assignment step
  std::size_t iterations = 0;
};

// k-means++ seeding, then Lloyd iterations until the assignment stops
// changing or max_iter is reached.
inline KMeansResult kmeans(const Tensor& points, std::size_t k, std::uint64_t seed, std::size_t max_iter = 100) {
  const Eigen::MatrixXd x = detail::to_matrix(points);
  const auto m = static_cast<std::size_t>(x.rows());
  if (k == 0 || k > m) throw UsageError("kmeans: need 1 <= k <= number of points");
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd centroids(static_cast<Eigen::Index>(k), x.cols());
  {
    centroids.row(0) = x.row(static_cast<Eigen::Index>(std::uniform_int_distribution<std::size_t>(0, m - 1)(rng)));
    std::vector<double> nearest(m, std::numeric_limits<double>::infinity());
    for (std::size_t c = 1; c < k; ++c) {
      double total = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        nearest[i] = std::min(nearest[i], (x.row(static_cast<Eigen::Index>(i)) -
                                           centroids.row(static_cast<Eigen::Index>(c - 1))).squaredNorm());
        total += nearest[i];
      }
      std::size_t pick = 0;
      if (total > 0.0) {
        pick = std::discrete_distribution<std::size_t>(nearest.begin(), nearest.end())(rng);
      } else {
        pick = std::uniform_int_distribution<std::size_t>(0, m - 1)(rng);
      }
      centroids.row(static_cast<Eigen::Index>(c)) = x.row(static_cast<Eigen::Index>(pick));
    }
  }

  KMeansResult r;
  r.assignment.assign(m, k);
  for (r.iterations = 0; r.iterations < max_iter; ++r.iterations) {
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = (x.row(static_cast<Eigen::Index>(i)) - centroids.row(static_cast<Eigen::Index>(c))).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      changed |= r.assignment[i] != best;
      r.assignment[i] = best;
      inertia += best_d;
    }
    r.inertia.push_back(inertia);
    if (!changed) break;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), x.cols());
    std::vector<double> counts(k, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      sums.row(static_cast<Eigen::Index>(r.assignment[i])) += x.row(static_cast<Eigen::Index>(i));
      counts[r.assignment[i]] += 1;
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) centroids.row(static_cast<Eigen::Index>(c)) = sums.row(static_cast<Eigen::Index>(c)) / counts[c];
    }
  }
  r.centroids = Tensor({k, static_cast<std::size_t>(x.cols())});
  for (std::size_t c = 0; c < k; ++c)
    for (Eigen::Index j = 0; j < x.cols(); ++j) r.centroids[c * static_cast<std::size_t>(x.cols()) + static_cast<std::size_t>(j)] = centroids(static_cast<Eigen::Index>(c), j);
  return r;
}

}  // namespace mcid
