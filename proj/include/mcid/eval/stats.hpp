#pragma once

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <span>

#include "mcid/errors.hpp"

namespace mcid {

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;  // two-sided
};

// Unequal-variance two-sample t-test with Welch-Satterthwaite degrees of freedom.
inline WelchResult welch_ttest(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw UsageError("welch_ttest: each sample needs at least two values");
  auto moments = [](std::span<const double> x) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::pair{mean, ss / static_cast<double>(x.size() - 1)};
  };
  const auto [mean_a, var_a] = moments(a);
  const auto [mean_b, var_b] = moments(b);
  const double se_a = var_a / static_cast<double>(a.size());
  const double se_b = var_b / static_cast<double>(b.size());
  const double se = se_a + se_b;
  WelchResult r;
  if (se == 0.0) {
    r.t = mean_a == mean_b ? 0.0 : std::copysign(INFINITY, mean_a - mean_b);
    r.df = static_cast<double>(a.size() + b.size() - 2);
    r.p_value = mean_a == mean_b ? 1.0 : 0.0;
    return r;
  }
  r.t = (mean_a - mean_b) / std::sqrt(se);
  r.df = se * se / (se_a * se_a / static_cast<double>(a.size() - 1) + se_b * se_b / static_cast<double>(b.size() - 1));
  const boost::math::students_t dist(r.df);
  r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  return r;
}

}  // namespace mcid
