#pragma once

#include <cmath>
#include <random>

#include "mcid/numerics/autograd.hpp"

namespace mcid {

// Trainable tensor filled from uniform(-sqrt(gain / fan_in), +sqrt(gain / fan_in)).
template <class Rng>
Var uniform_parameter(Shape shape, std::size_t fan_in, double gain, Rng& rng) {
  const double bound = std::sqrt(gain / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = dist(rng);
  return Var(std::move(t), true);
}

inline Var zero_parameter(Shape shape) { return Var(Tensor(std::move(shape), 0.0), true); }

}  // namespace mcid
