#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "mcid/numerics/autograd.hpp"

namespace mcid {

// Learning-rate and momentum pair produced by a schedule.
struct ScheduleValue {
  double learning_rate;
  double momentum;
};

// Warm-up then anneal ("one cycle"): the learning rate climbs linearly from
// lr_max / div_factor to lr_max over the first pct_start of the run, then
// follows a half cosine down to lr_max / final_div_factor. Momentum mirrors it.
struct OneCycleSchedule {
  std::size_t total_steps = 1;
  double lr_max = 0.1;
  double div_factor = 25.0;
  double final_div_factor = 1e4;
  double pct_start = 0.3;
  double momentum_max = 0.95;
  double momentum_min = 0.85;

  std::size_t peak_step() const {
    return static_cast<std::size_t>(std::floor(pct_start * static_cast<double>(total_steps)));
  }
};

inline ScheduleValue one_cycle_at(const OneCycleSchedule& s, std::size_t step) {
  if (s.total_steps == 0 || s.lr_max <= 0.0 || s.div_factor <= 0.0 || s.final_div_factor <= 0.0 ||
      s.pct_start <= 0.0 || s.pct_start >= 1.0) {
    throw UsageError("one_cycle_at: invalid schedule");
  }
  if (step > s.total_steps) {
    throw UsageError("one_cycle_at: step " + std::to_string(step) + " beyond total " + std::to_string(s.total_steps));
  }
  const double lr_start = s.lr_max / s.div_factor;
  const double lr_end = s.lr_max / s.final_div_factor;
  const std::size_t peak = s.peak_step();

  if (step <= peak && peak > 0) {
    const double f = static_cast<double>(step) / static_cast<double>(peak);
    return {lr_start + f * (s.lr_max - lr_start), s.momentum_max + f * (s.momentum_min - s.momentum_max)};
  }
  const double span = static_cast<double>(s.total_steps - peak);
  const double f = span > 0.0 ? static_cast<double>(step - peak) / span : 1.0;
  const double w = 0.5 * (1.0 + std::cos(std::numbers::pi * f));  // 1 -> 0
  return {lr_end + w * (s.lr_max - lr_end), s.momentum_max + w * (s.momentum_min - s.momentum_max)};
}

// SGD with heavy-ball momentum and L2 weight decay:
//   v <- momentum * v + (grad + weight_decay * param)
//   param <- param - learning_rate * v
struct SgdState {
  double learning_rate = 0.01;
  double momentum = 0.9;
  double weight_decay = 0.0;
  std::vector<Tensor> velocity;
};

inline void sgd_step(std::vector<Var>& params, SgdState& state) {
  if (state.velocity.empty()) {
    state.velocity.reserve(params.size());
    for (const auto& p : params) state.velocity.emplace_back(p.shape(), 0.0);
  }
  if (state.velocity.size() != params.size()) throw UsageError("sgd_step: velocity/parameter count mismatch");
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& value = params[k].mutable_value();
    Tensor& v = state.velocity[k];
    if (v.shape() != value.shape()) throw DimensionError("sgd_step: velocity shape mismatch");
    if (!params[k].has_grad()) continue;
    const Tensor& g = params[k].grad();
    for (std::size_t i = 0; i < value.size(); ++i) {
      v[i] = state.momentum * v[i] + (g[i] + state.weight_decay * value[i]);
      value[i] -= state.learning_rate * v[i];
    }
  }
}

inline void zero_grads(std::vector<Var>& params) {
  for (auto& p : params) p.zero_grad();
}

}  // namespace mcid
