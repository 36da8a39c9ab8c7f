#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_set>
#include <vector>

#include "mcid/model/models.hpp"
#include "mcid/numerics/optim.hpp"

namespace mcid {

struct TrainConfig {
  std::size_t epochs = 128;
  std::size_t batch_size = 64;
  double lr_max = 0.05;
  double weight_decay = 1e-4;
  double momentum_max = 0.95;
  double momentum_min = 0.85;
  double div_factor = 25.0;
  double final_div_factor = 1e4;
  double pct_start = 0.3;
  std::uint64_t seed = 0;
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double validation_loss = 0.0;
};

struct TrainResult {
  std::vector<EpochLog> history;
  std::size_t best_epoch = 0;
  double best_validation_loss = std::numeric_limits<double>::infinity();
};

using EpochCallback = std::function<void(const EpochLog&)>;

// (N, c) probabilities in eval mode, computed in batches.
inline Tensor predict(const Classifier& model, const MerchantSet& set, std::size_t batch_size = 64) {
  if (set.size() == 0) throw UsageError("predict: empty merchant set");
  const std::size_t c = model.dims().classes;
  Tensor out({set.size(), c});
  NoGradGuard no_grad;
  ModelRng rng(0);
  std::vector<std::size_t> positions;
  for (std::size_t start = 0; start < set.size(); start += batch_size) {
    positions.resize(std::min(batch_size, set.size() - start));
    std::iota(positions.begin(), positions.end(), start);
    const Var probs = model.forward(make_batch(set, positions), Mode::kEval, rng);
    std::copy(probs.value().values().begin(), probs.value().values().end(), out.data() + start * c);
  }
  return out;
}

inline double mean_nll(const Tensor& probs, std::span<const std::size_t> labels) {
  const std::size_t c = probs.dim(1);
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) total -= std::log(std::max(probs[i * c + labels[i]], kProbabilityFloor));
  return total / static_cast<double>(labels.size());
}

// Mini-batch SGD under a one-cycle schedule. After every epoch the
// validation NLL is measured; the parameters of the best epoch are restored
// into `model` before returning.
inline TrainResult train(Classifier& model, const MerchantSet& train_set, const MerchantSet& valid_set,
                         const TrainConfig& config, const EpochCallback& on_epoch = {}) {
  if (train_set.size() == 0) throw UsageError("train: empty training set");
  if (valid_set.size() == 0) throw UsageError("train: empty validation set");
  if (config.epochs == 0) throw UsageError("train: epochs must be at least 1");
  if (config.batch_size == 0) throw UsageError("train: batch size must be at least 1");
  if (config.lr_max < 0.0) throw UsageError("train: lr_max must be nonnegative");
  {
    std::unordered_set<std::size_t> seen(train_set.ids.begin(), train_set.ids.end());
    for (std::size_t id : valid_set.ids) {
      if (seen.contains(id)) throw UsageError("train: merchant " + std::to_string(id) + " in both train and validation");
    }
  }

  std::vector<Var> params = model.parameters();
  const std::size_t batches = (train_set.size() + config.batch_size - 1) / config.batch_size;
  OneCycleSchedule schedule{batches * config.epochs, config.lr_max,        config.div_factor, config.final_div_factor,
                            config.pct_start,        config.momentum_max, config.momentum_min};
  SgdState sgd{0.0, config.momentum_max, config.weight_decay, {}};

  ModelRng rng(config.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  std::vector<Tensor> best;
  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const Batch batch = make_batch(train_set, std::span<const std::size_t>(order).subspan(start, stop - start));
      Var loss = nll_loss(model.forward(batch, Mode::kTrain, rng), batch.labels);
      backward(loss);
      if (config.lr_max > 0.0) {
        const ScheduleValue sv = one_cycle_at(schedule, step);
        sgd.learning_rate = sv.learning_rate;
        sgd.momentum = sv.momentum;
      } else {
        sgd.learning_rate = 0.0;
      }
      sgd_step(params, sgd);
      zero_grads(params);
      loss_sum += loss.value()[0] * static_cast<double>(batch.size());
      ++step;
    }

    EpochLog log{epoch, loss_sum / static_cast<double>(order.size()),
                 mean_nll(predict(model, valid_set, config.batch_size), valid_set.labels)};
    result.history.push_back(log);
    if (on_epoch) on_epoch(log);
    if (log.validation_loss < result.best_validation_loss || best.empty()) {
      result.best_validation_loss = log.validation_loss;
      result.best_epoch = epoch;
      best.clear();
      for (const auto& p : params) best.push_back(p.value());
    }
  }
  for (std::size_t k = 0; k < params.size(); ++k) params[k].mutable_value() = best[k];
  return result;
}

}  // namespace mcid
