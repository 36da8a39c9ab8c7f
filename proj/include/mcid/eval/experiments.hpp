#pragma once

#include <optional>
#include <vector>

#include "mcid/eval/folds.hpp"
#include "mcid/eval/metrics.hpp"
#include "mcid/model/baselines.hpp"
#include "mcid/model/checkpoint.hpp"
#include "mcid/model/train.hpp"
#include "mcid/synthdata/affinity_builder.hpp"

namespace mcid {

struct RunConfig {
  ModelKind model = ModelKind::kProposed;
  std::size_t width = 64;
  std::size_t blocks = 20;
  std::size_t kbar = 8192;
  double dropout = 0.1;
  double init_gain = kDefaultInitGain;
  TrainConfig train;
  std::uint64_t seed = 0;
};

// Everything a repetition needs, prepared from the bundle and the fold roles.
struct FoldData {
  FoldRoles roles{};
  SplitIndices split;
  Standardizer standardizer;
  MerchantSet train, validation, test;
};

inline FoldData prepare_fold(const DatasetBundle& bundle, std::size_t repetition, std::size_t kbar) {
  if (bundle.folds.size() != bundle.num_merchants) throw UsageError("bundle has no fold assignment");
  FoldData f;
  f.roles = fold_roles(repetition, bundle.num_folds);
  f.split = split_by_roles(bundle.folds, f.roles);
  if (f.split.train.empty()) throw UsageError("fold " + std::to_string(repetition) + ": empty training split");
  f.standardizer = Standardizer::fit(bundle.series, bundle.days, bundle.features, f.split.train);
  const auto affinity = restrict_affinity(bundle.affinity, f.split.train);
  f.train = make_merchant_set(bundle, f.split.train, affinity, kbar, f.standardizer);
  f.validation = make_merchant_set(bundle, f.split.validation, affinity, kbar, f.standardizer);
  f.test = make_merchant_set(bundle, f.split.test, affinity, kbar, f.standardizer);
  return f;
}

inline ModelDims model_dims(const DatasetBundle& bundle, const FoldData& fold, const RunConfig& cfg) {
  ModelDims d;
  d.days = bundle.days;
  d.features = bundle.features;
  d.known = fold.split.train.size();
  d.classes = bundle.categories;
  d.width = cfg.width;
  d.blocks = cfg.blocks;
  d.kbar = cfg.kbar;
  d.dropout = cfg.dropout;
  d.init_gain = cfg.init_gain;
  return d;
}

struct FoldOutcome {
  std::size_t repetition = 0;
  MetricReport metrics;
  TrainResult training;  // empty for Random / 1NN
  Tensor test_probs;
  std::vector<std::size_t> test_ids;
  std::optional<Checkpoint> checkpoint;
};

// Trains (or fits) one model on a prepared fold and scores it on the test split.
inline FoldOutcome run_prepared_fold(const DatasetBundle& bundle, const FoldData& fold, std::size_t repetition,
                                     const RunConfig& cfg, const EpochCallback& on_epoch = {}) {
  FoldOutcome out;
  out.repetition = repetition;
  out.test_ids = fold.split.test;
  if (cfg.model == ModelKind::kRandom) {
    out.test_probs = baseline_random(fold.test.size(), bundle.categories);
  } else if (cfg.model == ModelKind::kNearestNeighbor) {
    out.test_probs = baseline_1nn(fold.train, fold.test, bundle.categories);
  } else {
    auto model = make_model(cfg.model, model_dims(bundle, fold, cfg), cfg.seed);
    out.training = train(*model, fold.train, fold.validation, cfg.train, on_epoch);
    out.test_probs = predict(*model, fold.test, cfg.train.batch_size);
    Checkpoint c = capture_checkpoint(*model);
    c.seed = cfg.seed;
    c.epoch = out.training.best_epoch;
    c.validation_loss = out.training.best_validation_loss;
    c.standardizer = fold.standardizer;
    c.known_merchants = fold.split.train;
    out.checkpoint = std::move(c);
  }
  out.metrics = compute_metrics(out.test_probs, fold.test.labels);
  return out;
}

inline FoldOutcome run_fold(const DatasetBundle& bundle, std::size_t repetition, const RunConfig& cfg,
                            const EpochCallback& on_epoch = {}) {
  return run_prepared_fold(bundle, prepare_fold(bundle, repetition, cfg.kbar), repetition, cfg, on_epoch);
}

// One repetition per fold, rotating the test/validation roles.
inline std::vector<FoldOutcome> crossval(const DatasetBundle& bundle, const RunConfig& cfg,
                                         const std::function<void(std::size_t, const EpochLog&)>& on_epoch = {}) {
  std::vector<FoldOutcome> out;
  for (std::size_t r = 0; r < bundle.num_folds; ++r) {
    EpochCallback cb;
    if (on_epoch) cb = [&, r](const EpochLog& log) { on_epoch(r, log); };
    out.push_back(run_fold(bundle, r, cfg, cb));
  }
  return out;
}

}  // namespace mcid
