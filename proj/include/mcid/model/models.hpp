#pragma once

#include <array>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mcid/model/data.hpp"
#include "mcid/model/heads.hpp"

namespace mcid {

enum class ModelKind { kProposed, kSimpleConcat, kTemporalOnly, kAffinityOnly, kLogistic, kNearestNeighbor, kRandom };

inline constexpr std::array<std::pair<ModelKind, std::string_view>, 7> kModelKindNames{{
    {ModelKind::kProposed, "proposed"},
    {ModelKind::kSimpleConcat, "simple_concat"},
    {ModelKind::kTemporalOnly, "temporal_only"},
    {ModelKind::kAffinityOnly, "affinity_only"},
    {ModelKind::kLogistic, "lr"},
    {ModelKind::kNearestNeighbor, "1nn"},
    {ModelKind::kRandom, "random"},
}};

inline std::string to_string(ModelKind kind) {
  for (const auto& [k, name] : kModelKindNames) {
    if (k == kind) return std::string(name);
  }
  return "unknown";
}

inline ModelKind parse_model_kind(std::string_view name) {
  for (const auto& [k, n] : kModelKindNames) {
    if (n == name) return k;
  }
  throw UsageError("unknown model kind '" + std::string(name) +
                   "' (expected proposed, simple_concat, temporal_only, affinity_only, lr, 1nn or random)");
}

inline bool is_trainable(ModelKind kind) { return kind != ModelKind::kNearestNeighbor && kind != ModelKind::kRandom; }

inline bool uses_affinity(ModelKind kind) {
  return kind == ModelKind::kProposed || kind == ModelKind::kSimpleConcat || kind == ModelKind::kAffinityOnly;
}

struct ModelDims {
  std::size_t days = 364;     // n
  std::size_t features = 10;  // d
  std::size_t known = 0;      // k, training merchants
  std::size_t classes = 0;    // c
  std::size_t width = 64;     // n_k
  std::size_t blocks = 20;
  std::size_t kbar = 8192;
  double dropout = 0.1;
  double init_gain = kDefaultInitGain;

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

using ModelRng = std::mt19937_64;

struct Representations {
  Tensor affinity;  // (B, n_k)
  Tensor temporal;  // (B, n_k)
};

class Classifier {
 public:
  explicit Classifier(ModelDims dims) : dims_(dims) {}
  virtual ~Classifier() = default;

  virtual ModelKind kind() const = 0;
  // (B, c) class probabilities.
  virtual Var forward(const Batch& batch, Mode mode, ModelRng& rng) const = 0;
  // Trainable parameters in declaration order.
  virtual std::vector<Var> parameters() const = 0;
  // Encoder outputs for models with both encoders.
  virtual std::optional<Representations> represent(const Batch&) const { return std::nullopt; }

  const ModelDims& dims() const { return dims_; }

 protected:
  ModelDims dims_;
};

class ProposedModel final : public Classifier {
 public:
  ProposedModel(ModelDims dims, ModelRng& rng)
      : Classifier(dims),
        affinity_(AffinityEncoder::create(dims.known, dims.width, dims.init_gain, rng)),
        temporal_(TemporalEncoder::create(dims.features, dims.width, dims.blocks, dims.dropout, dims.init_gain, rng)),
        head_(FusionHead::create(dims.width, dims.classes, dims.init_gain, rng)) {}

  ModelKind kind() const override { return ModelKind::kProposed; }
  Var forward(const Batch& batch, Mode mode, ModelRng& rng) const override {
    return head_.forward(affinity_.forward(batch.affinity), temporal_.forward(Var(batch.series), mode, rng)).probs;
  }
  FusionOutputs forward_detailed(const Batch& batch, Mode mode, ModelRng& rng) const {
    return head_.forward(affinity_.forward(batch.affinity), temporal_.forward(Var(batch.series), mode, rng));
  }
  std::vector<Var> parameters() const override {
    std::vector<Var> out;
    affinity_.append_parameters(out);
    temporal_.append_parameters(out);
    head_.append_parameters(out);
    return out;
  }
  std::optional<Representations> represent(const Batch& batch) const override {
    ModelRng unused(0);
    return Representations{affinity_.forward(batch.affinity).value(),
                           temporal_.forward(Var(batch.series), Mode::kEval, unused).value()};
  }

  const AffinityEncoder& affinity_encoder() const { return affinity_; }
  const TemporalEncoder& temporal_encoder() const { return temporal_; }
  const FusionHead& head() const { return head_; }

 private:
  AffinityEncoder affinity_;
  TemporalEncoder temporal_;
  FusionHead head_;
};

class SimpleConcatModel final : public Classifier {
 public:
  SimpleConcatModel(ModelDims dims, ModelRng& rng)
      : Classifier(dims),
        affinity_(AffinityEncoder::create(dims.known, dims.width, dims.init_gain, rng)),
        temporal_(TemporalEncoder::create(dims.features, dims.width, dims.blocks, dims.dropout, dims.init_gain, rng)),
        head_(ConcatHead::create(dims.width, dims.classes, dims.init_gain, rng)) {}

  ModelKind kind() const override { return ModelKind::kSimpleConcat; }
  Var forward(const Batch& batch, Mode mode, ModelRng& rng) const override {
    return head_.forward(affinity_.forward(batch.affinity), temporal_.forward(Var(batch.series), mode, rng));
  }
  std::vector<Var> parameters() const override {
    std::vector<Var> out;
    affinity_.append_parameters(out);
    temporal_.append_parameters(out);
    head_.append_parameters(out);
    return out;
  }
  std::optional<Representations> represent(const Batch& batch) const override {
    ModelRng unused(0);
    return Representations{affinity_.forward(batch.affinity).value(),
                           temporal_.forward(Var(batch.series), Mode::kEval, unused).value()};
  }

 private:
  AffinityEncoder affinity_;
  TemporalEncoder temporal_;
  ConcatHead head_;
};

class TemporalOnlyModel final : public Classifier {
 public:
  TemporalOnlyModel(ModelDims dims, ModelRng& rng)
      : Classifier(dims),
        temporal_(TemporalEncoder::create(dims.features, dims.width, dims.blocks, dims.dropout, dims.init_gain, rng)),
        head_(SingleHead::create(dims.width, dims.classes, dims.init_gain, rng)) {}

  ModelKind kind() const override { return ModelKind::kTemporalOnly; }
  Var forward(const Batch& batch, Mode mode, ModelRng& rng) const override {
    return head_.forward(temporal_.forward(Var(batch.series), mode, rng));
  }
  std::vector<Var> parameters() const override {
    std::vector<Var> out;
    temporal_.append_parameters(out);
    head_.append_parameters(out);
    return out;
  }
  const TemporalEncoder& temporal_encoder() const { return temporal_; }

 private:
  TemporalEncoder temporal_;
  SingleHead head_;
};

class AffinityOnlyModel final : public Classifier {
 public:
  AffinityOnlyModel(ModelDims dims, ModelRng& rng)
      : Classifier(dims),
        affinity_(AffinityEncoder::create(dims.known, dims.width, dims.init_gain, rng)),
        head_(SingleHead::create(dims.width, dims.classes, dims.init_gain, rng)) {}

  ModelKind kind() const override { return ModelKind::kAffinityOnly; }
  Var forward(const Batch& batch, Mode, ModelRng&) const override {
    return head_.forward(affinity_.forward(batch.affinity));
  }
  std::vector<Var> parameters() const override {
    std::vector<Var> out;
    affinity_.append_parameters(out);
    head_.append_parameters(out);
    return out;
  }

 private:
  AffinityEncoder affinity_;
  SingleHead head_;
};

// Multinomial logistic regression on the flattened (n * d) series.
class LogisticModel final : public Classifier {
 public:
  LogisticModel(ModelDims dims, ModelRng&)
      : Classifier(dims),
        layer_{zero_parameter({dims.days * dims.features, dims.classes}), zero_parameter({dims.classes})} {}

  ModelKind kind() const override { return ModelKind::kLogistic; }
  Var forward(const Batch& batch, Mode, ModelRng&) const override {
    const std::size_t flat = dims_.days * dims_.features;
    if (batch.series.size() != batch.size() * flat) {
      throw DimensionError("lr: batch series " + shape_str(batch.series.shape()) + " does not match model dims");
    }
    return softmax(layer_(Var(batch.series.reshaped({batch.size(), flat}))));
  }
  std::vector<Var> parameters() const override {
    std::vector<Var> out;
    layer_.append_parameters(out);
    return out;
  }

 private:
  LinearLayer layer_;
};

inline std::unique_ptr<Classifier> make_model(ModelKind kind, const ModelDims& dims, std::uint64_t seed) {
  if (dims.classes == 0 || dims.features == 0 || dims.days == 0 || dims.width == 0) {
    throw UsageError("make_model: dimensions must be positive");
  }
  if (uses_affinity(kind) && dims.known == 0) throw UsageError("make_model: affinity models need known merchants");
  if (dims.kbar == 0) throw UsageError("make_model: kbar must be at least 1");
  ModelRng rng(seed);
  switch (kind) {
    case ModelKind::kProposed: return std::make_unique<ProposedModel>(dims, rng);
    case ModelKind::kSimpleConcat: return std::make_unique<SimpleConcatModel>(dims, rng);
    case ModelKind::kTemporalOnly: return std::make_unique<TemporalOnlyModel>(dims, rng);
    case ModelKind::kAffinityOnly: return std::make_unique<AffinityOnlyModel>(dims, rng);
    case ModelKind::kLogistic: return std::make_unique<LogisticModel>(dims, rng);
    default: break;
  }
  throw UsageError("make_model: '" + to_string(kind) + "' has no trainable parameters");
}

}  // namespace mcid
