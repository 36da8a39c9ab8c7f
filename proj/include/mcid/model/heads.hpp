#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcid/model/encoders.hpp"

namespace mcid {

struct FusionOutputs {
  Var probs;
  Var weights;  // generated W, flattened (.., n_k * c)
  Var bias;     // generated b, (.., c)
};

// The affinity representation generates a per-merchant logistic regression
// (W, b) that is applied to the projected temporal representation.
struct FusionHead {
  LinearLayer temporal_proj;  // n_k -> n_k
  LinearLayer weight_gen;     // n_k -> n_k * c
  LinearLayer bias_gen;       // n_k -> c
  std::size_t classes = 0;

  template <class Rng>
  static FusionHead create(std::size_t width, std::size_t classes, double gain, Rng& rng) {
    return {LinearLayer::create(width, width, gain, rng), LinearLayer::create(width, width * classes, gain, rng),
            LinearLayer::create(width, classes, gain, rng), classes};
  }

  FusionOutputs forward(const Var& h_affinity, const Var& h_temporal) const {
    if (h_affinity.value().shape() != h_temporal.value().shape()) {
      throw DimensionError("fusion head: affinity " + shape_str(h_affinity.value().shape()) + " vs temporal " +
                           shape_str(h_temporal.value().shape()));
    }
    Var h_bar = relu(temporal_proj(h_temporal));
    Var w = relu(weight_gen(h_affinity));
    Var b = relu(bias_gen(h_affinity));
    auto negative = [](const Var& v) {
      auto vals = v.value().values();
      return std::any_of(vals.begin(), vals.end(), [](double x) { return x < 0.0; });
    };
    if (negative(w) || negative(b)) throw std::logic_error("fusion head: generated classifier has negative entries");
    return {softmax(add(rowwise_matvec(h_bar, w, classes), b)), w, b};
  }

  void append_parameters(std::vector<Var>& out) const {
    temporal_proj.append_parameters(out);
    weight_gen.append_parameters(out);
    bias_gen.append_parameters(out);
  }
};

// softmax(MLP(concat(h_affinity, h_temporal))), hidden 2 n_k -> n_k -> c.
struct ConcatHead {
  LinearLayer hidden;
  LinearLayer output;

  template <class Rng>
  static ConcatHead create(std::size_t width, std::size_t classes, double gain, Rng& rng) {
    return {LinearLayer::create(2 * width, width, gain, rng), LinearLayer::create(width, classes, gain, rng)};
  }

  Var forward(const Var& h_affinity, const Var& h_temporal) const {
    return softmax(output(relu(hidden(concat(h_affinity, h_temporal)))));
  }

  void append_parameters(std::vector<Var>& out) const {
    hidden.append_parameters(out);
    output.append_parameters(out);
  }
};

// Linear-ReLU-Linear-Softmax on one representation.
struct SingleHead {
  LinearLayer hidden;
  LinearLayer output;

  template <class Rng>
  static SingleHead create(std::size_t width, std::size_t classes, double gain, Rng& rng) {
    return {LinearLayer::create(width, width, gain, rng), LinearLayer::create(width, classes, gain, rng)};
  }

  Var forward(const Var& h) const { return softmax(output(relu(hidden(h)))); }

  void append_parameters(std::vector<Var>& out) const {
    hidden.append_parameters(out);
    output.append_parameters(out);
  }
};

inline Var fuse_and_classify(const Var& h_affinity, const Var& h_temporal, const FusionHead& head) {
  return head.forward(h_affinity, h_temporal).probs;
}

inline Var simple_concat_classify(const Var& h_affinity, const Var& h_temporal, const ConcatHead& head) {
  return head.forward(h_affinity, h_temporal);
}

inline Var single_encoder_classify(const Var& h, const SingleHead& head) { return head.forward(h); }

}  // namespace mcid
