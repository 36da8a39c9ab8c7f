#pragma once

#include <optional>
#include <random>
#include <span>
#include <vector>

#include "mcid/numerics/init.hpp"
#include "mcid/numerics/layers.hpp"
#include "mcid/sparse_affinity.hpp"

namespace mcid {

// Weight init bound is sqrt(gain / fan_in); biases start at zero.
inline constexpr double kDefaultInitGain = 1.0;

struct LinearLayer {
  Var weight;  // (in, out)
  Var bias;    // (out)

  template <class Rng>
  static LinearLayer create(std::size_t in, std::size_t out, double gain, Rng& rng) {
    return {uniform_parameter({in, out}, in, gain, rng), zero_parameter({out})};
  }
  Var operator()(const Var& x) const { return linear(x, weight, bias); }
  void append_parameters(std::vector<Var>& out) const {
    out.push_back(weight);
    out.push_back(bias);
  }
};

struct Conv1dLayer {
  Var weight;  // (C_out, C_in, K)
  Var bias;    // (C_out)

  template <class Rng>
  static Conv1dLayer create(std::size_t in, std::size_t out, std::size_t kernel, double gain, Rng& rng) {
    return {uniform_parameter({out, in, kernel}, in * kernel, gain, rng), zero_parameter({out})};
  }
  std::size_t kernel() const { return weight.value().dim(2); }
  Var operator()(const Var& x) const { return conv1d(x, weight, bias, (kernel() - 1) / 2); }
  void append_parameters(std::vector<Var>& out) const {
    out.push_back(weight);
    out.push_back(bias);
  }
};

// conv(K=3) -> ReLU -> dropout -> conv(K=3) -> ReLU -> dropout, added to the
// input (through a K=1 conv when the channel count changes), then ReLU.
struct ResidualBlock {
  Conv1dLayer conv1;
  Conv1dLayer conv2;
  std::optional<Conv1dLayer> shortcut;

  template <class Rng>
  static ResidualBlock create(std::size_t in, std::size_t channels, double gain, Rng& rng) {
    ResidualBlock b{Conv1dLayer::create(in, channels, 3, gain, rng), Conv1dLayer::create(channels, channels, 3, gain, rng),
                    std::nullopt};
    if (in != channels) b.shortcut = Conv1dLayer::create(in, channels, 1, gain, rng);
    return b;
  }

  template <class Rng>
  Var forward(const Var& x, double dropout_rate, Mode mode, Rng& rng) const {
    Var h = dropout(relu(conv1(x)), dropout_rate, mode, rng);
    h = dropout(relu(conv2(h)), dropout_rate, mode, rng);
    return relu(add(h, shortcut ? (*shortcut)(x) : x));
  }

  void append_parameters(std::vector<Var>& out) const {
    conv1.append_parameters(out);
    conv2.append_parameters(out);
    if (shortcut) shortcut->append_parameters(out);
  }
};

// Stack of residual blocks followed by global average pooling over time.
struct TemporalEncoder {
  std::vector<ResidualBlock> blocks;
  double dropout_rate = 0.1;

  template <class Rng>
  static TemporalEncoder create(std::size_t input_channels, std::size_t channels, std::size_t num_blocks,
                                double dropout_rate, double gain, Rng& rng) {
    if (num_blocks == 0) throw UsageError("temporal encoder needs at least one residual block");
    TemporalEncoder e;
    e.dropout_rate = dropout_rate;
    std::size_t in = input_channels;
    for (std::size_t i = 0; i < num_blocks; ++i) {
      e.blocks.push_back(ResidualBlock::create(in, channels, gain, rng));
      in = channels;
    }
    return e;
  }

  std::size_t input_channels() const { return blocks.front().conv1.weight.value().dim(1); }
  std::size_t output_channels() const { return blocks.back().conv2.weight.value().dim(0); }

  // x: (n, d) or (B, n, d). Returns (n_k) or (B, n_k).
  template <class Rng>
  Var forward(const Var& x, Mode mode, Rng& rng) const {
    const std::size_t length = x.value().rank() == 3 ? x.value().dim(1) : x.value().dim(0);
    const std::size_t channels = x.value().shape().back();
    if (channels != input_channels()) {
      throw DimensionError("temporal encoder expects " + std::to_string(input_channels()) + " input channels, got " +
                           std::to_string(channels));
    }
    if (length < 3) throw DimensionError("temporal encoder needs at least 3 time steps, got " + std::to_string(length));
    Var h = x;
    for (const auto& block : blocks) h = block.forward(h, dropout_rate, mode, rng);
    return global_avg_pool(h);
  }

  void append_parameters(std::vector<Var>& out) const {
    for (const auto& b : blocks) b.append_parameters(out);
  }
};

// h = normalize(v) . E over a trainable table of known-merchant embeddings.
struct AffinityEncoder {
  Var embedding;  // (k, n_k)

  template <class Rng>
  static AffinityEncoder create(std::size_t known, std::size_t width, double gain, Rng& rng) {
    return {uniform_parameter({known, width}, width, gain, rng)};
  }

  std::size_t known_merchants() const { return embedding.value().dim(0); }
  Var forward(std::span<const SparseWeights> rows) const { return aggregate(rows, embedding); }
  void append_parameters(std::vector<Var>& out) const { out.push_back(embedding); }
};

// Truncate to the max_nonzeros largest counts, L1-normalize.
inline SparseWeights prepare_affinity(const AffinityVector& v, std::size_t max_nonzeros) {
  return l1_normalize(topk_truncate(v, max_nonzeros));
}

inline Var affinity_encode(const AffinityVector& v, const AffinityEncoder& encoder, std::size_t max_nonzeros) {
  return aggregate(prepare_affinity(v, max_nonzeros), encoder.embedding);
}

template <class Rng>
Var temporal_encode(const Tensor& series, const TemporalEncoder& encoder, Mode mode, Rng& rng) {
  return encoder.forward(Var(series), mode, rng);
}

}  // namespace mcid
