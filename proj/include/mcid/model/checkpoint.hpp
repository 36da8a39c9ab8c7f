#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcid/model/models.hpp"
#include "mcid/synthdata/bundle.hpp"

namespace mcid {

inline constexpr int kCheckpointVersion = 1;
inline constexpr const char* kCheckpointFormat = "mcid-checkpoint";

// checkpoint.json holds the manifest, parameters.bin every trainable tensor
// in declaration order as little-endian float64.
struct Checkpoint {
  ModelKind kind = ModelKind::kRandom;
  ModelDims dims;
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
  double validation_loss = 0.0;
  Standardizer standardizer;
  std::vector<std::size_t> known_merchants;  // affinity reference, in embedding-row order
  std::vector<Tensor> parameters;
};

inline Checkpoint capture_checkpoint(const Classifier& model) {
  Checkpoint c;
  c.kind = model.kind();
  c.dims = model.dims();
  for (const auto& p : model.parameters()) c.parameters.push_back(p.value());
  return c;
}

inline std::unique_ptr<Classifier> restore_model(const Checkpoint& c) {
  auto model = make_model(c.kind, c.dims, c.seed);
  auto params = model->parameters();
  if (params.size() != c.parameters.size()) {
    throw FormatError("parameters", "expected " + std::to_string(params.size()) + " tensors, checkpoint has " +
                                        std::to_string(c.parameters.size()));
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].shape() != c.parameters[k].shape()) {
      throw FormatError("parameters", "tensor " + std::to_string(k) + " has shape " +
                                          shape_str(c.parameters[k].shape()) + ", model expects " +
                                          shape_str(params[k].shape()));
    }
    params[k].mutable_value() = c.parameters[k];
  }
  return model;
}

inline nlohmann::json checkpoint_manifest(const Checkpoint& c) {
  nlohmann::json shapes = nlohmann::json::array();
  for (const auto& t : c.parameters) shapes.push_back(t.shape());
  return {{"format", kCheckpointFormat},
          {"version", kCheckpointVersion},
          {"model", to_string(c.kind)},
          {"n", c.dims.days},
          {"d", c.dims.features},
          {"k", c.dims.known},
          {"c", c.dims.classes},
          {"n_k", c.dims.width},
          {"kbar", c.dims.kbar},
          {"blocks", c.dims.blocks},
          {"dropout", c.dims.dropout},
          {"init_gain", c.dims.init_gain},
          {"seed", c.seed},
          {"epoch", c.epoch},
          {"validation_loss", c.validation_loss},
          {"standardization", {{"mean", c.standardizer.mean}, {"scale", c.standardizer.scale}}},
          {"known_merchants", c.known_merchants},
          {"parameter_shapes", shapes}};
}

inline void write_checkpoint(const Checkpoint& c, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "checkpoint.json");
    out << checkpoint_manifest(c).dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write " + (dir / "checkpoint.json").string());
  }
  std::vector<double> flat;
  for (const auto& t : c.parameters) flat.insert(flat.end(), t.values().begin(), t.values().end());
  std::ofstream out(dir / "parameters.bin", std::ios::binary);
  detail::write_f64_le(out, flat);
  if (!out) throw std::runtime_error("cannot write " + (dir / "parameters.bin").string());
}

inline Checkpoint read_checkpoint(const std::filesystem::path& dir) {
  nlohmann::json m;
  {
    std::ifstream in(dir / "checkpoint.json");
    if (!in) throw FormatError("checkpoint.json", "cannot open " + (dir / "checkpoint.json").string());
    try {
      in >> m;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("checkpoint.json", e.what());
    }
  }
  using detail::manifest_get;
  if (manifest_get<std::string>(m, "format") != kCheckpointFormat) throw FormatError("format", "not a model checkpoint");
  if (manifest_get<int>(m, "version") != kCheckpointVersion) throw FormatError("version", "unsupported version");
  Checkpoint c;
  try {
    c.kind = parse_model_kind(manifest_get<std::string>(m, "model"));
  } catch (const UsageError& e) {
    throw FormatError("model", e.what());
  }
  c.dims.days = manifest_get<std::size_t>(m, "n");
  c.dims.features = manifest_get<std::size_t>(m, "d");
  c.dims.known = manifest_get<std::size_t>(m, "k");
  c.dims.classes = manifest_get<std::size_t>(m, "c");
  c.dims.width = manifest_get<std::size_t>(m, "n_k");
  c.dims.kbar = manifest_get<std::size_t>(m, "kbar");
  c.dims.blocks = manifest_get<std::size_t>(m, "blocks");
  c.dims.dropout = manifest_get<double>(m, "dropout");
  c.dims.init_gain = manifest_get<double>(m, "init_gain");
  c.seed = manifest_get<std::uint64_t>(m, "seed");
  c.epoch = manifest_get<std::size_t>(m, "epoch");
  c.validation_loss = manifest_get<double>(m, "validation_loss");
  const auto stats = manifest_get<nlohmann::json>(m, "standardization");
  c.standardizer.mean = manifest_get<std::vector<double>>(stats, "mean");
  c.standardizer.scale = manifest_get<std::vector<double>>(stats, "scale");
  if (c.standardizer.mean.size() != c.dims.features || c.standardizer.scale.size() != c.dims.features) {
    throw FormatError("standardization", "width differs from d");
  }
  c.known_merchants = manifest_get<std::vector<std::size_t>>(m, "known_merchants");
  if (uses_affinity(c.kind) && c.known_merchants.size() != c.dims.known) {
    throw FormatError("known_merchants", "length differs from k");
  }
  const auto shapes = manifest_get<std::vector<Shape>>(m, "parameter_shapes");
  std::size_t total = 0;
  for (const auto& s : shapes) total += shape_size(s);
  const auto flat = detail::read_f64_le(dir / "parameters.bin", total, "parameters.bin");
  std::size_t offset = 0;
  for (const auto& s : shapes) {
    const std::size_t len = shape_size(s);
    c.parameters.emplace_back(s, std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(offset),
                                                     flat.begin() + static_cast<std::ptrdiff_t>(offset + len)));
    offset += len;
  }
  return c;
}

}  // namespace mcid
