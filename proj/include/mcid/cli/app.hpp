#pragma once

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mcid/eval/bad_actor.hpp"
#include "mcid/eval/experiments.hpp"
#include "mcid/eval/projection.hpp"
#include "mcid/eval/sweep.hpp"
#include "mcid/synthdata/dataset.hpp"

namespace mcid::cli {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr const char* kTieRule = "equal probabilities ranked by ascending category index";

// Everything a command needs, resolved from defaults, the config file and flags.
struct Settings {
  fs::path dataset = "bundle";
  fs::path out = "results";
  fs::path checkpoint;  // empty: <out>/checkpoint
  std::uint64_t seed = 7;
  std::size_t folds = 5;        // folds in a generated bundle
  std::size_t repetitions = 0;  // crossval repetitions to run; 0: one per fold
  std::size_t repetition = 0;
  RunConfig run;
  WorldConfig generator;
  std::size_t k_threshold = 0;  // 0: every threshold 1..c
  double bad_actor_fraction = 0.1;
  std::vector<std::size_t> kbar_values = default_kbar_values();
  std::size_t clusters = 5;
};

inline json default_config() {
  const Settings s;
  const TrainConfig& t = s.run.train;
  json g = s.generator;
  g.erase("seed");
  return {{"dataset", s.dataset.string()},
          {"out", s.out.string()},
          {"checkpoint", ""},
          {"seed", s.seed},
          {"folds", s.folds},
          {"repetitions", s.repetitions},
          {"repetition", s.repetition},
          {"model", to_string(s.run.model)},
          {"width", s.run.width},
          {"blocks", s.run.blocks},
          {"kbar", s.run.kbar},
          {"dropout", s.run.dropout},
          {"init_gain", s.run.init_gain},
          {"train",
           {{"epochs", t.epochs},
            {"batch_size", t.batch_size},
            {"lr_max", t.lr_max},
            {"weight_decay", t.weight_decay},
            {"momentum_max", t.momentum_max},
            {"momentum_min", t.momentum_min},
            {"div_factor", t.div_factor},
            {"final_div_factor", t.final_div_factor},
            {"pct_start", t.pct_start}}},
          {"generator", g},
          {"k_threshold", s.k_threshold},
          {"bad_actor_fraction", s.bad_actor_fraction},
          {"kbar_values", s.kbar_values},
          {"clusters", s.clusters}};
}

namespace detail {

template <class T>
T field(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw UsageError("config field '" + key + "': " + e.what());
  }
}

inline void reject_unknown(const json& given, const json& known, const std::string& prefix) {
  for (const auto& [key, value] : given.items()) {
    if (!known.contains(key)) throw UsageError("config field '" + prefix + key + "' is not recognised");
    if (value.is_object() && known.at(key).is_object() && key != "generator") {
      reject_unknown(value, known.at(key), prefix + key + ".");
    }
  }
}

}  // namespace detail

// Parses and validates a fully merged config.
inline Settings settings_from_json(const json& j) {
  using detail::field;
  Settings s;
  s.dataset = field<std::string>(j, "dataset");
  s.out = field<std::string>(j, "out");
  s.checkpoint = field<std::string>(j, "checkpoint");
  s.seed = field<std::uint64_t>(j, "seed");
  s.folds = field<std::size_t>(j, "folds");
  s.repetitions = field<std::size_t>(j, "repetitions");
  s.repetition = field<std::size_t>(j, "repetition");
  s.run.model = parse_model_kind(field<std::string>(j, "model"));
  s.run.width = field<std::size_t>(j, "width");
  s.run.blocks = field<std::size_t>(j, "blocks");
  s.run.kbar = field<std::size_t>(j, "kbar");
  s.run.dropout = field<double>(j, "dropout");
  s.run.init_gain = field<double>(j, "init_gain");
  s.run.seed = s.seed;
  const json& t = j.at("train");
  TrainConfig& tc = s.run.train;
  tc.epochs = field<std::size_t>(t, "epochs");
  tc.batch_size = field<std::size_t>(t, "batch_size");
  tc.lr_max = field<double>(t, "lr_max");
  tc.weight_decay = field<double>(t, "weight_decay");
  tc.momentum_max = field<double>(t, "momentum_max");
  tc.momentum_min = field<double>(t, "momentum_min");
  tc.div_factor = field<double>(t, "div_factor");
  tc.final_div_factor = field<double>(t, "final_div_factor");
  tc.pct_start = field<double>(t, "pct_start");
  tc.seed = s.seed;
  try {
    s.generator = j.at("generator").get<WorldConfig>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("config field 'generator': ") + e.what());
  }
  s.generator.seed = s.seed;
  s.k_threshold = field<std::size_t>(j, "k_threshold");
  s.bad_actor_fraction = field<double>(j, "bad_actor_fraction");
  s.kbar_values = field<std::vector<std::size_t>>(j, "kbar_values");
  s.clusters = field<std::size_t>(j, "clusters");

  if (tc.epochs < 1) throw UsageError("config field 'train.epochs' must be at least 1");
  if (tc.batch_size < 1) throw UsageError("config field 'train.batch_size' must be at least 1");
  if (!(tc.lr_max >= 0.0)) throw UsageError("config field 'train.lr_max' must be nonnegative");
  if (s.run.kbar < 1) throw UsageError("config field 'kbar' must be at least 1");
  if (s.run.width < 1) throw UsageError("config field 'width' must be at least 1");
  if (s.run.blocks < 1) throw UsageError("config field 'blocks' must be at least 1");
  if (!(s.run.dropout >= 0.0 && s.run.dropout < 1.0)) throw UsageError("config field 'dropout' must lie in [0, 1)");
  if (s.folds < 3) throw UsageError("config field 'folds' must be at least 3");
  if (s.clusters < 1) throw UsageError("config field 'clusters' must be at least 1");
  return s;
}

// Command-line values that override the config file.
struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> model;
  std::optional<std::size_t> k_threshold;
  std::optional<std::string> kbar;
  std::optional<std::size_t> folds;
  std::optional<std::string> dataset;
  std::optional<std::string> checkpoint;
};

inline std::vector<std::size_t> parse_kbar_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw UsageError("--kbar: '" + item + "' is not a positive integer");
    }
  }
  if (out.empty()) throw UsageError("--kbar: no values");
  return out;
}

// --folds is the fold count for generate and the repetition count elsewhere.
inline json resolve_config(const Overrides& o, const std::string& command) {
  json cfg = default_config();
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw UsageError("cannot open config file " + o.config);
    json given;
    try {
      in >> given;
    } catch (const json::exception& e) {
      throw UsageError("config file " + o.config + ": " + e.what());
    }
    if (!given.is_object()) throw UsageError("config file " + o.config + " must hold a JSON object");
    detail::reject_unknown(given, cfg, "");
    cfg.merge_patch(given);
  }
  if (o.seed) cfg["seed"] = *o.seed;
  if (o.out) cfg["out"] = *o.out;
  if (o.model) cfg["model"] = *o.model;
  if (o.k_threshold) cfg["k_threshold"] = *o.k_threshold;
  if (o.folds) cfg[command == "generate" ? "folds" : "repetitions"] = *o.folds;
  if (o.dataset) cfg["dataset"] = *o.dataset;
  if (o.checkpoint) cfg["checkpoint"] = *o.checkpoint;
  if (o.kbar) {
    const auto values = parse_kbar_list(*o.kbar);
    cfg["kbar_values"] = values;
    cfg["kbar"] = values.front();
  }
  if (cfg.contains("generator")) cfg["generator"].erase("seed");
  return cfg;
}

inline void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw UsageError("cannot create output directory " + dir.string());
  const fs::path probe = dir / ".write_probe";
  {
    std::ofstream test(probe);
    if (!test) throw UsageError("output directory " + dir.string() + " is not writable");
  }
  fs::remove(probe, ec);
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) throw UsageError("cannot write " + path.string());
}

inline std::ostringstream csv_stream() {
  std::ostringstream s;
  s << std::fixed << std::setprecision(10);
  return s;
}

inline void write_resolved(const json& cfg, const fs::path& dir) {
  write_text(dir / "config.resolved.json", cfg.dump(2) + "\n");
}

inline DatasetBundle load_bundle(const Settings& s) {
  if (!fs::exists(s.dataset / "manifest.json")) {
    throw UsageError("no dataset bundle at " + s.dataset.string() + " (run 'generate' first)");
  }
  return read_bundle(s.dataset);
}

inline fs::path checkpoint_dir(const Settings& s) { return s.checkpoint.empty() ? s.out / "checkpoint" : s.checkpoint; }

inline std::string metric_header() { return std::string(kMetricColumns); }

inline void log_epochs(std::size_t rep, const EpochLog& log) {
  std::cerr << "  fold " << rep << " epoch " << log.epoch << " train " << log.train_loss << " valid "
            << log.validation_loss << '\n';
}

// Checks a checkpoint against the bundle it is applied to and rebuilds the
// test split it was trained for.
inline MerchantSet checkpoint_test_set(const Checkpoint& c, const DatasetBundle& b, const Settings& s) {
  auto mismatch = [](const std::string& name, std::size_t ck, std::size_t bundle) {
    throw FormatError(name, "checkpoint has " + name + "=" + std::to_string(ck) + " but the bundle has " +
                                name + "=" + std::to_string(bundle));
  };
  if (c.dims.days != b.days) mismatch("n", c.dims.days, b.days);
  if (c.dims.features != b.features) mismatch("d", c.dims.features, b.features);
  if (c.dims.classes != b.categories) mismatch("c", c.dims.classes, b.categories);
  const FoldRoles roles = fold_roles(s.repetition, b.num_folds);
  const SplitIndices split = split_by_roles(b.folds, roles);
  if (uses_affinity(c.kind)) {
    if (c.dims.known != split.train.size()) mismatch("k", c.dims.known, split.train.size());
    if (c.known_merchants != split.train) {
      throw FormatError("known_merchants", "checkpoint was trained on a different split (repetition " +
                                               std::to_string(s.repetition) + ")");
    }
  }
  const auto affinity = restrict_affinity(b.affinity, c.known_merchants);
  return make_merchant_set(b, split.test, affinity, c.dims.kbar, c.standardizer);
}

inline void write_metrics_csv(const fs::path& path, const std::vector<std::pair<std::string, MetricReport>>& rows,
                              const std::string& key) {
  auto out = csv_stream();
  out << key << ',' << metric_header() << '\n';
  for (const auto& [name, r] : rows) {
    out << name << ',';
    write_metric_values(out, r);
    out << '\n';
  }
  write_text(path, out.str());
}

inline void write_history_csv(const fs::path& path, const std::vector<std::pair<std::size_t, TrainResult>>& runs) {
  auto out = csv_stream();
  out << "fold,epoch,train_loss,validation_loss,best\n";
  for (const auto& [fold, r] : runs) {
    for (const auto& h : r.history) {
      out << fold << ',' << h.epoch << ',' << h.train_loss << ',' << h.validation_loss << ','
          << (h.epoch == r.best_epoch ? 1 : 0) << '\n';
    }
  }
  write_text(path, out.str());
}

inline json metrics_json(const MetricReport& r) {
  return {{"micro_f1", r.micro_f1},
          {"macro_f1", r.macro_f1},
          {"average_rank", r.average_rank},
          {"hit_at_3", r.hit_at_3},
          {"hit_at_5", r.hit_at_5}};
}

// Commands

inline int command_generate(const Settings& s, const json& cfg) {
  WorldConfig world = s.generator;
  validate(world);
  if (world.num_merchants < world.num_categories * s.folds) {
    throw UsageError("generator: " + std::to_string(world.num_merchants) + " merchants cannot fill " +
                     std::to_string(s.folds) + " folds for " + std::to_string(world.num_categories) + " categories");
  }
  ensure_directory(s.out);
  const DatasetBundle b = make_bundle(world, s.folds);
  write_bundle(b, s.out);
  write_resolved(cfg, s.out);
  std::cout << "bundle " << s.out.string() << ": " << b.num_merchants << " merchants, " << b.days << " days, "
            << b.features << " features, " << b.categories << " categories, " << b.num_folds << " folds\n";
  std::size_t links = 0;
  for (const auto& a : b.affinity) links += a.nnz();
  std::cout << "features:";
  for (const auto& f : b.feature_names) std::cout << ' ' << f;
  std::cout << "\naffinity entries: " << links << '\n';
  return 0;
}

inline int command_crossval(const Settings& s, const json& cfg) {
  const DatasetBundle b = load_bundle(s);
  const std::size_t reps = s.repetitions == 0 ? b.num_folds : s.repetitions;
  if (reps > b.num_folds) {
    throw UsageError("config field 'repetitions': the bundle has only " + std::to_string(b.num_folds) + " folds");
  }
  ensure_directory(s.out);
  write_resolved(cfg, s.out);
  std::vector<std::pair<std::string, MetricReport>> rows;
  std::vector<MetricReport> reports;
  std::vector<std::pair<std::size_t, TrainResult>> histories;
  json folds = json::array();
  for (std::size_t r = 0; r < reps; ++r) {
    std::cerr << "repetition " << r + 1 << "/" << reps << " (" << to_string(s.run.model) << ")\n";
    const FoldOutcome o = run_fold(b, r, s.run, [r](const EpochLog& log) { log_epochs(r, log); });
    rows.emplace_back(std::to_string(r), o.metrics);
    reports.push_back(o.metrics);
    if (o.checkpoint) {
      histories.emplace_back(r, o.training);
      write_checkpoint(*o.checkpoint, s.out / ("fold_" + std::to_string(r)));
    }
    const FoldRoles roles = fold_roles(r, b.num_folds);
    folds.push_back({{"repetition", r},
                     {"test_fold", roles.test},
                     {"validation_fold", roles.validation},
                     {"best_epoch", o.training.best_epoch},
                     {"metrics", metrics_json(o.metrics)}});
    std::cerr << "  test micro_f1 " << o.metrics.micro_f1 << " average_rank " << o.metrics.average_rank << '\n';
  }
  write_metrics_csv(s.out / "folds.csv", rows, "fold");
  const MetricSummary sum = summarize(reports);
  write_metrics_csv(s.out / "summary.csv", {{"mean", sum.mean}, {"sd", sum.sd}}, "statistic");
  if (!histories.empty()) write_history_csv(s.out / "history.csv", histories);
  const json summary{{"model", to_string(s.run.model)},
                     {"repetitions", reps},
                     {"rank_tie_rule", kTieRule},
                     {"folds", folds},
                     {"mean", metrics_json(sum.mean)},
                     {"sd", metrics_json(sum.sd)}};
  write_text(s.out / "summary.json", summary.dump(2) + "\n");
  auto line = csv_stream();
  line << std::setprecision(4) << "micro_f1 " << sum.mean.micro_f1 << " +- " << sum.sd.micro_f1 << ", average_rank "
       << sum.mean.average_rank << " +- " << sum.sd.average_rank;
  std::cout << to_string(s.run.model) << ": " << line.str() << '\n';
  return 0;
}

inline int command_train(const Settings& s, const json& cfg) {
  const DatasetBundle b = load_bundle(s);
  if (s.repetition >= b.num_folds) throw UsageError("config field 'repetition' must be below the fold count");
  ensure_directory(s.out);
  write_resolved(cfg, s.out);
  const std::size_t r = s.repetition;
  const FoldOutcome o = run_fold(b, r, s.run, [r](const EpochLog& log) { log_epochs(r, log); });
  write_metrics_csv(s.out / "metrics.csv", {{std::to_string(r), o.metrics}}, "fold");
  if (o.checkpoint) {
    write_checkpoint(*o.checkpoint, checkpoint_dir(s));
    write_history_csv(s.out / "history.csv", {{r, o.training}});
    std::cout << "checkpoint " << checkpoint_dir(s).string() << " (epoch " << o.training.best_epoch << ")\n";
  }
  std::cout << "test micro_f1 " << o.metrics.micro_f1 << '\n';
  return 0;
}

inline std::pair<std::unique_ptr<Classifier>, MerchantSet> load_model_and_test_set(const Settings& s,
                                                                                   const DatasetBundle& b) {
  const fs::path dir = checkpoint_dir(s);
  if (!fs::exists(dir / "checkpoint.json")) throw UsageError("no checkpoint at " + dir.string() + " (run 'train' first)");
  const Checkpoint c = read_checkpoint(dir);
  MerchantSet test = checkpoint_test_set(c, b, s);
  return {restore_model(c), std::move(test)};
}

inline int command_evaluate(const Settings& s, const json& cfg) {
  const DatasetBundle b = load_bundle(s);
  auto [model, test] = load_model_and_test_set(s, b);
  ensure_directory(s.out);
  write_resolved(cfg, s.out);
  const Tensor probs = predict(*model, test, s.run.train.batch_size);
  const MetricReport r = compute_metrics(probs, test.labels);
  write_metrics_csv(s.out / "evaluation.csv", {{std::to_string(s.repetition), r}}, "fold");
  auto out = csv_stream();
  out << "merchant_id,label";
  for (std::size_t j = 0; j < b.categories; ++j) out << ",p" << j;
  out << '\n';
  for (std::size_t i = 0; i < test.size(); ++i) {
    out << test.ids[i] << ',' << test.labels[i];
    for (std::size_t j = 0; j < b.categories; ++j) out << ',' << probs.at(i, j);
    out << '\n';
  }
  write_text(s.out / "predictions.csv", out.str());
  std::cout << "test micro_f1 " << r.micro_f1 << " average_rank " << r.average_rank << '\n';
  return 0;
}

inline int command_detect(const Settings& s, const json& cfg) {
  const DatasetBundle b = load_bundle(s);
  auto [model, test] = load_model_and_test_set(s, b);
  if (s.k_threshold > b.categories) throw UsageError("--k-threshold must lie in [1, c]");
  ensure_directory(s.out);
  write_resolved(cfg, s.out);
  const Tensor probs = predict(*model, test, s.run.train.batch_size);
  std::vector<DetectionResult> results;
  if (s.k_threshold == 0) {
    results = bad_actor_curve(probs, test.labels, s.bad_actor_fraction, s.seed);
  } else {
    results.push_back(bad_actor_experiment(probs, test.labels, s.bad_actor_fraction, s.k_threshold, s.seed));
  }
  auto out = csv_stream();
  out << "k_threshold,precision,recall,f1,flagged_count\n";
  for (const auto& r : results) {
    out << r.k_threshold << ',' << r.precision << ',' << r.recall << ',' << r.f1 << ',' << r.flagged << '\n';
  }
  write_text(s.out / "detect.csv", out.str());
  std::cout << "wrote " << results.size() << " threshold rows to " << (s.out / "detect.csv").string() << '\n';
  return 0;
}

inline int command_sweep(const Settings& s, const json& cfg) {
  const DatasetBundle b = load_bundle(s);
  ensure_directory(s.out);
  write_resolved(cfg, s.out);
  const auto rows = sparsity_sweep(b, s.kbar_values, s.run, s.repetition);
  auto out = csv_stream();
  write_sweep_csv(out, rows);
  write_text(s.out / "sweep.csv", out.str());
  std::cout << "wrote " << rows.size() << " rows to " << (s.out / "sweep.csv").string() << '\n';
  return 0;
}

// k-means on the affinity representations, then MDS of the temporal
// representations, globally and within each cluster.
inline int command_project(const Settings& s, const json& cfg) {
  const DatasetBundle b = load_bundle(s);
  auto [model, test] = load_model_and_test_set(s, b);
  std::vector<std::size_t> all(test.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const auto reps = model->represent(make_batch(test, all));
  if (!reps) throw UsageError("project needs a model with both encoders (proposed or simple_concat)");
  if (s.clusters > test.size()) throw UsageError("config field 'clusters' exceeds the number of test merchants");
  ensure_directory(s.out);
  write_resolved(cfg, s.out);
  const KMeansResult km = kmeans(reps->affinity, s.clusters, s.seed);
  const std::size_t width = reps->temporal.dim(1);

  const Tensor global = mds_project(reps->temporal);
  auto out = csv_stream();
  out << "merchant_id,label,cluster,x,y\n";
  for (std::size_t i = 0; i < test.size(); ++i) {
    out << test.ids[i] << ',' << test.labels[i] << ',' << km.assignment[i] << ',' << global.at(i, 0) << ','
        << global.at(i, 1) << '\n';
  }
  write_text(s.out / "projection_global.csv", out.str());

  for (std::size_t c = 0; c < s.clusters; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < test.size(); ++i)
      if (km.assignment[i] == c) members.push_back(i);
    Tensor coords({members.size(), 2}, 0.0);
    if (members.size() >= 2) {
      Tensor sub({members.size(), width});
      for (std::size_t m = 0; m < members.size(); ++m)
        for (std::size_t j = 0; j < width; ++j) sub[m * width + j] = reps->temporal.at(members[m], j);
      coords = mds_project(sub);
    }
    auto cl = csv_stream();
    cl << "merchant_id,label,x,y\n";
    for (std::size_t m = 0; m < members.size(); ++m) {
      cl << test.ids[members[m]] << ',' << test.labels[members[m]] << ',' << coords.at(m, 0) << ',' << coords.at(m, 1)
         << '\n';
    }
    write_text(s.out / ("projection_cluster_" + std::to_string(c) + ".csv"), cl.str());
  }
  std::cout << "projected " << test.size() << " merchants into " << s.clusters << " clusters\n";
  return 0;
}

// Exit codes: 0 success, 1 internal error, 2 usage/config/data error.
inline int run(int argc, const char* const* argv) {
  CLI::App app{"Merchant category identification: data generation, training and evaluation"};
  app.require_subcommand(1);
  Overrides o;
  auto add_common = [&o](CLI::App* cmd) {
    cmd->add_option("--config", o.config, "JSON config file");
    cmd->add_option("--seed", o.seed, "Seed for generation, initialization and shuffling");
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--model", o.model, "proposed|simple_concat|temporal_only|affinity_only|lr|1nn|random");
    cmd->add_option("--k-threshold", o.k_threshold, "Bad-actor rank threshold (detect; default: all)");
    cmd->add_option("--kbar", o.kbar, "Affinity sparsity cap; comma list for sweep");
    cmd->add_option("--folds", o.folds, "Folds to generate / repetitions to run");
    cmd->add_option("--dataset", o.dataset, "Dataset bundle directory");
    cmd->add_option("--checkpoint", o.checkpoint, "Checkpoint directory");
  };
  const std::vector<std::pair<const char*, const char*>> commands{
      {"generate", "Generate a synthetic dataset bundle"},
      {"crossval", "Cross-validate a model over the fold rotation"},
      {"train", "Train on one repetition and write a checkpoint"},
      {"evaluate", "Score a checkpoint on its test split"},
      {"detect", "Bad-actor detection curve from a checkpoint"},
      {"sweep", "Sparsity trade-off sweep over kbar"},
      {"project", "k-means and MDS analysis of learned representations"}};
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    subs.push_back(app.add_subcommand(name, help));
    add_common(subs.back());
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const std::string cmd = app.get_subcommands().front()->get_name();
    const json cfg = resolve_config(o, cmd);
    const Settings s = settings_from_json(cfg);
    if (o.k_threshold && *o.k_threshold == 0) throw UsageError("--k-threshold must lie in [1, c]");
    if (cmd == "generate") return command_generate(s, cfg);
    if (cmd == "crossval") return command_crossval(s, cfg);
    if (cmd == "train") return command_train(s, cfg);
    if (cmd == "evaluate") return command_evaluate(s, cfg);
    if (cmd == "detect") return command_detect(s, cfg);
    if (cmd == "sweep") return command_sweep(s, cfg);
    if (cmd == "project") return command_project(s, cfg);
    return 1;
  } catch (const FormatError& e) {
    std::cerr << "error: field '" << e.field() << "': " << e.what() << '\n';
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace mcid::cli
