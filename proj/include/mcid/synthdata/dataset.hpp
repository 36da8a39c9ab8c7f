#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "mcid/eval/folds.hpp"
#include "mcid/synthdata/affinity_builder.hpp"
#include "mcid/synthdata/bundle.hpp"
#include "mcid/synthdata/features.hpp"
#include "mcid/synthdata/world.hpp"

namespace mcid {

// Generates a world and packages it: features, all-merchant affinity,
// reported labels and a stratified fold assignment.
inline DatasetBundle make_bundle(WorldConfig config, std::size_t num_folds = 5) {
  validate(config);
  if (config.categories.empty()) config.categories = default_patterns(config.num_categories, config.seed);
  const World world = generate_world(config);

  DatasetBundle b;
  b.num_merchants = config.num_merchants;
  b.days = config.days;
  b.features = kNumFeatures;
  b.categories = config.num_categories;
  b.feature_names.assign(kFeatureNames.begin(), kFeatureNames.end());
  for (const auto& p : config.categories) b.category_names.push_back(p.name);
  b.series = extract_all_features(world.log, config.num_merchants, config.days);
  std::vector<std::size_t> everyone(config.num_merchants);
  std::iota(everyone.begin(), everyone.end(), std::size_t{0});
  b.affinity = build_affinity(world.log, config.num_merchants, everyone);
  b.labels = world.labels();
  b.num_folds = num_folds;
  b.fold_seed = config.seed;
  b.folds = stratified_kfold(b.labels, num_folds, config.seed);
  b.generator = config;
  return b;
}

}  // namespace mcid
