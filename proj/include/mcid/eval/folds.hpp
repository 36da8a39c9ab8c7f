#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mcid/errors.hpp"

namespace mcid {

// Assigns each item a fold in [0, k). Members of each category are shuffled
// with `seed`, then dealt round-robin by one counter that runs across all
// categories in index order: per-category fold counts differ by at most one
// and the first (N mod k) folds receive the extra items.
inline std::vector<std::size_t> stratified_kfold(std::span<const std::size_t> labels, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw UsageError("stratified_kfold: k must be positive");
  std::size_t categories = 0;
  for (auto l : labels) categories = std::max(categories, l + 1);
  std::vector<std::vector<std::size_t>> members(categories);
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> folds(labels.size(), 0);
  std::size_t counter = 0;
  for (std::size_t c = 0; c < categories; ++c) {
    auto& group = members[c];
    if (group.empty()) continue;
    if (group.size() < k) {
      throw UsageError("stratified_kfold: category " + std::to_string(c) + " has " + std::to_string(group.size()) +
                       " members, fewer than " + std::to_string(k) + " folds");
    }
    std::shuffle(group.begin(), group.end(), rng);
    for (std::size_t idx : group) folds[idx] = counter++ % k;
  }
  return folds;
}

// Roles of the folds in one cross-validation repetition: test = r,
// validation = r + 1 (mod k), training = the rest.
struct FoldRoles {
  std::size_t test;
  std::size_t validation;
};

inline FoldRoles fold_roles(std::size_t repetition, std::size_t k) {
  if (k < 3) throw UsageError("fold_roles: need at least 3 folds");
  return {repetition % k, (repetition + 1) % k};
}

struct SplitIndices {
  std::vector<std::size_t> train, validation, test;
};

inline SplitIndices split_by_roles(std::span<const std::size_t> folds, FoldRoles roles) {
  SplitIndices s;
  for (std::size_t i = 0; i < folds.size(); ++i) {
    if (folds[i] == roles.test) {
      s.test.push_back(i);
    } else if (folds[i] == roles.validation) {
      s.validation.push_back(i);
    } else {
      s.train.push_back(i);
    }
  }
  return s;
}

}  // namespace mcid
