#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mcid/sparse_affinity.hpp"
#include "mcid/synthdata/world.hpp"

namespace mcid {

// Shared-customer affinity of every merchant (0..num_merchants-1) against the
// ordered reference list `train_ids`. Entry j of merchant m counts distinct
// customers who transacted with both m and train_ids[j]; the self pair is 0.
inline std::vector<AffinityVector> build_affinity(const TransactionLog& log, std::size_t num_merchants,
                                                  std::span<const std::size_t> train_ids) {
  std::vector<std::ptrdiff_t> train_pos(num_merchants, -1);
  for (std::size_t j = 0; j < train_ids.size(); ++j) {
    if (train_ids[j] >= num_merchants) throw DimensionError("build_affinity: train id out of range");
    if (train_pos[train_ids[j]] >= 0) {
      throw UsageError("build_affinity: duplicate train id " + std::to_string(train_ids[j]));
    }
    train_pos[train_ids[j]] = static_cast<std::ptrdiff_t>(j);
  }

  // Distinct (merchant, customer) pairs, then both adjacency directions.
  std::vector<std::pair<std::int64_t, std::size_t>> pairs;
  pairs.reserve(log.size());
  for (const auto& t : log) {
    if (t.merchant < 0 || static_cast<std::size_t>(t.merchant) >= num_merchants) continue;
    pairs.emplace_back(t.customer, static_cast<std::size_t>(t.merchant));
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  std::vector<std::vector<std::size_t>> customer_merchants;  // per distinct customer
  std::vector<std::vector<std::size_t>> merchant_customers(num_merchants);
  for (std::size_t i = 0; i < pairs.size();) {
    const std::size_t cust = customer_merchants.size();
    customer_merchants.emplace_back();
    const std::int64_t id = pairs[i].first;
    for (; i < pairs.size() && pairs[i].first == id; ++i) {
      customer_merchants.back().push_back(pairs[i].second);
      merchant_customers[pairs[i].second].push_back(cust);
    }
  }

  std::vector<AffinityVector> out;
  out.reserve(num_merchants);
  std::vector<std::int64_t> scratch(train_ids.size(), 0);
  std::vector<std::size_t> touched;
  for (std::size_t m = 0; m < num_merchants; ++m) {
    touched.clear();
    for (std::size_t cust : merchant_customers[m]) {
      for (std::size_t other : customer_merchants[cust]) {
        const std::ptrdiff_t j = train_pos[other];
        if (j < 0 || other == m) continue;
        if (scratch[static_cast<std::size_t>(j)]++ == 0) touched.push_back(static_cast<std::size_t>(j));
      }
    }
    std::sort(touched.begin(), touched.end());
    std::vector<AffinityVector::Entry> entries;
    entries.reserve(touched.size());
    for (std::size_t j : touched) {
      entries.push_back({j, scratch[j]});
      scratch[j] = 0;
    }
    out.emplace_back(train_ids.size(), std::move(entries));
  }
  return out;
}

// Restricts affinity vectors indexed by merchant id to the columns of
// `train_ids`, re-indexed to positions in that list.
inline std::vector<AffinityVector> restrict_affinity(std::span<const AffinityVector> full,
                                                     std::span<const std::size_t> train_ids) {
  std::size_t width = 0;
  for (const auto& v : full) width = std::max(width, v.length());
  std::vector<std::ptrdiff_t> position(width, -1);
  for (std::size_t j = 0; j < train_ids.size(); ++j) {
    if (train_ids[j] >= width) throw DimensionError("restrict_affinity: train id outside affinity length");
    position[train_ids[j]] = static_cast<std::ptrdiff_t>(j);
  }
  std::vector<AffinityVector> out;
  out.reserve(full.size());
  for (const auto& v : full) {
    std::vector<AffinityVector::Entry> entries;
    for (const auto& e : v.entries()) {
      if (position[e.index] >= 0) entries.push_back({static_cast<std::size_t>(position[e.index]), e.count});
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
    out.emplace_back(train_ids.size(), std::move(entries));
  }
  return out;
}

}  // namespace mcid
