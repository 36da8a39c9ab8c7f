#pragma once

#include <algorithm>
#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "mcid/numerics/tensor.hpp"
#include "mcid/synthdata/world.hpp"

namespace mcid {

inline constexpr std::size_t kNumFeatures = 10;

// Column order of every merchant time series.
inline constexpr std::array<std::string_view, kNumFeatures> kFeatureNames{
    "numApprTrans", "numDeclTrans", "numApprCards", "numDeclCards", "amtApprTrans",
    "amtDeclTrans", "rateTxnAppr",  "rateTxnDecl",  "avgAmtAppr",   "avgAmtDecl"};

namespace detail {

// Fills one day's row from that day's transactions. Quiet days stay all zero.
inline void day_features(std::span<const Transaction* const> txns, std::span<double> row,
                         std::vector<std::int64_t>& approved_cards, std::vector<std::int64_t>& declined_cards) {
  approved_cards.clear();
  declined_cards.clear();
  double n_appr = 0, n_decl = 0, amt_appr = 0, amt_decl = 0;
  for (const Transaction* t : txns) {
    if (t->approved) {
      n_appr += 1;
      amt_appr += t->amount;
      approved_cards.push_back(t->customer);
    } else {
      n_decl += 1;
      amt_decl += t->amount;
      declined_cards.push_back(t->customer);
    }
  }
  auto distinct = [](std::vector<std::int64_t>& v) {
    std::sort(v.begin(), v.end());
    return static_cast<double>(std::unique(v.begin(), v.end()) - v.begin());
  };
  const double total = n_appr + n_decl;
  row[0] = n_appr;
  row[1] = n_decl;
  row[2] = distinct(approved_cards);
  row[3] = distinct(declined_cards);
  row[4] = amt_appr;
  row[5] = amt_decl;
  row[6] = total > 0 ? n_appr / total : 0.0;
  row[7] = total > 0 ? n_decl / total : 0.0;
  row[8] = n_appr > 0 ? amt_appr / n_appr : 0.0;
  row[9] = n_decl > 0 ? amt_decl / n_decl : 0.0;
}

}  // namespace detail

// Daily (non-overlapping 24h window) features of one merchant: an (n, 10) tensor.
// Transactions outside [0, days) are ignored.
inline Tensor extract_features(const TransactionLog& log, std::int32_t merchant, std::size_t days) {
  std::vector<std::vector<const Transaction*>> by_day(days);
  for (const auto& t : log) {
    if (t.merchant == merchant && t.day >= 0 && static_cast<std::size_t>(t.day) < days) {
      by_day[static_cast<std::size_t>(t.day)].push_back(&t);
    }
  }
  Tensor series({days, kNumFeatures}, 0.0);
  std::vector<std::int64_t> appr, decl;
  for (std::size_t d = 0; d < days; ++d) {
    detail::day_features(by_day[d], std::span<double>(series.data() + d * kNumFeatures, kNumFeatures), appr, decl);
  }
  return series;
}

// Features of every merchant in one pass: (num_merchants, n, 10) values, row-major.
inline std::vector<double> extract_all_features(const TransactionLog& log, std::size_t num_merchants, std::size_t days) {
  std::vector<std::size_t> offsets(num_merchants * days + 1, 0);
  auto slot = [&](const Transaction& t) -> std::ptrdiff_t {
    if (t.merchant < 0 || static_cast<std::size_t>(t.merchant) >= num_merchants) return -1;
    if (t.day < 0 || static_cast<std::size_t>(t.day) >= days) return -1;
    return static_cast<std::ptrdiff_t>(static_cast<std::size_t>(t.merchant) * days + static_cast<std::size_t>(t.day));
  };
  for (const auto& t : log) {
    if (auto s = slot(t); s >= 0) ++offsets[static_cast<std::size_t>(s) + 1];
  }
  for (std::size_t i = 1; i < offsets.size(); ++i) offsets[i] += offsets[i - 1];
  std::vector<const Transaction*> grouped(offsets.back());
  {
    std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
    for (const auto& t : log) {
      if (auto s = slot(t); s >= 0) grouped[cursor[static_cast<std::size_t>(s)]++] = &t;
    }
  }
  std::vector<double> out(num_merchants * days * kNumFeatures, 0.0);
  std::vector<std::int64_t> appr, decl;
  for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
    std::span<const Transaction* const> txns(grouped.data() + offsets[s], offsets[s + 1] - offsets[s]);
    detail::day_features(txns, std::span<double>(out.data() + s * kNumFeatures, kNumFeatures), appr, decl);
  }
  return out;
}

}  // namespace mcid
