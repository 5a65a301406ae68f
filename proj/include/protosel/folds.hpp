#pragma once

// Train/test partitions of a dataset's indices.
//
// Folds: seeded shuffle, then contiguous chunking. When every category that
// occurs has at least `folds` members the shuffle and chunking happen per
// category (stratified); otherwise over all indices.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "protosel/core.hpp"
#include "protosel/random.hpp"

namespace protosel {

struct FoldPlan {
  std::vector<std::vector<std::size_t>> folds;  // each ascending
  bool stratified = false;
};

struct Split {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

namespace detail {

inline void chunk_into(const std::vector<std::size_t>& order, std::size_t folds,
                       std::vector<std::vector<std::size_t>>& out) {
  const std::size_t m = order.size();
  for (std::size_t f = 0; f < folds; ++f) {
    for (std::size_t j = f * m / folds; j < (f + 1) * m / folds; ++j) out[f].push_back(order[j]);
  }
}

// Stratification is possible when every occurring category has >= `need` members.
inline bool can_stratify(const Dataset& data, std::size_t need) {
  if (!data.all_labelled()) return false;
  for (std::size_t count : data.category_counts()) {
    if (count != 0 && count < need) return false;
  }
  return true;
}

}  // namespace detail

inline FoldPlan make_folds(const Dataset& data, std::size_t folds, std::uint64_t seed) {
  const std::size_t n = data.size();
  if (folds < 2 || folds > n) {
    throw InvalidInput("fold count " + std::to_string(folds) + " must lie in [2, N=" + std::to_string(n) + "]");
  }
  FoldPlan plan;
  plan.folds.resize(folds);
  if (folds == n) {
    for (std::size_t i = 0; i < n; ++i) plan.folds[i].push_back(i);
    return plan;
  }
  Rng rng(seed);
  if (detail::can_stratify(data, folds)) {
    plan.stratified = true;
    for (Category c = 0; c < data.n_categories(); ++c) {
      auto members = data.indices_of(c);
      rng.shuffle(members);
      detail::chunk_into(members, folds, plan.folds);
    }
  } else {
    detail::chunk_into(rng.permutation(n), folds, plan.folds);
  }
  for (auto& f : plan.folds) std::sort(f.begin(), f.end());
  return plan;
}

inline Split complement_split(std::size_t n, const std::vector<std::size_t>& test) {
  Split s;
  s.test = test;
  std::vector<char> in_test(n, 0);
  for (std::size_t i : test) in_test[i] = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_test[i]) s.train.push_back(i);
  }
  return s;
}

// Test share round(fraction * size), kept within [1, size - 1], per category
// when each occurring category has at least two members.
inline Split make_holdout(const Dataset& data, double fraction, std::uint64_t seed, bool* stratified = nullptr) {
  const std::size_t n = data.size();
  if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidInput("holdout fraction must lie in (0, 1)");
  if (n < 2) throw InvalidInput("holdout needs at least two points");
  const auto take = [fraction](std::size_t m) {
    const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(m)));
    return std::clamp<std::size_t>(k, 1, m - 1);
  };
  Rng rng(seed);
  std::vector<std::size_t> test;
  const bool strat = detail::can_stratify(data, 2);
  if (strat) {
    for (Category c = 0; c < data.n_categories(); ++c) {
      auto members = data.indices_of(c);
      if (members.empty()) continue;
      rng.shuffle(members);
      test.insert(test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take(members.size())));
    }
  } else {
    auto order = rng.permutation(n);
    test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take(n)));
  }
  std::sort(test.begin(), test.end());
  if (stratified) *stratified = strat;
  return complement_split(n, test);
}

}  // namespace protosel
