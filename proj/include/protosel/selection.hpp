#pragma once

// Prototype selection: reference sets that are subsets of the training data.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "protosel/core.hpp"
#include "protosel/folds.hpp"
#include "protosel/nn.hpp"
#include "protosel/random.hpp"

namespace protosel {

inline constexpr double kDefaultSubsetCap = 1048576.0;  // 2^20

struct EditingParams {
  double lambda = 0.5;
  std::size_t T = 100;       // random candidates
  std::size_t k = 3;         // ENN neighbourhood
  std::uint64_t seed = 0;
  std::size_t cv_folds = 0;  // 0 = leave-one-out
  double cap = kDefaultSubsetCap;

  void validate() const {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidInput("lambda must lie in [0, 1]");
    if (T < 1) throw InvalidInput("T must be at least 1");
    if (k < 1) throw InvalidInput("k must be at least 1");
    if (cv_folds == 1) throw InvalidInput("cv_folds must be 0 (leave-one-out) or at least 2");
  }
};

namespace detail {

// Pairwise distances between rows of `a` and rows of `b`.
inline std::vector<std::vector<double>> distance_matrix(const Dataset& a, const Dataset& b, const Metric& metric) {
  std::vector<std::vector<double>> d(a.size(), std::vector<double>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) d[i][j] = distance(metric, a[i].features, b[j].features);
  }
  return d;
}

// 1-NN label of a query whose distances to the data are `row`, using only
// the `members` (reference order) whose entry in `allowed` is set.
// Returns nullopt when no member is allowed.
template <typename Allowed>
std::optional<Category> nearest_among(const std::vector<double>& row, std::span<const std::size_t> members,
                                      const Dataset& data, Allowed&& allowed) {
  std::optional<std::size_t> best;
  for (std::size_t j : members) {
    if (!allowed(j)) continue;
    if (!best || row[j] < row[*best] || (row[j] == row[*best] && data.label(j) < data.label(*best))) best = j;
  }
  if (!best) return std::nullopt;
  return data.label(*best);
}

inline void check_cap(const char* what, std::size_t n, double cap) {
  const double space = std::ldexp(1.0, static_cast<int>(std::min<std::size_t>(n, 1023)));
  if (space > cap || n >= 63) throw CapacityError(what, space, cap);
}

inline bool next_combination(std::vector<std::size_t>& comb, std::size_t n) {
  const std::size_t k = comb.size();
  for (std::size_t i = k; i-- > 0;) {
    if (comb[i] < n - k + i) {
      ++comb[i];
      for (std::size_t j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace detail

// Hart's condensed nearest neighbour. GRABBAG is shuffled, its first element
// seeds STORE, then each pass reshuffles GRABBAG and moves every point that
// the current STORE misclassifies (STORE grows immediately). Stops after a
// pass with no transfer. The result is consistent with `data` unless
// `data` has coincident points with conflicting labels.
inline ReferenceSet cnn(const Dataset& data, std::uint64_t seed, const Metric& metric = {}) {
  data.require_labelled("cnn");
  Rng rng(seed);
  std::vector<std::size_t> grabbag = rng.permutation(data.size());
  std::vector<std::size_t> store{grabbag.front()};
  grabbag.erase(grabbag.begin());

  std::vector<double> dist;
  bool transferred = true;
  while (transferred && !grabbag.empty()) {
    transferred = false;
    rng.shuffle(grabbag);
    std::vector<std::size_t> kept;
    for (std::size_t idx : grabbag) {
      dist.resize(store.size());
      for (std::size_t s = 0; s < store.size(); ++s) dist[s] = distance(metric, data[store[s]].features, data[idx].features);
      const Category got = detail::nearest_label(dist, [&](std::size_t s) { return data.label(store[s]); });
      if (got != data.label(idx)) {
        store.push_back(idx);
        transferred = true;
      } else {
        kept.push_back(idx);
      }
    }
    grabbag = std::move(kept);
  }
  return ReferenceSet::selected(data, std::move(store));
}

// Wilson's marks: true where the k-NN vote over X \ {x} disagrees with x's label.
inline std::vector<bool> enn_marks(const Dataset& data, std::size_t k, const Metric& metric = {}) {
  data.require_labelled("enn");
  if (k == 0) throw InvalidInput("enn: k must be positive");
  if (data.size() <= k) {
    throw InvalidInput("enn: need more than k=" + std::to_string(k) + " points, got " + std::to_string(data.size()));
  }
  std::vector<bool> marked(data.size(), false);
  std::vector<double> dist(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::vector<std::size_t> others;
    others.reserve(data.size() - 1);
    for (std::size_t j = 0; j < data.size(); ++j) {
      dist[j] = distance(metric, data[i].features, data[j].features);
      if (j != i) others.push_back(j);
    }
    const Category vote =
        detail::knn_vote(dist, std::move(others), k, data.n_categories(), [&](std::size_t j) { return data.label(j); });
    marked[i] = vote != data.label(i);
  }
  return marked;
}

// Wilson editing: all marks are computed on the unedited data, then deleted together.
inline ReferenceSet enn(const Dataset& data, std::size_t k = 3, const Metric& metric = {}) {
  const auto marked = enn_marks(data, k, metric);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!marked[i]) keep.push_back(i);
  }
  if (keep.empty()) {
    throw EmptyResult("enn: every point is misclassified by its " + std::to_string(k) +
                      " nearest neighbours; the data is irreducibly noisy at this k");
  }
  return ReferenceSet::selected(data, std::move(keep));
}

// ENN for border cleaning, then CNN on what survives. Source indices refer to `data`.
inline ReferenceSet hybrid_enn_cnn(const Dataset& data, std::size_t k, std::uint64_t seed, const Metric& metric = {}) {
  const ReferenceSet edited = enn(data, k, metric);
  const auto& kept = *edited.source_indices();
  const ReferenceSet condensed = cnn(data.subset(kept), seed, metric);
  std::vector<std::size_t> idx;
  for (std::size_t i : *condensed.source_indices()) idx.push_back(kept[i]);
  return ReferenceSet::selected(data, std::move(idx));
}

// J(S) = lambda * E(S) + (1 - lambda) * |S| / N
inline double criterion_j(double error, std::size_t size, std::size_t n, double lambda) {
  if (n == 0 || size > n) throw InvalidInput("criterion_j: need 0 < |S| <= N");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidInput("lambda must lie in [0, 1]");
  return lambda * error + (1.0 - lambda) * static_cast<double>(size) / static_cast<double>(n);
}

struct CandidateScore {
  std::vector<std::size_t> indices;  // ascending
  double error = 0.0;
  double criterion = 0.0;
};

struct RandomEditingResult {
  ReferenceSet best;
  std::size_t best_candidate = 0;
  std::vector<CandidateScore> candidates;
};

// Monte Carlo search over subsets: T candidates, each with a cardinality
// drawn uniformly from 1..N and then a uniform subset of that size. E(S) is
// the 1-NN error on `validation`; the first candidate with minimal J wins.
inline RandomEditingResult random_editing_search(const Dataset& train, const Dataset& validation,
                                                 const EditingParams& params, const Metric& metric = {}) {
  params.validate();
  train.require_labelled("random_editing (training set)");
  validation.require_labelled("random_editing (validation set)");
  if (validation.n_features() != train.n_features()) throw InvalidInput("validation set dimensionality differs");
  if (validation.categories() != train.categories()) throw InvalidInput("validation set categories differ");

  const auto d = detail::distance_matrix(validation, train, metric);
  const std::size_t n = train.size();
  Rng rng(params.seed);
  std::vector<CandidateScore> candidates;
  candidates.reserve(params.T);
  std::size_t best = 0;
  for (std::size_t t = 0; t < params.T; ++t) {
    CandidateScore c;
    c.indices = rng.sample(n, 1 + rng.uniform_index(n));
    std::sort(c.indices.begin(), c.indices.end());
    std::size_t wrong = 0;
    for (std::size_t v = 0; v < validation.size(); ++v) {
      if (*detail::nearest_among(d[v], c.indices, train, [](std::size_t) { return true; }) != validation.label(v)) {
        ++wrong;
      }
    }
    c.error = static_cast<double>(wrong) / static_cast<double>(validation.size());
    c.criterion = criterion_j(c.error, c.indices.size(), n, params.lambda);
    if (candidates.empty() || c.criterion < candidates[best].criterion) best = t;
    candidates.push_back(std::move(c));
  }
  auto refset = ReferenceSet::selected(train, candidates[best].indices);
  return {std::move(refset), best, std::move(candidates)};
}

inline ReferenceSet random_editing(const Dataset& train, const Dataset& validation, const EditingParams& params,
                                   const Metric& metric = {}) {
  return random_editing_search(train, validation, params, metric).best;
}

// Cross-validated 1-NN error of reference subset `members` (ascending
// indices into `data`): each point is classified by the members outside its
// own fold; no such member counts as an error.
inline double cross_validated_error(const Dataset& data, std::span<const std::size_t> members, const FoldPlan& plan,
                                    const Metric& metric = {}) {
  data.require_labelled("cross_validated_error");
  std::vector<std::size_t> fold_of(data.size());
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    for (std::size_t i : plan.folds[f]) fold_of[i] = f;
  }
  std::size_t wrong = 0;
  std::vector<double> row(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j : members) row[j] = distance(metric, data[i].features, data[j].features);
    const auto got = detail::nearest_among(row, members, data, [&](std::size_t j) { return fold_of[j] != fold_of[i]; });
    if (!got || *got != data.label(i)) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(data.size());
}

inline FoldPlan selection_folds(const Dataset& data, const EditingParams& params) {
  if (params.cv_folds == 0 || params.cv_folds >= data.size()) {
    if (data.size() < 2) {
      FoldPlan single;
      single.folds = {{0}};
      return single;
    }
    return make_folds(data, data.size(), params.seed);
  }
  return make_folds(data, params.cv_folds, params.seed);
}

struct ExhaustiveResult {
  ReferenceSet best;
  double error = 0.0;
  double criterion = 0.0;
  std::size_t evaluated = 0;
};

// Scores every non-empty subset (bitmask order) by J with a cross-validated
// E(S). Ties go to the smaller subset, then to the earlier mask.
inline ExhaustiveResult exhaustive_search(const Dataset& data, const EditingParams& params, const Metric& metric = {}) {
  params.validate();
  data.require_labelled("exhaustive_select");
  const std::size_t n = data.size();
  detail::check_cap("exhaustive_select", n, params.cap);

  const FoldPlan plan = selection_folds(data, params);
  std::vector<std::size_t> fold_of(n);
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    for (std::size_t i : plan.folds[f]) fold_of[i] = f;
  }
  const auto d = detail::distance_matrix(data, data, metric);

  std::uint64_t best_mask = 0;
  std::size_t best_size = 0;
  double best_j = std::numeric_limits<double>::infinity();
  double best_e = 0.0;
  std::vector<std::size_t> members;
  const std::uint64_t end = std::uint64_t{1} << n;
  for (std::uint64_t mask = 1; mask < end; ++mask) {
    members.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (mask >> j & 1U) members.push_back(j);
    }
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto got =
          detail::nearest_among(d[i], members, data, [&](std::size_t j) { return plan.folds.size() == 1 || fold_of[j] != fold_of[i]; });
      if (!got || *got != data.label(i)) ++wrong;
    }
    const double e = static_cast<double>(wrong) / static_cast<double>(n);
    const double j = criterion_j(e, members.size(), n, params.lambda);
    if (j < best_j || (j == best_j && members.size() < best_size)) {
      best_j = j;
      best_e = e;
      best_mask = mask;
      best_size = members.size();
    }
  }
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < n; ++j) {
    if (best_mask >> j & 1U) idx.push_back(j);
  }
  return {ReferenceSet::selected(data, std::move(idx)), best_e, best_j, static_cast<std::size_t>(end - 1)};
}

inline ReferenceSet exhaustive_select(const Dataset& data, const EditingParams& params, const Metric& metric = {}) {
  return exhaustive_search(data, params, metric).best;
}

// Exact minimum-cardinality consistent subset: sizes 1..N in turn,
// combinations in lexicographic order, first consistent one returned.
inline ReferenceSet minimal_consistent_oracle(const Dataset& data, double cap = kDefaultSubsetCap,
                                              const Metric& metric = {}) {
  data.require_labelled("minimal_consistent_oracle");
  const std::size_t n = data.size();
  detail::check_cap("minimal_consistent_oracle", n, cap);
  const auto d = detail::distance_matrix(data, data, metric);
  const auto consistent = [&](const std::vector<std::size_t>& members) {
    for (std::size_t i = 0; i < n; ++i) {
      if (*detail::nearest_among(d[i], members, data, [](std::size_t) { return true; }) != data.label(i)) return false;
    }
    return true;
  };
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (!consistent(all)) {
    throw Infeasible("minimal_consistent_oracle: no consistent subset exists (coincident points carry different labels)");
  }
  for (std::size_t size = 1; size <= n; ++size) {
    std::vector<std::size_t> comb(size);
    std::iota(comb.begin(), comb.end(), std::size_t{0});
    do {
      if (consistent(comb)) return ReferenceSet::selected(data, comb);
    } while (detail::next_combination(comb, n));
  }
  return ReferenceSet::selected(data, all);
}

}  // namespace protosel
