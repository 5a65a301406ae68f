#pragma once

// Nearest-neighbour classification over a reference set.
//
// Tie rules, used everywhere:
//   1-NN  equal distances resolve to the lowest category index, then to the
//         lowest reference position.
//   k-NN  the k nearest are taken by (distance, position); the vote goes to
//         the lowest category index among equally supported labels.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "protosel/core.hpp"

namespace protosel {

enum class Provenance { selected, generated, mixed };

inline std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::selected: return "selected";
    case Provenance::generated: return "generated";
    case Provenance::mixed: return "mixed";
  }
  return "?";
}

inline Provenance parse_provenance(std::string_view s) {
  if (s == "selected") return Provenance::selected;
  if (s == "generated") return Provenance::generated;
  if (s == "mixed") return Provenance::mixed;
  throw InvalidInput("unknown provenance '" + std::string(s) + "'");
}

// Per-category probabilities ordered like the category list.
using ProbabilityVector = std::vector<double>;

class ReferenceSet {
public:
  ReferenceSet(std::vector<LabeledPoint> points, std::vector<std::string> categories, Provenance provenance,
               std::optional<std::vector<std::size_t>> source_indices = std::nullopt)
      : points_(std::move(points)),
        categories_(std::move(categories)),
        provenance_(provenance),
        source_indices_(std::move(source_indices)) {
    if (points_.empty()) throw InvalidInput("reference set must not be empty");
    if (categories_.empty()) throw InvalidInput("reference set needs a category list");
    n_features_ = points_.front().features.size();
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const auto& p = points_[i];
      if (!p.label) throw InvalidInput("reference point " + std::to_string(i) + " has no label");
      if (*p.label >= categories_.size()) throw InvalidInput("reference point label outside the category set");
      if (p.features.size() != n_features_) throw InvalidInput("reference points differ in dimensionality");
      for (double v : p.features) {
        if (!std::isfinite(v)) throw InvalidInput("reference point has a non-finite coordinate");
      }
    }
    if (provenance_ == Provenance::selected && !source_indices_) {
      throw InvalidInput("selected reference set needs source indices");
    }
    if (source_indices_ && source_indices_->size() != points_.size()) {
      throw InvalidInput("source index count does not match point count");
    }
  }

  // Points of `data` at `indices`, in that order.
  static ReferenceSet selected(const Dataset& data, std::vector<std::size_t> indices) {
    std::vector<LabeledPoint> pts;
    pts.reserve(indices.size());
    for (std::size_t i : indices) {
      if (i >= data.size()) throw InvalidInput("source index out of range");
      pts.push_back(data[i]);
    }
    return ReferenceSet(std::move(pts), data.categories(), Provenance::selected, std::move(indices));
  }

  std::size_t size() const noexcept { return points_.size(); }
  std::size_t n_features() const noexcept { return n_features_; }
  const std::vector<LabeledPoint>& points() const noexcept { return points_; }
  const LabeledPoint& operator[](std::size_t i) const { return points_[i]; }
  Category label(std::size_t i) const { return *points_[i].label; }
  const std::vector<std::string>& categories() const noexcept { return categories_; }
  Provenance provenance() const noexcept { return provenance_; }
  const std::optional<std::vector<std::size_t>>& source_indices() const noexcept { return source_indices_; }

  // The selected points must match `data` at their source indices.
  bool matches_source(const Dataset& data) const {
    if (!source_indices_) return false;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const std::size_t s = (*source_indices_)[i];
      if (s >= data.size() || data[s] != points_[i]) return false;
    }
    return true;
  }

  bool operator==(const ReferenceSet&) const = default;

private:
  std::vector<LabeledPoint> points_;
  std::vector<std::string> categories_;
  Provenance provenance_;
  std::optional<std::vector<std::size_t>> source_indices_;
  std::size_t n_features_ = 0;
};

namespace detail {

inline void check_query(const ReferenceSet& refset, std::span<const double> query) {
  if (query.size() != refset.n_features()) {
    throw InvalidInput("query has " + std::to_string(query.size()) + " features, reference set has " +
                       std::to_string(refset.n_features()));
  }
}

// Position of the 1-NN winner given per-reference distances and labels.
template <typename LabelAt>
std::size_t nearest_position(std::span<const double> dist, LabelAt&& label_at) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < dist.size(); ++i) {
    if (dist[i] < dist[best] || (dist[i] == dist[best] && label_at(i) < label_at(best))) best = i;
  }
  return best;
}

template <typename LabelAt>
Category nearest_label(std::span<const double> dist, LabelAt&& label_at) {
  return label_at(nearest_position(dist, label_at));
}

// Majority label over the k nearest by (distance, position). Positions in
// `candidates` must be ascending so stable ordering keeps the position rule.
template <typename LabelAt>
Category knn_vote(std::span<const double> dist, std::vector<std::size_t> candidates, std::size_t k,
                  std::size_t n_categories, LabelAt&& label_at) {
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k), candidates.end(),
                    [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); });
  std::vector<std::size_t> votes(n_categories, 0);
  for (std::size_t j = 0; j < k; ++j) ++votes[label_at(candidates[j])];
  return majority(votes);
}

}  // namespace detail

inline std::vector<double> distances_to(const ReferenceSet& refset, const Metric& metric,
                                        std::span<const double> query) {
  detail::check_query(refset, query);
  std::vector<double> dist(refset.size());
  for (std::size_t i = 0; i < refset.size(); ++i) dist[i] = distance(metric, refset[i].features, query);
  return dist;
}

inline Category classify_1nn(const ReferenceSet& refset, const Metric& metric, std::span<const double> query) {
  if (refset.size() == 0) throw InvalidState("classify_1nn: empty reference set");
  const auto dist = distances_to(refset, metric, query);
  return detail::nearest_label(dist, [&](std::size_t i) { return refset.label(i); });
}

inline Category classify_knn(const ReferenceSet& refset, const Metric& metric, std::span<const double> query,
                             std::size_t k) {
  if (k == 0 || k > refset.size()) {
    throw InvalidInput("classify_knn: k=" + std::to_string(k) + " must lie in [1, " + std::to_string(refset.size()) +
                       "]");
  }
  const auto dist = distances_to(refset, metric, query);
  std::vector<std::size_t> candidates(refset.size());
  std::iota(candidates.begin(), candidates.end(), std::size_t{0});
  return detail::knn_vote(dist, std::move(candidates), k, refset.categories().size(),
                          [&](std::size_t i) { return refset.label(i); });
}

inline std::size_t count_correct(const ReferenceSet& refset, const Dataset& data, const Metric& metric = {}) {
  data.require_labelled("training_accuracy");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (classify_1nn(refset, metric, data[i].features) == data.label(i)) ++correct;
  }
  return correct;
}

// Fraction of `data` that 1-NN over `refset` labels correctly.
inline double training_accuracy(const ReferenceSet& refset, const Dataset& data, const Metric& metric = {}) {
  return static_cast<double>(count_correct(refset, data, metric)) / static_cast<double>(data.size());
}

inline bool is_consistent(const ReferenceSet& refset, const Dataset& data, const Metric& metric = {}) {
  return count_correct(refset, data, metric) == data.size();
}

// Summed-similarity ratio: P(c|q) = sum of similarities of c's members over
// the sum for all of S. Similarities are shifted by the nearest distance so
// large gamma * d does not underflow the denominator.
inline ProbabilityVector predict_proportions(const ReferenceSet& refset, const Metric& metric,
                                             const SimilarityParams& params, std::span<const double> query) {
  params.validate();
  const auto dist = distances_to(refset, metric, query);
  const double nearest = *std::min_element(dist.begin(), dist.end());
  ProbabilityVector prob(refset.categories().size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double s = similarity(dist[i] - nearest, params);
    prob[refset.label(i)] += s;
    total += s;
  }
  for (double& p : prob) p /= total;
  return prob;
}

}  // namespace protosel
