#pragma once

// Points, labelled datasets, distances and similarities.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "protosel/error.hpp"

namespace protosel {

using Point = std::vector<double>;

// Index into a dataset's ordered category list.
using Category = std::size_t;

struct LabeledPoint {
  Point features;
  std::optional<Category> label;  // absent for transfer stimuli

  bool operator==(const LabeledPoint&) const = default;
};

class Dataset {
public:
  Dataset(std::vector<LabeledPoint> points, std::vector<std::string> categories,
          std::vector<std::string> feature_names = {})
      : points_(std::move(points)),
        categories_(std::move(categories)),
        feature_names_(std::move(feature_names)) {
    if (points_.empty()) throw InvalidInput("dataset must contain at least one point");
    if (categories_.empty()) throw InvalidInput("dataset must declare at least one category");
    n_features_ = points_.front().features.size();
    if (n_features_ == 0) throw InvalidInput("points must have at least one feature");
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const auto& p = points_[i];
      if (p.features.size() != n_features_) {
        throw InvalidInput("point " + std::to_string(i) + " has " + std::to_string(p.features.size()) +
                           " features, expected " + std::to_string(n_features_));
      }
      for (double v : p.features) {
        if (!std::isfinite(v)) throw InvalidInput("point " + std::to_string(i) + " has a non-finite coordinate");
      }
      if (p.label && *p.label >= categories_.size()) {
        throw InvalidInput("point " + std::to_string(i) + " has label index outside the category set");
      }
    }
    if (feature_names_.empty()) {
      for (std::size_t j = 0; j < n_features_; ++j) feature_names_.push_back("x" + std::to_string(j + 1));
    } else if (feature_names_.size() != n_features_) {
      throw InvalidInput("feature name count does not match dimensionality");
    }
  }

  std::size_t size() const noexcept { return points_.size(); }
  std::size_t n_features() const noexcept { return n_features_; }
  std::size_t n_categories() const noexcept { return categories_.size(); }

  const std::vector<LabeledPoint>& points() const noexcept { return points_; }
  const LabeledPoint& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<std::string>& categories() const noexcept { return categories_; }
  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }

  // Label of point i; the caller has established that it is present.
  Category label(std::size_t i) const { return *points_[i].label; }

  std::optional<Category> find_category(std::string_view name) const {
    for (std::size_t c = 0; c < categories_.size(); ++c) {
      if (categories_[c] == name) return c;
    }
    return std::nullopt;
  }

  bool all_labelled() const {
    for (const auto& p : points_) {
      if (!p.label) return false;
    }
    return true;
  }

  void require_labelled(std::string_view context) const {
    if (!all_labelled()) throw InvalidInput(std::string(context) + ": every point needs a category label");
  }

  std::vector<std::size_t> category_counts() const {
    std::vector<std::size_t> counts(categories_.size(), 0);
    for (const auto& p : points_) {
      if (p.label) ++counts[*p.label];
    }
    return counts;
  }

  std::vector<std::size_t> indices_of(Category c) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (points_[i].label == c) idx.push_back(i);
    }
    return idx;
  }

  // Same categories and feature names, points taken in the given order.
  Dataset subset(std::span<const std::size_t> indices) const {
    std::vector<LabeledPoint> pts;
    pts.reserve(indices.size());
    for (std::size_t i : indices) pts.push_back(points_.at(i));
    return Dataset(std::move(pts), categories_, feature_names_);
  }

  bool operator==(const Dataset&) const = default;

private:
  std::vector<LabeledPoint> points_;
  std::vector<std::string> categories_;
  std::vector<std::string> feature_names_;
  std::size_t n_features_ = 0;
};

enum class MetricKind { euclidean, hamming, minkowski };

inline std::string_view to_string(MetricKind k) {
  switch (k) {
    case MetricKind::euclidean: return "euclidean";
    case MetricKind::hamming: return "hamming";
    case MetricKind::minkowski: return "minkowski";
  }
  return "?";
}

inline MetricKind parse_metric_kind(std::string_view s) {
  if (s == "euclidean") return MetricKind::euclidean;
  if (s == "hamming") return MetricKind::hamming;
  if (s == "minkowski") return MetricKind::minkowski;
  throw InvalidInput("unknown metric '" + std::string(s) + "' (expected euclidean, hamming or minkowski)");
}

// Distance over R^n. Weights, when given, scale each dimension's contribution
// (squared difference for euclidean, |diff|^p for minkowski, mismatch for
// hamming); an empty weight vector means all ones.
struct Metric {
  MetricKind kind = MetricKind::euclidean;
  double p = 2.0;
  std::vector<double> weights;

  static Metric euclidean(std::vector<double> w = {}) { return {MetricKind::euclidean, 2.0, std::move(w)}; }
  static Metric hamming(std::vector<double> w = {}) { return {MetricKind::hamming, 1.0, std::move(w)}; }
  static Metric minkowski(double p, std::vector<double> w = {}) { return {MetricKind::minkowski, p, std::move(w)}; }

  void validate() const {
    if (kind == MetricKind::minkowski && !(p >= 1.0 && std::isfinite(p))) {
      throw InvalidInput("minkowski exponent must be a finite real >= 1");
    }
    if (!weights.empty()) {
      bool any_positive = false;
      for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidInput("metric weights must be finite and non-negative");
        any_positive = any_positive || w > 0.0;
      }
      if (!any_positive) throw InvalidInput("metric weights need at least one positive entry");
    }
  }

  bool operator==(const Metric&) const = default;
};

inline double distance(const Metric& metric, std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw InvalidInput("distance: dimensionality mismatch (" + std::to_string(a.size()) + " vs " +
                       std::to_string(b.size()) + ")");
  }
  const bool weighted = !metric.weights.empty();
  if (weighted && metric.weights.size() != a.size()) {
    throw InvalidInput("distance: metric has " + std::to_string(metric.weights.size()) + " weights for " +
                       std::to_string(a.size()) + "-dimensional points");
  }
  double acc = 0.0;
  switch (metric.kind) {
    case MetricKind::euclidean:
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += (weighted ? metric.weights[i] : 1.0) * d * d;
      }
      return std::sqrt(acc);
    case MetricKind::hamming:
      for (std::size_t i = 0; i < a.size(); ++i) {
        if ((a[i] != 0.0 && a[i] != 1.0) || (b[i] != 0.0 && b[i] != 1.0)) {
          throw InvalidInput("hamming distance needs 0/1 coordinates");
        }
        if (a[i] != b[i]) acc += weighted ? metric.weights[i] : 1.0;
      }
      return acc;
    case MetricKind::minkowski:
      if (metric.p < 1.0) throw InvalidInput("minkowski exponent must be >= 1");
      for (std::size_t i = 0; i < a.size(); ++i) {
        acc += (weighted ? metric.weights[i] : 1.0) * std::pow(std::abs(a[i] - b[i]), metric.p);
      }
      return std::pow(acc, 1.0 / metric.p);
  }
  return acc;
}

struct SimilarityParams {
  double gamma = 1.0;

  void validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidInput("similarity gamma must be a positive real");
  }
};

// exp(-gamma * d): 1 at d = 0, strictly decreasing in d and in gamma.
inline double similarity(double d, const SimilarityParams& params) {
  if (!(d >= 0.0)) throw InvalidInput("similarity: distance must be non-negative");
  return std::exp(-params.gamma * d);
}

// Arithmetic mean, accumulated in the given order.
inline Point centroid(std::span<const Point* const> members) {
  if (members.empty()) throw InvalidInput("centroid of an empty set");
  Point sum(members.front()->size(), 0.0);
  for (const Point* p : members) {
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += (*p)[j];
  }
  const double n = static_cast<double>(members.size());
  for (double& v : sum) v /= n;
  return sum;
}

inline Point centroid_of(const Dataset& data, std::span<const std::size_t> indices) {
  std::vector<const Point*> members;
  members.reserve(indices.size());
  for (std::size_t i : indices) members.push_back(&data[i].features);
  return centroid(members);
}

// Lowest index among the maxima of counts.
inline Category majority(std::span<const std::size_t> counts) {
  Category best = 0;
  for (Category c = 1; c < counts.size(); ++c) {
    if (counts[c] > counts[best]) best = c;
  }
  return best;
}

}  // namespace protosel
