#pragma once

// Prototype replacement: reference points that need not belong to the data.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "protosel/core.hpp"
#include "protosel/nn.hpp"
#include "protosel/random.hpp"

namespace protosel {

struct ClusteringParams {
  std::size_t k = 2;
  std::size_t max_iter = 100;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  double variance_floor = 1e-6;

  void validate() const {
    if (k < 1) throw InvalidInput("cluster count k must be at least 1");
    if (max_iter < 1) throw InvalidInput("max_iter must be at least 1");
    if (!(tol > 0.0)) throw InvalidInput("tol must be positive");
    if (!(variance_floor > 0.0)) throw InvalidInput("variance_floor must be positive");
  }
};

struct LvqParams {
  std::size_t prototypes_per_category = 1;
  double alpha0 = 0.3;
  std::size_t epochs = 20;
  std::uint64_t seed = 0;

  // alpha0 = 0 is accepted and leaves the prototypes where they started.
  void validate() const {
    if (prototypes_per_category < 1) throw InvalidInput("prototypes_per_category must be at least 1");
    if (!(alpha0 >= 0.0 && alpha0 <= 1.0)) throw InvalidInput("alpha0 must lie in (0, 1]");
    if (epochs < 1) throw InvalidInput("epochs must be at least 1");
  }
};

struct KMeansResult {
  std::vector<Point> centroids;
  std::vector<std::size_t> assignment;  // per input point
  std::vector<double> objective;        // sum of squared distances after each assignment step
  std::size_t iterations = 0;
  bool converged = false;
};

namespace detail {

inline std::size_t count_distinct(std::span<const Point> points) {
  std::vector<Point> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end());
  return static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

inline double euclidean_shift(const Point& a, const Point& b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) acc += (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(acc);
}

// Assigns each point to its nearest centroid (lowest index on ties); returns
// the objective and fills the per-point distance to the chosen centroid.
inline double assign_points(std::span<const Point> points, const std::vector<Point>& centroids, const Metric& metric,
                            std::vector<std::size_t>& assignment, std::vector<double>& dist_to_own) {
  double objective = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::size_t best = 0;
    double best_d = distance(metric, points[i], centroids[0]);
    for (std::size_t c = 1; c < centroids.size(); ++c) {
      const double d = distance(metric, points[i], centroids[c]);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    assignment[i] = best;
    dist_to_own[i] = best_d;
    objective += best_d * best_d;
  }
  return objective;
}

inline std::vector<Point> features_of(const Dataset& data, std::span<const std::size_t> indices) {
  std::vector<Point> pts;
  pts.reserve(indices.size());
  for (std::size_t i : indices) pts.push_back(data[i].features);
  return pts;
}

inline std::vector<Point> features_of(const Dataset& data) {
  std::vector<Point> pts;
  pts.reserve(data.size());
  for (const auto& p : data.points()) pts.push_back(p.features);
  return pts;
}

// Label of the data point nearest to `where`, for clusters that ended up empty.
inline Category nearest_point_label(const Dataset& data, const Point& where, const Metric& metric) {
  std::vector<double> d(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) d[i] = distance(metric, data[i].features, where);
  return nearest_label(d, [&](std::size_t i) { return data.label(i); });
}

// Clusters labelled by the majority category of their members.
inline ReferenceSet label_by_majority(const Dataset& data, const std::vector<Point>& centres,
                                      const std::vector<std::size_t>& assignment, const Metric& metric) {
  std::vector<std::vector<std::size_t>> counts(centres.size(), std::vector<std::size_t>(data.n_categories(), 0));
  std::vector<std::size_t> sizes(centres.size(), 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    ++counts[assignment[i]][data.label(i)];
    ++sizes[assignment[i]];
  }
  std::vector<LabeledPoint> protos;
  for (std::size_t c = 0; c < centres.size(); ++c) {
    const Category label = sizes[c] ? majority(counts[c]) : nearest_point_label(data, centres[c], metric);
    protos.push_back({centres[c], label});
  }
  return ReferenceSet(std::move(protos), data.categories(), Provenance::generated);
}

}  // namespace detail

// Lloyd's algorithm. Initial centroids are the first k distinct points of a
// seeded shuffle. A cluster left empty by an update is re-seeded at the point
// farthest from its own centroid. Stops once no centroid moves by tol or more
// (Euclidean shift) or after max_iter updates.
inline KMeansResult kmeans(std::span<const Point> points, const ClusteringParams& params, const Metric& metric = {}) {
  params.validate();
  if (points.empty()) throw InvalidInput("kmeans: no points");
  const std::size_t distinct = detail::count_distinct(points);
  if (params.k > distinct) {
    throw InvalidInput("kmeans: k=" + std::to_string(params.k) + " exceeds the " + std::to_string(distinct) +
                       " distinct points");
  }

  KMeansResult r;
  Rng rng(params.seed);
  for (std::size_t i : rng.permutation(points.size())) {
    if (r.centroids.size() == params.k) break;
    if (std::find(r.centroids.begin(), r.centroids.end(), points[i]) == r.centroids.end()) {
      r.centroids.push_back(points[i]);
    }
  }

  r.assignment.assign(points.size(), 0);
  std::vector<double> own(points.size());
  for (; r.iterations < params.max_iter; ++r.iterations) {
    r.objective.push_back(detail::assign_points(points, r.centroids, metric, r.assignment, own));

    std::vector<std::vector<const Point*>> members(params.k);
    for (std::size_t i = 0; i < points.size(); ++i) members[r.assignment[i]].push_back(&points[i]);
    std::vector<Point> next(params.k);
    for (std::size_t c = 0; c < params.k; ++c) {
      if (!members[c].empty()) next[c] = centroid(members[c]);
    }
    for (std::size_t c = 0; c < params.k; ++c) {
      if (!members[c].empty()) continue;
      const auto far = static_cast<std::size_t>(std::max_element(own.begin(), own.end()) - own.begin());
      next[c] = points[far];
      own[far] = 0.0;
    }

    double shift = 0.0;
    for (std::size_t c = 0; c < params.k; ++c) shift = std::max(shift, detail::euclidean_shift(r.centroids[c], next[c]));
    r.centroids = std::move(next);
    if (shift < params.tol) {
      r.converged = true;
      ++r.iterations;
      break;
    }
  }
  r.objective.push_back(detail::assign_points(points, r.centroids, metric, r.assignment, own));
  return r;
}

// One arithmetic mean per category, in category order.
inline ReferenceSet nearest_mean_prototypes(const Dataset& data) {
  data.require_labelled("nearest_mean_prototypes");
  std::vector<LabeledPoint> protos;
  for (Category c = 0; c < data.n_categories(); ++c) {
    const auto members = data.indices_of(c);
    if (members.empty()) throw InvalidInput("nearest_mean_prototypes: category '" + data.categories()[c] + "' is empty");
    protos.push_back({centroid_of(data, members), c});
  }
  return ReferenceSet(std::move(protos), data.categories(), Provenance::generated);
}

// k-means inside each category; centroids keep their category's label.
inline ReferenceSet cluster_pre_supervised(const Dataset& data, std::size_t k_per_category,
                                           const ClusteringParams& params, const Metric& metric = {}) {
  data.require_labelled("cluster_pre_supervised");
  std::vector<LabeledPoint> protos;
  for (Category c = 0; c < data.n_categories(); ++c) {
    const auto members = data.indices_of(c);
    if (members.empty()) throw InvalidInput("cluster_pre_supervised: category '" + data.categories()[c] + "' is empty");
    ClusteringParams p = params;
    p.k = k_per_category;
    p.seed = derive_seed(params.seed, c);
    KMeansResult km;
    try {
      km = kmeans(detail::features_of(data, members), p, metric);
    } catch (const InvalidInput& e) {
      throw InvalidInput("category '" + data.categories()[c] + "': " + e.what());
    }
    for (auto& centre : km.centroids) protos.push_back({std::move(centre), c});
  }
  return ReferenceSet(std::move(protos), data.categories(), Provenance::generated);
}

// k-means on all points, labels ignored; each centroid then takes the
// majority category of its members (lowest category index on ties).
inline ReferenceSet cluster_post_supervised(const Dataset& data, const ClusteringParams& params,
                                            const Metric& metric = {}) {
  data.require_labelled("cluster_post_supervised");
  const auto km = kmeans(detail::features_of(data), params, metric);
  return detail::label_by_majority(data, km.centroids, km.assignment, metric);
}

struct GmmFit {
  std::vector<Point> means;
  std::vector<double> variances;  // one per component (spherical)
  std::vector<double> weights;
  std::vector<double> log_likelihood;  // one entry per E-step
  std::vector<std::size_t> hard_assignment;
  std::size_t iterations = 0;
};

// EM for a mixture of spherical Gaussians N(mean_j, variance_j * I),
// initialised from k-means. Variances never drop below variance_floor.
// Stops when the log-likelihood gains less than tol or after max_iter M-steps.
inline GmmFit fit_spherical_gmm(std::span<const Point> points, const ClusteringParams& params) {
  const auto km = kmeans(points, params, Metric::euclidean());
  const std::size_t n = points.size();
  const std::size_t k = params.k;
  const double dim = static_cast<double>(points.front().size());

  const auto sq = [](const Point& a, const Point& b) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) acc += (a[j] - b[j]) * (a[j] - b[j]);
    return acc;
  };

  GmmFit fit;
  fit.means = km.centroids;
  fit.variances.assign(k, 0.0);
  fit.weights.assign(k, 0.0);
  {
    std::vector<double> count(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      count[km.assignment[i]] += 1.0;
      fit.variances[km.assignment[i]] += sq(points[i], fit.means[km.assignment[i]]);
    }
    for (std::size_t c = 0; c < k; ++c) {
      fit.weights[c] = count[c] / static_cast<double>(n);
      fit.variances[c] = count[c] > 0.0 ? fit.variances[c] / (dim * count[c]) : 0.0;
      fit.variances[c] = std::max(fit.variances[c], params.variance_floor);
    }
  }

  std::vector<std::vector<double>> resp(n, std::vector<double>(k, 0.0));
  const auto e_step = [&] {
    double ll = 0.0;
    std::vector<double> logp(k);
    for (std::size_t i = 0; i < n; ++i) {
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        if (fit.weights[c] <= 0.0) {
          logp[c] = -std::numeric_limits<double>::infinity();
          continue;
        }
        logp[c] = std::log(fit.weights[c]) - 0.5 * dim * std::log(2.0 * std::numbers::pi * fit.variances[c]) -
                  sq(points[i], fit.means[c]) / (2.0 * fit.variances[c]);
        top = std::max(top, logp[c]);
      }
      double sum = 0.0;
      for (std::size_t c = 0; c < k; ++c) sum += std::exp(logp[c] - top);
      const double lse = top + std::log(sum);
      for (std::size_t c = 0; c < k; ++c) resp[i][c] = std::exp(logp[c] - lse);
      ll += lse;
    }
    if (!std::isfinite(ll)) throw NumericError("gmm: log-likelihood is not finite");
    return ll;
  };

  double ll = e_step();
  fit.log_likelihood.push_back(ll);
  for (std::size_t it = 0; it < params.max_iter; ++it) {
    ++fit.iterations;
    for (std::size_t c = 0; c < k; ++c) {
      double mass = 0.0;
      Point mean(points.front().size(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        mass += resp[i][c];
        for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += resp[i][c] * points[i][j];
      }
      fit.weights[c] = mass / static_cast<double>(n);
      if (mass <= 0.0) continue;
      for (double& v : mean) v /= mass;
      double spread = 0.0;
      for (std::size_t i = 0; i < n; ++i) spread += resp[i][c] * sq(points[i], mean);
      fit.means[c] = std::move(mean);
      fit.variances[c] = std::max(spread / (dim * mass), params.variance_floor);
    }
    const double next = e_step();
    fit.log_likelihood.push_back(next);
    const double gain = next - ll;
    ll = next;
    if (gain < params.tol) break;
  }

  fit.hard_assignment.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    fit.hard_assignment[i] = static_cast<std::size_t>(std::max_element(resp[i].begin(), resp[i].end()) - resp[i].begin());
  }
  return fit;
}

enum class GmmMode { pre_supervised, post_supervised };

// Mixture-model prototypes: component means, labelled by their category
// (pre-supervised) or by the majority of hard-assigned members (post-supervised).
inline ReferenceSet gmm_mmc(const Dataset& data, const ClusteringParams& params, GmmMode mode) {
  data.require_labelled("gmm_mmc");
  if (mode == GmmMode::post_supervised) {
    const auto fit = fit_spherical_gmm(detail::features_of(data), params);
    return detail::label_by_majority(data, fit.means, fit.hard_assignment, Metric::euclidean());
  }
  std::vector<LabeledPoint> protos;
  for (Category c = 0; c < data.n_categories(); ++c) {
    const auto members = data.indices_of(c);
    if (members.empty()) throw InvalidInput("gmm_mmc: category '" + data.categories()[c] + "' is empty");
    ClusteringParams p = params;
    p.seed = derive_seed(params.seed, c);
    GmmFit fit;
    try {
      fit = fit_spherical_gmm(detail::features_of(data, members), p);
    } catch (const InvalidInput& e) {
      throw InvalidInput("category '" + data.categories()[c] + "': " + e.what());
    }
    for (auto& m : fit.means) protos.push_back({std::move(m), c});
  }
  return ReferenceSet(std::move(protos), data.categories(), Provenance::generated);
}

// LVQ1. Each epoch visits the data in a seeded random order; the nearest
// prototype moves toward a stimulus of its own category and away from one of
// another, with a step that decays linearly from alpha0 to 0 over all steps.
inline ReferenceSet lvq1(const Dataset& data, const ReferenceSet& init, const LvqParams& params,
                         const Metric& metric = {}) {
  params.validate();
  data.require_labelled("lvq1");
  if (init.categories() != data.categories()) throw InvalidInput("lvq1: initial prototypes use other categories");
  if (init.n_features() != data.n_features()) throw InvalidInput("lvq1: initial prototypes differ in dimensionality");
  {
    std::vector<bool> covered(data.n_categories(), false);
    for (std::size_t i = 0; i < init.size(); ++i) covered[init.label(i)] = true;
    const auto counts = data.category_counts();
    for (Category c = 0; c < data.n_categories(); ++c) {
      if (counts[c] && !covered[c]) {
        throw InvalidInput("lvq1: category '" + data.categories()[c] + "' has no initial prototype");
      }
    }
  }

  std::vector<LabeledPoint> protos = init.points();
  const double total = static_cast<double>(params.epochs * data.size());
  std::size_t step = 0;
  Rng rng(params.seed);
  std::vector<double> dist(protos.size());
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    for (std::size_t i : rng.permutation(data.size())) {
      const double alpha = params.alpha0 * (1.0 - static_cast<double>(step) / total);
      ++step;
      const auto& x = data[i].features;
      for (std::size_t m = 0; m < protos.size(); ++m) dist[m] = distance(metric, protos[m].features, x);
      auto& winner = protos[detail::nearest_position(dist, [&](std::size_t m) { return *protos[m].label; })];
      const double sign = *winner.label == data.label(i) ? 1.0 : -1.0;
      for (std::size_t j = 0; j < x.size(); ++j) winner.features[j] += sign * alpha * (x[j] - winner.features[j]);
    }
  }
  return ReferenceSet(std::move(protos), data.categories(), Provenance::generated);
}

}  // namespace protosel
