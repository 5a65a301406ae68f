#pragma once

// Categorisation models from cognitive psychology, each expressed as a
// constructor of a nearest-neighbour reference set.
//
//   pure exemplar   every training stimulus (plain 1-NN)
//   pure prototype  one centroid per category (nearest mean classifier)
//   RMC             incremental similarity-threshold clustering, labels as an extra attribute
//   REX             k-means with post-hoc majority labels
//   SUSTAIN         error-driven cluster creation, winner moves on success
//   VAM             exhaustive search over within-category partitions
//   Rex Leopold I   exhaustive subset search scored by cross-validated accuracy only

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "protosel/core.hpp"
#include "protosel/nn.hpp"
#include "protosel/random.hpp"
#include "protosel/replacement.hpp"
#include "protosel/selection.hpp"

namespace protosel {

inline ReferenceSet pure_exemplar(const Dataset& data) {
  data.require_labelled("pure_exemplar");
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return ReferenceSet::selected(data, std::move(all));
}

inline ReferenceSet pure_prototype(const Dataset& data) { return nearest_mean_prototypes(data); }

// ---------------------------------------------------------------------------
// RMC

struct RmcParams {
  double coupling = 0.5;
  double label_weight = 1.0;
  std::uint64_t seed = 0;
  bool shuffle = false;  // present stimuli in a seeded random order instead of dataset order

  void validate() const {
    if (!(coupling > 0.0 && coupling < 1.0)) throw InvalidInput("rmc: coupling must lie in (0, 1)");
    if (!(label_weight >= 0.0) || !std::isfinite(label_weight)) {
      throw InvalidInput("rmc: label_weight must be a non-negative real");
    }
  }
};

// Each stimulus is extended by a one-hot label block scaled by label_weight.
// It joins the cluster whose running mean is most similar (exp(-d), lowest
// index on ties) unless that similarity is below the coupling, in which case
// it opens a new cluster. Prototypes are the cluster means restricted to the
// stimulus dimensions, labelled by the majority category of their members.
inline ReferenceSet rmc(const Dataset& data, const RmcParams& params, const Metric& metric = {}) {
  params.validate();
  data.require_labelled("rmc");
  const std::size_t n = data.n_features();
  const std::size_t c = data.n_categories();

  Metric augmented = metric;
  if (!augmented.weights.empty()) {
    if (augmented.weights.size() != n) throw InvalidInput("rmc: metric weights do not match dimensionality");
    augmented.weights.resize(n + c, 1.0);
  }
  const SimilarityParams unit{1.0};

  struct Cluster {
    Point mean;
    std::size_t size = 0;
    std::vector<std::size_t> counts;
  };
  std::vector<Cluster> clusters;

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (params.shuffle) order = Rng(params.seed).permutation(data.size());

  Point x(n + c);
  for (std::size_t i : order) {
    std::copy(data[i].features.begin(), data[i].features.end(), x.begin());
    for (std::size_t j = 0; j < c; ++j) x[n + j] = j == data.label(i) ? params.label_weight : 0.0;

    std::size_t best = 0;
    double best_sim = -1.0;
    for (std::size_t k = 0; k < clusters.size(); ++k) {
      const double s = similarity(distance(augmented, x, clusters[k].mean), unit);
      if (s > best_sim) {
        best_sim = s;
        best = k;
      }
    }
    if (clusters.empty() || best_sim < params.coupling) {
      clusters.push_back({x, 0, std::vector<std::size_t>(c, 0)});
      best = clusters.size() - 1;
    }
    auto& cl = clusters[best];
    ++cl.size;
    ++cl.counts[data.label(i)];
    if (cl.size > 1) {
      for (std::size_t j = 0; j < x.size(); ++j) cl.mean[j] += (x[j] - cl.mean[j]) / static_cast<double>(cl.size);
    }
  }

  std::vector<LabeledPoint> protos;
  for (const auto& cl : clusters) {
    protos.push_back({Point(cl.mean.begin(), cl.mean.begin() + static_cast<std::ptrdiff_t>(n)), majority(cl.counts)});
  }
  return ReferenceSet(std::move(protos), data.categories(), Provenance::generated);
}

// ---------------------------------------------------------------------------
// REX and Rex Leopold I

inline ReferenceSet rex(const Dataset& data, const ClusteringParams& params, const Metric& metric = {}) {
  return cluster_post_supervised(data, params, metric);
}

// Agnostic criterion-based selection with accuracy alone (lambda = 1) and
// exhaustive search. cv_folds = 0 means leave-one-out.
inline ReferenceSet rex_leopold_i(const Dataset& data, std::size_t cv_folds, double cap = kDefaultSubsetCap,
                                  const Metric& metric = {}, std::uint64_t seed = 0) {
  EditingParams p;
  p.lambda = 1.0;
  p.cv_folds = cv_folds;
  p.cap = cap;
  p.seed = seed;
  return exhaustive_select(data, p, metric);
}

// ---------------------------------------------------------------------------
// SUSTAIN (supervised, as error-driven incremental clustering)

struct SustainParams {
  double learning_rate = 0.1;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw InvalidInput("sustain: learning_rate must lie in (0, 1]");
    if (epochs < 1) throw InvalidInput("sustain: epochs must be at least 1");
  }
};

// Cluster state fed one labelled stimulus at a time.
class SustainLearner {
public:
  SustainLearner(double learning_rate, Metric metric) : rate_(learning_rate), metric_(std::move(metric)) {}

  void observe(const Point& x, Category label) {
    if (clusters_.empty()) {
      clusters_.push_back({x, label});
      return;
    }
    dist_.resize(clusters_.size());
    for (std::size_t k = 0; k < clusters_.size(); ++k) dist_[k] = distance(metric_, clusters_[k].features, x);
    auto& winner = clusters_[detail::nearest_position(dist_, [&](std::size_t k) { return *clusters_[k].label; })];
    if (*winner.label == label) {
      for (std::size_t j = 0; j < x.size(); ++j) winner.features[j] += rate_ * (x[j] - winner.features[j]);
    } else {
      clusters_.push_back({x, label});
    }
  }

  std::size_t cluster_count() const noexcept { return clusters_.size(); }
  const std::vector<LabeledPoint>& clusters() const noexcept { return clusters_; }

private:
  double rate_;
  Metric metric_;
  std::vector<LabeledPoint> clusters_;
  std::vector<double> dist_;
};

struct SustainRun {
  ReferenceSet clusters;
  std::vector<std::size_t> cluster_count;  // after each presented stimulus
};

inline SustainRun sustain_trace(const Dataset& data, const SustainParams& params, const Metric& metric = {}) {
  params.validate();
  data.require_labelled("sustain");
  SustainLearner learner(params.learning_rate, metric);
  Rng rng(params.seed);
  std::vector<std::size_t> counts;
  for (std::size_t e = 0; e < params.epochs; ++e) {
    for (std::size_t i : rng.permutation(data.size())) {
      learner.observe(data[i].features, data.label(i));
      counts.push_back(learner.cluster_count());
    }
  }
  return {ReferenceSet(learner.clusters(), data.categories(), Provenance::generated), std::move(counts)};
}

inline ReferenceSet sustain(const Dataset& data, const SustainParams& params, const Metric& metric = {}) {
  return sustain_trace(data, params, metric).clusters;
}

// ---------------------------------------------------------------------------
// VAM

// blocks[c][b] = ascending dataset indices of block b within category c.
using CategoryPartition = std::vector<std::vector<std::vector<std::size_t>>>;

struct PartitionRecord {
  CategoryPartition blocks;
  ReferenceSet refset;
  double score = 0.0;

  std::size_t block_count() const { return refset.size(); }
};

using VamCriterion = std::function<double(const Dataset&, const CategoryPartition&, const ReferenceSet&)>;

inline constexpr double kDefaultVamCap = 1e6;

// Bell numbers by the Bell triangle; exact in double up to n = 25.
inline double bell_number(std::size_t n) {
  std::vector<double> row{1.0};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> next{row.back()};
    for (double v : row) next.push_back(next.back() + v);
    row = std::move(next);
  }
  return row.front();
}

// Every set partition of {0..n-1} as a restricted growth string
// (a[0] = 0, a[i] <= 1 + max(a[0..i-1])), lexicographic order. The first is
// the single block, the last is all singletons.
inline std::vector<std::vector<std::size_t>> set_partitions(std::size_t n) {
  std::vector<std::vector<std::size_t>> out;
  if (n == 0) {
    out.emplace_back();
    return out;
  }
  std::vector<std::size_t> a(n, 0), peak(n, 0);  // peak[i] = max(a[0..i])
  while (true) {
    out.push_back(a);
    std::size_t i = n - 1;
    while (i > 0 && a[i] > peak[i - 1]) --i;
    if (i == 0) break;
    ++a[i];
    peak[i] = std::max(peak[i - 1], a[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      a[j] = 0;
      peak[j] = peak[i];
    }
  }
  return out;
}

namespace detail {

inline std::vector<std::vector<std::size_t>> blocks_from_rgs(const std::vector<std::size_t>& rgs,
                                                             const std::vector<std::size_t>& members) {
  std::size_t count = 0;
  for (std::size_t b : rgs) count = std::max(count, b + 1);
  std::vector<std::vector<std::size_t>> blocks(count);
  for (std::size_t i = 0; i < rgs.size(); ++i) blocks[rgs[i]].push_back(members[i]);
  return blocks;
}

inline ReferenceSet refset_from_partition(const Dataset& data, const CategoryPartition& blocks) {
  std::vector<LabeledPoint> protos;
  for (Category c = 0; c < blocks.size(); ++c) {
    for (const auto& block : blocks[c]) protos.push_back({centroid_of(data, block), c});
  }
  return ReferenceSet(std::move(protos), data.categories(), Provenance::generated);
}

}  // namespace detail

// Leave-one-out 1-NN accuracy of a partition model: each stimulus is
// classified after being removed from its own block (the block centroid is
// recomputed without it, and the block vanishes if it was a singleton).
inline double vam_loo_accuracy(const Dataset& data, const CategoryPartition& blocks, const Metric& metric = {}) {
  struct Proto {
    Point where;
    Category label;
    const std::vector<std::size_t>* block;
  };
  std::vector<Proto> protos;
  for (Category c = 0; c < blocks.size(); ++c) {
    for (const auto& block : blocks[c]) protos.push_back({centroid_of(data, block), c, &block});
  }
  std::size_t correct = 0;
  for (Category c = 0; c < blocks.size(); ++c) {
    for (const auto& own : blocks[c]) {
      for (std::size_t held : own) {
        std::optional<std::size_t> best;
        double best_d = 0.0;
        Category best_label = 0;
        const auto consider = [&](std::size_t pos, const Point& where, Category label) {
          const double d = distance(metric, where, data[held].features);
          if (!best || d < best_d || (d == best_d && label < best_label)) {
            best = pos;
            best_d = d;
            best_label = label;
          }
        };
        for (std::size_t p = 0; p < protos.size(); ++p) {
          if (protos[p].block != &own) {
            consider(p, protos[p].where, protos[p].label);
            continue;
          }
          if (own.size() == 1) continue;
          std::vector<std::size_t> rest;
          for (std::size_t j : own) {
            if (j != held) rest.push_back(j);
          }
          consider(p, centroid_of(data, rest), c);
        }
        if (best && best_label == data.label(held)) ++correct;
      }
    }
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

inline VamCriterion vam_loo_criterion(Metric metric = {}) {
  return [metric = std::move(metric)](const Dataset& data, const CategoryPartition& blocks, const ReferenceSet&) {
    return vam_loo_accuracy(data, blocks, metric);
  };
}

// All within-category partitions, crossed over categories (the last category
// varies fastest), each replaced by its block centroids and scored.
inline std::vector<PartitionRecord> vam_enumerate(const Dataset& data, const VamCriterion& criterion,
                                                  double cap = kDefaultVamCap) {
  data.require_labelled("vam");
  std::vector<std::vector<std::size_t>> members(data.n_categories());
  double space = 1.0;
  for (Category c = 0; c < data.n_categories(); ++c) {
    members[c] = data.indices_of(c);
    if (members[c].size() > 25) throw CapacityError("vam", std::numeric_limits<double>::infinity(), cap);
    space *= bell_number(members[c].size());
  }
  if (space > cap) throw CapacityError("vam", space, cap);

  std::vector<std::vector<std::vector<std::size_t>>> rgs(data.n_categories());
  for (Category c = 0; c < data.n_categories(); ++c) rgs[c] = set_partitions(members[c].size());

  std::vector<PartitionRecord> records;
  records.reserve(static_cast<std::size_t>(space));
  std::vector<std::size_t> pick(data.n_categories(), 0);
  while (true) {
    CategoryPartition blocks(data.n_categories());
    for (Category c = 0; c < data.n_categories(); ++c) blocks[c] = detail::blocks_from_rgs(rgs[c][pick[c]], members[c]);
    auto refset = detail::refset_from_partition(data, blocks);
    const double score = criterion(data, blocks, refset);
    records.push_back({std::move(blocks), std::move(refset), score});

    std::size_t c = data.n_categories();
    while (c > 0) {
      --c;
      if (++pick[c] < rgs[c].size()) break;
      pick[c] = 0;
      if (c == 0) return records;
    }
  }
}

inline std::vector<PartitionRecord> vam_enumerate(const Dataset& data, const Metric& metric = {},
                                                  double cap = kDefaultVamCap) {
  return vam_enumerate(data, vam_loo_criterion(metric), cap);
}

// Highest score; ties go to fewer blocks, then to enumeration order.
inline PartitionRecord vam_best(const Dataset& data, const VamCriterion& criterion, double cap = kDefaultVamCap) {
  auto records = vam_enumerate(data, criterion, cap);
  std::size_t best = 0;
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].score > records[best].score ||
        (records[i].score == records[best].score && records[i].block_count() < records[best].block_count())) {
      best = i;
    }
  }
  return std::move(records[best]);
}

inline PartitionRecord vam_best(const Dataset& data, const Metric& metric = {}, double cap = kDefaultVamCap) {
  return vam_best(data, vam_loo_criterion(metric), cap);
}

}  // namespace protosel
