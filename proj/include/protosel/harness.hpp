#pragma once

// Evaluation protocols, reports and fit to human response proportions.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "protosel/data.hpp"
#include "protosel/folds.hpp"
#include "protosel/methods.hpp"
#include "protosel/nn.hpp"

namespace protosel {

enum class ProtocolKind { resubstitution, holdout, kfold, loo };

inline std::string_view to_string(ProtocolKind k) {
  switch (k) {
    case ProtocolKind::resubstitution: return "resubstitution";
    case ProtocolKind::holdout: return "holdout";
    case ProtocolKind::kfold: return "kfold";
    case ProtocolKind::loo: return "loo";
  }
  return "?";
}

inline ProtocolKind parse_protocol_kind(std::string_view s) {
  if (s == "resubstitution") return ProtocolKind::resubstitution;
  if (s == "holdout") return ProtocolKind::holdout;
  if (s == "kfold") return ProtocolKind::kfold;
  if (s == "loo") return ProtocolKind::loo;
  throw InvalidInput("unknown protocol '" + std::string(s) + "' (expected resubstitution, holdout, kfold or loo)");
}

struct Protocol {
  ProtocolKind kind = ProtocolKind::kfold;
  double holdout_fraction = 0.5;
  std::size_t folds = 5;
  std::uint64_t seed = 0;

  void validate(std::size_t n) const {
    switch (kind) {
      case ProtocolKind::resubstitution: break;
      case ProtocolKind::holdout:
        if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) throw InvalidInput("holdout_fraction must lie in (0, 1)");
        if (n < 2) throw InvalidInput("holdout needs N >= 2");
        break;
      case ProtocolKind::kfold:
        if (folds < 2) throw InvalidInput("kfold needs at least 2 folds");
        if (folds > n) throw InvalidInput("kfold: more folds than points");
        break;
      case ProtocolKind::loo:
        if (n < 2) throw InvalidInput("leave-one-out needs N >= 2");
        break;
    }
  }
};

struct SplitPlan {
  std::vector<Split> splits;
  bool stratified = false;
};

// Train/test index pairs for a protocol; resubstitution trains and tests on everything.
inline SplitPlan make_splits(const Dataset& data, const Protocol& protocol) {
  protocol.validate(data.size());
  SplitPlan plan;
  const std::size_t n = data.size();
  switch (protocol.kind) {
    case ProtocolKind::resubstitution: {
      Split all;
      for (std::size_t i = 0; i < n; ++i) all.train.push_back(i);
      all.test = all.train;
      plan.splits.push_back(std::move(all));
      break;
    }
    case ProtocolKind::holdout:
      plan.splits.push_back(make_holdout(data, protocol.holdout_fraction, protocol.seed, &plan.stratified));
      break;
    case ProtocolKind::kfold:
    case ProtocolKind::loo: {
      const FoldPlan folds = make_folds(data, protocol.kind == ProtocolKind::loo ? n : protocol.folds, protocol.seed);
      plan.stratified = folds.stratified;
      for (const auto& f : folds.folds) plan.splits.push_back(complement_split(n, f));
      break;
    }
  }
  return plan;
}

struct FitScore {
  double sse = 0.0;
  double loglik = 0.0;
};

inline constexpr double kProbabilityFloor = 1e-12;

// sse = sum over rows and categories of (P - Q)^2;
// loglik = sum of m_i * ln max(P_i, 1e-12).
inline FitScore fit_score(const ReferenceSet& refset, const Metric& metric, const SimilarityParams& params,
                          const ProportionsTable& table) {
  if (table.categories() != refset.categories()) {
    throw InvalidInput("fit_score: proportions table categories differ from the reference set's");
  }
  FitScore score;
  for (const auto& row : table.rows()) {
    if (row.stimulus.size() != refset.n_features()) throw InvalidInput("fit_score: stimulus dimensionality mismatch");
    const auto p = predict_proportions(refset, metric, params, row.stimulus);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double diff = p[i] - row.proportions[i];
      score.sse += diff * diff;
      score.loglik += row.counts[i] * std::log(std::max(p[i], kProbabilityFloor));
    }
  }
  return score;
}

struct GammaFit {
  double gamma = 1.0;
  FitScore score;
};

// Grid search for the similarity sensitivity minimising sse (first on ties).
inline GammaFit best_gamma(const ReferenceSet& refset, const Metric& metric, const ProportionsTable& table,
                           const std::vector<double>& grid) {
  if (grid.empty()) throw InvalidInput("best_gamma: empty grid");
  std::optional<GammaFit> best;
  for (double g : grid) {
    const auto s = fit_score(refset, metric, SimilarityParams{g}, table);
    if (!best || s.sse < best->score.sse) best = GammaFit{g, s};
  }
  return *best;
}

inline std::vector<double> default_gamma_grid() {
  std::vector<double> grid;
  for (int e = -12; e <= 12; ++e) grid.push_back(std::pow(2.0, e / 2.0));
  return grid;
}

struct FoldOutcome {
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::size_t reference_size = 0;
  double training_accuracy = 0.0;
  double test_accuracy = 0.0;
};

struct EvaluationReport {
  std::string method;
  nlohmann::json params;
  std::string protocol;
  bool goodness_of_fit = false;  // resubstitution: accuracy measured on the fitted data
  bool stratified = false;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double lambda = 0.5;
  double training_accuracy = 0.0;
  double generalisation_accuracy = 0.0;
  std::vector<FoldOutcome> folds;
  double reference_size = 0.0;  // mean over folds
  double reduction_rate = 0.0;  // mean of |S| / N_train over folds
  double criterion_j = 0.0;     // lambda * (1 - generalisation) + (1 - lambda) * reduction_rate
  double wall_time_s = 0.0;
  std::optional<FitScore> fit;
};

// Fits the method on each training split and scores 1-NN on its test split.
// Split f uses seed derive_seed(protocol.seed, f) for the method, so reports
// for different methods under one protocol share identical splits.
inline EvaluationReport evaluate(const MethodSpec& method, const Dataset& data, const Protocol& protocol,
                                 const Metric& metric, double lambda) {
  check_method(method.name);
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidInput("lambda must lie in [0, 1]");
  data.require_labelled("evaluate");
  const auto start = std::chrono::steady_clock::now();

  EvaluationReport rep;
  rep.method = method.name;
  rep.params = method.params.is_null() ? nlohmann::json::object() : method.params;
  rep.protocol = std::string(to_string(protocol.kind));
  rep.goodness_of_fit = protocol.kind == ProtocolKind::resubstitution;
  rep.n = data.size();
  rep.seed = protocol.seed;
  rep.lambda = lambda;

  const SplitPlan plan = make_splits(data, protocol);
  rep.stratified = plan.stratified;
  for (std::size_t f = 0; f < plan.splits.size(); ++f) {
    const auto& split = plan.splits[f];
    try {
      const Dataset train = data.subset(split.train);
      const Dataset test = data.subset(split.test);
      const ReferenceSet s = run_method(method, train, {metric, derive_seed(protocol.seed, f), lambda});
      FoldOutcome out;
      out.train_size = train.size();
      out.test_size = test.size();
      out.reference_size = s.size();
      out.training_accuracy = training_accuracy(s, train, metric);
      out.test_accuracy = training_accuracy(s, test, metric);
      rep.folds.push_back(out);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw Error("evaluate " + method.name + ": fold " + std::to_string(f) + " of " +
                  std::to_string(plan.splits.size()) + " failed: " + e.what());
    }
  }

  const double k = static_cast<double>(rep.folds.size());
  for (const auto& f : rep.folds) {
    rep.training_accuracy += f.training_accuracy / k;
    rep.generalisation_accuracy += f.test_accuracy / k;
    rep.reference_size += static_cast<double>(f.reference_size) / k;
    rep.reduction_rate += static_cast<double>(f.reference_size) / static_cast<double>(f.train_size) / k;
  }
  rep.criterion_j = lambda * (1.0 - rep.generalisation_accuracy) + (1.0 - lambda) * rep.reduction_rate;
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

inline nlohmann::json metric_to_json(const Metric& m) {
  nlohmann::json j{{"kind", std::string(to_string(m.kind))}};
  if (m.kind == MetricKind::minkowski) j["p"] = m.p;
  if (!m.weights.empty()) j["weights"] = m.weights;
  return j;
}

inline Metric metric_from_json(const nlohmann::json& j) {
  Metric m;
  if (j.is_string()) {
    m.kind = parse_metric_kind(j.get<std::string>());
  } else {
    m.kind = parse_metric_kind(j.value("kind", std::string("euclidean")));
    m.p = j.value("p", 2.0);
    m.weights = j.value("weights", std::vector<double>{});
  }
  m.validate();
  return m;
}

inline nlohmann::json protocol_to_json(const Protocol& p) {
  nlohmann::json j{{"kind", std::string(to_string(p.kind))}, {"seed", p.seed}};
  if (p.kind == ProtocolKind::holdout) j["holdout_fraction"] = p.holdout_fraction;
  if (p.kind == ProtocolKind::kfold) j["folds"] = p.folds;
  return j;
}

// Keys are emitted sorted; wall time only when asked, so reports stay reproducible.
inline nlohmann::json to_json(const EvaluationReport& r, bool include_timing = false) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : r.folds) {
    folds.push_back({{"train_size", f.train_size},
                     {"test_size", f.test_size},
                     {"reference_size", f.reference_size},
                     {"training_accuracy", f.training_accuracy},
                     {"test_accuracy", f.test_accuracy}});
  }
  nlohmann::json j{{"method", r.method},
                   {"params", r.params},
                   {"protocol", r.protocol},
                   {"goodness_of_fit", r.goodness_of_fit},
                   {"stratified", r.stratified},
                   {"n", r.n},
                   {"seed", r.seed},
                   {"lambda", r.lambda},
                   {"training_accuracy", r.training_accuracy},
                   {"generalisation_accuracy", r.generalisation_accuracy},
                   {"folds", folds},
                   {"reference_size", r.reference_size},
                   {"reduction_rate", r.reduction_rate},
                   {"criterion_j", r.criterion_j},
                   {"probability_floor", kProbabilityFloor}};
  if (include_timing) j["wall_time_s"] = r.wall_time_s;
  if (r.fit) j["fit"] = {{"sse", r.fit->sse}, {"loglik", r.fit->loglik}};
  return j;
}

}  // namespace protosel
