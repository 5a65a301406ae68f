#pragma once

// Named reference-set constructors with JSON parameters, so the harness,
// the benchmark runner and the CLI share one dispatch table.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "protosel/folds.hpp"
#include "protosel/psych.hpp"
#include "protosel/replacement.hpp"
#include "protosel/selection.hpp"

namespace protosel {

struct MethodSpec {
  std::string name;
  nlohmann::json params = nlohmann::json::object();
};

// Shared inputs of one fit.
struct FitContext {
  Metric metric;
  std::uint64_t seed = 0;
  double lambda = 0.5;
};

struct MethodInfo {
  std::string name;
  std::string family;  // selection, replacement or psych
  std::string summary;
  std::vector<std::string> params;  // "key=default"
};

namespace detail {

class ParamReader {
public:
  ParamReader(const std::string& method, const nlohmann::json& params) : method_(method), params_(params) {
    if (!params_.is_null() && !params_.is_object()) throw ConfigError(method_ + ": params must be a JSON object");
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    seen_.insert(key);
    if (params_.is_null() || !params_.contains(key)) return fallback;
    try {
      return params_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(method_ + ": parameter '" + key + "' has the wrong type");
    }
  }

  // Rejects keys the method never asked for.
  void finish() const {
    if (params_.is_null()) return;
    for (const auto& [key, value] : params_.items()) {
      if (!seen_.count(key)) {
        std::string known;
        for (const auto& k : seen_) known += (known.empty() ? "" : ", ") + k;
        throw ConfigError(method_ + ": unknown parameter '" + key + "' (accepted: " + (known.empty() ? "none" : known) + ")");
      }
    }
  }

private:
  std::string method_;
  const nlohmann::json& params_;
  std::set<std::string> seen_;
};

inline ClusteringParams read_clustering(ParamReader& r, std::size_t default_k, std::uint64_t seed) {
  ClusteringParams p;
  p.k = r.get<std::size_t>("k", default_k);
  p.max_iter = r.get<std::size_t>("max_iter", p.max_iter);
  p.tol = r.get<double>("tol", p.tol);
  p.variance_floor = r.get<double>("variance_floor", p.variance_floor);
  p.seed = seed;
  return p;
}

using MethodFn = std::function<ReferenceSet(const Dataset&, ParamReader&, const FitContext&)>;

struct MethodEntry {
  MethodInfo info;
  MethodFn fit;
};

inline const std::vector<MethodEntry>& method_table() {
  static const std::vector<MethodEntry> table = {
      {{"pure-exemplar", "psych", "every training stimulus (plain 1-NN)", {}},
       [](const Dataset& d, ParamReader&, const FitContext&) { return pure_exemplar(d); }},
      {{"cnn", "selection", "Hart's condensed nearest neighbour", {}},
       [](const Dataset& d, ParamReader&, const FitContext& ctx) { return cnn(d, ctx.seed, ctx.metric); }},
      {{"enn", "selection", "Wilson's edited nearest neighbour", {"k=3"}},
       [](const Dataset& d, ParamReader& r, const FitContext& ctx) {
         return enn(d, r.get<std::size_t>("k", 3), ctx.metric);
       }},
      {{"hybrid", "selection", "ENN followed by CNN", {"k=3"}},
       [](const Dataset& d, ParamReader& r, const FitContext& ctx) {
         return hybrid_enn_cnn(d, r.get<std::size_t>("k", 3), ctx.seed, ctx.metric);
       }},
      {{"random", "selection", "random editing: best of T random subsets by J on a held-out validation part",
        {"T=100", "validation_fraction=0.3", "lambda=<run lambda>"}},
       [](const Dataset& d, ParamReader& r, const FitContext& ctx) {
         EditingParams p;
         p.T = r.get<std::size_t>("T", p.T);
         p.lambda = r.get<double>("lambda", ctx.lambda);
         p.seed = ctx.seed;
         const double fraction = r.get<double>("validation_fraction", 0.3);
         const Split split = make_holdout(d, fraction, derive_seed(ctx.seed, 1));
         const Dataset train = d.subset(split.train);
         const ReferenceSet s = random_editing(train, d.subset(split.test), p, ctx.metric);
         std::vector<std::size_t> idx;
         for (std::size_t i : *s.source_indices()) idx.push_back(split.train[i]);
         return ReferenceSet::selected(d, std::move(idx));
       }},
      {{"exhaustive", "selection", "exhaustive subset search by J with cross-validated error",
        {"cv_folds=0 (leave-one-out)", "cap=1048576", "lambda=<run lambda>"}},
       [](const Dataset& d, ParamReader& r, const FitContext& ctx) {
         EditingParams p;
         p.cv_folds = r.get<std::size_t>("cv_folds", 0);
         p.cap = r.get<double>("cap", kDefaultSubsetCap);
         p.lambda = r.get<double>("lambda", ctx.lambda);
         p.seed = ctx.seed;
         return exhaustive_select(d, p, ctx.metric);
       }},
      {{"nearest-mean", "replacement", "one centroid per category", {}},
       [](const Dataset& d, ParamReader&, const FitContext&) { return nearest_mean_prototypes(d); }},
      {{"kmeans-pre", "replacement", "k-means within each category",
        {"k=2 (per category)", "max_iter=100", "tol=1e-6"}},
       [](const Dataset& d, ParamReader& r, const FitContext& ctx) {
         const auto p = read_clustering(r, 2, ctx.seed);
         return cluster_pre_supervised(d, p.k, p, ctx.metric);
       }},
      {{"kmeans-post", "replacement", "k-means on all data, majority labels", {"k=4", "max_iter=100", "tol=1e-6"}},
       [](const Dataset& d, ParamReader& r, const FitContext& ctx) {
         return cluster_post_supervised(d, read_clustering(r, 4, ctx.seed), ctx.metric);
       }},
      {{"gmm", "replacement", "spherical Gaussian mixture (MMC) component means",
        {"k=2", "mode=pre_supervised|post_supervised", "max_iter=100", "tol=1e-6", "variance_floor=1e-6"}},
       [](const Dataset& d, ParamReader& r, const FitContext& ctx) {
         const auto p = read_clustering(r, 2, ctx.seed);
         const auto mode = r.get<std::string>("mode", "pre_supervised");
         if (mode != "pre_supervised" && mode != "post_supervised") {
           throw ConfigError("gmm: mode must be pre_supervised or post_supervised");
         }
         return gmm_mmc(d, p, mode == "pre_supervised" ? GmmMode::pre_supervised : GmmMode::post_supervised);
       }},
      {{"lvq", "replacement", "LVQ1 from per-category k-means prototypes",
        {"prototypes_per_category=2", "alpha0=0.3", "epochs=20"}},
       [](const Dataset& d, ParamReader& r, const FitContext& ctx) {
         LvqParams p;
         p.prototypes_per_category = r.get<std::size_t>("prototypes_per_category", 2);
         p.alpha0 = r.get<double>("alpha0", p.alpha0);
         p.epochs = r.get<std::size_t>("epochs", p.epochs);
         p.seed = ctx.seed;
         ClusteringParams init;
         init.seed = derive_seed(ctx.seed, 2);
         return lvq1(d, cluster_pre_supervised(d, p.prototypes_per_category, init, ctx.metric), p, ctx.metric);
       }},
      {{"rmc", "psych", "rational model: similarity-threshold incremental clustering",
        {"coupling=0.5", "label_weight=1", "shuffle=false"}},
       [](const Dataset& d, ParamReader& r, const FitContext& ctx) {
         RmcParams p;
         p.coupling = r.get<double>("coupling", p.coupling);
         p.label_weight = r.get<double>("label_weight", p.label_weight);
         p.shuffle = r.get<bool>("shuffle", false);
         p.seed = ctx.seed;
         return rmc(d, p, ctx.metric);
       }},
      {{"sustain", "psych", "error-driven cluster creation", {"learning_rate=0.1", "epochs=1"}},
       [](const Dataset& d, ParamReader& r, const FitContext& ctx) {
         SustainParams p;
         p.learning_rate = r.get<double>("learning_rate", p.learning_rate);
         p.epochs = r.get<std::size_t>("epochs", p.epochs);
         p.seed = ctx.seed;
         return sustain(d, p, ctx.metric);
       }},
      {{"vam", "psych", "best within-category partition by leave-one-out accuracy", {"cap=1000000"}},
       [](const Dataset& d, ParamReader& r, const FitContext& ctx) {
         return vam_best(d, ctx.metric, r.get<double>("cap", kDefaultVamCap)).refset;
       }},
  };
  return table;
}

struct Alias {
  const char* name;
  const char* target;
  const char* note;
};

// Models that coincide with a machine-learning method.
inline constexpr Alias kAliases[] = {
    {"pure-prototype", "nearest-mean", "class centroids"},
    {"rex", "kmeans-post", "k-means with majority labels"},
    {"rex-leopold-1", "exhaustive", "lambda fixed to 1"},
};

}  // namespace detail

inline std::vector<MethodInfo> builtin_methods() {
  std::vector<MethodInfo> out;
  for (const auto& e : detail::method_table()) out.push_back(e.info);
  return out;
}

inline std::vector<std::string> method_names(bool with_aliases = true) {
  std::vector<std::string> out;
  for (const auto& e : detail::method_table()) out.push_back(e.info.name);
  if (with_aliases) {
    for (const auto& a : detail::kAliases) out.emplace_back(a.name);
  }
  return out;
}

inline bool is_method(const std::string& name) {
  const auto names = method_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

inline std::string method_list() {
  std::string s;
  for (const auto& n : method_names()) s += (s.empty() ? "" : ", ") + n;
  return s;
}

inline void check_method(const std::string& name) {
  if (!is_method(name)) throw ConfigError("unknown method '" + name + "'; valid methods: " + method_list());
}

inline ReferenceSet run_method(const MethodSpec& spec, const Dataset& data, const FitContext& ctx) {
  check_method(spec.name);
  std::string target = spec.name;
  nlohmann::json params = spec.params.is_null() ? nlohmann::json::object() : spec.params;
  for (const auto& a : detail::kAliases) {
    if (spec.name != a.name) continue;
    target = a.target;
    if (spec.name == std::string("rex-leopold-1")) {
      if (params.contains("lambda")) throw ConfigError("rex-leopold-1: lambda is fixed to 1");
      params["lambda"] = 1.0;
    }
  }
  for (const auto& e : detail::method_table()) {
    if (e.info.name != target) continue;
    detail::ParamReader reader(spec.name, params);
    auto result = e.fit(data, reader, ctx);
    reader.finish();
    return result;
  }
  throw ConfigError("unknown method '" + spec.name + "'");
}

}  // namespace protosel
