#pragma once

// protosel command line. Every subcommand forwards to the library call of the
// same name, so the files it writes are the library's own serializations.
//
// Exit codes: 0 success, 1 usage error, 2 runtime error.

#include <algorithm>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "protosel/protosel.hpp"

namespace protosel::cli {

inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kRuntime = 2;

namespace detail {

struct Globals {
  std::uint64_t seed = 0;
  std::string metric = "euclidean";
  double p = 2.0;
  std::vector<double> weights;
  std::string output;
  std::string format = "json";
};

inline Metric make_metric(const Globals& g) {
  Metric m{parse_metric_kind(g.metric), g.p, g.weights};
  m.validate();
  return m;
}

inline void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_file_atomic(path, text);
  }
}

// Parses "0,0;3,3" into points.
inline std::vector<Point> parse_points(const std::string& s) {
  std::vector<Point> pts;
  std::stringstream rows(s);
  std::string row;
  while (std::getline(rows, row, ';')) {
    Point p;
    std::stringstream cols(row);
    std::string v;
    while (std::getline(cols, v, ',')) p.push_back(std::stod(v));
    pts.push_back(std::move(p));
  }
  return pts;
}

// Adds `value` under `key` when the flag was given on the command line.
template <typename T>
void put_if(nlohmann::json& params, const CLI::Option* opt, const std::string& key, const T& value) {
  if (opt->count() > 0) params[key] = value;
}

inline nlohmann::json single_fit_report(const std::string& method, const nlohmann::json& params,
                                        const ReferenceSet& s, const Dataset& data, const Metric& metric,
                                        double lambda) {
  const std::size_t correct = count_correct(s, data, metric);
  const double accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  nlohmann::json j{{"method", method},
                   {"params", params},
                   {"n", data.size()},
                   {"reference_size", s.size()},
                   {"reduction_rate", static_cast<double>(s.size()) / static_cast<double>(data.size())},
                   {"training_accuracy", accuracy},
                   {"consistent", correct == data.size()},
                   {"lambda", lambda},
                   {"provenance", std::string(to_string(s.provenance()))}};
  if (s.size() <= data.size()) j["criterion_j"] = criterion_j(1.0 - accuracy, s.size(), data.size(), lambda);
  return j;
}

inline std::string report_as_csv(const nlohmann::json& j) {
  std::string header, row;
  for (const auto& [key, value] : j.items()) {
    if (value.is_object() || value.is_array()) continue;
    header += (header.empty() ? "" : ",") + key;
    std::string cell;
    if (value.is_string()) {
      cell = value.get<std::string>();
    } else if (value.is_number_float()) {
      cell = format_real(value.get<double>());
    } else {
      cell = value.dump();
    }
    row += (row.empty() ? "" : ",") + protosel::detail::csv_field(cell);
  }
  return header + "\n" + row + "\n";
}

inline std::string render(const nlohmann::json& j, const std::string& format) {
  return format == "csv" ? report_as_csv(j) : j.dump(2) + "\n";
}

inline std::vector<std::string> names_in(const std::string& family, std::initializer_list<const char*> extra = {}) {
  std::vector<std::string> out;
  for (const auto& m : builtin_methods()) {
    if (m.family == family) out.push_back(m.name);
  }
  for (const char* e : extra) out.emplace_back(e);
  return out;
}

}  // namespace detail

inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace detail;
  CLI::App app{"protosel: reference-set selection and prototype generation for nearest-neighbour categorisation",
               "protosel"};
  app.require_subcommand(1);
  app.allow_extras(false);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "seed for every randomized procedure")->capture_default_str();
  app.add_option("--metric", g.metric, "distance: euclidean, hamming or minkowski")
      ->check(CLI::IsMember({"euclidean", "hamming", "minkowski"}))
      ->capture_default_str();
  app.add_option("--p", g.p, "minkowski exponent")->capture_default_str();
  app.add_option("--weights", g.weights, "per-dimension metric weights (comma separated)")->delimiter(',');
  app.add_option("-o,--output", g.output, "output file ('-' or omitted: standard output)");
  app.add_option("--format", g.format, "report format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  // dataset
  auto* ds = app.add_subcommand("dataset", "write a dataset as CSV");
  std::string ds_kind;
  ds->add_option("kind", ds_kind, "gen-5-4 or gaussian")->required()->check(CLI::IsMember({"gen-5-4", "gaussian"}));
  std::string transfer_path;
  ds->add_option("--transfer", transfer_path, "gen-5-4: also write the 7 unlabelled transfer stimuli here");
  std::vector<std::size_t> counts{30, 30};
  std::string means = "0,0;3,3";
  std::vector<double> sigmas{1.0, 1.0};
  double noise = 0.0;
  std::string flipped_path;
  ds->add_option("--counts", counts, "gaussian: points per category")->delimiter(',')->capture_default_str();
  ds->add_option("--means", means, "gaussian: category means, ';' between categories")->capture_default_str();
  ds->add_option("--sigmas", sigmas, "gaussian: standard deviation per category")->delimiter(',')->capture_default_str();
  ds->add_option("--noise", noise, "gaussian: fraction of labels flipped to another category")->capture_default_str();
  ds->add_option("--flipped", flipped_path, "gaussian: write flipped point indices here (one per line)");

  // select / generate / psych share one shape: method, input, parameters.
  struct FitCommand {
    CLI::App* cmd = nullptr;
    std::string method;
    std::string input;
    std::string report;
  };
  const auto fit_command = [&](FitCommand& fc, const char* name, const char* help, std::vector<std::string> methods) {
    fc.cmd = app.add_subcommand(name, help);
    std::string list;
    for (const auto& m : methods) list += (list.empty() ? "" : ", ") + m;
    fc.cmd->add_option("method", fc.method, list)->required()->check(CLI::IsMember(methods));
    fc.cmd->add_option("-i,--input", fc.input, "training dataset CSV")->required();
    fc.cmd->add_option("--report", fc.report, "also write a fit report here");
  };
  FitCommand sel, gen, psy;
  fit_command(sel, "select", "choose a reference subset of the data", names_in("selection"));
  fit_command(gen, "generate", "generate prototypes", names_in("replacement"));
  fit_command(psy, "psych", "build a categorisation model's reference set",
              names_in("psych", {"rex", "rex-leopold-1", "pure-prototype"}));
  auto* sel_cmd = sel.cmd;
  auto* gen_cmd = gen.cmd;
  auto* psy_cmd = psy.cmd;

  double lambda = 0.5;
  std::size_t k = 3, T = 100, cv_folds = 0;
  double cap = kDefaultSubsetCap, validation_fraction = 0.3;
  std::string validation_path;
  auto* o_lambda_s = sel_cmd->add_option("--lambda", lambda, "accuracy/size trade-off in J")->capture_default_str();
  auto* o_k_s = sel_cmd->add_option("--k", k, "enn/hybrid neighbourhood size")->capture_default_str();
  auto* o_T = sel_cmd->add_option("--T", T, "random: number of candidate subsets")->capture_default_str();
  auto* o_vf = sel_cmd->add_option("--validation-fraction", validation_fraction,
                                   "random: share held out for validation when --validation is absent")
                   ->capture_default_str();
  sel_cmd->add_option("--validation", validation_path, "random: validation dataset CSV");
  auto* o_cv_s = sel_cmd->add_option("--cv-folds", cv_folds, "exhaustive: folds, 0 = leave-one-out")->capture_default_str();
  auto* o_cap_s = sel_cmd->add_option("--cap", cap, "exhaustive: maximum subsets searched")->capture_default_str();

  std::size_t gk = 2, max_iter = 100, ppc = 2, epochs = 20;
  double tol = 1e-6, floor = 1e-6, alpha0 = 0.3;
  std::string mode = "pre_supervised";
  auto* o_gk = gen_cmd->add_option("--k", gk, "clusters (kmeans-pre: per category; kmeans-post default 4)")
                   ->capture_default_str();
  auto* o_iter = gen_cmd->add_option("--max-iter", max_iter, "k-means/EM iteration limit")->capture_default_str();
  auto* o_tol = gen_cmd->add_option("--tol", tol, "convergence threshold")->capture_default_str();
  auto* o_floor = gen_cmd->add_option("--variance-floor", floor, "gmm: smallest component variance")->capture_default_str();
  auto* o_mode = gen_cmd->add_option("--mode", mode, "gmm: pre_supervised or post_supervised")
                     ->check(CLI::IsMember({"pre_supervised", "post_supervised"}))
                     ->capture_default_str();
  auto* o_ppc = gen_cmd->add_option("--prototypes-per-category", ppc, "lvq: prototypes per category")->capture_default_str();
  auto* o_alpha = gen_cmd->add_option("--alpha0", alpha0, "lvq: initial learning rate")->capture_default_str();
  auto* o_epochs = gen_cmd->add_option("--epochs", epochs, "lvq: passes over the data")->capture_default_str();

  double coupling = 0.5, label_weight = 1.0, learning_rate = 0.1;
  std::size_t pk = 4, s_epochs = 1, p_cv = 0;
  double p_cap = kDefaultSubsetCap, vam_cap = kDefaultVamCap;
  bool shuffle = false;
  auto* o_coupling = psy_cmd->add_option("--coupling", coupling, "rmc: similarity threshold for a new cluster")
                         ->capture_default_str();
  auto* o_lw = psy_cmd->add_option("--label-weight", label_weight, "rmc: weight of the label attribute")->capture_default_str();
  auto* o_shuffle = psy_cmd->add_flag("--shuffle", shuffle, "rmc: seeded random presentation order");
  auto* o_lr = psy_cmd->add_option("--learning-rate", learning_rate, "sustain: winner step size")->capture_default_str();
  auto* o_sep = psy_cmd->add_option("--epochs", s_epochs, "sustain: passes over the data")->capture_default_str();
  auto* o_pk = psy_cmd->add_option("--k", pk, "rex: clusters")->capture_default_str();
  auto* o_pcv = psy_cmd->add_option("--cv-folds", p_cv, "rex-leopold-1: folds, 0 = leave-one-out")->capture_default_str();
  auto* o_pcap = psy_cmd->add_option("--cap", p_cap, "rex-leopold-1: maximum subsets searched")->capture_default_str();
  auto* o_vcap = psy_cmd->add_option("--vam-cap", vam_cap, "vam: maximum partition records")->capture_default_str();

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate a reference set, or a method under a protocol");
  std::string ev_input, ev_refset, ev_method, ev_params = "{}", ev_protocol = "kfold";
  std::size_t ev_folds = 5;
  double ev_fraction = 0.5, ev_lambda = 0.5;
  ev->add_option("-i,--input", ev_input, "dataset CSV")->required();
  auto* o_ref = ev->add_option("--refset", ev_refset, "reference set JSON to score on the dataset");
  auto* o_meth = ev->add_option("--method", ev_method, "method to fit and evaluate (" + method_list() + ")")
                     ->check(CLI::IsMember(method_names()));
  o_ref->excludes(o_meth);
  ev->add_option("--params", ev_params, "method parameters as a JSON object")->capture_default_str();
  ev->add_option("--protocol", ev_protocol, "resubstitution, holdout, kfold or loo")
      ->check(CLI::IsMember({"resubstitution", "holdout", "kfold", "loo"}))
      ->capture_default_str();
  ev->add_option("--folds", ev_folds, "kfold: number of folds")->capture_default_str();
  ev->add_option("--holdout-fraction", ev_fraction, "holdout: test share")->capture_default_str();
  ev->add_option("--lambda", ev_lambda, "accuracy/size trade-off in J")->capture_default_str();

  // fit
  auto* fit = app.add_subcommand("fit", "score a reference set against human response proportions");
  std::string fit_refset, fit_table;
  double gamma = 1.0;
  bool grid = false, strict_total = false;
  fit->add_option("--refset", fit_refset, "reference set JSON")->required();
  fit->add_option("--proportions", fit_table, "proportions CSV (features, then one count column per category)")
      ->required();
  fit->add_option("--gamma", gamma, "similarity sensitivity")->capture_default_str();
  fit->add_flag("--grid", grid, "search gamma over powers of sqrt(2) from 2^-6 to 2^6");
  fit->add_flag("--strict-total", strict_total, "require the same participant total M on every row");

  // bench
  auto* bench = app.add_subcommand("bench", "run a benchmark config");
  std::string config_path, out_dir = "bench-out";
  std::size_t jobs = 1;
  bench->add_option("-c,--config", config_path, "benchmark config JSON")->required();
  bench->add_option("--output-dir", out_dir, "directory for summary.csv, cells/ and refsets/")->capture_default_str();
  bench->add_option("--jobs", jobs, "cells evaluated in parallel")->capture_default_str()->check(CLI::PositiveNumber);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const Metric metric = make_metric(g);

    if (*ds) {
      if (ds_kind == "gen-5-4") {
        const auto five_four = gen_5_4();
        emit(to_csv(five_four.training), g.output, out);
        if (!transfer_path.empty()) save_csv(five_four.transfer_set(), transfer_path);
      } else {
        const auto sample = gen_gaussian(counts, parse_points(means), sigmas, noise, g.seed);
        emit(to_csv(sample.data), g.output, out);
        if (!flipped_path.empty()) {
          std::string lines;
          for (std::size_t i : sample.flipped) lines += std::to_string(i) + "\n";
          write_file_atomic(flipped_path, lines);
        }
      }
      return kOk;
    }

    const auto fit_and_write = [&](const FitCommand& fc, const nlohmann::json& params, double run_lambda) {
      const Dataset data = load_csv(fc.input);
      std::optional<ReferenceSet> s;
      if (fc.method == "random" && !validation_path.empty()) {
        EditingParams p;
        p.T = T;
        p.lambda = run_lambda;
        p.seed = g.seed;
        s = random_editing(data, load_csv(validation_path), p, metric);
      } else {
        s = run_method({fc.method, params}, data, {metric, g.seed, run_lambda});
      }
      emit(to_json(*s), g.output, out);
      if (!fc.report.empty()) {
        write_file_atomic(fc.report, render(single_fit_report(fc.method, params, *s, data, metric, run_lambda), g.format));
      }
    };

    if (*sel_cmd) {
      nlohmann::json params = nlohmann::json::object();
      if (sel.method == "enn" || sel.method == "hybrid") put_if(params, o_k_s, "k", k);
      if (sel.method == "random") {
        put_if(params, o_T, "T", T);
        put_if(params, o_vf, "validation_fraction", validation_fraction);
      }
      if (sel.method == "exhaustive") {
        put_if(params, o_cv_s, "cv_folds", cv_folds);
        put_if(params, o_cap_s, "cap", cap);
      }
      fit_and_write(sel, params, o_lambda_s->count() ? lambda : 0.5);
      return kOk;
    }

    if (*gen_cmd) {
      nlohmann::json params = nlohmann::json::object();
      const auto& m = gen.method;
      if (m == "kmeans-pre" || m == "kmeans-post" || m == "gmm") {
        put_if(params, o_gk, "k", gk);
        put_if(params, o_iter, "max_iter", max_iter);
        put_if(params, o_tol, "tol", tol);
      }
      if (m == "gmm") {
        put_if(params, o_floor, "variance_floor", floor);
        put_if(params, o_mode, "mode", mode);
      }
      if (m == "lvq") {
        put_if(params, o_ppc, "prototypes_per_category", ppc);
        put_if(params, o_alpha, "alpha0", alpha0);
        put_if(params, o_epochs, "epochs", epochs);
      }
      fit_and_write(gen, params, 0.5);
      return kOk;
    }

    if (*psy_cmd) {
      nlohmann::json params = nlohmann::json::object();
      const auto& m = psy.method;
      if (m == "rmc") {
        put_if(params, o_coupling, "coupling", coupling);
        put_if(params, o_lw, "label_weight", label_weight);
        put_if(params, o_shuffle, "shuffle", shuffle);
      }
      if (m == "sustain") {
        put_if(params, o_lr, "learning_rate", learning_rate);
        put_if(params, o_sep, "epochs", s_epochs);
      }
      if (m == "rex") put_if(params, o_pk, "k", pk);
      if (m == "rex-leopold-1") {
        put_if(params, o_pcv, "cv_folds", p_cv);
        put_if(params, o_pcap, "cap", p_cap);
      }
      if (m == "vam") put_if(params, o_vcap, "cap", vam_cap);
      fit_and_write(psy, params, m == "rex-leopold-1" ? 1.0 : 0.5);
      return kOk;
    }

    if (*ev) {
      if (ev_refset.empty() && ev_method.empty()) {
        err << "eval: give either --refset or --method\n";
        return kUsage;
      }
      const Dataset data = load_csv(ev_input);
      nlohmann::json report;
      if (!ev_refset.empty()) {
        const auto s = load_refset(ev_refset);
        report = single_fit_report("refset", nlohmann::json::object(), s, data, metric, ev_lambda);
        report["source"] = ev_refset;
      } else {
        nlohmann::json params;
        try {
          params = nlohmann::json::parse(ev_params);
        } catch (const nlohmann::json::parse_error& e) {
          err << "eval: --params is not valid JSON: " << e.what() << "\n";
          return kUsage;
        }
        Protocol protocol;
        protocol.kind = parse_protocol_kind(ev_protocol);
        protocol.folds = ev_folds;
        protocol.holdout_fraction = ev_fraction;
        protocol.seed = g.seed;
        report = to_json(evaluate({ev_method, params}, data, protocol, metric, ev_lambda));
        report["metric"] = metric_to_json(metric);
        report["protocol_config"] = protocol_to_json(protocol);
      }
      emit(render(report, g.format), g.output, out);
      return kOk;
    }

    if (*fit) {
      const auto s = load_refset(fit_refset);
      const auto table = load_proportions(fit_table, s.n_features(), strict_total);
      nlohmann::json report{{"source", fit_refset}, {"proportions", fit_table}, {"rows", table.size()},
                            {"probability_floor", kProbabilityFloor}};
      if (grid) {
        const auto best = best_gamma(s, metric, table, default_gamma_grid());
        report["gamma"] = best.gamma;
        report["sse"] = best.score.sse;
        report["loglik"] = best.score.loglik;
        report["grid_search"] = true;
      } else {
        const auto score = fit_score(s, metric, SimilarityParams{gamma}, table);
        report["gamma"] = gamma;
        report["sse"] = score.sse;
        report["loglik"] = score.loglik;
        report["grid_search"] = false;
      }
      emit(render(report, g.format), g.output, out);
      return kOk;
    }

    if (*bench) {
      const auto cfg = load_bench_config(config_path);
      const auto result = benchmark(cfg, out_dir, jobs);
      std::size_t failed = 0;
      for (const auto& c : result.cells) failed += c.report ? 0 : 1;
      err << "bench: " << result.cells.size() << " cells, " << failed << " failed; summary at "
          << result.summary_path.string() << "\n";
      return kOk;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(std::move(args));
}

}  // namespace protosel::cli
