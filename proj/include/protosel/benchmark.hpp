#pragma once

// Method x dataset benchmark runs driven by a JSON config.
//
// Config:
//   {
//     "datasets": [ {"name": "five-four", "kind": "five_four"},
//                   {"name": "blobs", "kind": "gaussian", "counts": [20, 20],
//                    "means": [[0, 0], [3, 3]], "sigmas": [1, 1], "noise_rate": 0.1, "seed": 1},
//                   {"name": "mine", "kind": "csv", "path": "data.csv"} ],
//     "methods":  [ {"name": "cnn"}, {"name": "enn", "params": {"k": 3}} ],
//     "protocol": {"kind": "kfold", "folds": 3},
//     "metric":   {"kind": "euclidean"},
//     "lambda": 0.5,
//     "seed": 0,
//     "output": {"write_refsets": true, "include_timing": false}
//   }
//
// Output directory:
//   summary.csv                 one row per cell, in config order (datasets outer, methods inner)
//   cells/<cell>-<dataset>-<method>.json     evaluation report
//   refsets/<cell>-<dataset>-<method>.json   reference set fitted on the whole dataset

#include <atomic>
#include <filesystem>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "protosel/data.hpp"
#include "protosel/format.hpp"
#include "protosel/harness.hpp"
#include "protosel/refset_io.hpp"

namespace protosel {

struct DatasetSpec {
  std::string name;
  Dataset data;
};

struct BenchConfig {
  std::vector<DatasetSpec> datasets;
  std::vector<MethodSpec> methods;
  Protocol protocol;
  Metric metric;
  double lambda = 0.5;
  std::uint64_t seed = 0;
  bool write_refsets = true;
  bool include_timing = false;
};

namespace detail {

inline Dataset dataset_from_config(const nlohmann::json& j, const std::filesystem::path& base) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "five_four") return gen_5_4().training;
  if (kind == "gaussian") {
    return gen_gaussian(j.at("counts").get<std::vector<std::size_t>>(), j.at("means").get<std::vector<Point>>(),
                        j.at("sigmas").get<std::vector<double>>(), j.value("noise_rate", 0.0),
                        j.value("seed", std::uint64_t{0}))
        .data;
  }
  if (kind == "csv") {
    std::filesystem::path path = j.at("path").get<std::string>();
    if (path.is_relative()) path = base / path;
    return load_csv(path);
  }
  throw ConfigError("unknown dataset kind '" + kind + "' (expected five_four, gaussian or csv)");
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch == '\n' || ch == '\r' ? ' ' : ch;
  }
  return q + "\"";
}

inline std::string file_stem(std::size_t cell, const std::string& dataset, const std::string& method) {
  std::string s = std::to_string(cell) + "-" + dataset + "-" + method;
  for (char& ch : s) {
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.')) ch = '_';
  }
  return s;
}

}  // namespace detail

// `base` resolves relative CSV paths (normally the config file's directory).
inline BenchConfig parse_bench_config(const nlohmann::json& j, const std::filesystem::path& base = ".") {
  try {
    BenchConfig cfg;
    for (const auto& d : j.at("datasets")) {
      cfg.datasets.push_back({d.at("name").get<std::string>(), detail::dataset_from_config(d, base)});
    }
    if (cfg.datasets.empty()) throw ConfigError("config lists no datasets");
    for (const auto& m : j.at("methods")) {
      MethodSpec spec{m.at("name").get<std::string>(), m.value("params", nlohmann::json::object())};
      check_method(spec.name);
      cfg.methods.push_back(std::move(spec));
    }
    if (cfg.methods.empty()) throw ConfigError("config lists no methods");
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.lambda = j.value("lambda", 0.5);
    if (j.contains("metric")) cfg.metric = metric_from_json(j.at("metric"));
    if (j.contains("protocol")) {
      const auto& p = j.at("protocol");
      cfg.protocol.kind = parse_protocol_kind(p.value("kind", std::string("kfold")));
      cfg.protocol.folds = p.value("folds", cfg.protocol.folds);
      cfg.protocol.holdout_fraction = p.value("holdout_fraction", cfg.protocol.holdout_fraction);
    }
    cfg.protocol.seed = cfg.seed;
    if (j.contains("output")) {
      cfg.write_refsets = j.at("output").value("write_refsets", true);
      cfg.include_timing = j.at("output").value("include_timing", false);
    }
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed benchmark config: ") + e.what());
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
}

inline BenchConfig load_bench_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_bench_config(j, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

struct CellResult {
  std::string dataset;
  std::string method;
  std::optional<EvaluationReport> report;
  std::optional<ReferenceSet> refset;
  std::string error;  // empty on success
};

struct BenchResult {
  std::vector<CellResult> cells;
  std::filesystem::path summary_path;
};

inline const char* kSummaryHeader =
    "cell,dataset,method,protocol,status,n,reference_size,reduction_rate,training_accuracy,"
    "generalisation_accuracy,criterion_j,lambda,seed,error\n";

inline std::string summary_csv(const BenchConfig& cfg, const std::vector<CellResult>& cells) {
  std::string out = kSummaryHeader;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    out += std::to_string(i) + "," + detail::csv_field(c.dataset) + "," + detail::csv_field(c.method) + "," +
           std::string(to_string(cfg.protocol.kind)) + ",";
    if (c.report) {
      const auto& r = *c.report;
      out += "ok," + std::to_string(r.n) + "," + format_real(r.reference_size) + "," + format_real(r.reduction_rate) +
             "," + format_real(r.training_accuracy) + "," + format_real(r.generalisation_accuracy) + "," +
             format_real(r.criterion_j) + ",";
    } else {
      out += "failed,,,,,,,";
    }
    out += format_real(cfg.lambda) + "," + std::to_string(cfg.seed) + "," + detail::csv_field(c.error) + "\n";
  }
  return out;
}

// Runs every cell (up to `jobs` at once). A failing cell is recorded and the
// run continues. Outputs depend only on the config, never on scheduling.
inline BenchResult benchmark(const BenchConfig& cfg, const std::filesystem::path& output_dir, std::size_t jobs = 1) {
  struct Job {
    const DatasetSpec* dataset;
    const MethodSpec* method;
  };
  std::vector<Job> work;
  for (const auto& d : cfg.datasets) {
    for (const auto& m : cfg.methods) work.push_back({&d, &m});
  }

  std::vector<CellResult> cells(work.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      const auto& [ds, method] = work[i];
      CellResult& cell = cells[i];
      cell.dataset = ds->name;
      cell.method = method->name;
      try {
        cell.report = evaluate(*method, ds->data, cfg.protocol, cfg.metric, cfg.lambda);
        if (cfg.write_refsets) cell.refset = run_method(*method, ds->data, {cfg.metric, cfg.seed, cfg.lambda});
      } catch (const std::exception& e) {
        cell.report.reset();
        cell.error = e.what();
      }
      const auto stem = detail::file_stem(i, ds->name, method->name);
      nlohmann::json doc;
      if (cell.report) {
        doc = to_json(*cell.report, cfg.include_timing);
        doc["metric"] = metric_to_json(cfg.metric);
        doc["protocol_config"] = protocol_to_json(cfg.protocol);
      } else {
        doc = {{"method", method->name}, {"error", cell.error}};
      }
      doc["dataset"] = ds->name;
      doc["status"] = cell.report ? "ok" : "failed";
      write_file_atomic(output_dir / "cells" / (stem + ".json"), doc.dump(2) + "\n");
      if (cell.refset) save_refset(*cell.refset, output_dir / "refsets" / (stem + ".json"));
    }
  };

  jobs = std::max<std::size_t>(1, std::min(jobs, work.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  BenchResult result;
  result.summary_path = output_dir / "summary.csv";
  write_file_atomic(result.summary_path, summary_csv(cfg, cells));
  result.cells = std::move(cells);
  return result;
}

}  // namespace protosel
