#pragma once

// Dataset construction and ingestion.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "protosel/core.hpp"
#include "protosel/format.hpp"
#include "protosel/random.hpp"

namespace protosel {

// ---------------------------------------------------------------------------
// The 5-4 category structure

struct FiveFourStructure {
  Dataset training;            // 5 stimuli in A, then 4 in B
  std::vector<Point> transfer;  // 7 unlabelled stimuli

  // Transfer stimuli as an unlabelled dataset with the training categories.
  Dataset transfer_set() const {
    std::vector<LabeledPoint> pts;
    for (const auto& p : transfer) pts.push_back({p, std::nullopt});
    return Dataset(std::move(pts), training.categories(), training.feature_names());
  }
};

// Four binary features, all 16 vectors used once. In A every feature has
// mode 1 (at least 3 of 5) and exactly one stimulus has two 0s; in B no
// feature has more 1s than 0s and exactly two stimuli have two 1s.
//
// A strict 0-majority for every B feature cannot coexist with two B stimuli
// that carry two 1s each (together four 1s spread over four features,
// leaving the other two B stimuli both equal to 0000), so B's mode
// constraint admits 2-2 splits. Among the satisfying labelings this is the
// first in lexicographic order of the A set, then the B set (stimuli read as
// 4-bit integers, first feature most significant), when each non-ambiguous
// stimulus is also required to be no more atypical than the ambiguous ones.
inline FiveFourStructure gen_5_4() {
  const auto bits = [](unsigned v) {
    return Point{double(v >> 3 & 1U), double(v >> 2 & 1U), double(v >> 1 & 1U), double(v & 1U)};
  };
  constexpr unsigned a[] = {0b0011, 0b0111, 0b1011, 0b1101, 0b1110};
  constexpr unsigned b[] = {0b0000, 0b0001, 0b0101, 0b0110};
  constexpr unsigned t[] = {0b0010, 0b0100, 0b1000, 0b1001, 0b1010, 0b1100, 0b1111};
  std::vector<LabeledPoint> training;
  for (unsigned v : a) training.push_back({bits(v), Category{0}});
  for (unsigned v : b) training.push_back({bits(v), Category{1}});
  std::vector<Point> transfer;
  for (unsigned v : t) transfer.push_back(bits(v));
  return {Dataset(std::move(training), {"A", "B"}, {"f1", "f2", "f3", "f4"}), std::move(transfer)};
}

// ---------------------------------------------------------------------------
// Gaussian blobs with label noise

struct GaussianSample {
  Dataset data;
  std::vector<std::size_t> flipped;  // ascending indices whose label was reassigned
};

inline std::string default_category_name(std::size_t c) {
  return c < 26 ? std::string(1, static_cast<char>('A' + c)) : "c" + std::to_string(c);
}

// Spherical Gaussian samples per category (category c gets counts[c] points
// around means[c] with standard deviation sigmas[c]), generated category by
// category. Then floor(noise_rate * N) distinct points get a label drawn
// uniformly from the other categories.
inline GaussianSample gen_gaussian(const std::vector<std::size_t>& counts, const std::vector<Point>& means,
                                   const std::vector<double>& sigmas, double noise_rate, std::uint64_t seed) {
  if (counts.empty()) throw InvalidInput("gen_gaussian: need at least one category");
  if (means.size() != counts.size() || sigmas.size() != counts.size()) {
    throw InvalidInput("gen_gaussian: counts, means and sigmas must have one entry per category");
  }
  const std::size_t dim = means.front().size();
  if (dim == 0) throw InvalidInput("gen_gaussian: means must have at least one coordinate");
  for (std::size_t c = 0; c < means.size(); ++c) {
    if (means[c].size() != dim) throw InvalidInput("gen_gaussian: means differ in dimensionality");
    if (!(sigmas[c] >= 0.0) || !std::isfinite(sigmas[c])) throw InvalidInput("gen_gaussian: sigma must be >= 0");
  }
  if (!(noise_rate >= 0.0 && noise_rate < 1.0)) throw InvalidInput("gen_gaussian: noise_rate must lie in [0, 1)");
  std::size_t total = 0;
  for (std::size_t n : counts) total += n;
  if (total == 0) throw InvalidInput("gen_gaussian: no points requested");

  Rng rng(seed);
  std::vector<LabeledPoint> pts;
  pts.reserve(total);
  for (std::size_t c = 0; c < counts.size(); ++c) {
    for (std::size_t i = 0; i < counts[c]; ++i) {
      Point x(dim);
      for (std::size_t j = 0; j < dim; ++j) x[j] = means[c][j] + sigmas[c] * rng.normal();
      pts.push_back({std::move(x), c});
    }
  }

  const auto n_flip = static_cast<std::size_t>(std::floor(noise_rate * static_cast<double>(total) + 1e-9));
  if (n_flip > 0 && counts.size() < 2) throw InvalidInput("gen_gaussian: label noise needs at least two categories");
  auto flipped = rng.sample(total, n_flip);
  std::sort(flipped.begin(), flipped.end());
  for (std::size_t i : flipped) {
    const Category old = *pts[i].label;
    const Category r = rng.uniform_index(counts.size() - 1);
    pts[i].label = r < old ? r : r + 1;
  }

  std::vector<std::string> names;
  for (std::size_t c = 0; c < counts.size(); ++c) names.push_back(default_category_name(c));
  return {Dataset(std::move(pts), std::move(names)), std::move(flipped)};
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) return fields;
    start = comma + 1;
  }
}

// Non-blank lines with their 1-based line numbers.
inline std::vector<std::pair<std::size_t, std::string_view>> csv_lines(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string_view>> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    const auto line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    ++line_no;
    if (!trim(line).empty()) out.emplace_back(line_no, line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return out;
}

inline double parse_real(std::string_view field, const std::string& source, std::size_t line) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc() || ptr != last) {
    throw ParseError(source, line, "'" + std::string(field) + "' is not a number");
  }
  if (!std::isfinite(v)) throw ParseError(source, line, "non-finite value '" + std::string(field) + "'");
  return v;
}

}  // namespace detail

// Header row with n feature names and a final "label" column. An empty
// label cell leaves the point unlabelled. Categories are the distinct labels
// in order of first appearance.
inline Dataset parse_csv(std::string_view text, const std::string& source = "<csv>") {
  const auto lines = detail::csv_lines(text);
  if (lines.empty()) throw ParseError(source, 0, "empty file");
  const auto header = detail::split_csv_line(lines.front().second);
  if (header.size() < 2 || header.back() != "label") {
    throw ParseError(source, lines.front().first, "header needs at least one feature column and a final 'label' column");
  }
  std::vector<std::string> names(header.begin(), header.end() - 1);
  std::vector<std::string> categories;
  std::vector<LabeledPoint> pts;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto [line_no, line] = lines[r];
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ParseError(source, line_no,
                       "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    LabeledPoint p;
    for (std::size_t j = 0; j + 1 < fields.size(); ++j) p.features.push_back(detail::parse_real(fields[j], source, line_no));
    if (!fields.back().empty()) {
      const std::string name(fields.back());
      auto it = std::find(categories.begin(), categories.end(), name);
      if (it == categories.end()) {
        categories.push_back(name);
        it = categories.end() - 1;
      }
      p.label = static_cast<Category>(it - categories.begin());
    }
    pts.push_back(std::move(p));
  }
  if (pts.empty()) throw ParseError(source, 0, "no data rows");
  if (categories.empty()) throw ParseError(source, 0, "no labelled rows; cannot infer a category set");
  return Dataset(std::move(pts), std::move(categories), std::move(names));
}

inline Dataset load_csv(const std::filesystem::path& path) { return parse_csv(read_file(path), path.string()); }

inline std::string to_csv(const Dataset& data) {
  std::string out;
  for (const auto& name : data.feature_names()) out += name + ",";
  out += "label\n";
  for (const auto& p : data.points()) {
    for (double v : p.features) out += format_real(v) + ",";
    if (p.label) out += data.categories()[*p.label];
    out += "\n";
  }
  return out;
}

inline void save_csv(const Dataset& data, const std::filesystem::path& path) { write_file_atomic(path, to_csv(data)); }

// ---------------------------------------------------------------------------
// Human response proportions

struct ProportionRow {
  Point stimulus;
  std::vector<double> counts;  // m_i, per category
  double total = 0.0;          // M
  std::vector<double> proportions;  // Q_i = m_i / M
};

class ProportionsTable {
public:
  ProportionsTable(std::vector<std::string> categories, std::vector<ProportionRow> rows)
      : categories_(std::move(categories)), rows_(std::move(rows)) {
    if (categories_.empty()) throw InvalidInput("proportions table needs categories");
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      auto& row = rows_[r];
      if (row.counts.size() != categories_.size()) throw InvalidInput("proportions row has the wrong number of counts");
      double sum = 0.0;
      for (double m : row.counts) {
        if (!(m >= 0.0) || !std::isfinite(m)) throw InvalidInput("proportions row has a negative or non-finite count");
        sum += m;
      }
      if (!(sum > 0.0)) throw InvalidInput("proportions row " + std::to_string(r) + " has zero total");
      if (row.total == 0.0) row.total = sum;
      if (std::abs(sum - row.total) > 1e-9 * row.total) throw InvalidInput("proportions row counts do not sum to M");
      row.proportions.resize(row.counts.size());
      for (std::size_t i = 0; i < row.counts.size(); ++i) row.proportions[i] = row.counts[i] / row.total;
    }
  }

  const std::vector<std::string>& categories() const noexcept { return categories_; }
  const std::vector<ProportionRow>& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }

private:
  std::vector<std::string> categories_;
  std::vector<ProportionRow> rows_;
};

// Columns: n_features stimulus coordinates, then one count column per
// category (the header names the categories). Counts must be non-negative
// integers with a positive row total; with strict_total every row must have
// the same total M.
inline ProportionsTable parse_proportions(std::string_view text, std::size_t n_features, bool strict_total = false,
                                          const std::string& source = "<proportions>") {
  const auto lines = detail::csv_lines(text);
  if (lines.empty()) throw ParseError(source, 0, "empty file");
  const auto header = detail::split_csv_line(lines.front().second);
  if (n_features == 0 || header.size() < n_features + 1) {
    throw ParseError(source, lines.front().first,
                     "header needs " + std::to_string(n_features) + " feature columns and at least one category column");
  }
  std::vector<std::string> categories(header.begin() + static_cast<std::ptrdiff_t>(n_features), header.end());
  std::vector<ProportionRow> rows;
  std::optional<double> common_total;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto [line_no, line] = lines[r];
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ParseError(source, line_no,
                       "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    ProportionRow row;
    for (std::size_t j = 0; j < n_features; ++j) row.stimulus.push_back(detail::parse_real(fields[j], source, line_no));
    for (std::size_t j = n_features; j < fields.size(); ++j) {
      const double m = detail::parse_real(fields[j], source, line_no);
      if (m < 0.0) throw ParseError(source, line_no, "negative count");
      if (m != std::floor(m)) throw ParseError(source, line_no, "count '" + std::string(fields[j]) + "' is not an integer");
      row.counts.push_back(m);
      row.total += m;
    }
    if (row.total == 0.0) throw ParseError(source, line_no, "row has zero total count");
    if (strict_total) {
      if (common_total && *common_total != row.total) {
        throw ParseError(source, line_no, "row total " + format_real(row.total) + " differs from M=" + format_real(*common_total));
      }
      common_total = row.total;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(source, 0, "no data rows");
  return ProportionsTable(std::move(categories), std::move(rows));
}

inline ProportionsTable load_proportions(const std::filesystem::path& path, std::size_t n_features,
                                         bool strict_total = false) {
  return parse_proportions(read_file(path), n_features, strict_total, path.string());
}

}  // namespace protosel
