#pragma once

// ReferenceSet <-> JSON.
//
// Output is canonical: keys in lexicographic order, one point per line, and
// every real printed with 17 significant digits. Equal sets therefore
// serialize to identical bytes.

#include <string>

#include <json.hpp>

#include "protosel/format.hpp"
#include "protosel/nn.hpp"

namespace protosel {

inline constexpr int kRefsetFormatVersion = 1;

inline std::string to_json(const ReferenceSet& s) {
  const auto quote = [](const std::string& text) { return nlohmann::json(text).dump(); };
  std::string out = "{\n  \"categories\": [";
  for (std::size_t c = 0; c < s.categories().size(); ++c) {
    if (c) out += ", ";
    out += quote(s.categories()[c]);
  }
  out += "],\n  \"n_features\": " + std::to_string(s.n_features()) + ",\n  \"points\": [\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    out += "    {\"features\": [";
    const auto& f = s[i].features;
    for (std::size_t j = 0; j < f.size(); ++j) {
      if (j) out += ", ";
      out += format_real(f[j]);
    }
    out += "], \"label\": " + quote(s.categories()[s.label(i)]) + "}";
    out += i + 1 < s.size() ? ",\n" : "\n";
  }
  out += "  ],\n  \"provenance\": \"" + std::string(to_string(s.provenance())) + "\",\n  \"source_indices\": ";
  if (const auto& src = s.source_indices()) {
    out += "[";
    for (std::size_t i = 0; i < src->size(); ++i) {
      if (i) out += ", ";
      out += std::to_string((*src)[i]);
    }
    out += "]";
  } else {
    out += "null";
  }
  out += ",\n  \"version\": " + std::to_string(kRefsetFormatVersion) + "\n}\n";
  return out;
}

inline ReferenceSet refset_from_json(const std::string& text, const std::string& source = "<refset>") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source, 0, e.what());
  }
  try {
    if (doc.at("version").get<int>() != kRefsetFormatVersion) {
      throw ParseError(source, 0, "unsupported reference-set version");
    }
    auto categories = doc.at("categories").get<std::vector<std::string>>();
    const auto n_features = doc.at("n_features").get<std::size_t>();
    std::vector<LabeledPoint> points;
    for (const auto& p : doc.at("points")) {
      LabeledPoint lp;
      lp.features = p.at("features").get<std::vector<double>>();
      if (lp.features.size() != n_features) throw ParseError(source, 0, "point dimensionality differs from n_features");
      const auto name = p.at("label").get<std::string>();
      for (std::size_t c = 0; c < categories.size(); ++c) {
        if (categories[c] == name) lp.label = c;
      }
      if (!lp.label) throw ParseError(source, 0, "point label '" + name + "' is not a listed category");
      points.push_back(std::move(lp));
    }
    std::optional<std::vector<std::size_t>> src;
    if (!doc.at("source_indices").is_null()) src = doc.at("source_indices").get<std::vector<std::size_t>>();
    return ReferenceSet(std::move(points), std::move(categories),
                        parse_provenance(doc.at("provenance").get<std::string>()), std::move(src));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source, 0, e.what());
  }
}

inline ReferenceSet load_refset(const std::filesystem::path& path) {
  return refset_from_json(read_file(path), path.string());
}

inline void save_refset(const ReferenceSet& s, const std::filesystem::path& path) {
  write_file_atomic(path, to_json(s));
}

}  // namespace protosel
