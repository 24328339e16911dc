#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ocrsynth/common.hpp"
#include "ocrsynth/corpus.hpp"
#include "ocrsynth/utf8.hpp"

namespace ocrsynth {

// Raw similarity tensor: raw[detector][i][j] = S(i, j, q), j != i.
using RawScores = std::map<std::string, std::map<char32_t, std::map<char32_t, double>>>;

// Directional glyph-confusability matrix. Each row i holds S_norm(i, j) for
// every other alphabet character, sorted by j; values are in [0, 1].
struct GlyphSimilarityMatrix {
  int version = 1;
  std::vector<char32_t> alphabet;
  std::vector<std::string> detectors;
  std::string fonts_digest;
  std::string params_digest;
  std::map<char32_t, std::vector<std::pair<char32_t, double>>> rows;
  RawScores raw;  // retained only when requested at build time

  bool has_row(char32_t c) const { return rows.count(c) != 0; }

  const std::vector<std::pair<char32_t, double>>* find_row(char32_t c) const {
    const auto it = rows.find(c);
    return it == rows.end() ? nullptr : &it->second;
  }

  bool operator==(const GlyphSimilarityMatrix& o) const {
    return version == o.version && alphabet == o.alphabet && detectors == o.detectors &&
           fonts_digest == o.fonts_digest && params_digest == o.params_digest && rows == o.rows &&
           raw == o.raw;
  }

  // top_k > 0 keeps only the k strongest entries per row (strongest first);
  // entries dropped this way read back as zeros.
  nlohmann::ordered_json to_json(size_t top_k = 0) const {
    nlohmann::ordered_json alphabet_j = nlohmann::ordered_json::array();
    for (char32_t c : alphabet) alphabet_j.push_back(encode_utf8(c));
    nlohmann::ordered_json rows_j = nlohmann::ordered_json::object();
    for (const auto& [i, row] : rows) {
      std::vector<std::pair<char32_t, double>> sorted = row;
      std::stable_sort(sorted.begin(), sorted.end(),
                       [](const auto& a, const auto& b) { return a.second > b.second; });
      if (top_k > 0 && sorted.size() > top_k) sorted.resize(top_k);
      nlohmann::ordered_json row_j = nlohmann::ordered_json::array();
      for (const auto& [j, s] : sorted)
        row_j.push_back({{"char_j", encode_utf8(j)}, {"s_norm", s}});
      rows_j[encode_utf8(i)] = row_j;
    }
    nlohmann::ordered_json doc{{"version", version},
                               {"alphabet", alphabet_j},
                               {"detectors", detectors},
                               {"fonts_digest", fonts_digest},
                               {"params_digest", params_digest},
                               {"rows", rows_j}};
    if (!raw.empty()) {
      nlohmann::ordered_json raw_j = nlohmann::ordered_json::object();
      for (const auto& [q, per_i] : raw) {
        nlohmann::ordered_json q_j = nlohmann::ordered_json::object();
        for (const auto& [i, per_j] : per_i) {
          nlohmann::ordered_json i_j = nlohmann::ordered_json::object();
          for (const auto& [j, s] : per_j) i_j[encode_utf8(j)] = s;
          q_j[encode_utf8(i)] = i_j;
        }
        raw_j[q] = q_j;
      }
      doc["raw"] = raw_j;
    }
    return doc;
  }

  static GlyphSimilarityMatrix from_json(const nlohmann::json& j) {
    GlyphSimilarityMatrix m;
    m.version = j.at("version").get<int>();
    if (m.version != 1)
      throw Error("similarity matrix: unsupported version " + std::to_string(m.version));
    auto one_char = [](const std::string& key) {
      const std::u32string cs = decode_utf8(key);
      if (cs.size() != 1) throw Error("similarity matrix: not a single character: " + key);
      return cs[0];
    };
    for (const auto& entry : j.at("alphabet")) m.alphabet.push_back(one_char(entry.get<std::string>()));
    m.detectors = j.at("detectors").get<std::vector<std::string>>();
    m.fonts_digest = j.at("fonts_digest").get<std::string>();
    m.params_digest = j.value("params_digest", std::string{});
    for (const auto& [key, row_j] : j.at("rows").items()) {
      const char32_t i = one_char(key);
      std::map<char32_t, double> entries;
      for (const auto& entry : row_j)
        entries[one_char(entry.at("char_j").get<std::string>())] =
            entry.at("s_norm").get<double>();
      auto& row = m.rows[i];
      for (char32_t c : m.alphabet) {
        if (c == i) continue;
        const auto it = entries.find(c);
        row.emplace_back(c, it == entries.end() ? 0.0 : it->second);
      }
    }
    if (j.contains("raw")) {
      for (const auto& [q, q_j] : j.at("raw").items())
        for (const auto& [ikey, i_j] : q_j.items())
          for (const auto& [jkey, s] : i_j.items())
            m.raw[q][one_char(ikey)][one_char(jkey)] = s.get<double>();
    }
    return m;
  }

  void save(const std::filesystem::path& path, size_t top_k = 0) const {
    write_file(path, to_json(top_k).dump(2) + "\n");
  }

  static GlyphSimilarityMatrix load(const std::filesystem::path& path) {
    return from_json(nlohmann::json::parse(read_file(path)));
  }
};

// Min-max normalization per (character, detector) row, averaged over
// detectors. Degenerate rows (all raw scores equal) normalize to 0.
inline std::map<char32_t, std::vector<std::pair<char32_t, double>>> normalize_scores(
    const RawScores& raw, const std::vector<char32_t>& alphabet,
    const std::vector<std::string>& detectors) {
  if (detectors.empty()) throw Error("normalize_scores: no detectors");
  std::map<char32_t, std::vector<std::pair<char32_t, double>>> rows;
  for (char32_t i : alphabet) {
    auto& row = rows[i];
    for (char32_t j : alphabet)
      if (j != i) row.emplace_back(j, 0.0);
    for (const auto& q : detectors) {
      const auto qit = raw.find(q);
      const std::map<char32_t, double>* per_j = nullptr;
      if (qit != raw.end()) {
        const auto iit = qit->second.find(i);
        if (iit != qit->second.end()) per_j = &iit->second;
      }
      auto score = [&](char32_t j) {
        if (!per_j) return 0.0;
        const auto it = per_j->find(j);
        return it == per_j->end() ? 0.0 : it->second;
      };
      double lo = 0, hi = 0;
      bool first = true;
      for (const auto& [j, unused] : row) {
        const double s = score(j);
        lo = first ? s : std::min(lo, s);
        hi = first ? s : std::max(hi, s);
        first = false;
      }
      if (hi <= lo) continue;  // degenerate: contributes 0 to every term
      for (auto& [j, acc] : row) acc += (score(j) - lo) / (hi - lo);
    }
    for (auto& [j, acc] : row) acc /= static_cast<double>(detectors.size());
  }
  return rows;
}

// Alphabet-compatibility check between a loaded matrix and the profile a run
// is about to use. Returns human-readable warnings, empty when compatible.
inline std::vector<std::string> matrix_compat_warnings(const GlyphSimilarityMatrix& matrix,
                                                       const CharsetProfile& profile) {
  std::vector<std::string> warnings;
  const std::vector<char32_t> alpha = profile.alphabet();
  if (matrix.alphabet != alpha) {
    size_t missing = 0;
    for (char32_t c : alpha)
      if (!matrix.has_row(c)) ++missing;
    warnings.push_back("matrix alphabet (" + std::to_string(matrix.alphabet.size()) +
                       " chars) differs from profile alphabet (" + std::to_string(alpha.size()) +
                       " chars); " + std::to_string(missing) +
                       " profile characters have no similarity row");
  }
  return warnings;
}

}  // namespace ocrsynth
