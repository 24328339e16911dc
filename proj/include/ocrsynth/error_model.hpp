#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ocrsynth/align.hpp"
#include "ocrsynth/common.hpp"
#include "ocrsynth/rng.hpp"
#include "ocrsynth/utf8.hpp"

namespace ocrsynth {

// Character-conditional OCR error statistics harvested from alignments.
// sub[c][x] and del[c] are probabilities per occurrence of c; ins_rate is
// insertions per interior gap of the clean text; ins_dist is the distribution
// of inserted characters.
struct OcrErrorModel {
  int version = 1;
  double base_cer = 0.0;
  double ins_rate = 0.0;
  std::map<char32_t, std::map<char32_t, double>> sub;
  std::map<char32_t, double> del;
  std::map<char32_t, double> ins_dist;
  uint64_t clean_chars = 0;
  uint64_t interior_gaps = 0;
  uint64_t substitutions = 0;
  uint64_t deletions = 0;
  uint64_t insertions = 0;

  nlohmann::ordered_json to_json() const {
    auto sub_j = nlohmann::ordered_json::object();
    for (const auto& [c, row] : sub) {
      auto row_j = nlohmann::ordered_json::object();
      for (const auto& [x, p] : row) row_j[encode_utf8(x)] = p;
      sub_j[encode_utf8(c)] = row_j;
    }
    auto del_j = nlohmann::ordered_json::object();
    for (const auto& [c, p] : del) del_j[encode_utf8(c)] = p;
    auto ins_j = nlohmann::ordered_json::object();
    for (const auto& [c, p] : ins_dist) ins_j[encode_utf8(c)] = p;
    return nlohmann::ordered_json{{"version", version},
                                  {"base_cer", base_cer},
                                  {"sub", sub_j},
                                  {"del", del_j},
                                  {"ins_rate", ins_rate},
                                  {"ins_dist", ins_j},
                                  {"counts",
                                   {{"clean_chars", clean_chars},
                                    {"interior_gaps", interior_gaps},
                                    {"substitutions", substitutions},
                                    {"deletions", deletions},
                                    {"insertions", insertions}}}};
  }

  static OcrErrorModel from_json(const nlohmann::json& j) {
    OcrErrorModel m;
    m.version = j.at("version").get<int>();
    if (m.version != 1) throw Error("error model: unsupported version");
    m.base_cer = j.at("base_cer").get<double>();
    m.ins_rate = j.at("ins_rate").get<double>();
    auto one_char = [](const std::string& key) {
      const std::u32string cs = decode_utf8(key);
      if (cs.size() != 1) throw Error("error model: key is not a single character: " + key);
      return cs[0];
    };
    for (const auto& [key, row] : j.at("sub").items())
      for (const auto& [key2, p] : row.items())
        m.sub[one_char(key)][one_char(key2)] = p.get<double>();
    for (const auto& [key, p] : j.at("del").items()) m.del[one_char(key)] = p.get<double>();
    for (const auto& [key, p] : j.at("ins_dist").items()) m.ins_dist[one_char(key)] = p.get<double>();
    const auto& counts = j.at("counts");
    m.clean_chars = counts.at("clean_chars").get<uint64_t>();
    m.interior_gaps = counts.at("interior_gaps").get<uint64_t>();
    m.substitutions = counts.at("substitutions").get<uint64_t>();
    m.deletions = counts.at("deletions").get<uint64_t>();
    m.insertions = counts.at("insertions").get<uint64_t>();
    return m;
  }

  void save(const std::filesystem::path& path) const { write_file(path, to_json().dump(2) + "\n"); }

  static OcrErrorModel load(const std::filesystem::path& path) {
    return from_json(nlohmann::json::parse(read_file(path)));
  }
};

// Turns alignments into a conditional error model. Probabilities are relative
// frequencies; characters never seen stay out of the tables.
inline OcrErrorModel extract_error_model(const std::vector<Alignment>& alignments) {
  if (alignments.empty()) throw Error("extract_error_model: no alignments");
  OcrErrorModel m;
  std::map<char32_t, uint64_t> occur;
  std::map<char32_t, std::map<char32_t, uint64_t>> sub_counts;
  std::map<char32_t, uint64_t> del_counts;
  std::map<char32_t, uint64_t> ins_counts;
  for (const auto& a : alignments) {
    uint64_t consumed = 0;
    for (const auto& op : a.ops) {
      switch (op.kind) {
        case OpKind::Match:
          ++occur[op.clean_char];
          ++consumed;
          break;
        case OpKind::Substitute:
          ++occur[op.clean_char];
          ++consumed;
          ++sub_counts[op.clean_char][op.ocr_char];
          ++m.substitutions;
          break;
        case OpKind::Delete:
          ++occur[op.clean_char];
          ++consumed;
          ++del_counts[op.clean_char];
          ++m.deletions;
          break;
        case OpKind::Insert:
          ++ins_counts[op.ocr_char];
          ++m.insertions;
          break;
      }
    }
    if (consumed > 0) m.interior_gaps += consumed - 1;
  }
  for (const auto& [c, n] : occur) m.clean_chars += n;
  if (m.clean_chars == 0) throw Error("extract_error_model: alignments consume no clean text");
  for (const auto& [c, row] : sub_counts)
    for (const auto& [x, n] : row)
      m.sub[c][x] = static_cast<double>(n) / static_cast<double>(occur.at(c));
  for (const auto& [c, n] : del_counts)
    m.del[c] = static_cast<double>(n) / static_cast<double>(occur.at(c));
  if (m.insertions > 0)
    for (const auto& [c, n] : ins_counts)
      m.ins_dist[c] = static_cast<double>(n) / static_cast<double>(m.insertions);
  m.ins_rate = m.interior_gaps > 0
                   ? static_cast<double>(m.insertions) / static_cast<double>(m.interior_gaps)
                   : 0.0;
  m.base_cer = static_cast<double>(m.substitutions + m.deletions + m.insertions) /
               static_cast<double>(m.clean_chars);
  return m;
}

// Linearly rescales all error probabilities so the expected rate hits
// target_cer. Rows whose scaled mass would pass 1 are renormalized to 1 and
// reported through warnings.
inline OcrErrorModel scale_error_model(const OcrErrorModel& model, double target_cer,
                                       std::vector<std::string>* warnings = nullptr) {
  if (target_cer < 0) throw Error("scale_error_model: target_cer must be non-negative");
  if (model.base_cer <= 0) {
    if (target_cer > 0) throw Error("scale_error_model: base_cer is zero; nothing to scale");
    return model;
  }
  const double s = target_cer / model.base_cer;
  OcrErrorModel out = model;
  out.base_cer = target_cer;
  for (auto& [c, row] : out.sub)
    for (auto& [x, p] : row) p *= s;
  for (auto& [c, p] : out.del) p *= s;
  for (const auto& [c, row] : out.sub) {
    double mass = 0;
    for (const auto& [x, p] : row) mass += p;
    const auto dit = out.del.find(c);
    if (dit != out.del.end()) mass += dit->second;
    if (mass > 1.0) {
      const double f = 1.0 / mass;
      for (auto& [x, p] : out.sub[c]) p *= f;
      if (dit != out.del.end()) dit->second *= f;
      if (warnings)
        warnings->push_back("character '" + encode_utf8(c) + "' saturated; row renormalized to 1");
    }
  }
  for (auto& [c, p] : out.del) {
    if (out.sub.count(c)) continue;  // handled above
    if (p > 1.0) {
      p = 1.0;
      if (warnings)
        warnings->push_back("character '" + encode_utf8(c) + "' saturated; deletion clamped to 1");
    }
  }
  out.ins_rate *= s;
  if (out.ins_rate > 1.0) {
    out.ins_rate = 1.0;
    if (warnings) warnings->push_back("insertion rate saturated; clamped to 1");
  }
  return out;
}

namespace detail {

// Draws a key from a cumulative walk over an ordered map. u must be below the
// total mass.
inline char32_t pick_from(const std::map<char32_t, double>& dist, double u) {
  double cum = 0;
  for (const auto& [c, p] : dist) {
    cum += p;
    if (u < cum) return c;
  }
  return dist.rbegin()->first;  // numeric slack lands on the last key
}

}  // namespace detail

struct InjectResult {
  std::string text;
  uint64_t n_sub = 0;
  uint64_t n_ins = 0;
  uint64_t n_del = 0;
};

// Applies an already-scaled error model to clean text. One uniform draw per
// character decides substitute/delete/keep via cumulative bands; each
// interior gap of the original text may receive one insertion.
inline InjectResult inject_scaled_model(std::string_view text, const OcrErrorModel& model,
                                        Rng& rng) {
  const std::u32string chars = decode_utf8(text);
  InjectResult result;
  std::u32string out;
  out.reserve(chars.size() + chars.size() / 8);
  for (size_t i = 0; i < chars.size(); ++i) {
    if (i > 0 && !model.ins_dist.empty() && rng.uniform() < model.ins_rate) {
      out.push_back(detail::pick_from(model.ins_dist, rng.uniform()));
      ++result.n_ins;
    }
    const char32_t c = chars[i];
    double sub_mass = 0;
    const auto sit = model.sub.find(c);
    if (sit != model.sub.end())
      for (const auto& [x, p] : sit->second) sub_mass += p;
    const auto dit = model.del.find(c);
    const double del_mass = dit != model.del.end() ? dit->second : 0.0;
    const double u = rng.uniform();
    if (u < sub_mass) {
      out.push_back(detail::pick_from(sit->second, u));
      ++result.n_sub;
    } else if (u < sub_mass + del_mass) {
      ++result.n_del;
    } else {
      out.push_back(c);
    }
  }
  result.text = encode_utf8(out);
  return result;
}

// Scales the model to target_p, then injects. Clamp warnings surface through
// the optional sink.
inline InjectResult inject_model(std::string_view text, const OcrErrorModel& model,
                                 double target_p, Rng& rng,
                                 std::vector<std::string>* warnings = nullptr) {
  return inject_scaled_model(text, scale_error_model(model, target_p, warnings), rng);
}

}  // namespace ocrsynth
