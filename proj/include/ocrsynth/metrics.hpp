#pragma once

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ocrsynth/common.hpp"
#include "ocrsynth/utf8.hpp"

namespace ocrsynth {

// Levenshtein distance (unit costs) over sequences of comparable elements.
template <typename Seq>
uint64_t edit_distance_seq(const Seq& a, const Seq& b) {
  size_t begin = 0, end_a = a.size(), end_b = b.size();
  while (begin < end_a && begin < end_b && a[begin] == b[begin]) ++begin;
  while (end_a > begin && end_b > begin && a[end_a - 1] == b[end_b - 1]) {
    --end_a;
    --end_b;
  }
  const size_t la = end_a - begin;
  const size_t lb = end_b - begin;
  if (la == 0) return lb;
  if (lb == 0) return la;

  std::vector<uint64_t> prev(lb + 1), cur(lb + 1);
  for (size_t j = 0; j <= lb; ++j) prev[j] = j;
  for (size_t i = 1; i <= la; ++i) {
    cur[0] = i;
    const auto& ca = a[begin + i - 1];
    for (size_t j = 1; j <= lb; ++j) {
      const uint64_t sub = prev[j - 1] + (ca == b[begin + j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[lb];
}

// Distance over Unicode scalars of two UTF-8 strings.
inline uint64_t edit_distance(std::string_view a, std::string_view b) {
  return edit_distance_seq(decode_utf8(a), decode_utf8(b));
}

// Character error rate: edits to turn hyp into ref, per reference character.
inline double cer(std::string_view ref, std::string_view hyp) {
  const std::u32string r = decode_utf8(ref);
  if (r.empty()) throw Error("cer: reference must be non-empty");
  return static_cast<double>(edit_distance_seq(r, decode_utf8(hyp))) /
         static_cast<double>(r.size());
}

inline std::vector<std::u32string> tokenize(std::string_view s) {
  std::vector<std::u32string> tokens;
  std::u32string cur;
  for (char32_t c : decode_utf8(s)) {
    if (is_space(c)) {
      if (!cur.empty()) tokens.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

// Word error rate over whitespace-delimited tokens. May exceed 1.
inline double wer(std::string_view ref, std::string_view hyp) {
  const auto r = tokenize(ref);
  if (r.empty()) throw Error("wer: reference has no tokens");
  return static_cast<double>(edit_distance_seq(r, tokenize(hyp))) /
         static_cast<double>(r.size());
}

// Sentence-level outcome of a correction pass. Zero means the corrected text
// matches the clean text exactly and takes precedence over the comparisons.
enum class ChangeCategory { Zero, Increased, Decreased, Equal };

inline ChangeCategory categorize(uint64_t edits_before, uint64_t edits_after) {
  if (edits_after == 0) return ChangeCategory::Zero;
  if (edits_after > edits_before) return ChangeCategory::Increased;
  if (edits_after < edits_before) return ChangeCategory::Decreased;
  return ChangeCategory::Equal;
}

inline const char* to_string(ChangeCategory c) {
  switch (c) {
    case ChangeCategory::Zero: return "zero";
    case ChangeCategory::Increased: return "increased";
    case ChangeCategory::Decreased: return "decreased";
    default: return "equal";
  }
}

struct EvalTriple {
  std::string clean;
  std::string noisy;
  std::string corrected;
};

struct EvalRates {
  double cer = 0.0;
  double wer = 0.0;
};

struct EvalReport {
  size_t n = 0;
  EvalRates before;
  EvalRates after;
  uint64_t zero = 0;
  uint64_t increased = 0;
  uint64_t decreased = 0;
  uint64_t equal = 0;

  nlohmann::ordered_json to_json() const {
    return nlohmann::ordered_json{
        {"before", {{"cer", before.cer}, {"wer", before.wer}}},
        {"after", {{"cer", after.cer}, {"wer", after.wer}}},
        {"categories",
         {{"increased", increased}, {"decreased", decreased}, {"equal", equal}, {"zero", zero}}},
        {"n", n},
        {"conventions",
         {"cer and wer are micro-averaged: total edits over total reference length",
          "edit distance is Levenshtein over Unicode scalars with unit costs",
          "wer tokens are maximal runs of non-whitespace characters",
          "a corrected text equal to the clean text counts as zero regardless of the noisy text"}}};
  }

  std::string to_text() const {
    std::ostringstream ss;
    ss.setf(std::ios::fixed);
    ss.precision(6);
    auto pct = [&](uint64_t count) {
      return 100.0 * static_cast<double>(count) / static_cast<double>(n);
    };
    ss << "sentences evaluated: " << n << "\n"
       << "cer before/after: " << before.cer << " / " << after.cer << "\n"
       << "wer before/after: " << before.wer << " / " << after.wer << "\n";
    ss.precision(1);
    ss << "categories: increased=" << increased << " (" << pct(increased) << "%)"
       << " decreased=" << decreased << " (" << pct(decreased) << "%)"
       << " equal=" << equal << " (" << pct(equal) << "%)"
       << " zero=" << zero << " (" << pct(zero) << "%)\n";
    return ss.str();
  }

  // Category counts and percentages in bar-chart order.
  std::string category_bar_tsv() const {
    std::ostringstream ss;
    ss.setf(std::ios::fixed);
    ss.precision(4);
    ss << "category\tcount\tpercent\n";
    const std::pair<const char*, uint64_t> rows[] = {
        {"increased", increased}, {"decreased", decreased}, {"equal", equal}, {"zero", zero}};
    for (const auto& [name, count] : rows)
      ss << name << "\t" << count << "\t"
         << 100.0 * static_cast<double>(count) / static_cast<double>(n) << "\n";
    return ss.str();
  }
};

// Micro-averaged report over (clean, noisy, corrected) triples. The optional
// TSV sink receives one detail row per triple.
inline EvalReport build_report(const std::vector<EvalTriple>& triples,
                               std::string* tsv = nullptr) {
  if (triples.empty()) throw Error("build_report: no triples");
  EvalReport rep;
  rep.n = triples.size();
  uint64_t char_edits_before = 0, char_edits_after = 0, ref_chars = 0;
  uint64_t tok_edits_before = 0, tok_edits_after = 0, ref_tokens = 0;
  if (tsv) *tsv = "id\tcer_ocr\tcer_corrected\tcategory\n";
  for (size_t i = 0; i < triples.size(); ++i) {
    const auto& t = triples[i];
    const std::u32string ref = decode_utf8(t.clean);
    if (ref.empty()) throw Error("build_report: clean text " + std::to_string(i) + " is empty");
    const auto ref_toks = tokenize(t.clean);
    if (ref_toks.empty()) throw Error("build_report: clean text " + std::to_string(i) + " has no tokens");
    const uint64_t d_before = edit_distance_seq(ref, decode_utf8(t.noisy));
    const uint64_t d_after = edit_distance_seq(ref, decode_utf8(t.corrected));
    char_edits_before += d_before;
    char_edits_after += d_after;
    ref_chars += ref.size();
    tok_edits_before += edit_distance_seq(ref_toks, tokenize(t.noisy));
    tok_edits_after += edit_distance_seq(ref_toks, tokenize(t.corrected));
    ref_tokens += ref_toks.size();
    switch (categorize(d_before, d_after)) {
      case ChangeCategory::Zero: ++rep.zero; break;
      case ChangeCategory::Increased: ++rep.increased; break;
      case ChangeCategory::Decreased: ++rep.decreased; break;
      case ChangeCategory::Equal: ++rep.equal; break;
    }
    if (tsv) {
      std::ostringstream row;
      row.setf(std::ios::fixed);
      row.precision(6);
      row << i << "\t" << static_cast<double>(d_before) / static_cast<double>(ref.size())
          << "\t" << static_cast<double>(d_after) / static_cast<double>(ref.size()) << "\t"
          << to_string(categorize(d_before, d_after)) << "\n";
      *tsv += row.str();
    }
  }
  rep.before.cer = static_cast<double>(char_edits_before) / static_cast<double>(ref_chars);
  rep.after.cer = static_cast<double>(char_edits_after) / static_cast<double>(ref_chars);
  rep.before.wer = static_cast<double>(tok_edits_before) / static_cast<double>(ref_tokens);
  rep.after.wer = static_cast<double>(tok_edits_after) / static_cast<double>(ref_tokens);
  return rep;
}

}  // namespace ocrsynth
