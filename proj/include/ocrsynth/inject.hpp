#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ocrsynth/common.hpp"
#include "ocrsynth/corpus.hpp"
#include "ocrsynth/error_model.hpp"
#include "ocrsynth/parallel.hpp"
#include "ocrsynth/rng.hpp"
#include "ocrsynth/simmatrix.hpp"
#include "ocrsynth/utf8.hpp"

namespace ocrsynth {

// Relative weight of substitutions, insertions and deletions among injected
// errors. The default 5:1:1 splits a target rate p into bands of (5/7)p
// substitution, (1/7)p deletion per character, and (1/7)p insertion per gap.
struct OpRatio {
  double sub = 5;
  double ins = 1;
  double del = 1;

  void validate() const {
    if (sub <= 0 || ins <= 0 || del <= 0) throw Error("op ratio components must be positive");
  }
  double total() const { return sub + ins + del; }
};

struct GenerationConfig {
  std::string method;  // random | image | realworld | glyph
  double p_lo = 0.0;   // percent
  double p_hi = 15.0;  // percent
  OpRatio ratio;
  uint64_t master_seed = 0;
  unsigned augmentation = 1;

  void validate() const {
    if (method != "random" && method != "image" && method != "realworld" && method != "glyph")
      throw Error("unknown generation method: " + method);
    if (!(0.0 <= p_lo && p_lo <= p_hi && p_hi <= 100.0))
      throw Error("p_range must satisfy 0 <= lo <= hi <= 100");
    ratio.validate();
    if (augmentation == 0) throw Error("augmentation factor must be positive");
  }

  nlohmann::ordered_json to_json() const {
    return nlohmann::ordered_json{{"method", method},
                                  {"p_range", {p_lo, p_hi}},
                                  {"op_ratio", {ratio.sub, ratio.ins, ratio.del}},
                                  {"master_seed", master_seed},
                                  {"augmentation", augmentation}};
  }

  std::string digest() const { return hex64(fnv1a64(to_json().dump())); }
};

namespace detail {

// Uniform alphabet character, excluding `self` when it is in the alphabet.
inline char32_t uniform_replacement(const std::vector<char32_t>& alphabet, char32_t self,
                                    Rng& rng) {
  const auto it = std::lower_bound(alphabet.begin(), alphabet.end(), self);
  if (it != alphabet.end() && *it == self) {
    if (alphabet.size() < 2) return self;  // nothing else to pick
    const size_t self_idx = static_cast<size_t>(it - alphabet.begin());
    size_t idx = static_cast<size_t>(rng.below(alphabet.size() - 1));
    if (idx >= self_idx) ++idx;
    return alphabet[idx];
  }
  return alphabet[static_cast<size_t>(rng.below(alphabet.size()))];
}

// Shared skeleton of Methods 1 and 4. Draw order is fixed: one band draw per
// character (plus one replacement draw on substitution), then, while
// assembling survivors, one draw per interior gap (plus one character draw
// per realized insertion).
template <typename PickReplacement>
InjectResult inject_banded(std::string_view text, double p, const OpRatio& ratio,
                           const std::vector<char32_t>& alphabet, Rng& rng,
                           PickReplacement&& pick) {
  if (p < 0.0 || p > 0.15) throw Error("target rate p must be in [0, 0.15]");
  if (alphabet.empty()) throw Error("alphabet is empty");
  const std::u32string chars = decode_utf8(text);
  const double denom = ratio.total();
  const double sub_band = p * ratio.sub / denom;
  const double del_band = sub_band + p * ratio.del / denom;
  const double ins_p = p * ratio.ins / denom;

  enum class Fate : uint8_t { Keep, Sub, Del };
  std::vector<std::pair<Fate, char32_t>> fates(chars.size());
  for (size_t i = 0; i < chars.size(); ++i) {
    const double u = rng.uniform();
    if (u < sub_band)
      fates[i] = {Fate::Sub, pick(chars[i], rng)};
    else if (u < del_band)
      fates[i] = {Fate::Del, 0};
    else
      fates[i] = {Fate::Keep, chars[i]};
  }

  InjectResult result;
  std::u32string out;
  out.reserve(chars.size() + 8);
  bool have_prev_survivor = false;
  for (size_t i = 0; i < chars.size(); ++i) {
    if (fates[i].first == Fate::Del) {
      ++result.n_del;
      continue;
    }
    if (have_prev_survivor && rng.uniform() < ins_p) {
      out.push_back(uniform_replacement(alphabet, 0xFFFFFFFF, rng));
      ++result.n_ins;
    }
    out.push_back(fates[i].second);
    if (fates[i].first == Fate::Sub) ++result.n_sub;
    have_prev_survivor = true;
  }
  result.text = encode_utf8(out);
  return result;
}

}  // namespace detail

// Method 1: uniform random injection at rate p over the profile alphabet.
inline InjectResult inject_random(std::string_view text, const CharsetProfile& profile, double p,
                                  Rng& rng, const OpRatio& ratio = {}) {
  ratio.validate();
  const std::vector<char32_t> alphabet = profile.alphabet();
  return detail::inject_banded(text, p, ratio, alphabet, rng, [&](char32_t c, Rng& r) {
    return detail::uniform_replacement(alphabet, c, r);
  });
}

// Method 4: like Method 1, but the replacement for character i is sampled
// proportionally to its similarity row. Rows that are absent (collected into
// missing_chars) or all-zero fall back to uniform alphabet sampling.
inline InjectResult inject_glyph(std::string_view text, const GlyphSimilarityMatrix& matrix,
                                 const CharsetProfile& profile, double p, Rng& rng,
                                 const OpRatio& ratio = {},
                                 std::set<char32_t>* missing_chars = nullptr) {
  ratio.validate();
  const std::vector<char32_t> alphabet = profile.alphabet();
  return detail::inject_banded(text, p, ratio, alphabet, rng, [&](char32_t c, Rng& r) {
    const auto* row = matrix.find_row(c);
    if (!row) {
      if (missing_chars) missing_chars->insert(c);
      return detail::uniform_replacement(alphabet, c, r);
    }
    double total = 0;
    for (const auto& [j, w] : *row) total += w;
    if (total <= 0) return detail::uniform_replacement(alphabet, c, r);
    const double u = r.uniform() * total;
    double cum = 0;
    for (const auto& [j, w] : *row) {
      cum += w;
      if (u < cum) return j;
    }
    return row->back().first;  // numeric slack lands on the last entry
  });
}

struct PairRecord {
  uint64_t id = 0;
  std::string clean;
  std::string noisy;
  double target_p = 0.0;  // percent; NaN for the image method
  uint64_t seed_used = 0;
  bool failed = false;
};

struct ParallelCorpus {
  std::string method;
  std::string config_digest;
  std::vector<PairRecord> pairs;
  uint64_t n_sub = 0;
  uint64_t n_ins = 0;
  uint64_t n_del = 0;

  std::string to_jsonl() const {
    std::string out;
    for (const auto& p : pairs) {
      nlohmann::ordered_json rec{{"id", p.id},           {"clean", p.clean},
                                 {"noisy", p.noisy},     {"target_p", p.target_p},
                                 {"seed", p.seed_used},  {"method", method}};
      if (std::isnan(p.target_p)) rec["target_p"] = nullptr;
      if (p.failed) rec["failed"] = true;
      out += rec.dump();
      out += '\n';
    }
    return out;
  }

  void write_jsonl(const std::filesystem::path& path) const { write_file(path, to_jsonl()); }

  // Aligned clean/noisy text files plus a TSV manifest. Newlines inside noisy
  // texts (possible with OCR output) are flattened to spaces to keep the
  // files line-aligned; the JSONL form preserves them exactly.
  void export_text(const std::filesystem::path& clean_path,
                   const std::filesystem::path& noisy_path,
                   const std::filesystem::path& tsv_path) const {
    std::string clean, noisy, tsv;
    tsv = "id\ttarget_p\tseed\tmethod\tfailed\n";
    for (const auto& p : pairs) {
      clean += p.clean;
      clean += '\n';
      std::string flat = p.noisy;
      for (auto& ch : flat)
        if (ch == '\n' || ch == '\r') ch = ' ';
      noisy += flat;
      noisy += '\n';
      std::ostringstream row;
      if (std::isnan(p.target_p))
        row << p.id << "\t-";
      else
        row << p.id << "\t" << p.target_p;
      row << "\t" << p.seed_used << "\t" << method << "\t" << (p.failed ? 1 : 0) << "\n";
      tsv += row.str();
    }
    write_file(clean_path, clean);
    write_file(noisy_path, noisy);
    write_file(tsv_path, tsv);
  }
};

// Runs the configured text-side injector over all chunks. Each chunk gets an
// independent seed derived from (master_seed, id), so output bytes do not
// depend on the worker count. The image method renders and OCRs instead; it
// lives in the imaging pipeline.
inline ParallelCorpus generate_dataset(const std::vector<Chunk>& chunks,
                                       const GenerationConfig& config,
                                       const CharsetProfile* profile,
                                       const GlyphSimilarityMatrix* matrix,
                                       const OcrErrorModel* model, unsigned jobs = 1,
                                       const std::function<void(const std::string&)>& log = {}) {
  config.validate();
  if (chunks.empty()) throw Error("generate_dataset: no chunks");
  if (config.method == "image")
    throw Error("generate_dataset: the image method runs through the imaging pipeline");
  if (config.method == "random" || config.method == "glyph") {
    if (!profile) throw Error("generate_dataset: method requires a charset profile");
    if (config.p_hi > 15.0)
      throw Error("generate_dataset: p_range upper bound above 15% is unsupported for method " +
                  config.method);
  }
  if (config.method == "glyph" && !matrix)
    throw Error("generate_dataset: glyph method requires a similarity matrix");
  if (config.method == "realworld" && !model)
    throw Error("generate_dataset: realworld method requires an error model");

  ParallelCorpus corpus;
  corpus.method = config.method;
  corpus.config_digest = config.digest();
  corpus.pairs.resize(chunks.size());
  std::vector<InjectResult> results(chunks.size());
  std::vector<std::set<char32_t>> missing(chunks.size());
  std::vector<std::vector<std::string>> clamp_warnings(chunks.size());

  parallel_for(chunks.size(), jobs, [&](size_t i) {
    const Chunk& chunk = chunks[i];
    const uint64_t seed = derive_seed(config.master_seed, chunk.id);
    Rng rng(seed);
    const double target_p = rng.uniform(config.p_lo, config.p_hi);
    const double p = target_p / 100.0;
    InjectResult r;
    if (config.method == "random")
      r = inject_random(chunk.text, *profile, p, rng, config.ratio);
    else if (config.method == "glyph")
      r = inject_glyph(chunk.text, *matrix, *profile, p, rng, config.ratio, &missing[i]);
    else
      r = inject_model(chunk.text, *model, p, rng, &clamp_warnings[i]);
    results[i] = std::move(r);
    corpus.pairs[i] = {chunk.id, chunk.text, std::move(results[i].text), target_p, seed, false};
  });

  std::set<char32_t> all_missing;
  std::set<std::string> all_clamps;
  for (size_t i = 0; i < chunks.size(); ++i) {
    corpus.n_sub += results[i].n_sub;
    corpus.n_ins += results[i].n_ins;
    corpus.n_del += results[i].n_del;
    all_missing.insert(missing[i].begin(), missing[i].end());
    all_clamps.insert(clamp_warnings[i].begin(), clamp_warnings[i].end());
  }
  if (log) {
    for (char32_t c : all_missing)
      log("character '" + encode_utf8(c) + "' has no similarity row; used uniform fallback");
    for (const auto& w : all_clamps) log(w);
  }
  return corpus;
}

}  // namespace ocrsynth
