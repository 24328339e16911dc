#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ocrsynth/common.hpp"
#include "ocrsynth/rng.hpp"
#include "ocrsynth/utf8.hpp"

namespace ocrsynth {

// Character inventory of a corpus. counts holds every non-whitespace
// character exactly; the alphabet keeps only those at or above min_count.
struct CharsetProfile {
  std::string language;
  uint64_t min_count = 1;
  std::map<char32_t, uint64_t> counts;

  std::vector<char32_t> alphabet() const {
    std::vector<char32_t> out;
    out.reserve(counts.size());
    for (const auto& [c, n] : counts)
      if (n >= min_count) out.push_back(c);
    return out;
  }

  bool in_alphabet(char32_t c) const {
    const auto it = counts.find(c);
    return it != counts.end() && it->second >= min_count;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["language"] = language;
    j["min_count"] = min_count;
    auto counts_j = nlohmann::ordered_json::object();
    for (const auto& [c, n] : counts) counts_j[encode_utf8(c)] = n;
    j["counts"] = counts_j;
    return j;
  }

  static CharsetProfile from_json(const nlohmann::json& j) {
    CharsetProfile p;
    p.language = j.at("language").get<std::string>();
    p.min_count = j.at("min_count").get<uint64_t>();
    for (const auto& [key, val] : j.at("counts").items()) {
      const std::u32string cs = decode_utf8(key);
      if (cs.size() != 1) throw Error("charset profile: key is not a single character: " + key);
      p.counts[cs[0]] = val.get<uint64_t>();
    }
    return p;
  }
};

inline CharsetProfile build_charset_profile(std::string_view text, std::string language,
                                            uint64_t min_count = 1) {
  CharsetProfile p;
  p.language = std::move(language);
  p.min_count = min_count;
  size_t i = 0;
  while (i < text.size()) {
    const char32_t c = decode_utf8_at(text, i);
    if (!is_space(c)) ++p.counts[c];
  }
  return p;
}

struct Chunk {
  uint64_t id = 0;
  std::string text;
  size_t char_len = 0;

  Chunk() = default;
  Chunk(uint64_t id_, std::string text_)
      : id(id_), text(std::move(text_)), char_len(char_count(text)) {}

  bool operator==(const Chunk&) const = default;
};

// Character budget per chunk; scripts with wide or stacked glyphs get less.
inline size_t default_chunk_limit(std::string_view language) {
  if (language == "ru" || language == "rus") return 140;
  if (language == "te" || language == "tel") return 90;
  return 230;
}

namespace detail {

inline bool is_sentence_terminator(char32_t c) {
  return c == U'.' || c == U'!' || c == U'?' || c == U'…' || c == U'。' ||
         c == U'॥' || c == U'\n';
}

inline std::u32string trim_spaces(const std::u32string& s) {
  size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

// Splits on sentence terminators; a run of terminators stays with its
// sentence so punctuation clusters are never torn apart.
inline std::vector<std::u32string> split_sentences(const std::u32string& text) {
  std::vector<std::u32string> out;
  std::u32string cur;
  size_t i = 0;
  while (i < text.size()) {
    cur.push_back(text[i]);
    if (is_sentence_terminator(text[i])) {
      while (i + 1 < text.size() && is_sentence_terminator(text[i + 1])) {
        cur.push_back(text[i + 1]);
        ++i;
      }
      const std::u32string t = trim_spaces(cur);
      if (!t.empty()) out.push_back(t);
      cur.clear();
    }
    ++i;
  }
  const std::u32string t = trim_spaces(cur);
  if (!t.empty()) out.push_back(t);
  return out;
}

}  // namespace detail

// Greedy sentence packing up to a character limit. Sentences are joined with
// a single space; a lone sentence longer than the limit is hard-split.
inline std::vector<Chunk> chunk_corpus(std::string_view text, size_t limit) {
  if (limit == 0) throw Error("chunk_corpus: limit must be positive");
  const std::vector<std::u32string> sentences = detail::split_sentences(decode_utf8(text));
  std::vector<Chunk> chunks;
  std::u32string cur;
  auto flush = [&]() {
    if (cur.empty()) return;
    chunks.emplace_back(chunks.size(), encode_utf8(cur));
    cur.clear();
  };
  for (const auto& sentence : sentences) {
    std::u32string s = sentence;
    if (s.size() > limit) {
      flush();
      size_t off = 0;
      while (s.size() - off > limit) {
        chunks.emplace_back(chunks.size(), encode_utf8(std::u32string_view(s).substr(off, limit)));
        off += limit;
      }
      cur = detail::trim_spaces(s.substr(off));
      continue;
    }
    if (cur.empty()) {
      cur = std::move(s);
    } else if (cur.size() + 1 + s.size() <= limit) {
      cur.push_back(U' ');
      cur += s;
    } else {
      flush();
      cur = std::move(s);
    }
  }
  flush();
  return chunks;
}

// Disjoint partitions of a chunk set. The error-extraction slice feeds the
// real-world error model; train/val/test cover the remainder 8:1:1.
struct CorpusSplit {
  uint64_t seed = 0;
  std::vector<Chunk> extract;
  std::vector<Chunk> train;
  std::vector<Chunk> val;
  std::vector<Chunk> test;
};

inline CorpusSplit split_corpus(std::vector<Chunk> chunks, uint64_t seed) {
  std::sort(chunks.begin(), chunks.end(),
            [](const Chunk& a, const Chunk& b) { return a.id < b.id; });
  Rng rng(seed);
  for (size_t i = chunks.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(rng.below(i));
    std::swap(chunks[i - 1], chunks[j]);
  }
  const size_t n = chunks.size();
  const size_t n_extract = static_cast<size_t>(std::llround(static_cast<double>(n) / 5.0));
  const size_t rest = n - n_extract;
  const size_t n_val = static_cast<size_t>(std::llround(static_cast<double>(rest) / 10.0));
  const size_t n_test = n_val;
  const size_t n_train = rest - n_val - n_test;

  CorpusSplit split;
  split.seed = seed;
  auto take = [&](size_t from, size_t count) {
    return std::vector<Chunk>(chunks.begin() + static_cast<std::ptrdiff_t>(from),
                              chunks.begin() + static_cast<std::ptrdiff_t>(from + count));
  };
  split.extract = take(0, n_extract);
  split.train = take(n_extract, n_train);
  split.val = take(n_extract + n_train, n_val);
  split.test = take(n_extract + n_train + n_val, n_test);
  return split;
}

// k copies of every chunk. k == 1 returns the input unchanged; extra copies
// get fresh ids above the current maximum, one pass at a time.
inline std::vector<Chunk> augment(const std::vector<Chunk>& chunks, unsigned k) {
  if (k == 0) throw Error("augment: k must be positive");
  std::vector<Chunk> out = chunks;
  if (k == 1 || chunks.empty()) return out;
  uint64_t next_id = 0;
  for (const auto& c : chunks) next_id = std::max(next_id, c.id + 1);
  out.reserve(chunks.size() * k);
  for (unsigned pass = 1; pass < k; ++pass) {
    for (const auto& c : chunks) {
      Chunk copy = c;
      copy.id = next_id++;
      out.push_back(std::move(copy));
    }
  }
  return out;
}

// Chunk files hold one chunk per line; the zero-based line index is the id.
inline void write_chunks(const std::vector<Chunk>& chunks, const std::filesystem::path& path) {
  std::string data;
  for (const auto& c : chunks) {
    if (c.text.find('\n') != std::string::npos)
      throw Error("write_chunks: chunk " + std::to_string(c.id) + " contains a newline");
    data += c.text;
    data += '\n';
  }
  write_file(path, data);
}

inline std::vector<Chunk> read_chunks(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  std::vector<Chunk> chunks;
  size_t start = 0;
  while (start < data.size()) {
    size_t end = data.find('\n', start);
    if (end == std::string::npos) end = data.size();
    std::string line = data.substr(start, end - start);
    if (line.empty()) {
      const bool trailing = end >= data.size() || data.find_first_not_of('\n', end) == std::string::npos;
      if (!trailing)
        throw Error("read_chunks: empty line " + std::to_string(chunks.size()) + " in " + path.string());
      break;
    }
    chunks.emplace_back(chunks.size(), std::move(line));
    start = end + 1;
  }
  return chunks;
}

}  // namespace ocrsynth
