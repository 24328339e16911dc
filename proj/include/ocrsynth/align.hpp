#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ocrsynth/common.hpp"
#include "ocrsynth/utf8.hpp"

namespace ocrsynth {

enum class OpKind { Match, Substitute, Delete, Insert };

// One edit step. Delete consumes a clean character, Insert produces an OCR
// character, Match and Substitute consume one of each.
struct Op {
  OpKind kind;
  char32_t clean_char = 0;
  char32_t ocr_char = 0;
};

struct Alignment {
  std::vector<Op> ops;

  uint64_t cost() const {
    uint64_t c = 0;
    for (const auto& op : ops)
      if (op.kind != OpKind::Match) ++c;
    return c;
  }
};

struct AlignParams {
  size_t min_anchor_len = 3;        // shortest word usable as an anchor
  size_t direct_threshold = 400;    // segments at or below run plain DP
  size_t full_dp_max_cells = 16'000'000;
  size_t band_half_width = 64;      // band margin beyond the length difference
  size_t band_max_cells = 512'000'000;
  int max_depth = 32;
};

namespace detail {

inline void emit_deletes(std::u32string_view a, std::vector<Op>& ops) {
  for (char32_t c : a) ops.push_back({OpKind::Delete, c, 0});
}

inline void emit_inserts(std::u32string_view b, std::vector<Op>& ops) {
  for (char32_t c : b) ops.push_back({OpKind::Insert, 0, c});
}

// Full DP with backtrace. Ties prefer Match, then Substitute, then Delete,
// then Insert.
inline void char_align_full(std::u32string_view a, std::u32string_view b,
                            std::vector<Op>& ops) {
  const size_t la = a.size(), lb = b.size();
  std::vector<uint8_t> back((la + 1) * (lb + 1));  // 0 diag, 1 up(del), 2 left(ins)
  std::vector<uint32_t> prev(lb + 1), cur(lb + 1);
  for (size_t j = 0; j <= lb; ++j) {
    prev[j] = static_cast<uint32_t>(j);
    back[j] = 2;
  }
  for (size_t i = 1; i <= la; ++i) {
    cur[0] = static_cast<uint32_t>(i);
    back[i * (lb + 1)] = 1;
    for (size_t j = 1; j <= lb; ++j) {
      const uint32_t diag = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      const uint32_t up = prev[j] + 1;
      const uint32_t left = cur[j - 1] + 1;
      uint32_t best = diag;
      uint8_t move = 0;
      if (up < best) { best = up; move = 1; }
      if (left < best) { best = left; move = 2; }
      cur[j] = best;
      back[i * (lb + 1) + j] = move;
    }
    std::swap(prev, cur);
  }
  std::vector<Op> rev;
  size_t i = la, j = lb;
  while (i > 0 || j > 0) {
    switch (back[i * (lb + 1) + j]) {
      case 0:
        rev.push_back({a[i - 1] == b[j - 1] ? OpKind::Match : OpKind::Substitute, a[i - 1], b[j - 1]});
        --i;
        --j;
        break;
      case 1:
        rev.push_back({OpKind::Delete, a[i - 1], 0});
        --i;
        break;
      default:
        rev.push_back({OpKind::Insert, 0, b[j - 1]});
        --j;
        break;
    }
  }
  ops.insert(ops.end(), rev.rbegin(), rev.rend());
}

// Substitutes along the diagonal, then deletes or inserts the tail. Used only
// when even a banded DP would not fit in memory.
inline void char_align_diagonal(std::u32string_view a, std::u32string_view b,
                                std::vector<Op>& ops) {
  const size_t common = std::min(a.size(), b.size());
  for (size_t i = 0; i < common; ++i)
    ops.push_back({a[i] == b[i] ? OpKind::Match : OpKind::Substitute, a[i], b[i]});
  emit_deletes(a.substr(common), ops);
  emit_inserts(b.substr(common), ops);
}

// Banded DP around the straight-line diagonal. Valid for any width; optimal
// when the true distance stays inside the band.
inline void char_align_banded(std::u32string_view a, std::u32string_view b,
                              const AlignParams& params, std::vector<Op>& ops) {
  const size_t la = a.size(), lb = b.size();
  const size_t diff = la > lb ? la - lb : lb - la;
  const size_t w = params.band_half_width + diff;
  const size_t stride = 2 * w + 1;
  if ((la + 1) * stride > params.band_max_cells) {
    char_align_diagonal(a, b, ops);
    return;
  }
  constexpr uint32_t kInf = 0x3FFFFFFF;
  auto center = [&](size_t i) -> size_t {
    return static_cast<size_t>(std::llround(static_cast<double>(i) * static_cast<double>(lb) /
                                            static_cast<double>(la)));
  };
  auto j_lo = [&](size_t i) -> size_t {
    const size_t c = center(i);
    return c > w ? c - w : 0;
  };
  auto j_hi = [&](size_t i) -> size_t { return std::min(lb, center(i) + w); };

  std::vector<uint8_t> back((la + 1) * stride, 3);  // 3 marks unreachable
  std::vector<uint32_t> prev(stride, kInf), cur(stride, kInf);
  for (size_t j = j_lo(0); j <= j_hi(0); ++j) {
    prev[j - j_lo(0)] = static_cast<uint32_t>(j);
    back[j - j_lo(0)] = 2;
  }
  for (size_t i = 1; i <= la; ++i) {
    std::fill(cur.begin(), cur.end(), kInf);
    const size_t lo = j_lo(i), hi = j_hi(i);
    const size_t plo = j_lo(i - 1), phi = j_hi(i - 1);
    auto prev_at = [&](size_t j) -> uint32_t {
      return (j >= plo && j <= phi) ? prev[j - plo] : kInf;
    };
    for (size_t j = lo; j <= hi; ++j) {
      uint32_t best = kInf;
      uint8_t move = 3;
      if (j > 0) {
        const uint32_t diag = prev_at(j - 1);
        if (diag < kInf) {
          const uint32_t cost = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
          if (cost < best) { best = cost; move = 0; }
        }
      }
      const uint32_t up = prev_at(j);
      if (up < kInf && up + 1 < best) { best = up + 1; move = 1; }
      if (j > lo) {
        const uint32_t left = cur[j - 1 - lo];
        if (left < kInf && left + 1 < best) { best = left + 1; move = 2; }
      }
      if (j == 0 && move == 3) { best = static_cast<uint32_t>(i); move = 1; }
      cur[j - lo] = best;
      back[i * stride + (j - lo)] = move;
    }
    std::swap(prev, cur);
  }

  std::vector<Op> rev;
  size_t i = la, j = lb;
  while (i > 0 || j > 0) {
    const uint8_t move = back[i * stride + (j - j_lo(i))];
    if (move == 0) {
      rev.push_back({a[i - 1] == b[j - 1] ? OpKind::Match : OpKind::Substitute, a[i - 1], b[j - 1]});
      --i;
      --j;
    } else if (move == 1) {
      rev.push_back({OpKind::Delete, a[i - 1], 0});
      --i;
    } else if (move == 2) {
      rev.push_back({OpKind::Insert, 0, b[j - 1]});
      --j;
    } else {
      throw Error("char_align_banded: backtrace left the band");
    }
  }
  ops.insert(ops.end(), rev.rbegin(), rev.rend());
}

inline void char_align(std::u32string_view a, std::u32string_view b,
                       const AlignParams& params, std::vector<Op>& ops) {
  if (a.empty()) { emit_inserts(b, ops); return; }
  if (b.empty()) { emit_deletes(a, ops); return; }
  if ((a.size() + 1) * (b.size() + 1) <= params.full_dp_max_cells)
    char_align_full(a, b, ops);
  else
    char_align_banded(a, b, params, ops);
}

struct TokenRef {
  size_t begin = 0;
  size_t len = 0;
};

inline std::vector<TokenRef> tokens_of(std::u32string_view s) {
  std::vector<TokenRef> out;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    const size_t begin = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > begin) out.push_back({begin, i - begin});
  }
  return out;
}

struct AnchorPair {
  size_t a_begin = 0;
  size_t b_begin = 0;
  size_t len = 0;
};

// Words that occur exactly once in each text, kept in the longest chain that
// preserves order on both sides (longest increasing subsequence).
inline std::vector<AnchorPair> find_anchors(std::u32string_view a, std::u32string_view b,
                                            size_t min_len) {
  struct Occurrence {
    size_t count = 0;
    size_t begin = 0;
  };
  auto survey = [&](std::u32string_view s) {
    std::unordered_map<std::u32string, Occurrence> map;
    for (const auto& t : tokens_of(s)) {
      if (t.len < min_len) continue;
      auto& occ = map[std::u32string(s.substr(t.begin, t.len))];
      ++occ.count;
      occ.begin = t.begin;
    }
    return map;
  };
  const auto in_a = survey(a);
  const auto in_b = survey(b);

  std::vector<AnchorPair> candidates;
  for (const auto& [word, occ_a] : in_a) {
    if (occ_a.count != 1) continue;
    const auto it = in_b.find(word);
    if (it == in_b.end() || it->second.count != 1) continue;
    candidates.push_back({occ_a.begin, it->second.begin, word.size()});
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const AnchorPair& x, const AnchorPair& y) { return x.a_begin < y.a_begin; });

  // Longest strictly increasing subsequence over b positions.
  std::vector<size_t> tails;           // candidate indices, smallest tail first
  std::vector<size_t> parent(candidates.size(), SIZE_MAX);
  for (size_t i = 0; i < candidates.size(); ++i) {
    const size_t key = candidates[i].b_begin;
    size_t lo = 0, hi = tails.size();
    while (lo < hi) {
      const size_t mid = (lo + hi) / 2;
      if (candidates[tails[mid]].b_begin < key)
        lo = mid + 1;
      else
        hi = mid;
    }
    parent[i] = lo > 0 ? tails[lo - 1] : SIZE_MAX;
    if (lo == tails.size())
      tails.push_back(i);
    else
      tails[lo] = i;
  }
  std::vector<AnchorPair> chain;
  if (!tails.empty()) {
    for (size_t i = tails.back(); i != SIZE_MAX; i = parent[i]) chain.push_back(candidates[i]);
    std::reverse(chain.begin(), chain.end());
  }
  return chain;
}

inline void align_rec(std::u32string_view a, std::u32string_view b,
                      const AlignParams& params, int depth, std::vector<Op>& ops) {
  if (a.empty() || b.empty() ||
      std::max(a.size(), b.size()) <= params.direct_threshold ||
      depth >= params.max_depth) {
    char_align(a, b, params, ops);
    return;
  }
  const auto anchors = find_anchors(a, b, params.min_anchor_len);
  if (anchors.empty()) {
    char_align(a, b, params, ops);
    return;
  }
  size_t prev_a = 0, prev_b = 0;
  for (const auto& anchor : anchors) {
    align_rec(a.substr(prev_a, anchor.a_begin - prev_a),
              b.substr(prev_b, anchor.b_begin - prev_b), params, depth + 1, ops);
    for (size_t k = 0; k < anchor.len; ++k) {
      const char32_t c = a[anchor.a_begin + k];
      ops.push_back({OpKind::Match, c, c});
    }
    prev_a = anchor.a_begin + anchor.len;
    prev_b = anchor.b_begin + anchor.len;
  }
  align_rec(a.substr(prev_a), b.substr(prev_b), params, depth + 1, ops);
}

}  // namespace detail

// Aligns clean text against its OCR reading. Unique shared words pin the
// texts together; the gaps between anchors are solved recursively, character
// DP at the bottom.
inline Alignment align(std::string_view clean, std::string_view ocr,
                       const AlignParams& params = {}) {
  if (clean.empty() || ocr.empty()) throw Error("align: both texts must be non-empty");
  const std::u32string a = decode_utf8(clean);
  const std::u32string b = decode_utf8(ocr);
  Alignment result;
  result.ops.reserve(std::max(a.size(), b.size()));
  detail::align_rec(a, b, params, 0, result.ops);
  return result;
}

// Applies ops to the clean text and returns the reconstructed OCR text.
// Throws if the ops do not consume the clean text exactly.
inline std::string replay(std::string_view clean, const std::vector<Op>& ops) {
  const std::u32string a = decode_utf8(clean);
  std::u32string out;
  size_t i = 0;
  for (const auto& op : ops) {
    switch (op.kind) {
      case OpKind::Match:
      case OpKind::Substitute:
        if (i >= a.size() || a[i] != op.clean_char)
          throw Error("replay: ops do not match the clean text");
        out.push_back(op.kind == OpKind::Match ? op.clean_char : op.ocr_char);
        ++i;
        break;
      case OpKind::Delete:
        if (i >= a.size() || a[i] != op.clean_char)
          throw Error("replay: ops do not match the clean text");
        ++i;
        break;
      case OpKind::Insert:
        out.push_back(op.ocr_char);
        break;
    }
  }
  if (i != a.size()) throw Error("replay: ops do not consume the clean text");
  return encode_utf8(out);
}

}  // namespace ocrsynth
