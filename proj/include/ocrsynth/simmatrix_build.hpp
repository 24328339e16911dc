#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ocrsynth/common.hpp"
#include "ocrsynth/corpus.hpp"
#include "ocrsynth/features.hpp"
#include "ocrsynth/fonts.hpp"
#include "ocrsynth/parallel.hpp"
#include "ocrsynth/simmatrix.hpp"

namespace ocrsynth {

struct MatrixBuildParams {
  int canvas = 64;
  double margin = 0.125;
  int max_keypoints = 100;
  std::vector<std::string> detectors = {"orb", "sift"};
  bool keep_raw = false;
  unsigned jobs = 1;
  std::function<void(size_t done, size_t total)> progress;  // may be empty

  std::string digest() const {
    std::string s = std::to_string(canvas) + "|" + std::to_string(margin) + "|" +
                    std::to_string(max_keypoints);
    for (const auto& d : detectors) s += "|" + d;
    return hex64(fnv1a64(s));
  }
};

namespace detail {

// J/D for one glyph pair under one font; 0 when either glyph is unavailable,
// either keypoint set is empty, or nothing matches.
inline double font_term(const KeypointSet* a, const KeypointSet* b) {
  if (!a || !b || a->points.empty() || b->points.empty()) return 0.0;
  const MatchSet m = match_keypoints(*a, *b);
  if (m.pairs.empty()) return 0.0;
  return jaccard(m) / avg_distance(m);
}

}  // namespace detail

// S(i, j, q): J/D averaged over the font set. Standalone entry point; the
// build path below batches rendering and detection instead.
inline double pair_score(char32_t i, char32_t j, const std::string& detector, const FontSet& fonts,
                         int canvas = 64, double margin = 0.125, int max_keypoints = 100) {
  if (i == j) throw Error("pair_score: diagonal is undefined");
  double sum = 0;
  for (size_t f = 0; f < fonts.size(); ++f) {
    const auto ga = fonts.render_glyph(f, i, canvas, margin);
    const auto gb = fonts.render_glyph(f, j, canvas, margin);
    if (!ga || !gb) continue;
    const KeypointSet ka = detect_keypoints(detector, *ga, max_keypoints);
    const KeypointSet kb = detect_keypoints(detector, *gb, max_keypoints);
    sum += detail::font_term(&ka, &kb);
  }
  return sum / static_cast<double>(fonts.size());
}

// Builds the full directional matrix over the profile's alphabet. Rendering
// is serial (the rasterizer is shared state); detection and pair scoring fan
// out over jobs with results written by index, so output is identical for
// any worker count.
inline GlyphSimilarityMatrix build_similarity_matrix(const CharsetProfile& profile,
                                                     const FontSet& fonts,
                                                     const MatrixBuildParams& params = {}) {
  const std::vector<char32_t> alphabet = profile.alphabet();
  const size_t n = alphabet.size();
  if (n < 2) throw Error("build_similarity_matrix: alphabet must have at least 2 characters");
  if (params.detectors.empty()) throw Error("build_similarity_matrix: no detectors configured");
  for (const auto& d : params.detectors)
    detect_keypoints(d, GrayImage(32, 32), 0);  // unknown names fail before the build starts

  const size_t nf = fonts.size();
  const size_t nq = params.detectors.size();

  // Phase 1: rasters for every (character, font).
  std::vector<std::optional<GrayImage>> rasters(n * nf);
  bool any_ink = false;
  for (size_t c = 0; c < n; ++c)
    for (size_t f = 0; f < nf; ++f) {
      rasters[c * nf + f] = fonts.render_glyph(f, alphabet[c], params.canvas, params.margin);
      any_ink = any_ink || rasters[c * nf + f].has_value();
    }
  if (!any_ink) throw Error("build_similarity_matrix: no font renders any alphabet character");

  // Phase 2: keypoints for every available raster, per detector.
  std::vector<std::optional<KeypointSet>> keypoints(n * nf * nq);
  parallel_for(n * nf * nq, params.jobs, [&](size_t idx) {
    const size_t q = idx / (n * nf);
    const size_t rest = idx % (n * nf);
    if (!rasters[rest]) return;
    keypoints[idx] =
        detect_keypoints(params.detectors[q], *rasters[rest], params.max_keypoints);
  });

  // Phase 3: scores for unordered pairs; J and D are symmetric in the pair.
  std::vector<std::pair<size_t, size_t>> pair_index;
  pair_index.reserve(n * (n - 1) / 2);
  for (size_t a = 0; a < n; ++a)
    for (size_t b = a + 1; b < n; ++b) pair_index.emplace_back(a, b);
  std::vector<double> scores(pair_index.size() * nq, 0.0);
  std::atomic<size_t> done{0};
  parallel_for(pair_index.size(), params.jobs, [&](size_t p) {
    const auto [a, b] = pair_index[p];
    for (size_t q = 0; q < nq; ++q) {
      double sum = 0;
      for (size_t f = 0; f < nf; ++f) {
        const auto& ka = keypoints[q * n * nf + a * nf + f];
        const auto& kb = keypoints[q * n * nf + b * nf + f];
        sum += detail::font_term(ka ? &*ka : nullptr, kb ? &*kb : nullptr);
      }
      scores[p * nq + q] = sum / static_cast<double>(nf);
    }
    if (params.progress) params.progress(done.fetch_add(1) + 1, pair_index.size());
  });

  RawScores raw;
  for (size_t p = 0; p < pair_index.size(); ++p) {
    const auto [a, b] = pair_index[p];
    for (size_t q = 0; q < nq; ++q) {
      const double s = scores[p * nq + q];
      raw[params.detectors[q]][alphabet[a]][alphabet[b]] = s;
      raw[params.detectors[q]][alphabet[b]][alphabet[a]] = s;
    }
  }

  GlyphSimilarityMatrix m;
  m.alphabet = alphabet;
  m.detectors = params.detectors;
  m.fonts_digest = fonts.digest();
  m.params_digest = params.digest();
  m.rows = normalize_scores(raw, alphabet, params.detectors);
  if (params.keep_raw) m.raw = std::move(raw);
  return m;
}

}  // namespace ocrsynth
