#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <opencv2/features2d.hpp>

#include "ocrsynth/common.hpp"
#include "ocrsynth/cvmat.hpp"
#include "ocrsynth/raster.hpp"

namespace ocrsynth {

struct Keypoint {
  double x = 0;
  double y = 0;
  double size = 0;
  double angle = -1;
  double response = 0;
};

struct KeypointSet {
  std::string detector;
  int canvas_w = 0;
  int canvas_h = 0;
  std::vector<Keypoint> points;
  cv::Mat descriptors;   // one row per point
  bool binary = false;   // Hamming vs L2 descriptor space
};

struct MatchPair {
  size_t a = 0;
  size_t b = 0;
  double spatial_distance = 0;
};

struct MatchSet {
  std::vector<MatchPair> pairs;
  size_t n_a = 0;
  size_t n_b = 0;
};

using DetectorFn = std::function<KeypointSet(const GrayImage&, int max_keypoints)>;

namespace detail {

// Small glyph rasters starve patch-based descriptors at the borders; a white
// apron gives every keypoint a full sampling window. Coordinates are mapped
// back afterwards, so spatial distances are unaffected.
inline constexpr int kDetectPad = 24;

inline KeypointSet run_cv_detector(const std::string& name, const cv::Ptr<cv::Feature2D>& algo,
                                   const GrayImage& img, int max_keypoints) {
  cv::Mat padded;
  cv::copyMakeBorder(to_mat(img), padded, kDetectPad, kDetectPad, kDetectPad, kDetectPad,
                     cv::BORDER_CONSTANT, cv::Scalar(255));
  std::vector<cv::KeyPoint> kps;
  cv::Mat desc;
  algo->detectAndCompute(padded, cv::noArray(), kps, desc);

  std::vector<size_t> order(kps.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t i, size_t j) { return kps[i].response > kps[j].response; });
  if (max_keypoints > 0 && order.size() > static_cast<size_t>(max_keypoints))
    order.resize(static_cast<size_t>(max_keypoints));

  KeypointSet out;
  out.detector = name;
  out.canvas_w = img.width;
  out.canvas_h = img.height;
  out.binary = desc.empty() || desc.depth() == CV_8U;
  out.points.reserve(order.size());
  if (!desc.empty()) out.descriptors.create(static_cast<int>(order.size()), desc.cols, desc.type());
  for (size_t k = 0; k < order.size(); ++k) {
    const auto& kp = kps[order[k]];
    out.points.push_back({kp.pt.x - kDetectPad, kp.pt.y - kDetectPad, kp.size, kp.angle,
                          kp.response});
    if (!desc.empty()) desc.row(static_cast<int>(order[k])).copyTo(out.descriptors.row(static_cast<int>(k)));
  }
  return out;
}

inline std::map<std::string, DetectorFn>& detector_registry() {
  static std::map<std::string, DetectorFn> registry = [] {
    std::map<std::string, DetectorFn> r;
    r["orb"] = [](const GrayImage& img, int max_kp) {
      auto algo = cv::ORB::create(std::max(max_kp, 1), 1.2f, 4, 19, 0, 2, cv::ORB::HARRIS_SCORE,
                                  31, 10);
      return run_cv_detector("orb", algo, img, max_kp);
    };
    r["sift"] = [](const GrayImage& img, int max_kp) {
      auto algo = cv::SIFT::create(std::max(max_kp, 1), 3, 0.01, 20.0, 1.2);
      return run_cv_detector("sift", algo, img, max_kp);
    };
    r["akaze"] = [](const GrayImage& img, int max_kp) {
      auto algo = cv::AKAZE::create(cv::AKAZE::DESCRIPTOR_MLDB, 0, 3, 1e-5f, 2, 2);
      return run_cv_detector("akaze", algo, img, max_kp);
    };
    return r;
  }();
  return registry;
}

}  // namespace detail

inline void register_detector(const std::string& name, DetectorFn fn) {
  detail::detector_registry()[name] = std::move(fn);
}

inline std::vector<std::string> list_detectors() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : detail::detector_registry()) names.push_back(name);
  return names;
}

// Runs the named detector; keypoints come back sorted by response strength,
// capped at max_keypoints.
inline KeypointSet detect_keypoints(const std::string& detector, const GrayImage& img,
                                    int max_keypoints = 100) {
  if (img.width < 32 || img.height < 32)
    throw Error("detect_keypoints: image must be at least 32x32");
  const auto& registry = detail::detector_registry();
  const auto it = registry.find(detector);
  if (it == registry.end()) throw Error("detect_keypoints: unknown detector: " + detector);
  return it->second(img, max_keypoints);
}

struct MatchParams {
  int hamming_max = -1;     // binary acceptance threshold; -1 means bits/4
  double ratio = 0.8;       // two-sided ratio test for numeric descriptors
};

// Mutual-nearest-neighbor matching in descriptor space. Ties resolve to the
// lower index, so the result is symmetric and deterministic.
inline MatchSet match_keypoints(const KeypointSet& a, const KeypointSet& b,
                                const MatchParams& params = {}) {
  if (a.detector != b.detector)
    throw Error("match_keypoints: detector mismatch: " + a.detector + " vs " + b.detector);
  if (a.canvas_w != b.canvas_w || a.canvas_h != b.canvas_h)
    throw Error("match_keypoints: canvas size mismatch");
  MatchSet m;
  m.n_a = a.points.size();
  m.n_b = b.points.size();
  if (m.n_a == 0 || m.n_b == 0) return m;

  const int norm = a.binary ? cv::NORM_HAMMING : cv::NORM_L2;
  auto dist = [&](size_t i, size_t j) {
    return cv::norm(a.descriptors.row(static_cast<int>(i)), b.descriptors.row(static_cast<int>(j)),
                    norm);
  };

  struct Best {
    size_t idx = 0;
    double d1 = 0;
    double d2 = 0;  // second-best distance; infinite when no second candidate
  };
  auto scan = [](size_t n, const std::function<double(size_t)>& d) {
    Best best;
    best.d1 = best.d2 = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < n; ++k) {
      const double dk = d(k);
      if (dk < best.d1) {
        best.d2 = best.d1;
        best.d1 = dk;
        best.idx = k;
      } else if (dk < best.d2) {
        best.d2 = dk;
      }
    }
    return best;
  };

  std::vector<Best> best_a(m.n_a), best_b(m.n_b);
  for (size_t i = 0; i < m.n_a; ++i)
    best_a[i] = scan(m.n_b, [&](size_t j) { return dist(i, j); });
  for (size_t j = 0; j < m.n_b; ++j)
    best_b[j] = scan(m.n_a, [&](size_t i) { return dist(i, j); });

  const int bits = a.descriptors.cols * 8;
  const double hamming_max = params.hamming_max >= 0 ? params.hamming_max : bits / 4.0;
  for (size_t i = 0; i < m.n_a; ++i) {
    const size_t j = best_a[i].idx;
    if (best_b[j].idx != i) continue;
    if (a.binary) {
      if (best_a[i].d1 > hamming_max) continue;
    } else {
      if (!(best_a[i].d1 < params.ratio * best_a[i].d2)) continue;
      if (!(best_b[j].d1 < params.ratio * best_b[j].d2)) continue;
    }
    const double dx = a.points[i].x - b.points[j].x;
    const double dy = a.points[i].y - b.points[j].y;
    m.pairs.push_back({i, j, std::sqrt(dx * dx + dy * dy)});
  }
  return m;
}

// J = |pairs| / (n_a + n_b - |pairs|).
inline double jaccard(const MatchSet& m) {
  if (m.n_a + m.n_b == 0) throw Error("jaccard: undefined for two empty keypoint sets");
  return static_cast<double>(m.pairs.size()) /
         static_cast<double>(m.n_a + m.n_b - m.pairs.size());
}

// Mean spatial distance of matched pairs, clamped below at 0.5 px so the J/D
// ratio stays finite for identical glyphs.
inline double avg_distance(const MatchSet& m) {
  if (m.pairs.empty()) throw Error("avg_distance: undefined without matches");
  double sum = 0;
  for (const auto& p : m.pairs) sum += p.spatial_distance;
  return std::max(0.5, sum / static_cast<double>(m.pairs.size()));
}

// Debug dump of a keypoint set, descriptors as hex.
inline nlohmann::json keypoints_to_json(const KeypointSet& set) {
  nlohmann::json points = nlohmann::json::array();
  for (size_t i = 0; i < set.points.size(); ++i) {
    const auto& p = set.points[i];
    std::string hex;
    if (!set.descriptors.empty() && set.binary) {
      const uint8_t* row = set.descriptors.ptr<uint8_t>(static_cast<int>(i));
      static const char* digits = "0123456789abcdef";
      for (int c = 0; c < set.descriptors.cols; ++c) {
        hex.push_back(digits[row[c] >> 4]);
        hex.push_back(digits[row[c] & 0xF]);
      }
    }
    points.push_back({{"x", p.x},
                      {"y", p.y},
                      {"size", p.size},
                      {"angle", p.angle},
                      {"response", p.response},
                      {"desc_hex", hex}});
  }
  return nlohmann::json{{"detector", set.detector},
                        {"canvas", {set.canvas_w, set.canvas_h}},
                        {"points", points}};
}

}  // namespace ocrsynth
