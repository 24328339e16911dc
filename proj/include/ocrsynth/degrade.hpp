#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>
#include <opencv2/imgproc.hpp>

#include "ocrsynth/common.hpp"
#include "ocrsynth/cvmat.hpp"
#include "ocrsynth/raster.hpp"
#include "ocrsynth/rng.hpp"

namespace ocrsynth {

enum class Morph : uint8_t { None, Dilate, Erode, DilateThenErode, ErodeThenDilate };

inline std::string to_string(Morph m) {
  switch (m) {
    case Morph::None: return "none";
    case Morph::Dilate: return "dilate";
    case Morph::Erode: return "erode";
    case Morph::DilateThenErode: return "dilate_then_erode";
    case Morph::ErodeThenDilate: return "erode_then_dilate";
  }
  throw Error("invalid morph value");
}

inline Morph morph_from_string(const std::string& s) {
  if (s == "none") return Morph::None;
  if (s == "dilate") return Morph::Dilate;
  if (s == "erode") return Morph::Erode;
  if (s == "dilate_then_erode") return Morph::DilateThenErode;
  if (s == "erode_then_dilate") return Morph::ErodeThenDilate;
  throw Error("unknown morph name: " + s);
}

// One sampled degradation. Applied in a fixed order: rotate, noise,
// morphology, downscale.
struct DegradationRecipe {
  double rotation_deg = 0.0;   // [-5, 5]
  double noise_density = 0.0;  // [0, 0.005] per-pixel flip probability
  Morph morph = Morph::None;
  int kernel = 2;              // {2, 3}
  double scale_factor = 1.0;   // [0.5, 1]
  uint64_t seed = 0;           // noise placement seed

  bool is_identity() const {
    return rotation_deg == 0.0 && noise_density == 0.0 && morph == Morph::None &&
           scale_factor == 1.0;
  }

  void validate() const {
    if (rotation_deg < -5.0 || rotation_deg > 5.0)
      throw Error("rotation_deg out of range [-5, 5]");
    if (noise_density < 0.0 || noise_density > 0.005)
      throw Error("noise_density out of range [0, 0.005]");
    if (kernel != 2 && kernel != 3) throw Error("kernel must be 2 or 3");
    if (scale_factor < 0.5 || scale_factor > 1.0)
      throw Error("scale_factor out of range [0.5, 1]");
  }

  nlohmann::ordered_json to_json() const {
    return nlohmann::ordered_json{{"rotation_deg", rotation_deg},
                                  {"noise_density", noise_density},
                                  {"morph", ocrsynth::to_string(morph)},
                                  {"kernel", kernel},
                                  {"scale_factor", scale_factor},
                                  {"seed", seed}};
  }

  static DegradationRecipe from_json(const nlohmann::json& j) {
    DegradationRecipe r;
    r.rotation_deg = j.at("rotation_deg").get<double>();
    r.noise_density = j.at("noise_density").get<double>();
    r.morph = morph_from_string(j.at("morph").get<std::string>());
    r.kernel = j.at("kernel").get<int>();
    r.scale_factor = j.at("scale_factor").get<double>();
    r.seed = j.at("seed").get<uint64_t>();
    r.validate();
    return r;
  }
};

// Draw order is fixed so a seed pins the whole recipe: rotation, noise
// density, morph choice, kernel size, scale factor.
inline DegradationRecipe sample_recipe(uint64_t seed) {
  Rng rng(seed);
  DegradationRecipe r;
  r.rotation_deg = rng.uniform(-5.0, 5.0);
  r.noise_density = rng.uniform(0.0, 0.005);
  r.morph = static_cast<Morph>(rng.below(5));
  r.kernel = 2 + static_cast<int>(rng.below(2));
  r.scale_factor = rng.uniform(0.5, 1.0);
  r.seed = seed;
  return r;
}

namespace detail {

// Morphology acts on ink (dark pixels on a white page), while OpenCV's
// dilate/erode act on bright pixels. Thickening ink therefore erodes
// brightness and vice versa.
inline void apply_morph(cv::Mat& m, Morph morph, int kernel) {
  if (morph == Morph::None) return;
  const cv::Mat k = cv::Mat::ones(kernel, kernel, CV_8U);
  const auto ink_dilate = [&] { cv::erode(m, m, k); };
  const auto ink_erode = [&] { cv::dilate(m, m, k); };
  switch (morph) {
    case Morph::Dilate: ink_dilate(); break;
    case Morph::Erode: ink_erode(); break;
    case Morph::DilateThenErode:
      ink_dilate();
      ink_erode();
      break;
    case Morph::ErodeThenDilate:
      ink_erode();
      ink_dilate();
      break;
    case Morph::None: break;
  }
}

}  // namespace detail

// Applies the recipe. An identity recipe returns the input bit for bit.
inline GrayImage degrade(const GrayImage& img, const DegradationRecipe& recipe) {
  recipe.validate();
  init_cv_once();
  if (recipe.is_identity()) return img;
  cv::Mat m = to_mat(img);

  if (recipe.rotation_deg != 0.0) {
    const cv::Point2f center(static_cast<float>(m.cols) / 2.0f,
                             static_cast<float>(m.rows) / 2.0f);
    const cv::Mat rot = cv::getRotationMatrix2D(center, recipe.rotation_deg, 1.0);
    cv::Mat dst;
    cv::warpAffine(m, dst, rot, m.size(), cv::INTER_LINEAR, cv::BORDER_CONSTANT,
                   cv::Scalar(255));
    m = dst;
  }

  if (recipe.noise_density > 0.0) {
    Rng rng(derive_seed(recipe.seed, 1));
    for (int y = 0; y < m.rows; ++y) {
      uint8_t* row = m.ptr<uint8_t>(y);
      for (int x = 0; x < m.cols; ++x)
        if (rng.chance(recipe.noise_density)) row[x] = row[x] < 128 ? 255 : 0;
    }
  }

  detail::apply_morph(m, recipe.morph, recipe.kernel);

  if (recipe.scale_factor != 1.0) {
    const int w = std::max(1, static_cast<int>(std::floor(m.cols * recipe.scale_factor)));
    const int h = std::max(1, static_cast<int>(std::floor(m.rows * recipe.scale_factor)));
    cv::Mat dst;
    cv::resize(m, dst, cv::Size(w, h), 0, 0, cv::INTER_AREA);
    m = dst;
  }

  return from_mat(m);
}

}  // namespace ocrsynth
