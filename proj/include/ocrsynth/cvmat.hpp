#pragma once

#include <filesystem>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "ocrsynth/raster.hpp"

namespace ocrsynth {

// OpenCV runs deterministically only with its internal threading disabled.
// Returns true once; call before any cv:: processing.
inline bool init_cv_once() {
  static const bool done = [] {
    cv::setNumThreads(1);
    return true;
  }();
  return done;
}

inline cv::Mat to_mat(const GrayImage& img) {
  init_cv_once();
  cv::Mat m(img.height, img.width, CV_8UC1);
  for (int y = 0; y < img.height; ++y)
    std::copy_n(img.pixels.begin() + static_cast<size_t>(y) * img.width, img.width, m.ptr<uint8_t>(y));
  return m;
}

inline GrayImage from_mat(const cv::Mat& m) {
  init_cv_once();
  if (m.type() != CV_8UC1) throw Error("from_mat: expected 8-bit single channel");
  GrayImage img(m.cols, m.rows);
  for (int y = 0; y < m.rows; ++y)
    std::copy_n(m.ptr<uint8_t>(y), m.cols, img.pixels.begin() + static_cast<size_t>(y) * m.cols);
  return img;
}

inline void write_png(const GrayImage& img, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  if (!cv::imwrite(path.string(), to_mat(img)))
    throw Error("write_png: failed to write " + path.string());
}

}  // namespace ocrsynth
