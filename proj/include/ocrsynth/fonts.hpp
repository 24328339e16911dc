#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>
#include <opencv2/freetype.hpp>
#include <opencv2/imgproc.hpp>

#include "ocrsynth/common.hpp"
#include "ocrsynth/cvmat.hpp"
#include "ocrsynth/raster.hpp"
#include "ocrsynth/utf8.hpp"

namespace ocrsynth {

namespace detail {

// Big-endian reads over a font file, bounds-checked.
struct SfntReader {
  const std::string& data;

  uint8_t u8(size_t off) const {
    if (off >= data.size()) throw Error("font table read out of bounds");
    return static_cast<uint8_t>(data[off]);
  }
  uint16_t u16(size_t off) const { return static_cast<uint16_t>((u8(off) << 8) | u8(off + 1)); }
  uint32_t u32(size_t off) const {
    return (static_cast<uint32_t>(u16(off)) << 16) | u16(off + 2);
  }
};

// Character coverage from the cmap table (formats 0, 4, 6, 12). Coverage is
// what decides "glyph unavailable"; rendering alone cannot, because missing
// characters draw a .notdef box with real ink.
inline std::unordered_set<char32_t> read_cmap_coverage(const std::string& bytes) {
  constexpr size_t kMaxChars = 1u << 21;
  SfntReader r{bytes};
  std::unordered_set<char32_t> out;

  size_t sfnt = 0;
  const uint32_t magic = r.u32(0);
  if (magic == 0x74746366) sfnt = r.u32(12);  // 'ttcf': first font of the collection
  const uint32_t version = r.u32(sfnt);
  if (version != 0x00010000 && version != 0x4F54544F && version != 0x74727565)
    throw Error("unrecognized font container");

  const uint16_t num_tables = r.u16(sfnt + 4);
  size_t cmap_off = 0;
  for (uint16_t t = 0; t < num_tables; ++t) {
    const size_t rec = sfnt + 12 + static_cast<size_t>(t) * 16;
    if (r.u32(rec) == 0x636D6170) {  // 'cmap'
      cmap_off = r.u32(rec + 8);
      break;
    }
  }
  if (cmap_off == 0) throw Error("font has no cmap table");

  const uint16_t num_subtables = r.u16(cmap_off + 2);
  for (uint16_t s = 0; s < num_subtables; ++s) {
    const size_t sub = cmap_off + r.u32(cmap_off + 4 + static_cast<size_t>(s) * 8 + 4);
    try {
      const uint16_t format = r.u16(sub);
      if (format == 0) {
        for (uint32_t c = 0; c < 256; ++c)
          if (r.u8(sub + 6 + c) != 0) out.insert(c);
      } else if (format == 4) {
        const uint16_t seg_count = r.u16(sub + 6) / 2;
        const size_t end_codes = sub + 14;
        const size_t start_codes = end_codes + 2 * seg_count + 2;
        const size_t deltas = start_codes + 2 * seg_count;
        const size_t range_offsets = deltas + 2 * seg_count;
        for (uint16_t seg = 0; seg < seg_count; ++seg) {
          const uint32_t end = r.u16(end_codes + 2 * seg);
          const uint32_t start = r.u16(start_codes + 2 * seg);
          const uint16_t delta = r.u16(deltas + 2 * seg);
          const uint16_t range_offset = r.u16(range_offsets + 2 * seg);
          for (uint32_t c = start; c <= end && c != 0xFFFF; ++c) {
            uint16_t gid;
            if (range_offset == 0) {
              gid = static_cast<uint16_t>(c + delta);
            } else {
              const size_t addr = range_offsets + 2 * seg + range_offset + 2 * (c - start);
              gid = r.u16(addr);
              if (gid != 0) gid = static_cast<uint16_t>(gid + delta);
            }
            if (gid != 0) out.insert(c);
            if (out.size() > kMaxChars) return out;
          }
        }
      } else if (format == 6) {
        const uint16_t first = r.u16(sub + 6);
        const uint16_t count = r.u16(sub + 8);
        for (uint16_t k = 0; k < count; ++k)
          if (r.u16(sub + 10 + 2 * k) != 0) out.insert(first + k);
      } else if (format == 12) {
        const uint32_t groups = r.u32(sub + 12);
        for (uint32_t g = 0; g < groups; ++g) {
          const size_t rec = sub + 16 + static_cast<size_t>(g) * 12;
          const uint32_t start = r.u32(rec);
          const uint32_t end = std::min<uint32_t>(r.u32(rec + 4), 0x10FFFF);
          const uint32_t start_gid = r.u32(rec + 8);
          for (uint32_t c = start; c <= end; ++c) {
            if (start_gid + (c - start) != 0) out.insert(c);
            if (out.size() > kMaxChars) return out;
          }
        }
      }
    } catch (const Error&) {
      // Malformed subtable: skip it, other subtables may still parse.
    }
  }
  return out;
}

}  // namespace detail

struct FontInfo {
  std::string id;
  std::filesystem::path path;
  std::string name;
};

// A loaded, immutable set of fonts. Rendering goes through a shared mutex
// because the underlying rasterizer handles are not thread-safe; callers may
// still render from any thread.
class FontSet {
 public:
  static FontSet from_files(const std::vector<std::filesystem::path>& paths) {
    FontSet set;
    for (const auto& p : paths) set.add_font({p.stem().string(), p, p.stem().string()});
    set.finish();
    return set;
  }

  // Manifest: JSON list of {id, path, name}, or an object with a "fonts"
  // list. Relative font paths resolve against the manifest's directory.
  static FontSet load_manifest(const std::filesystem::path& manifest_path) {
    const nlohmann::json doc = nlohmann::json::parse(read_file(manifest_path));
    const nlohmann::json& list = doc.is_object() && doc.contains("fonts") ? doc.at("fonts") : doc;
    if (!list.is_array() || list.empty())
      throw Error("font manifest must contain a non-empty font list: " + manifest_path.string());
    FontSet set;
    for (const auto& entry : list) {
      FontInfo info;
      info.id = entry.at("id").get<std::string>();
      std::filesystem::path p = entry.at("path").get<std::string>();
      if (p.is_relative()) p = manifest_path.parent_path() / p;
      info.path = p;
      info.name = entry.value("name", info.id);
      set.add_font(std::move(info));
    }
    set.finish();
    return set;
  }

  size_t size() const { return entries_.size(); }
  const FontInfo& info(size_t font) const { return entries_.at(font).info; }
  const std::string& digest() const { return digest_; }

  bool has_glyph(size_t font, char32_t c) const {
    return entries_.at(font).coverage.count(c) != 0;
  }

  // Renders one character onto a square canvas: ink cropped tight, aspect
  // preserved, centered inside the margin. nullopt when the font lacks the
  // glyph or it carries no ink (e.g. space).
  std::optional<GrayImage> render_glyph(size_t font, char32_t c, int canvas = 64,
                                        double margin = 0.125) const {
    if (canvas < 32) throw Error("render_glyph: canvas must be at least 32 px");
    if (margin < 0.0 || margin >= 0.5) throw Error("render_glyph: margin must be in [0, 0.5)");
    if (!has_glyph(font, c)) return std::nullopt;

    std::lock_guard<std::mutex> lock(*render_mutex_);
    constexpr int kScratch = 512;
    cv::Mat rgb(kScratch, kScratch, CV_8UC3, cv::Scalar(255, 255, 255));
    entries_.at(font).ft->putText(rgb, encode_utf8(c), cv::Point(64, 384), 256,
                                  cv::Scalar(0, 0, 0), -1, cv::LINE_AA, true);
    cv::Mat gray;
    cv::cvtColor(rgb, gray, cv::COLOR_BGR2GRAY);

    int x0 = kScratch, y0 = kScratch, x1 = -1, y1 = -1;
    for (int y = 0; y < gray.rows; ++y) {
      const uint8_t* row = gray.ptr<uint8_t>(y);
      for (int x = 0; x < gray.cols; ++x) {
        if (row[x] < 250) {
          x0 = std::min(x0, x);
          y0 = std::min(y0, y);
          x1 = std::max(x1, x);
          y1 = std::max(y1, y);
        }
      }
    }
    if (x1 < 0) return std::nullopt;  // covered but blank (no ink)

    const cv::Mat crop = gray(cv::Rect(x0, y0, x1 - x0 + 1, y1 - y0 + 1));
    const int inner = std::max(1, canvas - 2 * static_cast<int>(std::lround(margin * canvas)));
    const double scale = std::min(static_cast<double>(inner) / crop.cols,
                                  static_cast<double>(inner) / crop.rows);
    const int nw = std::max(1, static_cast<int>(std::lround(crop.cols * scale)));
    const int nh = std::max(1, static_cast<int>(std::lround(crop.rows * scale)));
    cv::Mat scaled;
    cv::resize(crop, scaled, cv::Size(nw, nh), 0, 0,
               scale < 1.0 ? cv::INTER_AREA : cv::INTER_LINEAR);
    cv::Mat out(canvas, canvas, CV_8UC1, cv::Scalar(255));
    scaled.copyTo(out(cv::Rect((canvas - nw) / 2, (canvas - nh) / 2, nw, nh)));
    return from_mat(out);
  }

  // Renders text with greedy word wrapping at line_width pixels. Characters
  // without coverage still render (as the font's fallback box), mirroring how
  // a printed page would show them.
  GrayImage render_chunk(size_t font, std::string_view text, int point_size = 24,
                         int line_width = 1000, int padding = 16) const {
    if (text.empty()) throw Error("render_chunk: text must be non-empty");
    if (point_size < 8) throw Error("render_chunk: point size must be at least 8");
    if (line_width <= 2 * padding + point_size)
      throw Error("render_chunk: line width too small for the point size");
    bool renderable = false;
    {
      size_t i = 0;
      while (i < text.size()) {
        const char32_t c = decode_utf8_at(text, i);
        if (!is_space(c) && has_glyph(font, c)) {
          renderable = true;
          break;
        }
      }
    }
    if (!renderable) throw Error("render_chunk: no renderable characters");

    std::vector<std::string> words;
    {
      std::u32string cur;
      for (char32_t c : decode_utf8(text)) {
        if (is_space(c)) {
          if (!cur.empty()) words.push_back(encode_utf8(cur));
          cur.clear();
        } else {
          cur.push_back(c);
        }
      }
      if (!cur.empty()) words.push_back(encode_utf8(cur));
    }

    std::lock_guard<std::mutex> lock(*render_mutex_);
    const auto& ft = entries_.at(font).ft;
    int baseline = 0;
    auto text_width = [&](const std::string& s) {
      return ft->getTextSize(s, point_size, -1, &baseline).width;
    };
    const int usable = line_width - 2 * padding;
    std::vector<std::string> lines;
    std::string cur;
    int widest = 0;
    for (const auto& word : words) {
      const std::string cand = cur.empty() ? word : cur + " " + word;
      if (cur.empty() || text_width(cand) <= usable) {
        cur = cand;
      } else {
        widest = std::max(widest, text_width(cur));
        lines.push_back(cur);
        cur = word;
      }
    }
    if (!cur.empty()) {
      widest = std::max(widest, text_width(cur));
      lines.push_back(cur);
    }

    const int advance = point_size + (point_size + 1) / 2;
    const int width = std::max(line_width, widest + 2 * padding);
    const int height = 2 * padding + advance * static_cast<int>(lines.size() - 1) + point_size +
                       (point_size + 2) / 3;
    cv::Mat rgb(height, width, CV_8UC3, cv::Scalar(255, 255, 255));
    for (size_t k = 0; k < lines.size(); ++k) {
      const int y = padding + point_size + static_cast<int>(k) * advance;
      ft->putText(rgb, lines[k], cv::Point(padding, y), point_size, cv::Scalar(0, 0, 0), -1,
                  cv::LINE_AA, true);
    }
    cv::Mat gray;
    cv::cvtColor(rgb, gray, cv::COLOR_BGR2GRAY);
    return from_mat(gray);
  }

 private:
  struct Entry {
    FontInfo info;
    cv::Ptr<cv::freetype::FreeType2> ft;
    std::unordered_set<char32_t> coverage;
  };

  void add_font(FontInfo info) {
    init_cv_once();
    Entry e;
    e.info = std::move(info);
    const std::string bytes = read_file(e.info.path);
    try {
      e.coverage = detail::read_cmap_coverage(bytes);
    } catch (const Error& err) {
      throw Error("font " + e.info.path.string() + ": " + err.what());
    }
    try {
      e.ft = cv::freetype::createFreeType2();
      e.ft->loadFontData(e.info.path.string(), 0);
    } catch (const cv::Exception& err) {
      throw Error("font " + e.info.path.string() + " failed to load: " + err.what());
    }
    digest_seed_ = fnv1a64(e.info.id.data(), e.info.id.size(), digest_seed_);
    digest_seed_ = fnv1a64(bytes.data(), bytes.size(), digest_seed_);
    entries_.push_back(std::move(e));
  }

  void finish() {
    if (entries_.empty()) throw Error("font set is empty");
    digest_ = hex64(digest_seed_);
  }

  std::vector<Entry> entries_;
  uint64_t digest_seed_ = 0xcbf29ce484222325ULL;
  std::string digest_;
  mutable std::unique_ptr<std::mutex> render_mutex_ = std::make_unique<std::mutex>();
};

}  // namespace ocrsynth
