#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <string>
#include <vector>

#include "../testutil.hpp"
#include "ocrsynth/features.hpp"
#include "ocrsynth/fonts.hpp"

using namespace ocrsynth;

namespace {

MatchSet fake_matches(size_t n_pairs, size_t n_a, size_t n_b,
                      const std::vector<double>& distances = {}) {
  MatchSet m;
  m.n_a = n_a;
  m.n_b = n_b;
  for (size_t i = 0; i < n_pairs; ++i)
    m.pairs.push_back({i, i, i < distances.size() ? distances[i] : 0.0});
  return m;
}

}  // namespace

TEST_CASE("detectors find keypoints on rendered glyphs", "[features]") {
  if (!testutil::have_fonts()) SKIP("no fonts available");
  const FontSet fonts = testutil::load_test_fonts(1);
  const auto glyph = fonts.render_glyph(0, U'g');
  REQUIRE(glyph.has_value());

  for (const std::string name : {"orb", "sift"}) {
    const KeypointSet set = detect_keypoints(name, *glyph);
    INFO("detector " << name);
    CHECK_FALSE(set.points.empty());
    CHECK(set.detector == name);
    CHECK(set.canvas_w == 64);
    CHECK(set.canvas_h == 64);
    CHECK(set.descriptors.rows == static_cast<int>(set.points.size()));
    CHECK(set.binary == (name == "orb"));
    // Responses arrive strongest first.
    for (size_t i = 1; i < set.points.size(); ++i)
      CHECK(set.points[i - 1].response >= set.points[i].response);
  }
}

TEST_CASE("keypoint cap and input validation", "[features]") {
  if (!testutil::have_fonts()) SKIP("no fonts available");
  const FontSet fonts = testutil::load_test_fonts(1);
  const auto glyph = fonts.render_glyph(0, U'B');
  REQUIRE(glyph.has_value());

  const KeypointSet full = detect_keypoints("sift", *glyph, 100);
  const KeypointSet capped = detect_keypoints("sift", *glyph, 3);
  CHECK(capped.points.size() <= 3);
  CHECK(capped.points.size() <= full.points.size());
  if (full.points.size() >= 3) {
    // The cap keeps the strongest responses.
    CHECK(capped.points[0].response == full.points[0].response);
  }

  CHECK_THROWS_AS(detect_keypoints("surf9000", *glyph), Error);
  CHECK_THROWS_AS(detect_keypoints("orb", GrayImage(16, 16)), Error);
}

TEST_CASE("custom detectors can be registered", "[features]") {
  register_detector("stub_counter", [](const GrayImage& img, int) {
    KeypointSet s;
    s.detector = "stub_counter";
    s.canvas_w = img.width;
    s.canvas_h = img.height;
    s.points.push_back({1.0, 2.0, 3.0, -1.0, 0.5});
    return s;
  });
  const auto names = list_detectors();
  CHECK(std::count(names.begin(), names.end(), "stub_counter") == 1);
  CHECK(std::count(names.begin(), names.end(), "orb") == 1);
  CHECK(std::count(names.begin(), names.end(), "sift") == 1);

  const KeypointSet got = detect_keypoints("stub_counter", GrayImage(64, 64));
  CHECK(got.points.size() == 1);
  CHECK(got.points[0].x == 1.0);
}

TEST_CASE("matching a glyph against itself", "[features]") {
  if (!testutil::have_fonts()) SKIP("no fonts available");
  const FontSet fonts = testutil::load_test_fonts(1);
  const auto glyph = fonts.render_glyph(0, U'R');
  REQUIRE(glyph.has_value());

  for (const std::string name : {"orb", "sift"}) {
    const KeypointSet set = detect_keypoints(name, *glyph);
    const MatchSet m = match_keypoints(set, set);
    INFO("detector " << name);
    REQUIRE_FALSE(m.pairs.empty());
    CHECK(m.n_a == set.points.size());
    // Identical input: every match is a point matched to itself at distance 0.
    for (const auto& p : m.pairs) {
      CHECK(p.a == p.b);
      CHECK(p.spatial_distance == Catch::Approx(0.0).margin(1e-9));
    }
    CHECK(avg_distance(m) == 0.5);  // clamped floor
    CHECK(jaccard(m) > 0.2);
  }

  const KeypointSet orb_set = detect_keypoints("orb", *glyph);
  CHECK_THROWS_AS(match_keypoints(orb_set, detect_keypoints("sift", *glyph)), Error);

  KeypointSet resized = orb_set;
  resized.canvas_w = 128;
  CHECK_THROWS_AS(match_keypoints(orb_set, resized), Error);
}

TEST_CASE("jaccard and average distance arithmetic", "[features]") {
  CHECK(jaccard(fake_matches(4, 8, 10)) == Catch::Approx(4.0 / 14.0));
  CHECK(jaccard(fake_matches(0, 5, 5)) == 0.0);
  CHECK(jaccard(fake_matches(5, 5, 5)) == 1.0);
  CHECK_THROWS_AS(jaccard(fake_matches(0, 0, 0)), Error);

  CHECK(avg_distance(fake_matches(3, 3, 3, {1.0, 2.0, 3.0})) == Catch::Approx(2.0));
  CHECK(avg_distance(fake_matches(2, 2, 2, {0.1, 0.2})) == 0.5);  // clamped
  CHECK_THROWS_AS(avg_distance(fake_matches(0, 3, 3)), Error);
}

TEST_CASE("keypoint json dump", "[features]") {
  if (!testutil::have_fonts()) SKIP("no fonts available");
  const FontSet fonts = testutil::load_test_fonts(1);
  const auto glyph = fonts.render_glyph(0, U'Q');
  REQUIRE(glyph.has_value());

  const KeypointSet set = detect_keypoints("orb", *glyph, 10);
  const auto j = keypoints_to_json(set);
  CHECK(j.at("detector") == "orb");
  CHECK(j.at("canvas")[0] == 64);
  REQUIRE(j.at("points").is_array());
  REQUIRE(j.at("points").size() == set.points.size());
  const auto& p0 = j.at("points")[0];
  CHECK(p0.contains("x"));
  CHECK(p0.contains("response"));
  // ORB descriptors are 32 bytes: 64 hex digits.
  CHECK(p0.at("desc_hex").get<std::string>().size() == 64);
}
