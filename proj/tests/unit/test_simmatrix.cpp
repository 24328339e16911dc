#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "../testutil.hpp"
#include "ocrsynth/corpus.hpp"
#include "ocrsynth/features.hpp"
#include "ocrsynth/fonts.hpp"
#include "ocrsynth/simmatrix.hpp"
#include "ocrsynth/simmatrix_build.hpp"

using namespace ocrsynth;

namespace {

double row_value(const GlyphSimilarityMatrix& m, char32_t i, char32_t j) {
  const auto* row = m.find_row(i);
  REQUIRE(row != nullptr);
  for (const auto& [c, s] : *row)
    if (c == j) return s;
  FAIL("row has no entry for the requested character");
  return -1;
}

std::atomic<int> g_stub_calls{0};

KeypointSet canned_set(bool second) {
  KeypointSet s;
  s.detector = "stub_pair";
  s.canvas_w = 64;
  s.canvas_h = 64;
  s.binary = true;
  s.descriptors = cv::Mat(3, 4, CV_8U);
  const uint8_t rows_a[3][4] = {{0, 0, 0, 0}, {255, 255, 255, 255}, {0xF0, 0x0F, 0xAA, 0x55}};
  const uint8_t rows_b[3][4] = {{0, 0, 0, 1}, {255, 255, 255, 254}, {0x0F, 0xF0, 0x55, 0xAA}};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c)
      s.descriptors.at<uint8_t>(r, c) = second ? rows_b[r][c] : rows_a[r][c];
  if (second) {
    s.points = {{2, 0, 4, -1, 0.9}, {10, 12, 4, -1, 0.8}, {40, 40, 4, -1, 0.7}};
  } else {
    s.points = {{0, 0, 4, -1, 0.9}, {10, 10, 4, -1, 0.8}, {30, 30, 4, -1, 0.7}};
  }
  return s;
}

}  // namespace

TEST_CASE("min-max normalization per row and detector", "[simmatrix]") {
  const std::vector<char32_t> alphabet = {U'a', U'b', U'c', U'd'};
  RawScores raw;
  raw["q"][U'a'] = {{U'b', 2.0}, {U'c', 4.0}, {U'd', 6.0}};
  raw["q"][U'b'] = {{U'a', 3.0}, {U'c', 3.0}, {U'd', 3.0}};  // degenerate

  const auto rows = normalize_scores(raw, alphabet, {"q"});
  REQUIRE(rows.size() == 4);
  REQUIRE(rows.at(U'a').size() == 3);

  const auto at = [&](char32_t i, char32_t j) {
    for (const auto& [c, s] : rows.at(i))
      if (c == j) return s;
    throw std::runtime_error("missing entry");
  };
  CHECK(at(U'a', U'b') == 0.0);
  CHECK(at(U'a', U'c') == Catch::Approx(0.5));
  CHECK(at(U'a', U'd') == 1.0);
  // Degenerate and absent rows land on zero.
  CHECK(at(U'b', U'a') == 0.0);
  CHECK(at(U'b', U'd') == 0.0);
  CHECK(at(U'c', U'a') == 0.0);

  CHECK_THROWS_AS(normalize_scores(raw, alphabet, {}), Error);
}

TEST_CASE("normalization averages detectors", "[simmatrix]") {
  const std::vector<char32_t> alphabet = {U'a', U'b', U'c', U'd'};
  RawScores raw;
  raw["q1"][U'a'] = {{U'b', 0.0}, {U'c', 1.0}, {U'd', 0.5}};
  raw["q2"][U'a'] = {{U'b', 2.0}, {U'c', 0.0}, {U'd', 2.0}};

  const auto rows = normalize_scores(raw, alphabet, {"q1", "q2"});
  const auto at = [&](char32_t j) {
    for (const auto& [c, s] : rows.at(U'a'))
      if (c == j) return s;
    throw std::runtime_error("missing entry");
  };
  CHECK(at(U'b') == Catch::Approx(0.5));   // (0 + 1) / 2
  CHECK(at(U'c') == Catch::Approx(0.5));   // (1 + 0) / 2
  CHECK(at(U'd') == Catch::Approx(0.75));  // (0.5 + 1) / 2
}

TEST_CASE("pair score is jaccard over average distance", "[simmatrix]") {
  if (!testutil::have_fonts()) SKIP("no fonts available");
  const FontSet fonts = testutil::load_test_fonts(1);

  register_detector("stub_pair", [](const GrayImage&, int) {
    return canned_set(g_stub_calls.fetch_add(1) % 2 == 1);
  });
  g_stub_calls = 0;

  // Canned sets: 3 vs 3 points, 2 mutual matches at spatial distance 2.
  // J = 2 / (3 + 3 - 2) = 0.5, D = 2.0, so S = 0.25.
  const double s = pair_score(U'a', U'b', "stub_pair", fonts);
  CHECK(s == Catch::Approx(0.25));

  CHECK_THROWS_AS(pair_score(U'a', U'a', "stub_pair", fonts), Error);
}

TEST_CASE("matching arithmetic on the canned sets", "[simmatrix]") {
  const KeypointSet a = canned_set(false);
  const KeypointSet b = canned_set(true);
  const MatchSet m = match_keypoints(a, b);
  REQUIRE(m.pairs.size() == 2);
  CHECK(m.pairs[0].a == 0);
  CHECK(m.pairs[0].b == 0);
  CHECK(m.pairs[0].spatial_distance == Catch::Approx(2.0));
  CHECK(m.pairs[1].a == 1);
  CHECK(m.pairs[1].b == 1);
  CHECK(m.pairs[1].spatial_distance == Catch::Approx(2.0));
  CHECK(jaccard(m) == Catch::Approx(0.5));
  CHECK(avg_distance(m) == Catch::Approx(2.0));
}

TEST_CASE("small matrix build round trips", "[simmatrix]") {
  if (!testutil::have_fonts()) SKIP("no fonts available");
  const FontSet fonts = testutil::load_test_fonts(2);
  const auto profile = build_charset_profile("abo", "en");

  MatrixBuildParams params;
  params.keep_raw = true;
  const GlyphSimilarityMatrix m = build_similarity_matrix(profile, fonts, params);

  CHECK((m.alphabet == std::vector<char32_t>{U'a', U'b', U'o'}));
  CHECK((m.detectors == std::vector<std::string>{"orb", "sift"}));
  CHECK(m.fonts_digest == fonts.digest());
  CHECK(m.params_digest == params.digest());
  REQUIRE(m.rows.size() == 3);
  for (const auto& [i, row] : m.rows) {
    REQUIRE(row.size() == 2);
    for (const auto& [j, s] : row) {
      CHECK(j != i);
      CHECK(s >= 0.0);
      CHECK(s <= 1.0);
    }
  }
  CHECK_FALSE(m.raw.empty());
  // Raw scores are symmetric by construction.
  CHECK(m.raw.at("orb").at(U'a').at(U'b') == m.raw.at("orb").at(U'b').at(U'a'));
  // Normalizing the retained raw scores reproduces the rows.
  CHECK(normalize_scores(m.raw, m.alphabet, m.detectors) == m.rows);

  testutil::TempDir dir("simmatrix");
  m.save(dir.path / "m.json");
  const GlyphSimilarityMatrix loaded = GlyphSimilarityMatrix::load(dir.path / "m.json");
  CHECK(loaded == m);

  // Rebuilds are byte-identical, with any worker count.
  MatrixBuildParams par2 = params;
  par2.jobs = 3;
  const GlyphSimilarityMatrix m2 = build_similarity_matrix(profile, fonts, par2);
  CHECK(m2.to_json().dump() == m.to_json().dump());

  CHECK_THROWS_AS(build_similarity_matrix(build_charset_profile("a", "en"), fonts, params), Error);
  MatrixBuildParams bad = params;
  bad.detectors = {"bogus"};
  CHECK_THROWS_AS(build_similarity_matrix(profile, fonts, bad), Error);
  bad.detectors = {};
  CHECK_THROWS_AS(build_similarity_matrix(profile, fonts, bad), Error);
}

TEST_CASE("sparse save keeps the strongest entries", "[simmatrix]") {
  GlyphSimilarityMatrix m;
  m.alphabet = {U'a', U'b', U'c', U'd'};
  m.detectors = {"q"};
  m.fonts_digest = "f";
  m.params_digest = "p";
  m.rows[U'a'] = {{U'b', 0.2}, {U'c', 0.9}, {U'd', 0.5}};
  m.rows[U'b'] = {{U'a', 0.1}, {U'c', 0.0}, {U'd', 0.3}};
  m.rows[U'c'] = {{U'a', 0.0}, {U'b', 0.0}, {U'd', 0.0}};
  m.rows[U'd'] = {{U'a', 1.0}, {U'b', 0.5}, {U'c', 0.25}};

  testutil::TempDir dir("sparse");
  m.save(dir.path / "k1.json", 1);
  const GlyphSimilarityMatrix k1 = GlyphSimilarityMatrix::load(dir.path / "k1.json");

  // Rows come back full-width; dropped entries read as zero.
  REQUIRE(k1.rows.at(U'a').size() == 3);
  CHECK(row_value(k1, U'a', U'c') == Catch::Approx(0.9));
  CHECK(row_value(k1, U'a', U'b') == 0.0);
  CHECK(row_value(k1, U'a', U'd') == 0.0);
  CHECK(row_value(k1, U'd', U'a') == 1.0);
  CHECK(row_value(k1, U'd', U'b') == 0.0);

  // Full save round trips exactly.
  m.save(dir.path / "full.json");
  CHECK(GlyphSimilarityMatrix::load(dir.path / "full.json") == m);

  auto j = m.to_json();
  j["version"] = 3;
  CHECK_THROWS_AS(GlyphSimilarityMatrix::from_json(j), Error);
}

TEST_CASE("compat warnings flag alphabet drift", "[simmatrix]") {
  GlyphSimilarityMatrix m;
  m.alphabet = {U'a', U'b', U'c'};
  m.rows[U'a'] = {{U'b', 0.5}, {U'c', 0.5}};
  m.rows[U'b'] = {{U'a', 0.5}, {U'c', 0.5}};
  m.rows[U'c'] = {{U'a', 0.5}, {U'b', 0.5}};

  CHECK(matrix_compat_warnings(m, build_charset_profile("abc", "en")).empty());

  const auto warnings = matrix_compat_warnings(m, build_charset_profile("abcd", "en"));
  REQUIRE(warnings.size() == 1);
  CHECK_THAT(warnings[0], Catch::Matchers::ContainsSubstring("3 chars"));
  CHECK_THAT(warnings[0], Catch::Matchers::ContainsSubstring("4 chars"));
  CHECK_THAT(warnings[0], Catch::Matchers::ContainsSubstring("1 profile characters"));
}
