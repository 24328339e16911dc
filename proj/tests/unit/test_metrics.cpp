#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <string>
#include <vector>

#include "ocrsynth/metrics.hpp"
#include "ocrsynth/rng.hpp"

using namespace ocrsynth;

// Textbook full-matrix Levenshtein, kept independent of the library version.
static uint64_t oracle_distance(const std::u32string& a, const std::u32string& b) {
  std::vector<std::vector<uint64_t>> d(a.size() + 1, std::vector<uint64_t>(b.size() + 1));
  for (size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (size_t i = 1; i <= a.size(); ++i)
    for (size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
  return d[a.size()][b.size()];
}

TEST_CASE("edit distance fixtures", "[metrics]") {
  CHECK(edit_distance("kitten", "sitting") == 3);
  CHECK(edit_distance("", "") == 0);
  CHECK(edit_distance("abc", "abc") == 0);
  CHECK(edit_distance("abc", "") == 3);
  CHECK(edit_distance("", "xy") == 2);
  CHECK(edit_distance("héllo", "hello") == 1);
  CHECK(edit_distance("flaw", "lawn") == 2);
}

TEST_CASE("edit distance agrees with the brute-force oracle", "[metrics]") {
  Rng rng(123);
  const std::u32string alphabet = U"abcde ";
  for (int trial = 0; trial < 200; ++trial) {
    std::u32string a, b;
    const size_t la = rng.below(31), lb = rng.below(31);
    for (size_t i = 0; i < la; ++i) a.push_back(alphabet[rng.below(alphabet.size())]);
    for (size_t i = 0; i < lb; ++i) b.push_back(alphabet[rng.below(alphabet.size())]);
    REQUIRE(edit_distance(encode_utf8(a), encode_utf8(b)) == oracle_distance(a, b));
  }
}

TEST_CASE("cer normalizes by reference scalars", "[metrics]") {
  CHECK(cer("abcd", "abcd") == 0.0);
  CHECK(cer("abcd", "abXd") == 0.25);
  CHECK(cer("ab", "abcdef") == 2.0);  // may exceed 1
  CHECK(cer("kůň", "kun") == Catch::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(cer("", "x"), Error);
}

TEST_CASE("wer tokenizes on unicode whitespace", "[metrics]") {
  CHECK(wer("a b c", "a x c") == Catch::Approx(1.0 / 3.0));
  CHECK(wer("a b c", "a b c") == 0.0);
  CHECK(wer("one\ttwo\nthree", "one two three") == 0.0);
  CHECK(wer("a", "a b c") == 2.0);
  CHECK_THROWS_AS(wer("   ", "a"), Error);
  const auto toks = tokenize("  háčky čárky  x ");
  REQUIRE(toks.size() == 3);
  CHECK(toks[0] == U"háčky");
  CHECK(toks[2] == U"x");
}

TEST_CASE("categorize applies zero precedence", "[metrics]") {
  CHECK(categorize(5, 0) == ChangeCategory::Zero);
  CHECK(categorize(0, 0) == ChangeCategory::Zero);
  CHECK(categorize(3, 7) == ChangeCategory::Increased);
  CHECK(categorize(7, 3) == ChangeCategory::Decreased);
  CHECK(categorize(4, 4) == ChangeCategory::Equal);
  CHECK(std::string(to_string(ChangeCategory::Zero)) == "zero");
}

TEST_CASE("report micro-averages and buckets sentences", "[metrics]") {
  const std::vector<EvalTriple> triples = {
      {"abcd", "abXd", "abcd"},   // 1 edit -> 0: zero
      {"wxyz", "wxyz", "wxyA"},   // 0 -> 1: increased
      {"hello", "hXllY", "hXllo"},  // 2 -> 1: decreased
      {"toto", "tZto", "tAto"},   // 1 -> 1: equal
  };
  std::string tsv;
  const EvalReport rep = build_report(triples, &tsv);
  CHECK(rep.n == 4);
  CHECK(rep.zero == 1);
  CHECK(rep.increased == 1);
  CHECK(rep.decreased == 1);
  CHECK(rep.equal == 1);
  // 4 + 4 + 5 + 4 = 17 reference chars; before edits 1+0+2+1 = 4; after 0+1+1+1 = 3.
  CHECK(rep.before.cer == Catch::Approx(4.0 / 17.0));
  CHECK(rep.after.cer == Catch::Approx(3.0 / 17.0));

  const auto j = rep.to_json();
  CHECK(j.at("categories").at("zero") == 1);
  CHECK(j.at("n") == 4);
  CHECK(j.at("conventions").size() == 4);

  REQUIRE(tsv.rfind("id\tcer_ocr\tcer_corrected\tcategory\n", 0) == 0);
  CHECK(tsv.find("\tzero\n") != std::string::npos);
  CHECK(std::count(tsv.begin(), tsv.end(), '\n') == 5);
}

TEST_CASE("report rejects empty input", "[metrics]") {
  CHECK_THROWS_AS(build_report({}), Error);
  CHECK_THROWS_AS(build_report({{"", "a", "a"}}), Error);
}
