#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <string>

#include "../testutil.hpp"
#include "ocrsynth/common.hpp"
#include "ocrsynth/config.hpp"

using namespace ocrsynth;

TEST_CASE("config sections namespace their keys", "[config]") {
  const auto cfg = ConfigFile::parse(
      "top = 1\n"
      "[gen]\n"
      "p_lo = 0\n"
      "p_hi = 12\n"
      "[chunk]\n"
      "limit = 230\n");
  CHECK(cfg.has("top"));
  CHECK(cfg.has("gen.p_lo"));
  CHECK(cfg.has("chunk.limit"));
  CHECK_FALSE(cfg.has("limit"));
  CHECK(cfg.uinteger("chunk.limit") == 230);
  CHECK(cfg.uinteger("gen.p_hi") == 12);
  CHECK_FALSE(cfg.uinteger("gen.nope").has_value());
}

TEST_CASE("config scalar types", "[config]") {
  const auto cfg = ConfigFile::parse(
      "s = \"quoted value\"\n"
      "esc = \"a\\\"b\\\\c\"\n"
      "b1 = true\n"
      "b2 = false\n"
      "u = 18446744073709551615\n"
      "i = -42\n"
      "d = 2.5\n"
      "bare = tesseract {input_path} stdout -l {lang}\n");
  CHECK(cfg.str("s") == "quoted value");
  CHECK(cfg.str("esc") == "a\"b\\c");
  CHECK(cfg.boolean("b1") == true);
  CHECK(cfg.boolean("b2") == false);
  CHECK(cfg.uinteger("u") == 18446744073709551615ULL);
  CHECK(cfg.integer("i") == -42);
  CHECK(cfg.number("d") == Catch::Approx(2.5));
  CHECK(cfg.number("i") == Catch::Approx(-42.0));
  CHECK(cfg.str("bare") == "tesseract {input_path} stdout -l {lang}");
}

TEST_CASE("config arrays", "[config]") {
  const auto cfg = ConfigFile::parse(
      "nums = [0, 15]\n"
      "mix_space = [ 1 , 2.5 ,3 ]\n"
      "names = [\"orb\", \"sift\"]\n"
      "quoted_comma = [\"a,b\", \"c\"]\n"
      "empty = []\n");
  CHECK((cfg.numbers("nums") == std::vector<double>{0.0, 15.0}));
  CHECK((cfg.numbers("mix_space") == std::vector<double>{1.0, 2.5, 3.0}));
  CHECK((cfg.strings("names") == std::vector<std::string>{"orb", "sift"}));
  CHECK((cfg.strings("quoted_comma") == std::vector<std::string>{"a,b", "c"}));
  CHECK(cfg.numbers("empty")->empty());
}

TEST_CASE("config comments respect quotes", "[config]") {
  const auto cfg = ConfigFile::parse(
      "# full line comment\n"
      "a = 5 # trailing comment\n"
      "b = \"has # inside\" # outside\n"
      "\n"
      "   \n"
      "c = bare value # chopped\n");
  CHECK(cfg.uinteger("a") == 5);
  CHECK(cfg.str("b") == "has # inside");
  CHECK(cfg.str("c") == "bare value");
}

TEST_CASE("config parse errors name the line", "[config]") {
  const auto expect_error = [](const std::string& text, const std::string& needle) {
    try {
      ConfigFile::parse(text);
      FAIL("expected parse error for: " << text);
    } catch (const Error& e) {
      CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring(needle));
    }
  };
  expect_error("a = 1\nb = 2\nno equals sign here\n", "line 3");
  expect_error("a = 1\nb = 2\nno equals sign here\n", "expected key = value");
  expect_error("[unclosed\n", "unterminated section header");
  expect_error("[bad name]\n", "invalid section name");
  expect_error("a = \"unterminated\n", "unterminated string");
  expect_error("a = [1, 2\n", "unterminated array");
  expect_error("a =\n", "missing value");
  expect_error("bad key = 1\n", "invalid key");
}

TEST_CASE("config getters reject wrong types", "[config]") {
  const auto cfg = ConfigFile::parse(
      "n = 7\n"
      "s = hello\n"
      "arr = [1, 2]\n"
      "neg = -3\n"
      "mixed = [1, \"a\"]\n");
  CHECK_THROWS_AS(cfg.boolean("n"), Error);
  CHECK_THROWS_AS(cfg.number("s"), Error);
  CHECK_THROWS_AS(cfg.str("n"), Error);
  CHECK_THROWS_AS(cfg.uinteger("neg"), Error);
  CHECK(cfg.integer("neg") == -3);
  CHECK_THROWS_AS(cfg.numbers("s"), Error);
  CHECK_THROWS_AS(cfg.strings("arr"), Error);
  CHECK_THROWS_AS(cfg.numbers("mixed"), Error);
  CHECK_THROWS_AS(cfg.strings("mixed"), Error);
}

TEST_CASE("config file round trip and json echo", "[config]") {
  testutil::TempDir dir("config");
  const auto path = dir.path / "run.conf";
  {
    std::ofstream out(path);
    out << "[gen]\nmethod = random\np_range = [0, 15]\n[engine]\n"
           "command = tesseract {input_path} stdout -l {lang}\n";
  }
  const auto cfg = ConfigFile::parse_file(path);
  CHECK(cfg.str("gen.method") == "random");
  CHECK(cfg.str("engine.command") == "tesseract {input_path} stdout -l {lang}");

  const auto j = cfg.to_json();
  CHECK(j.at("gen.method") == "random");
  CHECK(j.at("gen.p_range").is_array());
  CHECK(j.at("gen.p_range")[1] == 15);

  CHECK_THROWS_AS(ConfigFile::parse_file(dir.path / "missing.conf"), Error);
}
