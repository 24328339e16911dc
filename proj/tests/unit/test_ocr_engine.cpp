#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "../testutil.hpp"
#include "ocrsynth/corpus.hpp"
#include "ocrsynth/degrade.hpp"
#include "ocrsynth/fonts.hpp"
#include "ocrsynth/ocr_engine.hpp"

using namespace ocrsynth;
namespace fs = std::filesystem;

namespace {

OcrEngine inline_engine(std::string command, double timeout = 10.0) {
  return OcrEngine{std::move(command), "eng", timeout};
}

}  // namespace

TEST_CASE("engine template validation", "[ocr_engine]") {
  CHECK_NOTHROW(default_tesseract_engine().validate());
  CHECK(default_tesseract_engine("deu").lang == "deu");

  OcrEngine e = inline_engine("myocr {input_path}");
  CHECK_THROWS_WITH(e.validate(), Catch::Matchers::ContainsSubstring("{lang}"));
  e.command = "myocr --lang {lang}";
  CHECK_THROWS_WITH(e.validate(), Catch::Matchers::ContainsSubstring("{input_path}"));
  e.command = "myocr {input_path} {lang}";
  CHECK_NOTHROW(e.validate());
  e.timeout_sec = 0;
  CHECK_THROWS_AS(e.validate(), Error);
}

TEST_CASE("probing fails fast on missing binaries", "[ocr_engine]") {
  CHECK_THROWS_WITH(probe_engine(inline_engine("no_such_binary_xyz {input_path} {lang}")),
                    Catch::Matchers::ContainsSubstring("no_such_binary_xyz"));
  CHECK_THROWS_WITH(probe_engine(inline_engine("/nonexistent/dir/ocr {input_path} {lang}")),
                    Catch::Matchers::ContainsSubstring("not found"));
  CHECK_NOTHROW(probe_engine(inline_engine("cat {input_path} {lang}")));
}

TEST_CASE("successful runs capture and trim stdout", "[ocr_engine]") {
  const auto r = run_ocr(
      inline_engine("printf 'hello world\\n\\n \\t\\n' && true {input_path} {lang}"), "x.png");
  REQUIRE(r.ok);
  CHECK(r.text == "hello world");
  CHECK(r.error.empty());

  // Interior newlines survive; only trailing whitespace is trimmed.
  const auto multi =
      run_ocr(inline_engine("printf 'line one\\nline two\\n' && true {input_path} {lang}"), "x");
  REQUIRE(multi.ok);
  CHECK(multi.text == "line one\nline two");

  // The {lang} placeholder carries the configured language.
  OcrEngine lang_probe = inline_engine("printf '%s' {lang} && true {input_path}");
  lang_probe.lang = "deu";
  const auto lr = run_ocr(lang_probe, "x");
  REQUIRE(lr.ok);
  CHECK(lr.text == "deu");
}

TEST_CASE("engine failures become results, not exceptions", "[ocr_engine]") {
  const auto r = run_ocr(inline_engine("exit 3 # {input_path} {lang}"), "x.png");
  CHECK_FALSE(r.ok);
  CHECK(r.text.empty());
  CHECK_THAT(r.error, Catch::Matchers::ContainsSubstring("status 3"));

  const auto missing = run_ocr(inline_engine("no_such_binary_xyz {input_path} {lang}"), "x.png");
  CHECK_FALSE(missing.ok);
  CHECK_THAT(missing.error, Catch::Matchers::ContainsSubstring("status 127"));
}

TEST_CASE("timeouts kill the engine and discard partial output", "[ocr_engine]") {
  const auto start = std::chrono::steady_clock::now();
  const auto r = run_ocr(
      inline_engine("printf 'partial' && sleep 5 && true {input_path} {lang}", 0.3), "x.png");
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - start);
  CHECK_FALSE(r.ok);
  CHECK(r.text.empty());
  CHECK_THAT(r.error, Catch::Matchers::ContainsSubstring("timed out"));
  CHECK(elapsed.count() < 2000);
}

TEST_CASE("input paths are shell quoted", "[ocr_engine]") {
  testutil::TempDir dir("quote");
  const fs::path weird = dir.path / "we ird'name $(x).txt";
  {
    std::ofstream out(weird);
    out << "recognized text\n";
  }
  const auto r = run_ocr(inline_engine("cat {input_path} && true {lang}"), weird);
  REQUIRE(r.ok);
  CHECK(r.text == "recognized text");
}

TEST_CASE("imaging pipeline pairs clean text with engine output", "[ocr_engine]") {
  if (!testutil::have_fonts()) SKIP("no fonts available");
  const FontSet fonts = testutil::load_test_fonts(2);

  std::vector<Chunk> chunks;
  chunks.emplace_back(0, "the quick brown fox");
  chunks.emplace_back(1, "jumps over the lazy dog");
  chunks.emplace_back(2, "pack my box with five dozen jugs");
  chunks.emplace_back(3, "sphinx of black quartz");

  const OcrEngine echo_engine =
      inline_engine("printf 'FIXED OUTPUT\\n' && true {input_path} {lang}");

  testutil::TempDir dir("imaging");
  OcrImagingOptions opt;
  opt.workdir = dir.path / "run1";
  const ParallelCorpus corpus = generate_ocr_dataset(chunks, fonts, echo_engine, 5, opt);

  REQUIRE(corpus.pairs.size() == 4);
  CHECK(corpus.method == "image");
  std::set<std::string> fonts_seen;
  for (const auto& p : corpus.pairs) {
    CHECK_FALSE(p.failed);
    CHECK(p.noisy == "FIXED OUTPUT");
    CHECK(std::isnan(p.target_p));
    CHECK(p.seed_used == derive_seed(5, p.id));
    CHECK(fs::exists(opt.workdir / ("page_" + std::to_string(p.id) + ".png")));
  }

  // Recipe log: one row per chunk, ascending ids, valid recipes.
  const std::string recipes = read_file(opt.workdir / "recipes.jsonl");
  std::vector<nlohmann::json> rows;
  for (size_t pos = 0; pos < recipes.size();) {
    const size_t eol = recipes.find('\n', pos);
    rows.push_back(nlohmann::json::parse(recipes.substr(pos, eol - pos)));
    pos = eol + 1;
  }
  REQUIRE(rows.size() == 4);
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].at("id") == i);
    fonts_seen.insert(rows[i].at("font").get<std::string>());
    CHECK_NOTHROW(DegradationRecipe::from_json(rows[i].at("recipe")));
  }
  for (const auto& f : fonts_seen)
    CHECK((f == fonts.info(0).id || f == fonts.info(1).id));

  // Same seed, more workers: byte-identical outputs.
  OcrImagingOptions opt3 = opt;
  opt3.workdir = dir.path / "run3";
  opt3.jobs = 3;
  const ParallelCorpus corpus3 = generate_ocr_dataset(chunks, fonts, echo_engine, 5, opt3);
  CHECK(corpus3.to_jsonl() == corpus.to_jsonl());
  CHECK(read_file(opt3.workdir / "recipes.jsonl") == recipes);

  // force_identity renders without degradation but keeps the seed column.
  OcrImagingOptions ident = opt;
  ident.workdir = dir.path / "ident";
  ident.force_identity = true;
  generate_ocr_dataset(chunks, fonts, echo_engine, 5, ident);
  const std::string ident_recipes = read_file(ident.workdir / "recipes.jsonl");
  for (size_t pos = 0; pos < ident_recipes.size();) {
    const size_t eol = ident_recipes.find('\n', pos);
    const auto row = nlohmann::json::parse(ident_recipes.substr(pos, eol - pos));
    CHECK(DegradationRecipe::from_json(row.at("recipe")).is_identity());
    pos = eol + 1;
  }
}

TEST_CASE("imaging failures are isolated per chunk", "[ocr_engine]") {
  if (!testutil::have_fonts()) SKIP("no fonts available");
  const FontSet fonts = testutil::load_test_fonts(1);

  std::vector<Chunk> chunks;
  chunks.emplace_back(0, "renders fine");
  chunks.emplace_back(9, "अअ");  // no renderable characters

  testutil::TempDir dir("imaging_fail");
  OcrImagingOptions opt;
  opt.workdir = dir.path / "w";

  std::vector<std::string> logged;
  const auto corpus = generate_ocr_dataset(
      chunks, fonts, inline_engine("printf 'ok\\n' && true {input_path} {lang}"), 1, opt,
      [&](const std::string& m) { logged.push_back(m); });
  REQUIRE(corpus.pairs.size() == 2);
  CHECK_FALSE(corpus.pairs[0].failed);
  CHECK(corpus.pairs[1].failed);
  CHECK(corpus.pairs[1].noisy.empty());
  CHECK_FALSE(fs::exists(opt.workdir / "page_9.png"));
  REQUIRE(logged.size() == 1);
  CHECK_THAT(logged[0], Catch::Matchers::ContainsSubstring("chunk 9"));

  // An engine that always fails flags every record instead of aborting.
  OcrImagingOptions opt2;
  opt2.workdir = dir.path / "w2";
  std::vector<Chunk> one;
  one.emplace_back(0, "some text");
  const auto failed =
      generate_ocr_dataset(one, fonts, inline_engine("false {input_path} {lang}"), 1, opt2);
  REQUIRE(failed.pairs.size() == 1);
  CHECK(failed.pairs[0].failed);

  // A missing engine binary aborts before any rendering work.
  OcrImagingOptions opt3;
  opt3.workdir = dir.path / "w3";
  CHECK_THROWS_WITH(
      generate_ocr_dataset(one, fonts, inline_engine("no_such_binary_xyz {input_path} {lang}"),
                           1, opt3),
      Catch::Matchers::ContainsSubstring("not found"));
  CHECK_FALSE(fs::exists(opt3.workdir));

  CHECK_THROWS_AS(generate_ocr_dataset({}, fonts, inline_engine("cat {input_path} {lang}"), 1,
                                       OcrImagingOptions{dir.path / "w4"}),
                  Error);
  OcrImagingOptions no_dir;
  CHECK_THROWS_AS(generate_ocr_dataset(one, fonts, inline_engine("cat {input_path} {lang}"), 1,
                                       no_dir),
                  Error);
}
