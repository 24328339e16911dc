// Command-line front end: reproducible corpus synthesis and evaluation
// pipelines, one subcommand per stage.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ocrsynth/config.hpp"
#include "ocrsynth/ocrsynth.hpp"

namespace {

using namespace ocrsynth;
namespace fs = std::filesystem;

constexpr const char* kEngineEnvVar = "OCRSYNTH_OCR_ENGINE";

// Bad invocation or configuration: exit 1. Library Error: exit 2.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

void note(const std::string& msg) { std::fprintf(stderr, "%s\n", msg.c_str()); }
void warn(const std::string& msg) { std::fprintf(stderr, "warning: %s\n", msg.c_str()); }

template <typename T, typename U>
T pick(const std::optional<U>& flag, const std::optional<T>& cfg, T fallback) {
  if (flag) return static_cast<T>(*flag);
  if (cfg) return *cfg;
  return fallback;
}

struct GlobalArgs {
  std::optional<std::string> config_path;
  std::optional<uint64_t> seed;
  std::optional<unsigned> jobs;

  ConfigFile config;  // parsed in main after CLI11

  void load() {
    if (config_path) config = ConfigFile::parse_file(*config_path);
  }
  unsigned resolved_jobs() const {
    if (jobs) return std::max(1u, *jobs);
    if (const auto c = config.uinteger("jobs")) return std::max<uint64_t>(1, *c);
    return 1;
  }
};

void add_globals(CLI::App* sub, GlobalArgs& g) {
  sub->add_option("--config", g.config_path, "TOML-style configuration file");
  sub->add_option("--seed", g.seed, "Master seed");
  sub->add_option("--jobs", g.jobs, "Worker thread count");
}

std::vector<std::string> read_lines(const fs::path& path) {
  const std::string text = read_file(path);
  std::vector<std::string> lines;
  size_t pos = 0;
  while (pos < text.size()) {
    const size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) {
      lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, eol - pos));
    pos = eol + 1;
  }
  return lines;
}

FontSet load_fonts(const std::vector<std::string>& paths) {
  if (paths.empty()) throw UsageError("no fonts given");
  if (paths.size() == 1 && paths[0].size() > 5 &&
      paths[0].substr(paths[0].size() - 5) == ".json")
    return FontSet::load_manifest(paths[0]);
  std::vector<fs::path> files(paths.begin(), paths.end());
  return FontSet::from_files(files);
}

int64_t elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now() - start)
      .count();
}

// ---------------------------------------------------------------- profile

struct ProfileArgs {
  std::string input, output;
  std::optional<std::string> language;
  std::optional<uint64_t> min_count;
};

int run_profile(const ProfileArgs& a, GlobalArgs& g) {
  const auto start = std::chrono::steady_clock::now();
  const std::string language = pick(a.language, g.config.str("profile.language"), std::string());
  const uint64_t min_count =
      pick(a.min_count, g.config.uinteger("profile.min_count"), uint64_t{1});
  if (min_count == 0) throw UsageError("--min-count must be positive");

  const std::string text = read_file(a.input);
  const CharsetProfile profile = build_charset_profile(text, language, min_count);
  write_file(a.output, profile.to_json().dump(2) + "\n");
  note("profile: " + std::to_string(profile.counts.size()) + " characters seen, " +
       std::to_string(profile.alphabet().size()) + " in alphabet");

  RunManifest m;
  m.subcommand = "profile";
  m.config = {{"language", language}, {"min_count", min_count}};
  m.add_input(a.input);
  m.add_output(a.output);
  m.duration_ms = elapsed_ms(start);
  m.write_alongside(a.output);
  return 0;
}

// ------------------------------------------------------------------ chunk

struct ChunkArgs {
  std::string input, output;
  std::optional<std::string> language;
  std::optional<uint64_t> limit;
};

int run_chunk(const ChunkArgs& a, GlobalArgs& g) {
  const auto start = std::chrono::steady_clock::now();
  const std::string language = pick(a.language, g.config.str("chunk.language"), std::string());
  const uint64_t limit =
      pick(a.limit, g.config.uinteger("chunk.limit"), uint64_t{default_chunk_limit(language)});
  if (limit == 0) throw UsageError("--limit must be positive");

  const std::string text = read_file(a.input);
  const std::vector<Chunk> chunks = chunk_corpus(text, limit);
  write_chunks(chunks, a.output);
  note("chunk: " + std::to_string(chunks.size()) + " chunks, limit " + std::to_string(limit));

  RunManifest m;
  m.subcommand = "chunk";
  m.config = {{"language", language}, {"limit", limit}};
  m.add_input(a.input);
  m.add_output(a.output);
  m.duration_ms = elapsed_ms(start);
  m.write_alongside(a.output);
  return 0;
}

// ------------------------------------------------------------------ split

struct SplitArgs {
  std::string input, out_dir;
};

int run_split(const SplitArgs& a, GlobalArgs& g) {
  const auto start = std::chrono::steady_clock::now();
  const uint64_t seed = pick(g.seed, g.config.uinteger("split.seed"), uint64_t{0});
  const std::vector<Chunk> chunks = read_chunks(a.input);
  const CorpusSplit split = split_corpus(chunks, seed);

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  write_chunks(split.extract, dir / "extract.txt");
  write_chunks(split.train, dir / "train.txt");
  write_chunks(split.val, dir / "val.txt");
  write_chunks(split.test, dir / "test.txt");
  note("split: extract " + std::to_string(split.extract.size()) + ", train " +
       std::to_string(split.train.size()) + ", val " + std::to_string(split.val.size()) +
       ", test " + std::to_string(split.test.size()));

  RunManifest m;
  m.subcommand = "split";
  m.config = {{"seed", seed}};
  m.master_seed = seed;
  m.add_input(a.input);
  for (const char* name : {"extract.txt", "train.txt", "val.txt", "test.txt"})
    m.add_output(dir / name);
  m.duration_ms = elapsed_ms(start);
  m.write_alongside(dir / "split");
  return 0;
}

// -------------------------------------------------------------- simmatrix

struct SimmatrixArgs {
  std::string profile, output;
  std::vector<std::string> fonts;
  std::vector<std::string> detectors;
  std::optional<int> canvas;
  std::optional<double> margin;
  std::optional<int> max_keypoints;
  std::optional<int> top_k;
  bool sparse = false;
  bool keep_raw = false;
};

int run_simmatrix(const SimmatrixArgs& a, GlobalArgs& g) {
  const auto start = std::chrono::steady_clock::now();
  MatrixBuildParams params;
  params.canvas = pick(a.canvas, g.config.integer("simmatrix.canvas"), int64_t{64});
  params.margin = pick(a.margin, g.config.number("simmatrix.margin"), 0.125);
  params.max_keypoints =
      pick(a.max_keypoints, g.config.integer("simmatrix.max_keypoints"), int64_t{100});
  params.detectors = a.detectors.empty()
                         ? g.config.strings("simmatrix.detectors")
                               .value_or(std::vector<std::string>{"orb", "sift"})
                         : a.detectors;
  params.keep_raw = a.keep_raw || g.config.boolean("simmatrix.keep_raw").value_or(false);
  params.jobs = g.resolved_jobs();
  if (params.canvas < 32) throw UsageError("--canvas must be at least 32");
  if (params.margin < 0.0 || params.margin >= 0.5) throw UsageError("--margin must be in [0, 0.5)");
  if (params.max_keypoints < 1) throw UsageError("--max-keypoints must be positive");

  size_t top_k = 0;
  const auto cfg_top_k = g.config.integer("simmatrix.top_k");
  if (a.top_k || cfg_top_k) {
    const int64_t k = a.top_k ? *a.top_k : *cfg_top_k;
    if (k < 1) throw UsageError("--top-k must be positive");
    top_k = static_cast<size_t>(k);
  } else if (a.sparse || g.config.boolean("simmatrix.sparse").value_or(false)) {
    top_k = 50;
  }

  const CharsetProfile profile =
      CharsetProfile::from_json(nlohmann::json::parse(read_file(a.profile)));
  const FontSet fonts = load_fonts(a.fonts);

  std::mutex progress_mutex;
  params.progress = [&](size_t done, size_t total) {
    std::lock_guard<std::mutex> lock(progress_mutex);
    const size_t step = std::max<size_t>(1, total / 20);
    if (done % step == 0 || done == total)
      std::fprintf(stderr, "simmatrix: %zu/%zu pairs\r", done, total);
    if (done == total) std::fprintf(stderr, "\n");
  };

  const GlyphSimilarityMatrix matrix = build_similarity_matrix(profile, fonts, params);
  matrix.save(a.output, top_k);
  note("simmatrix: " + std::to_string(matrix.alphabet.size()) + " characters, fonts digest " +
       matrix.fonts_digest);

  RunManifest m;
  m.subcommand = "simmatrix";
  m.config = {{"canvas", params.canvas},
              {"margin", params.margin},
              {"max_keypoints", params.max_keypoints},
              {"detectors", params.detectors},
              {"keep_raw", params.keep_raw},
              {"top_k", top_k},
              {"fonts", a.fonts}};
  m.add_input(a.profile);
  m.add_output(a.output);
  m.duration_ms = elapsed_ms(start);
  m.write_alongside(a.output);
  return 0;
}

// -------------------------------------------------------------------- gen

struct GenArgs {
  std::string method, input, out_dir;
  std::optional<std::string> profile, matrix, model;
  std::vector<double> p_range;
  std::vector<double> ratio;
  std::optional<unsigned> augment;
  // image method
  std::vector<std::string> fonts;
  std::optional<std::string> engine, lang;
  std::optional<double> timeout;
  std::optional<int> point_size, line_width, padding;
  bool force_identity = false;
};

OcrEngine resolve_engine(const GenArgs& a, const GlobalArgs& g) {
  OcrEngine engine = default_tesseract_engine();
  if (const auto c = g.config.str("engine.command")) engine.command = *c;
  if (const char* env = std::getenv(kEngineEnvVar); env && *env) engine.command = env;
  if (a.engine) engine.command = *a.engine;
  engine.lang = pick(a.lang, g.config.str("engine.lang"), std::string("eng"));
  engine.timeout_sec = pick(a.timeout, g.config.number("engine.timeout_sec"), 30.0);
  try {
    engine.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return engine;
}

int run_gen(const GenArgs& a, GlobalArgs& g) {
  const auto start = std::chrono::steady_clock::now();
  GenerationConfig config;
  config.method = a.method;
  std::vector<double> p_range = a.p_range;
  if (p_range.empty())
    p_range = g.config.numbers("gen.p_range").value_or(std::vector<double>{0.0, 15.0});
  if (p_range.size() != 2) throw UsageError("--p-range expects two values: low high");
  config.p_lo = p_range[0];
  config.p_hi = p_range[1];
  std::vector<double> ratio = a.ratio;
  if (ratio.empty())
    ratio = g.config.numbers("gen.ratio").value_or(std::vector<double>{5.0, 1.0, 1.0});
  if (ratio.size() != 3) throw UsageError("--ratio expects three values: sub ins del");
  config.ratio = {ratio[0], ratio[1], ratio[2]};
  config.master_seed = pick(g.seed, g.config.uinteger("gen.seed"), uint64_t{0});
  config.augmentation =
      pick(a.augment, g.config.uinteger("gen.augment"), uint64_t{1});
  try {
    config.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  std::vector<std::string> missing;
  if ((config.method == "random" || config.method == "glyph") && !a.profile)
    missing.push_back("--profile");
  if (config.method == "glyph" && !a.matrix) missing.push_back("--matrix");
  if (config.method == "realworld" && !a.model) missing.push_back("--model");
  if (config.method == "image" && a.fonts.empty()) missing.push_back("--fonts");
  if (!missing.empty()) {
    std::string flags = missing[0];
    for (size_t i = 1; i < missing.size(); ++i) flags += " and " + missing[i];
    throw UsageError("gen --method " + config.method + " requires " + flags);
  }
  if ((config.method == "random" || config.method == "glyph") && config.p_hi > 15.0)
    throw UsageError("--p-range upper bound must be at most 15 for method " + config.method);

  std::vector<Chunk> chunks = read_chunks(a.input);
  chunks = augment(chunks, config.augmentation);

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  const unsigned jobs = g.resolved_jobs();

  RunManifest m;
  m.subcommand = "gen";
  m.config = config.to_json();
  m.config["jobs"] = jobs;
  m.master_seed = config.master_seed;
  m.add_input(a.input);

  ParallelCorpus corpus;
  if (config.method == "image") {
    const OcrEngine engine = resolve_engine(a, g);
    const FontSet fonts = load_fonts(a.fonts);
    OcrImagingOptions opts;
    opts.workdir = dir / "pages";
    opts.point_size = pick(a.point_size, g.config.integer("image.point_size"), int64_t{24});
    opts.line_width = pick(a.line_width, g.config.integer("image.line_width"), int64_t{1000});
    opts.padding = pick(a.padding, g.config.integer("image.padding"), int64_t{16});
    opts.jobs = jobs;
    opts.force_identity =
        a.force_identity || g.config.boolean("image.force_identity").value_or(false);
    if (opts.point_size < 8) throw UsageError("--point-size must be at least 8");
    corpus = generate_ocr_dataset(chunks, fonts, engine, config.master_seed, opts, warn);
    corpus.config_digest = config.digest();
    m.config["engine"] = engine.command;
    m.config["engine_lang"] = engine.lang;
    m.config["engine_timeout_sec"] = engine.timeout_sec;
    m.config["point_size"] = opts.point_size;
    m.config["line_width"] = opts.line_width;
    m.config["padding"] = opts.padding;
    m.config["force_identity"] = opts.force_identity;
    m.config["fonts"] = a.fonts;
  } else {
    std::optional<CharsetProfile> profile;
    std::optional<GlyphSimilarityMatrix> matrix;
    std::optional<OcrErrorModel> model;
    if (a.profile) {
      profile = CharsetProfile::from_json(nlohmann::json::parse(read_file(*a.profile)));
      m.add_input(*a.profile);
    }
    if (a.matrix) {
      matrix = GlyphSimilarityMatrix::load(*a.matrix);
      m.add_input(*a.matrix);
      if (profile)
        for (const auto& w : matrix_compat_warnings(*matrix, *profile)) warn(w);
    }
    if (a.model) {
      model = OcrErrorModel::load(*a.model);
      m.add_input(*a.model);
    }
    corpus = generate_dataset(chunks, config, profile ? &*profile : nullptr,
                              matrix ? &*matrix : nullptr, model ? &*model : nullptr, jobs,
                              warn);
  }

  const fs::path jsonl = dir / "pairs.jsonl";
  corpus.write_jsonl(jsonl);
  corpus.export_text(dir / "clean.txt", dir / "noisy.txt", dir / "pairs.tsv");
  size_t failed = 0;
  for (const auto& p : corpus.pairs) failed += p.failed ? 1 : 0;
  note("gen: " + std::to_string(corpus.pairs.size()) + " pairs (sub " +
       std::to_string(corpus.n_sub) + ", ins " + std::to_string(corpus.n_ins) + ", del " +
       std::to_string(corpus.n_del) + (failed ? ", failed " + std::to_string(failed) : "") +
       ")");

  m.add_output(jsonl);
  m.add_output(dir / "clean.txt");
  m.add_output(dir / "noisy.txt");
  m.add_output(dir / "pairs.tsv");
  if (config.method == "image") m.add_output(dir / "pages" / "recipes.jsonl");
  m.duration_ms = elapsed_ms(start);
  m.write_alongside(jsonl);
  return 0;
}

// --------------------------------------------------------- extract-errors

struct ExtractArgs {
  std::string clean, ocr, output;
};

int run_extract_errors(const ExtractArgs& a, GlobalArgs&) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<std::string> clean = read_lines(a.clean);
  const std::vector<std::string> ocr = read_lines(a.ocr);
  if (clean.size() != ocr.size())
    throw Error("line counts differ: " + a.clean + " has " + std::to_string(clean.size()) +
                ", " + a.ocr + " has " + std::to_string(ocr.size()));

  std::vector<Alignment> alignments;
  alignments.reserve(clean.size());
  for (size_t i = 0; i < clean.size(); ++i) {
    if (clean[i].empty() || ocr[i].empty()) {
      warn("line " + std::to_string(i + 1) + ": empty " +
           (clean[i].empty() ? "clean" : "OCR") + " text; skipped");
      continue;
    }
    alignments.push_back(align(clean[i], ocr[i]));
  }
  if (alignments.empty()) throw Error("no non-empty line pairs to align");

  const OcrErrorModel model = extract_error_model(alignments);
  model.save(a.output);
  std::ostringstream msg;
  msg << "extract-errors: " << alignments.size() << " aligned pairs, base CER "
      << model.base_cer;
  note(msg.str());

  RunManifest m;
  m.subcommand = "extract-errors";
  m.config = {{"pairs_aligned", alignments.size()}};
  m.add_input(a.clean);
  m.add_input(a.ocr);
  m.add_output(a.output);
  m.duration_ms = elapsed_ms(start);
  m.write_alongside(a.output);
  return 0;
}

// ------------------------------------------------------------------ align

struct AlignArgs {
  std::string clean, ocr, output;
};

const char* op_name(OpKind k) {
  switch (k) {
    case OpKind::Match: return "match";
    case OpKind::Substitute: return "sub";
    case OpKind::Delete: return "del";
    case OpKind::Insert: return "ins";
  }
  return "?";
}

int run_align(const AlignArgs& a, GlobalArgs&) {
  const auto start = std::chrono::steady_clock::now();
  const std::string clean = read_file(a.clean);
  const std::string ocr = read_file(a.ocr);
  const Alignment alignment = align(clean, ocr);

  std::string tsv = "op\tclean\tocr\n";
  for (const auto& op : alignment.ops) {
    tsv += op_name(op.kind);
    tsv += '\t';
    if (op.kind != OpKind::Insert) tsv += encode_utf8(op.clean_char);
    tsv += '\t';
    if (op.kind != OpKind::Delete) tsv += encode_utf8(op.ocr_char);
    tsv += '\n';
  }
  write_file(a.output, tsv);
  note("align: " + std::to_string(alignment.ops.size()) + " ops, cost " +
       std::to_string(alignment.cost()));

  RunManifest m;
  m.subcommand = "align";
  m.config = nlohmann::ordered_json::object();
  m.add_input(a.clean);
  m.add_input(a.ocr);
  m.add_output(a.output);
  m.duration_ms = elapsed_ms(start);
  m.write_alongside(a.output);
  return 0;
}

// ------------------------------------------------------------------- eval

struct EvalArgs {
  std::string ref, ocr, corrected;
  std::optional<std::string> output, tsv;
};

int run_eval(const EvalArgs& a, GlobalArgs&) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<std::string> ref = read_lines(a.ref);
  const std::vector<std::string> ocr = read_lines(a.ocr);
  const std::vector<std::string> corrected = read_lines(a.corrected);
  if (ref.size() != ocr.size() || ref.size() != corrected.size())
    throw Error("line counts differ: ref " + std::to_string(ref.size()) + ", ocr " +
                std::to_string(ocr.size()) + ", corrected " + std::to_string(corrected.size()));

  std::vector<EvalTriple> triples;
  triples.reserve(ref.size());
  for (size_t i = 0; i < ref.size(); ++i) {
    if (ref[i].empty()) throw Error("ref line " + std::to_string(i + 1) + " is empty");
    triples.push_back({ref[i], ocr[i], corrected[i]});
  }

  std::string tsv;
  const EvalReport report = build_report(triples, a.tsv ? &tsv : nullptr);
  if (a.tsv) write_file(*a.tsv, tsv);

  const std::string json_text = report.to_json().dump(2) + "\n";
  if (a.output) {
    write_file(*a.output, json_text);
    std::fputs(report.to_text().c_str(), stdout);

    RunManifest m;
    m.subcommand = "eval";
    m.config = nlohmann::ordered_json::object();
    m.add_input(a.ref);
    m.add_input(a.ocr);
    m.add_input(a.corrected);
    m.add_output(*a.output);
    if (a.tsv) m.add_output(*a.tsv);
    m.duration_ms = elapsed_ms(start);
    m.write_alongside(*a.output);
  } else {
    std::fputs(json_text.c_str(), stdout);
    std::fputs(report.to_text().c_str(), stderr);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel OCR-noise corpus synthesis and evaluation"};
  app.require_subcommand(1);
  GlobalArgs g;
  add_globals(&app, g);

  ProfileArgs profile_args;
  auto* sub_profile = app.add_subcommand("profile", "Build a character-set profile from a corpus");
  sub_profile->fallthrough();
  sub_profile->add_option("--input", profile_args.input, "Corpus text file")->required();
  sub_profile->add_option("--output", profile_args.output, "Profile JSON path")->required();
  sub_profile->add_option("--language", profile_args.language, "Language tag");
  sub_profile->add_option("--min-count", profile_args.min_count,
                          "Minimum occurrences for alphabet membership");

  ChunkArgs chunk_args;
  auto* sub_chunk = app.add_subcommand("chunk", "Split a corpus into sentence-packed chunks");
  sub_chunk->fallthrough();
  sub_chunk->add_option("--input", chunk_args.input, "Corpus text file")->required();
  sub_chunk->add_option("--output", chunk_args.output, "Chunk file path")->required();
  sub_chunk->add_option("--language", chunk_args.language, "Language tag (sets default limit)");
  sub_chunk->add_option("--limit", chunk_args.limit, "Chunk character limit");

  SplitArgs split_args;
  auto* sub_split = app.add_subcommand("split", "Partition chunks into extract/train/val/test");
  sub_split->fallthrough();
  sub_split->add_option("--input", split_args.input, "Chunk file")->required();
  sub_split->add_option("--out-dir", split_args.out_dir, "Output directory")->required();

  SimmatrixArgs sim_args;
  auto* sub_sim = app.add_subcommand("simmatrix", "Build the glyph-similarity matrix");
  sub_sim->fallthrough();
  sub_sim->add_option("--profile", sim_args.profile, "Charset profile JSON")->required();
  sub_sim->add_option("--fonts", sim_args.fonts, "Font files or one manifest JSON")
      ->required()
      ->expected(-1);
  sub_sim->add_option("--output", sim_args.output, "Matrix JSON path")->required();
  sub_sim->add_option("--detectors", sim_args.detectors, "Keypoint detectors")->delimiter(',');
  sub_sim->add_option("--canvas", sim_args.canvas, "Glyph canvas size in px");
  sub_sim->add_option("--margin", sim_args.margin, "Glyph margin fraction");
  sub_sim->add_option("--max-keypoints", sim_args.max_keypoints, "Keypoint cap per glyph");
  sub_sim->add_option("--top-k", sim_args.top_k, "Keep only the k best entries per row");
  sub_sim->add_flag("--sparse", sim_args.sparse, "Sparse persistence (top 50 entries per row)");
  sub_sim->add_flag("--keep-raw", sim_args.keep_raw, "Embed unnormalized scores");

  GenArgs gen_args;
  auto* sub_gen = app.add_subcommand("gen", "Generate a parallel (clean, noisy) dataset");
  sub_gen->fallthrough();
  sub_gen->add_option("--method", gen_args.method, "random | image | realworld | glyph")
      ->required();
  sub_gen->add_option("--input", gen_args.input, "Chunk file")->required();
  sub_gen->add_option("--out-dir", gen_args.out_dir, "Output directory")->required();
  sub_gen->add_option("--profile", gen_args.profile, "Charset profile JSON (random, glyph)");
  sub_gen->add_option("--matrix", gen_args.matrix, "Similarity matrix JSON (glyph)");
  sub_gen->add_option("--model", gen_args.model, "Error model JSON (realworld)");
  sub_gen->add_option("--p-range", gen_args.p_range, "Target rate range in percent: low high")
      ->expected(2);
  sub_gen->add_option("--ratio", gen_args.ratio, "Operation ratio: sub ins del")->expected(3);
  sub_gen->add_option("--augment", gen_args.augment, "Augmentation factor k");
  sub_gen->add_option("--fonts", gen_args.fonts, "Font files or one manifest JSON (image)")
      ->expected(-1);
  sub_gen->add_option("--engine", gen_args.engine, "OCR engine command template (image)");
  sub_gen->add_option("--lang", gen_args.lang, "OCR engine language (image)");
  sub_gen->add_option("--timeout", gen_args.timeout, "OCR engine timeout in seconds (image)");
  sub_gen->add_option("--point-size", gen_args.point_size, "Render point size (image)");
  sub_gen->add_option("--line-width", gen_args.line_width, "Render line width in px (image)");
  sub_gen->add_option("--padding", gen_args.padding, "Render page padding in px (image)");
  sub_gen->add_flag("--force-identity", gen_args.force_identity,
                    "Skip degradation (image debugging)");

  ExtractArgs extract_args;
  auto* sub_extract =
      app.add_subcommand("extract-errors", "Extract an error model from aligned text files");
  sub_extract->fallthrough();
  sub_extract->add_option("--clean", extract_args.clean, "Clean text, one chunk per line")
      ->required();
  sub_extract->add_option("--ocr", extract_args.ocr, "OCR text, line-paired with --clean")
      ->required();
  sub_extract->add_option("--output", extract_args.output, "Error model JSON path")->required();

  AlignArgs align_args;
  auto* sub_align = app.add_subcommand("align", "Character-align a clean/OCR file pair");
  sub_align->fallthrough();
  sub_align->add_option("--clean", align_args.clean, "Clean text file")->required();
  sub_align->add_option("--ocr", align_args.ocr, "OCR text file")->required();
  sub_align->add_option("--output", align_args.output, "Edit-script TSV path")->required();

  EvalArgs eval_args;
  auto* sub_eval = app.add_subcommand("eval", "Score corrector output against references");
  sub_eval->fallthrough();
  sub_eval->add_option("--ref", eval_args.ref, "Reference text, one chunk per line")->required();
  sub_eval->add_option("--ocr", eval_args.ocr, "OCR text, line-paired")->required();
  sub_eval->add_option("--corrected", eval_args.corrected, "Corrected text, line-paired")
      ->required();
  sub_eval->add_option("--output", eval_args.output, "Report JSON path (default: stdout)");
  sub_eval->add_option("--tsv", eval_args.tsv, "Per-chunk detail TSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    g.load();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }

  try {
    if (app.got_subcommand(sub_profile)) return run_profile(profile_args, g);
    if (app.got_subcommand(sub_chunk)) return run_chunk(chunk_args, g);
    if (app.got_subcommand(sub_split)) return run_split(split_args, g);
    if (app.got_subcommand(sub_sim)) return run_simmatrix(sim_args, g);
    if (app.got_subcommand(sub_gen)) return run_gen(gen_args, g);
    if (app.got_subcommand(sub_extract)) return run_extract_errors(extract_args, g);
    if (app.got_subcommand(sub_align)) return run_align(align_args, g);
    if (app.got_subcommand(sub_eval)) return run_eval(eval_args, g);
    std::fprintf(stderr, "error: no subcommand\n");
    return 1;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
