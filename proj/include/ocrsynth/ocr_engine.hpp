#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "ocrsynth/common.hpp"
#include "ocrsynth/cvmat.hpp"
#include "ocrsynth/degrade.hpp"
#include "ocrsynth/fonts.hpp"
#include "ocrsynth/inject.hpp"
#include "ocrsynth/parallel.hpp"
#include "ocrsynth/rng.hpp"

namespace ocrsynth {

// External OCR command template. {input_path} and {lang} are substituted
// with shell-quoted values; stdout is captured as the recognized text.
struct OcrEngine {
  std::string command;
  std::string lang = "eng";
  double timeout_sec = 30.0;

  void validate() const {
    if (command.find("{input_path}") == std::string::npos)
      throw Error("engine command must contain the {input_path} placeholder");
    if (command.find("{lang}") == std::string::npos)
      throw Error("engine command must contain the {lang} placeholder");
    if (!(timeout_sec > 0)) throw Error("engine timeout must be positive");
  }
};

inline OcrEngine default_tesseract_engine(std::string lang = "eng") {
  return OcrEngine{"tesseract {input_path} stdout -l {lang}", std::move(lang), 30.0};
}

namespace detail {

inline std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  out += "'";
  return out;
}

inline std::string substitute_placeholders(std::string tmpl, const std::string& key,
                                           const std::string& value) {
  size_t pos = 0;
  while ((pos = tmpl.find(key, pos)) != std::string::npos) {
    tmpl.replace(pos, key.size(), value);
    pos += value.size();
  }
  return tmpl;
}

inline std::string first_token(const std::string& command) {
  size_t b = command.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  size_t e = command.find_first_of(" \t", b);
  return command.substr(b, e == std::string::npos ? std::string::npos : e - b);
}

inline bool executable_exists(const std::string& name) {
  if (name.empty()) return false;
  if (name.find('/') != std::string::npos) return ::access(name.c_str(), X_OK) == 0;
  const char* path = std::getenv("PATH");
  if (!path) return false;
  std::istringstream dirs(path);
  std::string dir;
  while (std::getline(dirs, dir, ':')) {
    if (dir.empty()) continue;
    const std::string candidate = dir + "/" + name;
    if (::access(candidate.c_str(), X_OK) == 0) return true;
  }
  return false;
}

}  // namespace detail

// Fails fast when the engine binary is not on the system, before any
// rendering work is spent.
inline void probe_engine(const OcrEngine& engine) {
  engine.validate();
  const std::string tok = detail::first_token(engine.command);
  if (!detail::executable_exists(tok))
    throw Error("OCR engine unavailable: executable '" + tok + "' not found");
}

struct OcrRunResult {
  bool ok = false;
  std::string text;
  std::string error;
};

// Runs the engine on one image via /bin/sh, capturing stdout. Engine
// failures (nonzero exit, timeout) come back as ok = false, not exceptions.
inline OcrRunResult run_ocr(const OcrEngine& engine, const std::filesystem::path& input_path) {
  engine.validate();
  std::string cmd = detail::substitute_placeholders(engine.command, "{input_path}",
                                                    detail::shell_quote(input_path.string()));
  cmd = detail::substitute_placeholders(cmd, "{lang}", detail::shell_quote(engine.lang));

  int pipefd[2];
  if (::pipe(pipefd) != 0) return {false, "", "pipe() failed"};
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(pipefd[0]);
    ::close(pipefd[1]);
    return {false, "", "fork() failed"};
  }
  if (pid == 0) {
    ::dup2(pipefd[1], STDOUT_FILENO);
    ::close(pipefd[0]);
    ::close(pipefd[1]);
    const int devnull = ::open("/dev/null", O_RDWR);
    if (devnull >= 0) {
      ::dup2(devnull, STDIN_FILENO);
      ::dup2(devnull, STDERR_FILENO);
      ::close(devnull);
    }
    ::execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(pipefd[1]);

  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::milliseconds(static_cast<int64_t>(engine.timeout_sec * 1000));
  std::string output;
  bool timed_out = false;
  char buf[4096];
  for (;;) {
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (remaining.count() <= 0) {
      timed_out = true;
      break;
    }
    struct pollfd pfd{pipefd[0], POLLIN, 0};
    const int pr = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
    if (pr < 0) {
      if (errno == EINTR) continue;
      timed_out = true;
      break;
    }
    if (pr == 0) {
      timed_out = true;
      break;
    }
    const ssize_t n = ::read(pipefd[0], buf, sizeof(buf));
    if (n < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (n == 0) break;  // EOF: child closed its stdout
    output.append(buf, static_cast<size_t>(n));
  }
  ::close(pipefd[0]);

  int status = 0;
  if (timed_out) {
    ::kill(pid, SIGKILL);
    ::waitpid(pid, &status, 0);
    return {false, "", "engine timed out after " + std::to_string(engine.timeout_sec) + "s"};
  }
  // stdout is closed; allow the process the rest of the deadline to exit.
  for (;;) {
    const pid_t w = ::waitpid(pid, &status, WNOHANG);
    if (w == pid) break;
    if (w < 0 && errno != EINTR) return {false, "", "waitpid() failed"};
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      return {false, "", "engine timed out after " + std::to_string(engine.timeout_sec) + "s"};
    }
    ::usleep(2000);
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return {false, "", "engine exited with status " + std::to_string(code)};
  }
  while (!output.empty() &&
         (output.back() == '\n' || output.back() == '\r' || output.back() == ' ' ||
          output.back() == '\t' || output.back() == '\f' || output.back() == '\v'))
    output.pop_back();
  return {true, std::move(output), ""};
}

struct OcrImagingOptions {
  std::filesystem::path workdir;
  int point_size = 24;
  int line_width = 1000;
  int padding = 16;
  unsigned jobs = 1;
  bool force_identity = false;  // render without degradation
};

// Method 2: render each chunk with a seed-chosen font, degrade the page,
// run the external engine, and pair its output with the clean text. Failed
// renders or OCR runs produce records flagged failed instead of aborting the
// whole dataset. Per-chunk draw order: font index, then recipe seed.
inline ParallelCorpus generate_ocr_dataset(const std::vector<Chunk>& chunks, const FontSet& fonts,
                                           const OcrEngine& engine, uint64_t master_seed,
                                           const OcrImagingOptions& options,
                                           const std::function<void(const std::string&)>& log = {}) {
  if (chunks.empty()) throw Error("generate_ocr_dataset: no chunks");
  if (options.workdir.empty()) throw Error("generate_ocr_dataset: workdir is required");
  probe_engine(engine);
  std::filesystem::create_directories(options.workdir);

  ParallelCorpus corpus;
  corpus.method = "image";
  corpus.pairs.resize(chunks.size());
  std::vector<DegradationRecipe> recipes(chunks.size());
  std::vector<size_t> font_choices(chunks.size());
  std::vector<std::string> errors(chunks.size());

  parallel_for(chunks.size(), options.jobs, [&](size_t i) {
    const Chunk& chunk = chunks[i];
    const uint64_t seed = derive_seed(master_seed, chunk.id);
    Rng rng(seed);
    const size_t font = static_cast<size_t>(rng.below(fonts.size()));
    const uint64_t recipe_seed = rng.next_u64();
    DegradationRecipe recipe;
    if (options.force_identity)
      recipe.seed = recipe_seed;
    else
      recipe = sample_recipe(recipe_seed);
    recipes[i] = recipe;
    font_choices[i] = font;
    PairRecord rec{chunk.id, chunk.text, "", std::numeric_limits<double>::quiet_NaN(), seed,
                   true};
    try {
      const GrayImage page = degrade(
          fonts.render_chunk(font, chunk.text, options.point_size, options.line_width,
                             options.padding),
          recipe);
      const auto png = options.workdir / ("page_" + std::to_string(chunk.id) + ".png");
      write_png(page, png);
      OcrRunResult r = run_ocr(engine, png);
      if (r.ok) {
        rec.noisy = std::move(r.text);
        rec.failed = false;
      } else {
        errors[i] = r.error;
      }
    } catch (const Error& e) {
      errors[i] = e.what();
    }
    corpus.pairs[i] = std::move(rec);
  });

  if (log) {
    for (size_t i = 0; i < chunks.size(); ++i)
      if (corpus.pairs[i].failed)
        log("chunk " + std::to_string(corpus.pairs[i].id) + " failed: " + errors[i]);
  }

  // Recipe log, ordered by chunk id so reruns compare byte for byte.
  std::vector<size_t> order(chunks.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return chunks[a].id < chunks[b].id; });
  std::string lines;
  for (size_t i : order) {
    nlohmann::ordered_json rec{{"id", chunks[i].id},
                               {"font", fonts.info(font_choices[i]).id},
                               {"recipe", recipes[i].to_json()}};
    lines += rec.dump();
    lines += '\n';
  }
  write_file(options.workdir / "recipes.jsonl", lines);
  return corpus;
}

}  // namespace ocrsynth
