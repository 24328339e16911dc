#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ocrsynth/common.hpp"

namespace ocrsynth {

// TOML-style configuration: `[section]` headers and `key = value` lines.
// Values are quoted strings, booleans, integers, floats, flat arrays, or
// bare strings (the rest of the line, so command templates need no quoting
// unless they contain '#'). Keys are stored as "section.key".
class ConfigFile {
 public:
  ConfigFile() = default;

  static ConfigFile parse(std::string_view text) {
    ConfigFile cfg;
    std::string section;
    size_t line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
      const size_t eol = text.find('\n', pos);
      std::string line(text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                                      : eol - pos));
      pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
      ++line_no;
      strip_comment(line);
      trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') fail(line_no, "unterminated section header");
        std::string name = line.substr(1, line.size() - 2);
        trim(name);
        if (name.empty() || !valid_key(name)) fail(line_no, "invalid section name");
        section = name;
        continue;
      }
      const size_t eq = line.find('=');
      if (eq == std::string::npos) fail(line_no, "expected key = value");
      std::string key = line.substr(0, eq);
      std::string value = line.substr(eq + 1);
      trim(key);
      trim(value);
      if (key.empty() || !valid_key(key)) fail(line_no, "invalid key '" + key + "'");
      if (value.empty()) fail(line_no, "missing value for '" + key + "'");
      const std::string full = section.empty() ? key : section + "." + key;
      cfg.values_[full] = parse_value(value, line_no);
    }
    return cfg;
  }

  static ConfigFile parse_file(const std::filesystem::path& path) {
    return parse(read_file(path));
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::optional<std::string> str(const std::string& key) const {
    const auto* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) throw Error("config key " + key + ": expected a string");
    return v->get<std::string>();
  }

  std::optional<double> number(const std::string& key) const {
    const auto* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) throw Error("config key " + key + ": expected a number");
    return v->get<double>();
  }

  std::optional<int64_t> integer(const std::string& key) const {
    const auto* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_number_integer() && !v->is_number_unsigned())
      throw Error("config key " + key + ": expected an integer");
    return v->get<int64_t>();
  }

  std::optional<uint64_t> uinteger(const std::string& key) const {
    const auto* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<int64_t>() >= 0))
      throw Error("config key " + key + ": expected a non-negative integer");
    return v->get<uint64_t>();
  }

  std::optional<bool> boolean(const std::string& key) const {
    const auto* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) throw Error("config key " + key + ": expected a boolean");
    return v->get<bool>();
  }

  std::optional<std::vector<double>> numbers(const std::string& key) const {
    const auto* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_array()) throw Error("config key " + key + ": expected an array");
    std::vector<double> out;
    for (const auto& e : *v) {
      if (!e.is_number()) throw Error("config key " + key + ": expected numeric array");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::optional<std::vector<std::string>> strings(const std::string& key) const {
    const auto* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_array()) throw Error("config key " + key + ": expected an array");
    std::vector<std::string> out;
    for (const auto& e : *v) {
      if (!e.is_string()) throw Error("config key " + key + ": expected string array");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : values_) j[k] = v;
    return j;
  }

 private:
  static void fail(size_t line_no, const std::string& what) {
    throw Error("config parse error at line " + std::to_string(line_no) + ": " + what);
  }

  static void trim(std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    size_t e = s.find_last_not_of(" \t\r");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }

  static void strip_comment(std::string& s) {
    bool in_string = false;
    for (size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
      if (s[i] == '#' && !in_string) {
        s.resize(i);
        return;
      }
    }
  }

  static bool valid_key(const std::string& s) {
    for (char c : s)
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.')
        return false;
    return true;
  }

  static nlohmann::json parse_scalar(const std::string& raw, size_t line_no) {
    if (raw.empty()) fail(line_no, "empty value");
    if (raw.front() == '"') {
      if (raw.size() < 2 || raw.back() != '"') fail(line_no, "unterminated string");
      std::string out;
      for (size_t i = 1; i + 1 < raw.size(); ++i) {
        if (raw[i] == '\\' && i + 2 < raw.size() && (raw[i + 1] == '"' || raw[i + 1] == '\\')) {
          out += raw[i + 1];
          ++i;
        } else {
          out += raw[i];
        }
      }
      return out;
    }
    if (raw == "true") return true;
    if (raw == "false") return false;
    {
      uint64_t u = 0;
      const auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), u);
      if (ec == std::errc() && p == raw.data() + raw.size()) return u;
    }
    {
      int64_t i = 0;
      const auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), i);
      if (ec == std::errc() && p == raw.data() + raw.size()) return i;
    }
    {
      char* end = nullptr;
      const double d = std::strtod(raw.c_str(), &end);
      if (end == raw.c_str() + raw.size()) return d;
    }
    return raw;  // bare string
  }

  static nlohmann::json parse_value(const std::string& raw, size_t line_no) {
    if (raw.front() == '[') {
      if (raw.back() != ']') fail(line_no, "unterminated array");
      nlohmann::json arr = nlohmann::json::array();
      std::string inner = raw.substr(1, raw.size() - 2);
      std::string item;
      bool in_string = false;
      const auto flush = [&] {
        trim(item);
        if (!item.empty()) arr.push_back(parse_scalar(item, line_no));
        item.clear();
      };
      for (size_t i = 0; i < inner.size(); ++i) {
        if (inner[i] == '"' && (i == 0 || inner[i - 1] != '\\')) in_string = !in_string;
        if (inner[i] == ',' && !in_string) {
          flush();
        } else {
          item += inner[i];
        }
      }
      flush();
      return arr;
    }
    return parse_scalar(raw, line_no);
  }

  const nlohmann::json* find(const std::string& key) const {
    const auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
  }

  std::map<std::string, nlohmann::json> values_;
};

}  // namespace ocrsynth
