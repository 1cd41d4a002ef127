#pragma once

// Sectioned key-value configuration:
//
//   # comment
//   [section]
//   key = value
//
// Every key read by a module is declared up front; anything left unread is an
// error that names the key and its line.

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "evflex/types.hpp"

namespace evflex {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split(std::string_view s, char delim) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(delim, pos);
    out.emplace_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

class KeyValueConfig {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static KeyValueConfig parse(std::istream& in, std::string source = "<config>") {
    KeyValueConfig cfg;
    cfg.source_ = std::move(source);
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      const auto hash = raw.find('#');
      const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw InputError(fmt::format("{}:{}: malformed section header '{}'", cfg.source_, line_no, line));
        section = trim(line.substr(1, line.size() - 2));
        cfg.sections_.insert(section);
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw InputError(fmt::format("{}:{}: expected 'key = value', got '{}'", cfg.source_, line_no, line));
      const std::string key = trim(line.substr(0, eq));
      if (key.empty()) throw InputError(fmt::format("{}:{}: empty key", cfg.source_, line_no));
      const std::string full = section.empty() ? key : section + "." + key;
      if (cfg.entries_.count(full))
        throw InputError(fmt::format("{}:{}: duplicate key '{}'", cfg.source_, line_no, full));
      cfg.entries_[full] = Entry{trim(line.substr(eq + 1)), line_no};
      cfg.order_.push_back(full);
    }
    return cfg;
  }

  static KeyValueConfig parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  static KeyValueConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open config file '{}'", path));
    return parse(in, path);
  }

  [[nodiscard]] bool has(const std::string& key) const { return entries_.count(key) != 0; }

  [[nodiscard]] const Entry* find(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    consumed_.insert(key);
    return &it->second;
  }

  [[nodiscard]] std::string get_string(const std::string& key, std::string fallback) const {
    const Entry* e = find(key);
    return e ? e->value : fallback;
  }

  [[nodiscard]] double get_double(const std::string& key, double fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    return parse_double(key, *e);
  }

  [[nodiscard]] long long get_int(const std::string& key, long long fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    long long v = 0;
    const auto* end = e->value.data() + e->value.size();
    const auto [p, ec] = std::from_chars(e->value.data(), end, v);
    if (ec != std::errc{} || p != end) throw bad_value(key, *e, "an integer");
    return v;
  }

  [[nodiscard]] bool get_bool(const std::string& key, bool fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
    if (e->value == "false" || e->value == "0" || e->value == "no") return false;
    throw bad_value(key, *e, "a boolean");
  }

  /// All keys of a section (without the section prefix), in file order.
  [[nodiscard]] std::vector<std::string> keys_in(const std::string& section) const {
    std::vector<std::string> out;
    const std::string prefix = section + ".";
    for (const auto& k : order_)
      if (k.rfind(prefix, 0) == 0) out.push_back(k.substr(prefix.size()));
    return out;
  }

  [[nodiscard]] bool has_section(const std::string& section) const { return sections_.count(section) != 0; }

  /// Throws on the first key that no reader consumed, or on unknown sections.
  void reject_unknown(const std::set<std::string>& known_sections) const {
    for (const auto& s : sections_)
      if (!known_sections.count(s)) throw InputError(fmt::format("{}: unknown section [{}]", source_, s));
    for (const auto& k : order_) {
      const auto dot = k.find('.');
      const std::string section = dot == std::string::npos ? std::string{} : k.substr(0, dot);
      if (!known_sections.count(section)) continue;
      if (!consumed_.count(k))
        throw InputError(fmt::format("{}:{}: unknown key '{}'", source_, entries_.at(k).line, k));
    }
  }

  /// Canonical text (sorted key=value lines) used for config hashing.
  [[nodiscard]] std::string canonical() const {
    std::string out;
    for (const auto& [k, e] : entries_) out += k + "=" + e.value + "\n";
    return out;
  }

  [[nodiscard]] const std::string& source() const { return source_; }

  [[nodiscard]] InputError bad_value(const std::string& key, const Entry& e, std::string_view expected) const {
    return InputError(
        fmt::format("{}:{}: key '{}' must be {}, got '{}'", source_, e.line, key, expected, e.value));
  }

  [[nodiscard]] double parse_double(const std::string& key, const Entry& e) const {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(e.value, &used);
    } catch (const std::exception&) {
      throw bad_value(key, e, "a number");
    }
    if (used != e.value.size()) throw bad_value(key, e, "a number");
    return v;
  }

 private:
  std::string source_;
  std::map<std::string, Entry> entries_;
  std::vector<std::string> order_;
  std::set<std::string> sections_;
  mutable std::set<std::string> consumed_;
};

}  // namespace evflex
