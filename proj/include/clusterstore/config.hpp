#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "clusterstore/types.hpp"

namespace cstore {

/// Shortest round-trip decimal form; keeps CSV output byte-stable.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// key=value configuration file. Lines starting with '#' and blank lines are
/// ignored. Unknown keys are kept so callers can reject or ignore them.
class KeyValueFile {
 public:
  KeyValueFile() = default;

  static KeyValueFile parse(std::istream& in, const std::string& name = "<config>") {
    KeyValueFile kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string_view sv = detail::trim(line);
      if (sv.empty() || sv.front() == '#') continue;
      auto eq = sv.find('=');
      if (eq == std::string_view::npos) {
        throw ParseError(name + ":" + std::to_string(lineno) +
                         ": expected key=value, got '" + std::string(sv) + "'");
      }
      std::string key(detail::trim(sv.substr(0, eq)));
      std::string value(detail::trim(sv.substr(eq + 1)));
      if (key.empty()) {
        throw ParseError(name + ":" + std::to_string(lineno) + ": empty key");
      }
      kv.values_[key] = value;
    }
    return kv;
  }

  static KeyValueFile load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open config file: " + path);
    return parse(in, path);
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key, std::string fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(it->second.data(),
                                   it->second.data() + it->second.size(), out);
    if (ec != std::errc() || p != it->second.data() + it->second.size()) {
      throw ParseError("config key '" + key + "': not an integer: " + it->second);
    }
    return out;
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    double out = 0;
    auto [p, ec] = std::from_chars(it->second.data(),
                                   it->second.data() + it->second.size(), out);
    if (ec != std::errc() || p != it->second.data() + it->second.size()) {
      throw ParseError("config key '" + key + "': not a number: " + it->second);
    }
    return out;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "off" || v == "0" || v == "no") return false;
    throw ParseError("config key '" + key + "': not a boolean: " + v);
  }

  const std::map<std::string, std::string>& values() const { return values_; }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace cstore
