#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ilmlab::util {

/// Flat `key = value` text document. Lines starting with '#' are comments.
/// Keys are kept sorted so serialization is canonical.
class KeyValues {
 public:
  static KeyValues parse(const std::string& text);
  static KeyValues load(const std::string& path);

  std::string serialize() const;
  void save(const std::string& path) const;

  bool contains(const std::string& key) const { return entries_.count(key) != 0; }
  void set(const std::string& key, std::string value) { entries_[key] = std::move(value); }
  void set(const std::string& key, double value);
  void set(const std::string& key, std::int64_t value);
  void set(const std::string& key, int value) { set(key, static_cast<std::int64_t>(value)); }
  void set(const std::string& key, std::size_t value) { set(key, static_cast<std::int64_t>(value)); }
  void set(const std::string& key, bool value) { entries_[key] = value ? "true" : "false"; }

  std::optional<std::string> find(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  /// Throws ConfigError naming the first key not in `allowed`.
  void reject_unknown(const std::set<std::string>& allowed) const;
  /// Later entries win.
  void merge(const KeyValues& overrides);

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);
double parse_double(const std::string& text, const std::string& context);
std::int64_t parse_int(const std::string& text, const std::string& context);

}  // namespace ilmlab::util
