#include "ilmlab/util/kv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ilmlab/util/error.hpp"

namespace ilmlab::util {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text, const std::string& context) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw ConfigError("expected a number for '" + context + "', got '" + text + "'");
  return v;
}

std::int64_t parse_int(const std::string& text, const std::string& context) {
  std::int64_t v = 0;
  const auto* end = text.data() + text.size();
  auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw ConfigError("expected an integer for '" + context + "', got '" + text + "'");
  return v;
}

KeyValues KeyValues::parse(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    const std::size_t line_offset = offset;
    offset += line.size() + 1;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw FormatError("expected 'key = value' line: '" + t + "'", line_offset);
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw FormatError("empty key", line_offset);
    kv.entries_[key] = trim(t.substr(eq + 1));
  }
  return kv;
}

KeyValues KeyValues::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string KeyValues::serialize() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

void KeyValues::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << serialize();
}

void KeyValues::set(const std::string& key, double value) { entries_[key] = format_double(value); }
void KeyValues::set(const std::string& key, std::int64_t value) { entries_[key] = std::to_string(value); }

std::optional<std::string> KeyValues::find(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValues::get_string(const std::string& key, const std::string& fallback) const {
  return find(key).value_or(fallback);
}

std::string KeyValues::require_string(const std::string& key) const {
  auto v = find(key);
  if (!v) throw ConfigError("missing required key '" + key + "'");
  return *v;
}

double KeyValues::get_double(const std::string& key, double fallback) const {
  auto v = find(key);
  return v ? parse_double(*v, key) : fallback;
}

std::int64_t KeyValues::get_int(const std::string& key, std::int64_t fallback) const {
  auto v = find(key);
  return v ? parse_int(*v, key) : fallback;
}

bool KeyValues::get_bool(const std::string& key, bool fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError("expected a boolean for '" + key + "', got '" + *v + "'");
}

void KeyValues::reject_unknown(const std::set<std::string>& allowed) const {
  for (const auto& [k, v] : entries_)
    if (!allowed.count(k)) throw ConfigError("unknown config key '" + k + "'");
}

void KeyValues::merge(const KeyValues& overrides) {
  for (const auto& [k, v] : overrides.entries_) entries_[k] = v;
}

}  // namespace ilmlab::util
