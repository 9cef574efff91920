#include "eea/config.hpp"

#include <cmath>
#include <cstdlib>

#include "eea/error.hpp"
#include "eea/util.hpp"

namespace eea {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

RunConfig RunConfig::parse_text(const std::string& text) {
  RunConfig cfg;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string raw = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') {
      if (pos > text.size()) break;
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ConfigParse,
                  "line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw Error(ErrorCode::ConfigParse, "line " + std::to_string(line_no) + ": empty key");
    if (cfg.values_.count(key))
      throw Error(ErrorCode::ConfigParse,
                  "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    cfg.values_[key] = value;
    if (pos > text.size()) break;
  }
  return cfg;
}

RunConfig RunConfig::parse_file(const std::string& path) {
  return parse_text(read_file(path));
}

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string RunConfig::require_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end())
    throw Error(ErrorCode::ConfigParse, "missing required config key '" + key + "'");
  return it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  char* end = nullptr;
  const double v = std::strtod(it->second.c_str(), &end);
  if (end == it->second.c_str() || *end != '\0' || !std::isfinite(v))
    throw Error(ErrorCode::ConfigParse, "key '" + key + "': '" + it->second +
                                            "' is not a finite number");
  return v;
}

long long RunConfig::get_int(const std::string& key, long long fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  char* end = nullptr;
  const long long v = std::strtoll(it->second.c_str(), &end, 10);
  if (end == it->second.c_str() || *end != '\0')
    throw Error(ErrorCode::ConfigParse,
                "key '" + key + "': '" + it->second + "' is not an integer");
  return v;
}

std::uint64_t RunConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(it->second.c_str(), &end, 10);
  if (end == it->second.c_str() || *end != '\0')
    throw Error(ErrorCode::ConfigParse,
                "key '" + key + "': '" + it->second + "' is not an unsigned integer");
  return v;
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "1" || it->second == "true") return true;
  if (it->second == "0" || it->second == "false") return false;
  throw Error(ErrorCode::ConfigParse, "key '" + key + "': expected 0/1/true/false");
}

std::vector<std::string> RunConfig::get_list(
    const std::string& key, const std::vector<std::string>& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::string> items;
  std::size_t pos = 0;
  const std::string& text = it->second;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = trim(text.substr(pos, comma - pos));
    if (!item.empty()) items.push_back(item);
    pos = comma + 1;
  }
  if (items.empty())
    throw Error(ErrorCode::ConfigParse, "key '" + key + "' lists no items");
  return items;
}

void RunConfig::validate_keys(const std::set<std::string>& allowed) const {
  for (const auto& [key, value] : values_) {
    if (allowed.count(key)) continue;
    bool prefixed = false;
    for (const auto& a : allowed) {
      if (!a.empty() && a.back() == '.' && key.rfind(a, 0) == 0) {
        prefixed = true;
        break;
      }
    }
    if (!prefixed)
      throw Error(ErrorCode::ConfigParse, "unknown config key '" + key + "'");
  }
}

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& [key, value] : values_) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  }
  return out;
}

std::string RunConfig::hash() const { return to_hex(fnv1a64(canonical())); }

}  // namespace eea
