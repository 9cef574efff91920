#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace eea {

// Flat key-value run configuration: one `key = value` per line, `#` comments.
// Unknown keys are rejected against the per-command key set; every report
// embeds the hash of the canonical serialization plus the master seed.
class RunConfig {
 public:
  static RunConfig parse_text(const std::string& text);
  static RunConfig parse_file(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key,
                                    const std::vector<std::string>& fallback) const;

  // Throws ConfigParse on any key outside `allowed`; keys with an allowed
  // prefix (trailing '.') pass, e.g. "hyper.".
  void validate_keys(const std::set<std::string>& allowed) const;

  std::string canonical() const;  // sorted key=value lines
  std::string hash() const;       // hex digest of the canonical form

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace eea
