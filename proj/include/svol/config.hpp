#pragma once

// Declarative run configuration: a flat key-value tree in a small text
// format (`a.b.c = value`, '#' comments). Unknown keys are hard errors; no
// silent typo tolerance. Seeds must be explicit for tasks that draw random
// numbers.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace svol::cli {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

struct RunConfig {
  // insertion-ordered view for provenance embedding
  std::vector<std::pair<std::string, std::string>> entries;
  std::map<std::string, std::string> kv;

  bool has(const std::string& key) const { return kv.count(key) != 0; }
  std::string get_string(const std::string& key) const;
  std::string get_string_or(const std::string& key, const std::string& dflt) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double dflt) const;
  long long get_int(const std::string& key) const;
  long long get_int_or(const std::string& key, long long dflt) const;
  bool get_bool_or(const std::string& key, bool dflt) const;
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<std::string> get_string_list(const std::string& key) const;

  void set(const std::string& key, const std::string& value);
};

// Parses the file and applies overrides ("key=value" strings); validates
// every key against the known-key schema.
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides);
RunConfig parse_config_text(const std::string& text,
                            const std::vector<std::string>& overrides);

const std::vector<std::string>& known_keys();

}  // namespace svol::cli
