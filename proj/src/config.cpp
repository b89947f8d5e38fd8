#include "svol/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace svol::cli {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "task",
      "model.name",
      "model.mu",
      "model.sigma",
      "model.b",
      "model.rho",
      "payoff.type",
      "payoff.strike",
      "payoff.cash",
      "payoff.points",
      "payoff.terminal_slope",
      "x0",
      "y0",
      "maturity",
      "feller.c",
      "feller.tol",
      "validate.y_probe",
      "validate.samples",
      "mc.paths",
      "mc.steps",
      "mc.seed",
      "mc.antithetic",
      "mc.barriers",
      "mc.threads",
      "grid.nx",
      "grid.ny",
      "grid.steps",
      "grid.x_max_mult",
      "grid.y_max",
      "grid.y_max_mult",
      "demo.gap_threshold",
      "output.dir",
      "output.fields",
      "override.boundary",
      "sweep.task",
      "sweep.param",
      "sweep.values",
      "sweep.param2",
      "sweep.values2",
  };
  return keys;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto& keys = known_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end())
    throw ConfigError("unknown config key '" + key + "'");
  if (!kv.count(key)) entries.emplace_back(key, value);
  else
    for (auto& e : entries)
      if (e.first == key) e.second = value;
  kv[key] = value;
}

std::string RunConfig::get_string(const std::string& key) const {
  auto it = kv.find(key);
  if (it == kv.end()) throw ConfigError("missing required config key '" + key + "'");
  return it->second;
}

std::string RunConfig::get_string_or(const std::string& key,
                                     const std::string& dflt) const {
  auto it = kv.find(key);
  return it == kv.end() ? dflt : it->second;
}

double RunConfig::get_double(const std::string& key) const {
  const std::string s = get_string(key);
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not a number: '" + s + "'");
  }
}

double RunConfig::get_double_or(const std::string& key, double dflt) const {
  return has(key) ? get_double(key) : dflt;
}

long long RunConfig::get_int(const std::string& key) const {
  const std::string s = get_string(key);
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not an integer: '" + s + "'");
  }
}

long long RunConfig::get_int_or(const std::string& key, long long dflt) const {
  return has(key) ? get_int(key) : dflt;
}

bool RunConfig::get_bool_or(const std::string& key, bool dflt) const {
  if (!has(key)) return dflt;
  const std::string s = get_string(key);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("config key '" + key + "' is not a boolean: '" + s + "'");
}

std::vector<std::string> RunConfig::get_string_list(const std::string& key) const {
  const std::string s = get_string(key);
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> RunConfig::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& item : get_string_list(key)) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "' has a non-numeric entry: '" + item +
                        "'");
    }
  }
  return out;
}

RunConfig parse_config_text(const std::string& text,
                            const std::vector<std::string>& overrides) {
  RunConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
    cfg.set(key, value);
  }
  for (const std::string& ov : overrides) {
    const std::size_t eq = ov.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override '" + ov + "' must look like key=value");
    cfg.set(trim(ov.substr(0, eq)), trim(ov.substr(eq + 1)));
  }
  return cfg;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_config_text(buf.str(), overrides);
}

}  // namespace svol::cli
