#include "polyb/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace polyb {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(x)) {
    throw ConfigError("'" + key + "': expected a number, got '" + v + "'");
  }
  return x;
}

long long to_integer(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("'" + key + "': expected an integer, got '" + v + "'");
  }
  return x;
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(trim(item));
  return parts;
}

const std::vector<std::string> kProblems = {"example1", "example2", "example3", "cavity", "zero", "patch1", "patch2"};

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "problem", "nu",   "kappa", "pr",  "ra",       "family",  "levels", "seed", "order",     "tau1",
      "tau2",    "taut", "tau2_power", "tol", "max_iter", "samples", "out",    "mesh_file", "domain"};
  return keys;
}

std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> levels;
  for (const auto& part : split_commas(text)) {
    if (part.empty()) throw ConfigError("'levels': empty entry in '" + text + "'");
    const long long n = to_integer("levels", part);
    if (n < 1 || n > 100000) throw ConfigError("'levels': " + part + " out of range");
    levels.push_back(static_cast<int>(n));
  }
  if (levels.empty()) throw ConfigError("'levels': no levels given");
  return levels;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "problem") {
    cfg.problem = value;
  } else if (key == "nu") {
    cfg.params.nu = to_double(key, value);
  } else if (key == "kappa") {
    cfg.params.kappa = to_double(key, value);
  } else if (key == "pr") {
    cfg.params.pr = to_double(key, value);
  } else if (key == "ra") {
    cfg.params.ra = to_double(key, value);
  } else if (key == "family") {
    cfg.family = value;
  } else if (key == "levels") {
    cfg.levels = parse_levels(value);
  } else if (key == "seed") {
    const long long s = to_integer(key, value);
    if (s < 0) throw ConfigError("'seed' must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(s);
  } else if (key == "order") {
    cfg.order = static_cast<int>(to_integer(key, value));
  } else if (key == "tau1") {
    cfg.stab.c1 = to_double(key, value);
  } else if (key == "tau2") {
    cfg.stab.c2 = to_double(key, value);
  } else if (key == "taut") {
    cfg.stab.cT = to_double(key, value);
  } else if (key == "tau2_power") {
    cfg.stab.tau2_power = to_double(key, value);
  } else if (key == "tol") {
    cfg.tol = to_double(key, value);
  } else if (key == "max_iter") {
    cfg.max_iter = static_cast<int>(to_integer(key, value));
  } else if (key == "samples") {
    cfg.samples = static_cast<int>(to_integer(key, value));
  } else if (key == "out") {
    cfg.out = value;
  } else if (key == "mesh_file") {
    cfg.mesh_file = value;
  } else if (key == "domain") {
    const auto parts = split_commas(value);
    if (parts.size() != 4) throw ConfigError("'domain': expected x0,y0,x1,y1");
    Rectangle r;
    r.lo = Point(to_double(key, parts[0]), to_double(key, parts[1]));
    r.hi = Point(to_double(key, parts[2]), to_double(key, parts[3]));
    cfg.domain = r;
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

std::map<std::string, std::string> parse_key_values(std::istream& in, const std::string& source) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "missing key");
    if (value.empty()) throw ConfigError(where + "missing value for '" + key + "'");
    const auto& keys = config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError(where + "unknown key '" + key + "'");
    if (!kv.emplace(key, value).second) throw ConfigError(where + "duplicate key '" + key + "'");
  }
  return kv;
}

RunConfig config_from_stream(std::istream& in, const std::string& source) {
  RunConfig cfg;
  for (const auto& [key, value] : parse_key_values(in, source)) {
    try {
      apply_setting(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return config_from_stream(in, path);
}

void RunConfig::validate() const {
  if (std::find(kProblems.begin(), kProblems.end(), problem) == kProblems.end()) {
    throw ConfigError("'problem': unknown problem '" + problem + "'");
  }
  try {
    mesh_family_from_string(family);
  } catch (const MeshError&) {
    throw ConfigError("'family': unknown mesh family '" + family + "'");
  }
  if (!(params.nu > 0.0)) throw ConfigError("'nu' must be positive");
  if (!(params.kappa > 0.0)) throw ConfigError("'kappa' must be positive");
  if (!(params.pr > 0.0)) throw ConfigError("'pr' must be positive");
  if (!(params.ra > 0.0)) throw ConfigError("'ra' must be positive");
  if (levels.empty()) throw ConfigError("'levels': no levels given");
  for (int n : levels) {
    if (n < 1) throw ConfigError("'levels': entries must be positive");
  }
  if (order != 1 && order != 2) throw ConfigError("'order' must be 1 or 2");
  try {
    stab.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("stabilization: ") + e.what());
  }
  if (!(tol > 0.0)) throw ConfigError("'tol' must be positive");
  if (max_iter < 1) throw ConfigError("'max_iter' must be at least 1");
  if (samples < 1) throw ConfigError("'samples' must be at least 1");
  if (out.empty()) throw ConfigError("'out' must not be empty");
  if (domain && !(domain->width() > 0.0 && domain->height() > 0.0)) throw ConfigError("'domain' has no area");
}

ProblemSpec make_problem(const RunConfig& cfg) {
  ProblemSpec pb = manufactured_problem(cfg.problem, cfg.params);
  if (cfg.domain) pb.domain = *cfg.domain;
  return pb;
}

}  // namespace polyb
