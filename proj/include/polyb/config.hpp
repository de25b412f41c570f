#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "polyb/forms.hpp"
#include "polyb/mesh.hpp"
#include "polyb/problems.hpp"

namespace polyb {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a command needs. Keys of the config file share the names of the
/// CLI flags (`tau1` sets stab.c1 and so on).
struct RunConfig {
  std::string problem = "example1";
  ProblemParameters params;
  std::string family = "squares";
  std::vector<int> levels{5, 10, 20, 40};
  std::uint64_t seed = 7;
  int order = 1;
  StabilizationParams stab;
  double tol = 1e-6;
  int max_iter = 50;
  int samples = 200;
  std::string out = "out";
  std::string mesh_file;           // overrides family/levels for solve and mesh
  std::optional<Rectangle> domain;  // defaults to the problem's own domain

  /// Throws ConfigError naming the first offending key.
  void validate() const;
};

/// Flat `key = value` lines; `#` starts a comment, blank lines are skipped.
/// Unknown keys and duplicates are rejected with the line number.
std::map<std::string, std::string> parse_key_values(std::istream& in, const std::string& source = "<config>");

/// Applies one key; throws ConfigError for unknown keys or malformed values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

RunConfig load_config(const std::string& path);
RunConfig config_from_stream(std::istream& in, const std::string& source = "<config>");

std::vector<int> parse_levels(const std::string& text);
const std::vector<std::string>& config_keys();

/// Problem described by the config (its domain replaced when `domain` is set).
ProblemSpec make_problem(const RunConfig& cfg);

}  // namespace polyb
