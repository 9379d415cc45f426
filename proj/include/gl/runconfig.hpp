#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gl/errors.hpp"
#include "gl/potential.hpp"

namespace gl {

struct ParamSpec {
  std::string key;
  std::string type;           // int, long, u64, double, string, list
  std::string default_value;  // empty means required
  std::string description;
  bool required() const { return default_value.empty(); }
};

struct ExperimentSchema {
  std::string name;
  std::string description;
  std::vector<ParamSpec> params;

  const ParamSpec* find(const std::string& key) const;
};

// One schema per CLI subcommand.
const std::vector<ExperimentSchema>& experiment_catalog();
const ExperimentSchema& schema_for(const std::string& experiment);

// Fully resolved run parameters: file values + overrides + defaults,
// validated against the schema (unknown keys are errors).
class RunConfig {
 public:
  RunConfig(std::string experiment, std::map<std::string, std::string> values);

  const std::string& experiment() const { return experiment_; }
  const std::map<std::string, std::string>& values() const { return values_; }

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  int get_int(const std::string& key) const;
  long get_long(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::vector<double> get_list(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;

  // Potential from the `potential` / `a` / `c_minus` / `c_plus` keys.
  HamiltonianSpec hamiltonian() const;

  // Deterministic `key=value` lines embedded in every output file.
  std::vector<std::pair<std::string, std::string>> meta_lines() const;

 private:
  std::string experiment_;
  std::map<std::string, std::string> values_;
};

// `key = value` lines; '#' starts a comment; keys validated later.
std::map<std::string, std::string> parse_config_file(const std::string& path);

RunConfig resolve_config(const std::string& experiment,
                         const std::map<std::string, std::string>& file_values,
                         const std::map<std::string, std::string>& overrides);

// Machine-readable catalog (JSON text) for the `list` subcommand.
std::string catalog_json();

}  // namespace gl
