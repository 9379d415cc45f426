#include "gl/runconfig.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gl {

namespace {

std::vector<ParamSpec> common_params() {
  return {
      {"potential", "string", "gaussian",
       "gaussian | logcosh | table:<csv path>"},
      {"a", "double", "1", "logcosh amplitude (potential=logcosh)"},
      {"c_minus", "double", "1", "declared lower curvature bound (table)"},
      {"c_plus", "double", "2", "declared upper curvature bound (table)"},
      {"N", "int", "64", "torus side"},
      {"rho", "double", "0", "conserved mean density"},
      {"seed", "u64", "1", "master seed"},
      {"out", "string", "out", "output directory"},
      {"parallelism", "int", "0", "worker threads (0 = hardware)"},
  };
}

std::vector<ParamSpec> with_common(std::vector<ParamSpec> extra) {
  auto params = common_params();
  params.insert(params.end(), extra.begin(), extra.end());
  return params;
}

std::vector<ExperimentSchema> build_catalog() {
  std::vector<ExperimentSchema> cat;
  cat.push_back({"sample",
                 "draw one canonical-ensemble configuration and write it as CSV",
                 with_common({
                     {"sweeps", "long", "0", "MCMC sweeps (0 = 100*N default)"},
                 })});
  cat.push_back({"evolve",
                 "integrate one trajectory and write t,site,value records",
                 with_common({
                     {"dt", "double", "0", "step size (0 = 0.05/C_plus)"},
                     {"horizon", "double", "1", "time horizon"},
                     {"record_points", "int", "9", "snapshot count"},
                 })});
  cat.push_back({"identity-check",
                 "two-point correlation vs annealed walk kernel, z-scores",
                 with_common({
                     {"dt", "double", "0", "step size (0 = joint default)"},
                     {"t_grid", "list", "0.25,0.5,1,2", "comparison times"},
                     {"offsets", "list", "0,1,-1,2,-2,3,-3,4,-4", "site offsets"},
                     {"replicas", "long", "20000", "Monte Carlo replicas"},
                     {"burnin_sweeps", "long", "-1", "equilibration sweeps (-1 auto)"},
                 })});
  cat.push_back({"bounds-check",
                 "relaxation ratio sandwich between 1/C_plus and 1/C_minus",
                 with_common({
                     {"dt", "double", "0", "step size (0 = joint default)"},
                     {"t_grid", "list", "0.5,1,2", "comparison times"},
                     {"offsets", "list", "0,1,-1,2,-2", "site offsets"},
                     {"replicas", "long", "20000", "Monte Carlo replicas"},
                     {"burnin_sweeps", "long", "-1", "equilibration sweeps (-1 auto)"},
                 })});
  cat.push_back({"kernel",
                 "annealed transition kernel of the coupled walk",
                 with_common({
                     {"dt", "double", "0", "step size (0 = joint default)"},
                     {"t_grid", "list", "1,4", "kernel times"},
                     {"replicas", "long", "20000", "Monte Carlo replicas"},
                     {"burnin_sweeps", "long", "-1", "equilibration sweeps (-1 auto)"},
                 })});
  cat.push_back({"msd",
                 "mean-square displacement of the walk with a slope fit",
                 with_common({
                     {"dt", "double", "0", "step size (0 = joint default)"},
                     {"t_max", "double", "4", "horizon"},
                     {"points", "int", "24", "grid points"},
                     {"fit_min", "double", "0.5", "fit window start"},
                     {"fit_max", "double", "4", "fit window end"},
                     {"replicas", "long", "20000", "Monte Carlo replicas"},
                     {"burnin_sweeps", "long", "-1", "equilibration sweeps (-1 auto)"},
                 })});
  cat.push_back({"diffusion",
                 "diffusion coefficient: MSD slope plus variational upper bound",
                 with_common({
                     {"dt", "double", "0", "step size (0 = joint default)"},
                     {"fit_min", "double", "0.5", "fit window start"},
                     {"fit_max", "double", "4", "fit window end"},
                     {"replicas", "long", "20000", "MSD replicas"},
                     {"samples", "long", "20000", "variational samples"},
                     {"burnin_sweeps", "long", "-1", "equilibration sweeps (-1 auto)"},
                 })});
  cat.push_back({"variational-q",
                 "variational upper bound on the diffusion coefficient",
                 with_common({
                     {"samples", "long", "20000", "equilibrium samples"},
                     {"burnin_sweeps", "long", "-1", "equilibration sweeps (-1 auto)"},
                 })});
  cat.push_back({"smoothed",
                 "smoothed-field relaxation vs the Gaussian-profile prediction",
                 with_common({
                     {"dt", "double", "0", "step size (0 = 0.05/C_plus)"},
                     {"eps", "double", "0.0625", "smoothing scale"},
                     {"x", "double", "0", "macroscopic position"},
                     {"t", "double", "1", "macroscopic time"},
                     {"q", "double", "2", "diffusion coefficient for the prediction"},
                     {"replicas", "long", "3000", "Monte Carlo replicas"},
                     {"burnin_sweeps", "long", "-1", "equilibration sweeps (-1 auto)"},
                 })});
  cat.push_back({"spectral",
                 "walk spectrum, gap inequality and Witten identity reports",
                 with_common({
                     {"d", "int", "1", "dimension for the spectrum checks"},
                     {"trials", "long", "10000", "random fields for the inequality"},
                 })});
  cat.push_back({"gaussian-exact",
                 "closed-form space-time covariance of the Gaussian dynamics",
                 with_common({
                     {"t_grid", "list", "0,0.25,0.5,1,2", "times"},
                     {"max_offset", "int", "8", "largest |offset| written"},
                 })});
  cat.push_back({"monotonicity",
                 "same-noise coupling order preservation and monotone correlations",
                 with_common({
                     {"dt", "double", "0.0001", "step size"},
                     {"horizon", "double", "1", "coupling horizon"},
                     {"pairs", "long", "1000", "coupled pairs"},
                     {"replicas", "long", "20000", "correlation replicas"},
                     {"t", "double", "1", "correlation time"},
                     {"burnin_sweeps", "long", "-1", "equilibration sweeps (-1 auto)"},
                 })});
  return cat;
}

}  // namespace

const ParamSpec* ExperimentSchema::find(const std::string& key) const {
  for (const auto& p : params) {
    if (p.key == key) return &p;
  }
  return nullptr;
}

const std::vector<ExperimentSchema>& experiment_catalog() {
  static const std::vector<ExperimentSchema> cat = build_catalog();
  return cat;
}

const ExperimentSchema& schema_for(const std::string& experiment) {
  for (const auto& schema : experiment_catalog()) {
    if (schema.name == experiment) return schema;
  }
  throw ConfigurationError("unknown experiment: " + experiment);
}

RunConfig::RunConfig(std::string experiment,
                     std::map<std::string, std::string> values)
    : experiment_(std::move(experiment)), values_(std::move(values)) {}

bool RunConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::string RunConfig::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw ConfigurationError("missing config key: " + key);
  }
  return it->second;
}

int RunConfig::get_int(const std::string& key) const {
  return static_cast<int>(get_long(key));
}

long RunConfig::get_long(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    return std::stol(v);
  } catch (const std::exception&) {
    throw ConfigurationError("key " + key + ": expected integer, got '" + v + "'");
  }
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigurationError("key " + key + ": expected unsigned, got '" + v + "'");
  }
}

double RunConfig::get_double(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    return std::stod(v);
  } catch (const std::exception&) {
    throw ConfigurationError("key " + key + ": expected number, got '" + v + "'");
  }
}

std::vector<double> RunConfig::get_list(const std::string& key) const {
  std::vector<double> out;
  std::string v = get_string(key);
  std::replace(v.begin(), v.end(), ',', ' ');
  std::istringstream in(v);
  double x;
  while (in >> x) out.push_back(x);
  if (out.empty()) {
    throw ConfigurationError("key " + key + ": expected a number list");
  }
  return out;
}

std::vector<int> RunConfig::get_int_list(const std::string& key) const {
  std::vector<int> out;
  for (double v : get_list(key)) out.push_back(static_cast<int>(v));
  return out;
}

HamiltonianSpec RunConfig::hamiltonian() const {
  const std::string kind = get_string("potential");
  if (kind == "gaussian") return {PotentialSpec::gaussian(), std::nullopt};
  if (kind == "logcosh") {
    return {PotentialSpec::gaussian_plus_logcosh(get_double("a")), std::nullopt};
  }
  if (kind.rfind("table:", 0) == 0) {
    auto spec = PotentialSpec::user_table_from_csv(
        kind.substr(6), get_double("c_minus"), get_double("c_plus"));
    return {std::move(spec), std::nullopt};
  }
  throw ConfigurationError("unknown potential: " + kind);
}

std::vector<std::pair<std::string, std::string>> RunConfig::meta_lines() const {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("experiment", experiment_);
  for (const auto& [k, v] : values_) out.emplace_back(k, v);
  return out;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open config file: " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto strip = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    if (strip(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigurationError("config line " + std::to_string(lineno) +
                               ": expected key = value");
    }
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigurationError("config line " + std::to_string(lineno) +
                               ": empty key or value");
    }
    if (out.count(key)) {
      throw ConfigurationError("duplicate config key: " + key);
    }
    out[key] = value;
  }
  return out;
}

RunConfig resolve_config(const std::string& experiment,
                         const std::map<std::string, std::string>& file_values,
                         const std::map<std::string, std::string>& overrides) {
  const ExperimentSchema& schema = schema_for(experiment);
  std::map<std::string, std::string> values;
  for (const auto& [k, v] : file_values) {
    if (k == "experiment") {
      if (v != experiment) {
        throw ConfigurationError("config experiment '" + v +
                                 "' does not match subcommand '" + experiment + "'");
      }
      continue;
    }
    if (!schema.find(k)) {
      throw ConfigurationError("unknown config key for " + experiment + ": " + k);
    }
    values[k] = v;
  }
  for (const auto& [k, v] : overrides) {
    if (!schema.find(k)) {
      throw ConfigurationError("unknown override key for " + experiment + ": " + k);
    }
    values[k] = v;
  }
  for (const auto& p : schema.params) {
    if (values.count(p.key)) continue;
    if (p.required()) {
      throw ConfigurationError("missing required key: " + p.key);
    }
    values[p.key] = p.default_value;
  }
  return RunConfig(experiment, std::move(values));
}

std::string catalog_json() {
  nlohmann::ordered_json root = nlohmann::ordered_json::array();
  for (const auto& schema : experiment_catalog()) {
    nlohmann::ordered_json entry;
    entry["name"] = schema.name;
    entry["description"] = schema.description;
    nlohmann::ordered_json params = nlohmann::ordered_json::array();
    for (const auto& p : schema.params) {
      nlohmann::ordered_json param;
      param["key"] = p.key;
      param["type"] = p.type;
      param["default"] = p.default_value;
      param["description"] = p.description;
      params.push_back(param);
    }
    entry["params"] = params;
    root.push_back(entry);
  }
  return root.dump(2) + "\n";
}

}  // namespace gl
