#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include "gl/dynamics.hpp"
#include "gl/estimators.hpp"
#include "gl/io.hpp"
#include "gl/runconfig.hpp"
#include "gl/sampler.hpp"
#include "gl/spectral.hpp"
#include "gl/walk.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitCheck = 4;

void attach_meta(gl::CsvTable& table, const gl::RunConfig& config) {
  for (const auto& [k, v] : config.meta_lines()) table.add_meta(k, v);
}

ordered_json config_json(const gl::RunConfig& config) {
  ordered_json j;
  for (const auto& [k, v] : config.meta_lines()) j[k] = v;
  return j;
}

void write_summary(const gl::RunConfig& config, ordered_json results) {
  ordered_json root;
  root["config"] = config_json(config);
  root["results"] = std::move(results);
  gl::write_text_atomic(config.get_string("out") + "/summary.json",
                        root.dump(2) + "\n");
}

gl::EstimatorOptions estimator_options(const gl::RunConfig& config) {
  gl::EstimatorOptions opts;
  opts.parallelism = config.get_int("parallelism");
  if (config.has("dt")) {
    const double dt = config.get_double("dt");
    if (dt > 0.0) opts.dt = dt;
  }
  if (config.has("burnin_sweeps")) {
    opts.burnin_sweeps = config.get_long("burnin_sweeps");
  }
  return opts;
}

struct CheckOutcome {
  bool enabled = false;
  bool failed = false;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!enabled || ok) return;
    failed = true;
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

// ---------------------------------------------------------------------

int run_sample(const gl::RunConfig& config, CheckOutcome&) {
  const auto h = config.hamiltonian();
  const int n = config.get_int("N");
  const double rho = config.get_double("rho");
  gl::RngStream rng(config.get_u64("seed"), 0);
  gl::FieldConfig field;
  double acceptance = -1.0;
  if (h.is_gaussian_product()) {
    field = gl::sample_canonical_gaussian(h, n, rho, rng);
  } else {
    long sweeps = config.get_long("sweeps");
    if (sweeps <= 0) sweeps = 100L * n;
    auto draw = gl::sample_canonical_mcmc(h, n, rho, sweeps, rng);
    for (const auto& w : draw.warnings) std::cerr << "warning: " << w << "\n";
    field = std::move(draw.config);
    acceptance = draw.acceptance_rate;
  }
  gl::write_text_atomic(config.get_string("out") + "/field.csv",
                        gl::field_to_csv(field, config.get_u64("seed")));
  ordered_json results;
  results["sum"] = field.sum();
  if (acceptance >= 0.0) results["acceptance_rate"] = acceptance;
  write_summary(config, results);
  return kExitOk;
}

int run_evolve(const gl::RunConfig& config, CheckOutcome&) {
  const auto h = config.hamiltonian();
  const int n = config.get_int("N");
  const double rho = config.get_double("rho");
  double dt = config.get_double("dt");
  if (dt <= 0.0) dt = gl::default_field_dt(h);
  const double horizon = config.get_double("horizon");
  const int points = config.get_int("record_points");

  gl::RngStream rng(config.get_u64("seed"), 0);
  const auto initial = gl::equilibrium_draw(h, n, rho, rng);
  std::vector<double> times;
  for (int k = 1; k <= points; ++k) times.push_back(horizon * k / points);
  const auto traj =
      gl::evolve(initial, h, horizon, dt, config.get_u64("seed"), 0, times);

  gl::CsvTable table({"t", "site", "value"});
  attach_meta(table, config);
  for (std::size_t s = 0; s < traj.times.size(); ++s) {
    for (int i = 0; i < n; ++i) {
      table.add_row_numeric(
          {traj.times[s], static_cast<double>(i), traj.snapshots[s].eta[i]});
    }
  }
  table.write(config.get_string("out") + "/trajectory.csv");

  ordered_json results;
  results["snapshots"] = traj.times.size();
  results["final_sum"] = traj.snapshots.back().sum();
  write_summary(config, results);
  return kExitOk;
}

int run_identity(const gl::RunConfig& config, CheckOutcome& check) {
  const auto h = config.hamiltonian();
  const auto rep = gl::identity_check(
      h, config.get_int("N"), config.get_double("rho"), config.get_list("t_grid"),
      config.get_int_list("offsets"), config.get_long("replicas"),
      config.get_u64("seed"), estimator_options(config));

  gl::CsvTable table({"quantity", "index", "t", "estimate", "stderr"});
  attach_meta(table, config);
  for (const auto& p : rep.points) {
    const auto idx = gl::format_double(p.offset);
    const auto t = gl::format_double(p.t);
    table.add_row(
        {"lhs", idx, t, gl::format_double(p.lhs), gl::format_double(p.lhs_se)});
    table.add_row(
        {"rhs", idx, t, gl::format_double(p.rhs), gl::format_double(p.rhs_se)});
    table.add_row({"rhs_raw", idx, t, gl::format_double(p.rhs_raw),
                   gl::format_double(p.rhs_se)});
    table.add_row({"z", idx, t, gl::format_double(p.z), "1"});
  }
  table.write(config.get_string("out") + "/identity.csv");

  ordered_json results;
  results["points"] = rep.points.size();
  results["frac_abs_z_below_3"] = rep.frac_abs_z_below_3;
  results["max_abs_z"] = rep.max_abs_z;
  write_summary(config, results);

  check.require(rep.frac_abs_z_below_3 >= 0.95, "fewer than 95% of |z| < 3");
  check.require(rep.max_abs_z < 4.0, "some |z| >= 4");
  return kExitOk;
}

int run_bounds(const gl::RunConfig& config, CheckOutcome& check) {
  const auto h = config.hamiltonian();
  const auto rep = gl::bounds_check(
      h, config.get_int("N"), config.get_double("rho"), config.get_list("t_grid"),
      config.get_int_list("offsets"), config.get_long("replicas"),
      config.get_u64("seed"), estimator_options(config));

  gl::CsvTable table({"quantity", "index", "t", "estimate", "stderr"});
  attach_meta(table, config);
  for (const auto& p : rep.points) {
    if (p.skipped) {
      table.add_row({"ratio_skipped", gl::format_double(p.offset),
                     gl::format_double(p.t), "nan", "nan"});
      continue;
    }
    table.add_row({"ratio", gl::format_double(p.offset), gl::format_double(p.t),
                   gl::format_double(p.ratio), gl::format_double(p.se)});
  }
  table.write(config.get_string("out") + "/bounds.csv");

  ordered_json results;
  results["lower"] = rep.lower;
  results["upper"] = rep.upper;
  results["violations"] = rep.n_violations;
  results["skipped"] = rep.n_skipped;
  write_summary(config, results);

  check.require(rep.n_violations == 0, "sandwich violation beyond 3 sigma");
  return kExitOk;
}

int run_kernel(const gl::RunConfig& config, CheckOutcome&) {
  const auto h = config.hamiltonian();
  double dt = config.has("dt") ? config.get_double("dt") : 0.0;
  if (dt <= 0.0) dt = gl::default_joint_dt(h);
  const auto kernels = gl::kernel_estimate(
      h, config.get_int("N"), config.get_double("rho"), config.get_list("t_grid"),
      config.get_long("replicas"), config.get_u64("seed"), dt,
      config.get_int("parallelism"),
      config.has("burnin_sweeps") ? config.get_long("burnin_sweeps") : -1);

  ordered_json results;
  for (std::size_t ki = 0; ki < kernels.size(); ++ki) {
    gl::CsvTable table({"offset", "probability", "stderr"});
    attach_meta(table, config);
    table.add_meta("t", gl::format_double(kernels[ki].t));
    for (std::size_t i = 0; i < kernels[ki].offsets.size(); ++i) {
      table.add_row_numeric({static_cast<double>(kernels[ki].offsets[i]),
                             kernels[ki].prob[i], kernels[ki].se[i]});
    }
    char name[64];
    std::snprintf(name, sizeof(name), "/kernel_%02zu.csv", ki);
    table.write(config.get_string("out") + name);
    results["t"].push_back(kernels[ki].t);
  }
  write_summary(config, results);
  return kExitOk;
}

int run_msd(const gl::RunConfig& config, CheckOutcome&) {
  const auto h = config.hamiltonian();
  double dt = config.has("dt") ? config.get_double("dt") : 0.0;
  if (dt <= 0.0) dt = gl::default_joint_dt(h);
  std::vector<double> grid;
  const int points = config.get_int("points");
  const double t_max = config.get_double("t_max");
  for (int k = 1; k <= points; ++k) grid.push_back(t_max * k / points);
  const auto series = gl::msd(
      h, config.get_int("N"), config.get_double("rho"), grid,
      config.get_long("replicas"), config.get_u64("seed"), dt,
      config.get_double("fit_min"), config.get_double("fit_max"),
      config.get_int("parallelism"),
      config.has("burnin_sweeps") ? config.get_long("burnin_sweeps") : -1);

  gl::CsvTable table({"t", "msd", "stderr"});
  attach_meta(table, config);
  for (std::size_t i = 0; i < series.t.size(); ++i) {
    table.add_row_numeric({series.t[i], series.msd[i], series.se[i]});
  }
  table.write(config.get_string("out") + "/msd.csv");

  ordered_json results;
  results["slope"] = series.slope_fit.slope;
  results["slope_se"] = series.slope_fit.slope_se;
  results["r2"] = series.slope_fit.r2;
  write_summary(config, results);
  return kExitOk;
}

int run_diffusion(const gl::RunConfig& config, CheckOutcome& check) {
  const auto h = config.hamiltonian();
  const int n = config.get_int("N");
  const double rho = config.get_double("rho");
  const auto opts = estimator_options(config);
  const auto q = gl::diffusion_coefficient_msd(
      h, n, rho, config.get_double("fit_min"), config.get_double("fit_max"),
      config.get_long("replicas"), config.get_u64("seed"), opts);
  const auto var = gl::variational_q_upper(
      h, n, rho, gl::default_variational_basis(h, rho),
      config.get_long("samples"), config.get_u64("seed") + 1, opts);

  gl::CsvTable table({"t", "msd", "stderr"});
  attach_meta(table, config);
  for (std::size_t i = 0; i < q.series.t.size(); ++i) {
    table.add_row_numeric({q.series.t[i], q.series.msd[i], q.series.se[i]});
  }
  table.write(config.get_string("out") + "/msd.csv");

  ordered_json results;
  results["q_msd"] = q.q;
  results["q_msd_se"] = q.se;
  results["r2"] = q.r2;
  results["q_variational_upper"] = var.q_upper;
  results["q_variational_upper_se"] = var.q_upper_se;
  results["two_mean_r1"] = var.objective_f0;
  write_summary(config, results);

  check.require(q.q >= 2.0 * h.c_minus() - 3.0 * q.se, "q below 2 C_minus");
  check.require(q.q <= 2.0 * h.c_plus() + 3.0 * q.se, "q above 2 C_plus");
  check.require(var.q_upper >= q.q - 3.0 * (q.se + var.q_upper_se),
                "variational bound below the MSD estimate");
  return kExitOk;
}

int run_variational(const gl::RunConfig& config, CheckOutcome& check) {
  const auto h = config.hamiltonian();
  const double rho = config.get_double("rho");
  const auto res = gl::variational_q_upper(
      h, config.get_int("N"), rho, gl::default_variational_basis(h, rho),
      config.get_long("samples"), config.get_u64("seed"),
      estimator_options(config));
  ordered_json results;
  results["q_upper"] = res.q_upper;
  results["q_upper_se"] = res.q_upper_se;
  results["two_mean_r1"] = res.objective_f0;
  results["ridge_applied"] = res.ridge_applied;
  results["coefficients"] = res.coefficients;
  write_summary(config, results);
  check.require(res.q_upper <= res.objective_f0 + 3.0 * res.q_upper_se,
                "bound above the f=0 value");
  check.require(res.q_upper >= 2.0 * h.c_minus() - 3.0 * res.q_upper_se,
                "bound below 2 C_minus");
  return kExitOk;
}

int run_smoothed(const gl::RunConfig& config, CheckOutcome& check) {
  const auto h = config.hamiltonian();
  const auto res = gl::smoothed_relaxation(
      h, config.get_int("N"), config.get_double("rho"), gl::Profile::triangular(),
      config.get_double("eps"), config.get_double("x"), config.get_double("t"),
      config.get_double("q"), config.get_long("replicas"), config.get_u64("seed"),
      estimator_options(config));

  gl::CsvTable table({"quantity", "index", "t", "estimate", "stderr"});
  attach_meta(table, config);
  table.add_row({"smoothed_estimate", "0",
                 gl::format_double(config.get_double("t")),
                 gl::format_double(res.estimate), gl::format_double(res.se)});
  table.add_row({"smoothed_prediction", "0",
                 gl::format_double(config.get_double("t")),
                 gl::format_double(res.prediction), "0"});
  table.write(config.get_string("out") + "/smoothed.csv");

  ordered_json results;
  results["estimate"] = res.estimate;
  results["se"] = res.se;
  results["prediction"] = res.prediction;
  results["prediction_lattice"] = res.prediction_lattice;
  results["diff_in_se"] = res.diff_in_se;
  results["micro_time"] = res.micro_time;
  write_summary(config, results);
  check.require(std::abs(res.estimate - res.prediction_lattice) <=
                    3.0 * res.se + 0.10 * std::abs(res.prediction_lattice),
                "estimate vs prediction beyond 3 se + 10%");
  return kExitOk;
}

int run_spectral(const gl::RunConfig& config, CheckOutcome& check) {
  const int n = config.get_int("N");
  const int d = config.get_int("d");
  const auto spectrum = gl::q_spectrum(n, d);
  const auto gap = gl::discrete_gap_inequality(n, d, config.get_long("trials"),
                                               config.get_u64("seed"));

  ordered_json results;
  results["lambda2_abs"] = gl::lambda2_magnitude(n);
  ordered_json head = ordered_json::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(spectrum.size(), 16); ++i) {
    head.push_back(spectrum[i]);
  }
  results["spectrum_head"] = head;
  results["gap_inequality_min_ratio"] = gap.min_ratio;
  results["gap_inequality_trials"] = gap.trials;
  if (d == 1 && n <= 1024) {
    const auto witten = gl::witten_check_gaussian(n);
    results["witten_max_discrepancy"] = witten.max_discrepancy;
    results["witten_kernel_modes"] = witten.kernel_modes;
    results["commutation_max_error"] = gl::commutation_check_gaussian(n);
    check.require(witten.max_discrepancy < 1e-10, "Witten identity discrepancy");
  }
  gl::write_text_atomic(config.get_string("out") + "/spectral.json",
                        results.dump(2) + "\n");
  write_summary(config, results);
  check.require(gap.min_ratio >= gap.lambda2_abs - 1e-10,
                "gap inequality violated");
  return kExitOk;
}

int run_gaussian_exact(const gl::RunConfig& config, CheckOutcome&) {
  const int n = config.get_int("N");
  const int max_offset = config.get_int("max_offset");
  gl::CsvTable table({"t", "offset", "covariance"});
  attach_meta(table, config);
  for (double t : config.get_list("t_grid")) {
    const auto row = gl::gaussian_cov_row(n, t);
    for (int i = -max_offset; i <= max_offset; ++i) {
      table.add_row_numeric({t, static_cast<double>(i), row[(i + n) % n]});
    }
  }
  table.write(config.get_string("out") + "/gaussian_exact.csv");
  ordered_json results;
  results["rows"] = (2 * max_offset + 1) * config.get_list("t_grid").size();
  write_summary(config, results);
  return kExitOk;
}

int run_monotonicity(const gl::RunConfig& config, CheckOutcome& check) {
  const auto h = config.hamiltonian();
  const int n = config.get_int("N");
  const double rho = config.get_double("rho");
  const double dt = config.get_double("dt");
  const double horizon = config.get_double("horizon");
  const long pairs = config.get_long("pairs");
  const std::uint64_t seed = config.get_u64("seed");

  long ordered = 0;
  const std::vector<double> times{horizon / 4, horizon / 2, horizon};
  for (long p = 0; p < pairs; ++p) {
    gl::RngStream rng(seed, static_cast<std::uint64_t>(p));
    auto lower = gl::equilibrium_draw(h, n, rho, rng);
    auto upper = lower;
    for (int i = 0; i < n; ++i) {
      upper.eta[i] += std::max(rng.next_normal(), 0.0);
    }
    const auto [tl, tu] = gl::coupled_evolve(
        lower, upper, h, horizon, dt, seed + 1, static_cast<std::uint64_t>(p), times);
    bool ok = true;
    for (std::size_t s = 0; s < tl.snapshots.size(); ++s) {
      double sup = 0.0;
      for (int i = 0; i < n; ++i) {
        sup = std::max({sup, std::abs(tl.snapshots[s].eta[i]),
                        std::abs(tu.snapshots[s].eta[i])});
      }
      const double tol = 1e-8 * (1.0 + sup);
      for (int i = 0; i < n; ++i) {
        if (tu.snapshots[s].eta[i] - tl.snapshots[s].eta[i] < -tol) ok = false;
      }
    }
    if (ok) ++ordered;
  }

  const auto f = gl::site_value(0);
  const auto g = gl::tanh_site(1);
  auto opts = estimator_options(config);
  const auto cov = gl::space_time_covariance(
      *f, *g, h, n, rho, {config.get_double("t")}, config.get_long("replicas"),
      seed + 2, opts);

  gl::CsvTable table({"quantity", "index", "t", "estimate", "stderr"});
  attach_meta(table, config);
  table.add_row({"ordered_fraction", "0", gl::format_double(horizon),
                 gl::format_double(static_cast<double>(ordered) / pairs), "0"});
  table.add_row({"monotone_cov", "0", gl::format_double(cov.forward.t.back()),
                 gl::format_double(cov.forward.est.back()),
                 gl::format_double(cov.forward.se.back())});
  table.write(config.get_string("out") + "/monotonicity.csv");

  ordered_json results;
  results["pairs"] = pairs;
  results["ordered"] = ordered;
  results["monotone_cov"] = cov.forward.est.back();
  results["monotone_cov_se"] = cov.forward.se.back();
  write_summary(config, results);

  check.require(ordered * 1000 >= pairs * 999,
                "order preserved in < 99.9% of pairs");
  check.require(cov.forward.est.back() >= -3.0 * cov.forward.se.back(),
                "monotone correlation below -3 se");
  return kExitOk;
}

int dispatch(const gl::RunConfig& config, CheckOutcome& check) {
  const std::string& name = config.experiment();
  if (name == "sample") return run_sample(config, check);
  if (name == "evolve") return run_evolve(config, check);
  if (name == "identity-check") return run_identity(config, check);
  if (name == "bounds-check") return run_bounds(config, check);
  if (name == "kernel") return run_kernel(config, check);
  if (name == "msd") return run_msd(config, check);
  if (name == "diffusion") return run_diffusion(config, check);
  if (name == "variational-q") return run_variational(config, check);
  if (name == "smoothed") return run_smoothed(config, check);
  if (name == "spectral") return run_spectral(config, check);
  if (name == "gaussian-exact") return run_gaussian_exact(config, check);
  if (name == "monotonicity") return run_monotonicity(config, check);
  throw gl::ConfigurationError("no runner for experiment: " + name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conservative Ginzburg-Landau dynamics and coupled-walk experiments"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "machine-readable experiment catalog");

  struct CommonFlags {
    std::string config_path;
    std::string out;
    std::string seed;
    std::string replicas;
    std::string parallelism;
    bool check = false;
  };
  std::map<std::string, CommonFlags> flags;
  for (const auto& schema : gl::experiment_catalog()) {
    auto* sub = app.add_subcommand(schema.name, schema.description);
    auto& f = flags[schema.name];
    sub->add_option("--config", f.config_path, "key = value config file");
    sub->add_option("--seed", f.seed, "override the seed");
    sub->add_option("--out", f.out, "override the output directory");
    sub->add_option("--replicas", f.replicas, "override the replica count");
    sub->add_option("--parallelism", f.parallelism, "override worker threads");
    sub->add_flag("--check", f.check, "exit 4 unless tolerances pass");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (list->parsed()) {
    std::cout << gl::catalog_json();
    return kExitOk;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    const auto& f = flags.at(name);
    std::map<std::string, std::string> file_values;
    if (!f.config_path.empty()) file_values = gl::parse_config_file(f.config_path);
    std::map<std::string, std::string> overrides;
    if (!f.seed.empty()) overrides["seed"] = f.seed;
    if (!f.out.empty()) overrides["out"] = f.out;
    if (!f.replicas.empty()) overrides["replicas"] = f.replicas;
    if (!f.parallelism.empty()) overrides["parallelism"] = f.parallelism;
    const auto config = gl::resolve_config(name, file_values, overrides);

    CheckOutcome check;
    check.enabled = f.check;
    const int code = dispatch(config, check);
    if (code != kExitOk) return code;
    if (check.failed) {
      std::cerr << "check failed: " << check.detail << "\n";
      return kExitCheck;
    }
    std::cout << "ok: " << config.get_string("out") << "/summary.json\n";
    return kExitOk;
  } catch (const gl::ConfigurationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
