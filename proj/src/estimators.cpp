#include "gl/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include <Eigen/Dense>

#include "gl/dynamics.hpp"
#include "gl/parallel.hpp"
#include "gl/sampler.hpp"
#include "gl/spectral.hpp"

namespace gl {

double default_field_dt(const HamiltonianSpec& h) { return 0.05 / h.c_plus(); }

double default_joint_dt(const HamiltonianSpec& h) {
  return std::min(default_field_dt(h), 0.1 / h.rate_sum_bound());
}

namespace {

RunMeta make_meta(const HamiltonianSpec& h, int n_sites, double rho, double dt,
                  std::uint64_t seed, long replicas) {
  RunMeta m;
  m.n_sites = n_sites;
  m.rho = rho;
  m.potential = h.name();
  m.dt = dt;
  m.seed = seed;
  m.replicas = replicas;
  return m;
}

// Equilibrium sample bank: independent draws, one RNG stream each.
std::vector<FieldConfig> draw_bank(const HamiltonianSpec& h, int n_sites,
                                   double rho, long samples, std::uint64_t seed,
                                   const EstimatorOptions& opts) {
  std::vector<FieldConfig> bank(samples);
  parallel_for(samples, opts.parallelism, [&](long r) {
    RngStream rng(seed, static_cast<std::uint64_t>(r));
    bank[r] = equilibrium_draw(h, n_sites, rho, rng, opts.burnin_sweeps);
  });
  return bank;
}

}  // namespace

ValueWithError static_covariance(const Observable& f, const Observable& g,
                                 const HamiltonianSpec& h, int n_sites,
                                 double rho, long samples, std::uint64_t seed,
                                 const EstimatorOptions& opts) {
  if (samples < 100) throw ConfigurationError("static covariance needs >= 100 samples");
  const auto bank = draw_bank(h, n_sites, rho, samples, seed, opts);
  std::vector<double> fs(samples), gs(samples);
  for (long r = 0; r < samples; ++r) {
    fs[r] = f.value(bank[r]);
    gs[r] = g.value(bank[r]);
  }
  const auto jk = jk_covariance(fs, gs);
  return {jk.value, jk.se};
}

ValueWithError susceptibility(const HamiltonianSpec& h, int n_sites, double rho,
                              long samples, std::uint64_t seed,
                              const EstimatorOptions& opts) {
  const auto f = site_value(0);
  return static_covariance(*f, *f, h, n_sites, rho, samples, seed, opts);
}

SpaceTimeResult space_time_covariance(const Observable& f, const Observable& g,
                                      const HamiltonianSpec& h, int n_sites,
                                      double rho, std::vector<double> t_grid,
                                      long replicas, std::uint64_t seed,
                                      const EstimatorOptions& opts) {
  if (replicas < 100) throw ConfigurationError("need >= 100 replicas");
  const double dt = (opts.dt > 0.0) ? opts.dt : default_field_dt(h);
  validate_step_size(h, dt);
  double t_max = 0.0;
  for (double t : t_grid) t_max = std::max(t_max, t);
  const auto max_step = static_cast<std::int64_t>(std::llround(t_max / dt));
  const auto steps = record_steps(t_grid, dt, max_step);
  const std::size_t n_times = steps.size();

  std::vector<double> f_at(replicas * n_times), g_at(replicas * n_times);
  parallel_for(replicas, opts.parallelism, [&](long r) {
    RngStream rng(seed, static_cast<std::uint64_t>(r));
    FieldConfig config = equilibrium_draw(h, n_sites, rho, rng, opts.burnin_sweeps);
    std::vector<double> noise(n_sites), scratch(n_sites);
    std::size_t next = 0;
    for (std::int64_t s = 0;; ++s) {
      if (next < steps.size() && steps[next] == s) {
        f_at[r * n_times + next] = f.value(config);
        g_at[r * n_times + next] = g.value(config);
        ++next;
        if (next == steps.size()) break;
      }
      const std::uint64_t base =
          static_cast<std::uint64_t>(s) * static_cast<std::uint64_t>(n_sites);
      for (int b = 0; b < n_sites; ++b) {
        noise[b] = keyed_normal(seed, static_cast<std::uint64_t>(r), base + b,
                                RngTag::field_noise);
      }
      em_step_inplace(config, h, dt, noise, scratch);
    }
  });

  SpaceTimeResult out;
  out.forward.name = "<" + f.name() + "(0); " + g.name() + "(t)>";
  out.reversed.name = "<" + g.name() + "(0); " + f.name() + "(t)>";
  out.forward.replicas = out.reversed.replicas = replicas;
  out.forward.meta = out.reversed.meta =
      make_meta(h, n_sites, rho, dt, seed, replicas);

  std::vector<double> a(replicas), b(replicas), c(replicas);
  for (std::size_t ti = 0; ti < n_times; ++ti) {
    for (long r = 0; r < replicas; ++r) {
      a[r] = f_at[r * n_times];          // f at time 0
      b[r] = g_at[r * n_times + ti];     // g at time t
      c[r] = g_at[r * n_times];          // g at time 0
    }
    const double t = static_cast<double>(steps[ti]) * dt;
    auto jf = jk_covariance(a, b);
    out.forward.t.push_back(t);
    out.forward.est.push_back(jf.value);
    out.forward.se.push_back(jf.se);
    for (long r = 0; r < replicas; ++r) b[r] = f_at[r * n_times + ti];
    auto jr = jk_covariance(c, b);
    out.reversed.t.push_back(t);
    out.reversed.est.push_back(jr.value);
    out.reversed.se.push_back(jr.se);
  }
  return out;
}

namespace {

// Matches requested times to recorded times (the runner snaps to the
// step grid and always includes 0).
std::vector<std::size_t> grid_indices(const std::vector<double>& recorded,
                                      const std::vector<double>& wanted,
                                      double dt) {
  std::vector<std::size_t> idx;
  for (double t : wanted) {
    std::size_t best = 0;
    double best_err = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < recorded.size(); ++i) {
      const double err = std::abs(recorded[i] - t);
      if (err < best_err) {
        best_err = err;
        best = i;
      }
    }
    if (best_err > dt) throw ConfigurationError("requested time not recorded");
    idx.push_back(best);
  }
  return idx;
}

JointRunRecords run_identity_ensemble(const HamiltonianSpec& h, int n_sites,
                                      double rho, const std::vector<double>& t_grid,
                                      const std::vector<int>& offsets,
                                      long replicas, std::uint64_t seed,
                                      const EstimatorOptions& opts, double dt) {
  JointRunRequest req;
  req.h = h;
  req.n_sites = n_sites;
  req.rho = rho;
  req.dt = dt;
  req.t_grid = t_grid;
  req.site_offsets = offsets;
  req.replicas = replicas;
  req.seed = seed;
  req.parallelism = opts.parallelism;
  req.burnin_sweeps = opts.burnin_sweeps;
  return run_joint_ensemble(req);
}

}  // namespace

IdentityReport identity_check_from_records(const HamiltonianSpec&,
                                           const JointRunRecords& rec,
                                           const std::vector<double>& t_grid,
                                           RunMeta meta) {
  IdentityReport rep;
  rep.meta = std::move(meta);
  const long n = rec.replicas;
  const double inv_vol = 1.0 / rec.n_sites;

  std::vector<double> g(n), ind(n);
  int within3 = 0;
  for (std::size_t ti : grid_indices(rec.times, t_grid, rep.meta.dt)) {
    for (std::size_t oi = 0; oi < rec.offsets.size(); ++oi) {
      const int offset = rec.offsets[oi];
      for (long r = 0; r < n; ++r) {
        g[r] = rec.eta_val(r, ti, oi);
        ind[r] = (rec.disp(r, ti) == offset) ? 1.0 : 0.0;
      }
      IdentityPoint p;
      p.t = rec.times[ti];
      p.offset = offset;
      const auto lhs = jk_covariance(rec.vprime0, g);
      p.lhs = lhs.value;
      p.lhs_se = lhs.se;
      const auto rhs = jk_mean(ind);
      p.rhs_raw = rhs.value;
      p.rhs = rhs.value - inv_vol;
      p.rhs_se = rhs.se;
      const auto diff = jk_covariance_minus_mean(rec.vprime0, g, ind, inv_vol);
      p.diff = diff.value;
      p.diff_se = diff.se;
      p.z = (diff.se > 0.0) ? diff.value / diff.se : 0.0;
      rep.max_abs_z = std::max(rep.max_abs_z, std::abs(p.z));
      if (std::abs(p.z) < 3.0) ++within3;
      rep.points.push_back(p);
    }
  }
  if (!rep.points.empty()) {
    rep.frac_abs_z_below_3 =
        static_cast<double>(within3) / static_cast<double>(rep.points.size());
  }
  return rep;
}

IdentityReport identity_check(const HamiltonianSpec& h, int n_sites, double rho,
                              std::vector<double> t_grid, std::vector<int> offsets,
                              long replicas, std::uint64_t seed,
                              const EstimatorOptions& opts) {
  const double dt = (opts.dt > 0.0) ? opts.dt : default_joint_dt(h);
  const auto rec = run_identity_ensemble(h, n_sites, rho, t_grid, offsets,
                                         replicas, seed, opts, dt);
  return identity_check_from_records(
      h, rec, t_grid, make_meta(h, n_sites, rho, dt, seed, replicas));
}

BoundsReport bounds_check_from_records(const HamiltonianSpec& h,
                                       const JointRunRecords& rec,
                                       const std::vector<double>& t_grid,
                                       RunMeta meta) {
  BoundsReport rep;
  rep.meta = std::move(meta);
  rep.lower = 1.0 / h.c_plus();
  rep.upper = 1.0 / h.c_minus();
  const long n = rec.replicas;
  const double inv_vol = 1.0 / rec.n_sites;

  std::vector<double> g(n), ind(n);
  for (std::size_t ti : grid_indices(rec.times, t_grid, rep.meta.dt)) {
    const double t = rec.times[ti];
    for (std::size_t oi = 0; oi < rec.offsets.size(); ++oi) {
      const int offset = rec.offsets[oi];
      if (static_cast<double>(offset) * offset > 4.0 * t) continue;  // |i| <= 2 sqrt(t)
      for (long r = 0; r < n; ++r) {
        g[r] = rec.eta_val(r, ti, oi);
        ind[r] = (rec.disp(r, ti) == offset) ? 1.0 : 0.0;
      }
      BoundsPoint p;
      p.t = t;
      p.offset = offset;
      const auto denom = jk_mean(ind);
      if (std::abs(denom.value - inv_vol) < 3.0 * denom.se) {
        p.skipped = true;
        ++rep.n_skipped;
        rep.points.push_back(p);
        continue;
      }
      const auto ratio = jk_covariance_over_mean(rec.eta0, g, ind, inv_vol);
      p.ratio = ratio.value;
      p.se = ratio.se;
      p.violation = (p.ratio < rep.lower - 3.0 * p.se) ||
                    (p.ratio > rep.upper + 3.0 * p.se);
      if (p.violation) ++rep.n_violations;
      rep.points.push_back(p);
    }
  }
  return rep;
}

BoundsReport bounds_check(const HamiltonianSpec& h, int n_sites, double rho,
                          std::vector<double> t_grid, std::vector<int> offsets,
                          long replicas, std::uint64_t seed,
                          const EstimatorOptions& opts) {
  const double dt = (opts.dt > 0.0) ? opts.dt : default_joint_dt(h);
  const auto rec = run_identity_ensemble(h, n_sites, rho, t_grid, offsets,
                                         replicas, seed, opts, dt);
  return bounds_check_from_records(
      h, rec, t_grid, make_meta(h, n_sites, rho, dt, seed, replicas));
}

OccupationResult occupation_time_covariance(const Observable& f,
                                            const Observable& g,
                                            const HamiltonianSpec& h, int n_sites,
                                            double rho, double t_max,
                                            long replicas, std::uint64_t seed,
                                            const EstimatorOptions& opts) {
  const double dt = (opts.dt > 0.0) ? opts.dt : default_joint_dt(h);
  validate_step_size(h, dt);
  OccupationResult out;
  out.t_max = t_max;
  out.meta = make_meta(h, n_sites, rho, dt, seed, replicas);

  const std::vector<int> start_bonds = f.support_bonds(n_sites);
  if (start_bonds.empty()) return out;  // grad f = 0: nothing to launch

  // Record the integrand on a coarse grid; the integral is a trapezoid
  // over it.
  const int n_grid = 160;
  const auto max_step = static_cast<std::int64_t>(std::llround(t_max / dt));
  const auto rec_stride = std::max<std::int64_t>(1, max_step / n_grid);
  std::vector<std::int64_t> rec_steps;
  for (std::int64_t s = 0; s <= max_step; s += rec_stride) rec_steps.push_back(s);
  if (rec_steps.back() != max_step) rec_steps.push_back(max_step);
  const std::size_t n_times = rec_steps.size();
  const std::size_t n_walks = start_bonds.size();

  std::vector<double> integrand(static_cast<std::size_t>(replicas) * n_times);
  parallel_for(replicas, opts.parallelism, [&](long r) {
    RngStream rng(seed, static_cast<std::uint64_t>(r));
    FieldConfig config = equilibrium_draw(h, n_sites, rho, rng, opts.burnin_sweeps);
    std::vector<double> grad_f0(n_walks);
    for (std::size_t w = 0; w < n_walks; ++w) {
      grad_f0[w] = f.bond_partial(config, Bond{start_bonds[w], 0});
    }
    std::vector<int> walk_bond(start_bonds.begin(), start_bonds.end());
    std::vector<double> noise(n_sites), scratch(n_sites);
    std::size_t next = 0;
    for (std::int64_t s = 0;; ++s) {
      if (next < n_times && rec_steps[next] == s) {
        double v = 0.0;
        for (std::size_t w = 0; w < n_walks; ++w) {
          v += grad_f0[w] * g.bond_partial(config, Bond{walk_bond[w], 0});
        }
        integrand[static_cast<std::size_t>(r) * n_times + next] = v;
        ++next;
        if (next == n_times) break;
      }
      for (std::size_t w = 0; w < n_walks; ++w) {
        const JumpRates rates = jump_rates(h, config, Bond{walk_bond[w], 0});
        const double u = keyed_u01(
            seed, static_cast<std::uint64_t>(r),
            static_cast<std::uint64_t>(s) * n_walks + w, RngTag::walk_jump);
        const int jump = thinning_decision(rates, dt, u);
        walk_bond[w] = static_cast<int>((walk_bond[w] + jump + 2 * n_sites) % n_sites);
      }
      const std::uint64_t base =
          static_cast<std::uint64_t>(s) * static_cast<std::uint64_t>(n_sites);
      for (int b = 0; b < n_sites; ++b) {
        noise[b] = keyed_normal(seed, static_cast<std::uint64_t>(r), base + b,
                                RngTag::field_noise);
      }
      em_step_inplace(config, h, dt, noise, scratch);
    }
  });

  // Per-replica trapezoid integral, then mean/se across replicas.
  std::vector<double> integrals(replicas, 0.0);
  for (long r = 0; r < replicas; ++r) {
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < n_times; ++k) {
      const double dt_k = static_cast<double>(rec_steps[k + 1] - rec_steps[k]) * dt;
      acc += 0.5 * dt_k *
             (integrand[static_cast<std::size_t>(r) * n_times + k] +
              integrand[static_cast<std::size_t>(r) * n_times + k + 1]);
    }
    integrals[r] = acc;
  }
  const auto jk = jk_mean(integrals);
  out.estimate = jk.value;
  out.se = jk.se;

  std::vector<double> col(replicas);
  for (std::size_t k = 0; k < n_times; ++k) {
    for (long r = 0; r < replicas; ++r) {
      col[r] = integrand[static_cast<std::size_t>(r) * n_times + k];
    }
    const MeanSe m = mean_se(col);
    out.integrand_t.push_back(static_cast<double>(rec_steps[k]) * dt);
    out.integrand.push_back(m.mean);
    out.integrand_se.push_back(m.se);
  }

  // Tail budget from the spectral decay rate of the slowest mode.
  const double rate = lambda2_magnitude(n_sites) * h.c_minus();
  const double tail_scale =
      std::max(std::abs(out.integrand.back()), out.integrand_se.back());
  out.tail_bound = tail_scale / rate;
  if (tail_scale > 3.0 * out.integrand_se.back() + 1e-12) {
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "integrand not decayed at t_max: |tail| ~ %.3g, budget %.3g",
                  tail_scale, out.tail_bound);
    out.warnings.push_back(buf);
  }
  return out;
}

QEstimate diffusion_coefficient_msd(const HamiltonianSpec& h, int n_sites,
                                    double rho, double fit_t_min, double fit_t_max,
                                    long replicas, std::uint64_t seed,
                                    const EstimatorOptions& opts) {
  const double dt = (opts.dt > 0.0) ? opts.dt : default_joint_dt(h);
  std::vector<double> grid;
  const int n_points = 24;
  for (int k = 0; k <= n_points; ++k) {
    grid.push_back(fit_t_max * k / n_points);
  }
  const MsdSeries series = msd(h, n_sites, rho, grid, replicas, seed, dt,
                               fit_t_min, fit_t_max, opts.parallelism,
                               opts.burnin_sweeps);
  QEstimate out;
  out.q = series.slope_fit.slope;
  out.se = series.slope_fit.slope_se;
  out.r2 = series.slope_fit.r2;
  out.series = series;
  out.meta = make_meta(h, n_sites, rho, dt, seed, replicas);
  if (out.r2 < 0.99) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "MSD fit R^2 = %.4f below 0.99: not linear",
                  out.r2);
    throw DiagnosticError(buf);
  }
  return out;
}

std::vector<ObservablePtr> default_variational_basis(const HamiltonianSpec& h,
                                                     double rho) {
  (void)rho;
  return {v_prime_at(0, h.v1), tanh_site(0), tanh_site(1),
          clipped_product(0, 1, 3.0)};
}

VariationalResult variational_q_upper(const HamiltonianSpec& h, int n_sites,
                                      double rho,
                                      const std::vector<ObservablePtr>& basis,
                                      long samples, std::uint64_t seed,
                                      const EstimatorOptions& opts) {
  if (samples < 100) throw ConfigurationError("variational bound needs >= 100 samples");
  const auto bank = draw_bank(h, n_sites, rho, samples, seed, opts);
  const std::size_t k = basis.size();

  VariationalResult out;
  out.meta = make_meta(h, n_sites, rho, 0.0, seed, samples);

  // R_1 = V''(eta_1), the jump rate from (0,1) to (1,2).
  std::vector<double> r1(samples);
  for (long r = 0; r < samples; ++r) r1[r] = h.v1.d2(bank[r].eta[1]);
  const MeanSe r1_stats = mean_se(r1);
  out.mean_r1 = r1_stats.mean;
  out.mean_r1_se = r1_stats.se;
  out.objective_f0 = 2.0 * r1_stats.mean;

  if (k == 0) {
    out.q_upper = out.objective_f0;
    out.q_upper_se = 2.0 * r1_stats.se;
    return out;
  }

  // Per-sample shift differences D_j = phi_j(tau_1 eta) - phi_j(eta) and
  // bond gradients on the support.
  std::vector<double> d_vals(samples * k);
  std::vector<std::vector<int>> support(k);
  for (std::size_t j = 0; j < k; ++j) support[j] = basis[j]->support_bonds(n_sites);
  std::vector<std::vector<double>> grad_vals(k);
  for (std::size_t j = 0; j < k; ++j) {
    grad_vals[j].resize(samples * support[j].size());
  }
  parallel_for(samples, opts.parallelism, [&](long r) {
    const FieldConfig shifted = shift(bank[r], 1);
    for (std::size_t j = 0; j < k; ++j) {
      d_vals[r * k + j] = basis[j]->value(shifted) - basis[j]->value(bank[r]);
      for (std::size_t b = 0; b < support[j].size(); ++b) {
        grad_vals[j][r * support[j].size() + b] =
            basis[j]->bond_partial(bank[r], Bond{support[j][b], 0});
      }
    }
  });

  // Quadratic model: objective(a)/2 = <R1> + 2 b.a + a.(M + E)a.
  Eigen::VectorXd bvec = Eigen::VectorXd::Zero(k);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(k, k);
  for (long r = 0; r < samples; ++r) {
    for (std::size_t i = 0; i < k; ++i) {
      bvec(i) += d_vals[r * k + i] * r1[r];
      for (std::size_t j = i; j < k; ++j) {
        m(i, j) += d_vals[r * k + i] * d_vals[r * k + j] * r1[r];
      }
    }
  }
  // E_ij = sum_b <d_b phi_i d_b phi_j>: only overlapping support bonds count.
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      for (std::size_t bi = 0; bi < support[i].size(); ++bi) {
        for (std::size_t bj = 0; bj < support[j].size(); ++bj) {
          if (support[i][bi] != support[j][bj]) continue;
          double acc = 0.0;
          for (long r = 0; r < samples; ++r) {
            acc += grad_vals[i][r * support[i].size() + bi] *
                   grad_vals[j][r * support[j].size() + bj];
          }
          e(i, j) += acc;
        }
      }
    }
  }
  bvec /= static_cast<double>(samples);
  m /= static_cast<double>(samples);
  e /= static_cast<double>(samples);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      m(i, j) = m(j, i);
      e(i, j) = e(j, i);
    }
  }

  Eigen::MatrixXd quad = m + e;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(quad);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    quad += 1e-8 * Eigen::MatrixXd::Identity(k, k);
    ldlt.compute(quad);
    out.ridge_applied = true;
  }
  const Eigen::VectorXd a = ldlt.solve(-bvec);
  out.coefficients.assign(a.data(), a.data() + k);

  // Objective evaluated per sample at the fitted coefficients; its mean
  // is the bound, its spread the (conditional) error bar.
  std::vector<int> bonds;  // union of the support bonds
  for (std::size_t j = 0; j < k; ++j) {
    for (int b : support[j]) {
      if (std::find(bonds.begin(), bonds.end(), b) == bonds.end()) {
        bonds.push_back(b);
      }
    }
  }
  std::vector<double> per_sample(samples);
  for (long r = 0; r < samples; ++r) {
    double shift_term = 1.0;
    for (std::size_t j = 0; j < k; ++j) shift_term += a(j) * d_vals[r * k + j];
    double dirichlet = 0.0;
    for (int b : bonds) {
      double gsum = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const auto it = std::find(support[j].begin(), support[j].end(), b);
        if (it == support[j].end()) continue;
        const std::size_t bi = static_cast<std::size_t>(it - support[j].begin());
        gsum += a(j) * grad_vals[j][r * support[j].size() + bi];
      }
      dirichlet += gsum * gsum;
    }
    per_sample[r] = 2.0 * (shift_term * shift_term * r1[r] + dirichlet);
  }
  const MeanSe obj = mean_se(per_sample);
  out.q_upper = obj.mean;
  out.q_upper_se = obj.se;
  return out;
}

double smoothed_prediction(const Profile& phi, double x, double t, double q) {
  // Simpson over the support of phi(. - x).
  const int n = 2000;
  const double lo = x - 1.0, hi = x + 1.0;
  const double step = (hi - lo) / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double y = lo + i * step;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * phi(y - x) * std::exp(-y * y / (2.0 * t * q));
  }
  acc *= step / 3.0;
  return acc / std::sqrt(2.0 * std::numbers::pi * q * t);
}

SmoothedResult smoothed_relaxation(const HamiltonianSpec& h, int n_sites,
                                   double rho, const Profile& phi, double eps,
                                   double x, double t, double q, long replicas,
                                   std::uint64_t seed,
                                   const EstimatorOptions& opts) {
  SmoothedResult out;
  out.micro_time = t / (eps * eps);
  const auto f = v_prime_at(0, h.v1);
  const auto g = smoothed_field(phi, eps, x);

  // No-wrap guard: the observable's support plus the diffusive spread at
  // the microscopic horizon must fit well inside the torus.
  const double spread = std::sqrt(2.0 * h.c_plus() * out.micro_time);
  if ((std::abs(x) + 1.0) / eps + 4.0 * spread > n_sites / 2.0) {
    throw HorizonError("smoothed horizon too long for this torus");
  }

  auto st = space_time_covariance(*f, *g, h, n_sites, rho, {out.micro_time},
                                  replicas, seed, opts);
  // The grid holds t=0 and the micro time; take the latter.
  out.estimate = st.forward.est.back();
  out.se = st.forward.se.back();
  out.prediction = smoothed_prediction(phi, x, t, q);
  // Lattice normalization: the observable carries an eps prefactor and
  // the torus covariance a -1/N term, so the comparable prediction is
  // eps * continuum - mass(phi)/N with the exact lattice mass.
  double mass = 0.0;
  const int reach = static_cast<int>(std::floor(1.0 / eps));
  for (int i = -reach; i <= reach; ++i) mass += eps * phi(eps * i);
  out.prediction_lattice = eps * out.prediction - mass / n_sites;
  out.diff_in_se =
      (out.se > 0.0) ? (out.estimate - out.prediction_lattice) / out.se : 0.0;
  out.meta = st.forward.meta;
  return out;
}

}  // namespace gl
