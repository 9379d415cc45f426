#include "gl/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "gl/dynamics.hpp"
#include "gl/lattice.hpp"
#include "gl/parallel.hpp"
#include "gl/rng.hpp"
#include "gl/sampler.hpp"
#include "gl/stats.hpp"

namespace gl {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double omega(int k, int n) { return 2.0 - 2.0 * std::cos(kTwoPi * k / n); }

Eigen::MatrixXd walk_generator_dense(const Lattice& lat) {
  const auto m = lat.num_sites();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(m, m);
  for (std::int64_t x = 0; x < m; ++x) {
    for (int axis = 0; axis < lat.dim(); ++axis) {
      for (int dir : {-1, +1}) {
        const auto y = lat.neighbor(x, axis, dir);
        q(x, y) += 1.0;
        q(x, x) -= 1.0;
      }
    }
  }
  return q;
}

}  // namespace

double lambda2_magnitude(int n_sites) { return omega(1, n_sites); }

std::vector<double> q_spectrum(int n_sites, int dim) {
  const Lattice lat = make_torus(n_sites, dim);
  const auto m = lat.num_sites();
  std::vector<double> ev;
  if (m <= 1024) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(walk_generator_dense(lat));
    ev.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + m);
  } else {
    // Circulant tensor sums: one eigenvalue per mode tuple.
    ev.reserve(static_cast<std::size_t>(m));
    for (std::int64_t i = 0; i < m; ++i) {
      double v = 0.0;
      std::int64_t rem = i;
      for (int axis = 0; axis < dim; ++axis) {
        v -= omega(static_cast<int>(rem % n_sites), n_sites);
        rem /= n_sites;
      }
      ev.push_back(v);
    }
  }
  std::sort(ev.begin(), ev.end(), std::greater<double>());
  return ev;
}

GapInequalityResult discrete_gap_inequality(int n_sites, int dim, long trials,
                                            std::uint64_t seed) {
  if (trials < 1) throw ConfigurationError("need trials >= 1");
  const Lattice lat = make_torus(n_sites, dim);
  const auto m = lat.num_sites();

  auto ratio = [&](const std::vector<double>& phi) -> double {
    // g = |Q phi|^2, h = -phi^T Q phi = sum over bonds of squared steps.
    double g = 0.0, h = 0.0;
    for (std::int64_t x = 0; x < m; ++x) {
      double lap = 0.0;
      for (int axis = 0; axis < dim; ++axis) {
        const double up = phi[lat.neighbor(x, axis, +1)];
        const double dn = phi[lat.neighbor(x, axis, -1)];
        lap += up + dn - 2.0 * phi[x];
        const double step = phi[x] - up;
        h += step * step;
      }
      g += lap * lap;
    }
    if (h <= 0.0) return std::numeric_limits<double>::infinity();
    return g / h;
  };

  GapInequalityResult out;
  out.lambda2_abs = lambda2_magnitude(n_sites);
  out.trials = trials;
  out.min_ratio = std::numeric_limits<double>::infinity();

  // Adversarial low-frequency modes first; the slowest is the equality case.
  for (int mode = 1; mode <= std::min(4, n_sites - 1); ++mode) {
    std::vector<double> phi(m);
    for (std::int64_t x = 0; x < m; ++x) {
      phi[x] = std::cos(kTwoPi * mode * lat.coord(x, 0) / n_sites);
    }
    out.min_ratio = std::min(out.min_ratio, ratio(phi));
  }

  RngStream rng(seed, 0);
  std::vector<double> phi(m);
  for (long t = 0; t < trials; ++t) {
    for (std::int64_t x = 0; x < m; ++x) phi[x] = rng.next_normal();
    out.min_ratio = std::min(out.min_ratio, ratio(phi));
  }
  return out;
}

std::vector<double> srw_kernel_row(int n_sites, double t) {
  if (t < 0.0) throw ConfigurationError("time must be >= 0");
  std::vector<double> row(n_sites, 0.0);
  for (int k = 0; k < n_sites; ++k) {
    const double decay = std::exp(-t * omega(k, n_sites));
    for (int r = 0; r < n_sites; ++r) {
      row[r] += decay * std::cos(kTwoPi * k * r / n_sites);
    }
  }
  for (double& v : row) v /= n_sites;
  return row;
}

std::vector<double> gaussian_cov_row(int n_sites, double t) {
  std::vector<double> row = srw_kernel_row(n_sites, t);
  for (double& v : row) v -= 1.0 / n_sites;
  return row;
}

std::vector<std::vector<double>> gaussian_exact_covariance(int n_sites, double t) {
  if (n_sites > 4096) throw SizeError("covariance matrix limited to N <= 4096");
  const auto row = gaussian_cov_row(n_sites, t);
  std::vector<std::vector<double>> m(n_sites, std::vector<double>(n_sites));
  for (int i = 0; i < n_sites; ++i) {
    for (int j = 0; j < n_sites; ++j) {
      m[i][j] = row[(j - i + n_sites) % n_sites];
    }
  }
  return m;
}

WittenReport witten_check_gaussian(int n_sites) {
  if (n_sites > 1024) throw SizeError("dense Witten check limited to N <= 1024");
  const int n = n_sites;
  // Bond Hessian of H = sum x^2/2: 2 on the diagonal, -1 between
  // adjacent bonds of the cycle.
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(n, n);
  for (int b = 0; b < n; ++b) {
    hess(b, b) = 2.0;
    hess(b, (b + 1) % n) = -1.0;
    hess((b + 1) % n, b) = -1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hess);
  const auto& vals = solver.eigenvalues();
  const auto& vecs = solver.eigenvectors();
  const double lam_max = vals(n - 1);

  WittenReport rep;
  rep.n_sites = n;
  Eigen::MatrixXd pinv = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    if (vals(k) < 1e-10 * lam_max) {
      rep.kernel_modes += 1;
      continue;
    }
    pinv += vecs.col(k) * vecs.col(k).transpose() / vals(k);
  }
  if (rep.kernel_modes != 1) {
    throw ModelError("expected exactly one kernel mode in Hess H, got " +
                     std::to_string(rep.kernel_modes));
  }

  // grad(eta_i) as a bond vector is e_{i-1} - e_i; the quadratic form in
  // the pseudo-inverse must reproduce the conditioned covariance.
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    u((j - 1 + n) % n) = 1.0;
    u(j) = -1.0;
    const Eigen::VectorXd w = pinv * u;
    for (int i = 0; i < n; ++i) {
      const double lhs = w((i - 1 + n) % n) - w(i);
      const double expected = (i == j ? 1.0 : 0.0) - 1.0 / n;
      rep.max_discrepancy = std::max(rep.max_discrepancy, std::abs(lhs - expected));
    }
  }
  // Row sums of the covariance must vanish on the constraint surface.
  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      row_sum += (i == j ? 1.0 : 0.0) - 1.0 / n;
    }
    rep.max_row_sum = std::max(rep.max_row_sum, std::abs(row_sum));
  }
  return rep;
}

double commutation_check_gaussian(int n_sites) {
  const int n = n_sites;
  // Site route: A = discrete Laplacian quadratic form of the drift.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    a(i, i) = 2.0;
    a(i, (i + 1) % n) = -1.0;
    a(i, (i - 1 + n) % n) = -1.0;
  }
  // Bond incidence D: (Dv)_b = v_{b+1} - v_b.
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int b = 0; b < n; ++b) {
    d(b, (b + 1) % n) = 1.0;
    d(b, b) = -1.0;
  }
  // Bond route: Hessian on the bond cycle.
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(n, n);
  for (int b = 0; b < n; ++b) {
    hess(b, b) = 2.0;
    hess(b, (b + 1) % n) = -1.0;
    hess((b + 1) % n, b) = -1.0;
  }

  double max_err = 0.0;
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    v(j) = 1.0;
    const Eigen::VectorXd lhs = d * (a * v);       // grad of L(eta_j)
    const Eigen::VectorXd rhs = hess * (d * v);    // Witten applied to grad
    max_err = std::max(max_err, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  return max_err;
}

HessianBoundCheck hessian_lower_bound_check(const HamiltonianSpec& h,
                                            const FieldConfig& config,
                                            long trials, std::uint64_t seed) {
  const int n = config.size();
  // Assemble Hess H from the v_S outer-product structure.
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(n, n);
  auto v1pp = [&](int x) { return h.v1.d2(config.eta[x]); };
  for (int x = 0; x < n; ++x) {
    // S = {x}: bond x-1 points in, bond x points out.
    const int in_b = (x - 1 + n) % n;
    const int out_b = x;
    const double w = v1pp(x);
    hess(in_b, in_b) += w;
    hess(out_b, out_b) += w;
    hess(in_b, out_b) -= w;
    hess(out_b, in_b) -= w;
  }
  if (h.v2) {
    for (int x = 0; x < n; ++x) {
      // S = {x, x+1}: bond x-1 points in, bond x+1 points out.
      const int in_b = (x - 1 + n) % n;
      const int out_b = (x + 1) % n;
      const double w = h.v2->d2(config.eta[x] + config.eta[(x + 1) % n]);
      hess(in_b, in_b) += w;
      hess(out_b, out_b) += w;
      hess(in_b, out_b) -= w;
      hess(out_b, in_b) -= w;
    }
  }

  HessianBoundCheck out;
  // Off-diagonal of -Hess must reproduce the jump-rate table.
  for (int b = 0; b < n; ++b) {
    const JumpRates rates = jump_rates(h, config, Bond{b, 0});
    const auto check = [&](int off, double rate) {
      const int c = (b + off + 2 * n) % n;
      out.max_rate_table_error =
          std::max(out.max_rate_table_error, std::abs(-hess(b, c) - rate));
    };
    check(-2, rates.minus2);
    check(-1, rates.minus1);
    check(+1, rates.plus1);
    check(+2, rates.plus2);
  }

  RngStream rng(seed, 0);
  const double c_minus = h.c_minus();
  out.min_slack = std::numeric_limits<double>::infinity();
  Eigen::VectorXd f(n);
  for (long t = 0; t < trials; ++t) {
    for (int b = 0; b < n; ++b) f(b) = rng.next_normal();
    const double quad = f.dot(hess * f);
    double direct = 0.0, grad_sq = 0.0;
    for (int x = 0; x < n; ++x) {
      const double w = f((x - 1 + n) % n) - f(x);
      direct += v1pp(x) * w * w;
      grad_sq += w * w;
    }
    if (h.v2) {
      for (int x = 0; x < n; ++x) {
        const double w = f((x - 1 + n) % n) - f((x + 1) % n);
        direct += h.v2->d2(config.eta[x] + config.eta[(x + 1) % n]) * w * w;
      }
    }
    out.max_identity_error =
        std::max(out.max_identity_error, std::abs(quad - direct));
    out.min_slack = std::min(out.min_slack, quad - c_minus * grad_sq);
  }
  return out;
}

LambdaOrdering gaussian_lambda_ordering(int n_sites) {
  const int n = n_sites;
  LambdaOrdering out;
  // L restricted to linear observables is the discrete Laplacian; its
  // smallest nonzero eigenvalue is the gap.
  out.lambda = omega(1, n);
  // The Witten ratio on gradient vectors of the same sector:
  // min_k omega_k^2 / omega_k over nonzero modes.
  double lt = std::numeric_limits<double>::infinity();
  for (int k = 1; k < n; ++k) {
    lt = std::min(lt, omega(k, n) * omega(k, n) / omega(k, n));
  }
  out.lambda_tilde = lt;
  return out;
}

GapFitResult gap_estimate_dynamic(const HamiltonianSpec& h, int n_sites,
                                  double rho, long replicas, std::uint64_t seed,
                                  const GapFitOptions& opts) {
  if (replicas < 4) throw ConfigurationError("gap fit needs replicas >= 4");
  const int n = n_sites;
  const double c_minus = h.c_minus();
  const double dt = (opts.dt > 0.0) ? opts.dt : 0.05 / h.c_plus();
  validate_step_size(h, dt);
  const double horizon =
      (opts.horizon > 0.0) ? opts.horizon : 5.0 * n * n / c_minus;
  const double gaussian_rate = lambda2_magnitude(n);
  // Slow-mode e-folding time scale used to lay out the lag grid.
  const double efold = 1.0 / (gaussian_rate * c_minus);

  const double spacing = efold / 30.0;
  const auto stride = std::max<std::int64_t>(1, std::llround(spacing / dt));
  const auto total_steps = static_cast<std::int64_t>(std::llround(horizon / dt));
  const auto n_points = total_steps / stride;
  const int max_lag = 45;  // 1.5 e-folds at 30 lags per e-fold
  if (n_points < 4 * max_lag) {
    throw ConfigurationError("gap fit horizon too short for the lag grid");
  }

  std::vector<double> cosx(n);
  for (int x = 0; x < n; ++x) cosx[x] = std::cos(kTwoPi * x / n);

  std::vector<int> lags(max_lag + 1);
  for (int l = 0; l <= max_lag; ++l) lags[l] = l;

  std::vector<std::vector<double>> acov(replicas);
  parallel_for(replicas, opts.parallelism, [&](long r) {
    RngStream rng(seed, static_cast<std::uint64_t>(r));
    FieldConfig config = equilibrium_draw(h, n, rho, rng, opts.burnin_sweeps);
    std::vector<double> series;
    series.reserve(static_cast<std::size_t>(n_points) + 1);
    std::vector<double> noise(n), scratch(n);
    for (std::int64_t s = 0; s <= total_steps; ++s) {
      if (s % stride == 0) {
        double f = 0.0;
        for (int x = 0; x < n; ++x) f += cosx[x] * config.eta[x];
        series.push_back(f);
      }
      const std::uint64_t base =
          static_cast<std::uint64_t>(s) * static_cast<std::uint64_t>(n);
      for (int b = 0; b < n; ++b) {
        noise[b] = keyed_normal(seed, static_cast<std::uint64_t>(r), base + b,
                                RngTag::field_noise);
      }
      em_step_inplace(config, h, dt, noise, scratch);
    }
    acov[r] = autocovariance(series, lags);
  });

  const double lag_dt = static_cast<double>(stride) * dt;

  // Pooled curve for the fit window and R^2; per-replica fits for the
  // spread of the rate.
  std::vector<double> pooled(max_lag + 1, 0.0);
  for (long r = 0; r < replicas; ++r) {
    for (int l = 0; l <= max_lag; ++l) pooled[l] += acov[r][l] / replicas;
  }
  int window = max_lag;
  for (int l = 1; l <= max_lag; ++l) {
    if (!(pooled[l] > 0.15 * pooled[0])) {
      window = l - 1;
      break;
    }
  }
  if (window < 3) throw DiagnosticError("autocorrelation window too short");

  auto fit_rate = [&](const std::vector<double>& curve) -> LineFit {
    std::vector<double> xs, ys, ws;
    for (int l = 0; l <= window; ++l) {
      if (!(curve[l] > 0.0)) break;
      xs.push_back(l * lag_dt);
      ys.push_back(std::log(curve[l]));
      ws.push_back(1.0);
    }
    if (xs.size() < 3) throw DiagnosticError("too few usable lags in gap fit");
    return weighted_least_squares(xs, ys, ws);
  };

  std::vector<double> rates;
  rates.reserve(replicas);
  for (long r = 0; r < replicas; ++r) rates.push_back(-fit_rate(acov[r]).slope);
  const LineFit pooled_fit = fit_rate(pooled);
  const MeanSe rate_stats = mean_se(rates);

  GapFitResult out;
  out.rate = -pooled_fit.slope;
  out.se = rate_stats.se;
  out.r2 = pooled_fit.r2;
  out.empirical_k = out.rate * n * n / c_minus;
  out.gaussian_rate = gaussian_rate;
  out.replicas = replicas;
  if (out.r2 < opts.min_r2) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "gap fit R^2 = %.4f below %.2f", out.r2,
                  opts.min_r2);
    throw DiagnosticError(buf);
  }
  return out;
}

}  // namespace gl
