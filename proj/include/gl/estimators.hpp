#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gl/observables.hpp"
#include "gl/potential.hpp"
#include "gl/stats.hpp"
#include "gl/walk.hpp"

namespace gl {

struct RunMeta {
  int n_sites = 0;
  double rho = 0.0;
  std::string potential;
  double dt = 0.0;
  std::uint64_t seed = 0;
  long replicas = 0;
};

struct EstimatorOptions {
  double dt = -1.0;         // default 0.05 / C_plus (0.1 / rate bound for walks)
  int parallelism = 0;
  long burnin_sweeps = -1;  // MCMC equilibration for non-Gaussian draws
};

double default_field_dt(const HamiltonianSpec& h);
double default_joint_dt(const HamiltonianSpec& h);

struct ValueWithError {
  double value = 0.0;
  double se = 0.0;
};

// <f; g> over equilibrium draws, jackknife standard error.
ValueWithError static_covariance(const Observable& f, const Observable& g,
                                 const HamiltonianSpec& h, int n_sites,
                                 double rho, long samples, std::uint64_t seed,
                                 const EstimatorOptions& opts = {});

// chi(rho) = <eta_0; eta_0>.
ValueWithError susceptibility(const HamiltonianSpec& h, int n_sites, double rho,
                              long samples, std::uint64_t seed,
                              const EstimatorOptions& opts = {});

struct CorrelationSeries {
  std::string name;
  std::vector<double> t;
  std::vector<double> est;
  std::vector<double> se;
  long replicas = 0;
  RunMeta meta;
};

// <f(eta(0)); g(eta(t))> over the recording grid. Also returns the
// time-reflected pairing <g(eta(0)); f(eta(t))> computed on the same
// replicas (reversibility makes the two agree in law).
struct SpaceTimeResult {
  CorrelationSeries forward;
  CorrelationSeries reversed;
};

SpaceTimeResult space_time_covariance(const Observable& f, const Observable& g,
                                      const HamiltonianSpec& h, int n_sites,
                                      double rho, std::vector<double> t_grid,
                                      long replicas, std::uint64_t seed,
                                      const EstimatorOptions& opts = {});

// ---------------------------------------------------------------------
// Correlation identity: <V'(eta_0(0)); eta_i(t)> against the annealed
// walk kernel with the finite-volume correction -1/N. Both sides are
// computed on common replicas; z scores come from the jackknifed
// difference.

struct IdentityPoint {
  double t = 0.0;
  int offset = 0;
  double lhs = 0.0, lhs_se = 0.0;
  double rhs_raw = 0.0;  // kernel estimate before the -1/N correction
  double rhs = 0.0, rhs_se = 0.0;
  double diff = 0.0, diff_se = 0.0;
  double z = 0.0;
};

struct IdentityReport {
  std::vector<IdentityPoint> points;
  double frac_abs_z_below_3 = 0.0;
  double max_abs_z = 0.0;
  RunMeta meta;
};

IdentityReport identity_check(const HamiltonianSpec& h, int n_sites, double rho,
                              std::vector<double> t_grid, std::vector<int> offsets,
                              long replicas, std::uint64_t seed,
                              const EstimatorOptions& opts = {});
// Same analysis on records produced elsewhere (shared ensembles).
IdentityReport identity_check_from_records(const HamiltonianSpec& h,
                                           const JointRunRecords& rec,
                                           const std::vector<double>& t_grid,
                                           RunMeta meta);

// ---------------------------------------------------------------------
// Relaxation sandwich: <eta_0(0); eta_i(t)> / (kernel - 1/N) must lie in
// [1/C_plus, 1/C_minus]. Restricted to |i| <= 2 sqrt(t); points whose
// denominator is consistent with zero are skipped and reported.

struct BoundsPoint {
  double t = 0.0;
  int offset = 0;
  double ratio = 0.0, se = 0.0;
  bool skipped = false;
  bool violation = false;
};

struct BoundsReport {
  std::vector<BoundsPoint> points;
  double lower = 0.0;  // 1/C_plus
  double upper = 0.0;  // 1/C_minus
  int n_violations = 0;
  int n_skipped = 0;
  RunMeta meta;
};

BoundsReport bounds_check(const HamiltonianSpec& h, int n_sites, double rho,
                          std::vector<double> t_grid, std::vector<int> offsets,
                          long replicas, std::uint64_t seed,
                          const EstimatorOptions& opts = {});
BoundsReport bounds_check_from_records(const HamiltonianSpec& h,
                                       const JointRunRecords& rec,
                                       const std::vector<double>& t_grid,
                                       RunMeta meta);

// ---------------------------------------------------------------------
// Occupation-time representation of a static covariance: walks started
// from every bond in the support of grad f, integrated against grad g
// along the joint trajectory.

struct OccupationResult {
  double estimate = 0.0;
  double se = 0.0;
  double t_max = 0.0;
  double tail_bound = 0.0;  // residual budget from the spectral gap rate
  std::vector<double> integrand_t;
  std::vector<double> integrand;
  std::vector<double> integrand_se;
  std::vector<std::string> warnings;
  RunMeta meta;
};

OccupationResult occupation_time_covariance(const Observable& f,
                                            const Observable& g,
                                            const HamiltonianSpec& h, int n_sites,
                                            double rho, double t_max,
                                            long replicas, std::uint64_t seed,
                                            const EstimatorOptions& opts = {});

// ---------------------------------------------------------------------

struct QEstimate {
  double q = 0.0;
  double se = 0.0;  // slope standard error
  double r2 = 0.0;
  MsdSeries series;
  RunMeta meta;
};

// Diffusion coefficient from the MSD slope over [fit_t_min, fit_t_max].
// Throws DiagnosticError when the fit has R^2 < 0.99.
QEstimate diffusion_coefficient_msd(const HamiltonianSpec& h, int n_sites,
                                    double rho, double fit_t_min, double fit_t_max,
                                    long replicas, std::uint64_t seed,
                                    const EstimatorOptions& opts = {});

struct VariationalResult {
  double q_upper = 0.0;
  double q_upper_se = 0.0;     // conditional on the fitted coefficients
  double objective_f0 = 0.0;   // 2 <R_1>, the empty-basis value
  double mean_r1 = 0.0;
  double mean_r1_se = 0.0;
  std::vector<double> coefficients;
  bool ridge_applied = false;
  RunMeta meta;
};

// Minimizes 2{ <(1 - f + f.tau_1)^2 R_1> + E(f,f) } over the span of the
// basis; any span gives an upper bound on q.
VariationalResult variational_q_upper(const HamiltonianSpec& h, int n_sites,
                                      double rho,
                                      const std::vector<ObservablePtr>& basis,
                                      long samples, std::uint64_t seed,
                                      const EstimatorOptions& opts = {});

std::vector<ObservablePtr> default_variational_basis(const HamiltonianSpec& h,
                                                     double rho);

// ---------------------------------------------------------------------

struct SmoothedResult {
  double estimate = 0.0;
  double se = 0.0;
  double prediction = 0.0;          // continuum Gaussian-profile integral
  // Same prediction in the lattice normalization of the estimate:
  // eps * prediction - mass(phi)/N (the estimate carries an eps
  // prefactor and the torus covariance a -1/N term).
  double prediction_lattice = 0.0;
  double diff_in_se = 0.0;          // (estimate - prediction_lattice) / se
  double micro_time = 0.0;          // t / eps^2
  RunMeta meta;
};

// <V'(eta_0(0)); eps sum_i phi(eps i) eta_{i+floor(x/eps)}(t/eps^2)>
// against (2 pi q t)^{-1/2} integral phi(y-x) exp(-y^2/(2tq)) dy.
SmoothedResult smoothed_relaxation(const HamiltonianSpec& h, int n_sites,
                                   double rho, const Profile& phi, double eps,
                                   double x, double t, double q, long replicas,
                                   std::uint64_t seed,
                                   const EstimatorOptions& opts = {});

// The Gaussian-profile prediction by itself (Simpson quadrature).
double smoothed_prediction(const Profile& phi, double x, double t, double q);

}  // namespace gl
