#pragma once

#include <cstdint>
#include <vector>

#include "gl/field.hpp"
#include "gl/potential.hpp"

namespace gl {

// |lambda_2| of the rate-1 walk generator on the N-cycle: 2 - 2cos(2pi/N).
double lambda2_magnitude(int n_sites);

// Eigenvalues of the walk generator Q on (Z/NZ)^d, sorted descending.
// Dense solver for N^d <= 1024, exact circulant tensor sums above.
std::vector<double> q_spectrum(int n_sites, int dim);

struct GapInequalityResult {
  double min_ratio = 0.0;      // min g(phi)/h(phi) over nonconstant trials
  double lambda2_abs = 0.0;
  long trials = 0;
};

// Checks g(phi) >= |lambda_2| h(phi) over random fields plus the slow
// Fourier modes (the equality case).
GapInequalityResult discrete_gap_inequality(int n_sites, int dim, long trials,
                                            std::uint64_t seed);

// Wrapped continuous-time simple random walk kernel on the N-cycle,
// rate 1 per direction: row[r] = P(X(t) = r mod N). Sums to 1.
std::vector<double> srw_kernel_row(int n_sites, double t);

// Exact stationary space-time covariance <eta_i(0); eta_j(t)> of the
// Gaussian conservative dynamics, as a circulant row over r = j - i.
// Equals the walk kernel row minus 1/N; at t = 0 it is I - 11^T/N.
std::vector<double> gaussian_cov_row(int n_sites, double t);

// Full matrix form of the above (N <= 4096).
std::vector<std::vector<double>> gaussian_exact_covariance(int n_sites, double t);

struct WittenReport {
  int n_sites = 0;
  double max_discrepancy = 0.0;  // vs delta_ij - 1/N
  int kernel_modes = 0;          // must be exactly 1 (the constant mode)
  double max_row_sum = 0.0;      // sum_j of either side, must vanish
};

// Verifies <eta_i; eta_j> = grad_i . (Hess H)^+ grad_j for the Gaussian
// product Hamiltonian via a dense pseudo-inverse of the bond Hessian.
WittenReport witten_check_gaussian(int n_sites);

// grad(L g) vs WittenLaplacian(grad g) on linear g, assembled through
// the site route and the bond route independently. Returns the max
// absolute entry difference.
double commutation_check_gaussian(int n_sites);

struct HessianBoundCheck {
  double max_identity_error = 0.0;  // F.(Hess H)F vs sum_x V''(eta_x) w_x^2
  double min_slack = 0.0;           // F.(Hess H)F - C_minus sum_x w_x^2
  double max_rate_table_error = 0.0;  // -Hess off-diagonals vs jump_rates
};

// Random-vector check of the Hessian positivity bound at a sampled
// field configuration (d=1).
HessianBoundCheck hessian_lower_bound_check(const HamiltonianSpec& h,
                                            const FieldConfig& config,
                                            long trials, std::uint64_t seed);

struct LambdaOrdering {
  double lambda = 0.0;        // spectral gap of L on the linear sector
  double lambda_tilde = 0.0;  // inf of the Witten quadratic-form ratio
};

// Both gaps of the Gaussian model from circulant spectra; lambda >=
// lambda_tilde with equality on the cycle.
LambdaOrdering gaussian_lambda_ordering(int n_sites);

struct GapFitOptions {
  double horizon = -1.0;        // default 5 N^2 / C_minus
  double dt = -1.0;             // default 0.05 / C_plus
  int parallelism = 0;
  long burnin_sweeps = -1;
  double min_r2 = 0.95;
};

struct GapFitResult {
  double rate = 0.0;            // fitted decay rate of the slowest mode
  double se = 0.0;              // replica spread
  double r2 = 0.0;              // pooled log-linear fit quality
  double empirical_k = 0.0;     // rate * N^2 / C_minus
  double gaussian_rate = 0.0;   // 2 - 2cos(2pi/N), the exact OU value
  long replicas = 0;
};

// Fits the exponential autocorrelation decay of the slowest Fourier
// mode observable F(eta) = sum_x cos(2pi x/N) eta_x under the dynamics.
GapFitResult gap_estimate_dynamic(const HamiltonianSpec& h, int n_sites,
                                  double rho, long replicas, std::uint64_t seed,
                                  const GapFitOptions& opts = {});

}  // namespace gl
