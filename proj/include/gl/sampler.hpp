#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gl/field.hpp"
#include "gl/potential.hpp"
#include "gl/rng.hpp"

namespace gl {

// Exact draw from the standard Gaussian product measure conditioned on
// sum(eta) = N*rho: eta = rho + (g - mean(g)). Covariance I - 11^T/N.
FieldConfig sample_canonical_gaussian(int n_sites, double rho, RngStream& rng);

// Spec-checked variant: throws WrongSamplerError unless h is the
// Gaussian product Hamiltonian.
FieldConfig sample_canonical_gaussian(const HamiltonianSpec& h, int n_sites,
                                      double rho, RngStream& rng);

struct SamplerOptions {
  // < 0 selects the default 100 * N sweeps.
  long burnin_sweeps = -1;
  double initial_sigma = 1.0;
  double target_acceptance = 0.4;
  bool adapt = true;
};

struct McmcDraw {
  FieldConfig config;
  double acceptance_rate = 0.0;
  double proposal_sigma = 0.0;
  std::vector<std::string> warnings;
};

// One approximate draw from mu_{rho,N} by bond-exchange Metropolis:
// (eta_i, eta_{i+1}) -> (eta_i + delta, eta_{i+1} - delta). Every
// proposal conserves the total exactly.
McmcDraw sample_canonical_mcmc(const HamiltonianSpec& h, int n_sites, double rho,
                               long sweeps, RngStream& rng,
                               const SamplerOptions& opts = {});

// Metropolis log acceptance ratio of one bond-exchange proposal;
// exposed so reversibility can be checked against the actual kernel.
double mcmc_log_accept(const HamiltonianSpec& h, const FieldConfig& config,
                       int bond_origin, double delta);

// Equilibrium draw for estimator ensembles: exact for the Gaussian
// product Hamiltonian, otherwise a product-marginal rejection start
// (recentred to the constraint surface) followed by a short
// bond-exchange burn-in. burnin_sweeps < 0 selects 16 * N.
FieldConfig equilibrium_draw(const HamiltonianSpec& h, int n_sites, double rho,
                             RngStream& rng, long burnin_sweeps = -1);

// Single-site draw from exp(-V(x)) by rejection from N(0, 1/C_minus).
double sample_single_site(const PotentialSpec& v, RngStream& rng);

// ESS of a scalar series (Geyer truncation); declared here because it
// belongs to the sampling toolkit, implemented with the stats helpers.
double effective_sample_size(std::span<const double> series);

// Single-column CSV with a `# N=.. rho=.. seed=..` metadata line.
std::string field_to_csv(const FieldConfig& config, std::uint64_t seed);

}  // namespace gl
