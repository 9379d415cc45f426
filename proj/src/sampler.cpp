#include "gl/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gl/stats.hpp"

namespace gl {

FieldConfig sample_canonical_gaussian(int n_sites, double rho, RngStream& rng) {
  FieldConfig config;
  config.rho = rho;
  config.eta.resize(n_sites);
  double mean = 0.0;
  for (int i = 0; i < n_sites; ++i) {
    config.eta[i] = rng.next_normal();
    mean += config.eta[i];
  }
  mean /= n_sites;
  for (int i = 0; i < n_sites; ++i) config.eta[i] += rho - mean;
  return config;
}

FieldConfig sample_canonical_gaussian(const HamiltonianSpec& h, int n_sites,
                                      double rho, RngStream& rng) {
  if (!h.is_gaussian_product()) {
    throw WrongSamplerError(
        "exact Gaussian sampler called with a non-Gaussian Hamiltonian");
  }
  return sample_canonical_gaussian(n_sites, rho, rng);
}

double sample_single_site(const PotentialSpec& v, RngStream& rng) {
  const double sigma = 1.0 / std::sqrt(v.c_minus());
  for (;;) {
    const double x = sigma * rng.next_normal();
    // V(x) >= C_minus x^2 / 2 because V(0) = V'(0) = 0 and V'' >= C_minus.
    const double log_acc = -(v.value(x) - v.c_minus() * x * x / 2);
    if (std::log(rng.next_u01() + 1e-300) < log_acc) return x;
  }
}

double mcmc_log_accept(const HamiltonianSpec& h, const FieldConfig& config,
                       int bond_origin, double delta) {
  const int n = config.size();
  const int i = bond_origin;
  const int j = (i + 1) % n;
  double dh = h.v1.value(config.eta[i] + delta) - h.v1.value(config.eta[i]) +
              h.v1.value(config.eta[j] - delta) - h.v1.value(config.eta[j]);
  if (h.v2) {
    // The bond sum eta_i + eta_{i+1} is unchanged by the exchange; only
    // the two flanking pair sums move.
    const int im1 = (i + n - 1) % n;
    const int jp1 = (j + 1) % n;
    const double s_left = config.eta[im1] + config.eta[i];
    const double s_right = config.eta[j] + config.eta[jp1];
    dh += h.v2->value(s_left + delta) - h.v2->value(s_left) +
          h.v2->value(s_right - delta) - h.v2->value(s_right);
  }
  return -dh;
}

namespace {

class ExchangeChain {
 public:
  ExchangeChain(const HamiltonianSpec& h, FieldConfig config)
      : h_(h), config_(std::move(config)) {}

  // One sweep = N proposals at uniformly random bonds.
  double sweep(double sigma, RngStream& proposal_rng, RngStream& accept_rng) {
    const int n = config_.size();
    int accepted = 0;
    for (int k = 0; k < n; ++k) {
      const int i = static_cast<int>(accept_rng.next_u64() % static_cast<std::uint64_t>(n));
      const double delta = sigma * proposal_rng.next_normal();
      const double log_acc = mcmc_log_accept(h_, config_, i, delta);
      if (log_acc >= 0.0 || std::log(accept_rng.next_u01() + 1e-300) < log_acc) {
        const int j = (i + 1) % n;
        config_.eta[i] += delta;
        config_.eta[j] -= delta;
        ++accepted;
      }
    }
    return static_cast<double>(accepted) / n;
  }

  const FieldConfig& config() const { return config_; }
  FieldConfig take() { return std::move(config_); }

 private:
  const HamiltonianSpec& h_;
  FieldConfig config_;
};

FieldConfig product_start(const HamiltonianSpec& h, int n_sites, double rho,
                          RngStream& rng) {
  FieldConfig config;
  config.rho = rho;
  config.eta.resize(n_sites);
  double mean = 0.0;
  for (int i = 0; i < n_sites; ++i) {
    config.eta[i] = sample_single_site(h.v1, rng);
    mean += config.eta[i];
  }
  mean /= n_sites;
  for (int i = 0; i < n_sites; ++i) config.eta[i] += rho - mean;
  return config;
}

struct AdaptResult {
  double sigma;
  double last_window_acceptance;
};

AdaptResult run_adapted_sweeps(ExchangeChain& chain, long sweeps, double sigma0,
                               double target, bool adapt, RngStream& prop,
                               RngStream& acc) {
  double sigma = sigma0;
  const long window = 16;  // sweeps per adaptation window
  double window_acc = 0.0;
  long in_window = 0;
  double last_acc = target;
  for (long s = 0; s < sweeps; ++s) {
    window_acc += chain.sweep(sigma, prop, acc);
    ++in_window;
    if (in_window == window) {
      last_acc = window_acc / window;
      if (adapt && s < sweeps / 2) {
        sigma *= std::exp(0.8 * (last_acc - target));
        sigma = std::clamp(sigma, 1e-4, 1e4);
      }
      window_acc = 0.0;
      in_window = 0;
    }
  }
  if (in_window > 0) last_acc = window_acc / in_window;
  return {sigma, last_acc};
}

}  // namespace

McmcDraw sample_canonical_mcmc(const HamiltonianSpec& h, int n_sites, double rho,
                               long sweeps, RngStream& rng,
                               const SamplerOptions& opts) {
  if (sweeps < 1) throw ConfigurationError("MCMC needs sweeps >= 1");
  McmcDraw out;
  const long default_burnin =
      (opts.burnin_sweeps >= 0) ? opts.burnin_sweeps : 100L * n_sites;
  if (sweeps < default_burnin) {
    out.warnings.push_back("sweeps below default burn-in; draw may be biased");
  }

  RngStream init = rng.with_tag(RngTag::init);
  RngStream prop = rng.with_tag(RngTag::proposal);
  RngStream acc = rng.with_tag(RngTag::accept);

  ExchangeChain chain(h, product_start(h, n_sites, rho, init));
  const AdaptResult res =
      run_adapted_sweeps(chain, sweeps, opts.initial_sigma,
                         opts.target_acceptance, opts.adapt, prop, acc);
  out.acceptance_rate = res.last_window_acceptance;
  out.proposal_sigma = res.sigma;
  if (res.last_window_acceptance < 0.1 || res.last_window_acceptance > 0.9) {
    char buf[96];
    std::snprintf(buf, sizeof(buf),
                  "acceptance rate %.3f outside [0.1, 0.9] after adaptation",
                  res.last_window_acceptance);
    out.warnings.push_back(buf);
  }
  out.config = chain.take();
  return out;
}

FieldConfig equilibrium_draw(const HamiltonianSpec& h, int n_sites, double rho,
                             RngStream& rng, long burnin_sweeps) {
  if (h.is_gaussian_product()) {
    RngStream init = rng.with_tag(RngTag::init);
    return sample_canonical_gaussian(n_sites, rho, init);
  }
  const long sweeps = (burnin_sweeps >= 0) ? burnin_sweeps : 16L * n_sites;
  RngStream init = rng.with_tag(RngTag::init);
  RngStream prop = rng.with_tag(RngTag::proposal);
  RngStream acc = rng.with_tag(RngTag::accept);
  ExchangeChain chain(h, product_start(h, n_sites, rho, init));
  run_adapted_sweeps(chain, sweeps, 1.0, 0.4, true, prop, acc);
  return chain.take();
}

std::string field_to_csv(const FieldConfig& config, std::uint64_t seed) {
  std::string out;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "# N=%d rho=%.17g seed=%llu\n", config.size(),
                config.rho, static_cast<unsigned long long>(seed));
  out += buf;
  for (double v : config.eta) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", v);
    out += buf;
  }
  return out;
}

}  // namespace gl
