#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "gl/sampler.hpp"
#include "gl/stats.hpp"
#include "test_support.hpp"

using namespace gl;

namespace {

const HamiltonianSpec kGaussian{PotentialSpec::gaussian(), std::nullopt};
const HamiltonianSpec kAnharmonic{PotentialSpec::gaussian_plus_logcosh(1.0),
                                  std::nullopt};

}  // namespace

TEST_SUITE("sampler") {

TEST_CASE("exact Gaussian draws sit on the constraint surface") {
  RngStream rng(1, 0);
  for (int k = 0; k < 20; ++k) {
    const auto c = sample_canonical_gaussian(16, 0.75, rng);
    CHECK(c.sum() == doctest::Approx(16 * 0.75).epsilon(1e-12));
    CHECK(c.sum_invariant_ok());
  }
}

TEST_CASE("exact Gaussian covariance matches the conditioned product law") {
  // Conditioned-Gaussian oracle: Var = 1 - 1/N, Cov = -1/N.
  const int n = 16;
  const long draws = 100000;
  std::vector<double> e0(draws), e1(draws);
  for (long d = 0; d < draws; ++d) {
    RngStream rng(2, static_cast<std::uint64_t>(d));
    const auto c = sample_canonical_gaussian(n, 0.0, rng);
    e0[d] = c.eta[0];
    e1[d] = c.eta[1];
  }
  const auto var = jk_covariance(e0, e0);
  const auto cov = jk_covariance(e0, e1);
  CHECK(std::abs(var.value - 0.9375) < 3 * var.se);
  CHECK(std::abs(cov.value - (-0.0625)) < 3 * cov.se);
}

TEST_CASE("exact sampler covariance is right entrywise") {
  const int n = 8;
  const long draws = 40000;
  std::vector<std::vector<double>> eta(n, std::vector<double>(draws));
  for (long d = 0; d < draws; ++d) {
    RngStream rng(3, static_cast<std::uint64_t>(d));
    const auto c = sample_canonical_gaussian(n, 0.0, rng);
    for (int i = 0; i < n; ++i) eta[i][d] = c.eta[i];
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const auto cov = jk_covariance(eta[i], eta[j]);
      const double expected = (i == j ? 1.0 : 0.0) - 1.0 / n;
      CHECK(std::abs(cov.value - expected) < 4 * cov.se);
    }
  }
}

TEST_CASE("exact sampler refuses non-Gaussian Hamiltonians") {
  RngStream rng(4, 0);
  CHECK_THROWS_AS(sample_canonical_gaussian(kAnharmonic, 8, 0.0, rng),
                  WrongSamplerError);
  CHECK_NOTHROW(sample_canonical_gaussian(kGaussian, 8, 0.0, rng));
}

TEST_CASE("bond exchange preserves the sum exactly over a long chain") {
  RngStream rng(5, 0);
  SamplerOptions opts;
  opts.burnin_sweeps = 0;
  // 125000 sweeps of 8 proposals = 1e6 exchange moves.
  const auto draw = sample_canonical_mcmc(kAnharmonic, 8, 0.5, 125000, rng, opts);
  CHECK(std::abs(draw.config.sum() - 8 * 0.5) < 1e-9);
}

TEST_CASE("MCMC reproduces the Gaussian marginal variance") {
  const int n = 8;
  const long draws = 4000;
  std::vector<double> e0(draws);
  SamplerOptions opts;
  opts.burnin_sweeps = 150;
  for (long d = 0; d < draws; ++d) {
    RngStream rng(6, static_cast<std::uint64_t>(d));
    e0[d] = sample_canonical_mcmc(kGaussian, n, 0.0, 150, rng, opts).config.eta[0];
  }
  const auto var = jk_covariance(e0, e0);
  CHECK(std::abs(var.value - (1.0 - 1.0 / n)) < 3.5 * var.se);
}

TEST_CASE("anharmonic nearest-neighbor covariance matches importance sampling") {
  const int n = 8;
  const auto oracle =
      testing::importance_sampling_cov(1.0, n, 0.0, 0, 1, 3000000, 0.08, 99);
  REQUIRE(oracle.effective_n > 5000);

  const long draws = 6000;
  std::vector<double> e0(draws), e1(draws);
  for (long d = 0; d < draws; ++d) {
    RngStream rng(7, static_cast<std::uint64_t>(d));
    const auto c = equilibrium_draw(kAnharmonic, n, 0.0, rng);
    e0[d] = c.eta[0];
    e1[d] = c.eta[1];
  }
  const auto cov = jk_covariance(e0, e1);
  const double se = std::hypot(cov.se, oracle.se);
  CHECK(std::abs(cov.value - oracle.cov) < 3 * se);
}

TEST_CASE("equilibrium draws satisfy the t=0 correlation identity") {
  // <V'(eta_0); eta_i> = delta_{0i} - 1/N exactly under mu_{rho,N};
  // a sharp test that the short burn-in reaches equilibrium.
  const int n = 32;
  const long draws = 5000;
  std::vector<double> vp(draws);
  std::vector<std::vector<double>> eta(3, std::vector<double>(draws));
  for (long d = 0; d < draws; ++d) {
    RngStream rng(8, static_cast<std::uint64_t>(d));
    const auto c = equilibrium_draw(kAnharmonic, n, 0.0, rng);
    vp[d] = kAnharmonic.v1.d1(c.eta[0]);
    for (int i = 0; i < 3; ++i) eta[i][d] = c.eta[i];
  }
  for (int i = 0; i < 3; ++i) {
    const auto cov = jk_covariance(vp, eta[i]);
    const double expected = (i == 0 ? 1.0 : 0.0) - 1.0 / n;
    CHECK(std::abs(cov.value - expected) < 4 * cov.se);
  }
}

TEST_CASE("bond exchange kernel is reversible on a 3-site surface") {
  // Detailed balance integrated over a grid of surface points and
  // proposal increments, through the actual acceptance rule.
  for (const auto& h : {kGaussian, kAnharmonic}) {
    double max_asym = 0.0;
    for (double u = -1.0; u <= 1.0; u += 0.5) {
      for (double v = -1.0; v <= 1.0; v += 0.5) {
        FieldConfig c;
        c.eta = {u, v, -u - v};
        for (int bond = 0; bond < 3; ++bond) {
          for (double delta : {-0.8, -0.3, 0.2, 0.7}) {
            FieldConfig c2 = c;
            c2.eta[bond] += delta;
            c2.eta[(bond + 1) % 3] -= delta;
            const double fwd = std::exp(-hamiltonian(h, c)) *
                               std::min(1.0, std::exp(mcmc_log_accept(h, c, bond, delta)));
            const double bwd = std::exp(-hamiltonian(h, c2)) *
                               std::min(1.0, std::exp(mcmc_log_accept(h, c2, bond, -delta)));
            max_asym = std::max(max_asym, std::abs(fwd - bwd));
          }
        }
      }
    }
    CHECK(max_asym < 1e-8);
  }
}

TEST_CASE("acceptance-rate warning is surfaced, not fatal") {
  RngStream rng(9, 0);
  SamplerOptions opts;
  opts.adapt = false;
  opts.initial_sigma = 200.0;  // nearly everything rejected
  const auto draw = sample_canonical_mcmc(kAnharmonic, 8, 0.0, 30, rng, opts);
  REQUIRE(!draw.warnings.empty());
  bool found = false;
  for (const auto& w : draw.warnings) {
    if (w.find("acceptance rate") != std::string::npos) found = true;
  }
  CHECK(found);
}

TEST_CASE("CSV export carries the metadata header") {
  RngStream rng(10, 0);
  const auto c = sample_canonical_gaussian(4, 0.25, rng);
  const auto text = field_to_csv(c, 77);
  CHECK(text.rfind("# N=4 rho=0.25 seed=77\n", 0) == 0);
  // One line per site plus the header.
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
}

}  // TEST_SUITE
