#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "gl/sampler.hpp"
#include "gl/spectral.hpp"
#include "test_support.hpp"

using namespace gl;

namespace {

const HamiltonianSpec kGaussian{PotentialSpec::gaussian(), std::nullopt};
const HamiltonianSpec kAnharmonic{PotentialSpec::gaussian_plus_logcosh(1.0),
                                  std::nullopt};

std::vector<double> circulant_spectrum(int n, int d) {
  std::vector<double> ev;
  const std::int64_t total = static_cast<std::int64_t>(std::pow(n, d));
  for (std::int64_t i = 0; i < total; ++i) {
    double v = 0.0;
    std::int64_t rem = i;
    for (int axis = 0; axis < d; ++axis) {
      v += 2.0 * std::cos(2.0 * std::numbers::pi * (rem % n) / n) - 2.0;
      rem /= n;
    }
    ev.push_back(v);
  }
  std::sort(ev.begin(), ev.end(), std::greater<double>());
  return ev;
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("walk spectrum on the 4-cycle") {
  const auto ev = q_spectrum(4, 1);
  REQUIRE(ev.size() == 4);
  CHECK(ev[0] == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(ev[1] == doctest::Approx(-2.0).epsilon(1e-13));
  CHECK(ev[2] == doctest::Approx(-2.0).epsilon(1e-13));
  CHECK(ev[3] == doctest::Approx(-4.0).epsilon(1e-13));
}

TEST_CASE("dense spectrum agrees with the circulant formula") {
  for (const auto& [n, d] : std::vector<std::pair<int, int>>{{12, 1}, {5, 2}, {128, 1}}) {
    const auto dense = q_spectrum(n, d);
    const auto expected = circulant_spectrum(n, d);
    REQUIRE(dense.size() == expected.size());
    for (std::size_t i = 0; i < dense.size(); ++i) {
      CHECK(dense[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("lambda_2 obeys the 16/N^2 lower bound") {
  for (int n = 4; n <= 512; n *= 2) {
    CHECK(lambda2_magnitude(n) >= 16.0 / (static_cast<double>(n) * n));
  }
}

TEST_CASE("discrete gap inequality with the equality mode") {
  for (int d : {1, 2}) {
    const auto res = discrete_gap_inequality(16, d, 500, 53);
    CHECK(res.min_ratio >= res.lambda2_abs - 1e-10);
    // The slowest Fourier mode is included as a trial, so the minimum
    // cannot sit above the equality value either.
    CHECK(res.min_ratio <= res.lambda2_abs + 1e-9);
  }
}

TEST_CASE("wrapped kernel row matches the Bessel series") {
  const int n = 64;
  for (double t : {0.5, 1.0, 2.0}) {
    const auto row = srw_kernel_row(n, t);
    double total = 0.0;
    for (double p : row) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = -8; i <= 8; ++i) {
      const double wrapped = row[(i + n) % n];
      CHECK(wrapped == doctest::Approx(testing::bessel_kernel(i, t)).epsilon(1e-10));
    }
  }
}

TEST_CASE("Gaussian covariance row: conditioned law at t=0, decay at large t") {
  const int n = 8;
  const auto row0 = gaussian_cov_row(n, 0.0);
  CHECK(row0[0] == doctest::Approx(1.0 - 1.0 / n).epsilon(1e-12));
  for (int r = 1; r < n; ++r) {
    CHECK(row0[r] == doctest::Approx(-1.0 / n).epsilon(1e-12));
  }
  const auto late = gaussian_cov_row(n, 50.0);
  for (double v : late) CHECK(std::abs(v) < 1e-10);
}

TEST_CASE("Gaussian covariance diagonal matches the infinite-volume Bessel law") {
  for (int n : {64, 128}) {
    for (double t : {0.5, 1.0, 2.0}) {
      const auto row = gaussian_cov_row(n, t);
      const double expected = testing::bessel_kernel(0, t) - 1.0 / n;
      CHECK(std::abs(row[0] - expected) < 1e-10);
    }
  }
}

TEST_CASE("covariance matrix is the circulant of its row") {
  const auto m = gaussian_exact_covariance(6, 0.3);
  const auto row = gaussian_cov_row(6, 0.3);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      CHECK(m[i][j] == doctest::Approx(row[(j - i + 6) % 6]).epsilon(1e-14));
    }
  }
}

TEST_CASE("Witten pseudo-inverse reproduces the conditioned covariance") {
  for (int n : {4, 8, 64}) {
    const auto rep = witten_check_gaussian(n);
    CHECK(rep.kernel_modes == 1);
    CHECK(rep.max_discrepancy < 1e-12);
    CHECK(rep.max_row_sum < 1e-12);
  }
}

TEST_CASE("commutation identity on linear observables") {
  CHECK(commutation_check_gaussian(4) < 1e-12);
  CHECK(commutation_check_gaussian(16) < 1e-12);
}

TEST_CASE("Hessian positivity bound and rate-table consistency") {
  RngStream rng(54, 0);
  const auto c = sample_canonical_gaussian(12, 0.0, rng);
  for (const auto& h : {kGaussian, kAnharmonic,
                        HamiltonianSpec{PotentialSpec::gaussian_plus_logcosh(0.5),
                                        PotentialSpec::gaussian_plus_logcosh(0.3)}}) {
    const auto check = hessian_lower_bound_check(h, c, 200, 55);
    CHECK(check.max_identity_error < 1e-10);
    CHECK(check.min_slack >= -1e-10);
    CHECK(check.max_rate_table_error < 1e-12);
  }
}

TEST_CASE("lambda ordering in the Gaussian model") {
  for (int n : {4, 8, 16}) {
    const auto ord = gaussian_lambda_ordering(n);
    CHECK(ord.lambda >= ord.lambda_tilde - 1e-12);
    CHECK(ord.lambda == doctest::Approx(lambda2_magnitude(n)).epsilon(1e-12));
    CHECK(ord.lambda_tilde == doctest::Approx(lambda2_magnitude(n)).epsilon(1e-12));
  }
}

TEST_CASE("dynamic gap estimate recovers the OU mode decay") {
  GapFitOptions opts;
  opts.parallelism = 2;
  const auto fit = gap_estimate_dynamic(kGaussian, 16, 0.0, 8, 56, opts);
  CHECK(fit.r2 >= 0.95);
  CHECK(std::abs(fit.rate - fit.gaussian_rate) <
        std::max(3.0 * fit.se, 0.08 * fit.gaussian_rate));
}

}  // TEST_SUITE
