#include <doctest.h>

#include <cmath>
#include <vector>

#include "gl/rng.hpp"
#include "gl/stats.hpp"

using namespace gl;

TEST_SUITE("stats") {

TEST_CASE("keyed draws are reproducible and tag-separated") {
  CHECK(keyed_u64(1, 2, 3, RngTag::init) == keyed_u64(1, 2, 3, RngTag::init));
  CHECK(keyed_u64(1, 2, 3, RngTag::init) != keyed_u64(1, 2, 3, RngTag::proposal));
  CHECK(keyed_u64(1, 2, 3, RngTag::init) != keyed_u64(1, 2, 4, RngTag::init));
  CHECK(keyed_u64(1, 2, 3, RngTag::init) != keyed_u64(1, 3, 3, RngTag::init));

  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("keyed normals have the right first moments") {
  const long n = 200000;
  double s = 0.0, ss = 0.0;
  for (long i = 0; i < n; ++i) {
    const double z = keyed_normal(5, 0, i, RngTag::scratch);
    s += z;
    ss += z * z;
  }
  const double mean = s / n;
  const double var = ss / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(var == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("ESS of white noise is about n") {
  std::vector<double> x(10000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = keyed_normal(9, 1, i, RngTag::scratch);
  }
  const double ess = effective_sample_size(x);
  CHECK(ess > 0.9 * x.size());
  CHECK(ess < 1.1 * x.size());
}

TEST_CASE("ESS of an AR(1) matches the closed form") {
  // ESS/n = (1 - phi)/(1 + phi) for AR(1) with coefficient phi.
  const double phi = 0.9;
  std::vector<double> x(200000);
  x[0] = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    x[i] = phi * x[i - 1] + keyed_normal(10, 2, i, RngTag::scratch);
  }
  const double ess = effective_sample_size(x);
  const double expected = x.size() * (1 - phi) / (1 + phi);
  CHECK(ess == doctest::Approx(expected).epsilon(0.15));
}

TEST_CASE("ESS rejects degenerate input") {
  CHECK_THROWS_AS(effective_sample_size(std::vector<double>(500, 3.0)),
                  UndefinedEssError);
  CHECK_THROWS_AS(effective_sample_size(std::vector<double>(10, 0.0)),
                  UndefinedEssError);
}

TEST_CASE("jackknife covariance agrees with the direct estimate") {
  std::vector<double> f, g;
  RngStream rng(3, 0);
  for (int i = 0; i < 400; ++i) {
    const double a = rng.next_normal();
    f.push_back(a);
    g.push_back(0.5 * a + rng.next_normal());
  }
  const auto jk = jk_covariance(f, g);
  CHECK(jk.value == doctest::Approx(sample_covariance(f, g)).epsilon(1e-12));
  // The true covariance 0.5 should sit within a few standard errors.
  CHECK(std::abs(jk.value - 0.5) < 4 * jk.se);
}

TEST_CASE("jackknife mean matches the classical standard error") {
  std::vector<double> x;
  RngStream rng(4, 0);
  for (int i = 0; i < 500; ++i) x.push_back(rng.next_normal());
  const auto jk = jk_mean(x);
  const auto ms = mean_se(x);
  CHECK(jk.value == doctest::Approx(ms.mean).epsilon(1e-12));
  CHECK(jk.se == doctest::Approx(ms.se).epsilon(1e-9));
}

TEST_CASE("weighted least squares recovers an exact line") {
  std::vector<double> x{0, 1, 2, 3, 4}, y, w(5, 1.0);
  for (double v : x) y.push_back(3.0 - 2.0 * v);
  const auto fit = weighted_least_squares(x, y, w);
  CHECK(fit.slope == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("KS test separates equal and shifted samples") {
  std::vector<double> a, b, c;
  for (int i = 0; i < 4000; ++i) {
    a.push_back(keyed_normal(6, 0, i, RngTag::scratch));
    b.push_back(keyed_normal(6, 1, i, RngTag::scratch));
    c.push_back(keyed_normal(6, 2, i, RngTag::scratch) + 0.5);
  }
  CHECK(ks_two_sample_pvalue(a, b) > 0.01);
  CHECK(ks_two_sample_pvalue(a, c) < 1e-6);
}

}  // TEST_SUITE
