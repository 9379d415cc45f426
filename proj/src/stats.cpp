#include "gl/stats.hpp"

#include <algorithm>
#include <cmath>

namespace gl {

MeanSe mean_se(std::span<const double> xs) {
  MeanSe out;
  out.n = static_cast<std::int64_t>(xs.size());
  if (out.n == 0) return out;
  double s = 0.0;
  for (double x : xs) s += x;
  out.mean = s / static_cast<double>(out.n);
  if (out.n < 2) return out;
  double ss = 0.0;
  for (double x : xs) {
    const double d = x - out.mean;
    ss += d * d;
  }
  const double var = ss / static_cast<double>(out.n - 1);
  out.se = std::sqrt(var / static_cast<double>(out.n));
  return out;
}

double sample_covariance(std::span<const double> f, std::span<const double> g) {
  const std::size_t n = f.size();
  if (n != g.size() || n < 2) {
    throw ConfigurationError("covariance needs two equal series, n >= 2");
  }
  double mf = 0.0, mg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mf += f[i];
    mg += g[i];
  }
  mf /= static_cast<double>(n);
  mg /= static_cast<double>(n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += (f[i] - mf) * (g[i] - mg);
  return s / static_cast<double>(n - 1);
}

namespace {

// Shared leave-one-out machinery. `loo` maps the totals with sample i
// removed to the statistic; the caller supplies whatever totals it
// needs via the closure.
template <typename Loo>
JackknifeEstimate jackknife_loop(std::size_t n, Loo&& loo) {
  if (n < 3) throw ConfigurationError("jackknife needs n >= 3");
  double sum = 0.0;
  std::vector<double> theta(n);
  for (std::size_t i = 0; i < n; ++i) {
    theta[i] = loo(i);
    sum += theta[i];
  }
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double t : theta) {
    const double d = t - mean;
    ss += d * d;
  }
  JackknifeEstimate est;
  est.se = std::sqrt(ss * static_cast<double>(n - 1) / static_cast<double>(n));
  return est;
}

struct CovTotals {
  std::size_t n;
  double sf = 0.0, sg = 0.0, sfg = 0.0;

  CovTotals(std::span<const double> f, std::span<const double> g) : n(f.size()) {
    for (std::size_t i = 0; i < n; ++i) {
      sf += f[i];
      sg += g[i];
      sfg += f[i] * g[i];
    }
  }

  double full() const {
    return (sfg - sf * sg / static_cast<double>(n)) / static_cast<double>(n - 1);
  }

  double leave_out(double fi, double gi) const {
    const double m = static_cast<double>(n - 1);
    const double sf_ = sf - fi, sg_ = sg - gi, sfg_ = sfg - fi * gi;
    return (sfg_ - sf_ * sg_ / m) / (m - 1.0);
  }
};

}  // namespace

JackknifeEstimate jk_mean(std::span<const double> x) {
  const std::size_t n = x.size();
  double s = 0.0;
  for (double v : x) s += v;
  auto est = jackknife_loop(n, [&](std::size_t i) {
    return (s - x[i]) / static_cast<double>(n - 1);
  });
  est.value = s / static_cast<double>(n);
  return est;
}

JackknifeEstimate jk_covariance(std::span<const double> f,
                                std::span<const double> g) {
  if (f.size() != g.size()) throw ConfigurationError("series length mismatch");
  CovTotals tot(f, g);
  auto est = jackknife_loop(
      f.size(), [&](std::size_t i) { return tot.leave_out(f[i], g[i]); });
  est.value = tot.full();
  return est;
}

JackknifeEstimate jk_covariance_minus_mean(std::span<const double> f,
                                           std::span<const double> g,
                                           std::span<const double> ind,
                                           double shift) {
  const std::size_t n = f.size();
  if (g.size() != n || ind.size() != n) {
    throw ConfigurationError("series length mismatch");
  }
  CovTotals tot(f, g);
  double sind = 0.0;
  for (double v : ind) sind += v;
  auto est = jackknife_loop(n, [&](std::size_t i) {
    const double m = static_cast<double>(n - 1);
    return tot.leave_out(f[i], g[i]) - ((sind - ind[i]) / m - shift);
  });
  est.value = tot.full() - (sind / static_cast<double>(n) - shift);
  return est;
}

JackknifeEstimate jk_covariance_over_mean(std::span<const double> f,
                                          std::span<const double> g,
                                          std::span<const double> ind,
                                          double shift) {
  const std::size_t n = f.size();
  if (g.size() != n || ind.size() != n) {
    throw ConfigurationError("series length mismatch");
  }
  CovTotals tot(f, g);
  double sind = 0.0;
  for (double v : ind) sind += v;
  const double denom = sind / static_cast<double>(n) - shift;
  if (denom == 0.0) throw ConfigurationError("ratio denominator is zero");
  auto est = jackknife_loop(n, [&](std::size_t i) {
    const double m = static_cast<double>(n - 1);
    const double d = (sind - ind[i]) / m - shift;
    return tot.leave_out(f[i], g[i]) / d;
  });
  est.value = tot.full() / denom;
  return est;
}

double effective_sample_size(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 100) throw UndefinedEssError("ESS needs at least 100 points");
  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(n);
  double c0 = 0.0;
  for (double x : series) {
    const double d = x - mean;
    c0 += d * d;
  }
  c0 /= static_cast<double>(n);
  if (c0 <= 0.0) throw UndefinedEssError("ESS undefined for a constant series");

  auto gamma = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) {
      s += (series[i] - mean) * (series[i + lag] - mean);
    }
    return s / static_cast<double>(n);
  };

  // Geyer initial positive sequence: sum consecutive pairs of
  // autocorrelations until a pair sum goes non-positive.
  double tau = 0.0;
  for (std::size_t m = 0;; ++m) {
    const std::size_t l0 = 2 * m, l1 = 2 * m + 1;
    if (l1 >= n / 2) break;
    const double pair = (gamma(l0) + gamma(l1)) / c0;
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  tau -= 1.0;  // lag-0 counted twice in the first pair
  tau = std::max(tau, 1.0);
  return static_cast<double>(n) / tau;
}

std::vector<double> autocovariance(std::span<const double> series,
                                   std::span<const int> lags) {
  const std::size_t n = series.size();
  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(n);
  std::vector<double> out;
  out.reserve(lags.size());
  for (int lag : lags) {
    const std::size_t l = static_cast<std::size_t>(lag);
    if (l >= n) throw ConfigurationError("autocovariance lag beyond series");
    double s = 0.0;
    for (std::size_t i = 0; i + l < n; ++i) {
      s += (series[i] - mean) * (series[i + l] - mean);
    }
    out.push_back(s / static_cast<double>(n - l));
  }
  return out;
}

LineFit weighted_least_squares(std::span<const double> x,
                               std::span<const double> y,
                               std::span<const double> w) {
  const std::size_t n = x.size();
  if (y.size() != n || w.size() != n || n < 3) {
    throw ConfigurationError("fit needs matching x, y, w with n >= 3");
  }
  double sw = 0.0, swx = 0.0, swy = 0.0, swxx = 0.0, swxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w[i];
    swx += w[i] * x[i];
    swy += w[i] * y[i];
    swxx += w[i] * x[i] * x[i];
    swxy += w[i] * x[i] * y[i];
  }
  const double det = sw * swxx - swx * swx;
  if (det <= 0.0) throw ConfigurationError("degenerate design in fit");
  LineFit fit;
  fit.slope = (sw * swxy - swx * swy) / det;
  fit.intercept = (swxx * swy - swx * swxy) / det;

  double chi2 = 0.0, sst = 0.0;
  const double ybar = swy / sw;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    chi2 += w[i] * r * r;
    sst += w[i] * (y[i] - ybar) * (y[i] - ybar);
  }
  fit.r2 = (sst > 0.0) ? 1.0 - chi2 / sst : 1.0;
  // Scale the covariance by reduced chi^2 so weights need only be relative.
  const double scale = (n > 2) ? chi2 / static_cast<double>(n - 2) : 0.0;
  fit.slope_se = std::sqrt(std::max(scale, 0.0) * sw / det);
  return fit;
}

namespace {

double kolmogorov_q(double lambda) {
  if (lambda < 1e-8) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = 2.0 * ((j % 2 == 1) ? 1.0 : -1.0) *
                        std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

}  // namespace

double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b) {
  if (a.size() < 10 || b.size() < 10) {
    throw ConfigurationError("KS test needs >= 10 points per sample");
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double xa = a[i], xb = b[j];
    if (xa <= xb) ++i;
    if (xb <= xa) ++j;
    const double fa = static_cast<double>(i) / na;
    const double fb = static_cast<double>(j) / nb;
    d = std::max(d, std::abs(fa - fb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return kolmogorov_q((ne + 0.12 + 0.11 / ne) * d);
}

}  // namespace gl
