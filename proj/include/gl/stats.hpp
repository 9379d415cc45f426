#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gl/errors.hpp"

namespace gl {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  std::int64_t n = 0;
};

MeanSe mean_se(std::span<const double> xs);

// Unbiased sample covariance.
double sample_covariance(std::span<const double> f, std::span<const double> g);

struct JackknifeEstimate {
  double value = 0.0;
  double se = 0.0;
};

// Leave-one-out jackknife for the statistics the estimators need. All
// run in O(n) using totals.
JackknifeEstimate jk_mean(std::span<const double> x);
JackknifeEstimate jk_covariance(std::span<const double> f,
                                std::span<const double> g);
// cov(f, g) - (mean(ind) - shift): the two sides of the correlation
// identity estimated on common replicas.
JackknifeEstimate jk_covariance_minus_mean(std::span<const double> f,
                                           std::span<const double> g,
                                           std::span<const double> ind,
                                           double shift);
// cov(f, g) / (mean(ind) - shift).
JackknifeEstimate jk_covariance_over_mean(std::span<const double> f,
                                          std::span<const double> g,
                                          std::span<const double> ind,
                                          double shift);

// Integrated-autocorrelation ESS with Geyer's initial positive sequence
// truncation. Requires length >= 100; throws UndefinedEssError for a
// constant series.
double effective_sample_size(std::span<const double> series);

// Stationary autocovariance at the given lags (mean subtracted once).
std::vector<double> autocovariance(std::span<const double> series,
                                   std::span<const int> lags);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double r2 = 0.0;
};

LineFit weighted_least_squares(std::span<const double> x,
                               std::span<const double> y,
                               std::span<const double> w);

// Two-sample Kolmogorov-Smirnov p-value (asymptotic).
double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b);

}  // namespace gl
