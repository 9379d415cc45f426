#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "gl/errors.hpp"

namespace gl {

// One-dimensional field configuration on the N-site torus, constrained
// to the surface sum(eta) = N * rho.
struct FieldConfig {
  std::vector<double> eta;
  double rho = 0.0;

  int size() const { return static_cast<int>(eta.size()); }

  double sum() const {
    double s = 0.0;
    for (double v : eta) s += v;
    return s;
  }

  // |sum - N*rho| must stay below 1e-9 (absolute).
  bool sum_invariant_ok(double tol = 1e-9) const {
    return std::abs(sum() - rho * size()) <= tol * (1.0 + std::abs(rho) * size());
  }
};

// Translate so that output site j carries input site i+j (mod N).
FieldConfig shift(const FieldConfig& config, std::int64_t i);

}  // namespace gl
