#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gl/errors.hpp"
#include "gl/field.hpp"
#include "gl/lattice.hpp"

namespace gl {

enum class PotentialKind { gaussian, gaussian_plus_logcosh, user_table };

struct PotentialEval {
  double value;
  double d1;
  double d2;
};

struct ConvexityReport {
  double min_d2;
  double max_d2;
  double argmin;
  double argmax;
  bool pass;
};

namespace detail {
class TablePotential;
}

// A single convex potential V with certified curvature band
// 0 < C_minus <= V'' <= C_plus.
class PotentialSpec {
 public:
  static PotentialSpec gaussian();
  // V(x) = x^2/2 + a log cosh x, C_minus = 1, C_plus = 1 + a.
  static PotentialSpec gaussian_plus_logcosh(double a);
  // Natural cubic spline through (x, V'') samples; V'' clamped to
  // C_minus outside the sampled range. V' and V by exact piecewise
  // integration, normalized to V(0) = V'(0) = 0.
  static PotentialSpec user_table(std::vector<double> x, std::vector<double> d2,
                                  double c_minus, double c_plus);
  // Two-column CSV: x, V_second. '#' lines ignored.
  static PotentialSpec user_table_from_csv(const std::string& path,
                                           double c_minus, double c_plus);

  PotentialKind kind() const { return kind_; }
  double logcosh_amplitude() const { return a_; }
  double c_minus() const { return c_minus_; }
  double c_plus() const { return c_plus_; }
  bool is_gaussian() const { return kind_ == PotentialKind::gaussian; }
  std::string name() const;

  PotentialEval eval(double x) const;  // throws DomainError on non-finite x
  double value(double x) const;
  double d1(double x) const;
  double d2(double x) const;

  // min/max of V'' over the grid; throws ConvexityViolationError naming
  // the offending x when the declared band is violated beyond 1e-12.
  ConvexityReport validate_convexity(const std::vector<double>& grid) const;

  // Default certification grid [-8, 8], step 1e-3.
  static std::vector<double> default_convexity_grid();

 private:
  PotentialSpec(PotentialKind kind, double a, double c_minus, double c_plus);

  PotentialKind kind_;
  double a_ = 0.0;
  double c_minus_;
  double c_plus_;
  std::shared_ptr<const detail::TablePotential> table_;
};

// H(eta) = sum_i V1(eta_i) [+ V2(eta_i + eta_{i+1})].
struct HamiltonianSpec {
  PotentialSpec v1 = PotentialSpec::gaussian();
  std::optional<PotentialSpec> v2;

  bool is_gaussian_product() const { return v1.is_gaussian() && !v2; }
  double c_minus() const;
  double c_plus() const;
  // Upper bound on the total walk jump rate out of one bond.
  double rate_sum_bound() const;
  std::string name() const;
};

double hamiltonian(const HamiltonianSpec& h, const FieldConfig& config);

// d_b H = dH/deta_j - dH/deta_i for b = (i, i+1).
double bond_gradient(const HamiltonianSpec& h, const FieldConfig& config,
                     const Bond& b);

// Walk jump rates out of bond b = (i, i+1), keyed by offset.
struct JumpRates {
  double minus2 = 0.0;  // V2''(eta_i + eta_{i-1})
  double minus1 = 0.0;  // V1''(eta_i)
  double plus1 = 0.0;   // V1''(eta_{i+1})
  double plus2 = 0.0;   // V2''(eta_{i+1} + eta_{i+2})

  double total() const { return minus2 + minus1 + plus1 + plus2; }
};

JumpRates jump_rates(const HamiltonianSpec& h, const FieldConfig& config,
                     const Bond& b);

}  // namespace gl
