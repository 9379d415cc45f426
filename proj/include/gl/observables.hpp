#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "gl/field.hpp"
#include "gl/lattice.hpp"
#include "gl/potential.hpp"

namespace gl {

// Local observable of the field with analytic site partials, from which
// bond gradients d_b f = df/deta_j - df/deta_i follow.
class Observable {
 public:
  virtual ~Observable() = default;

  virtual double value(const FieldConfig& config) const = 0;
  virtual double site_partial(const FieldConfig& config, int site) const = 0;
  // Sites where the partial may be nonzero (indices mod N).
  virtual std::vector<int> support_sites(int n_sites) const = 0;
  virtual std::string name() const = 0;

  double bond_partial(const FieldConfig& config, const Bond& b) const {
    const int n = config.size();
    const int i = static_cast<int>(b.origin);
    return site_partial(config, (i + 1) % n) - site_partial(config, i);
  }

  // Bonds with a possibly nonzero bond partial.
  std::vector<int> support_bonds(int n_sites) const;
};

using ObservablePtr = std::shared_ptr<const Observable>;

// eta_i
ObservablePtr site_value(int site);
// V'(eta_i)
ObservablePtr v_prime_at(int site, PotentialSpec v);
// constant (gradient-free)
ObservablePtr constant_observable(double c);
// tanh(eta_i): bounded monotone local function
ObservablePtr tanh_site(int site);
// eta_i + eta_j
ObservablePtr site_sum(int i, int j);
// K tanh(eta_i eta_j / K): the clipped pair product
ObservablePtr clipped_product(int i, int j, double clip);

// Compactly supported profile on [-1, 1], sampled uniformly; linear
// interpolation in between, zero outside.
class Profile {
 public:
  Profile(std::vector<double> samples);
  static Profile triangular(int points = 129);
  static Profile zero(int points = 9);

  double operator()(double y) const;
  int points() const { return static_cast<int>(samples_.size()); }

 private:
  std::vector<double> samples_;
};

// eps * sum_i phi(eps i) eta_{i + floor(x/eps)}
ObservablePtr smoothed_field(Profile phi, double eps, double x);

}  // namespace gl
