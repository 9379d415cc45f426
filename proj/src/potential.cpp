#include "gl/potential.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace gl {

namespace detail {

// Natural cubic spline of V'' together with its exact first and second
// antiderivatives, so V' and V are smooth and V'' stays in the declared
// band (clamped to C_minus outside the sampled range).
class TablePotential {
 public:
  TablePotential(std::vector<double> xs, std::vector<double> ys, double c_minus)
      : x_(std::move(xs)), y_(std::move(ys)), clamp_(c_minus) {
    const std::size_t n = x_.size();
    if (n < 3) throw ConfigurationError("potential table needs >= 3 samples");
    for (std::size_t i = 1; i < n; ++i) {
      if (!(x_[i] > x_[i - 1])) {
        throw ConfigurationError("potential table x values must be increasing");
      }
    }
    build_spline();
    build_antiderivatives();
  }

  // V'' with clamped extrapolation.
  double d2(double x) const {
    if (x <= x_.front() || x >= x_.back()) return clamp_;
    const std::size_t k = interval(x);
    const double t = x - x_[k];
    return a_[k] + t * (b_[k] + t * (c_[k] + t * d_[k]));
  }

  // Antiderivative of d2 with A1(x0) = 0.
  double anti1(double x) const {
    if (x <= x_.front()) return clamp_ * (x - x_.front());
    if (x >= x_.back()) return i1_.back() + clamp_ * (x - x_.back());
    const std::size_t k = interval(x);
    const double t = x - x_[k];
    return i1_[k] + t * (a_[k] + t * (b_[k] / 2 + t * (c_[k] / 3 + t * d_[k] / 4)));
  }

  // Antiderivative of anti1 with A2(x0) = 0.
  double anti2(double x) const {
    if (x <= x_.front()) {
      const double t = x - x_.front();
      return clamp_ * t * t / 2;
    }
    if (x >= x_.back()) {
      const double t = x - x_.back();
      return i2_.back() + i1_.back() * t + clamp_ * t * t / 2;
    }
    const std::size_t k = interval(x);
    const double t = x - x_[k];
    return i2_[k] + t * (i1_[k] +
                         t * (a_[k] / 2 +
                              t * (b_[k] / 6 + t * (c_[k] / 12 + t * d_[k] / 20))));
  }

 private:
  std::size_t interval(double x) const {
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    return static_cast<std::size_t>(it - x_.begin()) - 1;
  }

  void build_spline() {
    const std::size_t n = x_.size();
    std::vector<double> h(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) h[i] = x_[i + 1] - x_[i];

    // Second derivatives m_i of the spline, natural boundary m_0 = m_{n-1} = 0.
    std::vector<double> m(n, 0.0), diag(n, 0.0), rhs(n, 0.0), upper(n, 0.0);
    diag[0] = 1.0;
    diag[n - 1] = 1.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      diag[i] = 2.0 * (h[i - 1] + h[i]);
      upper[i] = h[i];
      rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / h[i] - (y_[i] - y_[i - 1]) / h[i - 1]);
    }
    // Thomas solve (lower diagonal is h[i-1] in the interior rows).
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double lower = (i == 1) ? 0.0 : h[i - 1];
      const double w = lower / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
      m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
    }

    a_.resize(n - 1);
    b_.resize(n - 1);
    c_.resize(n - 1);
    d_.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      a_[i] = y_[i];
      c_[i] = m[i] / 2;
      d_[i] = (m[i + 1] - m[i]) / (6 * h[i]);
      b_[i] = (y_[i + 1] - y_[i]) / h[i] - h[i] * (2 * m[i] + m[i + 1]) / 6;
    }
  }

  void build_antiderivatives() {
    const std::size_t n = x_.size();
    i1_.assign(n, 0.0);
    i2_.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double t = x_[i + 1] - x_[i];
      const double seg1 =
          t * (a_[i] + t * (b_[i] / 2 + t * (c_[i] / 3 + t * d_[i] / 4)));
      const double seg2 =
          t * (i1_[i] +
               t * (a_[i] / 2 + t * (b_[i] / 6 + t * (c_[i] / 12 + t * d_[i] / 20))));
      i1_[i + 1] = i1_[i] + seg1;
      i2_[i + 1] = i2_[i] + seg2;
    }
  }

  std::vector<double> x_, y_;
  double clamp_;
  std::vector<double> a_, b_, c_, d_;  // piecewise cubic of V''
  std::vector<double> i1_, i2_;        // cumulative antiderivatives at knots
};

}  // namespace detail

PotentialSpec::PotentialSpec(PotentialKind kind, double a, double c_minus,
                             double c_plus)
    : kind_(kind), a_(a), c_minus_(c_minus), c_plus_(c_plus) {
  if (!(c_minus > 0.0) || !(c_minus <= c_plus) || !std::isfinite(c_plus)) {
    throw ConfigurationError("potential needs 0 < C_minus <= C_plus < inf");
  }
}

PotentialSpec PotentialSpec::gaussian() {
  return PotentialSpec(PotentialKind::gaussian, 0.0, 1.0, 1.0);
}

PotentialSpec PotentialSpec::gaussian_plus_logcosh(double a) {
  if (a < 0.0 || !std::isfinite(a)) {
    throw ConfigurationError("logcosh amplitude must be finite and >= 0");
  }
  return PotentialSpec(PotentialKind::gaussian_plus_logcosh, a, 1.0, 1.0 + a);
}

PotentialSpec PotentialSpec::user_table(std::vector<double> x,
                                        std::vector<double> d2, double c_minus,
                                        double c_plus) {
  PotentialSpec p(PotentialKind::user_table, 0.0, c_minus, c_plus);
  p.table_ = std::make_shared<detail::TablePotential>(std::move(x), std::move(d2),
                                                      c_minus);
  return p;
}

PotentialSpec PotentialSpec::user_table_from_csv(const std::string& path,
                                                 double c_minus, double c_plus) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open potential table: " + path);
  std::vector<double> xs, ys;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double x, y;
    if (!(row >> x >> y)) {
      throw ConfigurationError("bad potential table row: " + line);
    }
    xs.push_back(x);
    ys.push_back(y);
  }
  return user_table(std::move(xs), std::move(ys), c_minus, c_plus);
}

std::string PotentialSpec::name() const {
  switch (kind_) {
    case PotentialKind::gaussian:
      return "gaussian";
    case PotentialKind::gaussian_plus_logcosh: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "gaussian_plus_logcosh(a=%g)", a_);
      return buf;
    }
    case PotentialKind::user_table:
      return "user_table";
  }
  return "unknown";
}

namespace {

// log cosh x without overflow: |x| - log 2 + log1p(exp(-2|x|)).
inline double log_cosh(double x) {
  const double ax = std::abs(x);
  return ax - std::numbers::ln2 + std::log1p(std::exp(-2.0 * ax));
}

}  // namespace

PotentialEval PotentialSpec::eval(double x) const {
  if (!std::isfinite(x)) throw DomainError("potential argument is not finite");
  switch (kind_) {
    case PotentialKind::gaussian:
      return {x * x / 2, x, 1.0};
    case PotentialKind::gaussian_plus_logcosh: {
      const double th = std::tanh(x);
      return {x * x / 2 + a_ * log_cosh(x), x + a_ * th, 1.0 + a_ * (1.0 - th * th)};
    }
    case PotentialKind::user_table: {
      const double a1_at_0 = table_->anti1(0.0);
      const double a2_at_0 = table_->anti2(0.0);
      const double d1v = table_->anti1(x) - a1_at_0;
      const double v = table_->anti2(x) - a2_at_0 - a1_at_0 * (x - 0.0);
      return {v, d1v, table_->d2(x)};
    }
  }
  throw ModelError("unreachable potential kind");
}

double PotentialSpec::value(double x) const { return eval(x).value; }

double PotentialSpec::d1(double x) const {
  if (!std::isfinite(x)) throw DomainError("potential argument is not finite");
  switch (kind_) {
    case PotentialKind::gaussian:
      return x;
    case PotentialKind::gaussian_plus_logcosh:
      return x + a_ * std::tanh(x);
    case PotentialKind::user_table:
      return table_->anti1(x) - table_->anti1(0.0);
  }
  throw ModelError("unreachable potential kind");
}

double PotentialSpec::d2(double x) const {
  if (!std::isfinite(x)) throw DomainError("potential argument is not finite");
  switch (kind_) {
    case PotentialKind::gaussian:
      return 1.0;
    case PotentialKind::gaussian_plus_logcosh: {
      const double th = std::tanh(x);
      return 1.0 + a_ * (1.0 - th * th);
    }
    case PotentialKind::user_table:
      return table_->d2(x);
  }
  throw ModelError("unreachable potential kind");
}

ConvexityReport PotentialSpec::validate_convexity(
    const std::vector<double>& grid) const {
  if (grid.empty()) throw ConfigurationError("convexity grid is empty");
  ConvexityReport rep{};
  rep.min_d2 = std::numeric_limits<double>::infinity();
  rep.max_d2 = -std::numeric_limits<double>::infinity();
  constexpr double tol = 1e-12;
  for (double x : grid) {
    const double v = d2(x);
    if (v < rep.min_d2) {
      rep.min_d2 = v;
      rep.argmin = x;
    }
    if (v > rep.max_d2) {
      rep.max_d2 = v;
      rep.argmax = x;
    }
    if (v < c_minus_ - tol || v > c_plus_ + tol) {
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    "V''(%.17g) = %.17g outside declared [%.17g, %.17g]", x, v,
                    c_minus_, c_plus_);
      throw ConvexityViolationError(buf);
    }
  }
  rep.pass = true;
  return rep;
}

std::vector<double> PotentialSpec::default_convexity_grid() {
  std::vector<double> grid;
  grid.reserve(16001);
  for (int i = -8000; i <= 8000; ++i) grid.push_back(i * 1e-3);
  return grid;
}

double HamiltonianSpec::c_minus() const {
  double c = v1.c_minus();
  if (v2) c = std::min(c, v2->c_minus());
  return c;
}

double HamiltonianSpec::c_plus() const {
  double c = v1.c_plus();
  if (v2) c = std::max(c, v2->c_plus());
  return c;
}

double HamiltonianSpec::rate_sum_bound() const {
  double s = 2.0 * v1.c_plus();
  if (v2) s += 2.0 * v2->c_plus();
  return s;
}

std::string HamiltonianSpec::name() const {
  std::string n = v1.name();
  if (v2) n += " + V2:" + v2->name();
  return n;
}

double hamiltonian(const HamiltonianSpec& h, const FieldConfig& config) {
  const int n = config.size();
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += h.v1.value(config.eta[i]);
  if (h.v2) {
    for (int i = 0; i < n; ++i) {
      total += h.v2->value(config.eta[i] + config.eta[(i + 1) % n]);
    }
  }
  return total;
}

double bond_gradient(const HamiltonianSpec& h, const FieldConfig& config,
                     const Bond& b) {
  const int n = config.size();
  const int i = static_cast<int>(b.origin);
  const int j = (i + 1) % n;
  double g = h.v1.d1(config.eta[j]) - h.v1.d1(config.eta[i]);
  if (h.v2) {
    const int im1 = (i + n - 1) % n;
    const int jp1 = (j + 1) % n;
    g += h.v2->d1(config.eta[j] + config.eta[jp1]) -
         h.v2->d1(config.eta[im1] + config.eta[i]);
  }
  return g;
}

JumpRates jump_rates(const HamiltonianSpec& h, const FieldConfig& config,
                     const Bond& b) {
  if (b.dir != 0) {
    throw UnsupportedDimensionError("jump rates are defined in d=1 only");
  }
  const int n = config.size();
  const int i = static_cast<int>(b.origin);
  const int j = (i + 1) % n;
  JumpRates r;
  r.minus1 = h.v1.d2(config.eta[i]);
  r.plus1 = h.v1.d2(config.eta[j]);
  if (h.v2) {
    const int im1 = (i + n - 1) % n;
    const int jp1 = (j + 1) % n;
    r.minus2 = h.v2->d2(config.eta[i] + config.eta[im1]);
    r.plus2 = h.v2->d2(config.eta[j] + config.eta[jp1]);
  }
  return r;
}

}  // namespace gl
