#include "gl/observables.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

namespace gl {

std::vector<int> Observable::support_bonds(int n_sites) const {
  std::set<int> bonds;
  for (int site : support_sites(n_sites)) {
    int s = site % n_sites;
    if (s < 0) s += n_sites;
    bonds.insert(s);                       // bond (s, s+1)
    bonds.insert((s - 1 + n_sites) % n_sites);  // bond (s-1, s)
  }
  return {bonds.begin(), bonds.end()};
}

namespace {

int wrap(int site, int n) {
  int s = site % n;
  return s < 0 ? s + n : s;
}

class SiteValue : public Observable {
 public:
  explicit SiteValue(int site) : site_(site) {}
  double value(const FieldConfig& c) const override {
    return c.eta[wrap(site_, c.size())];
  }
  double site_partial(const FieldConfig& c, int site) const override {
    return site == wrap(site_, c.size()) ? 1.0 : 0.0;
  }
  std::vector<int> support_sites(int) const override { return {site_}; }
  std::string name() const override { return "eta_" + std::to_string(site_); }

 private:
  int site_;
};

class VPrimeAt : public Observable {
 public:
  VPrimeAt(int site, PotentialSpec v) : site_(site), v_(std::move(v)) {}
  double value(const FieldConfig& c) const override {
    return v_.d1(c.eta[wrap(site_, c.size())]);
  }
  double site_partial(const FieldConfig& c, int site) const override {
    const int s = wrap(site_, c.size());
    return site == s ? v_.d2(c.eta[s]) : 0.0;
  }
  std::vector<int> support_sites(int) const override { return {site_}; }
  std::string name() const override { return "vprime_" + std::to_string(site_); }

 private:
  int site_;
  PotentialSpec v_;
};

class ConstantObs : public Observable {
 public:
  explicit ConstantObs(double c) : c_(c) {}
  double value(const FieldConfig&) const override { return c_; }
  double site_partial(const FieldConfig&, int) const override { return 0.0; }
  std::vector<int> support_sites(int) const override { return {}; }
  std::string name() const override { return "const"; }

 private:
  double c_;
};

class TanhSite : public Observable {
 public:
  explicit TanhSite(int site) : site_(site) {}
  double value(const FieldConfig& c) const override {
    return std::tanh(c.eta[wrap(site_, c.size())]);
  }
  double site_partial(const FieldConfig& c, int site) const override {
    const int s = wrap(site_, c.size());
    if (site != s) return 0.0;
    const double t = std::tanh(c.eta[s]);
    return 1.0 - t * t;
  }
  std::vector<int> support_sites(int) const override { return {site_}; }
  std::string name() const override { return "tanh_eta_" + std::to_string(site_); }

 private:
  int site_;
};

class SiteSum : public Observable {
 public:
  SiteSum(int i, int j) : i_(i), j_(j) {}
  double value(const FieldConfig& c) const override {
    return c.eta[wrap(i_, c.size())] + c.eta[wrap(j_, c.size())];
  }
  double site_partial(const FieldConfig& c, int site) const override {
    double p = 0.0;
    if (site == wrap(i_, c.size())) p += 1.0;
    if (site == wrap(j_, c.size())) p += 1.0;
    return p;
  }
  std::vector<int> support_sites(int) const override { return {i_, j_}; }
  std::string name() const override {
    return "eta_" + std::to_string(i_) + "+eta_" + std::to_string(j_);
  }

 private:
  int i_, j_;
};

class ClippedProduct : public Observable {
 public:
  ClippedProduct(int i, int j, double clip) : i_(i), j_(j), clip_(clip) {}
  double value(const FieldConfig& c) const override {
    const double u =
        c.eta[wrap(i_, c.size())] * c.eta[wrap(j_, c.size())] / clip_;
    return clip_ * std::tanh(u);
  }
  double site_partial(const FieldConfig& c, int site) const override {
    const int a = wrap(i_, c.size());
    const int b = wrap(j_, c.size());
    if (site != a && site != b) return 0.0;
    const double ea = c.eta[a], eb = c.eta[b];
    const double t = std::tanh(ea * eb / clip_);
    const double sech2 = 1.0 - t * t;
    double p = 0.0;
    if (site == a) p += sech2 * eb;
    if (site == b) p += sech2 * ea;
    return p;
  }
  std::vector<int> support_sites(int) const override { return {i_, j_}; }
  std::string name() const override {
    return "clip(eta_" + std::to_string(i_) + " eta_" + std::to_string(j_) + ")";
  }

 private:
  int i_, j_;
  double clip_;
};

}  // namespace

ObservablePtr site_value(int site) { return std::make_shared<SiteValue>(site); }

ObservablePtr v_prime_at(int site, PotentialSpec v) {
  return std::make_shared<VPrimeAt>(site, std::move(v));
}

ObservablePtr constant_observable(double c) {
  return std::make_shared<ConstantObs>(c);
}

ObservablePtr tanh_site(int site) { return std::make_shared<TanhSite>(site); }

ObservablePtr site_sum(int i, int j) { return std::make_shared<SiteSum>(i, j); }

ObservablePtr clipped_product(int i, int j, double clip) {
  return std::make_shared<ClippedProduct>(i, j, clip);
}

Profile::Profile(std::vector<double> samples) : samples_(std::move(samples)) {
  if (samples_.size() < 2) throw ConfigurationError("profile needs >= 2 samples");
}

Profile Profile::triangular(int points) {
  std::vector<double> s(points);
  for (int i = 0; i < points; ++i) {
    const double y = -1.0 + 2.0 * i / (points - 1);
    s[i] = std::max(0.0, 1.0 - std::abs(y));
  }
  return Profile(std::move(s));
}

Profile Profile::zero(int points) {
  return Profile(std::vector<double>(points, 0.0));
}

double Profile::operator()(double y) const {
  if (y <= -1.0 || y >= 1.0) return 0.0;
  const double pos = (y + 1.0) / 2.0 * (samples_.size() - 1);
  const auto k = static_cast<std::size_t>(pos);
  if (k + 1 >= samples_.size()) return samples_.back();
  const double frac = pos - static_cast<double>(k);
  return samples_[k] * (1.0 - frac) + samples_[k + 1] * frac;
}

namespace {

class SmoothedField : public Observable {
 public:
  SmoothedField(Profile phi, double eps, double x)
      : phi_(std::move(phi)), eps_(eps), x_(x) {
    if (!(eps > 0.0)) throw ConfigurationError("smoothing eps must be > 0");
    const int reach = static_cast<int>(std::floor(1.0 / eps));
    const int base = static_cast<int>(std::floor(x / eps));
    for (int i = -reach; i <= reach; ++i) {
      const double w = eps_ * phi_(eps_ * i);
      if (w != 0.0) {
        sites_.push_back(base + i);
        weights_.push_back(w);
      }
    }
  }

  double value(const FieldConfig& c) const override {
    double s = 0.0;
    for (std::size_t k = 0; k < sites_.size(); ++k) {
      s += weights_[k] * c.eta[wrap(sites_[k], c.size())];
    }
    return s;
  }

  double site_partial(const FieldConfig& c, int site) const override {
    double p = 0.0;
    for (std::size_t k = 0; k < sites_.size(); ++k) {
      if (wrap(sites_[k], c.size()) == site) p += weights_[k];
    }
    return p;
  }

  std::vector<int> support_sites(int) const override { return sites_; }
  std::string name() const override {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "smoothed(eps=%g,x=%g)", eps_, x_);
    return buf;
  }

 private:
  Profile phi_;
  double eps_, x_;
  std::vector<int> sites_;
  std::vector<double> weights_;
};

}  // namespace

ObservablePtr smoothed_field(Profile phi, double eps, double x) {
  return std::make_shared<SmoothedField>(std::move(phi), eps, x);
}

}  // namespace gl
