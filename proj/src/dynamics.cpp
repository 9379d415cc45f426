#include "gl/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace gl {

void validate_step_size(const HamiltonianSpec& h, double dt) {
  if (!(dt > 0.0)) throw ConfigurationError("dt must be positive");
  if (dt * h.c_plus() > 0.1 + 1e-12) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "dt * C_plus = %.3g exceeds 0.1",
                  dt * h.c_plus());
    throw ConfigurationError(buf);
  }
}

std::vector<double> sample_bond_noise(std::uint64_t seed, std::uint64_t stream,
                                      std::uint64_t step, int n_bonds) {
  std::vector<double> xi(n_bonds);
  const std::uint64_t base = step * static_cast<std::uint64_t>(n_bonds);
  for (int b = 0; b < n_bonds; ++b) {
    xi[b] = keyed_normal(seed, stream, base + b, RngTag::field_noise);
  }
  return xi;
}

void em_step_inplace(FieldConfig& config, const HamiltonianSpec& h, double dt,
                     std::span<const double> noise,
                     std::vector<double>& bond_grad) {
  const int n = config.size();
  bond_grad.resize(n);
  auto& eta = config.eta;

  if (h.v2) {
    for (int i = 0; i < n; ++i) {
      const int im1 = (i + n - 1) % n;
      const int ip1 = (i + 1) % n;
      const int ip2 = (i + 2) % n;
      bond_grad[i] = h.v1.d1(eta[ip1]) - h.v1.d1(eta[i]) +
                     h.v2->d1(eta[ip1] + eta[ip2]) - h.v2->d1(eta[im1] + eta[i]);
    }
  } else if (h.v1.is_gaussian()) {
    for (int i = 0; i < n; ++i) bond_grad[i] = eta[(i + 1) % n] - eta[i];
  } else {
    // One V1' per site, reused by the two bonds touching it.
    double prev = h.v1.d1(eta[0]);
    const double first = prev;
    for (int i = 0; i + 1 < n; ++i) {
      const double next = h.v1.d1(eta[i + 1]);
      bond_grad[i] = next - prev;
      prev = next;
    }
    bond_grad[n - 1] = first - prev;
  }

  const double amp = std::sqrt(2.0 * dt);
  for (int i = 0; i < n; ++i) {
    const int im1 = (i + n - 1) % n;
    eta[i] += (bond_grad[i] - bond_grad[im1]) * dt + amp * (noise[i] - noise[im1]);
  }
}

FieldConfig em_step(const FieldConfig& config, const HamiltonianSpec& h,
                    double dt, std::span<const double> noise) {
  validate_step_size(h, dt);
  FieldConfig out = config;
  std::vector<double> scratch;
  em_step_inplace(out, h, dt, noise, scratch);
  return out;
}

std::vector<std::int64_t> record_steps(std::span<const double> times, double dt,
                                       std::int64_t max_step) {
  std::vector<std::int64_t> steps;
  steps.push_back(0);
  for (double t : times) {
    if (t < 0.0) throw ConfigurationError("record time must be >= 0");
    const auto s = static_cast<std::int64_t>(std::llround(t / dt));
    steps.push_back(std::clamp<std::int64_t>(s, 0, max_step));
  }
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  return steps;
}

Trajectory evolve(const FieldConfig& initial, const HamiltonianSpec& h, double T,
                  double dt, std::uint64_t seed, std::uint64_t stream,
                  std::vector<double> record_times) {
  if (T < 0.0) throw ConfigurationError("horizon must be >= 0");
  validate_step_size(h, dt);
  const auto max_step = static_cast<std::int64_t>(std::llround(T / dt));
  if (record_times.empty()) record_times.push_back(T);
  const auto steps = record_steps(record_times, dt, max_step);

  Trajectory traj;
  FieldConfig config = initial;
  std::vector<double> scratch;
  std::size_t next_record = 0;
  for (std::int64_t s = 0; s <= max_step; ++s) {
    if (next_record < steps.size() && steps[next_record] == s) {
      traj.times.push_back(s * dt);
      traj.snapshots.push_back(config);
      ++next_record;
    }
    if (s == max_step) break;
    const auto noise = sample_bond_noise(seed, stream, s, config.size());
    em_step_inplace(config, h, dt, noise, scratch);
  }
  return traj;
}

std::pair<Trajectory, Trajectory> coupled_evolve(const FieldConfig& a,
                                                 const FieldConfig& b,
                                                 const HamiltonianSpec& h,
                                                 double T, double dt,
                                                 std::uint64_t seed,
                                                 std::uint64_t stream,
                                                 std::vector<double> record_times) {
  if (a.size() != b.size()) {
    throw ConfigurationError("coupled trajectories need one lattice size");
  }
  validate_step_size(h, dt);
  const auto max_step = static_cast<std::int64_t>(std::llround(T / dt));
  if (record_times.empty()) record_times.push_back(T);
  const auto steps = record_steps(record_times, dt, max_step);

  Trajectory ta, tb;
  FieldConfig ca = a, cb = b;
  std::vector<double> scratch;
  std::size_t next_record = 0;
  for (std::int64_t s = 0; s <= max_step; ++s) {
    if (next_record < steps.size() && steps[next_record] == s) {
      ta.times.push_back(s * dt);
      ta.snapshots.push_back(ca);
      tb.times.push_back(s * dt);
      tb.snapshots.push_back(cb);
      ++next_record;
    }
    if (s == max_step) break;
    const auto noise = sample_bond_noise(seed, stream, s, ca.size());
    em_step_inplace(ca, h, dt, noise, scratch);
    em_step_inplace(cb, h, dt, noise, scratch);
  }
  return {std::move(ta), std::move(tb)};
}

}  // namespace gl
