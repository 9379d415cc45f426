#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gl/field.hpp"
#include "gl/potential.hpp"
#include "gl/rng.hpp"

namespace gl {

// Throws ConfigurationError unless 0 < dt and dt * C_plus <= 0.1.
void validate_step_size(const HamiltonianSpec& h, double dt);

// Standard-normal increment per bond for one step, keyed by
// (seed, stream, step, bond): reproducible and thread-independent.
std::vector<double> sample_bond_noise(std::uint64_t seed, std::uint64_t stream,
                                      std::uint64_t step, int n_bonds);

// One Euler-Maruyama step of the conservative dynamics:
//   eta_i += (g_{(i,i+1)} - g_{(i-1,i)}) dt + sqrt(2 dt) (xi_i - xi_{i-1})
// with g the bond gradient of H. Drift and noise enter as bond
// differences, so sum(eta) is conserved to machine precision.
FieldConfig em_step(const FieldConfig& config, const HamiltonianSpec& h,
                    double dt, std::span<const double> noise);

// In-place workhorse used by all long runs. `bond_grad` is scratch of
// size N; served separately so callers can reuse allocations.
void em_step_inplace(FieldConfig& config, const HamiltonianSpec& h, double dt,
                     std::span<const double> noise,
                     std::vector<double>& bond_grad);

struct Trajectory {
  std::vector<double> times;
  std::vector<FieldConfig> snapshots;
};

// Integrates to horizon T recording snapshots at the requested times
// (rounded to the step grid; time 0 is always recorded).
Trajectory evolve(const FieldConfig& initial, const HamiltonianSpec& h, double T,
                  double dt, std::uint64_t seed, std::uint64_t stream,
                  std::vector<double> record_times = {});

// Two trajectories driven by the identical bond noise (same keys).
std::pair<Trajectory, Trajectory> coupled_evolve(const FieldConfig& a,
                                                 const FieldConfig& b,
                                                 const HamiltonianSpec& h,
                                                 double T, double dt,
                                                 std::uint64_t seed,
                                                 std::uint64_t stream,
                                                 std::vector<double> record_times = {});

// Map requested times to integrator steps (nearest step, deduplicated,
// always including step 0).
std::vector<std::int64_t> record_steps(std::span<const double> times, double dt,
                                       std::int64_t max_step);

}  // namespace gl
