#pragma once

#include <cstdint>
#include <vector>

#include "gl/dynamics.hpp"
#include "gl/field.hpp"
#include "gl/potential.hpp"
#include "gl/stats.hpp"

namespace gl {

// Bond-valued walk position, tracked as the unwrapped displacement from
// the start bond so mean-square displacement and the no-wrap check are
// exact.
struct WalkState {
  int start_bond = 0;
  std::int64_t displacement = 0;
  double clock = 0.0;

  int bond(int n_sites) const {
    std::int64_t b = (start_bond + displacement) % n_sites;
    if (b < 0) b += n_sites;
    return static_cast<int>(b);
  }
};

struct JointState {
  FieldConfig field;
  WalkState walk;
};

// First-order thinning: at most one jump per substep, selected by a
// single uniform partitioned by the cumulative rate probabilities.
// Returns the bond offset (-2, -1, +1, +2) or 0 for no jump. Throws
// StepSizeError when the total jump probability reaches 1.
int thinning_decision(const JumpRates& rates, double dt, double u);

// One joint substep: the walk jumps with the current field's rates,
// then the field advances by one EM step with independent noise.
JointState walk_substep(const JointState& joint, const HamiltonianSpec& h,
                        double dt, std::uint64_t seed, std::uint64_t stream,
                        std::uint64_t step);

// ---------------------------------------------------------------------
// Replica ensemble of the joint process (eta(t), X(t)). One run serves
// the kernel, MSD and all correlation estimators, so both sides of the
// identity checks share their random numbers.

struct JointRunRequest {
  HamiltonianSpec h;
  int n_sites = 0;
  double rho = 0.0;
  double dt = 0.0;
  std::vector<double> t_grid;       // recording times; 0 is always added
  std::vector<int> site_offsets;    // sites whose eta(t) is recorded
  long replicas = 0;
  std::uint64_t seed = 0;
  int parallelism = 0;
  long burnin_sweeps = -1;          // MCMC equilibration (non-Gaussian)
  bool track_walk = true;
  bool store_initial = false;       // keep eta(0) for reuse across runs
};

struct JointRunRecords {
  std::vector<double> times;        // actual recorded times, times[0] = 0
  std::vector<int> offsets;
  long replicas = 0;
  int n_sites = 0;

  std::vector<double> vprime0;      // V1'(eta_0(0)) per replica
  std::vector<double> eta0;         // eta_0(0) per replica
  std::vector<double> eta_at;       // [r][time][offset]
  std::vector<std::int64_t> disp_at;  // [r][time] walk displacement
  std::vector<double> initial_eta;  // [r][site] when store_initial

  double eta_val(long r, std::size_t ti, std::size_t oi) const {
    return eta_at[(static_cast<std::size_t>(r) * times.size() + ti) * offsets.size() + oi];
  }
  std::int64_t disp(long r, std::size_t ti) const {
    return disp_at[static_cast<std::size_t>(r) * times.size() + ti];
  }
};

// reuse_initial: eta(0) from a previous run with store_initial (same
// replicas and n_sites); used for step-size halving comparisons.
JointRunRecords run_joint_ensemble(const JointRunRequest& req,
                                   const std::vector<double>* reuse_initial = nullptr);

// ---------------------------------------------------------------------

struct KernelEstimate {
  double t = 0.0;
  std::vector<int> offsets;       // displacement bins, symmetric around 0
  std::vector<double> prob;       // sums to 1 exactly
  std::vector<double> se;
  long replicas = 0;
};

// Annealed kernel <E_{(0,1)} 1{X(t) = (i,i+1)}> at each time of the grid.
std::vector<KernelEstimate> kernel_estimate(const HamiltonianSpec& h, int n_sites,
                                            double rho, std::vector<double> t_grid,
                                            long replicas, std::uint64_t seed,
                                            double dt, int parallelism = 0,
                                            long burnin_sweeps = -1);

struct MsdSeries {
  std::vector<double> t;
  std::vector<double> msd;
  std::vector<double> se;
  LineFit slope_fit;              // over the requested window
  long replicas = 0;
};

MsdSeries msd(const HamiltonianSpec& h, int n_sites, double rho,
              std::vector<double> t_grid, long replicas, std::uint64_t seed,
              double dt, double fit_t_min, double fit_t_max, int parallelism = 0,
              long burnin_sweeps = -1);

}  // namespace gl
