#include "gl/walk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gl/parallel.hpp"
#include "gl/sampler.hpp"

namespace gl {

int thinning_decision(const JumpRates& rates, double dt, double u) {
  const double p_m2 = rates.minus2 * dt;
  const double p_m1 = rates.minus1 * dt;
  const double p_p1 = rates.plus1 * dt;
  const double p_p2 = rates.plus2 * dt;
  const double total = p_m2 + p_m1 + p_p1 + p_p2;
  if (total >= 1.0) {
    throw StepSizeError("jump probability mass reached 1 within one substep");
  }
  double edge = p_m2;
  if (u < edge) return -2;
  edge += p_m1;
  if (u < edge) return -1;
  edge += p_p1;
  if (u < edge) return +1;
  edge += p_p2;
  if (u < edge) return +2;
  return 0;
}

namespace {

void check_walk_step_size(const HamiltonianSpec& h, double dt) {
  if (dt * h.rate_sum_bound() > 0.1 + 1e-12) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "dt * rate bound = %.3g exceeds 0.1",
                  dt * h.rate_sum_bound());
    throw StepSizeError(buf);
  }
}

}  // namespace

JointState walk_substep(const JointState& joint, const HamiltonianSpec& h,
                        double dt, std::uint64_t seed, std::uint64_t stream,
                        std::uint64_t step) {
  validate_step_size(h, dt);
  check_walk_step_size(h, dt);
  JointState out = joint;
  const int n = joint.field.size();
  const Bond b{out.walk.bond(n), 0};
  const JumpRates rates = jump_rates(h, joint.field, b);
  const double u = keyed_u01(seed, stream, step, RngTag::walk_jump);
  out.walk.displacement += thinning_decision(rates, dt, u);
  out.walk.clock += dt;

  const auto noise = sample_bond_noise(seed, stream, step, n);
  std::vector<double> scratch;
  em_step_inplace(out.field, h, dt, noise, scratch);
  return out;
}

JointRunRecords run_joint_ensemble(const JointRunRequest& req,
                                   const std::vector<double>* reuse_initial) {
  validate_step_size(req.h, req.dt);
  if (req.track_walk) check_walk_step_size(req.h, req.dt);
  if (req.replicas < 1) throw ConfigurationError("need replicas >= 1");
  if (req.n_sites < 3) throw InvalidGeometryError("need N >= 3");
  if (reuse_initial &&
      reuse_initial->size() !=
          static_cast<std::size_t>(req.replicas) * req.n_sites) {
    throw ConfigurationError("reuse_initial has wrong shape");
  }

  double t_max = 0.0;
  for (double t : req.t_grid) t_max = std::max(t_max, t);
  const auto max_step = static_cast<std::int64_t>(std::llround(t_max / req.dt));
  const auto steps = record_steps(req.t_grid, req.dt, max_step);

  JointRunRecords rec;
  rec.replicas = req.replicas;
  rec.n_sites = req.n_sites;
  rec.offsets = req.site_offsets;
  for (auto s : steps) rec.times.push_back(static_cast<double>(s) * req.dt);
  const std::size_t n_times = steps.size();
  const std::size_t n_off = req.site_offsets.size();
  rec.vprime0.resize(req.replicas);
  rec.eta0.resize(req.replicas);
  rec.eta_at.resize(static_cast<std::size_t>(req.replicas) * n_times * n_off);
  rec.disp_at.assign(static_cast<std::size_t>(req.replicas) * n_times, 0);
  if (req.store_initial) {
    rec.initial_eta.resize(static_cast<std::size_t>(req.replicas) * req.n_sites);
  }

  const int n = req.n_sites;
  const std::int64_t wrap_limit = n / 4;

  parallel_for(req.replicas, req.parallelism, [&](long r) {
    FieldConfig config;
    if (reuse_initial) {
      config.rho = req.rho;
      config.eta.assign(reuse_initial->begin() + static_cast<std::ptrdiff_t>(r) * n,
                        reuse_initial->begin() + static_cast<std::ptrdiff_t>(r + 1) * n);
    } else {
      RngStream rng(req.seed, static_cast<std::uint64_t>(r));
      config = equilibrium_draw(req.h, n, req.rho, rng, req.burnin_sweeps);
    }
    if (req.store_initial) {
      std::copy(config.eta.begin(), config.eta.end(),
                rec.initial_eta.begin() + static_cast<std::ptrdiff_t>(r) * n);
    }
    rec.vprime0[r] = req.h.v1.d1(config.eta[0]);
    rec.eta0[r] = config.eta[0];

    WalkState walk;  // start bond (0, 1)
    std::vector<double> noise(n), scratch(n);
    std::size_t next_record = 0;
    for (std::int64_t s = 0;; ++s) {
      if (next_record < steps.size() && steps[next_record] == s) {
        const std::size_t base = (static_cast<std::size_t>(r) * n_times + next_record) * n_off;
        for (std::size_t oi = 0; oi < n_off; ++oi) {
          int site = req.site_offsets[oi] % n;
          if (site < 0) site += n;
          rec.eta_at[base + oi] = config.eta[site];
        }
        rec.disp_at[static_cast<std::size_t>(r) * n_times + next_record] =
            walk.displacement;
        ++next_record;
        if (next_record == steps.size()) break;
      }

      if (req.track_walk) {
        const Bond b{walk.bond(n), 0};
        const JumpRates rates = jump_rates(req.h, config, b);
        const double u = keyed_u01(req.seed, static_cast<std::uint64_t>(r),
                                   static_cast<std::uint64_t>(s), RngTag::walk_jump);
        walk.displacement += thinning_decision(rates, req.dt, u);
        walk.clock += req.dt;
        if (std::abs(walk.displacement) > wrap_limit) {
          char buf[96];
          std::snprintf(buf, sizeof(buf),
                        "walk displacement %lld beyond N/4 = %lld: horizon too long",
                        static_cast<long long>(walk.displacement),
                        static_cast<long long>(wrap_limit));
          throw HorizonError(buf);
        }
      }

      const std::uint64_t base_ctr =
          static_cast<std::uint64_t>(s) * static_cast<std::uint64_t>(n);
      for (int bnd = 0; bnd < n; ++bnd) {
        noise[bnd] = keyed_normal(req.seed, static_cast<std::uint64_t>(r),
                                  base_ctr + bnd, RngTag::field_noise);
      }
      em_step_inplace(config, req.h, req.dt, noise, scratch);
    }
  });

  return rec;
}

std::vector<KernelEstimate> kernel_estimate(const HamiltonianSpec& h, int n_sites,
                                            double rho, std::vector<double> t_grid,
                                            long replicas, std::uint64_t seed,
                                            double dt, int parallelism,
                                            long burnin_sweeps) {
  JointRunRequest req;
  req.h = h;
  req.n_sites = n_sites;
  req.rho = rho;
  req.dt = dt;
  req.t_grid = std::move(t_grid);
  req.replicas = replicas;
  req.seed = seed;
  req.parallelism = parallelism;
  req.burnin_sweeps = burnin_sweeps;
  const JointRunRecords rec = run_joint_ensemble(req);

  const int lim = n_sites / 4;
  std::vector<KernelEstimate> out;
  for (std::size_t ti = 0; ti < rec.times.size(); ++ti) {
    KernelEstimate k;
    k.t = rec.times[ti];
    k.replicas = replicas;
    std::vector<long> counts(2 * lim + 1, 0);
    for (long r = 0; r < replicas; ++r) {
      counts[static_cast<std::size_t>(rec.disp(r, ti) + lim)] += 1;
    }
    for (int off = -lim; off <= lim; ++off) {
      const double p =
          static_cast<double>(counts[static_cast<std::size_t>(off + lim)]) /
          static_cast<double>(replicas);
      k.offsets.push_back(off);
      k.prob.push_back(p);
      k.se.push_back(std::sqrt(std::max(p * (1.0 - p), 0.0) /
                               static_cast<double>(replicas - 1)));
    }
    out.push_back(std::move(k));
  }
  return out;
}

MsdSeries msd(const HamiltonianSpec& h, int n_sites, double rho,
              std::vector<double> t_grid, long replicas, std::uint64_t seed,
              double dt, double fit_t_min, double fit_t_max, int parallelism,
              long burnin_sweeps) {
  JointRunRequest req;
  req.h = h;
  req.n_sites = n_sites;
  req.rho = rho;
  req.dt = dt;
  req.t_grid = std::move(t_grid);
  req.replicas = replicas;
  req.seed = seed;
  req.parallelism = parallelism;
  req.burnin_sweeps = burnin_sweeps;
  const JointRunRecords rec = run_joint_ensemble(req);

  MsdSeries out;
  out.replicas = replicas;
  std::vector<double> sq(replicas);
  for (std::size_t ti = 0; ti < rec.times.size(); ++ti) {
    for (long r = 0; r < replicas; ++r) {
      const double d = static_cast<double>(rec.disp(r, ti));
      sq[r] = d * d;
    }
    const MeanSe m = mean_se(sq);
    out.t.push_back(rec.times[ti]);
    out.msd.push_back(m.mean);
    out.se.push_back(m.se);
  }

  std::vector<double> fx, fy, fw;
  for (std::size_t ti = 0; ti < out.t.size(); ++ti) {
    if (out.t[ti] < fit_t_min - 1e-12 || out.t[ti] > fit_t_max + 1e-12) continue;
    if (out.se[ti] <= 0.0) continue;
    fx.push_back(out.t[ti]);
    fy.push_back(out.msd[ti]);
    fw.push_back(1.0 / (out.se[ti] * out.se[ti]));
  }
  if (fx.size() >= 3) {
    out.slope_fit = weighted_least_squares(fx, fy, fw);
  }
  return out;
}

}  // namespace gl
