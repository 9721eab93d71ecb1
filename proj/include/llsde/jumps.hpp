#pragma once

// Jump-diffusion extension: Poisson jump-time generation, merging jump
// times into the step grid, and the jump-adjusted LL step.

#include "llsde/grid.hpp"
#include "llsde/jump_spec.hpp"
#include "llsde/llcore.hpp"

namespace llsde {

// Per channel i, i.i.d. exponential(mu_i) inter-arrival gaps on (t0, T].
// Gaps below 1e-14 and cross-channel collisions are re-drawn, so no two
// channels ever share a jump time.
JumpSchedule sample_jump_times(const std::vector<double>& mu, double t0,
                               double T, RngStream& rng);

// Union of the base grid and all jump times, sorted and deduplicated
// within 1e-14 relative.  The max step never grows.
TimeGrid merged_grid(const TimeGrid& base, const JumpSchedule& sched);

// Diffusion step over [t_prev, t] followed by the jump displacements of
// every channel with a jump at t.  [t_prev, t] must contain no interior
// jump times (guaranteed by merged_grid).
Vector jump_step(const SchemeConfig& scheme, const SdeModel& model,
                 const JumpSpec& jumps, const JumpSchedule& sched,
                 double t_prev, double t, const Vector& z_prev, RngStream& rng);

}  // namespace llsde
