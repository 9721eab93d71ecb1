#include "llsde/jumps.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace llsde {
namespace {

bool times_equal(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1.0});
  return std::abs(a - b) <= 1e-14 * scale;
}

}  // namespace

JumpSchedule sample_jump_times(const std::vector<double>& mu, double t0,
                               double T, RngStream& rng) {
  if (!(T > t0)) throw std::invalid_argument("sample_jump_times: need T > t0");
  for (double m : mu) {
    if (m < 0.0) {
      throw std::invalid_argument("sample_jump_times: negative intensity");
    }
  }
  JumpSchedule sched;
  sched.times.resize(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] == 0.0) continue;
    double t = t0;
    for (;;) {
      double gap = rng.exponential(mu[i]);
      while (gap < 1e-14) gap = rng.exponential(mu[i]);
      t += gap;
      if (t > T) break;
      // simultaneity across channels has probability zero; re-draw the
      // arrival on the (numerical) collision
      bool collision = false;
      for (std::size_t j = 0; j < i && !collision; ++j) {
        for (double s : sched.times[j]) {
          if (times_equal(s, t)) {
            collision = true;
            break;
          }
        }
      }
      if (collision) {
        t -= gap;
        continue;
      }
      sched.times[i].push_back(t);
    }
  }
  return sched;
}

TimeGrid merged_grid(const TimeGrid& base, const JumpSchedule& sched) {
  std::vector<double> all = base.t;
  for (const auto& channel : sched.times) {
    all.insert(all.end(), channel.begin(), channel.end());
  }
  std::sort(all.begin(), all.end());
  TimeGrid out;
  out.t.reserve(all.size());
  for (double t : all) {
    if (out.t.empty() || !times_equal(out.t.back(), t)) {
      out.t.push_back(t);
    }
  }
  return out;
}

Vector jump_step(const SchemeConfig& scheme, const SdeModel& model,
                 const JumpSpec& jumps, const JumpSchedule& sched,
                 double t_prev, double t, const Vector& z_prev,
                 RngStream& rng) {
  Vector z = step(scheme, model, t_prev, z_prev, t - t_prev, rng);
  for (int i = 0; i < jumps.channels(); ++i) {
    for (double s : sched.times[std::size_t(i)]) {
      if (times_equal(s, t)) {
        z += jumps.coefficient(i, t, z);
        break;  // at most one jump per channel per merged-grid point
      }
    }
  }
  return z;
}

}  // namespace llsde
