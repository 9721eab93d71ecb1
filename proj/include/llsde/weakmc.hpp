#pragma once

// Monte Carlo estimation of weak errors |E g(x(T)) - E g(y_N)| and
// empirical convergence-order fitting, plus the Euler-Maruyama baseline.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "llsde/grid.hpp"
#include "llsde/jumps.hpp"
#include "llsde/llcore.hpp"
#include "llsde/model.hpp"

namespace llsde {

// Reference statistics source for the weak error.
enum class ReferenceKind { Analytic, FineGrid };

struct McPlan {
  std::vector<double> steps;  // strictly decreasing h values
  long long samples = 1000;   // N trajectories per h
  std::uint64_t seed = 0;
  std::vector<TestFunctional> functionals;
  ReferenceKind reference = ReferenceKind::Analytic;
  // fine-grid reference parameters (ReferenceKind::FineGrid)
  double fine_step_divisor = 16.0;   // h_ref = min(steps) / divisor
  double fine_sample_factor = 4.0;   // N_ref = factor * N
  int threads = 1;
};

// Either an LL scheme or the Euler-Maruyama baseline.
struct McScheme {
  bool euler = false;
  SchemeConfig ll{};
  std::string name() const { return euler ? "euler" : variant_name(ll.variant); }
};

struct ErrorPoint {
  double h = 0.0;
  double error = 0.0;        // |mean_N g(y_N) - reference|
  double mc_stderr = 0.0;    // sample std / sqrt(N)
  long long n = 0;
  bool above_floor = false;  // |error| > 3 x (stderr incl. reference stderr)
};

struct SlopeFit {
  bool valid = false;
  double slope = 0.0;
  double intercept = 0.0;
  double half_width = 0.0;  // 2 x standard error of the slope
  std::string note;         // "insufficient points" / "at noise floor" / ""
};

struct WeakErrorReport {
  std::string scheme;
  std::vector<std::string> functional_labels;
  // points[functional][step index], steps in plan order
  std::vector<std::vector<ErrorPoint>> points;
  std::vector<SlopeFit> fits;          // one per functional
  std::vector<double> reference_values;  // E g(x(T)) used per functional
  std::vector<double> reference_stderr;  // uncertainty of the reference
};

// One trajectory of the scheme across the grid from y0; returns the
// terminal state.  Throws on a non-finite state with a diagnostic.
Vector simulate_terminal(const SchemeConfig& scheme, const SdeModel& model,
                         const TimeGrid& grid, const Vector& y0,
                         RngStream& rng);

// Jump-diffusion trajectory: samples the schedule from jump_rng, merges it
// into the base grid, and applies jump_step across the merged intervals.
Vector simulate_terminal_jump(const SchemeConfig& scheme, const SdeModel& model,
                              const JumpSpec& jumps, const TimeGrid& base,
                              const Vector& y0, RngStream& rng,
                              RngStream& jump_rng);

// Euler-Maruyama: y + f(t, y) h + G(t) sqrt(h) xi, xi ~ N(0, I_m).
Vector euler_step(const SdeModel& model, double t, const Vector& y, double h,
                  RngStream& rng);

// Ordinary least squares on (log h, log error) over the points above the
// noise floor.  Fewer than 3 usable points yields an invalid fit with an
// explanatory note.
SlopeFit fit_order(const std::vector<ErrorPoint>& points);

// Full study: for every h in the plan, run N independent trajectories
// (streams split per trajectory from the root seed; results independent of
// thread count by ordered reduction) and compare E g against the reference.
WeakErrorReport estimate_weak_error(const McPlan& plan, const McScheme& scheme,
                                    const Problem& problem);

}  // namespace llsde
