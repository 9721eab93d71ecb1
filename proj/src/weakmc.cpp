#include "llsde/weakmc.hpp"

#include <cmath>
#include <exception>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace llsde {
namespace {

void check_finite_state(const Vector& y, double t, const char* what) {
  if (!y.allFinite()) {
    std::ostringstream os;
    os << what << ": non-finite state at t = " << t;
    throw std::runtime_error(os.str());
  }
}

// Runs body(k) for k in [0, n) on `threads` workers with a static block
// partition.  Exceptions are rethrown on the calling thread.
void parallel_for(long long n, int threads,
                  const std::function<void(long long)>& body) {
  threads = std::max(1, threads);
  if (threads == 1 || n < 2 * threads) {
    for (long long k = 0; k < n; ++k) body(k);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors{std::size_t(threads)};
  const long long block = (n + threads - 1) / threads;
  for (int w = 0; w < threads; ++w) {
    const long long k0 = w * block;
    const long long k1 = std::min(n, k0 + block);
    pool.emplace_back([&errors, &body, w, k0, k1]() {
      try {
        for (long long k = k0; k < k1; ++k) body(k);
      } catch (...) {
        errors[std::size_t(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct SampleStats {
  double mean = 0.0;
  double stderr_mean = 0.0;
};

// Deterministic ordered reduction: sums run in trajectory-index order, so
// the result cannot depend on the worker count.
SampleStats ordered_stats(const std::vector<double>& vals) {
  const double n = double(vals.size());
  double sum = 0.0;
  for (double v : vals) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : vals) ss += (v - mean) * (v - mean);
  const double var = vals.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

// One trajectory (LL or Euler, with or without jumps) using the documented
// stream layout: noise stream 2*index, jump-time stream 2*index + 1.
Vector run_trajectory(const McScheme& scheme, const Problem& problem,
                      const TimeGrid& grid, std::uint64_t seed,
                      std::uint64_t index) {
  RngStream rng(seed, 2 * index);
  const Vector y0 = problem.init.draw(rng);
  if (scheme.euler) {
    TimeGrid merged = grid;
    JumpSchedule sched;
    if (problem.jumps) {
      RngStream jump_rng(seed, 2 * index + 1);
      sched = sample_jump_times(problem.jumps->mu, grid.t0(), grid.T(),
                                jump_rng);
      merged = merged_grid(grid, sched);
    }
    Vector y = y0;
    for (std::size_t i = 1; i < merged.t.size(); ++i) {
      const double tp = merged.t[i - 1];
      const double tn = merged.t[i];
      y = euler_step(problem.model, tp, y, tn - tp, rng);
      if (problem.jumps) {
        for (int c = 0; c < problem.jumps->channels(); ++c) {
          for (double s : sched.times[std::size_t(c)]) {
            if (std::abs(s - tn) <= 1e-14 * std::max(std::abs(tn), 1.0)) {
              y += problem.jumps->coefficient(c, tn, y);
              break;
            }
          }
        }
      }
      check_finite_state(y, tn, "euler trajectory");
    }
    return y;
  }
  if (problem.jumps) {
    RngStream jump_rng(seed, 2 * index + 1);
    return simulate_terminal_jump(scheme.ll, problem.model, *problem.jumps,
                                  grid, y0, rng, jump_rng);
  }
  return simulate_terminal(scheme.ll, problem.model, grid, y0, rng);
}

void validate_plan(const McPlan& plan, const Problem& problem) {
  if (plan.samples < 100) {
    throw std::invalid_argument("McPlan: need at least 100 samples");
  }
  if (plan.steps.empty()) throw std::invalid_argument("McPlan: no step sizes");
  const double span = problem.model.T - problem.model.t0;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    if (!(plan.steps[i] > 0.0) || plan.steps[i] > span + 1e-12) {
      throw std::invalid_argument("McPlan: step sizes must lie in (0, T - t0]");
    }
    if (i > 0 && !(plan.steps[i] < plan.steps[i - 1])) {
      throw std::invalid_argument(
          "McPlan: step sizes must be strictly decreasing");
    }
  }
  if (plan.functionals.empty()) {
    throw std::invalid_argument("McPlan: no functionals");
  }
}

}  // namespace

Vector simulate_terminal(const SchemeConfig& scheme, const SdeModel& model,
                         const TimeGrid& grid, const Vector& y0,
                         RngStream& rng) {
  if (grid.t.size() < 2) {
    throw std::invalid_argument("simulate_terminal: grid needs >= 2 points");
  }
  Vector y = y0;
  for (std::size_t i = 1; i < grid.t.size(); ++i) {
    y = step(scheme, model, grid.t[i - 1], y, grid.t[i] - grid.t[i - 1], rng);
    check_finite_state(y, grid.t[i], "trajectory");
  }
  return y;
}

Vector simulate_terminal_jump(const SchemeConfig& scheme, const SdeModel& model,
                              const JumpSpec& jumps, const TimeGrid& base,
                              const Vector& y0, RngStream& rng,
                              RngStream& jump_rng) {
  JumpSchedule sched =
      sample_jump_times(jumps.mu, base.t0(), base.T(), jump_rng);
  TimeGrid grid = merged_grid(base, sched);
  Vector y = y0;
  for (std::size_t i = 1; i < grid.t.size(); ++i) {
    y = jump_step(scheme, model, jumps, sched, grid.t[i - 1], grid.t[i], y,
                  rng);
    check_finite_state(y, grid.t[i], "jump trajectory");
  }
  return y;
}

Vector euler_step(const SdeModel& model, double t, const Vector& y, double h,
                  RngStream& rng) {
  if (!(h > 0.0)) throw std::invalid_argument("euler_step: need h > 0");
  Vector xi(model.m);
  for (int j = 0; j < model.m; ++j) xi[j] = rng.normal();
  return y + model.f(t, y) * h + model.G(t) * (std::sqrt(h) * xi);
}

SlopeFit fit_order(const std::vector<ErrorPoint>& points) {
  std::vector<double> x, z;
  for (const auto& p : points) {
    if (p.above_floor && p.error > 0.0) {
      x.push_back(std::log(p.h));
      z.push_back(std::log(p.error));
    }
  }
  SlopeFit fit;
  if (x.size() < 3) {
    fit.note = points.empty() ? "insufficient points"
               : x.empty()    ? "at noise floor"
                              : "insufficient points";
    return fit;
  }
  const double n = double(x.size());
  double mx = 0.0, mz = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    mz += z[i];
  }
  mx /= n;
  mz /= n;
  double sxx = 0.0, sxz = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxz += (x[i] - mx) * (z[i] - mz);
  }
  fit.valid = true;
  fit.slope = sxz / sxx;
  fit.intercept = mz - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = z[i] - (fit.intercept + fit.slope * x[i]);
    ssr += r * r;
  }
  const double dof = n - 2.0;
  fit.half_width = dof > 0.0 ? 2.0 * std::sqrt(ssr / dof / sxx) : 0.0;
  return fit;
}

WeakErrorReport estimate_weak_error(const McPlan& plan, const McScheme& scheme,
                                    const Problem& problem) {
  validate_plan(plan, problem);
  if (!scheme.euler) check_scheme(scheme.ll, problem.model);

  const std::size_t nf = plan.functionals.size();
  WeakErrorReport report;
  report.scheme = scheme.name();
  report.functional_labels.resize(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    report.functional_labels[f] = plan.functionals[f].label;
  }
  report.points.assign(nf, {});
  report.reference_values.assign(nf, 0.0);
  report.reference_stderr.assign(nf, 0.0);

  const double t0 = problem.model.t0;
  const double T = problem.model.T;
  const long long N = plan.samples;

  // Reference E g(x(T)) per functional.
  if (plan.reference == ReferenceKind::Analytic) {
    for (std::size_t f = 0; f < nf; ++f) {
      report.reference_values[f] =
          problem.ref.functional_value(plan.functionals[f].label);
      report.reference_stderr[f] = problem.ref.abs_accuracy;
    }
  } else {
    // Fine-grid self-reference: order-2 LL at h_ref = min(h)/divisor with
    // N_ref = factor * N; reference bias is then O(h_ref^2).
    McScheme fine;
    fine.ll.variant = SchemeVariant::PadeGeneral;
    fine.ll.beta = 2;
    fine.ll.noise = NoiseKind::Gaussian;
    const double h_ref = plan.steps.back() / plan.fine_step_divisor;
    const long long n_ref = (long long)std::llround(plan.fine_sample_factor * double(N));
    const TimeGrid grid = uniform_grid(t0, T, h_ref);
    // Reference streams start after the streams of every plan step size.
    const std::uint64_t base = std::uint64_t(plan.steps.size()) * std::uint64_t(N);
    std::vector<std::vector<double>> vals(nf,
                                          std::vector<double>(std::size_t(n_ref)));
    parallel_for(n_ref, plan.threads, [&](long long k) {
      const Vector y =
          run_trajectory(fine, problem, grid, plan.seed, base + std::uint64_t(k));
      for (std::size_t f = 0; f < nf; ++f) {
        vals[f][std::size_t(k)] = plan.functionals[f].g(y);
      }
    });
    for (std::size_t f = 0; f < nf; ++f) {
      const SampleStats s = ordered_stats(vals[f]);
      report.reference_values[f] = s.mean;
      report.reference_stderr[f] = s.stderr_mean;
    }
  }

  for (std::size_t hi = 0; hi < plan.steps.size(); ++hi) {
    const TimeGrid grid = uniform_grid(t0, T, plan.steps[hi]);
    const std::uint64_t base = std::uint64_t(hi) * std::uint64_t(N);
    std::vector<std::vector<double>> vals(nf, std::vector<double>(std::size_t(N)));
    parallel_for(N, plan.threads, [&](long long k) {
      const Vector y =
          run_trajectory(scheme, problem, grid, plan.seed, base + std::uint64_t(k));
      for (std::size_t f = 0; f < nf; ++f) {
        vals[f][std::size_t(k)] = plan.functionals[f].g(y);
      }
    });
    for (std::size_t f = 0; f < nf; ++f) {
      const SampleStats s = ordered_stats(vals[f]);
      ErrorPoint p;
      p.h = plan.steps[hi];
      p.error = std::abs(s.mean - report.reference_values[f]);
      p.mc_stderr = s.stderr_mean;
      p.n = N;
      const double floor = 3.0 * std::sqrt(s.stderr_mean * s.stderr_mean +
                                           report.reference_stderr[f] *
                                               report.reference_stderr[f]);
      p.above_floor = p.error > floor;
      report.points[f].push_back(p);
    }
  }

  report.fits.resize(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    report.fits[f] = fit_order(report.points[f]);
  }
  return report;
}

}  // namespace llsde
