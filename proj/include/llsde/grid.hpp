#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace llsde {

// Strictly increasing discretization times t_0 < ... < t_N = T.
struct TimeGrid {
  std::vector<double> t;

  double t0() const { return t.front(); }
  double T() const { return t.back(); }
  std::size_t intervals() const { return t.size() - 1; }

  double max_step() const {
    double h = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) h = std::max(h, t[i] - t[i - 1]);
    return h;
  }
};

// Uniform grid over [t0, T] with N = ceil((T - t0) / h) intervals.
inline TimeGrid uniform_grid(double t0, double T, double h) {
  if (!(T > t0)) throw std::invalid_argument("uniform_grid: need T > t0");
  if (!(h > 0.0)) throw std::invalid_argument("uniform_grid: need h > 0");
  const std::size_t n =
      std::max<std::size_t>(1, std::size_t(std::ceil((T - t0) / h - 1e-12)));
  TimeGrid g;
  g.t.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    g.t[i] = t0 + (T - t0) * double(i) / double(n);
  }
  g.t.back() = T;
  return g;
}

}  // namespace llsde
