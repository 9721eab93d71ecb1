#pragma once

// Problem definitions: drift/diffusion callbacks with their derivatives,
// plus the built-in catalog of test problems with known weak statistics.

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "llsde/jump_spec.hpp"
#include "llsde/linalg.hpp"
#include "llsde/rng.hpp"

namespace llsde {

// Additive-noise SDE  dx = f(t, x) dt + G(t) dw.
//
// All callbacks must be pure: the harness invokes them concurrently.
struct SdeModel {
  int d = 1;  // state dimension
  int m = 1;  // noise dimension
  double t0 = 0.0;
  double T = 1.0;

  bool autonomous = false;  // f does not depend on t
  bool constant_g = false;  // G does not depend on t

  std::function<Vector(double, const Vector&)> f;
  std::function<Matrix(double, const Vector&)> f_x;  // d x d Jacobian
  std::function<Vector(double, const Vector&)> f_t;  // time partial
  // hess_quad(t, x, g) = (I_{d x d} (x) g^T) f_xx(t, x) g, i.e. component k
  // equals g^T (d^2 f_k / dx^2) g.  Avoids a rank-3 tensor type.
  std::function<Vector(double, const Vector&, const Vector&)> hess_quad;
  std::function<Matrix(double)> G;            // d x m diffusion columns
  std::function<Matrix(double, int)> dG;      // d^i G / dt^i, dG(t, 0) = G(t)
};

struct InitialLaw {
  Vector point;  // deterministic start, used when sampler is empty
  std::function<Vector(RngStream&)> sampler;

  Vector draw(RngStream& rng) const { return sampler ? sampler(rng) : point; }
};

struct TestFunctional {
  std::function<double(const Vector&)> g;
  std::string label;
};

// Reference weak statistics of the terminal state x(T).
struct ReferenceStats {
  Vector mean;            // E[x(T)]
  Matrix second_moment;   // E[x(T) x(T)^T]
  double abs_accuracy = 0.0;  // numerical accuracy of stored values (0 = exact)
  std::string method;

  Matrix covariance() const {
    return second_moment - mean * mean.transpose();
  }
  // Reference E g for the standard functional labels "x" and "x2"
  // (first component and its square).
  double functional_value(const std::string& label) const;
};

struct Problem {
  std::string name;
  SdeModel model;
  InitialLaw init;
  ReferenceStats ref;
  std::optional<JumpSpec> jumps;
};

// Catalog: ou-1d, ou-nd, pendulum-sin, time-dep-g, jump-ou.
Problem builtin_problem(const std::string& name);
std::vector<std::string> catalog_names();

// Parameterized constructors behind the catalog entries.
Problem make_ou_1d(double a, double sigma, double x0, double T);
Problem make_ou_nd(int d, double sigma, double T);  // symmetric tridiagonal drift
Problem make_pendulum_sin(double lambda, double amp, double sigma, double x0,
                          double T);
Problem make_time_dep_g(double a, double g0, double g1, double x0, double T);
Problem make_jump_ou(double a, double sigma, double x0, double T, double c,
                     double mu);

// Standard functionals g(x) = x_0 and g(x) = x_0^2.
TestFunctional functional_x();
TestFunctional functional_x2();

// Finite-difference check of f_x, f_t, hess_quad and dG(., 1) at the probe
// points.  Returns a list of violations (empty when everything matches).
std::vector<std::string> validate_model(
    const SdeModel& model, const std::vector<std::pair<double, Vector>>& probes,
    double fd_tol);

}  // namespace llsde
