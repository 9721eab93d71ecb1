#pragma once

// Shared test-side oracles, independent of the library implementations:
// a Taylor-series matrix exponential with aggressive pre-scaling, composite
// Simpson quadrature for matrix-valued integrands, and a deterministic
// random matrix/vector source for reproducible property tests.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>

namespace testor {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// e^A by Taylor series on a pre-scaled matrix summed to machine
// precision, followed by repeated squaring.  Slow but independent of the
// Pade implementation.  Scaling is 2^-8 rather than a deeper 2^-20: each
// squaring amplifies rounding, and 20 levels would cost ~1e-10 of
// accuracy, defeating a 1e-12 comparison tolerance.
inline Matrix taylor_expm(const Matrix& A) {
  const int k = 8;
  const Matrix As = A / double(1 << k);
  const Eigen::Index n = A.rows();
  Matrix sum = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int j = 1; j <= 60; ++j) {
    term = term * As / double(j);
    sum += term;
    if (term.cwiseAbs().maxCoeff() < 1e-300) break;
  }
  for (int i = 0; i < k; ++i) sum = sum * sum;
  return sum;
}

// Composite Simpson rule with n (even) panels for a matrix-valued f.
inline Matrix simpson(const std::function<Matrix(double)>& f, double a,
                      double b, int n) {
  if (n % 2 != 0) ++n;
  const double h = (b - a) / n;
  Matrix acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) {
    acc += (i % 2 == 1 ? 4.0 : 2.0) * f(a + i * h);
  }
  return acc * (h / 3.0);
}

// Deterministic pseudo-random matrices/vectors for property tests.
class RandomSource {
 public:
  explicit RandomSource(unsigned seed) : eng_(seed) {}

  double uniform(double lo = -1.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(eng_);
  }

  Matrix matrix(int r, int c, double scale = 1.0) {
    Matrix M(r, c);
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < c; ++j) M(i, j) = scale * uniform();
    }
    return M;
  }

  Vector vector(int n, double scale = 1.0) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = scale * uniform();
  return v;
  }

  // random matrix rescaled to a target 1-norm
  Matrix matrix_with_norm(int n, double target_norm) {
    Matrix M = matrix(n, n);
    double norm = 0.0;
    for (int j = 0; j < n; ++j) norm = std::max(norm, M.col(j).cwiseAbs().sum());
    return M * (target_norm / norm);
  }

 private:
  std::mt19937 eng_;
};

}  // namespace testor
