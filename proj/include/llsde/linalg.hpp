#pragma once

// Dense small-matrix kernels used by the LL integrators: Pade matrix
// exponential with scaling-and-squaring, Krylov action of the exponential
// on a vector, symmetric PSD square root, and the Lyapunov-type pencil
// solver.  All functions are pure and thread-safe.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace llsde {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Stack-allocated variant for the integrator hot path (augmented matrices
// stay small for low-dimensional problems).
constexpr int kSmallDim = 16;
using SmallMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kSmallDim, kSmallDim>;
using SmallVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kSmallDim, 1>;

struct LinalgError : std::runtime_error {
  explicit LinalgError(const std::string& what) : std::runtime_error(what) {}
};

struct PadeConfig {
  int p = 6;
  int q = 6;
  // The scaled matrix must satisfy ||2^-k A||_1 <= scaling_threshold.
  // The 1-norm is used as a cheap upper-bound proxy for the spectral norm.
  double scaling_threshold = 0.5;
};

struct KrylovConfig {
  int m = 12;                   // Krylov subspace dimension, clipped to dim(A)
  PadeConfig pade{};
  double breakdown_tol = 1e-12; // relative to ||v||
};

namespace detail {

template <class Mat>
double one_norm(const Mat& A) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < A.cols(); ++j) {
    best = std::max(best, A.col(j).cwiseAbs().sum());
  }
  return best;
}

template <class Mat>
void require_square_finite(const Mat& A, const char* who) {
  if (A.rows() != A.cols()) {
    throw LinalgError(std::string(who) + ": matrix must be square");
  }
  if (!A.allFinite()) {
    throw LinalgError(std::string(who) + ": non-finite entries");
  }
}

}  // namespace detail

// (P_{p,q}(2^-k A))^{2^k} with k the smallest non-negative integer such
// that ||2^-k A||_1 <= cfg.scaling_threshold.
template <class Mat>
Mat pade_expm_t(const Mat& A, const PadeConfig& cfg = {}) {
  detail::require_square_finite(A, "pade_expm");
  if (cfg.p < 0 || cfg.q < 0 || cfg.p + cfg.q < 1) {
    throw LinalgError("pade_expm: need p, q >= 0 with p + q >= 1");
  }
  if (!(cfg.scaling_threshold > 0.0)) {
    throw LinalgError("pade_expm: scaling_threshold must be positive");
  }
  const Eigen::Index n = A.rows();

  const double norm = detail::one_norm(A);
  int k = 0;
  double scale = 1.0;
  while (norm * scale > cfg.scaling_threshold) {
    ++k;
    scale *= 0.5;
  }
  const Mat As = A * scale;

  // Numerator N = sum c_j As^j, denominator D = sum d_j (-As)^j with the
  // classical (p,q) Pade coefficients.
  Mat N = Mat::Identity(n, n);
  Mat D = Mat::Identity(n, n);
  Mat term = Mat::Identity(n, n);
  double cj = 1.0;
  double dj = 1.0;
  const int top = std::max(cfg.p, cfg.q);
  for (int j = 1; j <= top; ++j) {
    term = term * As;
    if (j <= cfg.p) {
      cj *= double(cfg.p - j + 1) / (double(cfg.p + cfg.q - j + 1) * j);
      N += cj * term;
    }
    if (j <= cfg.q) {
      dj *= double(cfg.q - j + 1) / (double(cfg.p + cfg.q - j + 1) * j);
      if (j % 2 == 0) {
        D += dj * term;
      } else {
        D -= dj * term;
      }
    }
  }

  Eigen::PartialPivLU<Mat> lu(D);
  const auto& LU = lu.matrixLU();
  double min_piv = std::abs(LU(0, 0));
  double max_piv = min_piv;
  for (Eigen::Index i = 1; i < n; ++i) {
    const double piv = std::abs(LU(i, i));
    min_piv = std::min(min_piv, piv);
    max_piv = std::max(max_piv, piv);
  }
  if (!(min_piv > 1e-14 * std::max(1.0, max_piv))) {
    throw LinalgError("pade_expm: Pade denominator is singular (p, q too low "
                      "for the scaled norm)");
  }
  Mat F = lu.solve(N);
  for (int i = 0; i < k; ++i) {
    F = F * F;
  }
  return F;
}

inline Matrix pade_expm(const Matrix& A, const PadeConfig& cfg = {}) {
  return pade_expm_t(A, cfg);
}

// Arnoldi approximation of e^A v; exact when the process breaks down or
// when m >= dim(A).  v = 0 returns the zero vector.
Vector krylov_expmv(const Matrix& A, const Vector& v, const KrylovConfig& cfg);

// Symmetric square root of a (numerically) PSD matrix via symmetric
// eigendecomposition; eigenvalues in [-clamp_tol, 0) are clamped to zero
// with clamp_tol = 1e-10 ||S||_1.
template <class Mat>
Mat psd_sqrt_t(const Mat& S) {
  detail::require_square_finite(S, "psd_sqrt");
  const double norm = std::max(detail::one_norm(S), 1e-300);
  const double sym_tol = 1e-10 * norm;
  if (detail::one_norm(Mat(S - S.transpose())) > 2.0 * sym_tol) {
    throw LinalgError("psd_sqrt: input is not symmetric within tolerance");
  }
  const Mat Ssym = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig(Ssym);
  if (eig.info() != Eigen::Success) {
    throw LinalgError("psd_sqrt: eigendecomposition failed");
  }
  const double clamp_tol = 1e-10 * norm;
  auto lam = eig.eigenvalues();
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam[i] < -clamp_tol) {
      throw LinalgError("psd_sqrt: matrix is not positive semidefinite "
                        "(eigenvalue " + std::to_string(lam[i]) + ")");
    }
    lam[i] = std::sqrt(std::max(lam[i], 0.0));
  }
  Mat R = eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
  R = 0.5 * (R + Mat(R.transpose()));  // exact symmetry
  return R;
}

inline Matrix psd_sqrt(const Matrix& S) { return psd_sqrt_t(S); }

// Solves A Sigma + Sigma A^T = Q by Kronecker vectorization and a dense
// solve; intended for small d (the pencil route is only used by the
// autonomous schemes, d <= 30).
Matrix solve_pencil(const Matrix& A, const Matrix& Q);

// Power-iteration estimate of ||A||_2 (used for the Krylov advisory check).
double spectral_norm_estimate(const Matrix& A, int iters = 30);

}  // namespace llsde
