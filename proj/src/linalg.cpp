#include "llsde/linalg.hpp"

namespace llsde {

Vector krylov_expmv(const Matrix& A, const Vector& v, const KrylovConfig& cfg) {
  detail::require_square_finite(A, "krylov_expmv");
  const Eigen::Index n = A.rows();
  if (v.size() != n) {
    throw LinalgError("krylov_expmv: dimension mismatch between A and v");
  }
  const double beta0 = v.norm();
  if (beta0 == 0.0) {
    return Vector::Zero(n);
  }
  const int m = int(std::min<Eigen::Index>(std::max(cfg.m, 1), n));

  Matrix V(n, m);
  Matrix H = Matrix::Zero(m, m);
  V.col(0) = v / beta0;
  int dim = m;
  for (int j = 0; j < m; ++j) {
    Vector w = A * V.col(j);
    // modified Gram-Schmidt with one re-orthogonalization pass
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i <= j; ++i) {
        const double hij = V.col(i).dot(w);
        H(i, j) += hij;
        w -= hij * V.col(i);
      }
    }
    const double hnext = w.norm();
    if (hnext <= cfg.breakdown_tol * beta0) {
      dim = j + 1;  // invariant subspace: the j+1 dimensional result is exact
      break;
    }
    if (j + 1 < m) {
      H(j + 1, j) = hnext;
      V.col(j + 1) = w / hnext;
    }
  }

  const Matrix E = pade_expm(H.topLeftCorner(dim, dim), cfg.pade);
  return beta0 * V.leftCols(dim) * E.col(0);
}

Matrix solve_pencil(const Matrix& A, const Matrix& Q) {
  detail::require_square_finite(A, "solve_pencil");
  detail::require_square_finite(Q, "solve_pencil");
  const Eigen::Index d = A.rows();
  if (Q.rows() != d) {
    throw LinalgError("solve_pencil: A and Q must have the same dimension");
  }
  const double qnorm = std::max(detail::one_norm(Q), 1e-300);
  if (detail::one_norm(Matrix(Q - Q.transpose())) > 1e-8 * qnorm) {
    throw LinalgError("solve_pencil: Q must be symmetric");
  }

  // vec(A S) = (I (x) A) vec(S), vec(S A^T) = (A (x) I) vec(S)
  Matrix M = Matrix::Zero(d * d, d * d);
  for (Eigen::Index j = 0; j < d; ++j) {
    M.block(j * d, j * d, d, d) += A;
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      for (Eigen::Index k = 0; k < d; ++k) {
        M(i * d + k, j * d + k) += A(i, j);
      }
    }
  }

  Eigen::FullPivLU<Matrix> lu(M);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) {
    // A has eigenvalues with lambda_i + lambda_j = 0
    throw LinalgError("solve_pencil: pencil equation has no unique solution");
  }
  Vector q(d * d);
  for (Eigen::Index j = 0; j < d; ++j) {
    q.segment(j * d, d) = 0.5 * (Q.col(j) + Q.row(j).transpose());
  }
  const Vector s = lu.solve(q);
  Matrix S(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    S.col(j) = s.segment(j * d, d);
  }
  return S;
}

double spectral_norm_estimate(const Matrix& A, int iters) {
  if (A.size() == 0) return 0.0;
  Vector x = Vector::Ones(A.cols());
  x.normalize();
  double est = 0.0;
  for (int i = 0; i < iters; ++i) {
    Vector y = A.transpose() * (A * x);
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    est = std::sqrt(norm);
    x = y / norm;
  }
  return est;
}

}  // namespace llsde
