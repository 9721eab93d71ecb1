#include "llsde/llcore.hpp"

#include <atomic>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace llsde {
namespace {

void require_finite(const Vector& v, const char* who) {
  if (!v.allFinite()) {
    throw std::runtime_error(std::string(who) + ": model callback returned "
                                                "non-finite values");
  }
}

// Fills the (2d+2)-dimensional constant-diffusion augmented matrix.
template <class Mat>
Mat assemble_c_beta(const AffinePieces& P, const Matrix& GGT) {
  const int d = int(P.A.rows());
  const int n = 2 * d + 2;
  Mat M = Mat::Zero(n, n);
  M.block(0, 0, d, d) = P.A;
  M.block(0, d, d, d) = GGT;
  M.block(0, 2 * d, d, 1) = P.time_slope;
  M.block(0, 2 * d + 1, d, 1) = P.f_val;
  M.block(d, d, d, d) = -P.A.transpose();
  M(2 * d, 2 * d + 1) = 1.0;
  return M;
}

// Fills the (2 beta d + 2)-dimensional general augmented matrix.  The i-th
// noise coefficient enters scaled by i! because the identity cascade below
// generates s^i / i! while G_beta G_beta^T carries plain s^i coefficients.
template <class Mat>
Mat assemble_a_beta(const AffinePieces& P) {
  const int d = int(P.A.rows());
  const int beta = P.beta;
  const int n = 2 * beta * d + 2;
  Mat M = Mat::Zero(n, n);
  M.block(0, 0, d, d) = P.A;
  double factorial = 1.0;
  for (int i = 2; i <= 2 * beta - 2; ++i) factorial *= i;
  for (int j = 1; j <= 2 * beta - 1; ++j) {
    const int i = 2 * beta - 1 - j;  // power of s carried by this column
    M.block(0, j * d, d, d) = factorial * P.H[i];
    if (i > 0) factorial /= i;
  }
  M.block(0, 2 * beta * d, d, 1) = P.time_slope;
  M.block(0, 2 * beta * d + 1, d, 1) = P.f_val;
  for (int r = 1; r <= 2 * beta - 1; ++r) {
    M.block(r * d, r * d, d, d) = -P.A.transpose();
    if (r <= 2 * beta - 2) {
      M.block(r * d, (r + 1) * d, d, d) = Matrix::Identity(d, d);
    }
  }
  M(2 * beta * d, 2 * beta * d + 1) = 1.0;
  return M;
}

// phi = E_{1,last}, Sigma = E_{1,cov} E_{1,1}^T for the exponential E of an
// augmented matrix whose covariance block column starts at cov_col.
template <class Mat>
void extract_increment(const Mat& E, int d, int cov_col, LocalIncrement& out) {
  const int n = int(E.rows());
  out.phi = E.block(0, n - 1, d, 1);
  Matrix sigma = E.block(0, cov_col, d, d) * E.block(0, 0, d, d).transpose();
  sigma = 0.5 * (sigma + Matrix(sigma.transpose()));
  out.sigma = sigma;
  out.sigma_sqrt = psd_sqrt(sigma);
}

}  // namespace

const char* variant_name(SchemeVariant v) {
  switch (v) {
    case SchemeVariant::PadeGeneral: return "pade-general";
    case SchemeVariant::PadeConstG: return "pade-const-g";
    case SchemeVariant::Krylov: return "krylov";
    case SchemeVariant::OzakiShoji: return "ozaki-shoji";
    case SchemeVariant::Midpoint: return "midpoint";
  }
  return "?";
}

SchemeVariant variant_from_name(const std::string& name) {
  if (name == "pade-general") return SchemeVariant::PadeGeneral;
  if (name == "pade-const-g") return SchemeVariant::PadeConstG;
  if (name == "krylov") return SchemeVariant::Krylov;
  if (name == "ozaki-shoji") return SchemeVariant::OzakiShoji;
  if (name == "midpoint") return SchemeVariant::Midpoint;
  throw std::invalid_argument("unknown scheme variant '" + name + "'");
}

void check_scheme(const SchemeConfig& cfg, const SdeModel& model) {
  if (cfg.beta != 1 && cfg.beta != 2) {
    throw std::invalid_argument("scheme: beta must be 1 or 2");
  }
  switch (cfg.variant) {
    case SchemeVariant::PadeConstG:
    case SchemeVariant::Krylov:
      if (!model.constant_g) {
        throw std::invalid_argument(std::string(variant_name(cfg.variant)) +
                                    " requires constant diffusion coefficients");
      }
      break;
    case SchemeVariant::OzakiShoji:
      if (!model.autonomous || !model.constant_g) {
        throw std::invalid_argument(
            "ozaki-shoji requires an autonomous model with constant diffusion");
      }
      break;
    case SchemeVariant::Midpoint:
      if (cfg.beta != 2) {
        throw std::invalid_argument("midpoint targets the beta = 2 "
                                    "discretization; set beta = 2");
      }
      break;
    default:
      break;
  }
}

AffinePieces affine_pieces(const SdeModel& model, double t, const Vector& y,
                           int beta) {
  AffinePieces P;
  P.beta = beta;
  P.A = model.f_x(t, y);
  P.f_val = model.f(t, y);
  P.ft = model.f_t(t, y);
  require_finite(P.f_val, "affine_pieces");
  require_finite(P.ft, "affine_pieces");
  if (!P.A.allFinite()) {
    throw std::runtime_error("affine_pieces: non-finite Jacobian");
  }
  P.b_beta = P.f_val - P.A * y;

  const int d = model.d;
  P.hessterm = Vector::Zero(d);
  if (beta == 2) {
    const Matrix G = model.G(t);
    for (int j = 0; j < model.m; ++j) {
      P.hessterm += model.hess_quad(t, y, G.col(j));
    }
    require_finite(P.hessterm, "affine_pieces");
  }
  P.time_slope = P.ft + (beta == 2 ? 0.5 : 0.0) * P.hessterm;

  const Matrix G0 = model.dG(t, 0);
  P.H.resize(2 * beta - 1);
  P.H[0] = G0 * G0.transpose();
  if (beta == 2) {
    const Matrix G1 = model.dG(t, 1);
    P.H[1] = G1 * G0.transpose() + G0 * G1.transpose();
    P.H[2] = G1 * G1.transpose();
  }
  return P;
}

AugmentedMatrix build_c_beta(const AffinePieces& pieces, const Matrix& GGT) {
  const int d = int(pieces.A.rows());
  if (GGT.rows() != d || GGT.cols() != d) {
    throw std::invalid_argument("build_c_beta: GGT must be d x d");
  }
  return {assemble_c_beta<Matrix>(pieces, GGT), d, pieces.beta};
}

AugmentedMatrix build_a_beta(const AffinePieces& pieces) {
  const int d = int(pieces.A.rows());
  return {assemble_a_beta<Matrix>(pieces), d, pieces.beta};
}

LocalIncrement increment_pade_general(const SdeModel& model, double t,
                                      const Vector& y, double h,
                                      const SchemeConfig& cfg) {
  const AffinePieces P = affine_pieces(model, t, y, cfg.beta);
  const int d = model.d;
  const int n = 2 * cfg.beta * d + 2;
  const int cov_col = (2 * cfg.beta - 1) * d;
  LocalIncrement out;
  if (n <= kSmallDim) {
    const SmallMatrix M = assemble_a_beta<SmallMatrix>(P);
    const SmallMatrix E = pade_expm_t<SmallMatrix>(SmallMatrix(M * h), cfg.pade);
    extract_increment(E, d, cov_col, out);
  } else {
    const Matrix M = assemble_a_beta<Matrix>(P);
    const Matrix E = pade_expm(M * h, cfg.pade);
    extract_increment(E, d, cov_col, out);
  }
  return out;
}

LocalIncrement increment_pade_const_g(const SdeModel& model, double t,
                                      const Vector& y, double h,
                                      const SchemeConfig& cfg) {
  const AffinePieces P = affine_pieces(model, t, y, cfg.beta);
  const Matrix G = model.G(t);
  const Matrix GGT = G * G.transpose();
  const int d = model.d;
  const int n = 2 * d + 2;
  LocalIncrement out;
  if (n <= kSmallDim) {
    const SmallMatrix M = assemble_c_beta<SmallMatrix>(P, GGT);
    const SmallMatrix E = pade_expm_t<SmallMatrix>(SmallMatrix(M * h), cfg.pade);
    extract_increment(E, d, d, out);
  } else {
    const Matrix M = assemble_c_beta<Matrix>(P, GGT);
    const Matrix E = pade_expm(M * h, cfg.pade);
    extract_increment(E, d, d, out);
  }
  return out;
}

LocalIncrement increment_krylov(const SdeModel& model, double t,
                                const Vector& y, double h,
                                const SchemeConfig& cfg) {
  const AffinePieces P = affine_pieces(model, t, y, cfg.beta);
  const Matrix G = model.G(t);
  const Matrix GGT = G * G.transpose();
  const int d = model.d;
  const int n = 2 * d + 2;
  const Matrix C = assemble_c_beta<Matrix>(P, GGT);

  // Advisory subspace-size condition; the schemes stay usable below it, so
  // warn instead of aborting.
  static std::atomic<bool> warned{false};
  if (cfg.krylov.m < n) {
    const double bound = 2.0 * h * spectral_norm_estimate(C);
    if (double(cfg.krylov.m) < bound && !warned.exchange(true)) {
      std::cerr << "llsde: krylov subspace dimension m = " << cfg.krylov.m
                << " is below the advisory bound 2 h |C_beta|_2 = " << bound
                << "\n";
    }
  }

  const Matrix Ct_h = C.transpose() * h;
  Matrix Pmat(n, d);  // e^{C^T h} L_1^T, column by column
  for (int i = 0; i < d; ++i) {
    Vector e = Vector::Zero(n);
    e[i] = 1.0;
    Pmat.col(i) = krylov_expmv(Ct_h, e, cfg.krylov);
  }

  LocalIncrement out;
  out.phi = Pmat.row(n - 1).transpose();
  Matrix sigma = Pmat.middleRows(d, d).transpose() * Pmat.topRows(d);
  sigma = 0.5 * (sigma + Matrix(sigma.transpose()));
  out.sigma = sigma;
  out.sigma_sqrt = psd_sqrt(sigma);
  return out;
}

LocalIncrement increment_ozaki_shoji(const SdeModel& model, const Vector& y,
                                     double h, const SchemeConfig& cfg) {
  if (!model.autonomous || !model.constant_g) {
    throw std::invalid_argument(
        "ozaki-shoji requires an autonomous model with constant diffusion");
  }
  const double t = model.t0;
  const int d = model.d;
  const Matrix A = model.f_x(t, y);
  const Vector f = model.f(t, y);

  Eigen::PartialPivLU<Matrix> lu(A);
  const Matrix Ainv = lu.inverse();
  const double rcond =
      1.0 / std::max(detail::one_norm(A) * detail::one_norm(Ainv), 1.0);
  if (!Ainv.allFinite() || rcond < 1e-12) {
    throw std::runtime_error("ozaki-shoji: singular Jacobian");
  }

  const Matrix E = pade_expm(A * h, cfg.pade);
  const Matrix EmI = E - Matrix::Identity(d, d);
  LocalIncrement out;
  out.phi = Ainv * EmI * f;
  if (cfg.beta == 2) {
    Vector hess = Vector::Zero(d);
    const Matrix G = model.G(t);
    for (int j = 0; j < model.m; ++j) {
      hess += model.hess_quad(t, y, G.col(j));
    }
    out.phi += Ainv * Ainv * (EmI - A * h) * (0.5 * hess);
  }

  const Matrix G = model.G(t);
  const Matrix GGT = G * G.transpose();
  Matrix sigma;
  if (d == 1) {
    const double a = A(0, 0);
    sigma = GGT * (std::expm1(2.0 * a * h) / (2.0 * a));
  } else {
    const Matrix Q = E * GGT * E.transpose() - GGT;
    sigma = solve_pencil(A, Q);
  }
  sigma = 0.5 * (sigma + Matrix(sigma.transpose()));
  out.sigma = sigma;
  out.sigma_sqrt = psd_sqrt(sigma);
  return out;
}

LocalIncrement increment_midpoint(const SdeModel& model, double t,
                                  const Vector& y, double h,
                                  const SchemeConfig& cfg) {
  if (cfg.beta != 2) {
    throw std::invalid_argument("midpoint targets beta = 2");
  }
  const AffinePieces P = affine_pieces(model, t, y, 2);
  const int d = model.d;
  const Matrix E = pade_expm(P.A * h, cfg.pade);
  const Matrix Eh = pade_expm(P.A * (0.5 * h), cfg.pade);

  LocalIncrement out;
  out.phi = E * y - y +
            h * (Eh * (P.b_beta + (0.5 * h) * P.ft + (0.25 * h) * P.hessterm));
  const Matrix Gmid = model.G(t + 0.5 * h);
  Matrix sigma = h * (Eh * Gmid) * (Eh * Gmid).transpose();
  sigma = 0.5 * (sigma + Matrix(sigma.transpose()));
  out.sigma = sigma;
  out.sigma_sqrt = psd_sqrt(sigma);
  return out;
}

LocalIncrement compute_increment(const SchemeConfig& cfg, const SdeModel& model,
                                 double t, const Vector& y, double h) {
  LocalIncrement out;
  switch (cfg.variant) {
    case SchemeVariant::PadeGeneral:
      out = increment_pade_general(model, t, y, h, cfg);
      break;
    case SchemeVariant::PadeConstG:
      out = increment_pade_const_g(model, t, y, h, cfg);
      break;
    case SchemeVariant::Krylov:
      out = increment_krylov(model, t, y, h, cfg);
      break;
    case SchemeVariant::OzakiShoji:
      out = increment_ozaki_shoji(model, y, h, cfg);
      break;
    case SchemeVariant::Midpoint:
      out = increment_midpoint(model, t, y, h, cfg);
      break;
  }
  if (cfg.phi_defect != 0.0) {
    out.phi.array() += cfg.phi_defect * h * h;
  }
  return out;
}

Vector step(const SchemeConfig& cfg, const SdeModel& model, double t,
            const Vector& y, double h, RngStream& rng) {
  if (!(h > 0.0)) throw std::invalid_argument("step: h must be positive");
  const LocalIncrement inc = compute_increment(cfg, model, t, y, h);
  Vector xi(model.d);
  for (int i = 0; i < model.d; ++i) {
    xi[i] = cfg.noise == NoiseKind::Gaussian ? rng.normal() : rng.two_point();
  }
  return y + inc.phi + inc.sigma_sqrt * xi;
}

}  // namespace llsde
