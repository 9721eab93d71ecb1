#pragma once

// Computation of the LL increment pair (phi, Sigma) by each algorithmic
// route, and the single-step map y <- y + phi + Sigma^{1/2} xi.

#include <string>
#include <vector>

#include "llsde/linalg.hpp"
#include "llsde/model.hpp"
#include "llsde/rng.hpp"

namespace llsde {

enum class SchemeVariant { PadeGeneral, PadeConstG, Krylov, OzakiShoji, Midpoint };
enum class NoiseKind { Gaussian, TwoPoint };

const char* variant_name(SchemeVariant v);
SchemeVariant variant_from_name(const std::string& name);

struct SchemeConfig {
  SchemeVariant variant = SchemeVariant::PadeGeneral;
  int beta = 1;  // discretization order, 1 or 2
  PadeConfig pade{};
  KrylovConfig krylov{};  // krylov variant only
  NoiseKind noise = NoiseKind::Gaussian;
  // Diagnostic knob for order studies: adds phi_defect * h^2 to every
  // component of the drift increment, degrading the local order to 1.
  double phi_defect = 0.0;
};

// Throws when the variant's preconditions do not hold for the model.
void check_scheme(const SchemeConfig& cfg, const SdeModel& model);

struct LocalIncrement {
  Vector phi;          // deterministic increment
  Matrix sigma;        // one-step noise covariance
  Matrix sigma_sqrt;   // symmetric PSD square root of sigma
};

// Affine expansion of the drift around (t, y).
struct AffinePieces {
  int beta = 1;
  Matrix A;           // f_x(t, y)
  Vector f_val;       // f(t, y)
  Vector b_beta;      // f - f_x y (affine remainder at u = t)
  Vector ft;          // f_t(t, y)
  Vector hessterm;    // sum_j (I (x) g_j^T) f_xx g_j  (beta = 2 only)
  // coefficient of (u - t) in the affine drift: f_t (+ hessterm/2 for beta=2)
  Vector time_slope;
  // s^i coefficients of G_beta(t+s) G_beta(t+s)^T, i = 0 .. 2 beta - 2
  std::vector<Matrix> H;
};

AffinePieces affine_pieces(const SdeModel& model, double t, const Vector& y,
                           int beta);

// Augmented (Van Loan) matrices whose exponential contains phi and the
// covariance factors as blocks.
struct AugmentedMatrix {
  Matrix M;
  int d = 0;
  int beta = 1;
};

// (2d+2)-dimensional matrix for constant diffusion; with D = e^{M h},
// phi = D_14 and Sigma = D_12 D_11^T.
AugmentedMatrix build_c_beta(const AffinePieces& pieces, const Matrix& GGT);

// (2 beta d + 2)-dimensional matrix for time-dependent diffusion; with
// B = e^{M h}, phi = B_{1, 2 beta + 2} and Sigma = B_{1, 2 beta} B_11^T.
AugmentedMatrix build_a_beta(const AffinePieces& pieces);

LocalIncrement increment_pade_general(const SdeModel& model, double t,
                                      const Vector& y, double h,
                                      const SchemeConfig& cfg);
LocalIncrement increment_pade_const_g(const SdeModel& model, double t,
                                      const Vector& y, double h,
                                      const SchemeConfig& cfg);
LocalIncrement increment_krylov(const SdeModel& model, double t,
                                const Vector& y, double h,
                                const SchemeConfig& cfg);
// Autonomous constant-diffusion route; requires an invertible Jacobian.
LocalIncrement increment_ozaki_shoji(const SdeModel& model, const Vector& y,
                                     double h, const SchemeConfig& cfg);
LocalIncrement increment_midpoint(const SdeModel& model, double t,
                                  const Vector& y, double h,
                                  const SchemeConfig& cfg);

// Dispatch on cfg.variant; applies the phi_defect knob.
LocalIncrement compute_increment(const SchemeConfig& cfg, const SdeModel& model,
                                 double t, const Vector& y, double h);

// Draws xi per cfg.noise and returns y + phi + sigma_sqrt xi.
Vector step(const SchemeConfig& cfg, const SdeModel& model, double t,
            const Vector& y, double h, RngStream& rng);

}  // namespace llsde
