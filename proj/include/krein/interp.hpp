#pragma once

// PT-symmetric interpolation model -psi'' + G y^2 (iy)^nu psi = mu psi on [-1, 1],
// psi(-1) = psi(1) = 0, with G = g b^(4+nu) and mu = b^2 E.

#include <vector>

#include "krein/contour.hpp"
#include "krein/sweep.hpp"
#include "krein/types.hpp"

namespace krein {

struct InterpParams {
  double nu = -1.0;
  double b = 1.0;
  double g = 1.0;

  double G() const;
  cplx mu_from_E(cplx E) const { return b * b * E; }
  cplx E_from_mu(cplx mu) const { return mu / (b * b); }
  /// Throws InvalidParameter unless nu in [-2, 0], b > 0 and g finite.
  void validate() const;
};

struct ShootingOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
};

/// G |y|^(2+nu) exp(i sign(y) nu pi / 2); constant -g b^2 at nu = -2.
cplx potential(double y, const InterpParams& params);

/// D(mu) = psi(1) for psi(-1) = 0, psi'(-1) = 1.
cplx shooting_determinant(cplx mu, const InterpParams& params, const ShootingOptions& options = {});

struct ShootingDerivatives {
  cplx d;
  cplx d_mu;
  cplx d_mumu;
  cplx d_nu;
};

/// D and its derivatives from the variational equations.
ShootingDerivatives shooting_derivatives(cplx mu, const InterpParams& params, bool with_second = true,
                                         bool with_nu = true, const ShootingOptions& options = {});

/// Rectangle in the mu-plane that contains every eigenvalue with Re mu <= re_max
/// (numerical-range bounds, padded).
Rect interp_enclosure(const InterpParams& params, double re_max);

/// All eigenvalues mu with Re mu <= re_max, sorted by (Re, Im). Certified by
/// argument-principle counts on strips of the enclosure.
std::vector<cplx> eigenvalues_below(const InterpParams& params, double re_max);

/// The `count` eigenvalues of smallest |mu| (a conjugate partner of the last one
/// is included), sorted by (Re, Im).
std::vector<cplx> eigenvalues(const InterpParams& params, int count);

struct Eigenfunction {
  std::vector<double> y;
  std::vector<cplx> psi;
  cplx eigenvalue;
};

/// psi on n_samples uniformly spaced points of [-1, 1] (n_samples odd, >= 3).
Eigenfunction eigenfunction(const InterpParams& params, cplx mu, int n_samples = 2001);

struct KreinDiagnostic {
  cplx value;
  double norm = 0.0;
  /// |value| / norm.
  double neutrality = 0.0;
  /// Set when the metric is not a Krein-space metric for the problem.
  bool warning = false;
};

/// Trapezoidal [psi, psi]_P = int conj(psi(y)) psi(-y) dy. Throws AsymmetricGrid.
KreinDiagnostic krein_inner_product_P(const Eigenfunction& psi);

/// 1/2 [(8/pi^2) |g| b^(4+nu) - 1].
double supremum_bound_ks(double b, double nu, double g = 1.0);

struct CriticalLevelReport {
  int kc = 1;
  /// Spectrum (mu) used, sorted by (Re, Im).
  std::vector<cplx> levels;
  int complex_count = 0;
};

/// 1 + position of the highest complex eigenvalue in the Re-ordered spectrum.
/// Depth: until three consecutive real levels lie above every complex pair.
/// Throws InsufficientDepth when that is not reached below k_s levels.
CriticalLevelReport critical_level_report(const InterpParams& params);
int critical_level_kc(const InterpParams& params);

/// Branches of mu over nu at fixed (b, g).
SweepResult nu_sweep(double b, double g, const std::vector<double>& nu_grid, int n_levels);

/// Double root of D in (mu, nu) at fixed (b, g).
ExceptionalPoint interp_ep_in_nu(double b, double g, cplx mu_guess, double nu_guess, double tol = 1e-4);
/// Double root of D in (mu, b) at fixed (nu, g).
ExceptionalPoint interp_ep_in_b(double nu, double g, cplx mu_guess, double b_guess, double tol = 1e-4);

/// Merger of the two exceptional points of a fixed-nu slice: D = dD/dmu =
/// dD/db = 0 at real mu, solved for (mu, nu, b). parameter = nu, parameter2 = b.
ExceptionalPoint interp_ep_coalescence(double g, double mu_guess, double nu_guess, double b_guess,
                                       double tol = 1e-4);

/// Follows the curve of exceptional points from a point (mu, nu, b) of it in
/// steps of b until nu passes an extremum, then refines that point with
/// interp_ep_coalescence.
ExceptionalPoint interp_follow_to_coalescence(double g, double mu_start, double nu_start, double b_start,
                                              double b_step = 0.02, double b_max = 8.0);

}  // namespace krein
