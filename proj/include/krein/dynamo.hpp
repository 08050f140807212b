#pragma once

// Spherically symmetric alpha^2-dynamo in the f = r phi variables:
//   f1'' = [l(l+1)/r^2 + lambda] f1 - alpha f2
//   f2'' = [l(l+1)/r^2 + lambda] f2 + (alpha f1')' - alpha l(l+1)/r^2 f1
// on (0, 1], regular at the origin.

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "krein/contour.hpp"
#include "krein/interp.hpp"
#include "krein/sweep.hpp"
#include "krein/types.hpp"

namespace krein {

/// alpha(r) = scale * sum_k coefficients[k] r^k.
struct AlphaProfile {
  std::vector<double> coefficients;
  double scale = 1.0;

  /// C (1 - 26.09 r^2 + 53.64 r^3 - 28.22 r^4).
  static AlphaProfile quartic(double C = 1.0);
  static AlphaProfile constant(double alpha0);
  /// One coefficient per line, lowest degree first; '#' starts a comment.
  static AlphaProfile from_file(const std::string& path, double C = 1.0);
  static AlphaProfile from_text(const std::string& text, double C = 1.0);
  /// "quartic", "constant:<value>" or a coefficient file path.
  static AlphaProfile parse(const std::string& name, double C = 1.0);

  AlphaProfile with_scale(double C) const;
  /// max |alpha| on [0, 1] (sampled).
  double max_abs() const;
};

/// (alpha(r), alpha'(r)).
std::pair<double, double> alpha_eval(double r, const AlphaProfile& profile);

enum class DynamoBC { Idealized, Realistic };
const char* to_string(DynamoBC bc) noexcept;
/// "idealized" or "realistic"; throws ParseError otherwise.
DynamoBC parse_dynamo_bc(const std::string& text);

struct DynamoParams {
  int l = 1;
  AlphaProfile profile;
  DynamoBC bc = DynamoBC::Idealized;
  /// Start radius of the integration.
  double r0 = 1e-4;
  double rel_tol = 1e-10;

  void validate() const;
};

/// (f1, f1', f2, f2').
using DynamoState = std::array<cplx, 4>;

/// Throws RadiusAtZero for r <= 0.
DynamoState dynamo_rhs(double r, const DynamoState& state, cplx lambda, const DynamoParams& params);

/// (r0^(l+1), (l+1) r0^l, 0, 0) and (0, 0, r0^(l+1), (l+1) r0^l).
std::array<DynamoState, 2> regular_solutions_seed(double r0, int l);

/// Both regular solutions at r = 1.
std::array<DynamoState, 2> dynamo_shoot(cplx lambda, const DynamoParams& params);

/// Rows: boundary residuals; columns: the two regular solutions.
/// Idealized: (f1, f2); Realistic: (f1' + l f1, f2).
std::array<std::array<cplx, 2>, 2> dynamo_boundary_matrix(cplx lambda, const DynamoParams& params);

cplx dynamo_determinant(cplx lambda, const DynamoParams& params);

/// Rectangle holding every eigenvalue with Re lambda >= re_min.
Rect dynamo_enclosure(const DynamoParams& params, double re_min);

/// All eigenvalues with Re lambda >= re_min, by descending real part
/// (then descending imaginary part).
std::vector<cplx> dynamo_spectrum_above(const DynamoParams& params, double re_min);

/// The `count` eigenvalues of largest real part (conjugate partner of the last
/// one included). Throws IncompleteSpectrum.
std::vector<cplx> dynamo_spectrum(const DynamoParams& params, int count);

/// Branches over the profile scale C. parameter = C.
SweepResult c_sweep(const DynamoParams& params, const std::vector<double>& c_grid, int n_levels);

/// n-th positive zero of the spherical Bessel function j_l.
double spherical_bessel_zero(int l, int n);

/// (-k^2 + alpha0 k, -k^2 - alpha0 k), k = n-th zero of j_l.
std::pair<cplx, cplx> constant_alpha_oracle(double alpha0, int l, int n);

/// phi = f / r sampled on a grid of (0, 1].
struct DynamoEigenfunction {
  std::vector<double> r;
  std::vector<cplx> phi1;
  std::vector<cplx> phi2;
  cplx eigenvalue;
};

/// Null vector of the boundary matrix, integrated on n_samples uniform points
/// of [r0, 1] and scaled to unit maximum.
DynamoEigenfunction dynamo_eigenfunction(const DynamoParams& params, cplx lambda, int n_samples = 4001);

/// Solution of the same equations with the boundary conditions of the adjoint
/// problem, h1(1) = 0 and h2'(1) + l h2(1) - alpha(1) h1'(1) = 0 (Realistic),
/// h(1) = 0 (Idealized). Its J-pairing with an eigenfunction vanishes at a
/// Jordan block.
DynamoEigenfunction dynamo_adjoint_eigenfunction(const DynamoParams& params, cplx lambda, int n_samples = 4001);

/// Trapezoidal int (conj(phi1) phi2 + conj(phi2) phi1) r^2 dr with the ratio to
/// int (|phi1|^2 + |phi2|^2) r^2 dr. warning is set for Realistic.
/// Throws GridMismatch.
KreinDiagnostic krein_inner_product_J(const std::vector<double>& r, const std::vector<cplx>& phi1,
                                      const std::vector<cplx>& phi2, DynamoBC bc = DynamoBC::Idealized);
KreinDiagnostic krein_inner_product_J(const DynamoEigenfunction& phi, DynamoBC bc = DynamoBC::Idealized);

/// |int (h2 phi1 + h1 phi2) r^2 dr| / (||h|| ||phi||) for the eigenfunction phi
/// and its adjoint partner h. Equals the J-neutrality ratio under Idealized
/// conditions at real lambda and is defined for both kinds.
KreinDiagnostic dynamo_neutrality(const DynamoParams& params, cplx lambda, int n_samples = 4001);

/// phi_+ = (phi2 + phi1)/sqrt2, phi_- = (phi2 - phi1)/sqrt2.
std::pair<cplx, cplx> transform_to_diagonal_metric(cplx phi1, cplx phi2);

struct DiagonalMetricCheck {
  cplx j_form;
  cplx mu_form;
  double difference = 0.0;
};

/// [phi, phi]_J against ||phi_+||^2 - ||phi_-||^2 (same r^2 dr quadrature).
DiagonalMetricCheck diagonal_metric_identity(const std::vector<double>& r, const std::vector<cplx>& phi1,
                                             const std::vector<cplx>& phi2);

}  // namespace krein
