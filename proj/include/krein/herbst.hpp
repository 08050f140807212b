#pragma once

// Herbst box -psi'' - i b^3 y psi = b^2 E psi on [-1, 1] with Dirichlet walls,
// solved through the Airy determinant, and the Squire problem obtained from it
// by lambda = E / (i b), epsilon = b^-3.

#include <optional>
#include <utility>
#include <vector>

#include "krein/contour.hpp"
#include "krein/sweep.hpp"
#include "krein/types.hpp"

namespace krein {

struct HerbstParams {
  double b = 1.0;
  void validate() const;
};

/// e^{i pi/3} (-i b y - E).
cplx xi(double y, double b, cplx E);

/// Solution pairs: Standard = (Ai(xi), Ai(q^2 xi)), Alternative = (Ai(xi), Ai(q xi)).
enum class HerbstBasis { Standard, Alternative };

/// A1(xi+) A2(xi-) - A1(xi-) A2(xi+) for the given pair, evaluated directly.
cplx herbst_determinant_basis(cplx E, double b, HerbstBasis basis);

/// Delta(E) for the Standard pair. Internally the best-conditioned of the three
/// Airy pairs is evaluated and converted with the exact constant factor.
cplx herbst_determinant(cplx E, double b);
/// d Delta / dE.
cplx herbst_determinant_dE(cplx E, double b);

/// Contains every eigenvalue with Re E <= re_max.
Rect herbst_enclosure(double b, double re_max);

/// The `count` eigenvalues of smallest |E| (conjugate partner of the last one
/// included), sorted by (Re, Im). Certified by argument-principle counts.
std::vector<cplx> herbst_spectrum(double b, int count);
/// All eigenvalues with Re E <= re_max.
std::vector<cplx> herbst_spectrum_below(double b, double re_max);

struct CrossingEstimate {
  double b = 0.0;
  double E = 0.0;
};

/// b_n = |s_n| sqrt(3) / 2, E_n = |s_n| / 2.
CrossingEstimate crossing_estimate(int n);

struct HerbstCrossing {
  ExceptionalPoint ep;  // parameter = b
  CrossingEstimate estimate;
  /// +1 if A(xi+) = A(xi-) holds at the double root, -1 if A(xi+) = -A(xi-).
  int sign = 0;
  /// max over both Airy solutions of |A(xi+) - A(xi-)| / |A(xi-)|, and with +.
  double residual_plus = 0.0;
  double residual_minus = 0.0;
};

/// Double root of Delta in (E, b) for the n-th merger of real levels.
HerbstCrossing crossing_exact(int n);
/// crossing_exact(1..n_max) in one pass.
std::vector<HerbstCrossing> crossings_exact(int n_max);

/// (4 / 3pi) (2b / sqrt 3)^(3/2) + 1/2.
double lowest_real_mode_bound_ka(double b);

struct SquireParams {
  double epsilon = 1.0;
  std::optional<double> alpha_tilde;
  std::optional<double> reynolds;

  static SquireParams from_reynolds(double alpha_tilde, double reynolds);
  double b() const;
  void validate() const;
};

/// lambda = -i E / b, epsilon = b^-3.
std::pair<cplx, double> squire_from_herbst(cplx E, double b);
/// Inverse: E = i b lambda, b = epsilon^(-1/3).
std::pair<cplx, double> herbst_from_squire(cplx lambda, double epsilon);

enum class YSegment { PlusBranch, MinusBranch, VerticalRay };
const char* to_string(YSegment s) noexcept;

struct YClassification {
  YSegment segment = YSegment::VerticalRay;
  double distance = 0.0;
};

/// Nearest of (1, -i/sqrt3], (-1, -i/sqrt3], [-i/sqrt3, -i inf); ties go to VerticalRay.
YClassification classify_Y(cplx lambda);

struct SquireMode {
  cplx lambda;
  YClassification y;
};

std::vector<SquireMode> squire_spectrum(const SquireParams& params, int count);

/// (2 / (|s_n| sqrt 3))^3.
double crossing_epsilon(int n);

/// -i epsilon pi^2 n^2 / 4.
cplx squire_ray_asymptote(int n, double epsilon);
/// sign = +1: 1 + eps^(1/3) s_n e^{i pi/6}; sign = -1: -1 - eps^(1/3) s_n e^{-i pi/6}.
cplx squire_branch_asymptote(int n, double epsilon, int sign);

/// Branches of E over b (b grid increasing).
SweepResult herbst_sweep(const std::vector<double>& b_grid, int n_levels);

}  // namespace krein
