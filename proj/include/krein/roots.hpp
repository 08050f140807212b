#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "krein/types.hpp"

namespace krein {

using ComplexFn = std::function<cplx(cplx)>;
/// Characteristic function family f(z; p), analytic in z and continuous in p.
using FamilyFn = std::function<cplx(cplx, double)>;

struct RootResult {
  cplx root;
  double residual = 0.0;  // |f(root)|
  int iterations = 0;
  bool converged = false;
};

struct NewtonOptions {
  /// Stop when |f| <= f_tol (0 disables the test).
  double f_tol = 0.0;
  /// Stop when the Newton step |dz| <= z_tol * max(1, |z|).
  double z_tol = 1e-12;
  int max_iter = 60;
  /// Step-length cap; Newton steps longer than this are shortened.
  double max_step = std::numeric_limits<double>::infinity();
  /// Optional analytic derivative; central differences otherwise.
  ComplexFn derivative;
};

/// Central-difference derivative with h = max(1e-7, 1e-7 |z|).
cplx fd_derivative(const ComplexFn& f, cplx z);

/// Damped Newton iteration; never throws on non-convergence (check .converged).
/// Throws DerivativeVanished when f' is lost below its noise floor.
RootResult newton(const ComplexFn& f, cplx guess, const NewtonOptions& options = {});

/// Newton with |f(root)| <= tol as the acceptance test. Throws NoConvergence
/// after max_iter iterations and DerivativeVanished for a (near) double root.
RootResult find_root_complex(const ComplexFn& f, cplx guess, double tol, int max_iter = 60);

struct DoubleRootOptions {
  /// Bound on both normalized residuals (see ep_residuals).
  double tol = 1e-4;
  int max_iter = 40;
  /// Optional analytic z-derivative of the family.
  std::function<cplx(cplx, double)> dfdz;
  /// Keep the parameter inside [p_min, p_max].
  double p_min = -std::numeric_limits<double>::infinity();
  double p_max = std::numeric_limits<double>::infinity();
};

struct EpResiduals {
  double f = 0.0;
  double df = 0.0;
};

/// Scale-free residuals of the double-root system at (z, p): |f|/S and |f_z| l/S,
/// where S = max |f(z + l e^{i k pi/2}, p)| over k = 0..3 and l = 1e-2 max(1, |z|).
/// For f = c (z - z0)^2 and d = |z - z0| these are d^2/(d+l)^2 and 2 d l/(d+l)^2.
EpResiduals ep_residuals(const FamilyFn& f, cplx z, double p,
                         const std::function<cplx(cplx, double)>& dfdz = {});

/// Solves f = 0, df/dz = 0 for (z, p) by Gauss-Newton over (Re z, Im z, p).
/// Throws NoConvergence or SingularJacobian.
ExceptionalPoint find_double_root(const FamilyFn& f, cplx guess_z, double guess_p,
                                  const DoubleRootOptions& options = {});

/// Replaces every matched pair (z, w ~ conj z) by exact conjugates of their mean.
/// Pairs match when |w - conj z| <= rel_tol max(1, |z|).
void symmetrize_conjugate_pairs(std::vector<cplx>& roots, double rel_tol = 1e-6);

/// Root of a real function bracketed by [a, b] (f(a) f(b) <= 0), TOMS 748.
double bracketed_root(const std::function<double(double)>& f, double a, double b,
                      double fa, double fb, double rel_tol = 1e-15);

}  // namespace krein
