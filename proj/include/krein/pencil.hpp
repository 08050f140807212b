#pragma once

#include <utility>

#include "krein/types.hpp"

namespace krein {

/// Roots of a2 l^2 + a1 l + a0 = 0, ordered by (Re, Im). Throws DegeneratePencil for a2 = 0.
std::pair<cplx, cplx> quadratic_pencil_roots(cplx a2, cplx a1, cplx a0);

/// Eigenvalues c -+ sqrt(a^2 - |b|^2) of the 2x2 matrix [[c+a, b], [-conj(b), c-a]].
/// Real iff |a| >= |b|; the two coalesce at |a| = |b|.
std::pair<cplx, cplx> two_level_spectrum(double a, cplx b, double c);

/// Characteristic polynomial (E-c)^2 - a^2 + |b|^2 of the two-level model.
cplx two_level_characteristic(cplx e, double a, cplx b, double c);

}  // namespace krein
