#include "krein/pencil.hpp"

#include "krein/errors.hpp"

namespace krein {

namespace {

std::pair<cplx, cplx> ordered(cplx x, cplx y) {
  if (x.real() < y.real() || (x.real() == y.real() && x.imag() <= y.imag())) return {x, y};
  return {y, x};
}

}  // namespace

std::pair<cplx, cplx> quadratic_pencil_roots(cplx a2, cplx a1, cplx a0) {
  if (a2 == cplx{}) fail(ErrorKind::DegeneratePencil, "leading pencil coefficient vanishes");
  const cplx disc = a1 * a1 - 4.0 * a2 * a0;
  const cplx sq = std::sqrt(disc);
  // Pick the sign that avoids cancellation in -a1 -+ sq.
  const cplx s = (std::real(std::conj(a1) * sq) >= 0) ? sq : -sq;
  const cplx q = -0.5 * (a1 + s);
  if (q == cplx{}) {
    const cplx r = -a1 / (2.0 * a2);
    return {r, r};
  }
  return ordered(q / a2, a0 / q);
}

std::pair<cplx, cplx> two_level_spectrum(double a, cplx b, double c) {
  const cplx root = std::sqrt(cplx(a * a - std::norm(b), 0.0));
  return ordered(c - root, c + root);
}

cplx two_level_characteristic(cplx e, double a, cplx b, double c) {
  return (e - c) * (e - c) - a * a + std::norm(b);
}

}  // namespace krein
