#include "krein/roots.hpp"

#include <Eigen/Dense>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <string>

#include "krein/errors.hpp"

namespace krein {

namespace {

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

double fd_step(cplx z) { return std::max(1e-7, 1e-7 * std::abs(z)); }

}  // namespace

cplx fd_derivative(const ComplexFn& f, cplx z) {
  const double h = fd_step(z);
  return (f(z + h) - f(z - h)) / (2.0 * h);
}

RootResult newton(const ComplexFn& f, cplx guess, const NewtonOptions& opt) {
  RootResult res;
  cplx z = guess;
  cplx fz = f(z);
  if (!finite(fz)) fail(ErrorKind::NonFiniteState, "f not finite at Newton seed");
  for (int it = 1; it <= opt.max_iter; ++it) {
    res.iterations = it;
    if (opt.f_tol > 0 && std::abs(fz) <= opt.f_tol) {
      res.converged = true;
      break;
    }
    const cplx d = opt.derivative ? opt.derivative(z) : fd_derivative(f, z);
    const double noise = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(fz) / fd_step(z);
    if (!finite(d) || std::abs(d) == 0.0 || (!opt.derivative && std::abs(d) < noise))
      fail(ErrorKind::DerivativeVanished, "derivative vanished near z=(" + std::to_string(z.real()) +
                                              "," + std::to_string(z.imag()) + ")");
    cplx dz = -fz / d;
    if (!finite(dz)) fail(ErrorKind::DerivativeVanished, "non-finite Newton step");
    if (std::abs(dz) > opt.max_step) dz *= opt.max_step / std::abs(dz);

    const double step_tol = opt.z_tol * std::max(1.0, std::abs(z));
    double lambda = 1.0;
    cplx zn = z + dz;
    cplx fn = f(zn);
    for (int k = 0; k < 12; ++k) {
      if (finite(fn) && (std::abs(fn) < std::abs(fz) || lambda * std::abs(dz) <= step_tol)) break;
      lambda *= 0.5;
      zn = z + lambda * dz;
      fn = f(zn);
    }
    if (!finite(fn)) break;
    z = zn;
    fz = fn;
    if (lambda * std::abs(dz) <= step_tol) {
      res.converged = true;
      break;
    }
  }
  res.root = z;
  res.residual = std::abs(fz);
  if (opt.f_tol > 0 && res.residual > opt.f_tol) res.converged = false;
  return res;
}

RootResult find_root_complex(const ComplexFn& f, cplx guess, double tol, int max_iter) {
  NewtonOptions opt;
  opt.f_tol = tol;
  opt.z_tol = 0.0;
  opt.max_iter = max_iter;
  RootResult r = newton(f, guess, opt);
  if (!r.converged)
    fail(ErrorKind::NoConvergence, "Newton did not reach |f| <= " + std::to_string(tol) + " in " +
                                       std::to_string(max_iter) + " iterations");
  return r;
}

namespace {

cplx dz_of(const FamilyFn& f, const std::function<cplx(cplx, double)>& dfdz, cplx z, double p) {
  if (dfdz) return dfdz(z, p);
  const double h = 1e-5 * std::max(1.0, std::abs(z));
  return (f(z + h, p) - f(z - h, p)) / (2.0 * h);
}

}  // namespace

EpResiduals ep_residuals(const FamilyFn& f, cplx z, double p,
                         const std::function<cplx(cplx, double)>& dfdz) {
  const double l = 1e-2 * std::max(1.0, std::abs(z));
  double scale = 0.0;
  const cplx dirs[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (cplx d : dirs) scale = std::max(scale, std::abs(f(z + l * d, p)));
  if (!(scale > 0.0)) return {0.0, 0.0};
  return {std::abs(f(z, p)) / scale, std::abs(dz_of(f, dfdz, z, p)) * l / scale};
}

ExceptionalPoint find_double_root(const FamilyFn& f, cplx guess_z, double guess_p,
                                  const DoubleRootOptions& opt) {
  cplx z = guess_z;
  double p = guess_p;
  auto residual = [&](cplx zz, double pp) {
    Eigen::Vector4d r;
    const cplx v = f(zz, pp);
    const cplx dv = dz_of(f, opt.dfdz, zz, pp);
    r << v.real(), v.imag(), dv.real(), dv.imag();
    return r;
  };

  double last_step = std::numeric_limits<double>::infinity();
  int stalls = 0;
  for (int it = 0; it < opt.max_iter; ++it) {
    const Eigen::Vector4d r0 = residual(z, p);
    const double hz = 1e-4 * std::max(1.0, std::abs(z));
    const double hp = 1e-6 * std::max(1.0, std::abs(p));
    Eigen::Matrix<double, 4, 3> jac;
    jac.col(0) = (residual(z + hz, p) - residual(z - hz, p)) / (2 * hz);
    jac.col(1) = (residual(z + cplx(0, hz), p) - residual(z - cplx(0, hz), p)) / (2 * hz);
    jac.col(2) = (residual(z, p + hp) - residual(z, p - hp)) / (2 * hp);

    Eigen::JacobiSVD<Eigen::Matrix<double, 4, 3>> svd(jac, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    if (!(s(2) > 1e-13 * s(0)))
      fail(ErrorKind::SingularJacobian, "double-root Jacobian is singular at p=" + std::to_string(p));
    const Eigen::Vector3d dx = svd.solve(-r0);
    if (!dx.allFinite()) fail(ErrorKind::SingularJacobian, "non-finite Gauss-Newton step");

    double lambda = 1.0;
    // Keep steps local: at most half the distance scale of the seed.
    const double cap = 0.5 * std::max(1.0, std::abs(z));
    const double len = std::hypot(dx(0), dx(1));
    if (len > cap) lambda = cap / len;
    cplx zn = z + lambda * cplx(dx(0), dx(1));
    double pn = std::clamp(p + lambda * dx(2), opt.p_min, opt.p_max);
    for (int k = 0; k < 8; ++k) {
      if (residual(zn, pn).norm() < r0.norm()) break;
      lambda *= 0.5;
      zn = z + lambda * cplx(dx(0), dx(1));
      pn = std::clamp(p + lambda * dx(2), opt.p_min, opt.p_max);
    }
    const double step = std::abs(zn - z) / std::max(1.0, std::abs(z)) + std::abs(pn - p) / std::max(1.0, std::abs(p));
    z = zn;
    p = pn;
    if (step < 1e-13) break;
    if (step >= 0.5 * last_step && step < 1e-7) {
      if (++stalls >= 2) break;  // noise floor reached
    }
    last_step = step;
  }

  ExceptionalPoint ep;
  ep.parameter = p;
  ep.eigenvalue = z;
  const EpResiduals res = ep_residuals(f, z, p, opt.dfdz);
  ep.residual_f = res.f;
  ep.residual_df = res.df;
  if (!(res.f <= opt.tol && res.df <= opt.tol))
    fail(ErrorKind::NoConvergence, "double root not converged: residuals " + std::to_string(res.f) +
                                       ", " + std::to_string(res.df));
  return ep;
}

double bracketed_root(const std::function<double(double)>& f, double a, double b, double fa,
                      double fb, double rel_tol) {
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (fa * fb > 0) fail(ErrorKind::InvalidParameter, "root not bracketed");
  std::uintmax_t max_iter = 200;
  auto tol = [rel_tol](double x, double y) {
    return std::abs(x - y) <= rel_tol * std::max(1.0, std::min(std::abs(x), std::abs(y)));
  };
  auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, max_iter);
  return 0.5 * (r.first + r.second);
}

void symmetrize_conjugate_pairs(std::vector<cplx>& roots, double rel_tol) {
  std::vector<bool> used(roots.size(), false);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (used[i] || roots[i].imag() <= 0) continue;
    std::size_t best = roots.size();
    double best_d = rel_tol * std::max(1.0, std::abs(roots[i]));
    for (std::size_t j = 0; j < roots.size(); ++j) {
      if (used[j] || j == i || roots[j].imag() >= 0) continue;
      const double d = std::abs(roots[j] - std::conj(roots[i]));
      if (d <= best_d) best_d = d, best = j;
    }
    if (best == roots.size()) continue;
    const cplx m = 0.5 * (roots[i] + std::conj(roots[best]));
    roots[i] = m;
    roots[best] = std::conj(m);
    used[i] = used[best] = true;
  }
}

}  // namespace krein
