#include "krein/interp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "krein/branches.hpp"
#include "krein/errors.hpp"
#include "krein/ode.hpp"
#include "krein/parallel.hpp"
#include "krein/roots.hpp"

namespace krein {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// V(y) = G |y|^p e^{i sign(y) theta}, p = 2 + nu, theta = nu pi / 2.
struct Potential {
  double G, p, log_b;
  cplx phase;  // e^{i theta}
  bool constant;

  explicit Potential(const InterpParams& prm)
      : G(prm.G()), p(2.0 + prm.nu), log_b(std::log(prm.b)), phase(std::polar(1.0, prm.nu * kPi / 2)),
        constant(prm.nu == -2.0) {}

  cplx operator()(double y) const {
    if (constant) return -G;
    if (y == 0.0) return 0.0;
    const double m = G * std::pow(std::abs(y), p);
    return y > 0 ? m * phase : m * std::conj(phase);
  }

  // dV/dnu, G = g b^(4+nu) included.
  cplx d_nu(double y, cplx v) const {
    if (y == 0.0) return 0.0;
    const double s = y > 0 ? 1.0 : -1.0;
    return v * cplx(log_b + std::log(std::abs(y)), s * kPi / 2);
  }
};

OdeOptions ode_opts(const ShootingOptions& o) {
  OdeOptions oo;
  oo.rel_tol = o.rel_tol;
  oo.abs_tol = o.abs_tol;
  return oo;
}

bool by_re_im(cplx a, cplx b) { return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag()); }

}  // namespace

double InterpParams::G() const { return g * std::pow(b, 4.0 + nu); }

void InterpParams::validate() const {
  if (!(nu >= -2.0 && nu <= 0.0)) fail(ErrorKind::InvalidParameter, "nu must lie in [-2, 0], got " + num(nu));
  if (!(b > 0.0) || !std::isfinite(b)) fail(ErrorKind::InvalidParameter, "b must be positive, got " + num(b));
  if (!std::isfinite(g)) fail(ErrorKind::InvalidParameter, "g must be finite");
}

cplx potential(double y, const InterpParams& params) {
  if (!(y >= -1.0 && y <= 1.0)) fail(ErrorKind::InvalidParameter, "y outside [-1, 1]");
  return Potential(params)(y);
}

cplx shooting_determinant(cplx mu, const InterpParams& params, const ShootingOptions& options) {
  params.validate();
  const Potential V(params);
  using S = std::array<cplx, 2>;
  auto rhs = [&](double y, const S& s, S& d) {
    d[0] = s[1];
    d[1] = (V(y) - mu) * s[0];
  };
  DormandPrince<S, decltype(rhs)> st(rhs, -1.0, S{0.0, 1.0}, ode_opts(options));
  st.advance_to(0.0);
  st.advance_to(1.0);
  return st.state()[0];
}

ShootingDerivatives shooting_derivatives(cplx mu, const InterpParams& params, bool with_second, bool with_nu,
                                         const ShootingOptions& options) {
  params.validate();
  const Potential V(params);
  // (psi, psi', psi_mu, psi_mu', psi_mumu, psi_mumu', psi_nu, psi_nu')
  using S = std::array<cplx, 8>;
  auto rhs = [&](double y, const S& s, S& d) {
    const cplx v = V(y);
    const cplx w = v - mu;
    d[0] = s[1];
    d[1] = w * s[0];
    d[2] = s[3];
    d[3] = w * s[2] - s[0];
    if (with_second) {
      d[4] = s[5];
      d[5] = w * s[4] - 2.0 * s[2];
    } else {
      d[4] = d[5] = 0.0;
    }
    if (with_nu) {
      d[6] = s[7];
      d[7] = w * s[6] + V.d_nu(y, v) * s[0];
    } else {
      d[6] = d[7] = 0.0;
    }
  };
  S y0{};
  y0[1] = 1.0;
  DormandPrince<S, decltype(rhs)> st(rhs, -1.0, y0, ode_opts(options));
  st.advance_to(0.0);
  st.advance_to(1.0);
  const S& s = st.state();
  return {s[0], s[2], s[4], s[6]};
}

Rect interp_enclosure(const InterpParams& params, double re_max) {
  params.validate();
  const double G = params.G();
  const double theta = params.nu * kPi / 2;
  const double lo = kPi * kPi / 4 + std::min(0.0, G * std::cos(theta));
  const double h = std::abs(G * std::sin(theta));
  const double pad = 1.0 + 0.02 * std::abs(re_max - lo);
  return {lo - pad, re_max, -(h + pad), h + pad};
}

std::vector<cplx> eigenvalues_below(const InterpParams& params, double re_max) {
  const ShootingOptions so;
  const ComplexFn f = [&](cplx mu) { return shooting_determinant(mu, params, so); };
  Rect r = interp_enclosure(params, re_max);
  if (!(r.re_max > r.re_min)) return {};
  const int strips = std::clamp(int(std::sqrt(std::max(1.0, r.width())) / 2.0), 1, 4 * int(worker_count()));
  for (int attempt = 0;; ++attempt) {
    try {
      auto roots = find_roots_in_strips(f, r, strips);
      std::vector<cplx> out;
      for (cplx z : roots)
        if (z.real() <= re_max) out.push_back(is_real(z, 1e-10) ? cplx(z.real(), 0.0) : z);
      symmetrize_conjugate_pairs(out);
      std::sort(out.begin(), out.end(), by_re_im);
      return out;
    } catch (const SpectralError& e) {
      if (e.kind() != ErrorKind::RootOnContour || attempt >= 4) throw;
      r.re_max += 1e-3 * (attempt + 1) * std::max(1.0, std::abs(r.re_max));
    }
  }
}

std::vector<cplx> eigenvalues(const InterpParams& params, int count) {
  if (count < 1) fail(ErrorKind::InvalidParameter, "count must be >= 1");
  params.validate();
  const Rect base = interp_enclosure(params, 0.0);
  double R = std::abs(base.re_min) + (count + 1.0) * (count + 1.0) * kPi * kPi / 4 * 1.1 + 10.0;
  for (int round = 0; round < 12; ++round) {
    std::vector<cplx> all = eigenvalues_below(params, R);
    std::vector<cplx> inside;
    for (cplx z : all)
      if (std::abs(z) <= R) inside.push_back(z);
    if (int(inside.size()) >= count) {
      std::stable_sort(inside.begin(), inside.end(), [](cplx a, cplx b) {
        const double da = std::abs(a), db = std::abs(b);
        if (da != db) return da < db;
        return by_re_im(a, b);
      });
      std::vector<cplx> out(inside.begin(), inside.begin() + count);
      const cplx last = out.back();
      if (!is_real(last)) {
        bool has = false;
        for (cplx z : out)
          if (std::abs(z - std::conj(last)) <= 1e-7 * std::max(1.0, std::abs(last))) has = true;
        if (!has && int(inside.size()) > count) out.push_back(inside[count]);
      }
      symmetrize_conjugate_pairs(out);
      std::sort(out.begin(), out.end(), by_re_im);
      return out;
    }
    R *= 1.6;
  }
  fail(ErrorKind::IncompleteSpectrum, "could not enclose " + std::to_string(count) + " eigenvalues");
}

Eigenfunction eigenfunction(const InterpParams& params, cplx mu, int n_samples) {
  params.validate();
  if (n_samples < 3 || n_samples % 2 == 0) fail(ErrorKind::InvalidParameter, "n_samples must be odd and >= 3");
  const Potential V(params);
  using S = std::array<cplx, 2>;
  auto rhs = [&](double y, const S& s, S& d) {
    d[0] = s[1];
    d[1] = (V(y) - mu) * s[0];
  };
  const ShootingOptions so;
  DormandPrince<S, decltype(rhs)> st(rhs, -1.0, S{0.0, 1.0}, ode_opts(so));
  Eigenfunction ef;
  ef.eigenvalue = mu;
  const int half = n_samples / 2;
  for (int i = 0; i < n_samples; ++i) {
    // Exact mirror pairs: y_i = -y_{n-1-i}.
    const double y = i < half ? -1.0 + double(i) / half : (i == half ? 0.0 : 1.0 - double(n_samples - 1 - i) / half);
    st.advance_to(y);
    ef.y.push_back(y);
    ef.psi.push_back(st.state()[0]);
  }
  return ef;
}

KreinDiagnostic krein_inner_product_P(const Eigenfunction& ef) {
  const std::size_t n = ef.y.size();
  if (n < 3 || ef.psi.size() != n) fail(ErrorKind::AsymmetricGrid, "need >= 3 samples with matching values");
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(ef.y[i] + ef.y[n - 1 - i]) > 1e-12) fail(ErrorKind::AsymmetricGrid, "grid is not symmetric about 0");
    if (i + 1 < n && !(ef.y[i + 1] > ef.y[i])) fail(ErrorKind::AsymmetricGrid, "grid is not increasing");
  }
  KreinDiagnostic out;
  cplx acc{};
  double norm = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = 0.5 * (ef.y[i + 1] - ef.y[i]);
    acc += h * (std::conj(ef.psi[i]) * ef.psi[n - 1 - i] + std::conj(ef.psi[i + 1]) * ef.psi[n - 2 - i]);
    norm += h * (std::norm(ef.psi[i]) + std::norm(ef.psi[i + 1]));
  }
  out.value = acc;
  out.norm = norm;
  out.neutrality = norm > 0 ? std::abs(acc) / norm : 0.0;
  return out;
}

double supremum_bound_ks(double b, double nu, double g) {
  if (!(nu >= -2.0)) fail(ErrorKind::InvalidParameter, "supremum bound requires nu >= -2");
  if (!(b > 0.0)) fail(ErrorKind::InvalidParameter, "b must be positive");
  return 0.5 * (8.0 / (kPi * kPi) * std::abs(g) * std::pow(b, 4.0 + nu) - 1.0);
}

CriticalLevelReport critical_level_report(const InterpParams& params) {
  params.validate();
  const double ks = supremum_bound_ks(params.b, params.nu, params.g);
  const Rect base = interp_enclosure(params, 0.0);
  double R = std::abs(base.re_min) + 40.0;
  auto evaluate = [&](const std::vector<cplx>& lv, int& kc, int& ncomplex) {
    int last = -1;
    ncomplex = 0;
    for (int i = 0; i < int(lv.size()); ++i)
      if (!is_real(lv[i])) last = i, ++ncomplex;
    kc = last + 2;
    return int(lv.size()) - 1 - last >= 3;
  };
  for (int round = 0; round < 40; ++round) {
    std::vector<cplx> lv = eigenvalues_below(params, R);
    int kc = 1, nc = 0;
    if (evaluate(lv, kc, nc)) {
      // Confirm with a window at least twice as deep.
      const double R2 = 2.0 * R + 50.0;
      std::vector<cplx> lv2 = eigenvalues_below(params, R2);
      int kc2 = 1, nc2 = 0;
      if (evaluate(lv2, kc2, nc2) && kc2 == kc) return {kc, std::move(lv2), nc2};
      R = R2;
      continue;
    }
    if (double(lv.size()) > std::max(ks, 3.0) + 3.0)
      fail(ErrorKind::InsufficientDepth, "no real gap of three levels below k_s=" + num(ks));
    R = 1.5 * R + 20.0;
  }
  fail(ErrorKind::InsufficientDepth, "critical level search did not terminate");
}

int critical_level_kc(const InterpParams& params) { return critical_level_report(params).kc; }

SweepResult nu_sweep(double b, double g, const std::vector<double>& nu_grid, int n_levels) {
  if (nu_grid.empty()) fail(ErrorKind::InvalidParameter, "empty nu grid");
  for (double nu : nu_grid) InterpParams{nu, b, g}.validate();
  if (n_levels < 1) fail(ErrorKind::InvalidParameter, "n_levels must be >= 1");
  const std::vector<cplx> seeds = eigenvalues({nu_grid.front(), b, g}, n_levels);
  const ShootingOptions so;
  const FamilyFn family = [b, g, so](cplx mu, double nu) {
    return shooting_determinant(mu, {std::clamp(nu, -2.0, 0.0), b, g}, so);
  };
  TrackOptions to;
  to.parameter_name = "nu";
  to.ep_options.p_min = -2.0;
  to.ep_options.p_max = 0.0;
  TrackResult tr = track_branches(family, nu_grid, seeds, to);
  SweepResult res;
  res.model = "interp";
  res.parameter_name = "nu";
  res.fixed_params = {{"b", b}, {"g", g}, {"levels", double(n_levels)}};
  res.grid = nu_grid;
  res.branches = std::move(tr.branches);
  res.exceptional_points = std::move(tr.exceptional_points);
  res.warnings = std::move(tr.warnings);
  res.metadata = {{"eigenvalue_variable", "mu"},
                  {"shooting_rel_tol", num(so.rel_tol)},
                  {"shooting_abs_tol", num(so.abs_tol)},
                  {"reality_tol", num(kRealityTol)},
                  {"ep_tol", num(to.ep_options.tol)},
                  {"integrator", "dormand-prince-5(4)"}};
  return res;
}

ExceptionalPoint interp_ep_in_nu(double b, double g, cplx mu_guess, double nu_guess, double tol) {
  const ShootingOptions so;
  const FamilyFn f = [b, g, so](cplx mu, double nu) {
    return shooting_determinant(mu, {std::clamp(nu, -2.0, 0.0), b, g}, so);
  };
  DoubleRootOptions o;
  o.tol = tol;
  o.p_min = -2.0;
  o.p_max = 0.0;
  o.dfdz = [b, g, so](cplx mu, double nu) {
    return shooting_derivatives(mu, {std::clamp(nu, -2.0, 0.0), b, g}, false, false, so).d_mu;
  };
  return find_double_root(f, mu_guess, nu_guess, o);
}

ExceptionalPoint interp_ep_in_b(double nu, double g, cplx mu_guess, double b_guess, double tol) {
  const ShootingOptions so;
  const FamilyFn f = [nu, g, so](cplx mu, double b) { return shooting_determinant(mu, {nu, b, g}, so); };
  DoubleRootOptions o;
  o.tol = tol;
  o.p_min = 1e-6;
  o.dfdz = [nu, g, so](cplx mu, double b) { return shooting_derivatives(mu, {nu, b, g}, false, false, so).d_mu; };
  return find_double_root(f, mu_guess, b_guess, o);
}

namespace {

cplx d_db(double g, double mu, double nu, double b) {
  const double h = 1e-5 * b;
  return (shooting_determinant(mu, {nu, b + h, g}) - shooting_determinant(mu, {nu, b - h, g})) / (2 * h);
}

Eigen::Vector3d coalescence_system(double g, double mu, double nu, double b) {
  const auto d = shooting_derivatives(mu, {nu, b, g}, false, false);
  return {d.d.real(), d.d_mu.real(), d_db(g, mu, nu, b).real()};
}

}  // namespace

ExceptionalPoint interp_ep_coalescence(double g, double mu_guess, double nu_guess, double b_guess, double tol) {
  Eigen::Vector3d x(mu_guess, nu_guess, b_guess);
  auto clampx = [](Eigen::Vector3d& v) {
    v[1] = std::clamp(v[1], -2.0, 0.0);
    v[2] = std::max(v[2], 1e-6);
  };
  auto scale_of = [](const Eigen::Vector3d& v) { return Eigen::Vector3d(std::max(1.0, std::abs(v[0])), 1.0, std::max(1.0, v[2])); };
  Eigen::Vector3d F = coalescence_system(g, x[0], x[1], x[2]);
  bool converged = false;
  for (int it = 0; it < 40; ++it) {
    const Eigen::Vector3d sc = scale_of(x);
    Eigen::Matrix3d J;
    for (int k = 0; k < 3; ++k) {
      const double h = 1e-6 * sc[k];
      Eigen::Vector3d xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      J.col(k) = (coalescence_system(g, xp[0], xp[1], xp[2]) - coalescence_system(g, xm[0], xm[1], xm[2])) / (2 * h);
    }
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(J * sc.asDiagonal(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto s = svd.singularValues();
    if (!(s[2] > 1e-14 * s[0])) fail(ErrorKind::SingularJacobian, "degenerate coalescence system");
    Eigen::Vector3d dx = sc.asDiagonal() * svd.solve(-F);
    // Keep steps local: at most 5% in mu, 0.02 in nu, 0.2 in b.
    const double cap = std::max({std::abs(dx[0]) / (0.05 * sc[0]), std::abs(dx[1]) / 0.02, std::abs(dx[2]) / 0.2, 1.0});
    dx /= cap;
    Eigen::Vector3d xn = x + dx;
    clampx(xn);
    Eigen::Vector3d Fn = coalescence_system(g, xn[0], xn[1], xn[2]);
    double lam = 1.0;
    for (int k = 0; k < 8 && Fn.norm() > F.norm(); ++k) {
      lam *= 0.5;
      xn = x + lam * dx;
      clampx(xn);
      Fn = coalescence_system(g, xn[0], xn[1], xn[2]);
    }
    x = xn;
    F = Fn;
    if (std::abs(dx[0]) * lam <= 1e-11 * sc[0] && std::abs(dx[1]) * lam <= 1e-11 && std::abs(dx[2]) * lam <= 1e-11 * sc[2]) {
      converged = true;
      break;
    }
  }
  const double mu = x[0], nu = x[1], b = x[2];
  const FamilyFn fam = [nu, g](cplx m, double bb) { return shooting_determinant(m, {nu, bb, g}); };
  const EpResiduals r = ep_residuals(fam, mu, b);
  // dD/db scaled like dD/dmu in ep_residuals, with a unit b-length of 1e-2.
  const double ell = 1e-2 * std::max(1.0, std::abs(mu));
  double S = 0.0;
  for (int k = 0; k < 4; ++k) S = std::max(S, std::abs(shooting_determinant(mu + ell * std::pow(cplx(0, 1), k), {nu, b, g})));
  const double r_b = std::abs(d_db(g, mu, nu, b)) * 1e-2 / std::max(S, 1e-300);
  ExceptionalPoint ep;
  ep.parameter = nu;
  ep.parameter2 = b;
  ep.eigenvalue = mu;
  ep.residual_f = r.f;
  ep.residual_df = std::max(r.df, r_b);
  if (!converged || ep.residual_f > tol || ep.residual_df > tol)
    fail(ErrorKind::NoConvergence, "coalescence Newton stalled at (mu, nu, b)=(" + num(mu) + ", " + num(nu) + ", " +
                                       num(b) + ") residuals " + num(ep.residual_f) + ", " + num(ep.residual_df));
  return ep;
}

ExceptionalPoint interp_follow_to_coalescence(double g, double mu_start, double nu_start, double b_start, double b_step,
                                              double b_max) {
  double mu = mu_start, nu = nu_start, b = b_start;
  double mu_prev = mu, nu_prev = nu, b_prev = b;
  bool has_prev = false;
  double h = b_step;
  while (b + h <= b_max && h > 1e-4 * b_step) {
    const double bn = b + h;
    // Linear prediction along the curve.
    double mu_p = mu, nu_p = nu;
    if (has_prev && b != b_prev) {
      mu_p += (mu - mu_prev) * (bn - b) / (b - b_prev);
      nu_p += (nu - nu_prev) * (bn - b) / (b - b_prev);
    }
    try {
      const ExceptionalPoint ep = interp_ep_in_nu(bn, g, mu_p, std::clamp(nu_p, -2.0, 0.0));
      if (std::abs(ep.parameter - nu) > 0.05 || std::abs(ep.eigenvalue.real() - mu) > 0.1 * std::max(1.0, std::abs(mu)))
        throw SpectralError(ErrorKind::NoConvergence, "jumped");
      const double nu_new = ep.parameter;
      if (has_prev && (nu - nu_prev) * (nu_new - nu) < 0) {
        // nu passed its extremum between b_prev and bn; seed from the vertex of the parabola.
        const double d1 = (nu - nu_prev) / (b - b_prev), d2 = (nu_new - nu) / (bn - b);
        const double curv = (d2 - d1) / (0.5 * (bn - b_prev));
        const double b_star = 0.5 * (b_prev + b) - d1 / curv;
        return interp_ep_coalescence(g, mu + (ep.eigenvalue.real() - mu) * (b_star - b) / (bn - b), nu, b_star);
      }
      mu_prev = mu, nu_prev = nu, b_prev = b;
      has_prev = true;
      mu = ep.eigenvalue.real(), nu = nu_new, b = bn;
    } catch (const SpectralError& e) {
      if (e.kind() != ErrorKind::NoConvergence && e.kind() != ErrorKind::SingularJacobian) throw;
      h *= 0.5;
    }
  }
  fail(ErrorKind::NoConvergence, "exceptional-point curve has no nu extremum below b=" + num(b_max));
}

}  // namespace krein
