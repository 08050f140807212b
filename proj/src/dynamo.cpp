#include "krein/dynamo.hpp"

#include <algorithm>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "krein/branches.hpp"
#include "krein/errors.hpp"
#include "krein/ode.hpp"
#include "krein/parallel.hpp"

namespace krein {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

bool by_growth(cplx a, cplx b) { return a.real() > b.real() || (a.real() == b.real() && a.imag() > b.imag()); }

using Pair = std::array<cplx, 8>;

// f-variable system (f1, f1', f2, f2').
struct FRhs {
  const DynamoParams* p;
  cplx lambda;
  double L;

  void operator()(double r, const DynamoState& s, DynamoState& d) const {
    const auto [a, ap] = alpha_eval(r, p->profile);
    const double c = L / (r * r);
    const cplx f1pp = (c + lambda) * s[0] - a * s[2];
    d[0] = s[1];
    d[1] = f1pp;
    d[2] = s[3];
    d[3] = (c + lambda) * s[2] + ap * s[1] + a * f1pp - a * c * s[0];
  }
};

// Same equations for g = f / r^m, m = l + 1, where the l(l+1)/r^2 terms cancel:
//   g1'' = -2m/r g1' + lambda g1 - alpha g2
//   g2'' = -2m/r g2' + lambda g2 + alpha' (g1' + m g1 / r) + alpha (g1'' + 2m/r g1')
// State (g1, g1', g2, g2'), one block per regular solution.
struct GRhs {
  const DynamoParams* p;
  cplx lambda;
  double m;

  void one(double r, double a, double ap, const cplx* s, cplx* d) const {
    const double q = 2.0 * m / r;
    const cplx g1pp = -q * s[1] + lambda * s[0] - a * s[2];
    d[0] = s[1];
    d[1] = g1pp;
    d[2] = s[3];
    d[3] = -q * s[3] + lambda * s[2] + ap * (s[1] + m * s[0] / r) + a * (g1pp + q * s[1]);
  }
  void operator()(double r, const Pair& s, Pair& d) const {
    const auto [a, ap] = alpha_eval(r, p->profile);
    one(r, a, ap, s.data(), d.data());
    one(r, a, ap, s.data() + 4, d.data() + 4);
  }
  void operator()(double r, const DynamoState& s, DynamoState& d) const {
    const auto [a, ap] = alpha_eval(r, p->profile);
    one(r, a, ap, s.data(), d.data());
  }
};

DynamoState g_from_f(double r, int l, const DynamoState& f) {
  const double m = l + 1, w = std::pow(r, -m);
  return {f[0] * w, (f[1] - m * f[0] / r) * w, f[2] * w, (f[3] - m * f[2] / r) * w};
}

DynamoState f_from_g(double r, int l, const DynamoState& g) {
  const double m = l + 1, w = std::pow(r, m);
  return {g[0] * w, (g[1] + m * g[0] / r) * w, g[2] * w, (g[3] + m * g[2] / r) * w};
}

OdeOptions ode_opts(const DynamoParams& p) {
  OdeOptions o;
  o.rel_tol = p.rel_tol;
  o.abs_tol = 1e-2 * p.rel_tol;
  return o;
}

std::array<std::array<cplx, 2>, 2> residual_matrix(const std::array<DynamoState, 2>& s, const DynamoParams& p,
                                                   bool adjoint) {
  std::array<std::array<cplx, 2>, 2> m{};
  const double a1 = alpha_eval(1.0, p.profile).first;
  for (int j = 0; j < 2; ++j) {
    const DynamoState& v = s[j];
    if (p.bc == DynamoBC::Idealized) {
      m[0][j] = v[0];
      m[1][j] = v[2];
    } else if (!adjoint) {
      m[0][j] = v[1] + double(p.l) * v[0];
      m[1][j] = v[2];
    } else {
      m[0][j] = v[0];
      m[1][j] = v[3] + double(p.l) * v[2] - a1 * v[1];
    }
  }
  return m;
}

DynamoEigenfunction sampled_solution(const DynamoParams& params, cplx lambda, int n_samples, bool adjoint) {
  params.validate();
  if (n_samples < 3) fail(ErrorKind::InvalidParameter, "n_samples must be >= 3");
  const auto shots = dynamo_shoot(lambda, params);
  const auto m = residual_matrix(shots, params, adjoint);
  const double n0 = std::hypot(std::abs(m[0][0]), std::abs(m[0][1]));
  const double n1 = std::hypot(std::abs(m[1][0]), std::abs(m[1][1]));
  std::array<cplx, 2> c = n0 >= n1 ? std::array<cplx, 2>{m[0][1], -m[0][0]} : std::array<cplx, 2>{m[1][1], -m[1][0]};
  if (std::abs(c[0]) + std::abs(c[1]) == 0.0) c = {1.0, 0.0};
  const auto seeds = regular_solutions_seed(params.r0, params.l);
  DynamoState y0{};
  for (int k = 0; k < 4; ++k) y0[k] = c[0] * seeds[0][k] + c[1] * seeds[1][k];
  const GRhs rhs{&params, lambda, params.l + 1.0};
  DormandPrince<DynamoState, GRhs> st(rhs, params.r0, g_from_f(params.r0, params.l, y0), ode_opts(params));
  DynamoEigenfunction ef;
  ef.eigenvalue = lambda;
  for (int i = 0; i < n_samples; ++i) {
    const double r = i + 1 == n_samples ? 1.0 : params.r0 + (1.0 - params.r0) * double(i) / (n_samples - 1);
    st.advance_to(r);
    ef.r.push_back(r);
    const DynamoState f = f_from_g(r, params.l, st.state());
    ef.phi1.push_back(f[0] / r);
    ef.phi2.push_back(f[2] / r);
  }
  double big = 0.0;
  cplx ph = 1.0;
  for (std::size_t i = 0; i < ef.r.size(); ++i)
    for (cplx v : {ef.phi1[i], ef.phi2[i]})
      if (std::abs(v) > big) big = std::abs(v), ph = v;
  if (big > 0) {
    const cplx s = 1.0 / ph;
    for (auto& v : ef.phi1) v *= s;
    for (auto& v : ef.phi2) v *= s;
  }
  return ef;
}

void check_grid(const std::vector<double>& r, std::size_t n1, std::size_t n2) {
  if (r.size() < 2 || n1 != r.size() || n2 != r.size())
    fail(ErrorKind::GridMismatch, "samples and grid differ in length");
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i] > 0.0) || r[i] > 1.0 + 1e-12) fail(ErrorKind::GridMismatch, "grid leaves (0, 1]");
    if (i + 1 < r.size() && !(r[i + 1] > r[i])) fail(ErrorKind::GridMismatch, "grid is not increasing");
  }
}

}  // namespace

AlphaProfile AlphaProfile::quartic(double C) { return {{1.0, 0.0, -26.09, 53.64, -28.22}, C}; }

AlphaProfile AlphaProfile::constant(double alpha0) { return {{1.0}, alpha0}; }

AlphaProfile AlphaProfile::from_text(const std::string& text, double C) {
  AlphaProfile p;
  p.scale = C;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    const std::string tok = line.substr(b, e - b + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size() || !std::isfinite(v))
      fail(ErrorKind::ParseError, "profile line " + std::to_string(lineno) + ": '" + tok + "' is not a number");
    p.coefficients.push_back(v);
  }
  if (p.coefficients.empty()) fail(ErrorKind::ParseError, "profile has no coefficients");
  return p;
}

AlphaProfile AlphaProfile::from_file(const std::string& path, double C) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ParseError, "cannot open profile file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str(), C);
}

AlphaProfile AlphaProfile::parse(const std::string& name, double C) {
  if (name == "quartic") return quartic(C);
  if (name.rfind("constant:", 0) == 0) {
    const std::string v = name.substr(9);
    std::size_t used = 0;
    double a = 0.0;
    try {
      a = std::stod(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (v.empty() || used != v.size()) fail(ErrorKind::ParseError, "bad constant profile '" + name + "'");
    return {{a}, C};
  }
  return from_file(name, C);
}

AlphaProfile AlphaProfile::with_scale(double C) const {
  AlphaProfile p = *this;
  p.scale = C;
  return p;
}

double AlphaProfile::max_abs() const {
  double m = 0.0;
  for (int i = 0; i <= 2000; ++i) m = std::max(m, std::abs(alpha_eval(i / 2000.0, *this).first));
  return m;
}

std::pair<double, double> alpha_eval(double r, const AlphaProfile& profile) {
  double a = 0.0, ap = 0.0;
  for (std::size_t k = profile.coefficients.size(); k-- > 0;) {
    ap = ap * r + a;
    a = a * r + profile.coefficients[k];
  }
  return {profile.scale * a, profile.scale * ap};
}

const char* to_string(DynamoBC bc) noexcept { return bc == DynamoBC::Idealized ? "idealized" : "realistic"; }

DynamoBC parse_dynamo_bc(const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char ch) { return char(std::tolower(ch)); });
  if (t == "idealized") return DynamoBC::Idealized;
  if (t == "realistic") return DynamoBC::Realistic;
  fail(ErrorKind::ParseError, "unknown boundary condition '" + text + "'");
}

void DynamoParams::validate() const {
  if (l < 1) fail(ErrorKind::InvalidParameter, "l must be >= 1");
  if (!(r0 > 0.0) || r0 > 1e-3) fail(ErrorKind::InvalidParameter, "r0 must lie in (0, 1e-3]");
  if (!(rel_tol > 0.0)) fail(ErrorKind::InvalidParameter, "rel_tol must be positive");
  if (profile.coefficients.empty()) fail(ErrorKind::InvalidParameter, "empty alpha profile");
  if (!std::isfinite(profile.scale)) fail(ErrorKind::InvalidParameter, "non-finite profile scale");
  for (double c : profile.coefficients)
    if (!std::isfinite(c)) fail(ErrorKind::InvalidParameter, "non-finite profile coefficient");
}

DynamoState dynamo_rhs(double r, const DynamoState& state, cplx lambda, const DynamoParams& params) {
  if (!(r > 0.0)) fail(ErrorKind::RadiusAtZero, "dynamo_rhs needs r > 0; start from regular_solutions_seed");
  const FRhs rhs{&params, lambda, double(params.l) * (params.l + 1)};
  DynamoState d{};
  rhs(r, state, d);
  return d;
}

std::array<DynamoState, 2> regular_solutions_seed(double r0, int l) {
  const double v = std::pow(r0, l + 1), dv = (l + 1) * std::pow(r0, l);
  return {DynamoState{v, dv, 0.0, 0.0}, DynamoState{0.0, 0.0, v, dv}};
}

std::array<DynamoState, 2> dynamo_shoot(cplx lambda, const DynamoParams& params) {
  params.validate();
  const auto seeds = regular_solutions_seed(params.r0, params.l);
  Pair y0{};
  for (int j = 0; j < 2; ++j) {
    const DynamoState g = g_from_f(params.r0, params.l, seeds[j]);
    std::copy(g.begin(), g.end(), y0.begin() + 4 * j);
  }
  const GRhs rhs{&params, lambda, params.l + 1.0};
  const Pair y = integrate<Pair>(rhs, params.r0, 1.0, y0, ode_opts(params));
  std::array<DynamoState, 2> out{};
  for (int j = 0; j < 2; ++j) {
    DynamoState g;
    std::copy(y.begin() + 4 * j, y.begin() + 4 * j + 4, g.begin());
    out[j] = f_from_g(1.0, params.l, g);
  }
  return out;
}

std::array<std::array<cplx, 2>, 2> dynamo_boundary_matrix(cplx lambda, const DynamoParams& params) {
  return residual_matrix(dynamo_shoot(lambda, params), params, false);
}

cplx dynamo_determinant(cplx lambda, const DynamoParams& params) {
  const auto m = dynamo_boundary_matrix(lambda, params);
  return m[0][0] * m[1][1] - m[0][1] * m[1][0];
}

Rect dynamo_enclosure(const DynamoParams& params, double re_min) {
  params.validate();
  const double A = params.profile.max_abs();
  // Re lambda <= A^2/4 holds for both boundary conditions.
  const double re_max = 0.25 * A * A + 1.0;
  const double h = A * std::sqrt(std::max(1.0, std::abs(re_min))) + A + 10.0;
  return {std::min(re_min, re_max - 1.0), re_max, -h, h};
}

namespace {

ContourOptions dynamo_contour_options() {
  ContourOptions co;
  co.max_sample_spacing = 5.0;
  return co;
}

}  // namespace

std::vector<cplx> dynamo_spectrum_above(const DynamoParams& params, double re_min) {
  params.validate();
  const ComplexFn f = [&params](cplx z) { return dynamo_determinant(z, params); };
  Rect r = dynamo_enclosure(params, re_min);
  const ContourOptions co = dynamo_contour_options();
  int grown = 0;
  for (int attempt = 0;; ++attempt) {
    try {
      const int strips = std::clamp(int(r.width() / 100.0) + 1, 1, 4 * int(worker_count()));
      auto roots = find_roots_in_strips(f, r, strips, co);
      // The height is not a proven bound: nothing may sit in the bands above and below.
      const double h = r.im_max;
      const int band = count_roots_adaptive(f, {r.re_min, r.re_max, h, 2.0 * h}, co);
      if (band != 0) {
        if (++grown > 4) fail(ErrorKind::IncompleteSpectrum, "eigenvalues outside every enclosure tried");
        r.im_min = -2.0 * h;
        r.im_max = 2.0 * h;
        continue;
      }
      std::vector<cplx> out;
      for (cplx z : roots)
        if (z.real() >= re_min) out.push_back(is_real(z, 1e-10) ? cplx(z.real(), 0.0) : z);
      symmetrize_conjugate_pairs(out);
      std::sort(out.begin(), out.end(), by_growth);
      return out;
    } catch (const SpectralError& e) {
      if (e.kind() != ErrorKind::RootOnContour || attempt >= 6) throw;
      r.re_min -= 1e-3 * (attempt + 1) * std::max(1.0, std::abs(r.re_min));
    }
  }
}

std::vector<cplx> dynamo_spectrum(const DynamoParams& params, int count) {
  if (count < 1) fail(ErrorKind::InvalidParameter, "count must be >= 1");
  params.validate();
  const double A = params.profile.max_abs();
  const double kmax = (count / 2.0 + 1.0 + params.l / 2.0) * kPi;
  double re_min = -(kmax * kmax) - A * kmax - 10.0;
  for (int round = 0; round < 8; ++round) {
    const std::vector<cplx> all = dynamo_spectrum_above(params, re_min);
    if (int(all.size()) > count) {
      std::vector<cplx> out(all.begin(), all.begin() + count);
      const cplx last = out.back();
      if (!is_real(last) && last.imag() > 0 && std::abs(all[count] - std::conj(last)) <= 1e-7 * std::max(1.0, std::abs(last)))
        out.push_back(all[count]);
      return out;
    }
    re_min = 1.5 * re_min - 20.0;
  }
  fail(ErrorKind::IncompleteSpectrum, "could not enclose " + std::to_string(count) + " eigenvalues");
}

SweepResult c_sweep(const DynamoParams& params, const std::vector<double>& c_grid, int n_levels) {
  params.validate();
  if (c_grid.empty()) fail(ErrorKind::InvalidParameter, "empty C grid");
  if (n_levels < 1) fail(ErrorKind::InvalidParameter, "n_levels must be >= 1");
  const std::vector<cplx> seeds = dynamo_spectrum(params.profile.scale == c_grid.front()
                                                      ? params
                                                      : DynamoParams{params.l, params.profile.with_scale(c_grid.front()),
                                                                     params.bc, params.r0, params.rel_tol},
                                                  n_levels);
  const DynamoParams base = params;
  const FamilyFn family = [base](cplx z, double C) {
    DynamoParams p = base;
    p.profile.scale = C;
    return dynamo_determinant(z, p);
  };
  TrackOptions to;
  to.parameter_name = "C";
  TrackResult tr = track_branches(family, c_grid, seeds, to);
  SweepResult res;
  res.model = "dynamo";
  res.parameter_name = "C";
  res.fixed_params = {{"l", double(params.l)},
                      {"bc", params.bc == DynamoBC::Idealized ? 0.0 : 1.0},
                      {"r0", params.r0},
                      {"levels", double(n_levels)}};
  for (std::size_t k = 0; k < params.profile.coefficients.size(); ++k)
    res.fixed_params["coef" + std::to_string(k)] = params.profile.coefficients[k];
  res.grid = c_grid;
  res.branches = std::move(tr.branches);
  res.exceptional_points = std::move(tr.exceptional_points);
  res.warnings = std::move(tr.warnings);
  res.metadata = {{"eigenvalue_variable", "lambda"},
                  {"boundary_conditions", to_string(params.bc)},
                  {"shooting_rel_tol", num(params.rel_tol)},
                  {"reality_tol", num(kRealityTol)},
                  {"ep_tol", num(to.ep_options.tol)},
                  {"integrator", "dormand-prince-5(4)"}};
  return res;
}

double spherical_bessel_zero(int l, int n) {
  if (l < 0 || n < 1) fail(ErrorKind::InvalidParameter, "need l >= 0 and n >= 1");
  return boost::math::cyl_bessel_j_zero(l + 0.5, n);
}

std::pair<cplx, cplx> constant_alpha_oracle(double alpha0, int l, int n) {
  const double k = spherical_bessel_zero(l, n);
  return {cplx(-k * k + alpha0 * k, 0.0), cplx(-k * k - alpha0 * k, 0.0)};
}

DynamoEigenfunction dynamo_eigenfunction(const DynamoParams& params, cplx lambda, int n_samples) {
  return sampled_solution(params, lambda, n_samples, false);
}

DynamoEigenfunction dynamo_adjoint_eigenfunction(const DynamoParams& params, cplx lambda, int n_samples) {
  return sampled_solution(params, lambda, n_samples, true);
}

KreinDiagnostic krein_inner_product_J(const std::vector<double>& r, const std::vector<cplx>& phi1,
                                      const std::vector<cplx>& phi2, DynamoBC bc) {
  check_grid(r, phi1.size(), phi2.size());
  cplx acc{};
  double norm = 0.0;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    const double h = 0.5 * (r[i + 1] - r[i]);
    for (std::size_t j : {i, i + 1}) {
      const double w = h * r[j] * r[j];
      acc += w * (std::conj(phi1[j]) * phi2[j] + std::conj(phi2[j]) * phi1[j]);
      norm += w * (std::norm(phi1[j]) + std::norm(phi2[j]));
    }
  }
  KreinDiagnostic out;
  out.value = acc;
  out.norm = norm;
  out.neutrality = norm > 0 ? std::abs(acc) / norm : 0.0;
  out.warning = bc == DynamoBC::Realistic;
  return out;
}

KreinDiagnostic krein_inner_product_J(const DynamoEigenfunction& phi, DynamoBC bc) {
  return krein_inner_product_J(phi.r, phi.phi1, phi.phi2, bc);
}

KreinDiagnostic dynamo_neutrality(const DynamoParams& params, cplx lambda, int n_samples) {
  const DynamoEigenfunction f = dynamo_eigenfunction(params, lambda, n_samples);
  const DynamoEigenfunction h = dynamo_adjoint_eigenfunction(params, lambda, n_samples);
  cplx acc{};
  double nf = 0.0, nh = 0.0;
  for (std::size_t i = 0; i + 1 < f.r.size(); ++i) {
    const double dr = 0.5 * (f.r[i + 1] - f.r[i]);
    for (std::size_t j : {i, i + 1}) {
      const double w = dr * f.r[j] * f.r[j];
      acc += w * (h.phi2[j] * f.phi1[j] + h.phi1[j] * f.phi2[j]);
      nf += w * (std::norm(f.phi1[j]) + std::norm(f.phi2[j]));
      nh += w * (std::norm(h.phi1[j]) + std::norm(h.phi2[j]));
    }
  }
  KreinDiagnostic out;
  out.value = acc;
  out.norm = std::sqrt(nf * nh);
  out.neutrality = out.norm > 0 ? std::abs(acc) / out.norm : 0.0;
  return out;
}

std::pair<cplx, cplx> transform_to_diagonal_metric(cplx phi1, cplx phi2) {
  const double s = 1.0 / std::sqrt(2.0);
  return {s * (phi2 + phi1), s * (phi2 - phi1)};
}

DiagonalMetricCheck diagonal_metric_identity(const std::vector<double>& r, const std::vector<cplx>& phi1,
                                             const std::vector<cplx>& phi2) {
  const KreinDiagnostic j = krein_inner_product_J(r, phi1, phi2);
  double mu = 0.0;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    const double h = 0.5 * (r[i + 1] - r[i]);
    for (std::size_t k : {i, i + 1}) {
      const auto [p, m] = transform_to_diagonal_metric(phi1[k], phi2[k]);
      mu += h * r[k] * r[k] * (std::norm(p) - std::norm(m));
    }
  }
  DiagonalMetricCheck out;
  out.j_form = j.value;
  out.mu_form = mu;
  out.difference = std::abs(j.value - out.mu_form) / std::max(j.norm, 1e-300);
  return out;
}

}  // namespace krein
