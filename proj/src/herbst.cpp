#include "krein/herbst.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>
#include <string>

#include "krein/airy.hpp"
#include "krein/branches.hpp"
#include "krein/errors.hpp"
#include "krein/parallel.hpp"
#include "krein/roots.hpp"

namespace krein {

namespace {

const cplx kEiPi3 = std::polar(1.0, kPi / 3);

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

bool by_re_im(cplx a, cplx b) { return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag()); }

void check_b(double b) {
  if (!(b > 0.0) || !std::isfinite(b)) fail(ErrorKind::InvalidParameter, "b must be positive, got " + num(b));
}

// Ai(r xi) and d/dE Ai(r xi) at xi+ (k = 0) and xi- (k = 1) for r = 1, q^2, q,
// as mantissas with a common factor exp(l).
struct AirySet {
  std::array<std::array<cplx, 2>, 3> v, d, l;
};

AirySet airy_set(cplx E, double b) {
  AirySet s;
  const cplx x[2] = {xi(1.0, b, E), xi(-1.0, b, E)};
  const AiryRotation rot[3] = {AiryRotation::Identity, AiryRotation::Q2, AiryRotation::Q};
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 2; ++k) {
      const ScaledAiryValues a = airy_rotated_scaled(x[k], rot[j]);
      s.v[j][k] = a.ai;
      s.d[j][k] = -kEiPi3 * a.ai_prime;  // d xi / dE = -e^{i pi/3}
      s.l[j][k] = a.log_scale;
    }
  return s;
}

double log_abs(cplx mantissa, cplx log_scale) {
  return std::log(std::abs(mantissa)) + log_scale.real();
}

// Pairs (i, j) and the factor c with Delta_standard = c * Delta_ij.
struct PairChoice {
  int i, j;
  cplx factor;
};

const std::array<PairChoice, 3>& pair_choices() {
  static const cplx q = airy_q();
  static const std::array<PairChoice, 3> c = {
      PairChoice{0, 1, 1.0}, PairChoice{0, 2, -q * q}, PairChoice{2, 1, -q}};
  return c;
}

int best_pair(const AirySet& s) {
  int best = 0;
  double best_m = std::numeric_limits<double>::infinity();
  for (int p = 0; p < 3; ++p) {
    const auto& c = pair_choices()[p];
    const double m = std::max(log_abs(s.v[c.i][0] * s.v[c.j][1], s.l[c.i][0] + s.l[c.j][1]),
                              log_abs(s.v[c.i][1] * s.v[c.j][0], s.l[c.i][1] + s.l[c.j][0]));
    if (m < best_m) best_m = m, best = p;
  }
  return best;
}

cplx finite_or_fail(cplx z, double b, cplx E) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    fail(ErrorKind::AccuracyLoss, "Airy determinant overflows at b=" + num(b) + ", E=(" + num(E.real()) + ", " +
                                      num(E.imag()) + ")");
  return z;
}

// c * (A_i(xi+) A_j(xi-) - A_i(xi-) A_j(xi+)) and its E-derivative.
std::pair<cplx, cplx> pair_determinant(const AirySet& s, const PairChoice& c, bool with_derivative) {
  const cplx e1 = std::exp(s.l[c.i][0] + s.l[c.j][1]);
  const cplx e2 = std::exp(s.l[c.i][1] + s.l[c.j][0]);
  const cplx value = c.factor * (e1 * s.v[c.i][0] * s.v[c.j][1] - e2 * s.v[c.i][1] * s.v[c.j][0]);
  if (!with_derivative) return {value, 0.0};
  const cplx deriv = c.factor * (e1 * (s.d[c.i][0] * s.v[c.j][1] + s.v[c.i][0] * s.d[c.j][1]) -
                                 e2 * (s.d[c.i][1] * s.v[c.j][0] + s.v[c.i][1] * s.d[c.j][0]));
  return {value, deriv};
}

std::vector<cplx> select_smallest(std::vector<cplx> inside, int count) {
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
  std::sort(out.begin(), out.end(), by_re_im);
  return out;
}

}  // namespace

void HerbstParams::validate() const { check_b(b); }

cplx xi(double y, double b, cplx E) { return kEiPi3 * (cplx(0, -b * y) - E); }

cplx herbst_determinant_basis(cplx E, double b, HerbstBasis basis) {
  check_b(b);
  const AirySet s = airy_set(E, b);
  const PairChoice c = basis == HerbstBasis::Standard ? PairChoice{0, 1, 1.0} : PairChoice{0, 2, 1.0};
  return finite_or_fail(pair_determinant(s, c, false).first, b, E);
}

cplx herbst_determinant(cplx E, double b) {
  check_b(b);
  const AirySet s = airy_set(E, b);
  return finite_or_fail(pair_determinant(s, pair_choices()[best_pair(s)], false).first, b, E);
}

cplx herbst_determinant_dE(cplx E, double b) {
  check_b(b);
  const AirySet s = airy_set(E, b);
  return finite_or_fail(pair_determinant(s, pair_choices()[best_pair(s)], true).second, b, E);
}

Rect herbst_enclosure(double b, double re_max) {
  check_b(b);
  const double lo = kPi * kPi / (4 * b * b);
  const double pad = 0.1 + 0.02 * std::abs(re_max - lo);
  return {lo - pad, re_max, -(b + pad), b + pad};
}

std::vector<cplx> herbst_spectrum_below(double b, double re_max) {
  Rect r = herbst_enclosure(b, re_max);
  if (!(r.re_max > r.re_min)) return {};
  const ComplexFn f = [b](cplx E) { return herbst_determinant(E, b); };
  ContourOptions co;
  co.newton.derivative = [b](cplx E) { return herbst_determinant_dE(E, b); };
  const int strips = std::clamp(int(r.width() / std::max(0.5, b / 2)), 1, 4 * int(worker_count()));
  for (int attempt = 0;; ++attempt) {
    try {
      auto roots = find_roots_in_strips(f, r, strips, co);
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

std::vector<cplx> herbst_spectrum(double b, int count) {
  check_b(b);
  if (count < 1) fail(ErrorKind::InvalidParameter, "count must be >= 1");
  double R = b + (count + 1.0) * (count + 1.0) * kPi * kPi / (4 * b * b) + 1.0;
  for (int round = 0; round < 12; ++round) {
    std::vector<cplx> inside;
    for (cplx z : herbst_spectrum_below(b, R))
      if (std::abs(z) <= R) inside.push_back(z);
    if (int(inside.size()) >= count) return select_smallest(std::move(inside), count);
    R *= 1.6;
  }
  fail(ErrorKind::IncompleteSpectrum, "could not enclose " + std::to_string(count) + " Herbst eigenvalues");
}

CrossingEstimate crossing_estimate(int n) {
  const double s = std::abs(airy_zeros(n).back());
  return {s * std::sqrt(3.0) / 2, s / 2};
}

namespace {

// Real roots of Delta on [e_lo, e_hi] from sign changes of the real part (Delta is real on the real axis).
std::vector<double> real_roots(double b, double e_lo, double e_hi, int samples) {
  std::vector<double> roots;
  auto f = [b](double E) { return herbst_determinant(E, b).real(); };
  double x0 = e_lo, f0 = f(x0);
  for (int k = 1; k <= samples; ++k) {
    const double x1 = e_lo + (e_hi - e_lo) * k / samples, f1 = f(x1);
    if (f0 == 0.0) roots.push_back(x0);
    else if (f0 * f1 < 0) roots.push_back(bracketed_root(f, x0, x1, f0, f1, 1e-14));
    x0 = x1, f0 = f1;
  }
  return roots;
}

}  // namespace

namespace {

// Double root where the lowest real pair at b_start merges.
ExceptionalPoint merge_of_lowest_pair(double b_start, double e_hi) {
  std::vector<double> r = real_roots(b_start, 1e-6, e_hi, 1500);
  if (r.size() < 2) fail(ErrorKind::NoConvergence, "fewer than two real levels at b=" + num(b_start));
  double b_lo = b_start, e1 = r[0], e2 = r[1], b_hi = 0.0;
  auto window = [&](double lo_root, double hi_root, double b, int samples) {
    const double w = hi_root - lo_root;
    return real_roots(b, std::max(1e-6, lo_root - w - 1e-3), hi_root + w + 1e-3, samples);
  };
  const double h = 0.02;
  for (double b = b_lo + h; b < 4.0 * b_start + 10.0; b += h) {
    r = window(e1, e2, b, 200);
    if (r.size() >= 2) {
      b_lo = b, e1 = r[0], e2 = r[1];
      continue;
    }
    b_hi = b;
    break;
  }
  if (b_hi == 0.0) fail(ErrorKind::NoConvergence, "real pair did not merge");
  for (int it = 0; it < 24; ++it) {
    const double bm = 0.5 * (b_lo + b_hi);
    r = window(e1, e2, bm, 100);
    if (r.size() >= 2) b_lo = bm, e1 = r[0], e2 = r[1];
    else b_hi = bm;
  }
  const FamilyFn f = [](cplx E, double b) { return herbst_determinant(E, b); };
  DoubleRootOptions o;
  o.tol = 1e-6;
  o.dfdz = [](cplx E, double b) { return herbst_determinant_dE(E, b); };
  o.p_min = 1e-3;
  return find_double_root(f, 0.5 * (e1 + e2), 0.5 * (b_lo + b_hi), o);
}

}  // namespace

std::vector<HerbstCrossing> crossings_exact(int n_max) {
  if (n_max < 1) fail(ErrorKind::InvalidParameter, "crossing index must be >= 1");
  // Crossings are found in order; pair k is the lowest real pair just above crossing k-1.
  std::vector<HerbstCrossing> all;
  double b_start = 0.8 * crossing_estimate(1).b;
  for (int k = 1; k <= n_max; ++k) {
    HerbstCrossing out;
    out.estimate = crossing_estimate(k);
    out.ep = merge_of_lowest_pair(b_start, 3.0 * out.estimate.E + 4.0);
    b_start = out.ep.parameter + 0.01;
    const AirySet s = airy_set(out.ep.eigenvalue, out.ep.parameter);
    for (int j = 0; j < 2; ++j) {
      const cplx ratio = s.v[j][0] / s.v[j][1] * std::exp(s.l[j][0] - s.l[j][1]);
      out.residual_plus = std::max(out.residual_plus, std::abs(ratio - 1.0));
      out.residual_minus = std::max(out.residual_minus, std::abs(ratio + 1.0));
    }
    out.sign = out.residual_plus <= out.residual_minus ? 1 : -1;
    all.push_back(out);
  }
  return all;
}

HerbstCrossing crossing_exact(int n) { return crossings_exact(n).back(); }

double lowest_real_mode_bound_ka(double b) {
  if (!(b >= 0.0)) fail(ErrorKind::InvalidParameter, "b must be nonnegative");
  return 4.0 / (3.0 * kPi) * std::pow(2.0 * b / std::sqrt(3.0), 1.5) + 0.5;
}

SquireParams SquireParams::from_reynolds(double alpha_tilde, double reynolds) {
  if (!(alpha_tilde >= 1.0)) fail(ErrorKind::InvalidParameter, "alpha_tilde must be >= 1");
  if (!(reynolds > 0.0)) fail(ErrorKind::InvalidParameter, "Reynolds number must be positive");
  SquireParams p;
  p.alpha_tilde = alpha_tilde;
  p.reynolds = reynolds;
  p.epsilon = 1.0 / (alpha_tilde * reynolds);
  return p;
}

double SquireParams::b() const { return std::cbrt(1.0 / epsilon); }

void SquireParams::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) fail(ErrorKind::InvalidParameter, "epsilon must be positive");
  if (alpha_tilde.has_value() != reynolds.has_value())
    fail(ErrorKind::InvalidParameter, "alpha_tilde and reynolds must be given together");
  if (alpha_tilde && std::abs(epsilon * *alpha_tilde * *reynolds - 1.0) > 1e-12)
    fail(ErrorKind::InvalidParameter, "epsilon must equal 1 / (alpha_tilde R)");
}

std::pair<cplx, double> squire_from_herbst(cplx E, double b) {
  check_b(b);
  return {cplx(0, -1) * E / b, 1.0 / (b * b * b)};
}

std::pair<cplx, double> herbst_from_squire(cplx lambda, double epsilon) {
  if (!(epsilon > 0.0)) fail(ErrorKind::InvalidParameter, "epsilon must be positive");
  const double b = std::cbrt(1.0 / epsilon);
  return {cplx(0, b) * lambda, b};
}

const char* to_string(YSegment s) noexcept {
  switch (s) {
    case YSegment::PlusBranch: return "PlusBranch";
    case YSegment::MinusBranch: return "MinusBranch";
    case YSegment::VerticalRay: return "VerticalRay";
  }
  return "Unknown";
}

namespace {

double segment_distance(cplx p, cplx a, cplx b) {
  const cplx d = b - a;
  const double t = std::clamp(((p - a) * std::conj(d)).real() / std::norm(d), 0.0, 1.0);
  return std::abs(p - (a + t * d));
}

}  // namespace

YClassification classify_Y(cplx lambda) {
  const cplx node(0.0, -1.0 / std::sqrt(3.0));
  const double d_ray = lambda.imag() <= node.imag() ? std::abs(lambda.real()) : std::abs(lambda - node);
  const double d_plus = segment_distance(lambda, 1.0, node);
  const double d_minus = segment_distance(lambda, -1.0, node);
  YClassification c{YSegment::VerticalRay, d_ray};
  if (d_plus < c.distance) c = {YSegment::PlusBranch, d_plus};
  if (d_minus < c.distance) c = {YSegment::MinusBranch, d_minus};
  return c;
}

std::vector<SquireMode> squire_spectrum(const SquireParams& params, int count) {
  params.validate();
  const double b = params.b();
  std::vector<SquireMode> out;
  for (cplx E : herbst_spectrum(b, count)) {
    const cplx lambda = squire_from_herbst(E, b).first;
    out.push_back({lambda, classify_Y(lambda)});
  }
  return out;
}

double crossing_epsilon(int n) {
  const double s = std::abs(airy_zeros(n).back());
  return std::pow(2.0 / (s * std::sqrt(3.0)), 3);
}

cplx squire_ray_asymptote(int n, double epsilon) { return cplx(0, -epsilon * kPi * kPi * n * n / 4); }

cplx squire_branch_asymptote(int n, double epsilon, int sign) {
  const double s = airy_zeros(n).back();
  const double e3 = std::cbrt(epsilon);
  if (sign >= 0) return 1.0 + e3 * s * std::polar(1.0, kPi / 6);
  return -1.0 - e3 * s * std::polar(1.0, -kPi / 6);
}

SweepResult herbst_sweep(const std::vector<double>& b_grid, int n_levels) {
  if (b_grid.empty()) fail(ErrorKind::InvalidParameter, "empty b grid");
  for (double b : b_grid) check_b(b);
  const std::vector<cplx> seeds = herbst_spectrum(b_grid.front(), n_levels);
  const FamilyFn family = [](cplx E, double b) { return herbst_determinant(E, b); };
  TrackOptions to;
  to.parameter_name = "b";
  to.dfdz = [](cplx E, double b) { return herbst_determinant_dE(E, b); };
  to.ep_options.p_min = 1e-3;
  TrackResult tr = track_branches(family, b_grid, seeds, to);
  SweepResult res;
  res.model = "herbst";
  res.parameter_name = "b";
  res.fixed_params = {{"levels", double(n_levels)}};
  res.grid = b_grid;
  res.branches = std::move(tr.branches);
  res.exceptional_points = std::move(tr.exceptional_points);
  res.warnings = std::move(tr.warnings);
  res.metadata = {{"eigenvalue_variable", "E"},
                  {"determinant", "airy"},
                  {"airy_series_radius", num(kAirySeriesRadius)},
                  {"reality_tol", num(kRealityTol)},
                  {"ep_tol", num(to.ep_options.tol)}};
  return res;
}

}  // namespace krein
