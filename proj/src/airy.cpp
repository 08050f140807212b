#include "krein/airy.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "krein/errors.hpp"

namespace krein {

namespace {

// Ai(0) and -Ai'(0) as double-double (hi + lo).
constexpr double kAi0Hi = 0.3550280538878172, kAi0Lo = 2.05233632436212e-17;
constexpr double kAip0Hi = 0.2588194037928068, kAip0Lo = -2.522243111610832e-17;

const cplx kQ(-0.5, 0.86602540378443864676);
const cplx kQ2(-0.5, -0.86602540378443864676);

struct SeriesOut {
  cplx ai, aip;
  double magnitude;  // sum of |terms| weighted by the constants
};

// Ai = c1 f - c2 g with f = sum z^{3k}/prod (3j-1)(3j), g = sum z^{3k+1}/prod (3j)(3j+1).
SeriesOut series(cplx z) {
  const cplx z3 = z * z * z;
  const double eps = 1e-18;
  cplx f = 1.0, g = z, fp = 0.0, gp = 1.0;
  cplx tf = 1.0, tg = z, tfp = z * z / 2.0, tgp = 1.0;
  fp = tfp;
  double mag_f = 1, mag_g = std::abs(z), mag_fp = std::norm(z) / 2, mag_gp = 1;
  for (int k = 1; k < 400; ++k) {
    const double kk = k;
    tf *= z3 / ((3 * kk - 1) * (3 * kk));
    tg *= z3 / ((3 * kk) * (3 * kk + 1));
    tgp *= z3 / ((3 * kk) * (3 * kk - 2));
    if (k >= 2) {
      tfp *= z3 / ((3 * kk - 3) * (3 * kk - 1));
      fp += tfp;
    }
    f += tf;
    g += tg;
    gp += tgp;
    const double a = std::abs(tf), b = std::abs(tg), c = std::abs(tfp), d = std::abs(tgp);
    mag_f += a, mag_g += b, mag_fp += c, mag_gp += d;
    if (a <= eps * mag_f && b <= eps * mag_g && c <= eps * mag_fp && d <= eps * mag_gp && k > 2) break;
  }
  const double c1 = kAi0Hi + kAi0Lo;
  const double c2 = kAip0Hi + kAip0Lo;
  SeriesOut out;
  out.ai = c1 * f - c2 * g;
  out.aip = c1 * fp - c2 * gp;
  out.magnitude = std::max(0.356 * mag_f + 0.259 * mag_g, 0.356 * mag_fp + 0.259 * mag_gp);
  return out;
}

// Near a zero of Ai (or Ai') the scale of the other function sets the relevant accuracy.
bool well_conditioned(cplx z, const SeriesOut& d) {
  const double r = std::max(1.0, std::sqrt(std::abs(z)));
  const double ai_scale = std::max(std::abs(d.ai), std::abs(d.aip) / r);
  const double aip_scale = std::max(std::abs(d.aip), std::abs(d.ai) * r);
  return d.magnitude <= kAiryCancellationLimit * std::min(ai_scale, aip_scale);
}

constexpr int kTaylorTerms = 80;

const std::array<double, kTaylorTerms>& taylor_inv() {
  static const auto t = [] {
    std::array<double, kTaylorTerms> a{};
    for (int k = 0; k < kTaylorTerms; ++k) a[k] = 1.0 / double((k + 1) * (k + 2));
    return a;
  }();
  return t;
}

constexpr int kAsymTerms = 80;

struct AsymCoeffs {
  std::array<double, kAsymTerms> u{}, v{};
  AsymCoeffs() {
    u[0] = 1.0;
    v[0] = 1.0;
    for (int k = 1; k < kAsymTerms; ++k) {
      u[k] = u[k - 1] * (6.0 * k - 5) * (6.0 * k - 3) * (6.0 * k - 1) / ((2.0 * k - 1) * 216.0 * k);
      v[k] = -(6.0 * k + 1) / (6.0 * k - 1) * u[k];
    }
  }
};

const AsymCoeffs& coeffs() {
  static const AsymCoeffs c;
  return c;
}

}  // namespace

namespace detail {

AiryValues airy_series(cplx z) {
  const auto d = series(z);
  return {d.ai, d.aip};
}

bool airy_series_well_conditioned(cplx z) { return well_conditioned(z, series(z)); }

AiryValues airy_taylor_inward(cplx z) {
  const cplx u = std::abs(z) > 0 ? z / std::abs(z) : cplx(1.0);
  cplx z0 = kAiryTaylorStart * u;
  AiryValues w = airy_ai_both(z0);
  const double dist = kAiryTaylorStart - std::abs(z);
  const int steps = std::max(1, int(std::ceil(dist / 0.75)));
  const cplx h = (z - z0) / double(steps);
  for (int s = 0; s < steps; ++s) {
    // w'' = z w: a_{k+2} = (z0 a_k + a_{k-1}) / ((k+1)(k+2)).
    cplx am1 = 0.0, a0 = w.ai, a1 = w.ai_prime;
    cplx hk = 1.0;
    cplx val = a0, der = a1;
    double scale = std::norm(a0) + std::norm(a1);
    for (int k = 0; k < kTaylorTerms; ++k) {
      const cplx a2 = (z0 * a0 + am1) * taylor_inv()[k];
      hk *= h;
      // a1 h^(k+1) into the value, (k+2) a2 h^(k+1) into the derivative.
      const cplx tv = a1 * hk, td = double(k + 2) * a2 * hk;
      val += tv;
      der += td;
      am1 = a0, a0 = a1, a1 = a2;
      const double t = std::norm(tv) + std::norm(td);
      if (k > 4 && t <= 1e-34 * scale) break;
      scale = std::max(scale, std::norm(val) + std::norm(der));
    }
    w = {val, der};
    z0 += h;
  }
  return w;
}

}  // namespace detail

namespace {

// Poincare expansion without the factor exp(-zeta).
ScaledAiryValues asymptotic_scaled(cplx z) {
  const cplx sq = std::sqrt(z);
  const cplx zeta = (2.0 / 3.0) * z * sq;
  const cplx z14 = std::sqrt(sq);
  const auto& c = coeffs();
  cplx sa = 1.0, sp = 1.0, pw = 1.0;
  double last = std::numeric_limits<double>::infinity();
  for (int k = 1; k < kAsymTerms; ++k) {
    pw /= -zeta;
    const cplx ta = c.u[k] * pw, tp = c.v[k] * pw;
    const double mag = std::max(std::abs(ta), std::abs(tp));
    if (mag > last) break;  // optimal truncation
    sa += ta;
    sp += tp;
    last = mag;
    if (mag < 1e-17) break;
  }
  const double c0 = 1.0 / (2.0 * std::sqrt(kPi));
  return {c0 / z14 * sa, -z14 * c0 * sp, -zeta};
}

}  // namespace

namespace detail {

AiryValues airy_asymptotic_sector(cplx z) {
  const ScaledAiryValues s = asymptotic_scaled(z);
  const cplx e = std::exp(s.log_scale);
  return {s.ai * e, s.ai_prime * e};
}

}  // namespace detail

cplx airy_q() { return kQ; }

AiryValues airy_ai_both(cplx z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    fail(ErrorKind::InvalidParameter, "non-finite Airy argument");
  AiryValues out;
  if (std::abs(z) < kAirySeriesRadius) {
    const auto d = series(z);
    if (well_conditioned(z, d)) out = {d.ai, d.aip};
    else out = detail::airy_taylor_inward(z);
  } else if (std::abs(std::arg(z)) <= 2.0 * kPi / 3.0) {
    out = detail::airy_asymptotic_sector(z);
  } else {
    const AiryValues a = detail::airy_asymptotic_sector(kQ * z);
    const AiryValues b = detail::airy_asymptotic_sector(kQ2 * z);
    out.ai = -kQ * a.ai - kQ2 * b.ai;
    out.ai_prime = -kQ2 * a.ai_prime - kQ * b.ai_prime;
  }
  if (!std::isfinite(out.ai.real()) || !std::isfinite(out.ai.imag()) || !std::isfinite(out.ai_prime.real()) ||
      !std::isfinite(out.ai_prime.imag()))
    fail(ErrorKind::AccuracyLoss, "Airy function overflows at |z|=" + std::to_string(std::abs(z)));
  if (z.imag() == 0.0) {
    out.ai.imag(0.0);
    out.ai_prime.imag(0.0);
  }
  return out;
}

cplx airy_ai(cplx z) { return airy_ai_both(z).ai; }
cplx airy_ai_prime(cplx z) { return airy_ai_both(z).ai_prime; }

AiryValues airy_rotated(cplx z, AiryRotation rotation) {
  const cplx r = rotation == AiryRotation::Identity ? cplx(1.0) : rotation == AiryRotation::Q ? kQ : kQ2;
  const AiryValues v = airy_ai_both(r * z);
  return {v.ai, r * v.ai_prime};
}

ScaledAiryValues airy_rotated_scaled(cplx z, AiryRotation rotation) {
  const cplx r = rotation == AiryRotation::Identity ? cplx(1.0) : rotation == AiryRotation::Q ? kQ : kQ2;
  const cplx w = r * z;
  if (!std::isfinite(w.real()) || !std::isfinite(w.imag()))
    fail(ErrorKind::InvalidParameter, "non-finite Airy argument");
  ScaledAiryValues out;
  if (std::abs(w) < kAirySeriesRadius) {
    const AiryValues v = airy_ai_both(w);
    out = {v.ai, v.ai_prime, 0.0};
  } else if (std::abs(std::arg(w)) <= 2.0 * kPi / 3.0) {
    out = asymptotic_scaled(w);
  } else {
    ScaledAiryValues a = asymptotic_scaled(kQ * w), b = asymptotic_scaled(kQ2 * w);
    a.ai *= -kQ, a.ai_prime *= -kQ2;
    b.ai *= -kQ2, b.ai_prime *= -kQ;
    if (a.log_scale.real() < b.log_scale.real()) std::swap(a, b);
    const cplx e = std::exp(b.log_scale - a.log_scale);
    out = {a.ai + e * b.ai, a.ai_prime + e * b.ai_prime, a.log_scale};
  }
  out.ai_prime *= r;
  return out;
}

double airy_zero_asymptotic(int n) {
  if (n < 1) fail(ErrorKind::InvalidParameter, "Airy zero index must be >= 1");
  return -std::pow(1.5 * kPi * (n - 0.25), 2.0 / 3.0);
}

std::vector<double> airy_zeros(int n) {
  if (n < 1) fail(ErrorKind::InvalidParameter, "Airy zero count must be >= 1");
  std::vector<double> zeros;
  zeros.reserve(n);
  for (int k = 1; k <= n; ++k) {
    double x = airy_zero_asymptotic(k);
    for (int it = 0; it < 50; ++it) {
      const AiryValues v = airy_ai_both(x);
      const double dx = v.ai.real() / v.ai_prime.real();
      x -= dx;
      if (std::abs(dx) <= 1e-15 * std::abs(x)) break;
    }
    zeros.push_back(x);
  }
  return zeros;
}

}  // namespace krein
