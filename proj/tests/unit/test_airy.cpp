#include <boost/math/special_functions/airy.hpp>
#include <cmath>
#include <complex>
#include <random>

#include "catch_amalgamated.hpp"
#include "krein/airy.hpp"
#include "krein/errors.hpp"

using namespace krein;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

using lcplx = std::complex<long double>;

// Maclaurin series of Ai in extended precision, for |z| <= 5.
std::pair<lcplx, lcplx> ai_long(cplx zd) {
  const lcplx z(zd.real(), zd.imag());
  const long double c1 = 0.355028053887817239260063186004183176L;
  const long double c2 = 0.258819403792806798405183560189203963L;
  lcplx f = 1, g = z, fp = 0, gp = 1;
  lcplx tf = 1, tg = z;
  const lcplx z3 = z * z * z;
  for (int k = 1; k < 200; ++k) {
    tf *= z3 / static_cast<long double>((3 * k - 1) * (3 * k));
    tg *= z3 / static_cast<long double>((3 * k) * (3 * k + 1));
    f += tf;
    g += tg;
    fp += tf * static_cast<long double>(3 * k) / z;
    gp += tg * static_cast<long double>(3 * k + 1) / z;
    if (std::abs(tf) + std::abs(tg) < 1e-30L * (std::abs(f) + std::abs(g))) break;
  }
  return {c1 * f - c2 * g, c1 * fp - c2 * gp};
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

cplx to_d(lcplx z) { return {double(z.real()), double(z.imag())}; }

}  // namespace

TEST_CASE("Ai on the real axis against Boost", "[airy]") {
  for (double x = -25.0; x <= 25.0; x += 0.37) {
    const double ref = boost::math::airy_ai(x);
    const double refp = boost::math::airy_ai_prime(x);
    const auto v = airy_ai_both(cplx(x, 0.0));
    INFO("x = " << x);
    const double tol_abs = x < 0 ? 1e-12 : 0.0;
    CHECK(std::abs(v.ai - ref) <= 1e-11 * std::abs(ref) + tol_abs);
    CHECK(std::abs(v.ai_prime - refp) <= 1e-11 * std::abs(refp) + 10 * tol_abs);
    CHECK(std::abs(v.ai.imag()) <= 1e-14 * std::abs(v.ai) + 1e-300);
  }
}

TEST_CASE("Ai in the complex disk against an extended-precision series", "[airy]") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> r(0.0, 5.0), t(-kPi, kPi);
  for (int i = 0; i < 200; ++i) {
    const cplx z = std::polar(r(rng), t(rng));
    const auto [ai, aip] = ai_long(z);
    const auto v = airy_ai_both(z);
    INFO("z = " << z);
    CHECK(rel(v.ai, to_d(ai)) < 1e-11);
    CHECK(rel(v.ai_prime, to_d(aip)) < 1e-11);
  }
}

TEST_CASE("region boundaries are continuous", "[airy]") {
  // Values just inside and outside the series radius and the Taylor start
  // agree up to the first-order change of the function.
  for (double th = -kPi; th < kPi; th += kPi / 17) {
    for (double rr : {kAirySeriesRadius, kAiryTaylorStart}) {
      const cplx a = std::polar(rr - 1e-9, th), b = std::polar(rr + 1e-9, th);
      const auto va = airy_ai_both(a);
      INFO("r = " << rr << " theta = " << th);
      CHECK(rel(va.ai + va.ai_prime * (b - a), airy_ai(b)) < 1e-12);
    }
  }
}

TEST_CASE("Airy connection identity on randomized arguments", "[airy][invariant]") {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> r(0.0, 30.0), t(-kPi, kPi);
  const cplx q = airy_q();
  int cases = 0;
  for (; cases < 300; ++cases) {
    const cplx z = std::polar(r(rng), t(rng));
    const cplx a = airy_ai(z), b = q * airy_ai(q * z), c = q * q * airy_ai(q * q * z);
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
    INFO("z = " << z);
    CHECK(std::abs(a + b + c) <= 1e-10 * scale);
  }
  CHECK(cases >= 100);
}

TEST_CASE("Airy Wronskian on randomized arguments", "[airy][invariant]") {
  // W{Ai(z), Ai(q z)} = e^{-i pi/6} / (2 pi).
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> r(0.0, 12.0), t(-kPi, kPi);
  const cplx w_ref = std::polar(1.0 / (2 * kPi), -kPi / 6);
  for (int i = 0; i < 150; ++i) {
    const cplx z = std::polar(r(rng), t(rng));
    const auto a = airy_rotated(z, AiryRotation::Identity);
    const auto b = airy_rotated(z, AiryRotation::Q);
    const cplx w = a.ai * b.ai_prime - a.ai_prime * b.ai;
    const double scale = std::abs(a.ai * b.ai_prime) + std::abs(a.ai_prime * b.ai);
    INFO("z = " << z);
    CHECK(std::abs(w - w_ref) <= 1e-10 * std::max(scale, std::abs(w_ref)));
  }
}

TEST_CASE("conjugation symmetry Ai(conj z) = conj Ai(z)", "[airy][invariant]") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> r(0.0, 25.0), t(-kPi, kPi);
  for (int i = 0; i < 120; ++i) {
    const cplx z = std::polar(r(rng), t(rng));
    CHECK(rel(airy_ai(std::conj(z)), std::conj(airy_ai(z))) < 1e-12);
  }
}

TEST_CASE("zeros of Ai against Boost and the asymptotic formula", "[airy]") {
  const auto z = airy_zeros(40);
  REQUIRE(z.size() == 40);
  CHECK_THAT(z[0], WithinAbs(-2.338107410459767, 1e-13));
  for (int n = 1; n <= 40; ++n) {
    CHECK_THAT(z[n - 1], WithinRel(boost::math::airy_ai_zero<double>(n), 1e-13));
    CHECK(std::abs(airy_ai(z[n - 1])) < 1e-13);
    if (n > 1) CHECK(z[n - 1] < z[n - 2]);
    CHECK(std::abs(airy_zero_asymptotic(n) - z[n - 1]) < 0.02 / n);
  }
}

TEST_CASE("scaled values reproduce the unscaled ones and stay finite", "[airy]") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> r(0.0, 40.0), t(-kPi, kPi);
  for (int i = 0; i < 200; ++i) {
    const cplx z = std::polar(r(rng), t(rng));
    for (auto rot : {AiryRotation::Identity, AiryRotation::Q, AiryRotation::Q2}) {
      const auto u = airy_rotated(z, rot);
      const auto s = airy_rotated_scaled(z, rot);
      const cplx e = std::exp(s.log_scale);
      INFO("z = " << z);
      CHECK(rel(s.ai * e, u.ai) < 1e-12);
      CHECK(rel(s.ai_prime * e, u.ai_prime) < 1e-12);
    }
  }
  const auto big = airy_rotated_scaled(cplx(-300.0, -200.0), AiryRotation::Identity);
  CHECK(std::isfinite(std::abs(big.ai)));
  CHECK(big.log_scale.real() > 709.0);
  CHECK_THROWS_AS(airy_ai(cplx(-300.0, -200.0)), SpectralError);
}

TEST_CASE("series helper agrees with the dispatcher where well conditioned", "[airy]") {
  for (double x : {0.0, 1.0, -3.0}) {
    const cplx z(x, 0.5);
    REQUIRE(detail::airy_series_well_conditioned(z));
    CHECK(rel(detail::airy_series(z).ai, airy_ai(z)) < 1e-13);
  }
  CHECK_FALSE(detail::airy_series_well_conditioned(cplx(8.5, 0.0)));
  CHECK(rel(detail::airy_asymptotic_sector(cplx(12.0, 3.0)).ai, airy_ai(cplx(12.0, 3.0))) < 1e-14);
}
