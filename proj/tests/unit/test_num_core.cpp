#include <atomic>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <random>
#include <vector>

#include "catch_amalgamated.hpp"
#include "krein/branches.hpp"
#include "krein/contour.hpp"
#include "krein/errors.hpp"
#include "krein/ode.hpp"
#include "krein/parallel.hpp"
#include "krein/pencil.hpp"
#include "krein/roots.hpp"

using namespace krein;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

cplx poly(const std::vector<cplx>& roots, cplx z) {
  cplx p = 1.0;
  for (cplx r : roots) p *= z - r;
  return p;
}

}  // namespace

TEST_CASE("Dormand-Prince reproduces exponential and oscillator solutions", "[ode]") {
  IvpProblem p;
  const cplx k(0.3, -2.0);
  p.rhs = [k](double, const std::vector<cplx>& y) { return std::vector<cplx>{k * y[0]}; };
  p.a = 0.0;
  p.b = 2.0;
  p.initial_state = {1.0};
  p.rel_tol = 1e-12;
  p.abs_tol = 1e-14;
  const auto s = integrate_ivp(p);
  CHECK(std::abs(s.state[0] - std::exp(2.0 * k)) < 1e-10);
  CHECK(s.stats.accepted > 0);

  // y'' = -w^2 y with y(0) = 0, y'(0) = w: y = sin(w t).
  const double w = 7.0;
  p.rhs = [w](double, const std::vector<cplx>& y) { return std::vector<cplx>{y[1], -w * w * y[0]}; };
  p.initial_state = {0.0, w};
  const std::vector<double> grid{0.0, 0.5, 1.0, 1.5, 2.0};
  const auto samples = integrate_ivp_sampled(p, grid);
  REQUIRE(samples.size() == grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(samples[i][0] - std::sin(w * grid[i])) < 1e-9);
}

TEST_CASE("integration backwards in t", "[ode]") {
  IvpProblem p;
  p.rhs = [](double, const std::vector<cplx>& y) { return std::vector<cplx>{-y[0]}; };
  p.a = 1.0;
  p.b = 0.0;
  p.initial_state = {1.0};
  p.rel_tol = 1e-12;
  CHECK(std::abs(integrate_ivp(p).state[0] - std::exp(1.0)) < 1e-10);
}

TEST_CASE("non-finite state is reported", "[ode]") {
  IvpProblem p;
  p.rhs = [](double t, const std::vector<cplx>& y) { return std::vector<cplx>{y[0] * y[0] / (1.0 - t)}; };
  p.a = 0.0;
  p.b = 2.0;
  p.initial_state = {1.0};
  CHECK_THROWS_AS(integrate_ivp(p), SpectralError);
}

TEST_CASE("Wronskian conservation on randomized complex potentials", "[ode][invariant]") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  int cases = 0;
  for (; cases < 120; ++cases) {
    const cplx a(u(rng), u(rng)), b(u(rng), u(rng)), c(u(rng), u(rng));
    // y'' = V(x) y for two solutions at once: (y1, y1', y2, y2').
    IvpProblem p;
    p.rhs = [=](double x, const std::vector<cplx>& y) {
      const cplx v = a + b * x + c * x * x;
      return std::vector<cplx>{y[1], v * y[0], y[3], v * y[2]};
    };
    p.a = -1.0;
    p.b = 1.0;
    p.initial_state = {1.0, 0.0, 0.0, 1.0};
    p.rel_tol = 1e-12;
    p.abs_tol = 1e-14;
    const auto y = integrate_ivp(p).state;
    const cplx w = y[0] * y[3] - y[2] * y[1];
    const double scale = std::abs(y[0] * y[3]) + std::abs(y[2] * y[1]);
    INFO("V = " << a << " + " << b << " x + " << c << " x^2");
    CHECK(std::abs(w - 1.0) <= 1e-9 * std::max(1.0, scale));
  }
  CHECK(cases >= 100);
}

TEST_CASE("Newton and bracketed roots", "[roots]") {
  const ComplexFn f = [](cplx z) { return z * z * z - cplx(1.0, 1.0); };
  const RootResult r = newton(f, cplx(1.0, 0.2));
  REQUIRE(r.converged);
  CHECK(std::abs(r.root * r.root * r.root - cplx(1.0, 1.0)) < 1e-12);

  CHECK_THROWS_AS(find_root_complex([](cplx z) { return std::exp(z); }, 0.0, 1e-12, 20), SpectralError);

  const double x = bracketed_root([](double t) { return std::cos(t) - t; }, 0.0, 1.0, 1.0, std::cos(1.0) - 1.0);
  CHECK_THAT(x, WithinAbs(0.7390851332151607, 1e-14));

  const cplx d = fd_derivative([](cplx z) { return std::sin(z); }, cplx(0.3, 0.4));
  CHECK(std::abs(d - std::cos(cplx(0.3, 0.4))) < 1e-7);
}

TEST_CASE("double root of a two-level family", "[roots]") {
  // (z - c)^2 - (p - 2): coalescence at p = 2, z = c.
  const cplx c(0.5, 0.0);
  const FamilyFn f = [c](cplx z, double p) { return (z - c) * (z - c) - (p - 2.0); };
  const ExceptionalPoint ep = find_double_root(f, cplx(0.7, 0.0), 2.5);
  CHECK_THAT(ep.parameter, WithinAbs(2.0, 1e-8));
  CHECK(std::abs(ep.eigenvalue - c) < 1e-6);
  CHECK(ep.residual_f <= 1e-4);
  CHECK(ep.residual_df <= 1e-4);

  // ep_residuals of c (z - z0)^2 at distance d: (d^2/(d+l)^2, 2 d l/(d+l)^2).
  const FamilyFn sq = [](cplx z, double) { return 3.0 * (z - 1.0) * (z - 1.0); };
  const double d = 1e-3, l = 1e-2 * (1.0 + d);
  const EpResiduals r = ep_residuals(sq, cplx(1.0 + d, 0.0), 0.0);
  CHECK_THAT(r.f, WithinRel(d * d / ((d + l) * (d + l)), 1e-6));
  CHECK_THAT(r.df, WithinRel(2 * d * l / ((d + l) * (d + l)), 1e-6));
}

TEST_CASE("conjugate pairs are symmetrized", "[roots]") {
  std::vector<cplx> z{{1.0, 2.0}, {3.0, 0.0}, {1.0 + 1e-12, -2.0 - 2e-12}};
  symmetrize_conjugate_pairs(z);
  CHECK(z[0] == std::conj(z[2]));
  CHECK(z[1] == cplx(3.0, 0.0));
}

TEST_CASE("argument principle counts polynomial roots", "[contour]") {
  const std::vector<cplx> roots{{0.2, 0.1}, {-0.4, 0.5}, {0.9, -0.3}, {3.0, 3.0}};
  const ComplexFn f = [&](cplx z) { return poly(roots, z); };
  CHECK(count_roots_in_contour(f, {-1, 1, -1, 1}, 64) == 3);
  CHECK(count_roots_adaptive(f, {-1, 1, -1, 1}) == 3);
  CHECK(count_roots_adaptive(f, {-5, 5, -5, 5}) == 4);
  CHECK(count_roots_adaptive(f, {1.5, 2.5, -1, 1}) == 0);
  const auto found = find_roots_in_rect(f, {-1, 1, -1, 1});
  REQUIRE(found.size() == 3);
  CHECK(std::abs(found[0] - roots[1]) < 1e-10);
}

TEST_CASE("multiple roots are returned with multiplicity", "[contour]") {
  const ComplexFn f = [](cplx z) { return (z - 0.3) * (z - 0.3) * (z + cplx(0.2, 0.4)); };
  const auto found = find_roots_in_rect(f, {-1, 1, -1, 1});
  REQUIRE(found.size() == 3);
  int near = 0;
  for (cplx z : found) near += std::abs(z - 0.3) < 1e-6;
  CHECK(near == 2);
}

TEST_CASE("root-count consistency on randomized polynomials", "[contour][invariant]") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_int_distribution<int> deg(1, 7);
  const Rect box{-1.0, 1.0, -1.0, 1.0};
  int cases = 0;
  for (; cases < 110; ++cases) {
    std::vector<cplx> roots;
    int inside = 0;
    const int n = deg(rng);
    while (int(roots.size()) < n) {
      const cplx z(u(rng), u(rng));
      // Keep clear of the boundary lines and the split lines near zero.
      const bool near_edge = std::abs(std::abs(z.real()) - 1.0) < 0.02 || std::abs(std::abs(z.imag()) - 1.0) < 0.02;
      if (near_edge) continue;
      roots.push_back(z);
      inside += box.contains(z);
    }
    const ComplexFn f = [&](cplx z) { return poly(roots, z); };
    INFO("case " << cases << " degree " << n);
    CHECK(count_roots_adaptive(f, box) == inside);
    // Additivity over a split and agreement with the isolated roots.
    const int left = count_roots_adaptive(f, {-1.0, 0.013, -1.0, 1.0});
    const int right = count_roots_adaptive(f, {0.013, 1.0, -1.0, 1.0});
    CHECK(left + right == inside);
    const auto found = find_roots_in_rect(f, box);
    CHECK(int(found.size()) == inside);
    for (cplx z : found) CHECK(std::abs(f(z)) <= 1e-9 * std::max(1.0, std::abs(poly(roots, 0.0))) + 1e-10);
  }
  CHECK(cases >= 100);
}

TEST_CASE("strip solver matches single-rectangle solver", "[contour]") {
  const ComplexFn f = [](cplx z) { return std::sin(z) * (z - cplx(0.5, 0.5)); };
  const Rect r{-7.0, 7.3, -1.0, 1.0};
  auto a = find_roots_in_rect(f, r);
  auto b = find_roots_in_strips(f, r, 4);
  REQUIRE(a.size() == b.size());
  REQUIRE(a.size() == 6);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-10);
}

TEST_CASE("root on the contour is detected", "[contour]") {
  const ComplexFn f = [](cplx z) { return z - cplx(1.0, 0.0); };
  CHECK_THROWS_AS(count_roots_adaptive(f, {-1, 1, -1, 1}), SpectralError);
}

TEST_CASE("quadratic pencil and two-level model", "[pencil]") {
  const auto [r1, r2] = quadratic_pencil_roots(1.0, -3.0, 2.0);
  CHECK(std::abs(r1 - 1.0) < 1e-15);
  CHECK(std::abs(r2 - 2.0) < 1e-15);
  CHECK_THROWS_AS(quadratic_pencil_roots(0.0, 1.0, 1.0), SpectralError);

  // Real for |a| >= |b|, complex pair beyond, coalescence at |a| = |b|.
  auto [e1, e2] = two_level_spectrum(2.0, cplx(1.0, 1.0), 0.5);
  CHECK(e1.imag() == 0.0);
  CHECK(std::abs(e1 - (0.5 - std::sqrt(2.0))) < 1e-15);
  std::tie(e1, e2) = two_level_spectrum(1.0, cplx(1.0, 1.0), 0.5);
  CHECK(std::abs(e1 - std::conj(e2)) < 1e-15);
  std::tie(e1, e2) = two_level_spectrum(std::sqrt(2.0), cplx(1.0, 1.0), 0.5);
  CHECK(std::abs(e1 - e2) < 1e-7);
  CHECK(std::abs(two_level_characteristic(e1, 2.0, cplx(1.0, 1.0), 0.5)) > 0.0);
}

TEST_CASE("branch tracking through an exceptional point", "[branches]") {
  // z^2 = 1 - p: real for p < 1, conjugate pair for p > 1.
  const FamilyFn f = [](cplx z, double p) { return z * z - (1.0 - p); };
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(0.1 * i);
  const TrackResult tr = track_branches(f, grid, {cplx(-1.0), cplx(1.0)});
  REQUIRE(tr.branches.size() == 2);
  REQUIRE(tr.exceptional_points.size() == 1);
  CHECK_THAT(tr.exceptional_points[0].parameter, WithinAbs(1.0, 1e-6));
  for (const auto& b : tr.branches) {
    CHECK(b.points.size() == grid.size());
    CHECK(b.points.front().label == SegmentLabel::Real);
    CHECK(b.points.back().label == SegmentLabel::ComplexPair);
    for (const auto& pt : b.points) CHECK(std::abs(f(pt.value, pt.parameter)) < 1e-9);
  }
  CHECK(std::abs(tr.branches[0].points.back().value - std::conj(tr.branches[1].points.back().value)) < 1e-9);
}

TEST_CASE("greedy assignment", "[branches]") {
  const auto a = greedy_assignment({0.0, 1.0, 5.0}, {1.1, -0.1});
  CHECK(a == std::vector<int>{1, 0, -1});
}

TEST_CASE("parallel_for is order-stable and honours the worker cap", "[parallel]") {
  std::vector<int> out(200);
  parallel_for(out.size(), [&](std::size_t i) { out[i] = int(i * i); });
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == int(i * i));
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 3) fail(ErrorKind::NoConvergence, "x");
                  }),
                  SpectralError);
  ::setenv("KREIN_SPECTRA_THREADS", "1", 1);
  CHECK(worker_count() == 1u);
  ::unsetenv("KREIN_SPECTRA_THREADS");
  CHECK(worker_count() >= 1u);
}
