#pragma once

// Embedded Runge-Kutta 5(4) pair of Dormand and Prince with PI step-size
// control, for complex-valued linear systems y' = F(t, y).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "krein/errors.hpp"
#include "krein/types.hpp"

namespace krein {

struct OdeOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  std::size_t max_steps = 2'000'000;
};

struct OdeStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
};

namespace detail {

// Dormand-Prince coefficients (Hairer, Norsett, Wanner, "Solving ODE I").
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

template <class State>
State zeros_like(const State& y) {
  State z = y;
  for (auto& v : z) v = cplx{};
  return z;
}

}  // namespace detail

/// Stateful stepper; advance_to() may be called repeatedly with monotone targets.
template <class State, class Rhs>
class DormandPrince {
 public:
  DormandPrince(Rhs rhs, double t0, State y0, OdeOptions options)
      : rhs_(std::move(rhs)), t_(t0), y_(std::move(y0)), opt_(options) {
    if (!(opt_.rel_tol > 0.0) || !(opt_.abs_tol > 0.0))
      fail(ErrorKind::InvalidParameter, "ODE tolerances must be strictly positive");
    k1_ = detail::zeros_like(y_);
    k2_ = k3_ = k4_ = k5_ = k6_ = k7_ = ytmp_ = ynew_ = k1_;
    rhs_(t_, y_, k1_);
    ++stats_.rhs_evals;
  }

  double t() const { return t_; }
  const State& state() const { return y_; }
  const OdeStats& stats() const { return stats_; }

  void advance_to(double target) {
    const double span = target - t_;
    if (span == 0.0) return;
    if (!std::isfinite(target)) fail(ErrorKind::InvalidParameter, "non-finite integration bound");
    const double dir = span > 0 ? 1.0 : -1.0;
    if (h_ == 0.0 || h_ * dir < 0) h_ = dir * initial_step(std::abs(span));
    const double scale_t = std::max(std::abs(t_), std::abs(target));
    const double h_floor = 64.0 * std::numeric_limits<double>::epsilon() * std::max(scale_t, std::abs(span));

    while ((target - t_) * dir > 0) {
      if (stats_.accepted + stats_.rejected >= opt_.max_steps)
        fail(ErrorKind::StepSizeUnderflow, "step budget exhausted near t=" + std::to_string(t_));
      bool last = false;
      double h = h_;
      if ((t_ + h - target) * dir >= 0) {
        h = target - t_;
        last = true;
      }
      if (std::abs(h) < h_floor && !last)
        fail(ErrorKind::StepSizeUnderflow, "step size below floor near t=" + std::to_string(t_));

      const double err = attempt(h);
      if (!std::isfinite(err)) {
        if (std::abs(h) <= h_floor)
          fail(ErrorKind::NonFiniteState, "non-finite state near t=" + std::to_string(t_));
        h_ = h * 0.1;
        ++stats_.rejected;
        continue;
      }
      if (err <= 1.0) {
        t_ = last ? target : t_ + h;
        std::swap(y_, ynew_);
        std::swap(k1_, k7_);  // FSAL
        ++stats_.accepted;
        for (const auto& v : y_)
          if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            fail(ErrorKind::NonFiniteState, "overflow near t=" + std::to_string(t_));
        // PI controller
        double fac = std::pow(std::max(err, 1e-10), kExpo1) * std::pow(err_old_, -kBeta) / kSafety;
        fac = std::clamp(fac, 0.1, 5.0);
        err_old_ = std::max(err, 1e-4);
        const double hnew = h / fac;
        if (!last || std::abs(hnew) < std::abs(h_)) h_ = hnew;
        if (reject_streak_ > 0) h_ = dir * std::min(std::abs(h_), std::abs(h));
        reject_streak_ = 0;
      } else {
        ++stats_.rejected;
        ++reject_streak_;
        const double fac = std::min(5.0, std::pow(err, kExpo1) / kSafety);
        h_ = h / fac;
      }
    }
  }

 private:
  static constexpr double kBeta = 0.04;
  static constexpr double kExpo1 = 0.2 - kBeta * 0.75;
  static constexpr double kSafety = 0.9;

  double weight(std::size_t i, const State& a, const State& b) const {
    return opt_.abs_tol + opt_.rel_tol * std::sqrt(std::max(std::norm(a[i]), std::norm(b[i])));
  }

  double initial_step(double span) {
    // Hairer's starting-step heuristic, order 5.
    double d0 = 0, d1 = 0;
    const std::size_t n = y_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double w = opt_.abs_tol + opt_.rel_tol * std::sqrt(std::norm(y_[i]));
      d0 += std::norm(y_[i]) / (w * w);
      d1 += std::norm(k1_[i]) / (w * w);
    }
    d0 = std::sqrt(d0 / n);
    d1 = std::sqrt(d1 / n);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    return std::max(h0, 1e-12 * span);
  }

  double attempt(double h) {
    using namespace detail;
    const std::size_t n = y_.size();
    auto stage = [&](State& out, double tc, auto&& combine) {
      for (std::size_t i = 0; i < n; ++i) ytmp_[i] = y_[i] + h * combine(i);
      rhs_(t_ + tc * h, ytmp_, out);
    };
    stage(k2_, c2, [&](std::size_t i) { return a21 * k1_[i]; });
    stage(k3_, c3, [&](std::size_t i) { return a31 * k1_[i] + a32 * k2_[i]; });
    stage(k4_, c4, [&](std::size_t i) { return a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]; });
    stage(k5_, c5, [&](std::size_t i) {
      return a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i];
    });
    stage(k6_, 1.0, [&](std::size_t i) {
      return a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] + a65 * k5_[i];
    });
    for (std::size_t i = 0; i < n; ++i)
      ynew_[i] = y_[i] + h * (a71 * k1_[i] + a73 * k3_[i] + a74 * k4_[i] + a75 * k5_[i] + a76 * k6_[i]);
    rhs_(t_ + h, ynew_, k7_);
    stats_.rhs_evals += 6;

    double err = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const cplx e = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] + e7 * k7_[i]);
      const double w = weight(i, y_, ynew_);
      err += std::norm(e) / (w * w);
    }
    return std::sqrt(err / n);
  }

  Rhs rhs_;
  double t_;
  State y_;
  OdeOptions opt_;
  OdeStats stats_;
  State k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, ynew_;
  double h_ = 0.0;
  double err_old_ = 1e-4;
  int reject_streak_ = 0;
};

/// Integrates y' = rhs(t, y) from a to b; rhs has signature void(double, const State&, State&).
template <class State, class Rhs>
State integrate(Rhs&& rhs, double a, double b, State y0, const OdeOptions& options = {},
                OdeStats* stats = nullptr) {
  DormandPrince<State, std::decay_t<Rhs>> stepper(std::forward<Rhs>(rhs), a, std::move(y0), options);
  stepper.advance_to(b);
  if (stats) *stats = stepper.stats();
  return stepper.state();
}

// Type-erased interface.

struct IvpProblem {
  std::function<std::vector<cplx>(double, const std::vector<cplx>&)> rhs;
  double a = 0.0;
  double b = 1.0;
  std::vector<cplx> initial_state;
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
};

struct IvpSolution {
  std::vector<cplx> state;
  OdeStats stats;
};

IvpSolution integrate_ivp(const IvpProblem& problem);

/// States at each point of `grid` (monotone, starting at problem.a).
std::vector<std::vector<cplx>> integrate_ivp_sampled(const IvpProblem& problem,
                                                     const std::vector<double>& grid);

}  // namespace krein
