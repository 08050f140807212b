#pragma once

// Complex Airy function of the first kind and its derivative.
//
// |z| < kAirySeriesRadius: Maclaurin series. Where the series cancels badly
// (around the recessive sector |arg z| < pi/3) the value is carried inward from
// |z| = kAiryTaylorStart along the ray by Taylor steps of w'' = z w.
// |z| >= kAirySeriesRadius: Poincare expansion in |arg z| <= 2pi/3, and the
// connection formula Ai(z) = -q Ai(qz) - q^2 Ai(q^2 z) elsewhere.

#include <vector>

#include "krein/types.hpp"

namespace krein {

inline constexpr double kAirySeriesRadius = 9.0;
inline constexpr double kAiryTaylorStart = 9.5;
/// Largest tolerated ratio (sum of |series terms|) / |Ai| before the series is abandoned.
inline constexpr double kAiryCancellationLimit = 200.0;

/// q = exp(2 pi i / 3).
cplx airy_q();

enum class AiryRotation { Identity, Q, Q2 };

struct AiryValues {
  cplx ai;
  cplx ai_prime;
};

cplx airy_ai(cplx z);
cplx airy_ai_prime(cplx z);
AiryValues airy_ai_both(cplx z);

/// Ai(r z) and d/dz Ai(r z) = r Ai'(r z) for r in {1, q, q^2}.
AiryValues airy_rotated(cplx z, AiryRotation rotation);

/// (ai, ai_prime) * exp(log_scale) are the values of airy_rotated; finite for
/// arguments where the unscaled values overflow.
struct ScaledAiryValues {
  cplx ai;
  cplx ai_prime;
  cplx log_scale;
};
ScaledAiryValues airy_rotated_scaled(cplx z, AiryRotation rotation);

/// First n zeros of Ai on the negative real axis, strictly decreasing.
std::vector<double> airy_zeros(int n);

/// -[3 pi (n - 1/4) / 2]^(2/3).
double airy_zero_asymptotic(int n);

namespace detail {
/// Maclaurin series only (any |z|); exposed for tests and the overlap check.
AiryValues airy_series(cplx z);
/// True when the series for z cancels by less than kAiryCancellationLimit.
bool airy_series_well_conditioned(cplx z);
/// Value carried from the asymptotic region along the ray through z (|z| < kAiryTaylorStart).
AiryValues airy_taylor_inward(cplx z);
/// Poincare expansion only, valid for |arg z| <= 2pi/3 and large |z|.
AiryValues airy_asymptotic_sector(cplx z);
}  // namespace detail

}  // namespace krein
