#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace krein {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

enum class SegmentLabel { Real, ComplexPair };

/// |Im z| <= 1e-8 max(1, |z|) counts as real.
inline constexpr double kRealityTol = 1e-8;

inline bool is_real(cplx z, double rel_tol = kRealityTol) {
  return std::abs(z.imag()) <= rel_tol * std::max(1.0, std::abs(z));
}

inline SegmentLabel classify_reality(cplx z, double rel_tol = kRealityTol) {
  return is_real(z, rel_tol) ? SegmentLabel::Real : SegmentLabel::ComplexPair;
}

const char* to_string(SegmentLabel label) noexcept;

struct BranchPoint {
  double parameter = 0.0;
  cplx value;
  SegmentLabel label = SegmentLabel::Real;
};

struct SpectralBranch {
  std::string parameter_name;
  int branch_id = 0;
  std::optional<int> partner_id;
  std::vector<BranchPoint> points;
  /// Non-empty when the branch was truncated (corrector failure).
  std::string diagnostic;
};

struct ExceptionalPoint {
  double parameter = 0.0;
  /// Second parameter for two-parameter localizations.
  std::optional<double> parameter2;
  cplx eigenvalue;
  double residual_f = 0.0;
  double residual_df = 0.0;
  /// Branch ids involved, when produced by branch tracking.
  std::vector<int> branches;
};

}  // namespace krein
