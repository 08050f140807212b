#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace krein {

enum class ErrorKind {
  InvalidParameter,
  StepSizeUnderflow,
  NonFiniteState,
  NoConvergence,
  DerivativeVanished,
  SingularJacobian,
  BranchLost,
  DuplicateRoot,
  RootOnContour,
  InsufficientSampling,
  DegeneratePencil,
  AccuracyLoss,
  IncompleteSpectrum,
  InsufficientDepth,
  AsymmetricGrid,
  GridMismatch,
  RadiusAtZero,
  ParseError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for every failure in the library; callers switch on kind().
class SpectralError : public std::runtime_error {
 public:
  SpectralError(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw SpectralError(kind, what);
}

}  // namespace krein
