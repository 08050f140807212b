#include "krein/errors.hpp"

#include "krein/types.hpp"

namespace krein {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::DerivativeVanished: return "DerivativeVanished";
    case ErrorKind::SingularJacobian: return "SingularJacobian";
    case ErrorKind::BranchLost: return "BranchLost";
    case ErrorKind::DuplicateRoot: return "DuplicateRoot";
    case ErrorKind::RootOnContour: return "RootOnContour";
    case ErrorKind::InsufficientSampling: return "InsufficientSampling";
    case ErrorKind::DegeneratePencil: return "DegeneratePencil";
    case ErrorKind::AccuracyLoss: return "AccuracyLoss";
    case ErrorKind::IncompleteSpectrum: return "IncompleteSpectrum";
    case ErrorKind::InsufficientDepth: return "InsufficientDepth";
    case ErrorKind::AsymmetricGrid: return "AsymmetricGrid";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::RadiusAtZero: return "RadiusAtZero";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

const char* to_string(SegmentLabel label) noexcept {
  return label == SegmentLabel::Real ? "Real" : "ComplexPair";
}

}  // namespace krein
