#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "krein/types.hpp"

namespace krein {

inline constexpr int kCsvSchemaVersion = 1;

/// A family of branches over a parameter grid, with the settings that produced it.
struct SweepResult {
  /// "interp", "herbst" or "dynamo".
  std::string model;
  std::string parameter_name;
  std::map<std::string, double> fixed_params;
  std::vector<double> grid;
  std::vector<SpectralBranch> branches;
  std::vector<ExceptionalPoint> exceptional_points;
  std::map<std::string, std::string> metadata;
  std::vector<std::string> warnings;
};

bool operator==(const SpectralBranch& a, const SpectralBranch& b);
bool operator==(const ExceptionalPoint& a, const ExceptionalPoint& b);
bool operator==(const SweepResult& a, const SweepResult& b);

struct CsvOptions {
  /// herbst: add E/b columns.
  bool rescaled = false;
  /// herbst: add mu = b^2 E columns.
  bool mu = false;
  /// dynamo: keep points with Im < 0 (otherwise only Im >= 0 is written).
  bool full_pairs = true;
};

/// Branch rows, preceded by '#' lines carrying the schema version, model,
/// fixed parameters, metadata and exceptional points.
void write_csv(std::ostream& os, const SweepResult& result, const CsvOptions& options = {});
void write_json(std::ostream& os, const SweepResult& result);
std::string to_json_string(const SweepResult& result);
/// Throws ParseError on malformed input.
SweepResult read_json(std::istream& is);
SweepResult from_json_string(const std::string& text);

struct EpCheck {
  double residual_f = 0.0;
  double residual_df = 0.0;
  bool ok = false;
};

/// Re-evaluates the double-root residuals of every exceptional point with the
/// model's characteristic function rebuilt from fixed_params.
std::vector<EpCheck> verify_exceptional_points(const SweepResult& result, double tol);

}  // namespace krein
