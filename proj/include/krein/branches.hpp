#pragma once

#include <functional>
#include <string>
#include <vector>

#include "krein/roots.hpp"
#include "krein/types.hpp"

namespace krein {

struct TrackOptions {
  std::string parameter_name = "p";
  /// Newton step tolerance, relative to max(1, |z|).
  double z_tol = 1e-12;
  int newton_max_iter = 40;
  /// Sub-step halvings allowed per grid interval.
  int max_halvings = 12;
  /// Halvings tried with plain Newton before local contour solves are used.
  int newton_only_halvings = 3;
  /// Two roots closer than coalescence_rel * (local spacing) trigger a double-root refinement.
  double coalescence_rel = 1e-4;
  bool locate_exceptional_points = true;
  /// Start a conjugate branch when a tracked root turns complex and its partner is untracked.
  bool spawn_partners = true;
  DoubleRootOptions ep_options{};
  /// Optional analytic z-derivative of the family.
  std::function<cplx(cplx, double)> dfdz;
};

struct TrackResult {
  std::vector<SpectralBranch> branches;
  std::vector<ExceptionalPoint> exceptional_points;
  std::vector<std::string> warnings;
};

/// Follows the roots of family(z, p) over a strictly monotone parameter grid,
/// starting from converged seeds at grid.front(). Prediction is linear in the
/// last two points, correction by Newton; failures halve the step, then switch
/// to argument-principle solves on a box around the affected roots. Branches
/// that cannot be continued are truncated with a diagnostic (BranchLost).
/// Real <-> complex-pair label changes are refined into exceptional points.
TrackResult track_branches(const FamilyFn& family, const std::vector<double>& grid,
                           const std::vector<cplx>& seeds, const TrackOptions& options = {});

/// Greedy minimal-distance assignment: result[i] is the index into `found`
/// matched to predicted[i], or -1. Ties resolve to the lower index.
std::vector<int> greedy_assignment(const std::vector<cplx>& predicted, const std::vector<cplx>& found);

}  // namespace krein
