#pragma once

#include <vector>

#include "krein/roots.hpp"
#include "krein/types.hpp"

namespace krein {

/// Axis-aligned rectangle in the complex plane.
struct Rect {
  double re_min = 0, re_max = 0, im_min = 0, im_max = 0;

  double width() const { return re_max - re_min; }
  double height() const { return im_max - im_min; }
  bool contains(cplx z) const {
    return z.real() > re_min && z.real() < re_max && z.imag() > im_min && z.imag() < im_max;
  }
};

/// Winding number of f around the rectangle sampled uniformly with
/// samples_per_edge points per edge. Throws RootOnContour when |f| on the
/// boundary collapses, InsufficientSampling when a single segment turns the
/// phase by more than pi/2.
int count_roots_in_contour(const ComplexFn& f, const Rect& rect, int samples_per_edge);

struct ContourOptions {
  int initial_samples_per_edge = 24;
  /// Upper bound on the initial distance between boundary samples (0: none).
  double max_sample_spacing = 0.0;
  /// Maximum phase change between consecutive boundary samples.
  double max_phase_step = 0.25 * kPi;
  /// Maximum |ln|f_b / f_a|| between consecutive samples.
  double max_log_ratio = 3.0;
  int max_refine_depth = 40;
  /// Boxes smaller than this (relative to the initial diagonal) stop splitting.
  double min_box_rel = 1e-11;
  /// A box holding n >= 2 roots and smaller than this (relative to the mean
  /// root) is reported as an n-fold root.
  double cluster_rel = 1e-6;
  /// Never place a horizontal split line on (or right next to) the real axis.
  bool avoid_real_axis = true;
  NewtonOptions newton{};
};

/// Argument-principle count with adaptive refinement of the boundary samples.
int count_roots_adaptive(const ComplexFn& f, const Rect& rect, const ContourOptions& options = {});

/// All roots inside the rectangle, repeated by multiplicity, sorted by (Re, Im).
/// Roots are isolated by recursive bisection with exact argument-principle
/// counts and polished by Newton.
std::vector<cplx> find_roots_in_rect(const ComplexFn& f, const Rect& rect,
                                     const ContourOptions& options = {});

/// find_roots_in_rect on n_strips vertical strips evaluated concurrently.
/// Interior strip boundaries are shifted when one of them passes through a root.
std::vector<cplx> find_roots_in_strips(const ComplexFn& f, const Rect& rect, int n_strips,
                                       const ContourOptions& options = {});

}  // namespace krein
