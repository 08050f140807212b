#include "krein/contour.hpp"

#include <algorithm>
#include <optional>
#include <cmath>
#include <string>

#include "krein/errors.hpp"
#include "krein/parallel.hpp"

namespace krein {

namespace {

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

std::string describe(const Rect& r) {
  return "[" + std::to_string(r.re_min) + "," + std::to_string(r.re_max) + "]x[" +
         std::to_string(r.im_min) + "," + std::to_string(r.im_max) + "]";
}

// Boundary points in counter-clockwise order, without repeating the start.
std::vector<cplx> boundary_points(const Rect& r, int n) {
  std::vector<cplx> pts;
  pts.reserve(4 * n);
  const cplx c[4] = {{r.re_min, r.im_min}, {r.re_max, r.im_min}, {r.re_max, r.im_max}, {r.re_min, r.im_max}};
  for (int e = 0; e < 4; ++e) {
    const cplx a = c[e], b = c[(e + 1) % 4];
    for (int k = 0; k < n; ++k) pts.push_back(a + (b - a) * (double(k) / n));
  }
  return pts;
}

struct Sample {
  cplx z;
  cplx f;
};

// Edges are stored in canonical orientation: horizontal left->right, vertical bottom->top.
using Edge = std::vector<Sample>;

struct Box {
  Rect rect;
  Edge bottom, right, top, left;
};

class Isolator {
 public:
  Isolator(const ComplexFn& f, const ContourOptions& opt, double diag) : f_(f), opt_(opt), diag_(diag) {}

  Sample sample(cplx z) const {
    const cplx v = f_(z);
    if (!finite(v)) fail(ErrorKind::NonFiniteState, "function not finite on contour");
    if (v == cplx{}) fail(ErrorKind::RootOnContour, "exact zero on contour");
    return {z, v};
  }

  Edge make_edge(cplx a, cplx b, const Sample* sa = nullptr, const Sample* sb = nullptr) const {
    Edge e;
    int n = opt_.initial_samples_per_edge;
    if (opt_.max_sample_spacing > 0)
      n = std::max(n, int(std::ceil(std::abs(b - a) / opt_.max_sample_spacing)));
    e.reserve(n + 1);
    e.push_back(sa ? *sa : sample(a));
    for (int k = 1; k < n; ++k) e.push_back(sample(a + (b - a) * (double(k) / n)));
    e.push_back(sb ? *sb : sample(b));
    refine(e);
    return e;
  }

  bool segment_ok(const Sample& a, const Sample& b) const {
    const cplx ratio = b.f / a.f;
    return std::abs(std::arg(ratio)) < opt_.max_phase_step &&
           std::abs(std::log(std::abs(ratio))) < opt_.max_log_ratio;
  }

  void refine(Edge& e) const {
    Edge out;
    out.reserve(e.size() * 2);
    out.push_back(e.front());
    for (std::size_t i = 0; i + 1 < e.size(); ++i) refine_segment(e[i], e[i + 1], 0, out);
    e.swap(out);
  }

  void refine_segment(const Sample& a, const Sample& b, int depth, Edge& out) const {
    if (segment_ok(a, b)) {
      out.push_back(b);
      return;
    }
    if (depth >= opt_.max_refine_depth || std::abs(b.z - a.z) < 1e-14 * diag_) {
      // The contour runs through (or numerically onto) a root.
      fail(ErrorKind::RootOnContour, "boundary refinement did not resolve near z=(" +
                                         std::to_string(a.z.real()) + "," + std::to_string(a.z.imag()) + ")");
    }
    const Sample m = sample(0.5 * (a.z + b.z));
    refine_segment(a, m, depth + 1, out);
    refine_segment(m, b, depth + 1, out);
  }

  Box make_box(const Rect& r) const {
    Box box{r, {}, {}, {}, {}};
    const cplx ll(r.re_min, r.im_min), lr(r.re_max, r.im_min), ur(r.re_max, r.im_max), ul(r.re_min, r.im_max);
    const Sample sll = sample(ll), slr = sample(lr), sur = sample(ur), sul = sample(ul);
    box.bottom = make_edge(ll, lr, &sll, &slr);
    box.right = make_edge(lr, ur, &slr, &sur);
    box.top = make_edge(ul, ur, &sul, &sur);
    box.left = make_edge(ll, ul, &sll, &sul);
    return box;
  }

  // Total phase change / 2pi, and the first moment sum_k z_k dlog f_k / (2 pi i).
  std::pair<int, cplx> winding(const Box& b) const {
    double total = 0.0;
    cplx moment{};
    auto walk = [&](const Edge& e, bool reverse) {
      const std::size_t n = e.size();
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const Sample& s0 = reverse ? e[n - 1 - i] : e[i];
        const Sample& s1 = reverse ? e[n - 2 - i] : e[i + 1];
        const cplx dlog = std::log(s1.f / s0.f);
        total += dlog.imag();
        moment += 0.5 * (s0.z + s1.z) * dlog;
      }
    };
    walk(b.bottom, false);
    walk(b.right, false);
    walk(b.top, true);
    walk(b.left, true);
    const double w = total / (2 * kPi);
    const double rounded = std::round(w);
    if (std::abs(w - rounded) > 0.05)
      fail(ErrorKind::InsufficientSampling, "non-integer winding " + std::to_string(w) + " on " + describe(b.rect));
    return {int(rounded), moment / cplx(0, 2 * kPi)};
  }

  // Splits the edge at coordinate x (along its direction) inserting sample s.
  static std::pair<Edge, Edge> split_edge(const Edge& e, double x, bool horizontal, const Sample& s) {
    Edge lo, hi;
    for (const Sample& p : e) {
      const double c = horizontal ? p.z.real() : p.z.imag();
      if (c < x) lo.push_back(p);
      else if (c > x) hi.push_back(p);
    }
    lo.push_back(s);
    hi.insert(hi.begin(), s);
    return {std::move(lo), std::move(hi)};
  }

  std::pair<Box, Box> split(const Box& b, double frac) const {
    const Rect& r = b.rect;
    const bool vertical_cut = r.width() >= r.height();
    if (vertical_cut) {
      double x = r.re_min + frac * r.width();
      for (int attempt = 0;; ++attempt) {
        try {
          const Sample sb = sample({x, r.im_min}), st = sample({x, r.im_max});
          Edge cut = make_edge({x, r.im_min}, {x, r.im_max}, &sb, &st);
          auto [b_lo, b_hi] = split_edge(b.bottom, x, true, sb);
          auto [t_lo, t_hi] = split_edge(b.top, x, true, st);
          refine(b_lo), refine(b_hi), refine(t_lo), refine(t_hi);
          Box left{{r.re_min, x, r.im_min, r.im_max}, std::move(b_lo), cut, std::move(t_lo), b.left};
          Box right{{x, r.re_max, r.im_min, r.im_max}, std::move(b_hi), b.right, std::move(t_hi), cut};
          return {std::move(left), std::move(right)};
        } catch (const SpectralError& e) {
          if (e.kind() != ErrorKind::RootOnContour || attempt >= 4) throw;
          x = r.re_min + (frac + 0.0731 * (attempt + 1)) * r.width();
        }
      }
    }
    double y = r.im_min + frac * r.height();
    if (opt_.avoid_real_axis && std::abs(y) < 0.05 * r.height()) y += 0.12 * r.height();
    for (int attempt = 0;; ++attempt) {
      try {
        const Sample sl = sample({r.re_min, y}), sr = sample({r.re_max, y});
        Edge cut = make_edge({r.re_min, y}, {r.re_max, y}, &sl, &sr);
        auto [l_lo, l_hi] = split_edge(b.left, y, false, sl);
        auto [r_lo, r_hi] = split_edge(b.right, y, false, sr);
        refine(l_lo), refine(l_hi), refine(r_lo), refine(r_hi);
        Box lower{{r.re_min, r.re_max, r.im_min, y}, b.bottom, std::move(r_lo), cut, std::move(l_lo)};
        Box upper{{r.re_min, r.re_max, y, r.im_max}, cut, std::move(r_hi), b.top, std::move(l_hi)};
        return {std::move(lower), std::move(upper)};
      } catch (const SpectralError& e) {
        if (e.kind() != ErrorKind::RootOnContour || attempt >= 4) throw;
        y = r.im_min + (frac + 0.0731 * (attempt + 1)) * r.height();
        if (opt_.avoid_real_axis && std::abs(y) < 0.05 * r.height()) y += 0.1 * r.height();
      }
    }
  }

  // z <- z - n f / f' stays quadratic at an n-fold root.
  cplx polish_cluster(cplx c, int n, const Rect& r) const {
    cplx z = c;
    try {
      for (int it = 0; it < 8; ++it) {
        const cplx fz = f_(z);
        const cplx d = opt_.newton.derivative ? opt_.newton.derivative(z) : fd_derivative(f_, z);
        if (fz == 0.0 || d == 0.0) break;
        const cplx step = double(n) * fz / d;
        z -= step;
        if (!r.contains(z)) return c;
        if (std::abs(step) <= 1e-14 * std::max(1.0, std::abs(z))) break;
      }
    } catch (const SpectralError&) {
      return c;
    }
    return z;
  }

  void solve(const Box& b, int n, cplx moment, std::vector<cplx>& out) const {
    if (n <= 0) return;
    const Rect& r = b.rect;
    const double size = std::hypot(r.width(), r.height());
    const bool tiny = size < opt_.min_box_rel * diag_;
    if (n >= 2) {
      const cplx c = moment / double(n);
      if (size < opt_.cluster_rel * std::max(1.0, std::abs(c))) {
        const cplx z = polish_cluster(c, n, r);
        for (int k = 0; k < n; ++k) out.push_back(z);
        return;
      }
    }
    if (n == 1 || tiny) {
      const cplx seed = moment / double(n);
      try {
        NewtonOptions nopt = opt_.newton;
        nopt.max_step = std::max(size, 1e-300);
        const RootResult rr = newton(f_, r.contains(seed) ? seed : cplx(r.re_min + 0.5 * r.width(), r.im_min + 0.5 * r.height()), nopt);
        const double slack = 1e-9 * size;
        const Rect grown{r.re_min - slack, r.re_max + slack, r.im_min - slack, r.im_max + slack};
        if (rr.converged && grown.contains(rr.root)) {
          if (n == 1 || tiny) {
            for (int k = 0; k < n; ++k) out.push_back(rr.root);
            return;
          }
        }
      } catch (const SpectralError& e) {
        if (e.kind() != ErrorKind::DerivativeVanished) throw;
      }
      if (tiny) {
        for (int k = 0; k < n; ++k) out.push_back(seed);
        return;
      }
    }
    // A cut passing next to a (multiple) root can spoil the child counts; keep
    // it away from the root centroid and move it when the counts disagree.
    const cplx centroid = moment / double(n);
    const bool vertical_cut = r.width() >= r.height();
    const double cpos = vertical_cut ? (centroid.real() - r.re_min) / r.width() : (centroid.imag() - r.im_min) / r.height();
    const std::size_t mark = out.size();
    for (int attempt = 0;; ++attempt) {
      double frac = 0.5 - 0.0917 * attempt;
      if (std::abs(frac - cpos) < 0.15) frac = cpos < 0.5 ? cpos + 0.3 : cpos - 0.3;
      std::optional<std::pair<Box, Box>> kids;
      std::pair<int, cplx> w1, w2;
      try {
        kids = split(b, frac);
        w1 = winding(kids->first);
        w2 = winding(kids->second);
      } catch (const SpectralError& e) {
        if ((e.kind() != ErrorKind::RootOnContour && e.kind() != ErrorKind::InsufficientSampling) || attempt >= 3) throw;
      }
      if (kids && w1.first + w2.first == n && w1.first >= 0 && w2.first >= 0) {
        try {
          solve(kids->first, w1.first, w1.second, out);
          solve(kids->second, w2.first, w2.second, out);
          return;
        } catch (const SpectralError& e) {
          if (e.kind() != ErrorKind::InsufficientSampling || attempt >= 3) throw;
          out.resize(mark);
        }
      }
      if (attempt >= 3) fail(ErrorKind::InsufficientSampling, "inconsistent child counts on " + describe(r));
    }
  }

 private:
  const ComplexFn& f_;
  ContourOptions opt_;
  double diag_;
};

}  // namespace

int count_roots_in_contour(const ComplexFn& f, const Rect& rect, int samples_per_edge) {
  if (samples_per_edge < 2 || !(rect.width() > 0) || !(rect.height() > 0))
    fail(ErrorKind::InvalidParameter, "degenerate contour or too few samples");
  const auto pts = boundary_points(rect, samples_per_edge);
  std::vector<cplx> vals;
  vals.reserve(pts.size());
  double vmax = 0.0;
  for (cplx z : pts) {
    const cplx v = f(z);
    if (!finite(v)) fail(ErrorKind::NonFiniteState, "function not finite on contour");
    vals.push_back(v);
    vmax = std::max(vmax, std::abs(v));
  }
  for (std::size_t i = 0; i < vals.size(); ++i)
    if (std::abs(vals[i]) <= 1e-13 * vmax)
      fail(ErrorKind::RootOnContour, "|f| collapses on the contour near z=(" + std::to_string(pts[i].real()) +
                                         "," + std::to_string(pts[i].imag()) + ")");
  double total = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const double d = std::arg(vals[(i + 1) % vals.size()] / vals[i]);
    if (std::abs(d) > 0.5 * kPi)
      fail(ErrorKind::InsufficientSampling, "phase increment " + std::to_string(d) + " exceeds pi/2");
    total += d;
  }
  return int(std::lround(total / (2 * kPi)));
}

int count_roots_adaptive(const ComplexFn& f, const Rect& rect, const ContourOptions& options) {
  if (!(rect.width() > 0) || !(rect.height() > 0)) fail(ErrorKind::InvalidParameter, "degenerate rectangle");
  Isolator iso(f, options, std::hypot(rect.width(), rect.height()));
  return iso.winding(iso.make_box(rect)).first;
}

std::vector<cplx> find_roots_in_rect(const ComplexFn& f, const Rect& rect, const ContourOptions& options) {
  if (!(rect.width() > 0) || !(rect.height() > 0)) fail(ErrorKind::InvalidParameter, "degenerate rectangle");
  Isolator iso(f, options, std::hypot(rect.width(), rect.height()));
  const Box box = iso.make_box(rect);
  const auto [n, moment] = iso.winding(box);
  std::vector<cplx> roots;
  roots.reserve(std::max(n, 0));
  iso.solve(box, n, moment, roots);
  std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  });
  return roots;
}

std::vector<cplx> find_roots_in_strips(const ComplexFn& f, const Rect& rect, int n_strips,
                                       const ContourOptions& options) {
  if (n_strips < 1) fail(ErrorKind::InvalidParameter, "need at least one strip");
  if (n_strips == 1) return find_roots_in_rect(f, rect, options);
  const double w = rect.width() / n_strips;
  for (int attempt = 0;; ++attempt) {
    std::vector<double> xs(n_strips + 1);
    xs.front() = rect.re_min;
    xs.back() = rect.re_max;
    for (int k = 1; k < n_strips; ++k) xs[k] = rect.re_min + (k + 0.0517 * attempt) * w;
    std::vector<std::vector<cplx>> parts(n_strips);
    try {
      parallel_for(n_strips, [&](std::size_t k) {
        parts[k] = find_roots_in_rect(f, {xs[k], xs[k + 1], rect.im_min, rect.im_max}, options);
      });
    } catch (const SpectralError& e) {
      if (e.kind() != ErrorKind::RootOnContour || attempt >= 6) throw;
      continue;
    }
    std::vector<cplx> roots;
    for (auto& p : parts) roots.insert(roots.end(), p.begin(), p.end());
    std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
      return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
    });
    return roots;
  }
}

}  // namespace krein
