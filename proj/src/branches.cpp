#include "krein/branches.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "krein/contour.hpp"
#include "krein/errors.hpp"

namespace krein {

std::vector<int> greedy_assignment(const std::vector<cplx>& predicted, const std::vector<cplx>& found) {
  struct Cand {
    double d;
    int i, j;
  };
  std::vector<Cand> cands;
  cands.reserve(predicted.size() * found.size());
  for (int i = 0; i < int(predicted.size()); ++i)
    for (int j = 0; j < int(found.size()); ++j) cands.push_back({std::abs(predicted[i] - found[j]), i, j});
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.d != b.d) return a.d < b.d;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  std::vector<int> out(predicted.size(), -1);
  std::vector<bool> used(found.size(), false);
  for (const Cand& c : cands) {
    if (out[c.i] >= 0 || used[c.j]) continue;
    out[c.i] = c.j;
    used[c.j] = true;
  }
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct Track {
  int id = 0;
  std::optional<int> partner;
  std::vector<BranchPoint> points;
  std::string diagnostic;
  bool alive = true;
  bool has_prev = false;
  double p_prev = 0, p_last = 0;
  cplx z_prev, z_last;

  cplx predict(double p) const {
    if (!has_prev || p_last == p_prev) return z_last;
    return z_last + (z_last - z_prev) * ((p - p_last) / (p_last - p_prev));
  }
  void push(double p, cplx z) {
    p_prev = p_last, z_prev = z_last;
    has_prev = true;
    p_last = p, z_last = z;
  }
};

class Tracker {
 public:
  Tracker(const FamilyFn& f, const TrackOptions& opt) : f_(f), opt_(opt) {}

  std::vector<Track> tracks;
  std::vector<ExceptionalPoint> eps;
  std::vector<std::string> warnings;

  RootResult polish(cplx guess, double p, double max_step) const {
    NewtonOptions no;
    no.z_tol = opt_.z_tol;
    no.max_iter = opt_.newton_max_iter;
    no.max_step = max_step;
    if (opt_.dfdz) no.derivative = [&](cplx z) { return opt_.dfdz(z, p); };
    return newton([&](cplx z) { return f_(z, p); }, guess, no);
  }

  // Advances every live track from p0 to p1; recursion halves the step.
  void step(double p0, double p1, int depth) {
    std::vector<int> live;
    for (int i = 0; i < int(tracks.size()); ++i)
      if (tracks[i].alive) live.push_back(i);
    if (live.empty()) return;
    const int n = int(live.size());
    std::vector<cplx> pred(n), z(n);
    for (int k = 0; k < n; ++k) pred[k] = tracks[live[k]].predict(p1);
    std::vector<double> spacing(n, std::numeric_limits<double>::infinity());
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        if (a == b) continue;
        const double d = std::abs(pred[a] - pred[b]);
        if (d > 1e-9 * std::max(1.0, std::abs(pred[a]))) spacing[a] = std::min(spacing[a], d);
      }
    for (int a = 0; a < n; ++a)
      if (!std::isfinite(spacing[a])) spacing[a] = std::max(1.0, std::abs(pred[a]));

    std::vector<bool> bad(n, false);
    for (int k = 0; k < n; ++k) {
      try {
        const RootResult r = polish(pred[k], p1, 0.5 * spacing[k]);
        z[k] = r.root;
        bad[k] = !r.converged || std::abs(r.root - pred[k]) > 0.35 * spacing[k];
      } catch (const SpectralError& e) {
        if (e.kind() != ErrorKind::DerivativeVanished && e.kind() != ErrorKind::NonFiniteState &&
            e.kind() != ErrorKind::StepSizeUnderflow)
          throw;
        bad[k] = true;
      }
    }
    mark_duplicates(z, bad);
    if (std::none_of(bad.begin(), bad.end(), [](bool b) { return b; })) {
      commit(live, p1, z);
      return;
    }
    const double pm = 0.5 * (p0 + p1);
    if (depth < opt_.newton_only_halvings) {
      step(p0, pm, depth + 1);
      step(pm, p1, depth + 1);
      return;
    }
    if (local_solve(live, pred, spacing, p1, z, bad)) {
      commit(live, p1, z);
      return;
    }
    if (depth < opt_.max_halvings) {
      step(p0, pm, depth + 1);
      step(pm, p1, depth + 1);
      return;
    }
    // Give up on the affected branches only.
    for (int k = 0; k < n; ++k) {
      if (!bad[k]) continue;
      Track& t = tracks[live[k]];
      t.alive = false;
      t.diagnostic = std::string(to_string(ErrorKind::BranchLost)) + ": corrector failed between " +
                     opt_.parameter_name + "=" + fmt(p0) + " and " + fmt(p1);
      warnings.push_back("branch " + std::to_string(t.id) + " lost near " + opt_.parameter_name + "=" + fmt(p1));
    }
    std::vector<int> keep;
    std::vector<cplx> zk;
    for (int k = 0; k < n; ++k)
      if (!bad[k]) keep.push_back(live[k]), zk.push_back(z[k]);
    commit(keep, p1, zk);
  }

 private:
  void mark_duplicates(const std::vector<cplx>& z, std::vector<bool>& bad) const {
    const int n = int(z.size());
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (!bad[a] && !bad[b] && std::abs(z[a] - z[b]) <= 1e-7 * std::max(1.0, std::abs(z[a])))
          bad[a] = bad[b] = true;
  }

  void commit(const std::vector<int>& idx, double p, const std::vector<cplx>& z) {
    for (std::size_t k = 0; k < idx.size(); ++k) tracks[idx[k]].push(p, z[k]);
  }

  // Argument-principle solve on a box around the failed roots and their neighbours.
  bool local_solve(const std::vector<int>& live, const std::vector<cplx>& pred, const std::vector<double>& spacing,
                   double p1, std::vector<cplx>& z, std::vector<bool>& bad) const {
    const int n = int(live.size());
    std::vector<bool> in(bad);
    std::vector<double> radius(n);
    for (int k = 0; k < n; ++k) {
      const Track& t = tracks[live[k]];
      radius[k] = std::max({3.0 * std::abs(pred[k] - t.z_last), 0.3 * spacing[k], 1e-6 * std::max(1.0, std::abs(pred[k]))});
    }
    Rect rect{};
    for (int round = 0; round < 20; ++round) {
      bool first = true;
      for (int k = 0; k < n; ++k) {
        if (!in[k]) continue;
        const Rect d{pred[k].real() - radius[k], pred[k].real() + radius[k], pred[k].imag() - radius[k],
                     pred[k].imag() + radius[k]};
        if (first) rect = d, first = false;
        rect = {std::min(rect.re_min, d.re_min), std::max(rect.re_max, d.re_max), std::min(rect.im_min, d.im_min),
                std::max(rect.im_max, d.im_max)};
      }
      bool grew = false;
      for (int k = 0; k < n; ++k)
        if (!in[k] && rect.contains(pred[k])) in[k] = grew = true;
      if (!grew) break;
    }
    std::vector<int> members;
    std::vector<cplx> mp;
    for (int k = 0; k < n; ++k)
      if (in[k]) members.push_back(k), mp.push_back(pred[k]);

    std::vector<cplx> roots;
    bool ok = false;
    for (int attempt = 0; attempt < 4 && !ok; ++attempt) {
      try {
        ContourOptions co;
        co.newton.z_tol = opt_.z_tol;
        if (opt_.dfdz) co.newton.derivative = [&](cplx zz) { return opt_.dfdz(zz, p1); };
        roots = find_roots_in_rect([&](cplx zz) { return f_(zz, p1); }, rect, co);
        ok = true;
      } catch (const SpectralError& e) {
        if (e.kind() != ErrorKind::RootOnContour && e.kind() != ErrorKind::InsufficientSampling) throw;
        const double gw = 0.0713 * rect.width(), gh = 0.0917 * rect.height();
        rect = {rect.re_min - gw, rect.re_max + gw, rect.im_min - gh, rect.im_max + gh};
      }
    }
    if (!ok || roots.size() < members.size()) return false;
    const std::vector<int> assign = greedy_assignment(mp, roots);
    for (std::size_t m = 0; m < members.size(); ++m) {
      if (assign[m] < 0) return false;
      z[members[m]] = roots[assign[m]];
      bad[members[m]] = false;
    }
    return true;
  }

  const FamilyFn& f_;
  const TrackOptions& opt_;
};

double pair_distance(cplx a, cplx b) { return std::abs(a - b); }

}  // namespace

TrackResult track_branches(const FamilyFn& family, const std::vector<double>& grid, const std::vector<cplx>& seeds,
                           const TrackOptions& opt) {
  if (grid.empty()) fail(ErrorKind::InvalidParameter, "empty parameter grid");
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const bool up = grid[1] > grid[0];
    if (!(std::isfinite(grid[i]) && std::isfinite(grid[i + 1])) || (up ? grid[i + 1] <= grid[i] : grid[i + 1] >= grid[i]))
      fail(ErrorKind::InvalidParameter, "parameter grid must be strictly monotone");
  }
  Tracker tr(family, opt);
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    Track t;
    t.id = int(s);
    t.p_last = grid.front();
    t.z_last = seeds[s];
    t.points.push_back({grid.front(), seeds[s], classify_reality(seeds[s])});
    tr.tracks.push_back(std::move(t));
  }
  auto near = [](cplx a, cplx b) { return std::abs(a - b) <= 1e-7 * std::max(1.0, std::abs(a)); };
  for (auto& a : tr.tracks)
    if (!is_real(a.z_last))
      for (auto& b : tr.tracks)
        if (&a != &b && near(a.z_last, std::conj(b.z_last))) a.partner = b.id;

  for (std::size_t gi = 0; gi + 1 < grid.size(); ++gi) {
    const double p0 = grid[gi], p1 = grid[gi + 1];
    const std::size_t before = tr.tracks.size();
    std::vector<std::optional<BranchPoint>> old(before);
    for (std::size_t k = 0; k < before; ++k)
      if (tr.tracks[k].alive) old[k] = tr.tracks[k].points.back();
    tr.step(p0, p1, 0);
    for (auto& t : tr.tracks)
      if (t.alive) t.points.push_back({p1, t.z_last, classify_reality(t.z_last)});

    // Label transitions.
    std::vector<int> changed;
    for (std::size_t k = 0; k < before; ++k)
      if (old[k] && tr.tracks[k].alive && old[k]->label != tr.tracks[k].points.back().label) changed.push_back(int(k));
    std::vector<bool> used(changed.size(), false);
    std::vector<std::pair<int, int>> pairs;  // second = -1 if partner untracked
    for (std::size_t a = 0; a < changed.size(); ++a) {
      if (used[a]) continue;
      used[a] = true;
      const Track& ta = tr.tracks[changed[a]];
      const bool to_complex = ta.points.back().label == SegmentLabel::ComplexPair;
      int best = -1;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t b = a + 1; b < changed.size(); ++b) {
        if (used[b]) continue;
        const Track& tb = tr.tracks[changed[b]];
        if ((tb.points.back().label == SegmentLabel::ComplexPair) != to_complex) continue;
        const double d = to_complex ? pair_distance(ta.points.back().value, std::conj(tb.points.back().value))
                                    : pair_distance(old[changed[a]]->value, std::conj(old[changed[b]]->value));
        if (d < best_d) best_d = d, best = int(b);
      }
      const double scale = std::max(1.0, std::abs(ta.points.back().value));
      if (best >= 0 && best_d <= 1e-3 * scale) {
        used[best] = true;
        pairs.push_back({changed[a], changed[best]});
      } else {
        pairs.push_back({changed[a], -1});
      }
    }

    // An exceptional point on a grid node is seen from both neighbouring intervals.
    auto add_ep = [&](ExceptionalPoint ep) {
      for (const ExceptionalPoint& e : tr.eps)
        if (std::abs(e.parameter - ep.parameter) <= 1e-7 * std::max(1.0, std::abs(ep.parameter)) &&
            std::abs(e.eigenvalue - ep.eigenvalue) <= 1e-5 * std::max(1.0, std::abs(ep.eigenvalue)))
          return;
      tr.eps.push_back(std::move(ep));
    };

    auto refine_ep = [&](int a, int b, bool to_complex) {
      const Track& ta = tr.tracks[a];
      const cplx za_new = ta.points.back().value, za_old = old[a]->value;
      cplx zb_new = std::conj(za_new), zb_old = std::conj(za_old);
      if (b >= 0) zb_new = tr.tracks[b].points.back().value, zb_old = old[b]->value;
      const double pr = to_complex ? p0 : p1, pc = to_complex ? p1 : p0;
      const cplx ra = to_complex ? za_old : za_new, rb = to_complex ? zb_old : zb_new;
      const cplx ca = to_complex ? za_new : za_old;
      double dr = std::abs(ra - rb);
      const double dc = 2.0 * std::abs(ca.imag());
      if (b < 0) dr = dc;
      const double t = dr * dr / (dr * dr + dc * dc + 1e-300);
      const double p_seed = pr + t * (pc - pr);
      const cplx z_seed((1 - t) * 0.5 * (ra + rb).real() + t * ca.real(), 0.0);
      ExceptionalPoint ep;
      try {
        DoubleRootOptions dopt = opt.ep_options;
        if (opt.dfdz && !dopt.dfdz) dopt.dfdz = opt.dfdz;
        const double lo = std::min(p0, p1), hi = std::max(p0, p1), pad = 0.5 * (hi - lo);
        dopt.p_min = std::max(dopt.p_min, lo - pad);
        dopt.p_max = std::min(dopt.p_max, hi + pad);
        ep = find_double_root(family, z_seed, p_seed, dopt);
      } catch (const SpectralError& e) {
        tr.warnings.push_back("exceptional point near " + opt.parameter_name + "=" + fmt(p_seed) +
                              " not refined: " + e.what());
        return;
      }
      ep.branches.push_back(ta.id);
      if (b >= 0) ep.branches.push_back(tr.tracks[b].id);
      add_ep(std::move(ep));
    };

    for (auto [a, b] : pairs) {
      const bool to_complex = tr.tracks[a].points.back().label == SegmentLabel::ComplexPair;
      if (b >= 0 && to_complex) {
        tr.tracks[a].partner = tr.tracks[b].id;
        tr.tracks[b].partner = tr.tracks[a].id;
      }
      if (opt.locate_exceptional_points) refine_ep(a, b, to_complex);
    }

    // Near-coincident roots without a label change.
    if (opt.locate_exceptional_points) {
      const std::size_t nt = tr.tracks.size();
      for (std::size_t a = 0; a < nt; ++a)
        for (std::size_t b = a + 1; b < nt; ++b) {
          const Track &ta = tr.tracks[a], &tb = tr.tracks[b];
          if (!ta.alive || !tb.alive) continue;
          const bool touched = std::any_of(pairs.begin(), pairs.end(), [&](auto pr) {
            return pr.first == int(a) || pr.first == int(b) || pr.second == int(a) || pr.second == int(b);
          });
          if (touched) continue;
          double third = std::numeric_limits<double>::infinity();
          for (std::size_t c = 0; c < nt; ++c)
            if (c != a && c != b && tr.tracks[c].alive)
              third = std::min(third, std::abs(tr.tracks[c].z_last - ta.z_last));
          if (!std::isfinite(third)) third = std::max(1.0, std::abs(ta.z_last));
          if (std::abs(ta.z_last - tb.z_last) <= opt.coalescence_rel * third) {
            try {
              ExceptionalPoint ep = find_double_root(family, 0.5 * (ta.z_last + tb.z_last), p1, opt.ep_options);
              ep.branches = {ta.id, tb.id};
              add_ep(std::move(ep));
            } catch (const SpectralError& e) {
              tr.warnings.push_back(std::string("duplicate roots at ") + opt.parameter_name + "=" + fmt(p1) + ": " +
                                    e.what());
            }
          }
        }
    }

    // Conjugate partners for roots that turned complex alone.
    if (opt.spawn_partners) {
      const std::size_t nt = tr.tracks.size();
      for (std::size_t a = 0; a < nt; ++a) {
        Track& ta = tr.tracks[a];
        if (!ta.alive || ta.points.back().label != SegmentLabel::ComplexPair) continue;
        bool has = false;
        for (const Track& tb : tr.tracks)
          if (tb.alive && &tb != &ta && near(tb.z_last, std::conj(ta.z_last))) has = true;
        if (has) continue;
        RootResult r;
        try {
          r = tr.polish(std::conj(ta.z_last), p1, std::abs(ta.z_last.imag()));
        } catch (const SpectralError&) {
          r.converged = false;
        }
        if (!r.converged || !near(r.root, std::conj(ta.z_last))) {
          tr.warnings.push_back("conjugate partner of branch " + std::to_string(ta.id) + " not confirmed at " +
                                opt.parameter_name + "=" + fmt(p1));
          continue;
        }
        Track nb;
        nb.id = int(tr.tracks.size());
        nb.partner = ta.id;
        nb.p_last = p1;
        nb.z_last = r.root;
        if (ta.has_prev) {
          nb.has_prev = true;
          nb.p_prev = ta.p_prev;
          nb.z_prev = std::conj(ta.z_prev);
        }
        nb.points.push_back({p1, r.root, classify_reality(r.root)});
        ta.partner = nb.id;
        for (auto& ep : tr.eps)
          if (ep.branches.size() == 1 && ep.branches[0] == ta.id) ep.branches.push_back(nb.id);
        tr.tracks.push_back(std::move(nb));
      }
    }
  }

  TrackResult out;
  for (auto& t : tr.tracks) {
    SpectralBranch b;
    b.parameter_name = opt.parameter_name;
    b.branch_id = t.id;
    b.partner_id = t.partner;
    b.points = std::move(t.points);
    b.diagnostic = std::move(t.diagnostic);
    out.branches.push_back(std::move(b));
  }
  std::stable_sort(tr.eps.begin(), tr.eps.end(),
                   [](const ExceptionalPoint& a, const ExceptionalPoint& b) { return a.parameter < b.parameter; });
  out.exceptional_points = std::move(tr.eps);
  out.warnings = std::move(tr.warnings);
  return out;
}

}  // namespace krein
