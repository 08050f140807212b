#include "krein/cli.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "krein/dynamo.hpp"
#include "krein/errors.hpp"
#include "krein/herbst.hpp"
#include "krein/interp.hpp"
#include "krein/roots.hpp"
#include "krein/sweep.hpp"

namespace krein {

namespace {

using nlohmann::json;

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> linspace(double lo, double hi, int steps, const char* name) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) fail(ErrorKind::InvalidParameter, std::string(name) + " range not finite");
  if (lo == hi) return {lo};
  if (hi < lo) fail(ErrorKind::InvalidParameter, std::string(name) + " range is decreasing");
  if (steps < 1) fail(ErrorKind::InvalidParameter, std::string(name) + " steps must be >= 1");
  std::vector<double> g(steps + 1);
  for (int i = 0; i <= steps; ++i) g[i] = i == steps ? hi : lo + (hi - lo) * double(i) / steps;
  return g;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::InvalidParameter, "cannot write " + path);
  f << text;
}

std::string render(const SweepResult& r, const std::string& format, const CsvOptions& co = {}) {
  std::ostringstream os;
  if (format == "json") write_json(os, r);
  else write_csv(os, r, co);
  return os.str();
}

void stamp(SweepResult& r, const std::string& command) {
  r.metadata["version"] = KREIN_VERSION;
  r.metadata["command"] = command;
}

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

json ep_json(const ExceptionalPoint& ep) {
  json j{{"parameter", ep.parameter},
         {"eigenvalue", cjson(ep.eigenvalue)},
         {"residual_f", ep.residual_f},
         {"residual_df", ep.residual_df}};
  if (ep.parameter2) j["parameter2"] = *ep.parameter2;
  return j;
}

// Midpoint of the closest pair of eigenvalues, projected onto the real axis.
cplx closest_pair_guess(const std::vector<cplx>& z) {
  if (z.size() < 2) fail(ErrorKind::NoConvergence, "fewer than two eigenvalues to seed from");
  double best = std::numeric_limits<double>::infinity();
  cplx guess;
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t j = i + 1; j < z.size(); ++j) {
      const double d = std::abs(z[i] - z[j]) / std::max(1.0, std::abs(z[i]));
      if (d < best) best = d, guess = cplx(0.5 * (z[i].real() + z[j].real()), 0.0);
    }
  return guess;
}

int exit_code_for(const SpectralError& e, bool locating) {
  switch (e.kind()) {
    case ErrorKind::InvalidParameter:
    case ErrorKind::ParseError:
      return kExitUsage;
    case ErrorKind::NoConvergence:
    case ErrorKind::SingularJacobian:
    case ErrorKind::DerivativeVanished:
      return locating ? kExitNoConvergence : kExitSolver;
    default:
      return kExitSolver;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectra, branches and exceptional points of PT-symmetric and dynamo operators", "krein-spectra"};
  app.require_subcommand(1);
  app.set_version_flag("--version", KREIN_VERSION);

  std::string command;
  for (int i = 1; i < argc; ++i) command += (i > 1 ? " " : "") + std::string(argv[i]);

  std::string out_path, format = "csv";
  auto add_output = [&](CLI::App* s) {
    s->add_option("--out", out_path, "Output file ('-' for standard output)");
    s->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  };

  // interp-sweep
  double ib = 0, ig = 1, nu_min = -2, nu_max = 0;
  int nu_steps = 100, ilevels = 10;
  auto* interp = app.add_subcommand("interp-sweep", "Branches of the interpolation model over nu");
  interp->add_option("--b", ib, "Box scale b")->required();
  interp->add_option("--g", ig, "Coupling g");
  interp->add_option("--nu-min", nu_min);
  interp->add_option("--nu-max", nu_max);
  interp->add_option("--nu-steps", nu_steps, "Number of grid intervals");
  interp->add_option("--levels", ilevels);
  add_output(interp);

  // herbst
  double hb_min = 1, hb_max = 8;
  int hb_steps = 140, hlevels = 10;
  bool rescaled = false, mu_view = false;
  auto* herbst = app.add_subcommand("herbst", "Herbst-box branches over b with crossing records");
  herbst->add_option("--b-min", hb_min);
  herbst->add_option("--b-max", hb_max);
  herbst->add_option("--b-steps", hb_steps, "Number of grid intervals");
  herbst->add_option("--levels", hlevels);
  herbst->add_flag("--rescaled", rescaled, "Add E/b columns");
  herbst->add_flag("--mu", mu_view, "Add mu = b^2 E columns");
  add_output(herbst);

  // squire
  std::optional<double> eps, alpha_tilde, reynolds;
  int slevels = 20;
  auto* squire = app.add_subcommand("squire", "Squire spectrum with Y classification");
  auto* eps_opt = squire->add_option("--epsilon", eps);
  auto* at_opt = squire->add_option("--alpha-tilde", alpha_tilde);
  auto* re_opt = squire->add_option("--reynolds", reynolds);
  eps_opt->excludes(at_opt)->excludes(re_opt);
  at_opt->needs(re_opt);
  re_opt->needs(at_opt);
  squire->add_option("--levels", slevels);
  add_output(squire);

  // dynamo
  int dl = 1, dlevels = 10, c_steps = 40;
  std::string profile = "quartic", bc = "realistic";
  double c_min = 0, c_max = 20;
  bool full_pairs = false;
  auto* dynamo = app.add_subcommand("dynamo", "alpha^2-dynamo branches over the profile scale C");
  dynamo->add_option("--l", dl);
  dynamo->add_option("--profile", profile, "quartic, constant:<value> or a coefficient file");
  dynamo->add_option("--c-min", c_min);
  dynamo->add_option("--c-max", c_max);
  dynamo->add_option("--c-steps", c_steps, "Number of grid intervals");
  dynamo->add_option("--bc", bc, "idealized or realistic");
  dynamo->add_option("--levels", dlevels);
  dynamo->add_flag("--full-pairs", full_pairs, "Also write Im lambda < 0");
  add_output(dynamo);

  // bounds
  std::string bmodel = "interp";
  double bb = 0, bnu = -1, bg = 1;
  int n_max = 6;
  auto* bounds = app.add_subcommand("bounds", "k_s, k_c and Herbst crossing table");
  bounds->add_option("--model", bmodel)->check(CLI::IsMember({"interp", "herbst"}));
  bounds->add_option("--b", bb)->required();
  bounds->add_option("--nu", bnu);
  bounds->add_option("--g", bg);
  bounds->add_option("--n-max", n_max);

  // ep-locate
  std::string emodel = "herbst", vary = "b";
  int en = 1;
  double eb = 6.0, enu = -1.0, eg = 1.0, ec = 12.0;
  std::optional<double> guess;
  bool two_param = false;
  auto* ep = app.add_subcommand("ep-locate", "Refine an exceptional point");
  ep->add_option("--model", emodel)->check(CLI::IsMember({"interp", "herbst", "dynamo"}));
  ep->add_option("--n", en, "herbst: crossing index");
  ep->add_option("--b", eb, "interp: b (seed when varied)");
  ep->add_option("--nu", enu, "interp: nu (seed when varied)");
  ep->add_option("--g", eg);
  ep->add_option("--vary", vary, "interp: b or nu")->check(CLI::IsMember({"b", "nu"}));
  ep->add_flag("--two-param", two_param, "interp: merger of two exceptional points in (nu, b)");
  ep->add_option("--guess", guess, "Real eigenvalue seed (mu or lambda)");
  ep->add_option("--c", ec, "dynamo: C seed");
  ep->add_option("--l", dl);
  ep->add_option("--profile", profile);
  ep->add_option("--bc", bc);
  ep->add_option("--out", out_path, "Also write the record to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const bool locating = ep->parsed();
  try {
    if (interp->parsed()) {
      if (ilevels < 1) fail(ErrorKind::InvalidParameter, "levels must be >= 1");
      InterpParams{nu_min, ib, ig}.validate();
      InterpParams{nu_max, ib, ig}.validate();
      SweepResult r = nu_sweep(ib, ig, linspace(nu_min, nu_max, nu_steps, "nu"), ilevels);
      stamp(r, command);
      emit(render(r, format), out_path, out);
    } else if (herbst->parsed()) {
      if (hlevels < 1) fail(ErrorKind::InvalidParameter, "levels must be >= 1");
      if (!(hb_min > 0)) fail(ErrorKind::InvalidParameter, "b must be positive");
      SweepResult r = herbst_sweep(linspace(hb_min, hb_max, hb_steps, "b"), hlevels);
      int n = 0;
      while (crossing_estimate(n + 1).b <= hb_max) ++n;
      if (n > 0) {
        const auto cs = crossings_exact(n);
        for (std::size_t k = 0; k < cs.size(); ++k) {
          const HerbstCrossing& c = cs[k];
          if (c.ep.parameter < hb_min || c.ep.parameter > hb_max) continue;
          r.metadata["crossing." + std::to_string(k + 1)] =
              "b_estimate=" + g17(c.estimate.b) + " E_estimate=" + g17(c.estimate.E) + " b_exact=" +
              g17(c.ep.parameter) + " E_exact=" + g17(c.ep.eigenvalue.real());
        }
      }
      stamp(r, command);
      CsvOptions co;
      co.rescaled = rescaled;
      co.mu = mu_view;
      emit(render(r, format, co), out_path, out);
    } else if (squire->parsed()) {
      if (slevels < 1) fail(ErrorKind::InvalidParameter, "levels must be >= 1");
      SquireParams p;
      if (eps) p.epsilon = *eps;
      else if (alpha_tilde) p = SquireParams::from_reynolds(*alpha_tilde, *reynolds);
      else fail(ErrorKind::InvalidParameter, "give --epsilon or --alpha-tilde with --reynolds");
      p.validate();
      const auto modes = squire_spectrum(p, slevels);
      // Index along each segment: branches from their endpoint, the ray by overall rank.
      std::vector<int> index(modes.size());
      int plus = 0, minus = 0;
      std::vector<std::size_t> order(modes.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return std::abs(modes[a].lambda) < std::abs(modes[b].lambda); });
      std::vector<int> rank(modes.size());
      for (std::size_t k = 0; k < order.size(); ++k) rank[order[k]] = int(k) + 1;
      std::vector<std::size_t> by_end = order;
      std::stable_sort(by_end.begin(), by_end.end(), [&](std::size_t a, std::size_t b) {
        const double ea = std::min(std::abs(modes[a].lambda - 1.0), std::abs(modes[a].lambda + 1.0));
        const double eb_ = std::min(std::abs(modes[b].lambda - 1.0), std::abs(modes[b].lambda + 1.0));
        return ea < eb_;
      });
      for (std::size_t i : by_end) {
        if (modes[i].y.segment == YSegment::PlusBranch) index[i] = ++plus;
        else if (modes[i].y.segment == YSegment::MinusBranch) index[i] = ++minus;
        else index[i] = rank[i];
      }
      std::ostringstream os;
      if (format == "json") {
        json j;
        j["model"] = "squire";
        j["epsilon"] = p.epsilon;
        if (p.alpha_tilde) j["alpha_tilde"] = *p.alpha_tilde, j["reynolds"] = *p.reynolds;
        j["version"] = KREIN_VERSION;
        j["command"] = command;
        json arr = json::array();
        for (std::size_t i = 0; i < modes.size(); ++i) {
          const auto& m = modes[i];
          const int sgn = m.y.segment == YSegment::MinusBranch ? -1 : 1;
          arr.push_back({{"mode", i + 1},
                         {"lambda", cjson(m.lambda)},
                         {"segment", to_string(m.y.segment)},
                         {"distance", m.y.distance},
                         {"segment_index", index[i]},
                         {"ray_asymptote", cjson(squire_ray_asymptote(index[i], p.epsilon))},
                         {"branch_asymptote", cjson(squire_branch_asymptote(index[i], p.epsilon, sgn))}});
        }
        j["modes"] = std::move(arr);
        os << j.dump(1) << "\n";
      } else {
        os << "# krein-spectra squire schema " << kCsvSchemaVersion << "\n";
        os << "# epsilon=" << g17(p.epsilon) << "\n";
        os << "# meta.version=" << KREIN_VERSION << "\n# meta.command=" << command << "\n";
        os << "mode,re_lambda,im_lambda,segment,distance,segment_index,re_ray_asymptote,im_ray_asymptote,"
              "re_branch_asymptote,im_branch_asymptote\n";
        for (std::size_t i = 0; i < modes.size(); ++i) {
          const auto& m = modes[i];
          const int sgn = m.y.segment == YSegment::MinusBranch ? -1 : 1;
          const cplx ray = squire_ray_asymptote(index[i], p.epsilon);
          const cplx br = squire_branch_asymptote(index[i], p.epsilon, sgn);
          os << i + 1 << "," << g17(m.lambda.real()) << "," << g17(m.lambda.imag()) << "," << to_string(m.y.segment)
             << "," << g17(m.y.distance) << "," << index[i] << "," << g17(ray.real()) << "," << g17(ray.imag()) << ","
             << g17(br.real()) << "," << g17(br.imag()) << "\n";
        }
      }
      emit(os.str(), out_path, out);
    } else if (dynamo->parsed()) {
      if (dlevels < 1) fail(ErrorKind::InvalidParameter, "levels must be >= 1");
      DynamoParams p;
      p.l = dl;
      p.bc = parse_dynamo_bc(bc);
      p.profile = AlphaProfile::parse(profile, c_min);
      p.validate();
      SweepResult r = c_sweep(p, linspace(c_min, c_max, c_steps, "C"), dlevels);
      r.metadata["profile"] = profile;
      stamp(r, command);
      CsvOptions co;
      co.full_pairs = full_pairs;
      emit(render(r, format, co), out_path, out);
    } else if (bounds->parsed()) {
      std::ostringstream os;
      const double nu = bmodel == "herbst" ? -1.0 : bnu;
      const InterpParams ip{nu, bb, bg};
      ip.validate();
      os << "model=" << bmodel << " b=" << g17(bb) << " nu=" << g17(nu) << " g=" << g17(bg) << "\n";
      os << "k_s=" << g17(supremum_bound_ks(bb, nu, bg)) << "\n";
      os << "k_c=" << critical_level_kc(ip) << "\n";
      if (bmodel == "herbst") {
        if (n_max < 1) fail(ErrorKind::InvalidParameter, "n-max must be >= 1");
        os << "k_a=" << g17(lowest_real_mode_bound_ka(bb)) << "\n";
        os << "n,b_estimate,E_estimate,b_exact,E_exact\n";
        const auto cs = crossings_exact(n_max);
        for (std::size_t k = 0; k < cs.size(); ++k)
          os << k + 1 << "," << g17(cs[k].estimate.b) << "," << g17(cs[k].estimate.E) << ","
             << g17(cs[k].ep.parameter) << "," << g17(cs[k].ep.eigenvalue.real()) << "\n";
      }
      out << os.str();
    } else if (ep->parsed()) {
      json rec;
      rec["model"] = emodel;
      if (emodel == "herbst") {
        const HerbstCrossing c = crossing_exact(en);
        rec["n"] = en;
        rec["b"] = c.ep.parameter;
        rec["E"] = c.ep.eigenvalue.real();
        rec["residual_f"] = c.ep.residual_f;
        rec["residual_df"] = c.ep.residual_df;
        rec["b_estimate"] = c.estimate.b;
        rec["E_estimate"] = c.estimate.E;
        rec["sign"] = c.sign;
      } else if (emodel == "interp") {
        const InterpParams ip{enu, eb, eg};
        ip.validate();
        const cplx mu0 = guess ? cplx(*guess) : closest_pair_guess(eigenvalues(ip, 14));
        ExceptionalPoint e = vary == "nu" && !two_param ? interp_ep_in_nu(eb, eg, mu0, enu)
                                                        : interp_ep_in_b(enu, eg, mu0, eb);
        rec["g"] = eg;
        if (two_param) {
          rec["herbst_line"] = {{"nu", enu}, {"b", e.parameter}, {"mu", e.eigenvalue.real()}};
          e = interp_follow_to_coalescence(eg, e.eigenvalue.real(), enu, e.parameter);
          rec["nu"] = e.parameter;
          rec["b"] = e.parameter2.value_or(eb);
        } else if (vary == "nu") {
          rec["nu"] = e.parameter;
          rec["b"] = eb;
        } else {
          rec["nu"] = enu;
          rec["b"] = e.parameter;
        }
        const double b = rec["b"].get<double>();
        rec["mu"] = cjson(e.eigenvalue);
        rec["E"] = cjson(e.eigenvalue / (b * b));
        rec["residual_f"] = e.residual_f;
        rec["residual_df"] = e.residual_df;
      } else {
        DynamoParams p;
        p.l = dl;
        p.bc = parse_dynamo_bc(bc);
        p.profile = AlphaProfile::parse(profile, ec);
        p.validate();
        const cplx z0 = guess ? cplx(*guess) : closest_pair_guess(dynamo_spectrum(p, 10));
        const FamilyFn f = [p](cplx z, double C) {
          DynamoParams q = p;
          q.profile.scale = C;
          return dynamo_determinant(z, q);
        };
        const ExceptionalPoint e = find_double_root(f, z0, ec);
        rec["l"] = dl;
        rec["bc"] = to_string(p.bc);
        rec["profile"] = profile;
        rec["C"] = e.parameter;
        rec["lambda"] = cjson(e.eigenvalue);
        rec["residual_f"] = e.residual_f;
        rec["residual_df"] = e.residual_df;
        rec["neutrality"] = dynamo_neutrality(DynamoParams{p.l, p.profile.with_scale(e.parameter), p.bc, p.r0, p.rel_tol},
                                              cplx(e.eigenvalue.real(), 0.0))
                                .neutrality;
      }
      rec["version"] = KREIN_VERSION;
      const std::string text = rec.dump() + "\n";
      out << text;
      if (!out_path.empty() && out_path != "-") emit(text, out_path, out);
    }
  } catch (const SpectralError& e) {
    err << "krein-spectra: " << e.what() << "\n";
    return exit_code_for(e, locating);
  } catch (const std::exception& e) {
    err << "krein-spectra: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitOk;
}

}  // namespace krein
