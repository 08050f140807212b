#include "krein/sweep.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "krein/dynamo.hpp"
#include "krein/errors.hpp"
#include "krein/herbst.hpp"
#include "krein/interp.hpp"
#include "krein/roots.hpp"

namespace krein {

using nlohmann::json;

namespace {

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double fixed(const SweepResult& r, const std::string& key) {
  const auto it = r.fixed_params.find(key);
  if (it == r.fixed_params.end()) fail(ErrorKind::ParseError, "missing fixed parameter '" + key + "'");
  return it->second;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// One line per header entry; newlines inside values are flattened.
std::string oneline(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

cplx cparse(const json& j) {
  if (!j.is_array() || j.size() != 2) fail(ErrorKind::ParseError, "complex value must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

SegmentLabel parse_label(const std::string& s) {
  if (s == "Real") return SegmentLabel::Real;
  if (s == "ComplexPair") return SegmentLabel::ComplexPair;
  fail(ErrorKind::ParseError, "unknown segment label '" + s + "'");
}

bool growth_order(const std::string& model) { return model == "dynamo"; }

struct Row {
  std::size_t grid_index;
  int level;
  const BranchPoint* point;
  int branch_id;
};

}  // namespace

bool operator==(const SpectralBranch& a, const SpectralBranch& b) {
  if (a.parameter_name != b.parameter_name || a.branch_id != b.branch_id || a.partner_id != b.partner_id ||
      a.diagnostic != b.diagnostic || a.points.size() != b.points.size())
    return false;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    const auto &p = a.points[i], &q = b.points[i];
    if (p.parameter != q.parameter || p.value != q.value || p.label != q.label) return false;
  }
  return true;
}

bool operator==(const ExceptionalPoint& a, const ExceptionalPoint& b) {
  return a.parameter == b.parameter && a.parameter2 == b.parameter2 && a.eigenvalue == b.eigenvalue &&
         a.residual_f == b.residual_f && a.residual_df == b.residual_df && a.branches == b.branches;
}

bool operator==(const SweepResult& a, const SweepResult& b) {
  return a.model == b.model && a.parameter_name == b.parameter_name && a.fixed_params == b.fixed_params &&
         a.grid == b.grid && a.branches == b.branches && a.exceptional_points == b.exceptional_points &&
         a.metadata == b.metadata && a.warnings == b.warnings;
}

void write_csv(std::ostream& os, const SweepResult& result, const CsvOptions& options) {
  const std::string& model = result.model;
  const std::string pname = result.parameter_name.empty() ? "parameter" : result.parameter_name;
  os << "# krein-spectra csv schema " << kCsvSchemaVersion << "\n";
  os << "# model=" << model << "\n";
  os << "# parameter=" << pname << "\n";
  for (const auto& [k, v] : result.fixed_params) os << "# fixed." << k << "=" << g17(v) << "\n";
  for (const auto& [k, v] : result.metadata) os << "# meta." << k << "=" << oneline(v) << "\n";
  for (const auto& ep : result.exceptional_points) {
    os << "# ep " << pname << "=" << g17(ep.parameter);
    if (ep.parameter2) os << " parameter2=" << g17(*ep.parameter2);
    os << " re=" << g17(ep.eigenvalue.real()) << " im=" << g17(ep.eigenvalue.imag())
       << " residual_f=" << g17(ep.residual_f) << " residual_df=" << g17(ep.residual_df) << " branches=";
    for (std::size_t i = 0; i < ep.branches.size(); ++i) os << (i ? ";" : "") << ep.branches[i];
    os << "\n";
  }
  for (const auto& w : result.warnings) os << "# warning=" << oneline(w) << "\n";

  // Level = rank among the branch values at the same grid point.
  std::vector<Row> rows;
  for (std::size_t gi = 0; gi < result.grid.size(); ++gi) {
    std::vector<Row> at;
    for (const auto& br : result.branches)
      for (const auto& pt : br.points)
        if (pt.parameter == result.grid[gi]) at.push_back({gi, 0, &pt, br.branch_id});
    std::stable_sort(at.begin(), at.end(), [&](const Row& a, const Row& b) {
      const cplx x = a.point->value, y = b.point->value;
      if (growth_order(model)) return x.real() > y.real() || (x.real() == y.real() && x.imag() > y.imag());
      return x.real() < y.real() || (x.real() == y.real() && x.imag() < y.imag());
    });
    for (std::size_t k = 0; k < at.size(); ++k) at[k].level = int(k) + 1;
    rows.insert(rows.end(), at.begin(), at.end());
  }

  const double b = model == "interp" && result.fixed_params.count("b") ? result.fixed_params.at("b") : 1.0;
  if (model == "interp") {
    os << pname << ",level,re_E,im_E,re_mu,im_mu,segment_label,branch_id\n";
  } else if (model == "herbst") {
    os << pname << ",level,re_E,im_E";
    if (options.rescaled) os << ",re_E_over_b,im_E_over_b";
    if (options.mu) os << ",re_mu,im_mu";
    os << ",segment_label,branch_id\n";
  } else {
    os << pname << ",level,re_lambda,im_lambda,segment_label,branch_id\n";
  }
  for (const Row& r : rows) {
    const double p = r.point->parameter;
    const cplx v = r.point->value;
    if (model == "dynamo" && !options.full_pairs && v.imag() < 0) continue;
    os << g17(p) << "," << r.level << ",";
    if (model == "interp") {
      const double bb = pname == "b" ? p : b;
      const cplx E = v / (bb * bb);
      os << g17(E.real()) << "," << g17(E.imag()) << "," << g17(v.real()) << "," << g17(v.imag());
    } else if (model == "herbst") {
      os << g17(v.real()) << "," << g17(v.imag());
      if (options.rescaled) os << "," << g17(v.real() / p) << "," << g17(v.imag() / p);
      if (options.mu) os << "," << g17(p * p * v.real()) << "," << g17(p * p * v.imag());
    } else {
      os << g17(v.real()) << "," << g17(v.imag());
    }
    os << "," << csv_field(to_string(r.point->label)) << "," << r.branch_id << "\n";
  }
}

void write_json(std::ostream& os, const SweepResult& result) { os << to_json_string(result) << "\n"; }

std::string to_json_string(const SweepResult& result) {
  json j;
  j["schema_version"] = kCsvSchemaVersion;
  j["model"] = result.model;
  j["parameter_name"] = result.parameter_name;
  j["fixed_params"] = result.fixed_params;
  j["grid"] = result.grid;
  j["metadata"] = result.metadata;
  j["warnings"] = result.warnings;
  json branches = json::array();
  for (const auto& br : result.branches) {
    json jb;
    jb["parameter_name"] = br.parameter_name;
    jb["branch_id"] = br.branch_id;
    jb["partner_id"] = br.partner_id ? json(*br.partner_id) : json(nullptr);
    jb["diagnostic"] = br.diagnostic;
    json pts = json::array();
    for (const auto& p : br.points)
      pts.push_back({{"parameter", p.parameter}, {"value", cjson(p.value)}, {"label", to_string(p.label)}});
    jb["points"] = std::move(pts);
    branches.push_back(std::move(jb));
  }
  j["branches"] = std::move(branches);
  json eps = json::array();
  for (const auto& ep : result.exceptional_points) {
    eps.push_back({{"parameter", ep.parameter},
                   {"parameter2", ep.parameter2 ? json(*ep.parameter2) : json(nullptr)},
                   {"eigenvalue", cjson(ep.eigenvalue)},
                   {"residual_f", ep.residual_f},
                   {"residual_df", ep.residual_df},
                   {"branches", ep.branches}});
  }
  j["exceptional_points"] = std::move(eps);
  return j.dump(1);
}

SweepResult from_json_string(const std::string& text) {
  try {
    const json j = json::parse(text);
    SweepResult r;
    r.model = j.at("model").get<std::string>();
    r.parameter_name = j.at("parameter_name").get<std::string>();
    r.fixed_params = j.at("fixed_params").get<std::map<std::string, double>>();
    r.grid = j.at("grid").get<std::vector<double>>();
    r.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    for (const auto& jb : j.at("branches")) {
      SpectralBranch br;
      br.parameter_name = jb.at("parameter_name").get<std::string>();
      br.branch_id = jb.at("branch_id").get<int>();
      if (!jb.at("partner_id").is_null()) br.partner_id = jb.at("partner_id").get<int>();
      br.diagnostic = jb.at("diagnostic").get<std::string>();
      for (const auto& jp : jb.at("points"))
        br.points.push_back({jp.at("parameter").get<double>(), cparse(jp.at("value")),
                             parse_label(jp.at("label").get<std::string>())});
      r.branches.push_back(std::move(br));
    }
    for (const auto& je : j.at("exceptional_points")) {
      ExceptionalPoint ep;
      ep.parameter = je.at("parameter").get<double>();
      if (!je.at("parameter2").is_null()) ep.parameter2 = je.at("parameter2").get<double>();
      ep.eigenvalue = cparse(je.at("eigenvalue"));
      ep.residual_f = je.at("residual_f").get<double>();
      ep.residual_df = je.at("residual_df").get<double>();
      ep.branches = je.at("branches").get<std::vector<int>>();
      r.exceptional_points.push_back(std::move(ep));
    }
    return r;
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("sweep JSON: ") + e.what());
  }
}

SweepResult read_json(std::istream& is) {
  std::stringstream ss;
  ss << is.rdbuf();
  return from_json_string(ss.str());
}

std::vector<EpCheck> verify_exceptional_points(const SweepResult& result, double tol) {
  std::vector<EpCheck> out;
  for (const auto& ep : result.exceptional_points) {
    FamilyFn f;
    std::function<cplx(cplx, double)> dfdz;
    if (result.model == "interp") {
      const double g = fixed(result, "g");
      if (result.parameter_name == "b") {
        const double nu = fixed(result, "nu");
        f = [nu, g](cplx z, double b) { return shooting_determinant(z, InterpParams{nu, b, g}); };
      } else {
        const double b = ep.parameter2 ? *ep.parameter2 : fixed(result, "b");
        f = [b, g](cplx z, double nu) { return shooting_determinant(z, InterpParams{nu, b, g}); };
      }
    } else if (result.model == "herbst") {
      f = [](cplx E, double b) { return herbst_determinant(E, b); };
      dfdz = [](cplx E, double b) { return herbst_determinant_dE(E, b); };
    } else if (result.model == "dynamo") {
      DynamoParams p;
      p.l = int(fixed(result, "l"));
      p.bc = fixed(result, "bc") == 0.0 ? DynamoBC::Idealized : DynamoBC::Realistic;
      p.r0 = fixed(result, "r0");
      for (int k = 0; result.fixed_params.count("coef" + std::to_string(k)); ++k)
        p.profile.coefficients.push_back(result.fixed_params.at("coef" + std::to_string(k)));
      f = [p](cplx z, double C) {
        DynamoParams q = p;
        q.profile.scale = C;
        return dynamo_determinant(z, q);
      };
    } else {
      fail(ErrorKind::ParseError, "unknown model '" + result.model + "'");
    }
    const EpResiduals r = ep_residuals(f, ep.eigenvalue, ep.parameter, dfdz);
    out.push_back({r.f, r.df, r.f <= tol && r.df <= tol});
  }
  return out;
}

}  // namespace krein
