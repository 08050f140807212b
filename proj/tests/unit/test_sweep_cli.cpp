#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "catch_amalgamated.hpp"
#include "json.hpp"
#include "krein/cli.hpp"
#include "krein/errors.hpp"
#include "krein/herbst.hpp"
#include "krein/interp.hpp"
#include "krein/sweep.hpp"

using namespace krein;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::StartsWith;
using Catch::Matchers::WithinAbs;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::vector<const char*> argv{"krein-spectra"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) v.push_back(l);
  return v;
}

SweepResult small_herbst() {
  return herbst_sweep({2.2, 2.25, 2.3, 2.35, 2.4}, 2);
}

}  // namespace

TEST_CASE("JSON round trip preserves the sweep", "[sweep]") {
  SweepResult r = small_herbst();
  r.metadata["note"] = "a \"quoted\" value";
  r.warnings.push_back("w1");
  const std::string text = to_json_string(r);
  const SweepResult back = from_json_string(text);
  CHECK(back == r);
  CHECK(to_json_string(back) == text);
  std::stringstream ss;
  write_json(ss, r);
  CHECK(read_json(ss) == r);
  CHECK_THROWS_AS(from_json_string("{\"model\": 3"), SpectralError);
  CHECK_THROWS_AS(from_json_string("[1, 2]"), SpectralError);
}

TEST_CASE("exceptional points re-verify from the stored parameters", "[sweep]") {
  const SweepResult r = small_herbst();
  REQUIRE(r.exceptional_points.size() == 1);
  const auto checks = verify_exceptional_points(from_json_string(to_json_string(r)), 1e-4);
  REQUIRE(checks.size() == 1);
  CHECK(checks[0].ok);

  SweepResult bad = r;
  bad.exceptional_points[0].eigenvalue += 0.3;
  CHECK_FALSE(verify_exceptional_points(bad, 1e-4)[0].ok);
}

TEST_CASE("CSV layout", "[sweep]") {
  const SweepResult r = small_herbst();
  std::ostringstream os;
  write_csv(os, r, CsvOptions{true, true, true});
  const auto ls = lines(os.str());
  REQUIRE(ls.size() > 5);
  CHECK(ls[0] == "# krein-spectra csv schema 1");
  CHECK(ls[1] == "# model=herbst");
  std::size_t header = 0;
  while (header < ls.size() && ls[header][0] == '#') ++header;
  REQUIRE(header < ls.size());
  CHECK_THAT(ls[header], StartsWith("b,level,re_E,im_E"));
  CHECK_THAT(ls[header], ContainsSubstring("re_mu"));
  CHECK_THAT(os.str(), ContainsSubstring("# ep "));
  // One row per branch point.
  std::size_t points = 0;
  for (const auto& b : r.branches) points += b.points.size();
  CHECK(ls.size() - header - 1 == points);
}

TEST_CASE("CLI exit codes", "[cli]") {
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"no-such-command"}).code == kExitUsage);
  CHECK(cli({"interp-sweep"}).code == kExitUsage);
  CHECK(cli({"interp-sweep", "--b", "2", "--nu-min", "-3"}).code == kExitUsage);
  CHECK(cli({"herbst", "--format", "xml"}).code == kExitUsage);
  CHECK(cli({"squire"}).code == kExitUsage);
  CHECK(cli({"dynamo", "--bc", "open"}).code == kExitUsage);
  CHECK(cli({"dynamo", "--profile", "/nonexistent/profile.txt"}).code != kExitOk);
  CHECK(cli({"--help"}).code == kExitOk);
  const Run v = cli({"--version"});
  CHECK(v.code == kExitOk);
  CHECK_THAT(v.out, ContainsSubstring(KREIN_VERSION));
}

TEST_CASE("CLI herbst sweep is deterministic and carries crossing records", "[cli]") {
  const std::vector<std::string> args{"herbst", "--b-min", "2.2", "--b-max", "2.4", "--b-steps", "4", "--levels", "2"};
  const Run a = cli(args), b = cli(args);
  REQUIRE(a.code == kExitOk);
  CHECK(a.out == b.out);
  CHECK_THAT(a.out, ContainsSubstring("# meta.crossing.1=b_estimate="));
  CHECK_THAT(a.out, ContainsSubstring("b_exact=2.3091"));
}

TEST_CASE("CLI JSON output round trips and re-verifies", "[cli]") {
  const Run a = cli({"interp-sweep", "--b", "2.5", "--nu-min", "-1", "--nu-max", "-0.9", "--nu-steps", "2", "--levels",
                     "3", "--format", "json"});
  REQUIRE(a.code == kExitOk);
  const SweepResult r = from_json_string(a.out);
  CHECK(r.model == "interp");
  CHECK(r.grid.size() == 3);
  CHECK(r.metadata.at("version") == KREIN_VERSION);
  for (const auto& c : verify_exceptional_points(r, 1e-4)) CHECK(c.ok);
}

TEST_CASE("CLI single-point grids and file output", "[cli]") {
  const std::string path = "test_sweep_cli_out.csv";
  std::remove(path.c_str());
  const Run a = cli({"dynamo", "--profile", "constant:1", "--bc", "idealized", "--c-min", "1", "--c-max", "1",
                     "--c-steps", "4", "--levels", "2", "--out", path});
  REQUIRE(a.code == kExitOk);
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  const auto ls = lines(ss.str());
  std::size_t header = 0;
  while (header < ls.size() && ls[header][0] == '#') ++header;
  REQUIRE(header < ls.size());
  CHECK_THAT(ls[header], StartsWith("C,level,re_lambda,im_lambda"));
  CHECK(ls.size() - header - 1 >= 2);
  std::remove(path.c_str());
}

TEST_CASE("CLI bounds and ep-locate", "[cli]") {
  const Run b = cli({"bounds", "--model", "interp", "--b", "2", "--nu", "-0.5"});
  REQUIRE(b.code == kExitOk);
  CHECK_THAT(b.out, ContainsSubstring("k_c=1"));
  CHECK_THAT(b.out, ContainsSubstring("k_s=4.08"));

  const Run e = cli({"ep-locate", "--model", "herbst", "--n", "1"});
  REQUIRE(e.code == kExitOk);
  const auto j = nlohmann::json::parse(e.out);
  CHECK_THAT(j.at("b").get<double>(), WithinAbs(2.309129, 1e-5));
  CHECK(j.at("residual_f").get<double>() <= 1e-4);

  const Run s = cli({"squire", "--epsilon", "0.001", "--levels", "6", "--format", "json"});
  REQUIRE(s.code == kExitOk);
  CHECK(nlohmann::json::parse(s.out).at("modes").size() == 6);
}
