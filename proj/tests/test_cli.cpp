#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ahg/conformal.hpp"
#include "cli.hpp"

using namespace ahg;
using Json = nlohmann::ordered_json;

namespace {

struct Invocation {
  int code;
  std::string out, err;
};

Invocation run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

Json run_json(std::vector<std::string> args, int expected_code = 0) {
  args.push_back("--format");
  args.push_back("json");
  const Invocation r = run(args);
  EXPECT_EQ(r.code, expected_code) << r.err;
  return Json::parse(r.out);
}

std::vector<std::vector<double>> parse_csv(const std::string& text, std::vector<std::string>& header) {
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);
  header.clear();
  std::stringstream hs(line);
  for (std::string c; std::getline(hs, c, ',');) header.push_back(c);
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    std::vector<double> row;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) row.push_back(std::stod(c));
    rows.push_back(row);
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  EXPECT_NE(it, header.end()) << name;
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

TEST(CliReport, KahlerTorusIsZero) {
  const Json j = run_json({"report", "t4_kahler", "--points", "5"});
  ASSERT_EQ(j["results"].size(), 5u);
  for (const auto& row : j["results"])
    for (const char* k : {"s", "s_J", "S1", "S2", "alpha2", "N0_2", "dF_minus2", "dF0_plus2"})
      EXPECT_EQ(row[k].get<double>(), 0.0) << k;
}

TEST(CliReport, HopfChernScalarIsConstant) {
  const Json j = run_json({"report", "hopf_surface", "--points", "8"});
  const double first = j["results"][0]["S1"].get<double>();
  for (const auto& row : j["results"]) EXPECT_NEAR(row["S1"].get<double>(), first, 1e-12);
  EXPECT_NEAR(j["summary"]["S1"]["max"].get<double>() - j["summary"]["S1"]["min"].get<double>(), 0, 1e-12);
}

TEST(CliReport, TwistorAddress) {
  const Json j = run_json({"report", "twistor:s4_round:+:t=1", "--points", "3"});
  for (const auto& row : j["results"]) EXPECT_NEAR(row["s"].get<double>(), 12, 1e-9);
  EXPECT_EQ(j["config"]["manifold"], "twistor:s4_round:+:t=1");
  EXPECT_EQ(j["results"][0]["point"].size(), 6u);
}

TEST(CliReport, FileAddress) {
  const auto path = std::filesystem::temp_directory_path() / "ahg_cli_chart.txt";
  {
    std::ofstream f(path);
    f << "[meta]\nname = scaled\nn = 1\n[domain]\n-1 1\n-1 1\n"
         "[metric]\nexp(x1), 0\n0, exp(x1)\n[J]\n0, -1\n1, 0\n";
  }
  const Json j = run_json({"report", "file:" + path.string(), "--points", "3"});
  std::filesystem::remove(path);
  // e^{x1} delta is flat.
  for (const auto& row : j["results"]) EXPECT_NEAR(row["s"].get<double>(), 0, 1e-12);
  EXPECT_EQ(j["results"].size(), 3u);
}

TEST(CliVerify, KahlerTorusPasses) {
  const Json j = run_json({"verify", "all", "t4_kahler", "--points", "5"});
  EXPECT_EQ(j["summary"]["failed"], 0);
  for (const auto& row : j["results"]) EXPECT_TRUE(row["pass"].get<bool>());
}

TEST(CliVerify, NearlyKahlerSelectedIdentities) {
  const Json j = run_json({"verify", "I2.4,I2.7", "s6_nearly_kahler", "--points", "5"});
  ASSERT_EQ(j["results"].size(), 2u);
  EXPECT_EQ(j["results"][0]["check"], "I2.4");
  EXPECT_EQ(j["results"][1]["check"], "I2.7");
}

TEST(CliVerify, HermitianOnlyIdentityIsRejected) {
  const Invocation r = run({"verify", "I5.4", "s6_nearly_kahler"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("not Hermitian"), std::string::npos);
  // Under "all" the same identity is skipped instead.
  const Invocation all = run({"verify", "all", "s6_nearly_kahler", "--points", "2"});
  EXPECT_EQ(all.code, 0) << all.err;
  EXPECT_NE(all.err.find("I5.4 skipped"), std::string::npos);
}

TEST(CliVerify, ImpossibleToleranceFails) {
  const Json j = run_json({"verify", "I2.4", "s6_nearly_kahler", "--points", "3", "--tol", "0"}, 1);
  EXPECT_FALSE(j["results"][0]["pass"].get<bool>());
  EXPECT_EQ(j["results"][0]["worst_point"].size(), 6u);
}

TEST(CliVerify, TwistorChecks) {
  const Json j = run_json({"verify", "all", "twistor:s4_round:-:t=0.7", "--points", "3"});
  std::vector<std::string> names;
  for (const auto& row : j["results"]) names.push_back(row["check"]);
  for (const char* n : {"T.coframe", "T.structure", "T.levi_civita", "T.rho", "T.integrability", "T.canonical",
                        "T.closed_form"})
    EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
  EXPECT_EQ(std::find(names.begin(), names.end(), "I5.4"), names.end());
  // The canonical-form check needs the minus sign.
  EXPECT_EQ(run({"verify", "T.canonical", "twistor:s4_round:+:t=1"}).code, 2);
  EXPECT_EQ(run({"verify", "T.rho", "hopf_surface"}).code, 2);
}

TEST(CliVerify, ConformalIdentitiesNeedFactor) {
  EXPECT_EQ(run({"verify", "I3.11", "t4_perturbed"}).code, 2);
  const Json j = run_json({"verify", "I3.11,I3.12,I4.5", "hopf_surface", "--points", "3", "--factor", "0.1*x1*x2"});
  EXPECT_EQ(j["summary"]["failed"], 0);
}

TEST(CliClassify, DeclaredClasses) {
  for (const char* name : {"t4_kahler", "kodaira_thurston", "iwasawa", "hopf_surface", "s6_nearly_kahler"}) {
    const Json j = run_json({"classify", name, "--points", "4"});
    EXPECT_TRUE(j["results"][0]["match"].get<bool>()) << name;
  }
  EXPECT_EQ(run_json({"classify", "twistor:s4_round:+:t=0.8", "--points", "3"})["summary"]["label"], "W3");
}

TEST(CliSweep, HyperbolicScalarCurvatureCrossesZeroOnce) {
  const Invocation r = run({"twistor-sweep", "h4_hyperbolic", "--sign", "+", "--t-min", "0.2", "--t-max", "2", "--steps", "50"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::vector<std::string> h;
  const auto rows = parse_csv(r.out, h);
  ASSERT_EQ(rows.size(), 50u);
  const std::size_t t = column(h, "t"), s = column(h, "s_generic");
  const double root = std::sqrt(-3 + std::sqrt(10.0));
  int crossings = 0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if ((rows[i - 1][s] > 0) != (rows[i][s] > 0)) {
      ++crossings;
      EXPECT_LE(rows[i - 1][t], root);
      EXPECT_GE(rows[i][t], root);
    }
  EXPECT_EQ(crossings, 1);
}

TEST(CliSweep, FlatBaseMinusHasZeroChernScalar) {
  const Invocation r = run({"twistor-sweep", "t4_flat_base", "--sign", "-", "--steps", "6"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::vector<std::string> h;
  const auto rows = parse_csv(r.out, h);
  const std::size_t a = column(h, "S1_closed"), b = column(h, "S1_generic");
  for (const auto& row : rows) {
    EXPECT_EQ(row[a], 0.0);
    EXPECT_LE(std::abs(row[b]), 1e-12);
  }
}

TEST(CliSweep, RoundSphereUnitScaleRow) {
  const Invocation r = run({"twistor-sweep", "s4_round", "--t-min", "1", "--t-max", "1", "--steps", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::vector<std::string> h;
  const auto rows = parse_csv(r.out, h);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0][column(h, "S1_generic")], 6, 1e-9);
  EXPECT_EQ(rows[0][column(h, "S1_closed")], 6);
}

TEST(CliSweep, BadRange) {
  EXPECT_EQ(run({"twistor-sweep", "s4_round", "--t-min", "0"}).code, 2);
  EXPECT_EQ(run({"twistor-sweep", "s4_round", "--t-min", "2", "--t-max", "1"}).code, 2);
  EXPECT_EQ(run({"twistor-sweep", "hopf_surface"}).code, 2);
}

TEST(CliSolve, KahlerTorusIsTrivial) {
  const Json j = run_json({"solve", "t4_kahler", "1", "0", "8"});
  EXPECT_EQ(j["results"][0]["gamma"].get<double>(), 0.0);
  EXPECT_EQ(j["results"][0]["f_sup"].get<double>(), 0.0);
}

TEST(CliSolve, PerturbedTorusWritesGrid) {
  const auto path = std::filesystem::temp_directory_path() / "ahg_cli_solve.grid";
  const Json j = run_json({"solve", "t4_perturbed", "1", "0", "16", "--grid", path.string()});
  EXPECT_LE(j["results"][0]["residual"].get<double>(), 1e-10);
  EXPECT_LE(j["results"][0]["sign_check_residual"].get<double>(), 1e-6);
  const SpectralGrid g = load_grid(path.string());
  EXPECT_EQ(g.resolution, std::vector<int>(4, 16));
  std::filesystem::remove(path);
}

TEST(CliSolve, DegenerateWeightsAreRejected) {
  const Invocation r = run({"solve", "t4_perturbed", "1", "-2", "16"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("conformal class"), std::string::npos);
  EXPECT_EQ(run({"solve", "hopf_surface", "1", "0", "8"}).code, 2);
}

TEST(CliGauduchon, Converges) {
  const Json j = run_json({"gauduchon", "t4_perturbed"});
  EXPECT_TRUE(j["summary"]["converged"].get<bool>());
  EXPECT_LE(j["summary"]["residual"].get<double>(), 1e-9);
}

TEST(CliGamma, FlatTorusAndHopf) {
  EXPECT_NEAR(run_json({"gamma", "t4_kahler"})["summary"]["value"].get<double>(), 0, 1e-12);
  EXPECT_GT(run_json({"gamma", "hopf_surface"})["summary"]["value"].get<double>(), 0);
}

TEST(CliBerger, HopfWithinThreeStandardErrors) {
  const Json j = run_json({"berger", "hopf_surface", "--points", "2", "--samples", "20000"});
  for (const auto& row : j["results"]) EXPECT_LE(row["z"].get<double>(), 3);
  EXPECT_EQ(run({"berger", "hopf_surface", "--samples", "1"}).code, 2);
}

TEST(CliContract, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"nonsense"}).code, 2);
  EXPECT_EQ(run({"report"}).code, 2);
  EXPECT_EQ(run({"report", "no_such_manifold"}).code, 2);
  EXPECT_EQ(run({"report", "t4_kahler", "--format", "xml"}).code, 2);
  EXPECT_EQ(run({"report", "t4_kahler", "--points", "0"}).code, 2);
  EXPECT_EQ(run({"report", "twistor:s4_round:*:t=1"}).code, 2);
  EXPECT_EQ(run({"report", "twistor:s4_round:+:t=-1"}).code, 2);
  EXPECT_EQ(run({"report", "twistor:hopf_surface:+:t=1"}).code, 2);
  EXPECT_EQ(run({"report", "file:/nonexistent/chart"}).code, 2);
  EXPECT_EQ(run({"verify", "I9.9", "t4_kahler"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(CliContract, DeterministicOutput) {
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"report", "iwasawa", "--points", "4", "--format", "json"},
        std::vector<std::string>{"twistor-sweep", "s4_round", "--steps", "4"},
        std::vector<std::string>{"berger", "hopf_surface", "--points", "1", "--samples", "2000", "--format", "csv"}}) {
    const Invocation a = run(args), b = run(args);
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
  }
}

TEST(CliContract, FloatsRoundTrip) {
  EXPECT_EQ(cli::format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(cli::format_double(1.0 / 3.0)), 1.0 / 3.0);
  Json j;
  j["x"] = 1.0 / 3.0;
  j["nan"] = std::nan("");
  j["n"] = 3;
  const std::string text = cli::dump_json(j);
  EXPECT_NE(text.find("0.33333333333333331"), std::string::npos);
  EXPECT_NE(text.find("\"nan\": null"), std::string::npos);
  EXPECT_EQ(Json::parse(text)["x"].get<double>(), 1.0 / 3.0);
}

TEST(CliContract, OutputFile) {
  const auto path = std::filesystem::temp_directory_path() / "ahg_cli_out.json";
  const Invocation r = run({"classify", "hopf_surface", "--points", "2", "--format", "json", "--out", path.string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream f(path);
  const Json j = Json::parse(f);
  EXPECT_EQ(j["summary"]["label"], "W4");
  std::filesystem::remove(path);
}
