#include "cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using sspop::cli::run_cli;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sspop_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines(const fs::path& p) {
  std::vector<std::string> out;
  std::istringstream in(slurp(p));
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "model.ini";
  std::ofstream(p) << text;
  return p;
}

double last_P(const fs::path& trajectory) {
  const std::vector<std::string> rows = lines(trajectory);
  const std::string& last = rows.back();
  const auto a = last.find(',');
  const auto b = last.find(',', a + 1);
  return std::stod(last.substr(a + 1, b == std::string::npos ? std::string::npos : b - a - 1));
}

}  // namespace

TEST_CASE("equilibria at C = 0: one tangent row") {
  const fs::path dir = scratch("eq0");
  const Run r = cli({"equilibria", "--C", "0", "--out", dir.string()});
  REQUIRE(r.code == 0);
  const std::vector<std::string> rows = lines(dir / "equilibria.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == "index,P_star,p0,dQ,tangent,residual");
  CHECK(rows[1].rfind("0,1.99999999", 0) == 0);
  CHECK(rows[1].find(",true,") != std::string::npos);
  const json j = json::parse(slurp(dir / "equilibria.json"));
  CHECK(j["trivial"] == true);
  CHECK(j["equilibria"].size() == 1);
}

TEST_CASE("equilibria at C = 0.2 from a config file") {
  const fs::path dir = scratch("eq02");
  const fs::path cfg = write_config(dir, "[model]\nfamily = example\n[inflow]\nC = 0.2\n");
  const Run r = cli({"equilibria", "--config", cfg.string(), "--out", dir.string()});
  REQUIRE(r.code == 0);
  CHECK(lines(dir / "equilibria.csv").size() == 4);
}

TEST_CASE("malformed expression in config exits 2 with the offset") {
  const fs::path dir = scratch("bad_expr");
  const fs::path cfg = write_config(dir, "[model]\nm = 6\nbeta = 1 + * s\nmu = 1\ngamma = 1\n");
  const Run r = cli({"equilibria", "--config", cfg.string(), "--out", dir.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("model.beta") != std::string::npos);
  CHECK(r.err.find("at byte 4") != std::string::npos);
}

TEST_CASE("missing config and bad values exit 2") {
  const fs::path dir = scratch("bad_cfg");
  CHECK(cli({"equilibria", "--config", (dir / "nope.ini").string(), "--out", dir.string()}).code == 2);
  const fs::path cfg = write_config(dir, "[grid]\nN = lots\n");
  CHECK(cli({"equilibria", "--config", cfg.string(), "--out", dir.string()}).code == 2);
  CHECK(cli({"equilibria", "--C", "-1", "--out", dir.string()}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({}).code == 2);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("empty result is a success with an empty table") {
  const fs::path dir = scratch("empty");
  const fs::path cfg = write_config(dir, "[model]\nm = 6\nbeta = 0.1\nmu = 1\ngamma = 1\n");
  REQUIRE(cli({"equilibria", "--config", cfg.string(), "--out", dir.string()}).code == 0);
  CHECK(lines(dir / "equilibria.csv").size() == 1);
}

TEST_CASE("stability at C = 0.2") {
  const fs::path dir = scratch("stab02");
  REQUIRE(cli({"stability", "--C", "0.2", "--out", dir.string()}).code == 0);
  const json j = json::parse(slurp(dir / "stability.json"));
  REQUIRE(j["equilibria"].size() == 3);
  CHECK(j["equilibria"][0]["classification"] == "LinearlyStable");
  CHECK(j["equilibria"][1]["classification"] == "LinearlyUnstable");
  CHECK(j["equilibria"][2]["classification"] == "LinearlyStable");
}

TEST_CASE("stability at C = 0 attaches the marginal diagnosis") {
  const fs::path dir = scratch("stab0");
  REQUIRE(cli({"stability", "--C", "0", "--out", dir.string()}).code == 0);
  const json j = json::parse(slurp(dir / "stability.json"));
  REQUIRE(j["equilibria"].size() == 1);
  const json& e = j["equilibria"][0];
  CHECK(e["classification"] == "MarginalZeroEigenvalue");
  CHECK(std::abs(e["marginal_diagnosis"]["Rpp"].get<double>() + 0.5) <= 1e-6);
  CHECK(e["marginal_diagnosis"]["verdict"] == "nonlinearly unstable");
}

TEST_CASE("stability reports failed positivity with dQ < 0") {
  const fs::path dir = scratch("stab03");
  REQUIRE(cli({"stability", "--C", "0.3", "--out", dir.string()}).code == 0);
  const json j = json::parse(slurp(dir / "stability.json"));
  REQUIRE(j["equilibria"].size() == 3);
  const json& upper = j["equilibria"][2];
  CHECK(upper["dQ"].get<double>() < 0.0);
  CHECK(upper["cond_poscond1"] == false);
  CHECK(upper["classification"] == "IndeterminatePositivityFails");
}

TEST_CASE("simulate decline without inflow") {
  const fs::path dir = scratch("sim_decline");
  const Run r = cli({"simulate", "--C", "0", "--initial", "1.9*exp(-s)/0.99752125", "--T", "100", "--out", dir.string()});
  REQUIRE(r.code == 0);
  CHECK(last_P(dir / "trajectory.csv") < 0.5);
  CHECK(lines(dir / "snapshot.csv").size() == 1026);
  CHECK(fs::exists(dir / "balance.csv"));
}

TEST_CASE("simulate settling with inflow") {
  const fs::path dir = scratch("sim_bistable");
  REQUIRE(cli({"simulate", "--C", "0.2", "--initial", "0.7*exp(-0.4*s)/0.99752125", "--T", "200", "--out",
               dir.string()})
              .code == 0);
  const double P = last_P(dir / "trajectory.csv");
  const json eq = [&] {
    const fs::path d2 = scratch("sim_bistable_eq");
    REQUIRE(cli({"equilibria", "--C", "0.2", "--out", d2.string()}).code == 0);
    return json::parse(slurp(d2 / "equilibria.json"));
  }();
  double nearest = 1e9;
  for (const json& e : eq["equilibria"]) nearest = std::min(nearest, std::abs(e["P_star"].get<double>() - P));
  CHECK(nearest <= 1e-2);
}

TEST_CASE("simulate from an equilibrium profile") {
  const fs::path dir = scratch("sim_eq");
  REQUIRE(cli({"simulate", "--C", "0", "--initial", "equilibrium:0", "--T", "50", "--out", dir.string()}).code == 0);
  const std::vector<std::string> rows = lines(dir / "trajectory.csv");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const std::string& row = rows[i];
    CHECK(std::abs(std::stod(row.substr(row.find(',') + 1)) - 2.0) <= 1e-2);
  }
  CHECK(cli({"simulate", "--C", "0", "--initial", "equilibrium:3", "--out", dir.string()}).code == 2);
}

TEST_CASE("simulate with recorded densities") {
  const fs::path dir = scratch("sim_density");
  REQUIRE(cli({"simulate", "--C", "0.2", "--N", "16", "--T", "2", "--initial", "1", "--record-density", "--out",
               dir.string()})
              .code == 0);
  const std::vector<std::string> rows = lines(dir / "trajectory.csv");
  CHECK(std::count(rows[0].begin(), rows[0].end(), ',') == 1 + 17);
  CHECK(std::count(rows[1].begin(), rows[1].end(), ',') == 1 + 17);
}

TEST_CASE("negative initial data exits 2") {
  const fs::path dir = scratch("sim_negative");
  CHECK(cli({"simulate", "--initial", "s-1", "--out", dir.string()}).code == 2);
  CHECK(cli({"simulate", "--out", dir.string()}).code == 2);
}

TEST_CASE("bifurcate over [0, 0.6]") {
  const fs::path dir = scratch("bif");
  REQUIRE(cli({"bifurcate", "--C-lo", "0", "--C-hi", "0.6", "--steps", "60", "--out", dir.string()}).code == 0);
  const std::vector<std::string> folds = lines(dir / "folds.csv");
  CHECK(folds[0] == "C_star,P_fold");
  int interior = 0;
  for (std::size_t i = 1; i < folds.size(); ++i) {
    const double C = std::stod(folds[i]);
    if (C > 1e-6 && C < 0.6) {
      ++interior;
      CHECK(std::abs(C - 0.3867) <= 1e-3);
    }
  }
  CHECK(interior == 1);
  const std::vector<std::string> branches = lines(dir / "branches.csv");
  CHECK(branches[0] == "C,P_star,classification,tangent_flag");
  CHECK(branches[1].rfind("0,0,", 0) == 0);
}

TEST_CASE("bifurcate above the fold and with no steps") {
  const fs::path dir = scratch("bif_none");
  REQUIRE(cli({"bifurcate", "--C-lo", "0.5", "--C-hi", "0.6", "--steps", "10", "--out", dir.string()}).code == 0);
  CHECK(lines(dir / "folds.csv").size() == 1);
  CHECK(cli({"bifurcate", "--steps", "0", "--out", dir.string()}).code == 2);
  CHECK(cli({"bifurcate", "--C-lo", "0.5", "--C-hi", "0.1", "--out", dir.string()}).code == 2);
}

TEST_CASE("unwritable output directory exits 2") {
  const fs::path dir = scratch("readonly");
  const fs::path blocker = dir / "file";
  std::ofstream(blocker) << "x";
  CHECK(cli({"equilibria", "--out", (blocker / "sub").string()}).code == 2);
  CHECK(cli({"reproduce", "--out", (blocker / "sub").string()}).code == 2);
}

TEST_CASE("outputs are deterministic and listed in the manifest") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  REQUIRE(cli({"stability", "--C", "0.2", "--out", a.string()}).code == 0);
  REQUIRE(cli({"stability", "--C", "0.2", "--out", b.string()}).code == 0);
  CHECK(slurp(a / "stability.json") == slurp(b / "stability.json"));

  const json m = json::parse(slurp(a / "manifest.json"));
  CHECK(m["command"] == "stability");
  CHECK(m["version"] == "0.1.0");
  CHECK(m["wall_time"].get<double>() >= 0.0);
  std::vector<std::string> listed = m["outputs"];
  std::vector<std::string> present;
  for (const auto& e : fs::directory_iterator(a)) present.push_back(e.path().string());
  std::sort(listed.begin(), listed.end());
  std::sort(present.begin(), present.end());
  CHECK(listed == present);
}

TEST_CASE("reproduce on a coarse grid keeps the identity checks") {
  const fs::path dir = scratch("repro64");
  const Run r = cli({"reproduce", "--N", "64", "--out", dir.string()});
  const json s = json::parse(slurp(dir / "summary.json"));
  REQUIRE(s["criteria"].size() == 9);
  CHECK(s["criteria"][2]["passed"] == true);
  CHECK(r.code == (s["all_passed"].get<bool>() ? 0 : 1));
  CHECK(fs::exists(dir / "manifest.json"));
}

TEST_CASE("reproduce at the default grid passes every criterion") {
  const fs::path dir = scratch("repro");
  const Run r = cli({"reproduce", "--out", dir.string()});
  CHECK(r.code == 0);
  const json s = json::parse(slurp(dir / "summary.json"));
  CHECK(s["all_passed"] == true);
  for (const json& c : s["criteria"]) CHECK_MESSAGE(c["passed"] == true, c["detail"].get<std::string>());
  for (const char* f : {"equilibria_C0.csv", "equilibria_C0.2.csv", "marginal.json", "branches.csv", "folds.csv",
                        "decline.csv", "bistable.csv", "persistence.csv", "convergence.csv"})
    CHECK(fs::exists(dir / f));
}
