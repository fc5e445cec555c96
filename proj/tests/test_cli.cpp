#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using perihelion::cli::run;

namespace {
std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("perihelion_cli_" + name);
  fs::remove_all(d);
  return d;
}
}  // namespace

TEST_CASE("portrait datasets and exit codes") {
  const auto d = scratch("portrait");
  CHECK(run({"perihelion", "portrait", "--r", "0.5", "--out", d.string()}) == 0);
  const auto eq = slurp(d / "equilibria.csv");
  CHECK(eq.rfind("# manifest_hash: ", 0) == 0);
  CHECK(eq.find("saddle") != std::string::npos);
  CHECK(fs::exists(d / "separatrix.csv"));
  CHECK(fs::exists(d / "levels.csv"));

  const auto d3 = scratch("portrait3");
  CHECK(run({"perihelion", "portrait", "--r", "3", "--out", d3.string()}) == 0);
  CHECK(slurp(d3 / "equilibria.csv").find("saddle") == std::string::npos);
  CHECK(!fs::exists(d3 / "separatrix.csv"));

  CHECK(run({"perihelion", "portrait", "--r", "2", "--out", d3.string()}) == 2);
  CHECK(run({"perihelion", "portrait", "--out", d3.string()}) == 2);
  CHECK(run({"perihelion", "horseshoe", "--C", "5", "--experiment", "libration", "--out", d3.string()}) == 2);

  const auto s = scratch("slow0");
  CHECK(run({"perihelion", "portrait", "--slow0", "--C", "25", "--beta", "80", "--out", s.string(),
             "--grid", "11"}) == 0);
  const auto manifest = nlohmann::json::parse(slurp(s / "manifest.json"));
  CHECK(manifest["config"]["C"] == 25.0);
  fs::remove_all(d);
  fs::remove_all(d3);
  fs::remove_all(s);
}

TEST_CASE("verify suites and the injected fault") {
  const auto d = scratch("verify");
  CHECK(run({"perihelion", "verify", "--suite", "parity", "--out", d.string()}) == 0);
  const auto doc = nlohmann::json::parse(slurp(d / "verify.json"));
  CHECK(doc["nodes"] == 4096);
  CHECK(doc["nu_max"] == 10);
  CHECK(run({"perihelion", "verify", "--suite", "parity", "--inject-q2-sign-fault", "--out", "-"}) == 4);
  CHECK(run({"perihelion", "verify", "--suite", "nonsense", "--out", "-"}) == 2);
  fs::remove_all(d);
}

TEST_CASE("a run is reproducible from its manifest") {
  const auto a = scratch("int_a");
  const auto b = scratch("int_b");
  CHECK(run({"perihelion", "integrate", "--t", "2000", "--samples", "20", "--nu-max", "12", "--out", a.string()}) == 0);
  CHECK(run({"perihelion", "integrate", "--config", (a / "manifest.json").string(), "--out", b.string()}) == 0);
  CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
  CHECK(slurp(a / "trajectory.csv").find("t,R,G,r,g,energy") != std::string::npos);
  // a state outside the series domain is a domain error
  CHECK(run({"perihelion", "integrate", "--state", "0", "0.5", "100", "1", "--out", b.string()}) == 2);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("coefficient table export") {
  const auto d = scratch("coeffs");
  CHECK(run({"perihelion", "coeffs", "--nu-max", "4", "--out", d.string()}) == 0);
  const auto doc = nlohmann::json::parse(slurp(d / "coeffs.json"));
  CHECK(doc["nu_max"] == 4);
  fs::remove_all(d);
}
