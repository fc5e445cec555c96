#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "perihelion/io.hpp"

using namespace perihelion;
namespace fs = std::filesystem;

namespace {
std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
fs::path scratch_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("perihelion_io_" + name);
  fs::remove_all(d);
  return d;
}
}  // namespace

TEST_CASE("sha256 test vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("manifest hash ignores key order") {
  nlohmann::json a = {{"b", 1}, {"a", 2.5}};
  nlohmann::json b;
  b["a"] = 2.5;
  b["b"] = 1;
  CHECK(manifest_hash(a) == manifest_hash(b));
  b["b"] = 2;
  CHECK(manifest_hash(a) != manifest_hash(b));
}

TEST_CASE("doubles round trip through the CSV format") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 652.256, 24.394}) CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("csv layout") {
  CsvTable t;
  t.comments = {"units: none"};
  t.columns = {"a", "b"};
  t.add({1.0, 0.5});
  t.add_cells({"x", "y"});
  const auto s = t.render("abc123");
  CHECK(s == "# manifest_hash: abc123\n# units: none\na,b\n1,0.5\nx,y\n");
}

TEST_CASE("run output is atomic and deterministic") {
  const auto d1 = scratch_dir("one");
  const auto d2 = scratch_dir("two");
  nlohmann::json cfg{{"command", "test"}, {"x", 1.5}};
  for (const auto& d : {d1, d2}) {
    RunOutput out(d, cfg);
    CsvTable t;
    t.columns = {"v"};
    t.add({0.1});
    out.write_csv("t.csv", t);
    out.write_json("doc.json", {{"k", 1}});
    out.write_manifest({"t.csv", "doc.json"});
  }
  for (const char* f : {"t.csv", "doc.json", "manifest.json"}) CHECK(slurp(d1 / f) == slurp(d2 / f));
  RunOutput out(d1, cfg);
  CHECK(slurp(d1 / "t.csv").find("# manifest_hash: " + out.hash()) == 0);
  const auto doc = nlohmann::json::parse(slurp(d1 / "doc.json"));
  CHECK(doc["manifest_hash"] == out.hash());
  const auto manifest = nlohmann::json::parse(slurp(d1 / "manifest.json"));
  CHECK(manifest["config"]["x"] == 1.5);
  CHECK(manifest_hash(manifest["config"]) == out.hash());
  for (const auto& e : fs::directory_iterator(d1)) CHECK(e.path().string().find(".tmp") == std::string::npos);
  fs::remove_all(d1);
  fs::remove_all(d2);
}
