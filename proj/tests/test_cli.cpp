#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <unistd.h>

#include "conefield/cli.hpp"
#include "conefield/report.hpp"

using namespace conefield;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
  Json json() const { return Json::parse(out); }
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "conefield");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class Workdir {
 public:
  Workdir() : dir_(fs::temp_directory_path() / ("conefield_cli_" + std::to_string(::getpid()))) {
    fs::create_directories(dir_);
  }
  ~Workdir() { fs::remove_all(dir_); }
  std::string write(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

 private:
  fs::path dir_;
};

const Workdir& work() {
  static const Workdir w;
  return w;
}

std::string gaussian1() { return work().write("g1.field", "dim = 1\nkind = builtin\nname = gaussian_conformal\nparams = 1\n"); }
std::string exp_gauge1() { return work().write("z1.field", "dim = 1\nkind = builtin\nname = exp_gauge\nparams = 1\n"); }
std::string sigma1() { return work().write("s1.field", "dim = 1\nkind = expr\nentries = \"exp(x1)*sin(x1)\"\n"); }

}  // namespace

TEST_CASE("norm reports value, verdict and exit 0") {
  const Run r = run({"norm", "--sigma", sigma1(), "--gauge", exp_gauge1(), "--order", "1", "--cone", "ray:+e1",
                     "--base-radius", "1", "--levels", "4", "--points-per-unit", "1024"});
  REQUIRE(r.code == 0);
  const Json j = r.json();
  CHECK(j["command"] == "norm");
  CHECK(j["status"] == "ok");
  CHECK(j["result"]["verdict"]["status"] == "converged");
  CHECK(std::abs(j["result"]["value"].get<double>() - std::sqrt(2.0)) < 1e-6);
  CHECK(j["grid"]["levels"] == 4);
}

TEST_CASE("ebin in trace and frame form") {
  const std::string g = gaussian1();
  const Run r = run({"ebin", "--g", g, "--h", g, "--k", g, "--base-radius", "8", "--levels", "2", "--points-per-unit", "16"});
  REQUIRE(r.code == 0);
  const Json j = r.json();
  const double v = j["result"]["value"].get<double>();
  CHECK(std::abs(v - std::sqrt(2.0 * std::numbers::pi)) < 1e-6);
  CHECK(std::abs(j["result"]["frame_value"].get<double>() - v) <= 1e-12 * v);
}

TEST_CASE("volume verdicts") {
  const std::string eu = work().write("eu1.field", "dim = 1\nkind = builtin\nname = euclidean\n");
  const Run r = run({"volume", "--g", eu});
  REQUIRE(r.code == 0);
  CHECK(r.json()["result"]["verdict"]["status"] == "divergent");
}

TEST_CASE("configuration errors exit 2") {
  SUBCASE("syntax error carries its offset") {
    const std::string text = "dim = 1\nkind = expr\nentries = \"exp(x1\"\n";
    const std::string bad = work().write("bad.field", text);
    const Run r = run({"norm", "--sigma", bad, "--gauge", exp_gauge1()});
    CHECK(r.code == 2);
    const Json j = r.json();
    CHECK(j["status"] == "error");
    CHECK(j["result"]["error"] == "syntax-error");
    CHECK(j["result"]["offset"] == text.find("exp(x1") + 6);
    CHECK(r.err.find(bad) != std::string::npos);
  }
  SUBCASE("unknown flag") { CHECK(run({"norm", "--nonsense", "1"}).code == 2); }
  SUBCASE("missing subcommand") { CHECK(run({}).code == 2); }
  SUBCASE("unknown suite") { CHECK(run({"verify", "--suite", "nope"}).code == 2); }
  SUBCASE("missing dimension") {
    const std::string nodim = work().write("nodim.field", "kind = builtin\nname = euclidean\n");
    const Run r = run({"volume", "--g", nodim});
    CHECK(r.code == 2);
    CHECK(r.json()["result"]["error"] == "invalid-argument");
  }
  SUBCASE("missing file") { CHECK(run({"volume", "--g", "/nonexistent/conefield.field"}).code == 2); }
  SUBCASE("resolution overflow") {
    const std::string g4 = work().write("g4.field", "dim = 4\nkind = builtin\nname = euclidean\n");
    CHECK(run({"volume", "--g", g4, "--base-radius", "64", "--points-per-unit", "16"}).code == 2);
  }
}

TEST_CASE("numerical errors exit 3") {
  const std::string lin = work().write("lin.field", "dim = 1\nkind = expr\nentries = \"x1\"\n");
  const Run r = run({"volume", "--g", lin});
  CHECK(r.code == 3);
  CHECK(r.json()["result"]["error"] == "metric-degenerate");
}

TEST_CASE("bound certificate") {
  const std::string g = gaussian1();
  const Run ok = run({"bound", "--g", g, "--h", g, "--k", g, "--base-radius", "8", "--points-per-unit", "16", "--levels", "2"});
  CHECK(ok.code == 0);
  CHECK(ok.json()["status"] == "ok");
  const std::string one = work().write("one.field", "dim = 1\nkind = expr\nentries = \"1\"\n");
  const Run bad = run({"bound", "--g", g, "--h", one, "--k", g, "--base-radius", "8", "--points-per-unit", "16", "--levels", "2"});
  CHECK(bad.code == 3);
  CHECK(bad.json()["result"]["error"] == "not-measurable");
}

TEST_CASE("classify at a point") {
  const std::string s = work().write("ind.field", "dim = 2\nkind = expr\nentries = \"1\", \"0\", \"-1\"\n");
  const Run r = run({"classify", "--sigma", s, "--point", "0.5,0.5"});
  REQUIRE(r.code == 0);
  CHECK(r.json()["result"]["membership"] == "outside");
  const Run grid = run({"classify", "--sigma", s, "--base-radius", "1", "--levels", "2", "--points-per-unit", "4"});
  CHECK(grid.code == 0);
  CHECK(grid.json()["result"]["positive"] == false);
}

TEST_CASE("verify runs a chosen suite") {
  const Run r = run({"verify", "--suite", "volume_oracle", "--trials", "3", "--seed", "7"});
  CHECK(r.code == 0);
  const Json j = r.json();
  CHECK(j["status"] == "ok");
  CHECK(j["inputs"]["seed"] == 7);
}

TEST_CASE("reports are byte identical across runs") {
  const std::string g = gaussian1();
  const std::vector<std::string> args{"ebin", "--g", g, "--h", g, "--k", g, "--points-per-unit", "8"};
  CHECK(run(args).out == run(args).out);
  const std::vector<std::string> v{"verify", "--suite", "frame_trace", "--trials", "3", "--seed", "11"};
  CHECK(run(v).out == run(v).out);
}

TEST_CASE("help exits 0") {
  const Run r = run({"norm", "--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("--sigma") != std::string::npos);
}
