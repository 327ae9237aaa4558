#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "minitwistor/json_io.hpp"

using mtw::Json;
namespace fs = std::filesystem;

#ifndef MTL_BIN
#error "MTL_BIN must point at the CLI binary"
#endif
#ifndef SCHEMA_DIR
#error "SCHEMA_DIR must point at the schema directory"
#endif

namespace {

struct Workdir {
  fs::path dir;
  Workdir() {
    dir = fs::temp_directory_path() / "mtl_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  std::string operator/(const std::string& name) const {
    return (dir / name).string();
  }
};

int run(const std::string& args) {
  std::string cmd = std::string(MTL_BIN) + " " + args + " > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

Json schema(const std::string& name) {
  return mtw::jsonio::load(std::string(SCHEMA_DIR) + "/" + name);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void check_valid(const std::string& path, const std::string& schema_name) {
  auto errors =
      mtw::jsonio::validate_against(mtw::jsonio::load(path), schema(schema_name));
  for (const auto& e : errors) UNSCOPED_INFO(e);
  CHECK(errors.empty());
}

}  // namespace

TEST_CASE("cli pipeline: config, lattice, solve, metric, trace, render") {
  Workdir w;
  REQUIRE(run("config --m 2 --seed 5 --out " + (w / "cfg.json")) == 0);
  check_valid(w / "cfg.json", "config.schema.json");

  REQUIRE(run("lattice --class 2,2:1,1,1,1 --out " + (w / "lat.json")) == 0);
  check_valid(w / "lat.json", "lattice.schema.json");
  Json lat = mtw::jsonio::load(w / "lat.json");
  CHECK(lat["self_intersection"] == 4);
  CHECK(lat["nodes"] == 1);
  CHECK(lat["severi_dimension"] == 3);
  CHECK(lat["index"] == 2);
  CHECK(lat["minimality"]["numerically_minimal"] == true);

  REQUIRE(run("solve --config " + (w / "cfg.json") + " --out " +
              (w / "crv.json")) == 0);
  check_valid(w / "crv.json", "curve.schema.json");

  REQUIRE(run("metric --config " + (w / "cfg.json") + " --curve " +
              (w / "crv.json") + " --out " + (w / "met.json")) == 0);
  check_valid(w / "met.json", "metric.schema.json");
  Json met = mtw::jsonio::load(w / "met.json");
  CHECK(met["null_cone"]["witness_residual"].get<double>() < 1e-8);

  // A generic point on the member, computed from the curve file.
  Json crv = mtw::jsonio::load(w / "crv.json");
  auto eval = [&](const Json& f, mtw::Complex z) {
    int d = (int)f.size() - 1;
    mtw::Complex acc = 0.0;
    for (int j = 0; j <= d; ++j)
      acc += mtw::Complex(f[j][0].get<double>(), f[j][1].get<double>()) *
             std::pow(z, d - j);
    return acc;
  };
  auto point_arg = [&](mtw::Complex z) {
    mtw::Complex u = eval(crv["u0"], z) / eval(crv["u1"], z);
    mtw::Complex v = eval(crv["v0"], z) / eval(crv["v1"], z);
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g", u.real(),
                  u.imag(), v.real(), v.imag());
    return std::string(buf);
  };
  std::string p = point_arg(mtw::Complex(0.31, 0.12));
  std::string q = point_arg(mtw::Complex(-0.42, 0.27));
  REQUIRE(run("trace --config " + (w / "cfg.json") + " --curve " +
              (w / "crv.json") + " --mode geodesic --p " + p + " --q " + q +
              " --steps 12 --out " + (w / "tr.json")) == 0);
  check_valid(w / "tr.json", "trace.schema.json");

  REQUIRE(run("render --trace " + (w / "tr.json") + " --out " +
              (w / "fig.svg")) == 0);
  CHECK(slurp(w / "fig.svg").find("<svg") != std::string::npos);
}

TEST_CASE("cli determinism: identical invocations give identical bytes") {
  Workdir w;
  REQUIRE(run("config --m 2 --seed 9 --out " + (w / "a.json")) == 0);
  std::string first = slurp(w / "a.json");
  REQUIRE(run("config --m 2 --seed 9 --out " + (w / "a.json")) == 0);
  CHECK(slurp(w / "a.json") == first);
}

TEST_CASE("cli exit codes") {
  Workdir w;
  CHECK(run("definitely-not-a-subcommand") == 2);
  CHECK(run("solve") == 2);  // missing required option
  // Odd index has no real structure: numeric failure, exit 1.
  CHECK(run("real --m 3 --seed 1 --out " + (w / "r.json")) == 1);
}

TEST_CASE("cli real subcommand", "[slow]") {
  Workdir w;
  REQUIRE(run("real --m 2 --seed 1 --steps 8 --out " + (w / "real.json") +
              " --csv " + (w / "real.csv")) == 0);
  check_valid(w / "real.json", "real.schema.json");
  Json r = mtw::jsonio::load(w / "real.json");
  for (const auto& e : r["metric_eigenvalues"]) CHECK(e.get<double>() > 0.0);
  CHECK(r["reality"]["invariant"] == true);
  std::string csv = slurp(w / "real.csv");
  CHECK(csv.rfind("state,arc_param,eig1,eig2,eig3", 0) == 0);
}

TEST_CASE("cli ew-check subcommand", "[slow]") {
  Workdir w;
  REQUIRE(run("config --m 2 --seed 5 --out " + (w / "cfg.json")) == 0);
  REQUIRE(run("solve --config " + (w / "cfg.json") + " --out " +
              (w / "crv.json")) == 0);
  REQUIRE(run("ew-check --config " + (w / "cfg.json") + " --curve " +
              (w / "crv.json") +
              " --levels 2 --samples 150 --geodesics 10 --jobs 2 --out " +
              (w / "ew.json") + " --csv " + (w / "ew.csv")) == 0);
  check_valid(w / "ew.json", "ew_report.schema.json");
  Json ew = mtw::jsonio::load(w / "ew.json");
  CHECK(ew["monotone_tracefree"] == true);
  CHECK(ew["levels"].size() == 2);
}
