#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "helpers.hpp"
#include "minitwistor/json_io.hpp"
#include "minitwistor/trace.hpp"

using namespace mtw;
using mtwtest::make_member;

#ifndef SCHEMA_DIR
#define SCHEMA_DIR "schemas"
#endif

static Json load_schema(const std::string& name) {
  return jsonio::load(std::string(SCHEMA_DIR) + "/" + name);
}

TEST_CASE("number formatting is idempotent and 12-digit accurate") {
  for (double x : {0.0, 1.0, -3.5e-16, 1.0 / 3.0, 12345.678901234}) {
    double y = jsonio::fp(x);
    CHECK(std::abs(y - x) <= 1e-11 * std::abs(x));
    // A second pass through the formatter changes nothing: serialized bytes
    // are a fixed point.
    CHECK(jsonio::fp(y) == y);
  }
}

TEST_CASE("config and curve round trip through JSON") {
  auto cfg = random_config(2, 1, 7);
  auto cfg2 = jsonio::config_from(jsonio::config(cfg));
  CHECK(cfg2.m == cfg.m);
  CHECK(cfg2.k == cfg.k);
  CHECK(cfg2.seed == cfg.seed);
  REQUIRE(cfg2.points.size() == cfg.points.size());
  for (size_t i = 0; i < cfg.points.size(); ++i)
    CHECK(surface_distance(cfg.points[i], cfg2.points[i]) < 1e-10);
  CHECK_NOTHROW(cfg2.validate());

  auto pc = make_member(cfg);
  auto pc2 = jsonio::curve_from(jsonio::curve(pc));
  SeveriSystem sys(cfg);
  CHECK((sys.pack(pc) - sys.pack(pc2)).norm() < 1e-10 * pc.coeff_scale());

  // Serialization is stable: dumping twice gives identical bytes.
  CHECK(jsonio::config(cfg).dump(2) == jsonio::config(cfg).dump(2));
}

TEST_CASE("trace round trip and schema validation") {
  auto cfg = random_config(2, 1, 7);
  auto pc = make_member(cfg);
  SeveriSystem sys(cfg);
  SurfacePoint p = pc.at(Complex(0.37, 0.41));
  SurfacePoint q = pc.at(Complex(-0.52, 0.18));
  auto tr = trace_geodesic(sys, pc, p, q, 8, 0.05);
  Json j = jsonio::trace(tr);
  auto tr2 = jsonio::trace_from(j);
  REQUIRE(tr2.states.size() == tr.states.size());
  CHECK(std::abs(tr2.arc_params.back() - tr.arc_params.back()) <
        1e-10 * tr.arc_params.back());
  CHECK(std::abs(tr2.diagnostics.back().theta_disc_ratio -
                 tr.diagnostics.back().theta_disc_ratio) < 1e-10);

  auto errors = jsonio::validate_against(j, load_schema("trace.schema.json"));
  CHECK(errors.empty());
}

TEST_CASE("schema validator accepts and rejects") {
  auto schema = load_schema("config.schema.json");
  auto cfg = random_config(2, 1, 7);
  Json good = jsonio::config(cfg);
  CHECK(jsonio::validate_against(good, schema).empty());

  Json missing = good;
  missing.erase("points");
  CHECK_FALSE(jsonio::validate_against(missing, schema).empty());

  Json wrong_type = good;
  wrong_type["m"] = "two";
  CHECK_FALSE(jsonio::validate_against(wrong_type, schema).empty());
}

TEST_CASE("save and load preserve bytes") {
  auto cfg = random_config(2, 1, 3);
  Json j = jsonio::config(cfg);
  std::string path = "test_json_tmp_config.json";
  jsonio::save(path, j);
  Json j2 = jsonio::load(path);
  CHECK(j2 == j);
  std::remove(path.c_str());
}
