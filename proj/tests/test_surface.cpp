#include <catch2/catch_amalgamated.hpp>

#include "minitwistor/surface_config.hpp"

using namespace mtw;

TEST_CASE("random configurations validate and are deterministic") {
  for (int m : {2, 3}) {
    auto cfg = random_config(m, 1, 7);
    CHECK(cfg.m == m);
    CHECK((int)cfg.points.size() == 2 * m);
    CHECK_NOTHROW(cfg.validate());
    // Every point lies on its assigned component curve.
    for (size_t i = 0; i < cfg.points.size(); ++i)
      CHECK(cfg.curve_of((int)i).contains(cfg.points[i]));
    // Same seed reproduces the identical configuration.
    auto cfg2 = random_config(m, 1, 7);
    for (size_t i = 0; i < cfg.points.size(); ++i)
      CHECK(surface_distance(cfg.points[i], cfg2.points[i]) == 0.0);
    // Different seed moves the points.
    auto cfg3 = random_config(m, 1, 8);
    CHECK(surface_distance(cfg.points[0], cfg3.points[0]) > 1e-6);
  }
}

TEST_CASE("component intersection count matches the bidegree pairing") {
  for (int m : {2, 3, 4}) {
    auto cfg = random_config(m, 1, 5);
    auto pts = transversality_check(cfg.curves);
    CHECK((int)pts.size() == m);
    // Intersection points are distinct.
    for (size_t i = 0; i < pts.size(); ++i)
      for (size_t j = i + 1; j < pts.size(); ++j)
        CHECK(surface_distance(pts[i], pts[j]) > 1e-6);
  }
}

TEST_CASE("scaling-family configurations") {
  std::vector<ProjPoint> a = {ProjPoint::affine(Complex(0.0)),
                              ProjPoint::affine(Complex(1.0))};
  std::vector<ProjPoint> b = {ProjPoint::affine(Complex(2.0)),
                              ProjPoint::affine(Complex(3.0))};
  SECTION("valid split builds a config") {
    auto cfg = cstar_config(2, {0}, a, b, Complex(0.7, 0.2));
    CHECK(cfg.cstar);
    CHECK_NOTHROW(cfg.validate());
    CHECK((int)cfg.points.size() == 4);
  }
  SECTION("condition (*) violation is rejected") {
    // All three u-values shared between the two levels: no renumbering makes
    // the four disjointness conditions hold.
    std::vector<ProjPoint> s = {ProjPoint::affine(Complex(0.0)),
                                ProjPoint::affine(Complex(1.0)),
                                ProjPoint{Complex(1.0), Complex(0.0)}};
    CHECK_FALSE(condition_star_check(3, s, s));
    CHECK_THROWS_AS(cstar_config(3, {0}, s, s, Complex(0.5, 0.1)),
                    ConditionStarViolated);
  }
  SECTION("generic disjoint values pass the check") {
    CHECK(condition_star_check(2, a, b));
  }
}
