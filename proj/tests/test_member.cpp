#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "minitwistor/nodal_curve.hpp"

using namespace mtw;
using mtwtest::make_member;

TEST_CASE("reducible seed has the full node set") {
  for (int m : {2, 3}) {
    auto cfg = random_config(m, 1, 7);
    auto seed = reducible_seed(cfg);
    CHECK((int)seed.nodes.size() == m);  // D1 . D2 = m intersection nodes
  }
}

TEST_CASE("smoothing one node yields an (m-1)-nodal member") {
  for (int m : {2, 3}) {
    auto cfg = random_config(m, 1, 7);
    auto pc = make_member(cfg);
    CHECK((int)pc.node_z.size() == m - 1);
    CHECK((int)pc.base_z.size() == 2 * m);
    SeveriSystem sys(cfg);
    double scale = std::max(pc.coeff_scale(), 1.0);
    CHECK(sys.residual(sys.pack(pc)).norm() < 1e-9 * scale);
    // Member passes through every configuration point.
    for (size_t i = 0; i < cfg.points.size(); ++i) {
      auto zs = preimages_of(pc, cfg.points[i], 1e-5);
      CHECK_FALSE(zs.empty());
    }
    // Node preimage pairs map to the same surface point.
    for (const auto& [zp, zq] : pc.node_z)
      CHECK(surface_distance(pc.at(zp), pc.at(zq)) < 1e-7);
  }
}

TEST_CASE("constraint report: nullity and tangent dimension") {
  for (int m : {2, 3}) {
    auto cfg = random_config(m, 1, 11);
    auto pc = make_member(cfg);
    SeveriSystem sys(cfg);
    auto rep = constraint_report(sys, pc);
    CHECK(rep.gauge_dimension == 5);
    CHECK(rep.jacobian_nullity == 8);
    CHECK(rep.tangent_dimension == 3);
    CHECK(rep.residual_norm < 1e-9 * std::max(pc.coeff_scale(), 1.0));
  }
}

TEST_CASE("implicit model agrees with the parametrization") {
  auto cfg = random_config(2, 1, 9);
  auto pc = make_member(cfg);
  auto F = implicitize(pc);
  Rng rng(4);
  double scale = F.f.max_abs();
  for (int t = 0; t < 12; ++t) {
    SurfacePoint p = pc.at(rng.complex(1.0));
    CHECK(std::abs(F.f.eval(p)) < 1e-7 * scale);
  }
  // Node count of the implicit curve matches the stored preimage pairs.
  CHECK(find_nodes(F.f).size() == pc.node_z.size());
}

TEST_CASE("polish converges back after a perturbation") {
  auto cfg = random_config(2, 1, 13);
  auto pc = make_member(cfg);
  SeveriSystem sys(cfg);
  VecC x = sys.pack(pc);
  Rng rng(2);
  for (int i = 0; i < x.size(); ++i) x(i) += rng.complex(1e-4);
  auto polished = polish_on_severi(sys.unpack(x), cfg, 1e-12);
  double scale = std::max(polished.coeff_scale(), 1.0);
  CHECK(sys.residual(sys.pack(polished)).norm() < 1e-10 * scale);
}
