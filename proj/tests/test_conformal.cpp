#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "minitwistor/conformal.hpp"

using namespace mtw;
using mtwtest::make_member;

TEST_CASE("tangent basis and gauge normal forms") {
  auto cfg = random_config(2, 1, 7);
  auto pc = make_member(cfg);
  SeveriSystem sys(cfg);
  auto basis = tangent_basis(sys, pc);
  REQUIRE(basis.size() == 3);
  // Normal forms vanish at the base preimages (sections of the normal bundle
  // twisted down by the base divisor).
  for (const auto& t : basis) {
    double ns = t.normal_form.max_abs();
    REQUIRE(ns > 0.0);
    for (const auto& z : pc.base_preimages())
      CHECK(std::abs(t.normal_form.eval(z)) < 1e-7 * ns);
  }
  // Gauge directions produce identically zero normal forms.
  MatC G = sys.gauge_directions(sys.pack(pc));
  for (int g = 0; g < 5; ++g) {
    ParamCurve d = sys.unpack(G.col(g));
    BinaryForm n = normal_component(pc, d.u0, d.u1, d.v0, d.v1);
    CHECK(n.max_abs() < 1e-8 * pc.coeff_scale());
  }
}

TEST_CASE("map-model and implicit-model tangents agree") {
  for (unsigned seed : {7u, 11u}) {
    auto cfg = random_config(2, 1, seed);
    auto pc = make_member(cfg);
    SeveriSystem sys(cfg);
    auto basis = tangent_basis(sys, pc);
    auto F = implicitize(pc);
    CHECK(tangent_model_mismatch(pc, F.f, basis) < 1e-7);
  }
}

TEST_CASE("gram matrix via the quotient-space oracle") {
  auto cfg = random_config(2, 1, 7);
  auto pc = make_member(cfg);
  SeveriSystem sys(cfg);
  auto M = metric_at(sys, pc);
  // Nondegenerate: smallest singular value well away from zero relative to
  // the largest.
  Eigen::JacobiSVD<Eigen::Matrix3cd> svd(M.gram);
  CHECK(svd.singularValues()(2) > 1e-6 * svd.singularValues()(0));
  // The gram entries are the discriminant pairings of the basis thetas.
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(M.gram(i, j) -
                     disc_pairing(M.basis[i].theta, M.basis[j].theta)) <
            1e-12 * svd.singularValues()(0));
  // Sections divisible by the node product span the expected subspace.
  auto vc = vc_oracle(pc);
  for (const auto& b : vc.basis)
    CHECK_NOTHROW(divide_exact(b, vc.node_product, 1e-6));
}

TEST_CASE("null planes round trip through their common root") {
  auto cfg = random_config(2, 1, 7);
  auto pc = make_member(cfg);
  SeveriSystem sys(cfg);
  auto basis = tangent_basis(sys, pc);
  Rng rng(9);
  for (int t = 0; t < 8; ++t) {
    ProjPoint z = ProjPoint::affine(rng.complex(1.0));
    auto plane = null_plane_at(basis, z);
    auto img = null_plane_to_point(pc, plane);
    CHECK(proj_distance(img.witness_root, z) < 1e-8);
    CHECK(surface_distance(img.point, pc.at(z)) < 1e-8);
  }
  // A generic 2-plane of tangents has no common theta root.
  NullPlane bad;
  bad.span[0] = basis[0];
  bad.span[1] = basis[1];
  bool rejected = false;
  try {
    auto img = null_plane_to_point(pc, bad);
    (void)img;
  } catch (const NoCommonRoot&) {
    rejected = true;
  }
  CHECK(rejected);
}
