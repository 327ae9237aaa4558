#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "minitwistor/trace.hpp"

using namespace mtw;
using mtwtest::make_member;

namespace {
struct Fixture {
  PointConfig cfg = random_config(2, 1, 7);
  ParamCurve pc = make_member(cfg);
  SeveriSystem sys{cfg};
  SurfacePoint p = pc.at(Complex(0.37, 0.41));
  SurfacePoint q = pc.at(Complex(-0.52, 0.18));
};
}  // namespace

TEST_CASE("geodesic trace keeps incidence and node count") {
  Fixture fx;
  auto tr = trace_geodesic(fx.sys, fx.pc, fx.p, fx.q, 30, 0.05);
  REQUIRE(tr.states.size() >= 20);
  for (size_t k = 0; k < tr.states.size(); ++k) {
    CHECK_FALSE(preimages_of(tr.states[k], fx.p, 1e-5).empty());
    CHECK_FALSE(preimages_of(tr.states[k], fx.q, 1e-5).empty());
    if (tr.diagnostics[k].node_count >= 0)
      CHECK(tr.diagnostics[k].node_count == 1);
    // Non-null path: tangent theta stays away from the discriminant cone.
    CHECK(tr.diagnostics[k].theta_disc_ratio > 1e-6);
  }
  // The trace actually moves through the family.
  CHECK(tr.arc_params.back() > 0.5);
}

TEST_CASE("nodal locus trace pins the node image") {
  Fixture fx;
  SurfacePoint nodep = fx.pc.at(fx.pc.node_z[0].first);
  auto tr = trace_nodal_locus(fx.sys, fx.pc, nodep, 20, 0.05);
  REQUIRE(tr.states.size() >= 15);
  for (const auto& c : tr.states)
    CHECK(surface_distance(c.at(c.node_z[0].first), nodep) < 1e-6);
}

TEST_CASE("null geodesic trace keeps a double-root tangent") {
  Fixture fx;
  auto tr = trace_null_geodesic(fx.sys, fx.pc, fx.p, 20, 0.05);
  REQUIRE(tr.states.size() >= 15);
  for (const auto& d : tr.diagnostics) CHECK(d.theta_disc_ratio < 1e-8);
}

TEST_CASE("null surface patch has a degenerate induced gram") {
  Fixture fx;
  auto patch = trace_null_surface(fx.sys, fx.pc, fx.p, 2, 5e-3);
  REQUIRE(patch.states.size() == 25);
  for (double d : patch.degeneracy) CHECK(d < 1e-6);
  // The tracked null plane still maps back to p away from the center.
  auto basis = tangent_basis(fx.sys, patch.states[12]);
  auto plane = null_plane_at(basis, ProjPoint::affine(patch.tracked_z[12]));
  auto img = null_plane_to_point(patch.states[12], plane);
  CHECK(surface_distance(img.point, fx.p) < 1e-6);
}

TEST_CASE("branch seeds: one generic, two through a node") {
  Fixture fx;
  CHECK(branch_enumerate(fx.pc, fx.p, fx.q).size() == 1);
  SurfacePoint nodep = fx.pc.at(fx.pc.node_z[0].first);
  auto seeds = branch_enumerate(fx.pc, nodep, fx.q);
  CHECK(seeds.size() == 2);
  for (const auto& s : seeds) {
    auto tr = trace_geodesic(fx.sys, fx.pc, nodep, fx.q, 20, 0.05, s.zp, s.zq);
    CHECK(tr.states.size() >= 20);
  }
}

TEST_CASE("through-point system on a contracted-curve point never converges") {
  std::vector<ProjPoint> a = {ProjPoint::affine(Complex(0.0)),
                              ProjPoint::affine(Complex(1.0))};
  std::vector<ProjPoint> b = {ProjPoint::affine(Complex(2.0)),
                              ProjPoint::affine(Complex(3.0))};
  auto cfg = cstar_config(2, {0}, a, b, Complex(0.7, 0.2));
  auto pc = make_member(cfg);
  SeveriSystem sys(cfg);
  // Point on the v = 0 line away from the blown-up points: its strict
  // transform is contracted, so no member passes through it.
  SurfacePoint contracted(ProjPoint::affine(Complex(0.45, 0.3)),
                          ProjPoint::affine(Complex(0.0)));
  auto rep = empty_locus_probe(sys, {pc}, contracted, 25, 3);
  CHECK(rep.attempts == 25);
  CHECK(rep.convergences == 0);
  // Control: a generic point admits members through it.
  SurfacePoint generic = pc.at(Complex(0.21, -0.33));
  auto rep2 = empty_locus_probe(sys, {pc}, generic, 10, 3);
  CHECK(rep2.convergences > 0);
}

TEST_CASE("svg rendering is deterministic and nonempty") {
  Fixture fx;
  auto tr = trace_geodesic(fx.sys, fx.pc, fx.p, fx.q, 10, 0.05);
  auto svg1 = render_displacement_svg(tr);
  auto svg2 = render_displacement_svg(tr);
  CHECK(svg1.size() > 500);
  CHECK(svg1 == svg2);
  CHECK(svg1.find("<svg") != std::string::npos);
}
