#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "minitwistor/real.hpp"

using namespace mtw;
using mtwtest::make_member;

TEST_CASE("odd index admits no compatible real structure") {
  CHECK_THROWS_AS(construct_real_member(3, 5), NoRealSolutionFound);
}

TEST_CASE("real member at index two") {
  auto mem = construct_real_member(2, 21);
  SeveriSystem sys(mem.config);
  double scale = std::max(mem.curve.coeff_scale(), 1.0);
  REQUIRE(sys.residual(sys.pack(mem.curve)).norm() < 1e-10 * scale);

  SECTION("reality conditions hold") {
    auto rep = reality_check(mem.curve);
    CHECK(rep.invariant);
    CHECK(rep.branch_exchange);
    CHECK(rep.no_offnode_real_points);
    CHECK(rep.equivariance_residual < 1e-8);
    CHECK(rep.node_pairing_residual < 1e-8);
    CHECK(mem.data.h_spread < 1e-8);
    CHECK(std::abs(std::abs(mem.data.h) - 1.0) < 1e-10);
  }

  SECTION("real coordinates on the fixed theta subspace") {
    Eigen::Vector3d x(0.3, -1.1, 0.7);
    auto q = from_real_coordinates(x, mem.data);
    CHECK((real_coordinates(q, mem.data) - x).norm() < 1e-10);
    // disc(theta) = phase^2 |x|^2 on the fixed subspace.
    Complex expect =
        mem.data.theta_phase * mem.data.theta_phase * x.squaredNorm();
    CHECK(std::abs(disc_quadratic(q) - expect) < 1e-10);
    CHECK_THROWS_AS(
        real_coordinates(QuadraticClass(Complex(1, 0.3), Complex(0.2, 1.0),
                                        Complex(0.5, -0.1)),
                         mem.data),
        NotInRealSubspace);
  }

  SECTION("real kernel and tangent dimensions") {
    RealMemberSystem rs(mem.config);
    VecR p = rs.params_of(mem.curve);
    CHECK(rs.residual(p).norm() < 1e-8);
    MatR J = detail::real_jacobian(rs.fn(), p);
    CHECK(detail::real_nullspace(J, 1e-5).cols() == 8);
    CHECK(rs.tangent_space(p).cols() == 3);
  }

  SECTION("real metric is positive definite") {
    auto M = real_metric_at(mem.config, mem.curve, mem.data);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(M);
    CHECK(es.eigenvalues()(0) > 0.0);
  }

  SECTION("real geodesics stay in the fixed locus") {
    SurfacePoint pt = mem.curve.at(Complex(0.37, 0.21));
    auto tr = real_geodesic(mem.config, mem.curve, pt, 12, 0.02);
    REQUIRE(tr.states.size() >= 10);
    for (const auto& c : tr.states)
      CHECK(reality_check(c).equivariance_residual < 1e-7);
    CHECK(tr.arc_params.back() > 0.1);
    // Node-pinned variant keeps the node image fixed.
    SurfacePoint nodep = mem.curve.at(mem.curve.node_z[0].first);
    auto trn = real_geodesic(mem.config, mem.curve, nodep, 8, 0.02);
    for (const auto& c : trn.states)
      CHECK(surface_distance(c.at(c.node_z[0].first), nodep) < 1e-8);
  }
}

TEST_CASE("generic complex member fails the reality check") {
  auto cfg = random_config(2, 1, 7);
  auto pc = make_member(cfg);
  auto rep = reality_check(pc);
  CHECK_FALSE(rep.invariant);
  CHECK(rep.equivariance_residual > 1e-2);
}

TEST_CASE("real member at index four", "[slow]") {
  auto mem = construct_real_member(4, 5);
  CHECK(mem.curve.node_z.size() == 3);
  CHECK(reality_check(mem.curve).all());
  auto M = real_metric_at(mem.config, mem.curve, mem.data);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(M);
  CHECK(es.eigenvalues()(0) > 0.0);
}

TEST_CASE("real-slice fit has a real connection", "[slow]") {
  auto mem = construct_real_member(2, 21);
  EWPipelineOptions opt;
  opt.metric_samples = 200;
  opt.geodesic_count = 14;
  auto rep = real_ew_fit(mem.config, mem.curve, opt);
  CHECK(rep.gram_im_residual < 1e-10);
  CHECK(rep.model.metric_fit_residual < 1e-3);
  CHECK(rep.geodesic_fit_residual < 1e-2);
  CHECK(rep.max_im_connection < 1e-6);
  CHECK(rep.max_im_one_form < 1e-6);
}
