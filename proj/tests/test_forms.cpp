#include <catch2/catch_amalgamated.hpp>

#include "minitwistor/biform.hpp"
#include "minitwistor/conformal.hpp"

using namespace mtw;

TEST_CASE("projective points") {
  ProjPoint p = ProjPoint::affine(Complex(2.0, -1.0));
  CHECK(std::abs(p.z0 / p.z1 - Complex(2.0, -1.0)) < 1e-14);
  CHECK(proj_distance(p, p.normalized()) < 1e-14);
  // The antipode is fixed-point free and involutive up to scale.
  ProjPoint a = p.antipode();
  CHECK(proj_distance(p, a) > 0.5);
  CHECK(proj_distance(a.antipode(), p) < 1e-14);
}

TEST_CASE("evaluation and roots") {
  // (z - 1)(z - 2i) homogenized.
  std::vector<ProjPoint> pts = {ProjPoint::affine(Complex(1.0)),
                                ProjPoint::affine(Complex(0.0, 2.0))};
  BinaryForm f = from_roots(pts);
  REQUIRE(f.degree() == 2);
  for (const auto& p : pts) CHECK(std::abs(f.eval(p)) < 1e-12 * f.max_abs());
  auto rs = roots(f);
  REQUIRE(rs.size() == 2);
  for (const auto& r : rs) {
    CHECK(r.multiplicity == 1);
    double best = 1e300;
    for (const auto& p : pts) best = std::min(best, proj_distance(r.point, p));
    CHECK(best < 1e-8);
  }
  // Root at infinity survives homogeneous evaluation.
  BinaryForm g({Complex(0.0), Complex(1.0), Complex(-3.0)});  // z1(z0 - 3 z1)
  auto rg = roots(g);
  REQUIRE(rg.size() == 2);
}

TEST_CASE("exact division and wronskian") {
  Rng rng(5);
  std::vector<ProjPoint> pts;
  for (int i = 0; i < 4; ++i) pts.push_back(ProjPoint::affine(rng.complex(1.0)));
  BinaryForm f = from_roots(pts);
  BinaryForm d = from_roots({pts[1], pts[3]});
  BinaryForm q = divide_exact(f, d, 1e-8);
  CHECK((q * d - f).max_abs() < 1e-10 * f.max_abs());
  BinaryForm bad = from_roots({ProjPoint::affine(Complex(9.0))});
  CHECK_THROWS_AS(divide_exact(f, bad, 1e-8), NumericError);
  // W(p, q) vanishes exactly when p/q is critical: for p, q with a common
  // root the wronskian inherits it.
  BinaryForm p1 = from_roots({pts[0], pts[1]});
  BinaryForm p2 = from_roots({pts[0], pts[2]});
  BinaryForm w = wronskian(p1, p2);
  CHECK(std::abs(w.eval(pts[0])) < 1e-10 * w.max_abs());
}

TEST_CASE("sl2 derivative matches the substitution flow") {
  Rng rng(11);
  std::vector<Complex> cs;
  for (int i = 0; i < 5; ++i) cs.push_back(rng.complex(1.0));
  BinaryForm f(cs);
  Eigen::Matrix2cd G;
  G << rng.complex(1.0), rng.complex(1.0), rng.complex(1.0), rng.complex(1.0);
  double eps = 1e-6;
  Eigen::Matrix2cd Mp = Eigen::Matrix2cd::Identity() + eps * G;
  Eigen::Matrix2cd Mm = Eigen::Matrix2cd::Identity() - eps * G;
  BinaryForm fd = f.substitute(Mp) - f.substitute(Mm);
  BinaryForm lie = f.sl2_derivative(G);
  double worst = 0.0;
  for (int j = 0; j <= f.degree(); ++j)
    worst = std::max(worst, std::abs(fd[j] / (2.0 * eps) - lie[j]));
  CHECK(worst < 1e-8 * f.max_abs());
}

TEST_CASE("discriminant pairing polarizes to the fixed gram matrix") {
  // In (a, b, c) coordinates the polarization of disc = b^2 - 4ac is exactly
  // [[0,0,-2],[0,1,0],[-2,0,0]].
  QuadraticClass e[3] = {QuadraticClass(1.0, 0.0, 0.0),
                         QuadraticClass(0.0, 1.0, 0.0),
                         QuadraticClass(0.0, 0.0, 1.0)};
  double want[3][3] = {{0, 0, -2}, {0, 1, 0}, {-2, 0, 0}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(disc_pairing(e[i], e[j]) == Complex(want[i][j]));
  // The quadratic form it polarizes is the discriminant itself.
  Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    QuadraticClass q(rng.complex(1.0), rng.complex(1.0), rng.complex(1.0));
    CHECK(std::abs(disc_pairing(q, q) - disc_quadratic(q)) < 1e-13);
  }
}

TEST_CASE("bidegree forms evaluate and slice consistently") {
  Rng rng(7);
  BiForm F(2, 3);
  for (auto& c : F.coeffs()) c = rng.complex(1.0);
  SurfacePoint pt(ProjPoint::affine(rng.complex(1.0)),
                  ProjPoint::affine(rng.complex(1.0)));
  // Evaluating the v-slices at u and then summing against v-monomials
  // reproduces the full evaluation (on the normalized representatives the
  // full eval uses internally).
  ProjPoint un = pt.u.normalized(), vn = pt.v.normalized();
  Complex acc = 0.0;
  for (int j = 0; j <= 3; ++j) {
    Complex mono = std::pow(vn.z0, 3 - j) * std::pow(vn.z1, j);
    acc += F.v_slice(j).eval(un) * mono;
  }
  CHECK(std::abs(acc - F.eval(pt)) < 1e-12 * F.max_abs());
  // The u-partial commutes with taking v-slices.
  for (int j = 0; j <= 3; ++j) {
    BinaryForm lhs = F.du().v_slice(j);
    BinaryForm rhs = F.v_slice(j).derivative();
    CHECK((lhs - rhs).max_abs() < 1e-13 * F.max_abs());
  }
}
