#ifndef MINITWISTOR_CONFORMAL_HPP
#define MINITWISTOR_CONFORMAL_HPP

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "minitwistor/binary_form.hpp"
#include "minitwistor/core.hpp"
#include "minitwistor/nodal_curve.hpp"
#include "minitwistor/numeric.hpp"

namespace mtw {

// ---------------------------------------------------------------------------
// Tangent vectors to the Severi variety at a parametrized member, with their
// normal-bundle data: the degree-(2m+2) normal form and the quadratic theta
// obtained by dividing out the base preimages.

struct TangentVector {
  VecC state;         // packed delta in the SeveriSystem layout
  BinaryForm du0, du1;  // degree 2
  BinaryForm dv0, dv1;  // degree m
  BinaryForm normal_form;  // degree 2m+2
  QuadraticClass theta;
};

// Normal component of a coefficient variation of the map (u0:u1),(v0:v1):
// the variation of each factor, paired against the turning rate of the other.
//
//   n = (dv0 v1 - v0 dv1) W_u - (du0 u1 - u0 du1) W_v
//
// with W_u = wronskian(u0,u1), W_v = wronskian(v0,v1).  Writing du = A/u1^2,
// dv = B/v1^2 and (u',v') = (W_u/u1^2, W_v/v1^2), this is (dv u' - du v')
// cleared of denominators: the cross product of the displacement with the
// curve's tangent, i.e. the normal displacement up to a nonzero multiple.
// It is linear in the variation and vanishes identically exactly on the
// 5-dimensional gauge (Mobius reparametrizations and per-factor scalings).
inline BinaryForm normal_component(const ParamCurve& c, const BinaryForm& du0,
                                   const BinaryForm& du1, const BinaryForm& dv0,
                                   const BinaryForm& dv1) {
  BinaryForm A = du0 * c.u1 - c.u0 * du1;  // degree 4
  BinaryForm B = dv0 * c.v1 - c.v0 * dv1;  // degree 2m
  BinaryForm wu = wronskian(c.u0, c.u1);   // degree 2
  BinaryForm wv = wronskian(c.v0, c.v1);   // degree 2m-2
  return B * wu - A * wv;                  // degree 2m+2
}

// Theta of a tangent variation: the normal form divided by the (monic)
// product of linear forms at the base preimages.  Throws
// DivisionResidualTooLarge when the variation is not tangent to the incidence
// conditions (the normal form then fails to vanish at some base preimage).
inline QuadraticClass theta_of(const ParamCurve& c, const BinaryForm& du0,
                               const BinaryForm& du1, const BinaryForm& dv0,
                               const BinaryForm& dv1, double tol = 1e-5) {
  BinaryForm n = normal_component(c, du0, du1, dv0, dv1);
  BinaryForm base = from_roots(c.base_preimages());
  return QuadraticClass(divide_exact(n, base, tol));
}

// Build a TangentVector from a packed state delta (SeveriSystem layout).
inline TangentVector make_tangent(const SeveriSystem& sys, const ParamCurve& c,
                                  const VecC& delta, double tol = 1e-5) {
  ParamCurve d = sys.unpack(delta);
  TangentVector t;
  t.state = delta;
  t.du0 = d.u0;
  t.du1 = d.u1;
  t.dv0 = d.v0;
  t.dv1 = d.v1;
  t.normal_form = normal_component(c, t.du0, t.du1, t.dv0, t.dv1);
  t.theta = theta_of(c, t.du0, t.du1, t.dv0, t.dv1, tol);
  return t;
}

// Linear combination of tangent vectors (everything in sight is linear).
inline TangentVector combine(const std::vector<TangentVector>& basis,
                             const VecC& coeff) {
  TangentVector out = basis.at(0);
  out.state = basis[0].state * coeff(0);
  out.du0 = basis[0].du0 * coeff(0);
  out.du1 = basis[0].du1 * coeff(0);
  out.dv0 = basis[0].dv0 * coeff(0);
  out.dv1 = basis[0].dv1 * coeff(0);
  out.normal_form = basis[0].normal_form * coeff(0);
  QuadraticClass q(basis[0].theta.a * coeff(0), basis[0].theta.b * coeff(0),
                   basis[0].theta.c * coeff(0));
  for (size_t i = 1; i < basis.size(); ++i) {
    out.state += basis[i].state * coeff(i);
    out.du0 = bf_add(out.du0, basis[i].du0 * coeff(i));
    out.du1 = bf_add(out.du1, basis[i].du1 * coeff(i));
    out.dv0 = bf_add(out.dv0, basis[i].dv0 * coeff(i));
    out.dv1 = bf_add(out.dv1, basis[i].dv1 * coeff(i));
    out.normal_form = bf_add(out.normal_form, basis[i].normal_form * coeff(i));
    q.a += basis[i].theta.a * coeff(i);
    q.b += basis[i].theta.b * coeff(i);
    q.c += basis[i].theta.c * coeff(i);
  }
  out.theta = q;
  return out;
}

// The 3-dimensional tangent space at c, as kernel of the incidence jacobian
// modulo the gauge directions.
inline std::vector<TangentVector> tangent_basis(const SeveriSystem& sys,
                                                const ParamCurve& c,
                                                double rank_tol = 1e-5) {
  VecC x = sys.pack(c);
  MatC J = numeric_jacobian(sys.fn(), x);
  MatC N = nullspace(J, rank_tol);
  MatC G = sys.gauge_directions(x);
  MatC T = project_out(N, G);
  if (T.cols() != 3)
    throw DegenerateMetric("tangent_basis: tangent dimension " +
                           std::to_string(T.cols()) + " (expected 3)");
  std::vector<TangentVector> out;
  for (int j = 0; j < 3; ++j) out.push_back(make_tangent(sys, c, T.col(j)));
  return out;
}

// ---------------------------------------------------------------------------
// Conformal structure: Q(delta) = disc(theta); the gram matrix is its
// polarization over a tangent basis.

// Polarization of b^2 - 4ac: B(q, q') with B(q, q) = disc(q).
inline Complex disc_pairing(const QuadraticClass& p, const QuadraticClass& q) {
  return p.b * q.b - 2.0 * (p.a * q.c + p.c * q.a);
}

struct MetricAtPoint {
  Eigen::Matrix3cd gram;
  std::vector<TangentVector> basis;
  // Trivialization convention: theta is the normal form divided by the MONIC
  // base-preimage product; only the conformal class is chart-independent.
};

inline MetricAtPoint metric_at(const ParamCurve& c,
                               std::vector<TangentVector> basis,
                               double degeneracy_tol = 1e-8) {
  if (basis.size() != 3)
    throw DegenerateMetric("metric_at: need a 3-vector tangent basis");
  MetricAtPoint out;
  out.basis = std::move(basis);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      out.gram(i, j) = disc_pairing(out.basis[i].theta, out.basis[j].theta);
  Eigen::JacobiSVD<Eigen::Matrix3cd> svd(out.gram);
  const auto& s = svd.singularValues();
  if (s(2) < degeneracy_tol * s(0))
    throw DegenerateMetric("metric_at: gram rank < 3");
  return out;
}

inline MetricAtPoint metric_at(const SeveriSystem& sys, const ParamCurve& c) {
  return metric_at(c, tangent_basis(sys, c));
}

// ---------------------------------------------------------------------------
// Null planes: 2-dimensional tangent subspaces on which Q degenerates; all
// their thetas share a root, and that root maps to a point of the surface.

struct NullPlane {
  std::array<TangentVector, 2> span;
  ProjPoint witness_root;  // common root of every theta in the span
};

struct NullPlaneImage {
  SurfacePoint point;
  ProjPoint witness_root;
  bool branch = false;  // witness is a node preimage: p is reached through
                        // one of the two branches at the node
};

namespace detail {

inline bool is_node_preimage(const ParamCurve& c, const ProjPoint& z,
                             double tol = 1e-5) {
  for (const auto& [s, t] : c.node_z) {
    if (proj_distance(z, ProjPoint::affine(s)) < tol) return true;
    if (proj_distance(z, ProjPoint::affine(t)) < tol) return true;
  }
  return false;
}

}  // namespace detail

// The common root of the two spanning thetas, and its image on the surface.
inline NullPlaneImage null_plane_to_point(const ParamCurve& c,
                                          const NullPlane& plane,
                                          double tol = 1e-6) {
  const QuadraticClass& q1 = plane.span[0].theta;
  const QuadraticClass& q2 = plane.span[1].theta;
  double s2 = std::max(q2.max_abs(), 1e-300);
  ProjPoint best;
  double best_val = 1e300;
  for (const auto& r : roots(q1.form())) {
    ProjPoint p = r.point.normalized();
    double val = std::abs(q2.form().eval(p)) / s2;
    if (val < best_val) {
      best_val = val;
      best = p;
    }
  }
  if (best_val > tol)
    throw NoCommonRoot("null_plane_to_point: spanning thetas share no root");
  NullPlaneImage out;
  out.witness_root = best;
  out.point = c.at(best);
  out.branch = detail::is_node_preimage(c, best);
  return out;
}

// The null plane at a chosen parameter value: all tangent directions whose
// theta vanishes there.  Inverse of null_plane_to_point on smooth points.
inline NullPlane null_plane_at(const std::vector<TangentVector>& basis,
                               const ProjPoint& z) {
  if (basis.size() != 3)
    throw DegenerateMetric("null_plane_at: need a 3-vector tangent basis");
  MatC row(1, 3);
  for (int j = 0; j < 3; ++j) row(0, j) = basis[j].theta.form().eval(z.normalized());
  MatC K = nullspace(row, 1e-12);
  if (K.cols() != 2)
    throw DegenerateMetric("null_plane_at: evaluation functional degenerate");
  NullPlane out;
  out.span[0] = combine(basis, K.col(0));
  out.span[1] = combine(basis, K.col(1));
  out.witness_root = z.normalized();
  return out;
}

// ---------------------------------------------------------------------------
// Independent model of the tangent space: degree-2m forms on the parameter
// line vanishing at all node preimages.  Its dimension is 3 and every element
// is divisible by the node-preimage product, leaving a quadratic factor.

struct VCSpace {
  BinaryForm node_product;         // degree 2m-2, monic
  std::vector<BinaryForm> basis;   // 3 forms of degree 2m
};

inline VCSpace vc_oracle(const ParamCurve& c) {
  const int m = c.m();
  std::vector<ProjPoint> zs;
  for (const auto& [s, t] : c.node_z) {
    zs.push_back(ProjPoint::affine(s).normalized());
    zs.push_back(ProjPoint::affine(t).normalized());
  }
  VCSpace out;
  out.node_product = from_roots(zs);
  // Evaluation matrix of the degree-2m monomials at the node preimages.
  int nc = 2 * m + 1;
  MatC E(static_cast<int>(zs.size()), nc);
  for (size_t i = 0; i < zs.size(); ++i) {
    ProjPoint z = zs[i];
    for (int j = 0; j < nc; ++j)
      E(static_cast<int>(i), j) =
          std::pow(z.z0, 2 * m - j) * std::pow(z.z1, j);
  }
  MatC K = zs.empty() ? MatC::Identity(nc, nc) : nullspace(E, 1e-9);
  if (K.cols() != 3)
    throw DegenerateMetric("vc_oracle: section space dimension " +
                           std::to_string(K.cols()) + " (expected 3)");
  for (int j = 0; j < K.cols(); ++j) {
    std::vector<Complex> coef(nc);
    for (int i = 0; i < nc; ++i) coef[i] = K(i, j);
    out.basis.push_back(BinaryForm(std::move(coef)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pullback route to theta through the implicit model, used as the oracle
// against the normal-form route.  Differentiating F(phi(z)) = 0 along a
// deformation gives, in affine charts,
//
//   dF(u,v) + F_u du + F_v dv = 0   pointwise in z,
//
// so the composite dF(phi(z)) is computable from the UNDEFORMED implicit form
// and the variation of the map alone.  Cleared of denominators it is a form
// of degree 4m vanishing at the 2m base preimages and the 2m-2 node
// preimages; the remaining quadratic factor is theta again.

namespace detail {

// Homogeneous composition f((u0:u1),(v0:v1)) as a form on the parameter line.
inline BinaryForm compose_biform(const BiForm& f, const BinaryForm& u0,
                                 const BinaryForm& u1, const BinaryForm& v0,
                                 const BinaryForm& v1) {
  const int p = f.deg_u(), q = f.deg_v();
  std::vector<BinaryForm> pu0(p + 1, BinaryForm({Complex(1.0)}));
  std::vector<BinaryForm> pu1 = pu0, pv0(q + 1, BinaryForm({Complex(1.0)}));
  std::vector<BinaryForm> pv1 = pv0;
  for (int i = 1; i <= p; ++i) {
    pu0[i] = pu0[i - 1] * u0;
    pu1[i] = pu1[i - 1] * u1;
  }
  for (int j = 1; j <= q; ++j) {
    pv0[j] = pv0[j - 1] * v0;
    pv1[j] = pv1[j - 1] * v1;
  }
  int deg = p * u0.degree() + q * v0.degree();
  BinaryForm acc = BinaryForm::zero(deg);
  for (int i = 0; i <= p; ++i)
    for (int j = 0; j <= q; ++j) {
      Complex cij = f.at(i, j);
      if (cij == Complex(0.0)) continue;
      BinaryForm term = pu0[p - i] * pu1[i] * pv0[q - j] * pv1[j] * cij;
      acc = bf_add(acc, bf_pad(term, deg));
    }
  return acc;
}

}  // namespace detail

// dF(phi(z)) cleared of denominators: degree 4m.
inline BinaryForm implicit_variation_pullback(const ParamCurve& c,
                                              const BiForm& f,
                                              const TangentVector& t,
                                              double tol = 1e-5) {
  BinaryForm A = t.du0 * c.u1 - c.u0 * t.du1;  // numerator of du, deg 4
  BinaryForm B = t.dv0 * c.v1 - c.v0 * t.dv1;  // numerator of dv, deg 2m
  BinaryForm fu = detail::compose_biform(f.du(), c.u0, c.u1, c.v0, c.v1);
  BinaryForm fv = detail::compose_biform(f.dv(), c.u0, c.u1, c.v0, c.v1);
  // Both terms below have degree 5m+2; the sum is divisible by u1*v1 (the
  // poles of du and dv cancel against the chain rule on the curve).
  BinaryForm P = bf_add(fu * A * c.v1, fv * B * c.u1);
  return divide_exact(P, c.u1 * c.v1, tol) * Complex(-1.0);
}

// Theta through the implicit model.
inline QuadraticClass vc_theta(const ParamCurve& c, const BiForm& f,
                               const TangentVector& t, double tol = 1e-5) {
  BinaryForm s = implicit_variation_pullback(c, f, t, tol);
  std::vector<ProjPoint> zs = c.base_preimages();
  for (const auto& [a, b] : c.node_z) {
    zs.push_back(ProjPoint::affine(a).normalized());
    zs.push_back(ProjPoint::affine(b).normalized());
  }
  return QuadraticClass(divide_exact(s, from_roots(zs), tol));
}

// Projective distance between two quadratics (sine of the angle between the
// coefficient vectors): zero iff they agree up to a scalar.
inline double theta_mismatch(const QuadraticClass& p, const QuadraticClass& q) {
  Eigen::Vector3cd x(p.a, p.b, p.c), y(q.a, q.b, q.c);
  double nx = x.norm(), ny = y.norm();
  if (nx == 0.0 || ny == 0.0) return (nx == 0.0 && ny == 0.0) ? 0.0 : 1.0;
  Complex d = x.dot(y);  // conjugate-linear in x
  double cos2 = std::norm(d) / (nx * nx * ny * ny);
  return std::sqrt(std::max(0.0, 1.0 - cos2));
}

// Cross-model consistency: the scalar relating the normal-form theta to the
// implicit-model theta must be the same for every tangent direction.  Returns
// the worst projective mismatch after fixing the scalar on the first vector.
inline double tangent_model_mismatch(const ParamCurve& c, const BiForm& f,
                                     const std::vector<TangentVector>& basis) {
  double worst = 0.0;
  Complex scale(0.0);
  for (const auto& t : basis) {
    QuadraticClass qv = vc_theta(c, f, t);
    Eigen::Vector3cd x(t.theta.a, t.theta.b, t.theta.c);
    Eigen::Vector3cd y(qv.a, qv.b, qv.c);
    if (scale == Complex(0.0)) scale = x.dot(y) / x.squaredNorm();
    worst = std::max(worst, (y - scale * x).norm() /
                                std::max(scale == Complex(0.0) ? 1.0
                                                               : std::abs(scale) *
                                                                     x.norm(),
                                         1e-300));
  }
  return worst;
}

}  // namespace mtw

#endif
