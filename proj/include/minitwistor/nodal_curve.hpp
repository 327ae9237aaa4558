#ifndef MINITWISTOR_NODAL_CURVE_HPP
#define MINITWISTOR_NODAL_CURVE_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

#include "minitwistor/biform.hpp"
#include "minitwistor/binary_form.hpp"
#include "minitwistor/core.hpp"
#include "minitwistor/numeric.hpp"
#include "minitwistor/surface_config.hpp"

namespace mtw {

// ---------------------------------------------------------------------------
// Small affine-polynomial helpers on top of BinaryForm (coeffs are
// highest-power-first in the chart z = z0/z1).

// Drop leading coefficients that are zero relative to the form's scale
// (nominal-degree padding and roots at infinity otherwise conflate).
inline BinaryForm bf_trim(const BinaryForm& f, double rel = 1e-9) {
  double s = f.max_abs();
  int lead = 0;
  while (lead < f.degree() && std::abs(f[lead]) <= rel * s) ++lead;
  if (lead == 0) return f;
  std::vector<Complex> c(f.coeffs().begin() + lead, f.coeffs().end());
  return BinaryForm(std::move(c));
}

inline BinaryForm bf_pad(const BinaryForm& f, int degree) {
  if (f.degree() >= degree) return f;
  std::vector<Complex> c(degree - f.degree(), Complex(0.0));
  c.insert(c.end(), f.coeffs().begin(), f.coeffs().end());
  return BinaryForm(std::move(c));
}

inline BinaryForm bf_add(const BinaryForm& a, const BinaryForm& b) {
  int d = std::max(a.degree(), b.degree());
  return bf_pad(a, d) + bf_pad(b, d);
}

// ---------------------------------------------------------------------------

struct ImplicitCurve {
  BiForm f;                         // bidegree (m, 2) in (u, v)
  std::vector<SurfacePoint> nodes;  // F = F_u = F_v = 0

  int m() const { return f.deg_u(); }
};

// Substitute u -> M(u) in the u-factor only.
inline BiForm biform_sub_u(const BiForm& f, const Eigen::Matrix2cd& M) {
  BiForm out(f.deg_u(), f.deg_v());
  for (int j = 0; j <= f.deg_v(); ++j)
    out.set_v_slice(j, f.v_slice(j).substitute(M));
  return out;
}

// F1 * F2 for the two split curves; nodes are the pairwise intersections.
inline ImplicitCurve reducible_seed(const PointConfig& config) {
  ImplicitCurve out;
  out.f = config.curves.d1.implicit_form() *
          config.scaled_d2_cache().implicit_form();
  out.f.normalize();
  out.nodes = transversality_check(config.curves);
  return out;
}

namespace detail {

struct VQuadratic {
  BinaryForm A, B, C;  // F/v1^2 = A(u) v^2 + B(u) v + C(u)
};

inline VQuadratic v_quadratic(const BiForm& f) {
  return {f.v_slice(0), f.v_slice(1), f.v_slice(2)};
}

inline Complex eval_affine(const BiForm& f, Complex u, Complex v) {
  return f.eval({ProjPoint::affine(u), ProjPoint::affine(v)});
}

}  // namespace detail

// Nodes of F located through the u-discriminant: F = A v^2 + B v + C has a
// node exactly at the double roots of B^2 - 4AC, then polished by bivariate
// Newton on (F_u, F_v).  Throws NonNodalSingularity on a degenerate Hessian.
inline std::vector<SurfacePoint> find_nodes(const BiForm& f,
                                            double tol = 1e-7) {
  if (f.deg_v() != 2) throw NumericError("find_nodes: expect deg_v = 2");
  for (int rot = 0; rot < 4; ++rot) {
    Eigen::Matrix2cd M = Eigen::Matrix2cd::Identity();
    if (rot > 0) {
      Complex g = Complex(0.31, 0.17) * double(rot);
      M << Complex(1.0), g, -g, Complex(1.0);
    }
    BiForm fr = biform_sub_u(f, M);
    auto [A, B, C] = detail::v_quadratic(fr);
    BinaryForm disc = B * B - A * C * Complex(4.0);
    double scale = disc.max_abs();
    if (scale == 0.0) throw NumericError("find_nodes: vanishing discriminant");
    // A root at infinity means a node or branch point escaped the chart.
    if (std::abs(disc[0]) < 1e-8 * scale || std::abs(disc[1]) < 1e-8 * scale)
      continue;  // rotate chart
    std::vector<SurfacePoint> out;
    bool ok = true;
    for (const auto& r : roots(disc)) {
      if (r.multiplicity < 2) continue;  // branch point of the 2:1 projection
      if (r.multiplicity > 2)
        throw NonNodalSingularity("find_nodes: discriminant root of order > 2");
      Complex u = r.point.affine_value();
      Complex av = A.eval_affine(u), cv = C.eval_affine(u), bv = B.eval_affine(u);
      Complex v;
      if (std::abs(av) >= std::abs(cv) * 0.2) {
        v = -bv / (2.0 * av);
      } else if (std::abs(bv) > 1e-10) {
        v = -2.0 * cv / bv;  // from the reciprocal chart
      } else {
        ok = false;
        break;
      }
      // Newton polish on the critical-point equations.
      BiForm fu = fr.du(), fv = fr.dv();
      BiForm fuu = fu.du(), fuv = fu.dv(), fvv = fv.dv();
      bool polished = false;
      for (int it = 0; it < 30; ++it) {
        Complex r1 = detail::eval_affine(fu, u, v);
        Complex r2 = detail::eval_affine(fv, u, v);
        if (std::abs(r1) + std::abs(r2) < 1e-13 * std::max(fr.max_abs(), 1.0)) {
          polished = true;
          break;
        }
        Complex h11 = detail::eval_affine(fuu, u, v);
        Complex h12 = detail::eval_affine(fuv, u, v);
        Complex h22 = detail::eval_affine(fvv, u, v);
        Complex det = h11 * h22 - h12 * h12;
        if (std::abs(det) < 1e-14) break;
        Complex du = (-r1 * h22 + r2 * h12) / det;
        Complex dv = (-r2 * h11 + r1 * h12) / det;
        u += du;
        v += dv;
        polished = true;
      }
      if (!polished) {
        ok = false;
        break;
      }
      double fscale = std::max(fr.max_abs(), 1.0);
      if (std::abs(detail::eval_affine(fr, u, v)) > 1e-6 * fscale)
        throw NonNodalSingularity("find_nodes: critical point off the curve");
      Complex det = detail::eval_affine(fuu, u, v) * detail::eval_affine(fvv, u, v) -
                    std::pow(detail::eval_affine(fuv, u, v), 2);
      if (std::abs(det) < 1e-8 * fscale * fscale)
        throw NonNodalSingularity("find_nodes: degenerate Hessian (cusp?)");
      // Map back to the original chart: u_orig = M(u_rot).
      Complex u0 = M(0, 0) * u + M(0, 1);
      Complex u1 = M(1, 0) * u + M(1, 1);
      out.push_back({ProjPoint(u0, u1).normalized(),
                     ProjPoint::affine(v).normalized()});
    }
    if (ok) return out;
  }
  throw NumericError("find_nodes: no usable u-chart found");
}

inline std::vector<SurfacePoint> find_nodes(const ImplicitCurve& c,
                                            double tol = 1e-7) {
  return find_nodes(c.f, tol);
}

// ---------------------------------------------------------------------------
// Implicit incidence-plus-assigned-nodes system: unknowns are the bidegree
// (m,2) coefficients and the free node locations.

class ImplicitNodalSystem {
 public:
  ImplicitNodalSystem(const PointConfig& config, int num_nodes,
                      const BiForm& reference)
      : config_(&config), num_nodes_(num_nodes), ref_(reference) {
    m_ = config.m;
    n_coeff_ = (m_ + 1) * 3;
    double nrm = 0.0;
    for (auto& c : ref_.coeffs()) nrm += std::norm(c);
    ref_weight_.resize(n_coeff_);
    for (int i = 0; i < n_coeff_; ++i)
      ref_weight_[i] = std::conj(ref_.coeffs()[i]) / nrm;
  }

  int num_unknowns() const { return n_coeff_ + 2 * num_nodes_; }

  VecC pack(const BiForm& f, const std::vector<SurfacePoint>& nodes) const {
    VecC x(num_unknowns());
    for (int i = 0; i < n_coeff_; ++i) x(i) = f.coeffs()[i];
    for (int i = 0; i < num_nodes_; ++i) {
      x(n_coeff_ + 2 * i) = nodes[i].u.affine_value();
      x(n_coeff_ + 2 * i + 1) = nodes[i].v.affine_value();
    }
    return x;
  }
  BiForm unpack_form(const VecC& x) const {
    BiForm f(m_, 2);
    for (int i = 0; i < n_coeff_; ++i) f.coeffs()[i] = x(i);
    return f;
  }
  std::vector<SurfacePoint> unpack_nodes(const VecC& x) const {
    std::vector<SurfacePoint> out;
    for (int i = 0; i < num_nodes_; ++i)
      out.push_back({ProjPoint::affine(x(n_coeff_ + 2 * i)).normalized(),
                     ProjPoint::affine(x(n_coeff_ + 2 * i + 1)).normalized()});
    return out;
  }

  VecC residual(const VecC& x) const {
    BiForm f = unpack_form(x);
    BiForm fu = f.du(), fv = f.dv();
    VecC r(2 * m_ + 3 * num_nodes_ + 1);
    int row = 0;
    for (const auto& p : config_->points) r(row++) = f.eval(p);
    for (int i = 0; i < num_nodes_; ++i) {
      Complex u = x(n_coeff_ + 2 * i), v = x(n_coeff_ + 2 * i + 1);
      r(row++) = detail::eval_affine(f, u, v);
      r(row++) = detail::eval_affine(fu, u, v);
      r(row++) = detail::eval_affine(fv, u, v);
    }
    // Scale gauge: bilinear pairing with the reference form stays 1.
    Complex g(0.0);
    for (int i = 0; i < n_coeff_; ++i) g += x(i) * ref_weight_[i];
    r(row++) = g - Complex(1.0);
    return r;
  }
  ResidualFn fn() const {
    return [this](const VecC& x) { return residual(x); };
  }

 private:
  const PointConfig* config_;
  int num_nodes_, m_, n_coeff_;
  BiForm ref_;
  std::vector<Complex> ref_weight_;
};

// Smooth exactly the omitted node of the reducible seed, keeping the others
// as (free-position) nodes.  `keep` lists the node indices kept.
inline ImplicitCurve smooth_one_node(const ImplicitCurve& seed,
                                     const std::vector<int>& keep,
                                     const PointConfig& config,
                                     double step = 0.3) {
  const int m = config.m;
  if (static_cast<int>(keep.size()) != m - 1)
    throw std::invalid_argument("smooth_one_node: keep must omit exactly one node");
  std::vector<bool> kept(seed.nodes.size(), false);
  std::vector<SurfacePoint> nodes;
  for (int i : keep) {
    nodes.push_back(seed.nodes[i]);
    kept[i] = true;
  }
  SurfacePoint omitted;
  for (size_t i = 0; i < seed.nodes.size(); ++i)
    if (!kept[i]) omitted = seed.nodes[i];

  ImplicitNodalSystem sys(config, m - 1, seed.f);
  VecC x0 = sys.pack(seed.f, nodes);

  // Direction in the constrained nullspace that opens the omitted node:
  // maximize |dF(omitted)| over the tangent cone.
  MatC J = numeric_jacobian(sys.fn(), x0);
  MatC N = nullspace(J, 1e-6);
  if (N.cols() == 0) throw NewtonDivergence("smooth_one_node: no tangent direction");
  // Row functional: dF evaluated at the omitted node.
  VecC mono = VecC::Zero(sys.num_unknowns());
  {
    ProjPoint u = omitted.u.normalized(), v = omitted.v.normalized();
    int idx = 0;
    for (int i = 0; i <= m; ++i)
      for (int j = 0; j <= 2; ++j)
        mono(idx++) = std::pow(u.z0, m - i) * std::pow(u.z1, i) *
                      std::pow(v.z0, 2 - j) * std::pow(v.z1, j);
  }
  VecC w = N.adjoint() * mono;  // conj of the per-column functional values
  if (w.norm() < 1e-10)
    throw NewtonDivergence("smooth_one_node: tangent cone does not open the node");
  VecC dir = N * w;  // maximizes |dF(omitted)| over unit tangent vectors
  dir /= dir.norm();

  GaussNewtonOptions opt;
  opt.tol = 1e-12;
  double h = step;
  for (int retry = 0; retry < 8; ++retry, h *= 0.5) {
    VecC xs = x0 + h * dir;
    auto res = gauss_newton(sys.fn(), xs, opt);
    if (!res.converged) continue;
    BiForm f = sys.unpack_form(res.x);
    f.normalize();
    std::vector<SurfacePoint> found;
    try {
      found = find_nodes(f);
    } catch (const NumericError&) {
      continue;
    }
    if (static_cast<int>(found.size()) != m - 1) continue;
    // The omitted node must actually have opened.
    bool still_there = false;
    for (const auto& nd : found)
      if (surface_distance(nd, omitted) < 1e-4) still_there = true;
    if (still_there) continue;
    ImplicitCurve out;
    out.f = f;
    out.nodes = found;
    return out;
  }
  throw NewtonDivergence("smooth_one_node: corrector failed at all step sizes");
}

// ---------------------------------------------------------------------------
// Parametric model: z -> ((U0:U1), (V0:V1)), deg U = 2, deg V = m.

struct ParamCurve {
  BinaryForm u0, u1;  // degree 2
  BinaryForm v0, v1;  // degree m
  std::vector<Complex> base_z;                     // preimages of config points
  std::vector<std::pair<Complex, Complex>> node_z; // preimage pairs per node

  int m() const { return v0.degree(); }

  SurfacePoint at(Complex z) const {
    ProjPoint p = ProjPoint::affine(z);
    return {ProjPoint(u0.eval(p), u1.eval(p)).normalized(),
            ProjPoint(v0.eval(p), v1.eval(p)).normalized()};
  }
  SurfacePoint at(const ProjPoint& p) const {
    return {ProjPoint(u0.eval(p), u1.eval(p)).normalized(),
            ProjPoint(v0.eval(p), v1.eval(p)).normalized()};
  }

  std::vector<ProjPoint> base_preimages() const {
    std::vector<ProjPoint> out;
    for (auto z : base_z) out.push_back(ProjPoint::affine(z).normalized());
    return out;
  }

  double coeff_scale() const {
    return std::max(std::max(u0.max_abs(), u1.max_abs()),
                    std::max(v0.max_abs(), v1.max_abs()));
  }

  void normalize_scale() {
    double su = std::max(u0.max_abs(), u1.max_abs());
    double sv = std::max(v0.max_abs(), v1.max_abs());
    u0 = u0 * Complex(1.0 / su);
    u1 = u1 * Complex(1.0 / su);
    v0 = v0 * Complex(1.0 / sv);
    v1 = v1 * Complex(1.0 / sv);
  }
};

// Candidate curve parameters mapping to p: roots of the degree-2 u-equation,
// scored by the v-equation residual, best first.
struct PreimageCandidate {
  Complex z;
  double v_residual;  // relative
};

inline std::vector<PreimageCandidate> preimage_candidates(
    const ParamCurve& c, const SurfacePoint& p) {
  ProjPoint u = p.u.normalized(), v = p.v.normalized();
  BinaryForm cu = c.u0 * u.z1 - c.u1 * u.z0;
  BinaryForm cv = c.v0 * v.z1 - c.v1 * v.z0;
  double sv = std::max(cv.max_abs(), 1e-300);
  std::vector<PreimageCandidate> out;
  for (const auto& r : roots(cu)) {
    if (!r.point.is_finite(1e-9)) continue;
    Complex z = r.point.affine_value();
    // Newton-polish the u-cross root, then score the v-equation.
    for (int it = 0; it < 5; ++it) {
      Complex f = cu.eval_affine(z), df = cu.derivative().eval_affine(z);
      if (std::abs(df) < 1e-14) break;
      z -= f / df;
    }
    double denom = std::pow(std::max(1.0, std::abs(z)), cv.degree());
    out.push_back({z, std::abs(cv.eval_affine(z)) / (sv * denom)});
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.v_residual < b.v_residual; });
  return out;
}

// All curve parameters mapping to p within tolerance.
inline std::vector<Complex> preimages_of(const ParamCurve& c,
                                         const SurfacePoint& p,
                                         double tol = 1e-6) {
  std::vector<Complex> out;
  for (const auto& cand : preimage_candidates(c, p))
    if (cand.v_residual < tol) out.push_back(cand.z);
  return out;
}

// Gauss-Newton refinement onto the incidence variety (defined with
// SeveriSystem below).
ParamCurve polish_on_severi(const ParamCurve& c, const PointConfig& config,
                            double tol = 1e-10);

// ---------------------------------------------------------------------------
// parametrize: rational parametrization of an irreducible (m-1)-nodal curve
// via the factorization disc_u = R^2 D with deg D = 2.

namespace detail {

// Fit a degree-d rational function through samples (t_i, y_i): the kernel of
// the linear system n(t_i) - y_i q(t_i) = 0 over the 2(d+1) coefficients.
// Returns the reduced pair directly, sidestepping root cancellation.
inline std::pair<BinaryForm, BinaryForm> fit_rational(
    const std::vector<Complex>& ts, const std::vector<Complex>& ys, int d) {
  int n = static_cast<int>(ts.size());
  MatC A = MatC::Zero(n, 2 * (d + 1));
  for (int i = 0; i < n; ++i) {
    double st = std::pow(std::max(1.0, std::abs(ts[i])), d);
    double sy = std::max(1.0, std::abs(ys[i]));
    for (int j = 0; j <= d; ++j) {
      Complex mono = std::pow(ts[i], d - j) / (st * sy);
      A(i, j) = mono;
      A(i, d + 1 + j) = -ys[i] * mono;
    }
  }
  Eigen::JacobiSVD<MatC> svd(A, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  int nc = 2 * (d + 1);
  if (s(nc - 1) > 1e-8 * s(0))
    throw ReductionFailed("fit_rational: samples admit no degree-d fit");
  // Uniqueness is a gap condition: curves near a lower-degree stratum have a
  // second small-but-nonzero singular value, which is fine.
  if (s(nc - 2) < 1e2 * s(nc - 1))
    throw ReductionFailed("fit_rational: fit is not unique (degree too high?)");
  VecC v = svd.matrixV().col(nc - 1);
  std::vector<Complex> num(d + 1), den(d + 1);
  for (int j = 0; j <= d; ++j) {
    num[j] = v(j);
    den[j] = v(d + 1 + j);
  }
  return {BinaryForm(std::move(num)), BinaryForm(std::move(den))};
}

}  // namespace detail

inline ParamCurve parametrize(const ImplicitCurve& curve,
                              const PointConfig& config) {
  const int m = curve.m();
  std::string last_err;
  for (int rot = 0; rot < 4; ++rot) {
    Eigen::Matrix2cd M = Eigen::Matrix2cd::Identity();
    if (rot > 0) {
      Complex g = Complex(0.23, 0.41) * double(rot);
      M << Complex(1.0), g, -g * 0.7, Complex(1.0);
    }
    try {
      BiForm fr = biform_sub_u(curve.f, M);
      auto [A, B, C] = detail::v_quadratic(fr);
      BinaryForm disc = B * B - A * C * Complex(4.0);
      double dscale = disc.max_abs();
      if (std::abs(disc[0]) < 1e-8 * dscale)
        throw DiscriminantFactorizationFailed("discriminant degree drop");
      // Split roots into doubles (nodes) and simples (branch points).
      std::vector<ProjPoint> dbl;
      std::vector<ProjPoint> simp;
      for (const auto& r : roots(disc)) {
        if (r.multiplicity == 2) dbl.push_back(r.point);
        else if (r.multiplicity == 1) simp.push_back(r.point);
        else throw DiscriminantFactorizationFailed("root of order > 2");
      }
      if (static_cast<int>(dbl.size()) != m - 1 ||
          static_cast<int>(simp.size()) != 2)
        throw DiscriminantFactorizationFailed(
            "expected m-1 double + 2 simple roots, got " +
            std::to_string(dbl.size()) + "+" + std::to_string(simp.size()));
      for (const auto& p : simp)
        if (!p.is_finite(1e-9))
          throw DiscriminantFactorizationFailed("branch point at infinity");
      BinaryForm R = from_roots(dbl);           // degree m-1, monic-ish
      BinaryForm D = divide_exact(disc, R * R, 1e-5);  // degree 2
      if (std::abs(D[0]) < 1e-8 * D.max_abs())
        throw DiscriminantFactorizationFailed("conic leading coefficient vanishes");
      Complex r = std::sqrt(D[0]);
      auto drts = roots(D);
      if (drts.size() != 2 || drts[0].multiplicity != 1)
        throw DiscriminantFactorizationFailed("branch conic is degenerate");
      Complex alpha = drts[0].point.affine_value();
      Complex beta = drts[1].point.affine_value();
      // Symmetric parametrization of w^2 = D(u):
      //   u(s) = (a+b)/2 + (a-b)(s + 1/s)/4,  w(s) = r (a-b)(s - 1/s)/4,
      // with s <-> 1/s swapping the sheets.  (Projection from a point on the
      // conic compresses one sheet into an invisibly small t-region when the
      // branch points are close, e.g. right after opening a node.)
      Complex hd = (alpha - beta) * 0.25;
      BinaryForm Un({hd, (alpha + beta) * 0.5, hd});
      BinaryForm Ud({Complex(0.0), Complex(1.0), Complex(0.0)});
      // Sample v(s) = (-B(u) + R(u) w) / (2 A(u)) pointwise; the degree-m
      // rational map (v0 : v1) then comes from a linear nullspace fit.
      std::vector<Complex> ts, ys;
      int want = 6 * m + 10;
      for (int i = 0; ts.size() < static_cast<size_t>(want) && i < 4 * want; ++i) {
        double rad = (i % 2) ? 1.43 : 0.71;
        Complex s = std::polar(rad, 0.37 + 6.283185307179586 * i / double(want));
        Complex u = Un.eval_affine(s) / s;
        if (std::abs(u) > 1e4) continue;
        Complex av = A.eval_affine(u);
        double asc = A.max_abs() * std::pow(std::max(1.0, std::abs(u)), A.degree());
        if (std::abs(av) < 1e-6 * asc) continue;  // vertical tangency sample
        Complex w = r * hd * (s - 1.0 / s);
        Complex y = (-B.eval_affine(u) + R.eval_affine(u) * w) / (2.0 * av);
        ts.push_back(s);
        ys.push_back(y);
      }
      if (ts.size() < static_cast<size_t>(want))
        throw ReductionFailed("parametrize: too few usable v-samples");
      auto [vn, vd] = detail::fit_rational(ts, ys, m);

      ParamCurve pc;
      // Map the u-factor back through M: u_orig = M(u_rot).
      pc.u0 = Un * M(0, 0) + Ud * M(0, 1);
      pc.u1 = Un * M(1, 0) + Ud * M(1, 1);
      pc.v0 = vn;
      pc.v1 = vd;
      pc.normalize_scale();

      // Verify against the original implicit form on a probe set.
      double fscale = std::max(curve.f.max_abs(), 1e-300);
      for (int k = 0; k < 7; ++k) {
        Complex z = std::polar(1.1, 0.9 * k + 0.3);
        SurfacePoint pt = pc.at(z);
        if (std::abs(curve.f.eval(pt)) > 1e-6 * fscale)
          throw ReductionFailed("parametrization off the curve");
      }

      // Base preimages, aligned with the configuration points: the better of
      // the two u-roots under the v-equation, required to be clear-cut.
      for (const auto& p : config.points) {
        auto cand = preimage_candidates(pc, p);
        if (cand.empty() || cand[0].v_residual > 1e-3)
          throw ReductionFailed("base point preimage not found");
        pc.base_z.push_back(cand[0].z);
      }
      // Node preimage pairs: both u-roots lie on the curve.
      for (const auto& nd : curve.nodes) {
        auto cand = preimage_candidates(pc, nd);
        if (cand.size() != 2 || cand[1].v_residual > 1e-2)
          throw ReductionFailed("node preimage pair not found");
        pc.node_z.emplace_back(cand[0].z, cand[1].z);
      }
      // The discriminant route is only good to the double-root extraction
      // accuracy (~1e-8); tighten onto the incidence variety.
      pc = polish_on_severi(pc, config);
      // A common factor in either pair means the map degenerated.
      auto coprime = [](const BinaryForm& f, const BinaryForm& g) {
        for (const auto& r : roots(bf_trim(f)))
          if (std::abs(g.eval(r.point.normalized())) < 1e-6 * g.max_abs())
            return false;
        return true;
      };
      if (!coprime(pc.u0, pc.u1) || !coprime(pc.v0, pc.v1))
        throw ReductionFailed("parametrize: map acquired a base point");
      return pc;
    } catch (const NumericError& e) {
      last_err = e.what();
      continue;
    }
  }
  throw DiscriminantFactorizationFailed("parametrize: " + last_err);
}

// ---------------------------------------------------------------------------
// implicitize: resultant elimination of the parameter (testing oracle for
// parametrize and the source of dF in the tangent-model comparison).

inline Complex sylvester_resultant(const std::vector<Complex>& p,
                                   const std::vector<Complex>& q) {
  // p, q highest-first; sizes dp+1, dq+1.
  int dp = static_cast<int>(p.size()) - 1, dq = static_cast<int>(q.size()) - 1;
  int n = dp + dq;
  if (n == 0) return Complex(1.0);
  MatC S = MatC::Zero(n, n);
  for (int i = 0; i < dq; ++i)
    for (int j = 0; j <= dp; ++j) S(i, i + j) = p[j];
  for (int i = 0; i < dp; ++i)
    for (int j = 0; j <= dq; ++j) S(dq + i, i + j) = q[j];
  return S.determinant();
}

inline ImplicitCurve implicitize(const ParamCurve& pc) {
  const int m = pc.m();
  // Birationality probe: a generic point must have a single preimage.
  {
    Complex zt(0.437, 0.211);
    auto zs = preimages_of(pc, pc.at(zt), 1e-6);
    if (zs.size() != 1) throw DegenerateImage("implicitize: non-birational map");
  }
  // Interpolate F(u,v) = Res_z(U0 - u U1, V0 - v V1) on a tensor grid.
  int nu = m + 1, nv = 3;
  std::vector<Complex> ugrid(nu), vgrid(nv);
  for (int a = 0; a < nu; ++a)
    ugrid[a] = 1.37 * std::polar(1.0, 6.283185307179586 * a / nu + 0.19);
  for (int b = 0; b < nv; ++b)
    vgrid[b] = 0.83 * std::polar(1.0, 6.283185307179586 * b / nv + 0.71);
  MatC vals(nu, nv);
  for (int a = 0; a < nu; ++a)
    for (int b = 0; b < nv; ++b) {
      BinaryForm f1 = pc.u0 - pc.u1 * ugrid[a];
      BinaryForm f2 = pc.v0 - pc.v1 * vgrid[b];
      vals(a, b) = sylvester_resultant(f2.coeffs(), f1.coeffs());
    }
  // Two Vandermonde solves: coefficients in u (degree m) then v (degree 2).
  MatC Vu(nu, nu), Vv(nv, nv);
  for (int a = 0; a < nu; ++a)
    for (int i = 0; i < nu; ++i) Vu(a, i) = std::pow(ugrid[a], m - i);
  for (int b = 0; b < nv; ++b)
    for (int j = 0; j < nv; ++j) Vv(b, j) = std::pow(vgrid[b], 2 - j);
  MatC coeff = Vu.colPivHouseholderQr().solve(vals);
  coeff = Vv.colPivHouseholderQr().solve(coeff.transpose()).transpose();

  ImplicitCurve out;
  out.f = BiForm(m, 2);
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= 2; ++j) out.f.at(i, j) = coeff(i, j);
  if (out.f.max_abs() < 1e-200) throw DegenerateImage("implicitize: zero form");
  out.f.normalize();
  // Deterministic phase: largest coefficient real positive.
  Complex big(0.0);
  for (auto& c : out.f.coeffs())
    if (std::abs(c) > std::abs(big)) big = c;
  Complex phase = big / std::abs(big);
  for (auto& c : out.f.coeffs()) c /= phase;
  for (const auto& [s, t] : pc.node_z) {
    SurfacePoint nd = pc.at(s);
    out.nodes.push_back(nd);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Section basis of polynomials of degree <= k matching at the node parameter
// pairs: {1, f_{delta+1}, ..., f_k} with exact degrees.

struct SectionBasis {
  int k = 0;
  std::vector<std::pair<Complex, Complex>> pairs;
  std::vector<std::vector<Complex>> basis;  // low-first coefficients
};

inline SectionBasis section_basis(
    int k, const std::vector<std::pair<Complex, Complex>>& pairs,
    double tol = 1e-8) {
  int delta = static_cast<int>(pairs.size());
  if (delta >= k) throw std::invalid_argument("section_basis: need delta < k");
  SectionBasis out;
  out.k = k;
  out.pairs = pairs;
  out.basis.push_back({Complex(1.0)});  // the constant section
  for (int d = delta + 1; d <= k; ++d) {
    // f = z^d + sum_{i=1}^{d-1} c_i z^i  (constant term free too; keep 0 and
    // let the constant basis vector absorb it).
    MatC Acond(delta, d - 1);
    VecC rhs(delta);
    for (int p = 0; p < delta; ++p) {
      auto [a, b] = pairs[p];
      for (int i = 1; i <= d - 1; ++i)
        Acond(p, i - 1) = std::pow(a, i) - std::pow(b, i);
      rhs(p) = -(std::pow(a, d) - std::pow(b, d));
    }
    VecC c = Acond.completeOrthogonalDecomposition().solve(rhs);
    double resid = (Acond * c - rhs).norm();
    double scale = std::max(rhs.norm(), 1.0);
    if (resid > 1e-7 * scale)
      throw DegreeUnachievable("section_basis: degree " + std::to_string(d));
    std::vector<Complex> f(d + 1, Complex(0.0));
    f[d] = Complex(1.0);
    for (int i = 1; i <= d - 1; ++i) f[i] = c(i - 1);
    out.basis.push_back(std::move(f));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parametric incidence system: the working representation of the Severi
// variety.  Unknowns: u-pair and v-pair coefficients, base preimages, node
// preimage pairs.

class SeveriSystem {
 public:
  SeveriSystem(const PointConfig& config) : config_(&config), m_(config.m) {}

  int m() const { return m_; }
  int num_unknowns() const { return 6 * m_ + 6; }
  int num_equations() const { return 6 * m_ - 2; }
  const PointConfig& config() const { return *config_; }

  // Packing layout: [u0(3), u1(3), v0(m+1), v1(m+1), base_z(2m), node_z(2m-2)]
  VecC pack(const ParamCurve& c) const {
    VecC x(num_unknowns());
    int i = 0;
    for (int j = 0; j <= 2; ++j) x(i++) = c.u0[j];
    for (int j = 0; j <= 2; ++j) x(i++) = c.u1[j];
    for (int j = 0; j <= m_; ++j) x(i++) = c.v0[j];
    for (int j = 0; j <= m_; ++j) x(i++) = c.v1[j];
    for (auto z : c.base_z) x(i++) = z;
    for (auto& [s, t] : c.node_z) {
      x(i++) = s;
      x(i++) = t;
    }
    return x;
  }
  ParamCurve unpack(const VecC& x) const {
    ParamCurve c;
    int i = 0;
    std::vector<Complex> a(3), b(3), p(m_ + 1), q(m_ + 1);
    for (auto& v : a) v = x(i++);
    for (auto& v : b) v = x(i++);
    for (auto& v : p) v = x(i++);
    for (auto& v : q) v = x(i++);
    c.u0 = BinaryForm(a);
    c.u1 = BinaryForm(b);
    c.v0 = BinaryForm(p);
    c.v1 = BinaryForm(q);
    for (int j = 0; j < 2 * m_; ++j) c.base_z.push_back(x(i++));
    for (int j = 0; j < m_ - 1; ++j) {
      Complex s = x(i++), t = x(i++);
      c.node_z.emplace_back(s, t);
    }
    return c;
  }

  int coeff_count() const { return 2 * 3 + 2 * (m_ + 1); }

  VecC residual(const VecC& x) const {
    ParamCurve c = unpack(x);
    VecC r(num_equations());
    int row = 0;
    for (int j = 0; j < 2 * m_; ++j) {
      ProjPoint zp = ProjPoint::affine(c.base_z[j]);
      const SurfacePoint& p = config_->points[j];
      ProjPoint pu = p.u.normalized(), pv = p.v.normalized();
      double sc = std::pow(std::max(1.0, std::abs(c.base_z[j])), 2);
      double scv = std::pow(std::max(1.0, std::abs(c.base_z[j])), m_);
      r(row++) = (c.u0.eval(zp) * pu.z1 - c.u1.eval(zp) * pu.z0) / sc;
      r(row++) = (c.v0.eval(zp) * pv.z1 - c.v1.eval(zp) * pv.z0) / scv;
    }
    for (auto& [s, t] : c.node_z) {
      ProjPoint zs = ProjPoint::affine(s), zt = ProjPoint::affine(t);
      double scu = std::pow(std::max(1.0, std::abs(s)), 2) *
                   std::pow(std::max(1.0, std::abs(t)), 2);
      double scv = std::pow(std::max(1.0, std::abs(s)), m_) *
                   std::pow(std::max(1.0, std::abs(t)), m_);
      r(row++) = (c.u0.eval(zs) * c.u1.eval(zt) - c.u1.eval(zs) * c.u0.eval(zt)) / scu;
      r(row++) = (c.v0.eval(zs) * c.v1.eval(zt) - c.v1.eval(zs) * c.v0.eval(zt)) / scv;
    }
    return r;
  }
  ResidualFn fn() const {
    return [this](const VecC& x) { return residual(x); };
  }

  // The five exact gauge directions at x: three Mobius reparametrizations and
  // the two per-factor scalings.
  MatC gauge_directions(const VecC& x) const {
    ParamCurve c = unpack(x);
    MatC G(num_unknowns(), 5);
    std::vector<Eigen::Matrix2cd> gens(3);
    gens[0] << Complex(0), Complex(1), Complex(0), Complex(0);  // d/dz
    gens[1] << Complex(1), Complex(0), Complex(0), Complex(-1); // z d/dz (sl2)
    gens[2] << Complex(0), Complex(0), Complex(1), Complex(0);  // z^2 d/dz
    for (int g = 0; g < 3; ++g) {
      const auto& A = gens[g];
      // Parameters move by +A; forms by the opposite infinitesimal action.
      BinaryForm du0 = c.u0.sl2_derivative(A) * Complex(-1.0);
      BinaryForm du1 = c.u1.sl2_derivative(A) * Complex(-1.0);
      BinaryForm dv0 = c.v0.sl2_derivative(A) * Complex(-1.0);
      BinaryForm dv1 = c.v1.sl2_derivative(A) * Complex(-1.0);
      VecC col = VecC::Zero(num_unknowns());
      int i = 0;
      for (int j = 0; j <= 2; ++j) col(i++) = du0[j];
      for (int j = 0; j <= 2; ++j) col(i++) = du1[j];
      for (int j = 0; j <= m_; ++j) col(i++) = dv0[j];
      for (int j = 0; j <= m_; ++j) col(i++) = dv1[j];
      auto zdot = [&](Complex z) {
        return A(0, 0) * z + A(0, 1) - z * (A(1, 0) * z + A(1, 1));
      };
      for (auto z : c.base_z) col(i++) = zdot(z);
      for (auto& [s, t] : c.node_z) {
        col(i++) = zdot(s);
        col(i++) = zdot(t);
      }
      G.col(g) = col;
    }
    // Scalings.
    for (int g = 0; g < 2; ++g) {
      VecC col = VecC::Zero(num_unknowns());
      int i = 0;
      if (g == 0) {
        for (int j = 0; j <= 2; ++j) col(i + j) = c.u0[j];
        for (int j = 0; j <= 2; ++j) col(i + 3 + j) = c.u1[j];
      } else {
        i = 6;
        for (int j = 0; j <= m_; ++j) col(i + j) = c.v0[j];
        for (int j = 0; j <= m_; ++j) col(i + m_ + 1 + j) = c.v1[j];
      }
      G.col(3 + g) = col;
    }
    return G;
  }

  // Gauss-Newton polish onto the Severi variety.
  ParamCurve polish(const ParamCurve& c, double tol = 1e-10) const {
    GaussNewtonOptions opt;
    opt.tol = tol;
    auto res = gauss_newton(fn(), pack(c), opt);
    if (!res.converged)
      throw NewtonDivergence("SeveriSystem::polish: residual " +
                             std::to_string(res.residual_norm));
    ParamCurve out = unpack(res.x);
    out.normalize_scale();
    return out;
  }

 private:
  const PointConfig* config_;
  int m_;
};

inline ParamCurve polish_on_severi(const ParamCurve& c,
                                   const PointConfig& config, double tol) {
  return SeveriSystem(config).polish(c, tol);
}

// Residual/jacobian/gauge report for a state (numeric rank bookkeeping used
// by the dimension checks).
struct ConstraintReport {
  double residual_norm = 0.0;
  int jacobian_nullity = 0;   // raw kernel dimension
  int gauge_dimension = 5;
  int tangent_dimension = 0;  // nullity modulo gauge
};

inline ConstraintReport constraint_report(const SeveriSystem& sys,
                                          const ParamCurve& c,
                                          double rank_tol = 1e-5) {
  ConstraintReport rep;
  VecC x = sys.pack(c);
  rep.residual_norm = sys.residual(x).norm();
  MatC J = numeric_jacobian(sys.fn(), x);
  MatC N = nullspace(J, rank_tol);
  rep.jacobian_nullity = static_cast<int>(N.cols());
  MatC G = sys.gauge_directions(x);
  MatC T = project_out(N, G);
  rep.tangent_dimension = static_cast<int>(T.cols());
  return rep;
}

}  // namespace mtw

#endif
