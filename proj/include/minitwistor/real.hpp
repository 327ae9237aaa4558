#ifndef MINITWISTOR_REAL_HPP
#define MINITWISTOR_REAL_HPP

#include <Eigen/Dense>
#include <array>
#include <utility>
#include <vector>

#include "minitwistor/conformal.hpp"
#include "minitwistor/core.hpp"
#include "minitwistor/nodal_curve.hpp"
#include "minitwistor/numeric.hpp"
#include "minitwistor/surface_config.hpp"
#include "minitwistor/trace.hpp"
#include "minitwistor/weyl.hpp"

namespace mtw {

using VecR = Eigen::VectorXd;
using MatR = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// The real structure.  Coordinates on the normalization are pinned so the
// lifted involution is the antipodal map (z0, z1) -> (-conj z1, conj z0);
// the surface involution acts factor-wise:
//   u-factor (degree 2):            (w0, w1) -> ( conj w1, conj w0)
//   v-factor (degree m), m even:    (w0, w1) -> ( conj w1, conj w0)
//   v-factor (degree m), m odd:     (w0, w1) -> (-conj w1, conj w0)
// (An even-degree map from the antipodal line cannot intertwine with a
// fixed-point-free involution on the target, so the u-factor always carries
// the circle-type structure.)

struct RealStructureData {
  Complex h{1.0};            // unit-modulus constant of the bundle lift
  Complex theta_phase{1.0};  // e^{i theta} with e^{2 i theta} = (-1)^m h
  double h_spread = 0.0;     // max deviation between independent h estimates
  std::vector<std::pair<ProjPoint, ProjPoint>> node_pairing;
};

namespace detail {

// conj(F(-conj z1, conj z0)) as a binary form: coefficient i picks up
// (-1)^i conj(F[d - i]).  Applying it twice multiplies by (-1)^deg.
inline BinaryForm sigma_conj(const BinaryForm& f) {
  int d = f.degree();
  std::vector<Complex> out(d + 1);
  for (int i = 0; i <= d; ++i)
    out[i] = ((i % 2) ? -1.0 : 1.0) * std::conj(f[d - i]);
  return BinaryForm(std::move(out));
}

// conj(F(conj w1, conj w0)): plain conjugate-reverse, used for the graph
// curves of the surface configuration (circle-type involution).
inline BinaryForm reverse_conj(const BinaryForm& f) {
  int d = f.degree();
  std::vector<Complex> out(d + 1);
  for (int i = 0; i <= d; ++i) out[i] = std::conj(f[d - i]);
  return BinaryForm(std::move(out));
}

inline Complex antipode_affine(Complex z) { return -1.0 / std::conj(z); }

inline ProjPoint circle_involution(const ProjPoint& p) {
  return {std::conj(p.z1), std::conj(p.z0)};
}

// --- real-arithmetic mirrors of the complex solver utilities ---

using RealFn = std::function<VecR(const VecR&)>;

inline MatR real_jacobian(const RealFn& f, const VecR& x, double h = 1e-5) {
  VecR r0 = f(x);
  MatR J(r0.size(), x.size());
  for (int j = 0; j < x.size(); ++j) {
    VecR xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    J.col(j) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return J;
}

struct RealGNResult {
  VecR x;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

inline RealGNResult real_gauss_newton(const RealFn& f, VecR x,
                                      const GaussNewtonOptions& opt = {}) {
  RealGNResult out;
  out.x = x;
  out.residual_norm = std::numeric_limits<double>::infinity();
  for (int it = 0; it <= opt.max_iters; ++it) {
    VecR r = f(x);
    double rn = r.norm();
    if (rn < out.residual_norm) {
      out.residual_norm = rn;
      out.x = x;
      out.iterations = it;
    }
    if (rn <= opt.tol * opt.scale || it == opt.max_iters) break;
    MatR J = real_jacobian(f, x);
    Eigen::JacobiSVD<MatR> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(opt.svd_threshold);
    VecR dx = -svd.solve(r);
    if (!dx.allFinite() || dx.norm() > opt.max_step) break;
    x += dx;
  }
  out.converged = out.residual_norm <= opt.tol * opt.scale;
  return out;
}

inline MatR real_nullspace(const MatR& J, double rel_threshold = 1e-7) {
  Eigen::JacobiSVD<MatR> svd(J, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  double smax = s.size() ? s(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > rel_threshold * std::max(smax, 1e-300)) ++rank;
  return svd.matrixV().rightCols(J.cols() - rank);
}

inline MatR real_project_out(const MatR& V, const MatR& G, double drop = 1e-4) {
  MatR W = V;
  if (G.cols() > 0) {
    Eigen::HouseholderQR<MatR> qr(G);
    MatR Q = qr.householderQ() * MatR::Identity(G.rows(), G.cols());
    W -= Q * (Q.transpose() * W);
  }
  MatR out(W.rows(), W.cols());
  int kept = 0;
  for (int j = 0; j < W.cols(); ++j) {
    VecR v = W.col(j);
    for (int i = 0; i < kept; ++i) v -= out.col(i).dot(v) * out.col(i);
    if (v.norm() > drop) out.col(kept++) = v / v.norm();
  }
  return out.leftCols(kept);
}

inline VecR realify(const VecC& v) {
  VecR out(2 * v.size());
  for (int i = 0; i < v.size(); ++i) {
    out(2 * i) = v(i).real();
    out(2 * i + 1) = v(i).imag();
  }
  return out;
}

inline VecC complexify(const VecR& v) {
  VecC out(v.size() / 2);
  for (int i = 0; i < out.size(); ++i)
    out(i) = Complex(v(2 * i), v(2 * i + 1));
  return out;
}

}  // namespace detail

// The surface involution, factor-wise per the pinned conventions above.
inline SurfacePoint sigma_surface(const SurfacePoint& p, int m) {
  SurfacePoint out;
  out.u = detail::circle_involution(p.u).normalized();
  if (m % 2 == 0)
    out.v = detail::circle_involution(p.v).normalized();
  else
    out.v = ProjPoint(-std::conj(p.v.z1), std::conj(p.v.z0)).normalized();
  return out;
}

// ---------------------------------------------------------------------------
// Equivariant member model.  Free parameters (as a real vector):
//   u0 coefficients (3 complex), v0 coefficients (m+1 complex),
//   one node preimage per node (m-1 complex), one base preimage per
//   sigma-orbit of blow-up points (m complex).
// The partners are derived: u1 = sigma_conj(u0), v1 = (-1)^m sigma_conj(v0)
// ... with sign +1 for even m and -1 for odd m; node and base partners are
// the antipodal parameters.  Every member assembled this way is exactly
// sigma-invariant, so the incidence system needs rows only for the free half
// of the data.

class RealMemberSystem {
 public:
  explicit RealMemberSystem(const PointConfig& config)
      : config_(&config), sys_(config), m_(config.m) {}

  int m() const { return m_; }
  // complex free parameters: 3 + (m+1) + (m-1) + m = 3m + 3
  int num_params() const { return 2 * (3 * m_ + 3); }
  const SeveriSystem& severi() const { return sys_; }

  ParamCurve assemble(const VecR& p) const {
    VecC c = detail::complexify(p);
    int i = 0;
    std::vector<Complex> a(3), b(m_ + 1);
    for (auto& x : a) x = c(i++);
    for (auto& x : b) x = c(i++);
    ParamCurve out;
    out.u0 = BinaryForm(std::move(a));
    out.u1 = detail::sigma_conj(out.u0);
    out.v0 = BinaryForm(std::move(b));
    out.v1 = detail::sigma_conj(out.v0) * Complex(m_ % 2 ? -1.0 : 1.0);
    for (int nd = 0; nd < m_ - 1; ++nd) {
      Complex s = c(i++);
      out.node_z.emplace_back(s, detail::antipode_affine(s));
    }
    std::vector<Complex> partners;
    for (int j = 0; j < m_; ++j) {
      Complex bz = c(i++);
      out.base_z.push_back(bz);
      partners.push_back(detail::antipode_affine(bz));
    }
    out.base_z.insert(out.base_z.end(), partners.begin(), partners.end());
    return out;
  }

  // Read the free parameters back from an (exactly equivariant) member.
  VecR params_of(const ParamCurve& c) const {
    VecC out(3 * m_ + 3);
    int i = 0;
    for (int j = 0; j <= 2; ++j) out(i++) = c.u0[j];
    for (int j = 0; j <= m_; ++j) out(i++) = c.v0[j];
    for (const auto& [s, t] : c.node_z) out(i++) = s;
    for (int j = 0; j < m_; ++j) out(i++) = c.base_z[j];
    return detail::realify(out);
  }

  VecC state(const VecR& p) const { return sys_.pack(assemble(p)); }

  VecR residual(const VecR& p) const {
    return detail::realify(sys_.residual(state(p)));
  }
  detail::RealFn fn() const {
    return [this](const VecR& p) { return residual(p); };
  }

  // State-space direction of a parameter-space direction (finite difference
  // through the equivariant assembly).
  VecC state_direction(const VecR& p, const VecR& dp, double h = 1e-6) const {
    double n = dp.norm();
    if (n < 1e-300) return VecC::Zero(sys_.num_unknowns());
    return (state(p + (h / n) * dp) - state(p - (h / n) * dp)) /
           (2.0 * h / n) * n;
  }

  // The five real gauge directions in parameter space: su(2) Mobius
  // reparametrizations (the Mobius transformations commuting with the
  // antipodal map) and the two real pair scalings.
  MatR gauge_directions(const VecR& p) const {
    ParamCurve c = assemble(p);
    MatR G(num_params(), 5);
    std::vector<Eigen::Matrix2cd> gens(3);
    gens[0] << Complex(0, 1), Complex(0), Complex(0), Complex(0, -1);
    gens[1] << Complex(0), Complex(1), Complex(-1), Complex(0);
    gens[2] << Complex(0), Complex(0, 1), Complex(0, 1), Complex(0);
    for (int g = 0; g < 3; ++g) {
      const auto& A = gens[g];
      VecC col(3 * m_ + 3);
      int i = 0;
      // Parameters move by +A; forms by the opposite infinitesimal action.
      BinaryForm du0 = c.u0.sl2_derivative(A) * Complex(-1.0);
      BinaryForm dv0 = c.v0.sl2_derivative(A) * Complex(-1.0);
      for (int j = 0; j <= 2; ++j) col(i++) = du0[j];
      for (int j = 0; j <= m_; ++j) col(i++) = dv0[j];
      auto zeta = [&](Complex z) {
        return A(0, 0) * z + A(0, 1) - z * (A(1, 0) * z + A(1, 1));
      };
      for (const auto& [s, t] : c.node_z) col(i++) = zeta(s);
      for (int j = 0; j < m_; ++j) col(i++) = zeta(c.base_z[j]);
      G.col(g) = detail::realify(col);
    }
    for (int g = 0; g < 2; ++g) {
      VecC col = VecC::Zero(3 * m_ + 3);
      if (g == 0)
        for (int j = 0; j <= 2; ++j) col(j) = c.u0[j];
      else
        for (int j = 0; j <= m_; ++j) col(3 + j) = c.v0[j];
      G.col(3 + g) = detail::realify(col);
    }
    return G;
  }

  // Real tangent space of the real Severi slice modulo gauge (dimension 3).
  MatR tangent_space(const VecR& p, double rank_tol = 1e-5) const {
    MatR J = detail::real_jacobian(fn(), p);
    MatR N = detail::real_nullspace(J, rank_tol);
    return detail::real_project_out(N, gauge_directions(p));
  }

 private:
  const PointConfig* config_;
  SeveriSystem sys_;
  int m_;
};

// ---------------------------------------------------------------------------
// Reality conditions 1-3 for a member presented in pinned coordinates.

struct RealityReport {
  bool invariant = false;              // condition 1: sigma(C) = C
  bool branch_exchange = false;        // condition 2: nodes antipodally paired
  bool no_offnode_real_points = false; // condition 3
  double equivariance_residual = 0.0;
  double node_pairing_residual = 0.0;
  double min_offnode_real_distance = 0.0;
  bool all() const {
    return invariant && branch_exchange && no_offnode_real_points;
  }
};

inline RealityReport reality_check(const ParamCurve& c, double tol = 1e-6) {
  RealityReport rep;
  int m = c.m();
  // 1: the parametrized image is sigma-invariant; in pinned coordinates this
  // is equivariance phi(antipode z) = sigma(phi(z)).
  Rng rng(913);
  double worst = 0.0;
  std::vector<Complex> samples;
  for (int i = 0; i < 24; ++i) samples.push_back(rng.complex(1.3));
  for (Complex z : samples) {
    SurfacePoint a = c.at(ProjPoint::affine(z).antipode());
    SurfacePoint b = sigma_surface(c.at(z), m);
    worst = std::max(worst, surface_distance(a, b));
  }
  rep.equivariance_residual = worst;
  rep.invariant = worst < tol;
  // 2: node preimage pairs are antipodal (sigma exchanges the two branches).
  double pworst = 0.0;
  for (const auto& [s, t] : c.node_z)
    pworst = std::max(pworst,
                      proj_distance(ProjPoint::affine(s).antipode(),
                                    ProjPoint::affine(t)));
  rep.node_pairing_residual = pworst;
  rep.branch_exchange = !c.node_z.empty() ? pworst < tol : true;
  // 3: real points of sigma|_C are exactly the nodes: phi(z) meets
  // sigma(phi(z)) = phi(antipode z) only when z is a node preimage.
  double dmin = 1e300;
  for (int i = 0; i < 160; ++i) {
    Complex z = rng.complex(1.5);
    double dnode = 1e300;
    for (const auto& [s, t] : c.node_z) {
      dnode = std::min(dnode, proj_distance(ProjPoint::affine(z),
                                            ProjPoint::affine(s)));
      dnode = std::min(dnode, proj_distance(ProjPoint::affine(z),
                                            ProjPoint::affine(t)));
    }
    if (dnode < 0.15) continue;
    dmin = std::min(dmin, surface_distance(c.at(z), sigma_surface(c.at(z), m)));
  }
  rep.min_offnode_real_distance = dmin;
  rep.no_offnode_real_points = dmin > 10.0 * tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Real tangent coordinates.  On the sigma-fixed subspace,
//   a = e^{i theta}/2 (x2 + i x3),  b = e^{i theta} x1,
//   c = e^{i theta}/2 (-x2 + i x3),
// and the discriminant restricts to e^{2 i theta} (x1^2 + x2^2 + x3^2).

inline Eigen::Vector3d real_coordinates(const QuadraticClass& q,
                                        const RealStructureData& data,
                                        double tol = 1e-6) {
  Complex ph = data.theta_phase;
  Complex b = q.b / ph, a = q.a / ph, cc = q.c / ph;
  double scale = std::max(q.max_abs(), 1e-300);
  double resid = std::max(std::abs(b.imag()), std::abs(a + std::conj(cc)));
  if (resid > tol * scale)
    throw NotInRealSubspace("real_coordinates: fixed-point residual " +
                            std::to_string(resid / scale));
  Eigen::Vector3d x;
  x(0) = b.real();
  x(1) = 2.0 * a.real();
  x(2) = 2.0 * a.imag();
  return x;
}

inline QuadraticClass from_real_coordinates(const Eigen::Vector3d& x,
                                            const RealStructureData& data) {
  Complex ph = data.theta_phase;
  return QuadraticClass(ph * 0.5 * Complex(x(1), x(2)), ph * x(0),
                        ph * 0.5 * Complex(-x(1), x(2)));
}

// ---------------------------------------------------------------------------
// The real structure constants of a member: h from the sigma-fixedness of
// tangent thetas (several independent component estimates must agree).

inline RealStructureData real_structure_of(const PointConfig& config,
                                           const ParamCurve& curve) {
  RealMemberSystem rs(config);
  int m = config.m;
  VecR p = rs.params_of(curve);
  MatR T = rs.tangent_space(p);
  if (T.cols() < 1)
    throw RankDrop("real_structure_of: no real tangent directions");
  double sign = (m % 2 == 0) ? 1.0 : -1.0;
  std::vector<Complex> estimates;
  for (int r = 0; r < T.cols(); ++r) {
    VecC delta = rs.state_direction(p, T.col(r));
    QuadraticClass th =
        make_tangent(rs.severi(), curve, delta, 1e-4).theta;
    double s = th.max_abs();
    // b = (-1)^m h conj(b);  a = (-1)^{m-1} h conj(c);  c = (-1)^{m-1} h conj(a)
    if (std::abs(th.b) > 0.2 * s)
      estimates.push_back(sign * th.b / std::conj(th.b));
    if (std::abs(th.a) > 0.2 * s && std::abs(th.c) > 0.2 * s) {
      estimates.push_back(-sign * th.a / std::conj(th.c));
      estimates.push_back(-sign * th.c / std::conj(th.a));
    }
  }
  if (estimates.size() < 2)
    throw NumericError("real_structure_of: too few usable h estimates");
  Complex h(0.0);
  for (auto e : estimates) h += e / std::abs(e);
  h /= std::abs(h);
  RealStructureData data;
  data.h = h;
  for (auto e : estimates)
    data.h_spread = std::max(data.h_spread, std::abs(e / std::abs(e) - h));
  Complex e2 = sign * h;  // e^{2 i theta} = (-1)^m h
  data.theta_phase = std::exp(Complex(0.0, std::arg(e2) / 2.0));
  for (const auto& [s, t] : curve.node_z)
    data.node_pairing.emplace_back(ProjPoint::affine(s).normalized(),
                                   ProjPoint::affine(t).normalized());
  return data;
}

// ---------------------------------------------------------------------------
// The real metric: the complex gram of a real tangent basis with the
// e^{2 i theta} phase removed, positive definite after the global sign choice.

inline Eigen::Matrix3d real_metric_at(const PointConfig& config,
                                      const ParamCurve& curve,
                                      const RealStructureData& data,
                                      double tol = 1e-6) {
  if (!reality_check(curve).all())
    throw IndefiniteRealMetric("real_metric_at: member fails reality check");
  RealMemberSystem rs(config);
  VecR p = rs.params_of(curve);
  MatR T = rs.tangent_space(p);
  if (T.cols() != 3)
    throw RankDrop("real_metric_at: real tangent dimension " +
                   std::to_string(T.cols()));
  std::vector<QuadraticClass> th;
  for (int r = 0; r < 3; ++r) {
    VecC delta = rs.state_direction(p, T.col(r));
    th.push_back(make_tangent(rs.severi(), curve, delta, 1e-4).theta);
  }
  Complex ph2 = data.theta_phase * data.theta_phase;
  Eigen::Matrix3cd G;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      G(i, j) = disc_pairing(th[i], th[j]) / ph2;
  double gs = G.cwiseAbs().maxCoeff();
  if (G.imag().cwiseAbs().maxCoeff() > tol * gs)
    throw IndefiniteRealMetric("real_metric_at: gram not real after dephasing");
  Eigen::Matrix3d M = G.real();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(M);
  if (es.eigenvalues()(2) < 0) M = -M;  // documented global sign choice
  es.compute(M);
  if (es.eigenvalues()(0) <= 0)
    throw IndefiniteRealMetric("real_metric_at: indefinite restriction");
  return M;
}

// ---------------------------------------------------------------------------
// Construction of real members.  Only even m admits a sigma-compatible split
// configuration: the involution must swap the two graph curves (which needs
// equal bidegrees, k = m/2), since a (k,1) graph curve can never be invariant
// under the fixed-point-free pairing of factor involutions.

struct RealMember {
  PointConfig config;
  ParamCurve curve;
  RealStructureData data;
};

inline RealMember construct_real_member(int m, std::uint64_t seed,
                                        int attempts = 40) {
  if (m < 2) throw std::invalid_argument("construct_real_member: m >= 2");
  if (m % 2 != 0)
    throw NoRealSolutionFound(
        "construct_real_member: no sigma-compatible split configuration "
        "exists for odd m (graph-curve factors cannot swap)");
  int k = m / 2;
  Rng rng(seed);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    // Stage 1: an equivariant curve with the required nodes (no surface yet).
    int nfree = 3 + (m + 1) + (m - 1);  // u0, v0, node seeds (complex)
    VecC c0(nfree);
    for (int i = 0; i < 3 + m + 1; ++i) c0(i) = rng.complex(1.0);
    for (int i = 0; i < m - 1; ++i)
      c0(3 + m + 1 + i) = rng.complex(0.6) + Complex(0.4, 0.3);
    auto assemble_partial = [&](const VecR& pr) {
      VecC cc = detail::complexify(pr);
      std::vector<Complex> a(3), b(m + 1);
      int i = 0;
      for (auto& x : a) x = cc(i++);
      for (auto& x : b) x = cc(i++);
      ParamCurve pc;
      pc.u0 = BinaryForm(std::move(a));
      pc.u1 = detail::sigma_conj(pc.u0);
      pc.v0 = BinaryForm(std::move(b));
      pc.v1 = detail::sigma_conj(pc.v0) * Complex(m % 2 ? -1.0 : 1.0);
      for (int nd = 0; nd < m - 1; ++nd) {
        Complex s = cc(i++);
        pc.node_z.emplace_back(s, detail::antipode_affine(s));
      }
      return pc;
    };
    detail::RealFn node_fn = [&](const VecR& pr) {
      ParamCurve pc = assemble_partial(pr);
      VecC r(2 * (m - 1));
      int row = 0;
      for (const auto& [s, t] : pc.node_z) {
        ProjPoint zs = ProjPoint::affine(s), zt = ProjPoint::affine(t);
        double su = std::pow(std::max(1.0, std::abs(s)), 2) *
                    std::pow(std::max(1.0, std::abs(t)), 2);
        double sv = std::pow(std::max(1.0, std::abs(s)), m) *
                    std::pow(std::max(1.0, std::abs(t)), m);
        r(row++) = (pc.u0.eval(zs) * pc.u1.eval(zt) -
                    pc.u1.eval(zs) * pc.u0.eval(zt)) /
                   su;
        r(row++) = (pc.v0.eval(zs) * pc.v1.eval(zt) -
                    pc.v1.eval(zs) * pc.v0.eval(zt)) /
                   sv;
      }
      return detail::realify(r);
    };
    GaussNewtonOptions nopt;
    nopt.tol = 1e-12;
    auto nres = detail::real_gauss_newton(node_fn, detail::realify(c0), nopt);
    if (!nres.converged) continue;
    ParamCurve pc = assemble_partial(nres.x);
    // Node parameters must stay in the moderate annulus (their antipodal
    // partners are finite) and separated.
    bool ok = true;
    std::vector<Complex> zs;
    for (const auto& [s, t] : pc.node_z) {
      if (std::abs(s) < 0.15 || std::abs(s) > 6.0) ok = false;
      zs.push_back(s);
      zs.push_back(t);
    }
    for (size_t i = 0; i < zs.size() && ok; ++i)
      for (size_t j = i + 1; j < zs.size(); ++j)
        if (proj_distance(ProjPoint::affine(zs[i]),
                          ProjPoint::affine(zs[j])) < 1e-3)
          ok = false;
    if (!ok) continue;

    // Stage 2: pick base preimages, read off the blow-up points, and build a
    // swapped pair of graph curves through them.
    for (int btry = 0; btry < 8; ++btry) {
      std::vector<Complex> bs;
      bool bok = true;
      for (int j = 0; j < m; ++j) {
        Complex b = rng.complex(0.9) + Complex(0.25, -0.2);
        if (std::abs(b) < 0.15 || std::abs(b) > 6.0) bok = false;
        bs.push_back(b);
      }
      if (!bok) continue;
      std::vector<Complex> allz = zs;
      for (Complex b : bs) {
        allz.push_back(b);
        allz.push_back(detail::antipode_affine(b));
      }
      for (size_t i = 0; i < allz.size() && bok; ++i)
        for (size_t j = i + 1; j < allz.size(); ++j)
          if (proj_distance(ProjPoint::affine(allz[i]),
                            ProjPoint::affine(allz[j])) < 5e-2)
            bok = false;
      if (!bok) continue;
      std::vector<SurfacePoint> pts;
      for (Complex b : bs) pts.push_back(pc.at(b));
      // (k,1) graph curve through the m = 2k free points: nullspace of the
      // linear incidence conditions on (P, Q).
      MatC A = MatC::Zero(m, 2 * (k + 1));
      for (int r = 0; r < m; ++r) {
        ProjPoint w = pts[r].u.normalized(), v = pts[r].v.normalized();
        for (int i = 0; i <= k; ++i) {
          Complex mono = std::pow(w.z0, k - i) * std::pow(w.z1, i);
          A(r, i) = -v.z1 * mono;          // P coefficients
          A(r, k + 1 + i) = v.z0 * mono;   // Q coefficients
        }
      }
      MatC N = nullspace(A, 1e-9);
      if (N.cols() < 1) continue;
      VecC combo = VecC::Zero(N.cols());
      for (int i = 0; i < N.cols(); ++i) combo(i) = rng.complex(1.0);
      VecC pq = N * combo;
      std::vector<Complex> P(k + 1), Q(k + 1);
      for (int i = 0; i <= k; ++i) {
        P[i] = pq(i);
        Q[i] = pq(k + 1 + i);
      }
      PointConfig cfg;
      cfg.m = m;
      cfg.k = k;
      cfg.seed = seed;
      cfg.curves.d1.num = BinaryForm(P);
      cfg.curves.d1.den = BinaryForm(Q);
      cfg.curves.d2.num = detail::reverse_conj(cfg.curves.d1.den);
      cfg.curves.d2.den = detail::reverse_conj(cfg.curves.d1.num);
      cfg.curves.c = Complex(1.0);
      for (const auto& q : pts) {
        cfg.points.push_back(q);
        cfg.assignment.push_back(1);
      }
      for (const auto& q : pts) {
        cfg.points.push_back(sigma_surface(q, m));
        cfg.assignment.push_back(2);
      }
      try {
        cfg.validate();
      } catch (const NumericError&) {
        continue;
      }
      // Stage 3: polish the full equivariant incidence system.
      ParamCurve full = pc;
      full.base_z = bs;
      std::vector<Complex> partners;
      for (Complex b : bs) partners.push_back(detail::antipode_affine(b));
      full.base_z.insert(full.base_z.end(), partners.begin(), partners.end());
      RealMemberSystem rs(cfg);
      GaussNewtonOptions popt;
      popt.tol = 1e-12;
      popt.scale = std::max(full.coeff_scale(), 1.0);
      auto pres =
          detail::real_gauss_newton(rs.fn(), rs.params_of(full), popt);
      if (!pres.converged) continue;
      ParamCurve curve = rs.assemble(pres.x);
      auto rep = reality_check(curve);
      if (!rep.all()) continue;
      RealMember out;
      out.config = std::move(cfg);
      out.curve = std::move(curve);
      out.data = real_structure_of(out.config, out.curve);
      return out;
    }
  }
  throw NoRealSolutionFound("construct_real_member: all seeds exhausted");
}

// ---------------------------------------------------------------------------
// Real geodesics: the sigma-fixed slice of W_{p, sigma(p)} (generic p), or of
// the pinned-node family W_p^1 when p is the (sigma-fixed) node image.
// Real-arithmetic pseudo-arclength continuation on the equivariant model;
// every state is equivariant by construction.

inline TraceResult real_geodesic(const PointConfig& config,
                                 const ParamCurve& curve,
                                 const SurfacePoint& p, int steps, double h,
                                 double max_step = 0.0,
                                 const MatR* gauge_pin = nullptr,
                                 const VecR* gauge_pin_ref = nullptr) {
  if (max_step <= 0.0) max_step = 4.0 * h;
  RealMemberSystem rs(config);
  int m = config.m;
  // Classify: node case iff p matches a node image.
  int node_index = -1;
  for (size_t i = 0; i < curve.node_z.size(); ++i)
    if (surface_distance(curve.at(curve.node_z[i].first), p) < 1e-6)
      node_index = static_cast<int>(i);
  std::vector<Complex> aux0;
  if (node_index < 0) {
    auto cand = preimage_candidates(curve, p);
    if (cand.empty() || cand[0].v_residual > 1e-4)
      throw std::invalid_argument("real_geodesic: member misses the point");
    aux0.push_back(cand[0].z);
  }
  int np = rs.num_params();
  int na = node_index < 0 ? 2 : 0;  // aux z_p as two reals
  ProjPoint pu = p.u.normalized(), pv = p.v.normalized();
  auto fn = [&](const VecR& x) {
    VecR base = rs.residual(x.head(np));
    ParamCurve c = rs.assemble(x.head(np));
    Complex z = node_index < 0 ? Complex(x(np), x(np + 1))
                               : c.node_z[node_index].first;
    ProjPoint zp = ProjPoint::affine(z);
    double su = std::pow(std::max(1.0, std::abs(z)), 2);
    double sv = std::pow(std::max(1.0, std::abs(z)), m);
    VecC inc(2);
    inc(0) = (c.u0.eval(zp) * pu.z1 - c.u1.eval(zp) * pu.z0) / su;
    inc(1) = (c.v0.eval(zp) * pv.z1 - c.v1.eval(zp) * pv.z0) / sv;
    if (gauge_pin) {
      VecR out(base.size() + 4 + gauge_pin->cols());
      out << base, detail::realify(inc),
          gauge_pin->transpose() * (x.head(np) - *gauge_pin_ref);
      return out;
    }
    VecR out(base.size() + 4);
    out << base, detail::realify(inc);
    return out;
  };
  auto gauge = [&](const VecR& x) {
    MatR Gp = rs.gauge_directions(x.head(np));
    MatR G = MatR::Zero(np + na, 5);
    G.topRows(np) = Gp;
    if (na == 2) {
      std::vector<Eigen::Matrix2cd> gens(3);
      gens[0] << Complex(0, 1), Complex(0), Complex(0), Complex(0, -1);
      gens[1] << Complex(0), Complex(1), Complex(-1), Complex(0);
      gens[2] << Complex(0), Complex(0, 1), Complex(0, 1), Complex(0);
      Complex z(x(np), x(np + 1));
      for (int g = 0; g < 3; ++g) {
        const auto& A = gens[g];
        Complex zeta = A(0, 0) * z + A(0, 1) - z * (A(1, 0) * z + A(1, 1));
        G(np, g) = zeta.real();
        G(np + 1, g) = zeta.imag();
      }
    }
    return G;
  };

  VecR x(np + na);
  x.head(np) = rs.params_of(curve);
  if (na == 2) {
    x(np) = aux0[0].real();
    x(np + 1) = aux0[0].imag();
  }
  GaussNewtonOptions opt;
  opt.tol = 1e-12;
  {
    auto res = detail::real_gauss_newton(fn, x, opt);
    if (!res.converged)
      throw StepFailure("real_geodesic: start state infeasible");
    x = res.x;
  }
  TraceResult out;
  VecR t_prev;
  double arc = 0.0, step = h;
  for (int kstep = 0; kstep <= steps; ++kstep) {
    ParamCurve c = rs.assemble(x.head(np));
    std::vector<Complex> aux;
    if (na == 2) aux.push_back(Complex(x(np), x(np + 1)));

    MatR J = detail::real_jacobian(fn, x);
    MatR N = detail::real_nullspace(J, 1e-5);
    MatR T = gauge_pin ? N : detail::real_project_out(N, gauge(x));
    if (T.cols() != 1)
      throw RankDrop("real_geodesic: tangent dimension " +
                     std::to_string(T.cols()));
    VecR t = T.col(0);
    if (t_prev.size() > 0) {
      double ip = t_prev.dot(t);
      if (std::abs(ip) < 0.3)
        throw RankDrop("real_geodesic: tangent discontinuity");
      if (ip < 0) t = -t;
    } else {
      int imax = 0;
      for (int i = 1; i < t.size(); ++i)
        if (std::abs(t(i)) > std::abs(t(imax))) imax = i;
      if (t(imax) < 0) t = -t;
    }

    StepDiagnostics diag;
    diag.arc_param = arc;
    diag.step = step;
    diag.min_preimage_separation = detail::min_preimage_separation(c, aux);
    out.states.push_back(c);
    out.aux.push_back(aux);
    out.arc_params.push_back(arc);
    out.diagnostics.push_back(diag);
    if (diag.min_preimage_separation < 1e-4) {
      out.hit_branch_point = true;
      break;
    }
    if (kstep == steps) break;

    bool advanced = false;
    for (int retry = 0; retry < 10; ++retry) {
      auto res = detail::real_gauss_newton(fn, x + step * t, opt);
      if (res.converged) {
        VecR moved = res.x - x;
        if (std::abs(t.dot(moved)) < 0.3 * step) {
          step *= 0.5;
          continue;
        }
        x = res.x;
        arc += step;
        out.diagnostics.back().newton_iterations = res.iterations;
        if (res.iterations <= 2)
          step = std::min(step * 1.3, max_step);
        else if (res.iterations > 6)
          step *= 0.5;
        advanced = true;
        break;
      }
      step *= 0.5;
    }
    if (!advanced)
      throw StepFailure("real_geodesic: corrector failed at all steps");
    t_prev = t;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Real-slice chart and Einstein-Weyl fit.  A chart on the 3-dimensional real
// slice: coordinates along three gauge-orthogonal real tangent directions,
// with the full kernel pinned so the chart map is smooth and unique and
// gauge-pinned geodesic traces land exactly on chart images.  The sampled
// gram fields are dephased by e^{2 i theta} (recovered smoothly from the
// frame discriminants), so the fitted metric, connection, and Weyl one-form
// should come out real on the slice -- their imaginary parts measure the
// reality of the induced structure.

struct RealChartFrame {
  const PointConfig* config = nullptr;
  ParamCurve base;
  VecR p0;
  MatR kernel;  // full jacobian kernel at the base (dimension 8)
  MatR dirs;    // 3 orthonormal chart directions, gauge-orthogonal
  MatR gauge;   // orthonormalized gauge directions at the base (5)
};

inline RealChartFrame build_real_chart(const PointConfig& config,
                                       const ParamCurve& curve) {
  RealChartFrame chart;
  chart.config = &config;
  chart.base = curve;
  RealMemberSystem rs(config);
  chart.p0 = rs.params_of(curve);
  MatR J = detail::real_jacobian(rs.fn(), chart.p0);
  chart.kernel = detail::real_nullspace(J, 1e-5);
  MatR G = rs.gauge_directions(chart.p0);
  Eigen::HouseholderQR<MatR> qr(G);
  chart.gauge = qr.householderQ() * MatR::Identity(G.rows(), G.cols());
  chart.dirs = detail::real_project_out(chart.kernel, chart.gauge);
  if (chart.dirs.cols() != 3)
    throw RankDrop("build_real_chart: real tangent dimension " +
                   std::to_string(chart.dirs.cols()));
  return chart;
}

inline VecR real_chart_params(const RealChartFrame& chart,
                              const Eigen::Vector3d& y) {
  RealMemberSystem rs(*chart.config);
  VecR lin = chart.p0 + chart.dirs * y;
  detail::RealFn fn = [&](const VecR& p) {
    VecR base = rs.residual(p);
    VecR out(base.size() + chart.kernel.cols());
    out << base, chart.kernel.transpose() * (p - lin);
    return out;
  };
  GaussNewtonOptions opt;
  opt.tol = 1e-12;
  auto res = detail::real_gauss_newton(fn, lin, opt);
  if (!res.converged)
    throw ProjectionFailure("real_chart_params: corrector failed");
  return res.x;
}

inline Eigen::Vector3d real_params_to_chart(const RealChartFrame& chart,
                                            const VecR& p, double tol = 1e-10) {
  Eigen::Vector3d y = chart.dirs.transpose() * (p - chart.p0);
  for (int it = 0; it < 12; ++it) {
    VecR diff = p - real_chart_params(chart, y);
    Eigen::Vector3d dy = chart.dirs.transpose() * diff;
    y += dy;
    if (dy.norm() <= tol * std::max(1.0, y.norm())) return y;
  }
  throw ProjectionFailure("real_params_to_chart: no convergence");
}

// Dephased gram of the chart frame at chart coordinate y.  The frame is the
// implicit-differentiation solution of the pinned system; the phase
// e^{2 i theta} is recovered from the frame discriminants (positive real
// weights), so it varies smoothly over the chart.
inline Mat3 real_chart_gram(const RealChartFrame& chart,
                            const Eigen::Vector3d& y,
                            double* im_residual = nullptr) {
  RealMemberSystem rs(*chart.config);
  VecR p = real_chart_params(chart, y);
  ParamCurve c = rs.assemble(p);
  MatR J = detail::real_jacobian(rs.fn(), p);
  MatR Jaug(J.rows() + chart.kernel.cols(), J.cols());
  Jaug << J, chart.kernel.transpose();
  auto qr = Jaug.colPivHouseholderQr();
  std::array<QuadraticClass, 3> th;
  for (int i = 0; i < 3; ++i) {
    VecR rhs = VecR::Zero(Jaug.rows());
    rhs.tail(chart.kernel.cols()) =
        chart.kernel.transpose() * chart.dirs.col(i);
    VecR ds = qr.solve(rhs);
    th[i] = make_tangent(rs.severi(), c, rs.state_direction(p, ds), 1e-4).theta;
  }
  Mat3 G;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) G(i, j) = disc_pairing(th[i], th[j]);
  Complex e2 = G.trace();  // sum of frame discriminants = e^{2 i theta} |x|^2
  e2 /= std::abs(e2);
  G /= e2;
  if (im_residual)
    *im_residual = G.imag().cwiseAbs().maxCoeff() /
                   std::max(G.cwiseAbs().maxCoeff(), 1e-300);
  return G;
}

struct RealEWReport {
  SurrogateModel model;
  double gram_im_residual = 0.0;      // dephased gram samples
  double geodesic_fit_residual = 0.0;
  double max_im_connection = 0.0;     // Im Gamma on the real slice, relative
  double max_im_one_form = 0.0;       // Im a on the real slice, relative
};

inline RealEWReport real_ew_fit(const PointConfig& config,
                                const ParamCurve& curve,
                                const EWPipelineOptions& opt = {}) {
  auto chart = build_real_chart(config, curve);
  RealMemberSystem rs(config);
  double r = opt.domain_radius;
  Rng rng(opt.seed);
  RealEWReport rep;

  // Metric fit over real sample coordinates.
  int ns = std::max(opt.metric_samples / 2, 80);
  std::vector<Vec3> ys;
  std::vector<Mat3> grams;
  for (int s = 0; s < ns; ++s) {
    Eigen::Vector3d y;
    for (int k = 0; k < 3; ++k) y(k) = rng.uniform(-0.7, 0.7);
    double im = 0.0;
    grams.push_back(real_chart_gram(chart, r * y, &im));
    rep.gram_im_residual = std::max(rep.gram_im_residual, im);
    ys.push_back(y.cast<Complex>());
  }
  rep.model = fit_metric_samples(ys, grams, r);

  // Geodesic samples from gauge-pinned fixed-step real traces.
  double h = r / 10.0;
  std::vector<GeodesicSample> samples;
  for (int g = 0; g < opt.geodesic_count; ++g) {
    SurfacePoint p = curve.at(rng.complex(0.9));
    TraceResult tr;
    try {
      tr = real_geodesic(config, curve, p, opt.trace_steps, h, h, &chart.gauge,
                         &chart.p0);
    } catch (const NumericError&) {
      continue;
    }
    std::vector<Eigen::Vector3d> yt;
    for (const auto& c : tr.states)
      yt.push_back(real_params_to_chart(chart, rs.params_of(c)) / r);
    for (size_t k = 2; k + 2 < yt.size(); ++k) {
      if (yt[k].norm() > 1.0) continue;
      double span = tr.arc_params[k + 2] - tr.arc_params[k - 2];
      if (!(span > 0)) continue;
      Eigen::Matrix<double, 5, 5> V;
      for (int row = 0; row < 5; ++row) {
        double t = (tr.arc_params[k - 2 + row] - tr.arc_params[k]) / span;
        double pw = 1.0;
        for (int col = 0; col < 5; ++col, pw *= t) V(row, col) = pw;
      }
      auto lu = V.partialPivLu();
      GeodesicSample smp;
      smp.y = yt[k].cast<Complex>();
      for (int c = 0; c < 3; ++c) {
        Eigen::Matrix<double, 5, 1> vals;
        for (int row = 0; row < 5; ++row) vals(row) = yt[k - 2 + row](c);
        Eigen::Matrix<double, 5, 1> cf = lu.solve(vals);
        smp.T(c) = cf(1) / span;
        smp.Acc(c) = 2.0 * cf(2) / (span * span);
      }
      samples.push_back(smp);
    }
  }
  fit_weyl_form(rep.model, samples);
  rep.geodesic_fit_residual = geodesic_equation_residual(rep.model, samples);

  // Reality of the fitted structure on the slice.
  detail::ModelDerivs md(rep.model);
  double gscale = 0.0, ascale = 0.0, gim = 0.0, aim = 0.0;
  for (int s = 0; s < 40; ++s) {
    Eigen::Vector3d y;
    for (int k = 0; k < 3; ++k) y(k) = rng.uniform(-0.8, 0.8);
    auto cp = detail::connection_at(md, y.cast<Complex>());
    for (int k = 0; k < 3; ++k) {
      gscale = std::max(gscale, cp.Gamma[k].cwiseAbs().maxCoeff());
      gim = std::max(gim, cp.Gamma[k].imag().cwiseAbs().maxCoeff());
    }
    ascale = std::max(ascale, cp.A.cwiseAbs().maxCoeff());
    aim = std::max(aim, cp.A.imag().cwiseAbs().maxCoeff());
  }
  rep.max_im_connection = gim / std::max(gscale, 1e-300);
  rep.max_im_one_form = aim / std::max(std::max(ascale, gscale), 1e-300);
  return rep;
}

}  // namespace mtw

#endif
