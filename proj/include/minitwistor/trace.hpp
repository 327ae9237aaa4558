#ifndef MINITWISTOR_TRACE_HPP
#define MINITWISTOR_TRACE_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "minitwistor/conformal.hpp"
#include "minitwistor/core.hpp"
#include "minitwistor/nodal_curve.hpp"
#include "minitwistor/numeric.hpp"

namespace mtw {

// ---------------------------------------------------------------------------
// Incidence constraints layered on top of the Severi incidence system.
// Each constraint may carry auxiliary unknowns (tracked curve parameters).

struct IncidenceConstraint {
  enum class Kind { ThroughPoint, NodeAt, TangentAt };
  Kind kind = Kind::ThroughPoint;
  SurfacePoint p;
  int node_index = -1;  // NodeAt: which tracked node pair is pinned to p
  Complex dir_u, dir_v; // TangentAt: affine tangent direction of S at p

  static IncidenceConstraint through_point(const SurfacePoint& p) {
    IncidenceConstraint c;
    c.kind = Kind::ThroughPoint;
    c.p = p;
    return c;
  }
  static IncidenceConstraint node_at(const SurfacePoint& p, int node_index) {
    IncidenceConstraint c;
    c.kind = Kind::NodeAt;
    c.p = p;
    c.node_index = node_index;
    return c;
  }
  static IncidenceConstraint tangent_at(const SurfacePoint& p, Complex du,
                                        Complex dv) {
    IncidenceConstraint c;
    c.kind = Kind::TangentAt;
    c.p = p;
    c.dir_u = du;
    c.dir_v = dv;
    return c;
  }

  int rows() const {
    switch (kind) {
      case Kind::ThroughPoint: return 2;
      case Kind::NodeAt: return 4;
      case Kind::TangentAt: return 3;
    }
    return 0;
  }
  int aux_unknowns() const { return kind == Kind::NodeAt ? 0 : 1; }
  int codimension() const { return kind == Kind::ThroughPoint ? 1 : 2; }
};

// Severi system augmented by incidence constraints.  Unknown layout:
// [base unknowns | aux parameters in constraint order].
class ConstrainedSystem {
 public:
  ConstrainedSystem(const SeveriSystem& base,
                    std::vector<IncidenceConstraint> cons)
      : base_(base), cons_(std::move(cons)) {
    aux_count_ = 0;
    codim_ = 0;
    for (const auto& c : cons_) {
      aux_count_ += c.aux_unknowns();
      codim_ += c.codimension();
    }
  }

  const SeveriSystem& base() const { return base_; }
  const std::vector<IncidenceConstraint>& constraints() const { return cons_; }
  int num_unknowns() const { return base_.num_unknowns() + aux_count_; }
  int aux_count() const { return aux_count_; }
  int expected_dimension() const { return 3 - codim_; }

  VecC pack(const ParamCurve& c, const std::vector<Complex>& aux) const {
    VecC xb = base_.pack(c);
    VecC x(num_unknowns());
    x.head(xb.size()) = xb;
    for (int i = 0; i < aux_count_; ++i) x(xb.size() + i) = aux.at(i);
    return x;
  }
  ParamCurve unpack(const VecC& x) const {
    return base_.unpack(x.head(base_.num_unknowns()));
  }
  std::vector<Complex> unpack_aux(const VecC& x) const {
    std::vector<Complex> aux(aux_count_);
    for (int i = 0; i < aux_count_; ++i)
      aux[i] = x(base_.num_unknowns() + i);
    return aux;
  }

  // Pin the gauge to a fixed linear slice through a reference state:
  // appended residual rows P^H (state - ref) for an orthonormal basis P of
  // the gauge directions there.  Keeps traced states directly comparable to
  // a chart based at the reference (no gauge drift along the path).
  void pin_gauge(const MatC& gauge_basis, const VecC& ref) {
    Eigen::HouseholderQR<MatC> qr(gauge_basis);
    pin_ = (qr.householderQ() *
            MatC::Identity(gauge_basis.rows(), gauge_basis.cols()))
               .adjoint();
    pin_ref_ = ref;
  }
  bool gauge_pinned() const { return pin_.rows() > 0; }

  VecC residual(const VecC& x) const {
    ParamCurve c = unpack(x);
    VecC rb = base_.residual(x.head(base_.num_unknowns()));
    int extra = 0;
    for (const auto& con : cons_) extra += con.rows();
    extra += static_cast<int>(pin_.rows());
    VecC r(rb.size() + extra);
    r.head(rb.size()) = rb;
    if (pin_.rows() > 0)
      r.segment(rb.size() + extra - pin_.rows(), pin_.rows()) =
          pin_ * (x.head(base_.num_unknowns()) - pin_ref_);
    int row = static_cast<int>(rb.size());
    int ai = base_.num_unknowns();
    const int m = base_.m();
    auto incidence = [&](Complex z, const SurfacePoint& p) {
      ProjPoint zp = ProjPoint::affine(z);
      ProjPoint pu = p.u.normalized(), pv = p.v.normalized();
      double s = std::max(1.0, std::abs(z));
      r(row++) = (c.u0.eval(zp) * pu.z1 - c.u1.eval(zp) * pu.z0) / std::pow(s, 2);
      r(row++) = (c.v0.eval(zp) * pv.z1 - c.v1.eval(zp) * pv.z0) / std::pow(s, m);
    };
    for (const auto& con : cons_) {
      switch (con.kind) {
        case IncidenceConstraint::Kind::ThroughPoint:
          incidence(x(ai++), con.p);
          break;
        case IncidenceConstraint::Kind::NodeAt: {
          auto [s, t] = c.node_z.at(con.node_index);
          incidence(s, con.p);
          incidence(t, con.p);
          break;
        }
        case IncidenceConstraint::Kind::TangentAt: {
          Complex z = x(ai++);
          incidence(z, con.p);
          // Image tangent (u', v') at z parallel to (dir_u, dir_v), with
          // u' = W_u/u1^2, v' = W_v/v1^2 cleared of denominators.
          ProjPoint zp = ProjPoint::affine(z);
          BinaryForm wu = wronskian(c.u0, c.u1);
          BinaryForm wv = wronskian(c.v0, c.v1);
          Complex lhs = wu.eval(zp) * std::pow(c.v1.eval(zp), 2) * con.dir_v -
                        wv.eval(zp) * std::pow(c.u1.eval(zp), 2) * con.dir_u;
          double s = std::pow(std::max(1.0, std::abs(z)), 2 * m + 2);
          double d = std::max(std::abs(con.dir_u), std::abs(con.dir_v));
          r(row++) = lhs / (s * std::max(d, 1e-300));
          break;
        }
      }
    }
    return r;
  }
  ResidualFn fn() const {
    return [this](const VecC& x) { return residual(x); };
  }

  // The 5 gauge directions extend to the aux parameters: tracked preimages
  // move with the reparametrization flow; scalings leave them fixed.
  MatC gauge_directions(const VecC& x) const {
    if (gauge_pinned()) return MatC::Zero(num_unknowns(), 0);
    MatC Gb = base_.gauge_directions(x.head(base_.num_unknowns()));
    MatC G = MatC::Zero(num_unknowns(), 5);
    G.topRows(Gb.rows()) = Gb;
    std::vector<Eigen::Matrix2cd> gens(3);
    gens[0] << Complex(0), Complex(1), Complex(0), Complex(0);
    gens[1] << Complex(1), Complex(0), Complex(0), Complex(-1);
    gens[2] << Complex(0), Complex(0), Complex(1), Complex(0);
    for (int g = 0; g < 3; ++g) {
      const auto& A = gens[g];
      for (int i = 0; i < aux_count_; ++i) {
        Complex z = x(base_.num_unknowns() + i);
        G(base_.num_unknowns() + i, g) =
            A(0, 0) * z + A(0, 1) - z * (A(1, 0) * z + A(1, 1));
      }
    }
    return G;
  }

  // Constrained tangent space at x, modulo gauge.
  MatC tangent_space(const VecC& x, double rank_tol = 1e-5) const {
    MatC J = numeric_jacobian(fn(), x);
    MatC N = nullspace(J, rank_tol);
    return project_out(N, gauge_directions(x));
  }

 private:
  SeveriSystem base_;
  std::vector<IncidenceConstraint> cons_;
  int aux_count_ = 0;
  int codim_ = 0;
  MatC pin_;      // rows P^H of the gauge slice, empty when not pinned
  VecC pin_ref_;  // reference state the slice passes through
};

// ---------------------------------------------------------------------------
// Continuation bookkeeping.

struct StepDiagnostics {
  double arc_param = 0.0;
  double step = 0.0;
  int newton_iterations = 0;
  int node_count = -1;          // -1 when not re-checked at this step
  double theta_disc_ratio = 0;  // |disc theta| / |theta|^2 of the path tangent
  bool null_tangent = false;
  double min_preimage_separation = 0.0;
};

struct TraceResult {
  std::vector<ParamCurve> states;
  std::vector<std::vector<Complex>> aux;  // tracked parameters per state
  std::vector<double> arc_params;
  std::vector<StepDiagnostics> diagnostics;
  bool hit_branch_point = false;
};

namespace detail {

inline double min_preimage_separation(const ParamCurve& c,
                                      const std::vector<Complex>& aux) {
  std::vector<Complex> zs = c.base_z;
  for (auto& [s, t] : c.node_z) {
    zs.push_back(s);
    zs.push_back(t);
  }
  zs.insert(zs.end(), aux.begin(), aux.end());
  double best = 1e300;
  for (size_t i = 0; i < zs.size(); ++i)
    for (size_t j = i + 1; j < zs.size(); ++j)
      best = std::min(best, proj_distance(ProjPoint::affine(zs[i]),
                                          ProjPoint::affine(zs[j])));
  return best;
}

// Theta of the path tangent (base-system part of the augmented direction).
inline QuadraticClass path_theta(const SeveriSystem& base, const ParamCurve& c,
                                 const VecC& tangent) {
  TangentVector t =
      make_tangent(base, c, tangent.head(base.num_unknowns()), 1e-4);
  return t.theta;
}

}  // namespace detail

// One-parameter pseudo-arclength continuation of a codimension-2 constrained
// family.  Predictor: unit tangent step; corrector: minimum-norm
// Gauss-Newton (the gauge directions stay in the jacobian kernel, so the
// pseudo-inverse never moves along them).  Step control: halve after > 6
// corrector iterations or divergence, grow 1.3x after <= 2.
inline TraceResult trace_path(const ConstrainedSystem& sys,
                              const ParamCurve& start,
                              const std::vector<Complex>& aux0, int steps,
                              double h, double branch_tol = 1e-4,
                              double max_step = 0.0) {
  if (max_step <= 0.0) max_step = 4.0 * h;
  if (sys.expected_dimension() != 1)
    throw std::invalid_argument("trace_path: constraint set must be a curve");
  TraceResult out;
  GaussNewtonOptions opt;
  opt.tol = 1e-12;
  VecC x = sys.pack(start, aux0);
  {
    auto res = gauss_newton(sys.fn(), x, opt);
    if (!res.converged)
      throw StepFailure("trace_path: start state does not satisfy constraints");
    x = res.x;
  }
  VecC t_prev;
  double arc = 0.0;
  double step = h;
  // A trace may legitimately start at a branch point (germ seeds through a
  // node track one of its preimages).  Disarm the collision stop until the
  // tracked parameters have separated from the node set.
  bool branch_guard_armed = true;
  for (int k = 0; k <= steps; ++k) {
    ParamCurve c = sys.unpack(x);
    std::vector<Complex> aux = sys.unpack_aux(x);

    MatC T = sys.tangent_space(x);
    if (T.cols() < 1) throw RankDrop("trace_path: tangent space collapsed");
    if (T.cols() > 1)
      throw RankDrop("trace_path: tangent dimension " +
                     std::to_string(T.cols()) + " (branch point?)");
    VecC t = T.col(0);
    if (t_prev.size() > 0) {
      Complex ip = t_prev.dot(t);
      if (std::abs(ip) < 0.3)
        throw RankDrop("trace_path: tangent direction discontinuity");
      t *= std::conj(ip) / std::abs(ip);  // align phase with previous tangent
    } else {
      // Deterministic initial phase: largest component real positive.
      int imax = 0;
      for (int i = 1; i < t.size(); ++i)
        if (std::abs(t(i)) > std::abs(t(imax))) imax = i;
      t *= std::conj(t(imax)) / std::abs(t(imax));
    }

    StepDiagnostics diag;
    diag.arc_param = arc;
    diag.step = step;
    diag.min_preimage_separation = detail::min_preimage_separation(c, aux);
    QuadraticClass th = detail::path_theta(sys.base(), c, t);
    double ts = th.max_abs();
    diag.theta_disc_ratio =
        std::abs(disc_quadratic(th)) / std::max(ts * ts, 1e-300);
    diag.null_tangent = diag.theta_disc_ratio < 1e-6;
    if (k % 10 == 0) {
      try {
        diag.node_count =
            static_cast<int>(find_nodes(implicitize(c).f).size());
      } catch (const NumericError&) {
        diag.node_count = -1;
      }
    }
    out.states.push_back(c);
    out.aux.push_back(aux);
    out.arc_params.push_back(arc);
    out.diagnostics.push_back(diag);

    if (diag.min_preimage_separation < branch_tol) {
      if (k == 0) {
        branch_guard_armed = false;
      } else if (branch_guard_armed) {
        out.hit_branch_point = true;
        break;
      }
    } else if (!branch_guard_armed &&
               diag.min_preimage_separation > 10.0 * branch_tol) {
      branch_guard_armed = true;
    }
    if (k == steps) break;

    bool advanced = false;
    for (int retry = 0; retry < 10; ++retry) {
      VecC xp = x + step * t;
      auto res = gauss_newton(sys.fn(), xp, opt);
      if (res.converged) {
        // The corrector must not have slid back along the path.
        VecC moved = res.x - x;
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
    if (!advanced) throw StepFailure("trace_path: corrector failed at all steps");
    t_prev = t;
  }
  return out;
}

// ---------------------------------------------------------------------------
// The distinguished families.

// Non-null geodesic W_{p,q}: members through two fixed points.
inline TraceResult trace_geodesic(const SeveriSystem& sys,
                                  const ParamCurve& base,
                                  const SurfacePoint& p, const SurfacePoint& q,
                                  int steps, double h, Complex zp_hint = 0,
                                  Complex zq_hint = 0, double max_step = 0.0) {
  auto pick = [&](const SurfacePoint& pt, Complex hint) {
    auto cand = preimage_candidates(base, pt);
    if (cand.empty() || cand[0].v_residual > 1e-4)
      throw std::invalid_argument("trace_geodesic: base curve misses the point");
    if (hint != Complex(0)) {
      for (auto& cd : cand)
        if (std::abs(cd.z - hint) < 1e-3 && cd.v_residual < 1e-4) return cd.z;
    }
    return cand[0].z;
  };
  ConstrainedSystem cs(sys, {IncidenceConstraint::through_point(p),
                             IncidenceConstraint::through_point(q)});
  return trace_path(cs, base, {pick(p, zp_hint), pick(q, zq_hint)}, steps, h,
                    1e-4, max_step);
}

// Nodal locus W_p^1: members keeping a node pinned at p.
inline TraceResult trace_nodal_locus(const SeveriSystem& sys,
                                     const ParamCurve& base,
                                     const SurfacePoint& p, int steps,
                                     double h) {
  int idx = -1;
  for (size_t i = 0; i < base.node_z.size(); ++i)
    if (surface_distance(base.at(base.node_z[i].first), p) < 1e-5)
      idx = static_cast<int>(i);
  if (idx < 0)
    throw std::invalid_argument("trace_nodal_locus: base has no node at p");
  ConstrainedSystem cs(sys, {IncidenceConstraint::node_at(p, idx)});
  return trace_path(cs, base, {}, steps, h);
}

// Null geodesic: members through p with the fixed tangent direction there
// (the infinitely-near second point).  The direction defaults to the base
// curve's own tangent at its tracked preimage of p.
inline TraceResult trace_null_geodesic(const SeveriSystem& sys,
                                       const ParamCurve& base,
                                       const SurfacePoint& p, int steps,
                                       double h) {
  auto cand = preimage_candidates(base, p);
  if (cand.empty() || cand[0].v_residual > 1e-4)
    throw std::invalid_argument("trace_null_geodesic: base curve misses p");
  Complex z = cand[0].z;
  ProjPoint zp = ProjPoint::affine(z);
  Complex du = wronskian(base.u0, base.u1).eval(zp) /
               std::pow(base.u1.eval(zp), 2);
  Complex dv = wronskian(base.v0, base.v1).eval(zp) /
               std::pow(base.v1.eval(zp), 2);
  ConstrainedSystem cs(sys, {IncidenceConstraint::tangent_at(p, du, dv)});
  return trace_path(cs, base, {z}, steps, h);
}

// ---------------------------------------------------------------------------
// Null surface W_p: the 2-parameter family through one fixed point, realized
// as a chart grid around the base state (direct projection per grid point).

struct NullSurfacePatch {
  std::vector<ParamCurve> states;  // row-major (2k+1) x (2k+1) grid
  std::vector<Complex> tracked_z;  // preimage of p per state
  int half_width = 0;
  std::vector<double> degeneracy;  // s_min/s_max of the 2x2 restricted gram
};

inline NullSurfacePatch trace_null_surface(const SeveriSystem& sys,
                                           const ParamCurve& base,
                                           const SurfacePoint& p,
                                           int half_width = 2,
                                           double h = 5e-3) {
  auto cand = preimage_candidates(base, p);
  if (cand.empty() || cand[0].v_residual > 1e-4)
    throw std::invalid_argument("trace_null_surface: base curve misses p");
  for (auto& [s, t] : base.node_z)
    if (surface_distance(base.at(s), p) < 1e-5)
      throw std::invalid_argument("trace_null_surface: p is a node of base");
  ConstrainedSystem cs(sys, {IncidenceConstraint::through_point(p)});
  GaussNewtonOptions opt;
  opt.tol = 1e-12;
  VecC x0 = cs.pack(base, {cand[0].z});
  {
    auto res = gauss_newton(cs.fn(), x0, opt);
    if (!res.converged)
      throw StepFailure("trace_null_surface: base projection failed");
    x0 = res.x;
  }
  MatC T0 = cs.tangent_space(x0);
  if (T0.cols() != 2)
    throw RankDrop("trace_null_surface: expected a 2-dimensional family");

  NullSurfacePatch out;
  out.half_width = half_width;
  for (int i = -half_width; i <= half_width; ++i) {
    for (int j = -half_width; j <= half_width; ++j) {
      VecC xp = x0 + (double(i) * h) * T0.col(0) + (double(j) * h) * T0.col(1);
      auto res = gauss_newton(cs.fn(), xp, opt);
      if (!res.converged)
        throw StepFailure("trace_null_surface: grid corrector failed");
      ParamCurve c = cs.unpack(res.x);
      MatC T = cs.tangent_space(res.x);
      if (T.cols() != 2)
        throw RankDrop("trace_null_surface: family dimension changed");
      // The metric restricted to the family's tangent plane must be
      // degenerate of rank <= 1.
      QuadraticClass q1 = detail::path_theta(sys, c, T.col(0));
      QuadraticClass q2 = detail::path_theta(sys, c, T.col(1));
      Eigen::Matrix2cd g;
      g(0, 0) = disc_pairing(q1, q1);
      g(0, 1) = g(1, 0) = disc_pairing(q1, q2);
      g(1, 1) = disc_pairing(q2, q2);
      double s1 = std::max(q1.max_abs(), q2.max_abs());
      Eigen::JacobiSVD<Eigen::Matrix2cd> svd(g);
      out.degeneracy.push_back(svd.singularValues()(1) /
                               std::max(s1 * s1, 1e-300));
      out.states.push_back(c);
      out.tracked_z.push_back(cs.unpack_aux(res.x)[0]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Branch enumeration at a singular member of W_{p,q}: one germ seed per
// choice of tracked preimage of p and q.

struct GermSeed {
  Complex zp, zq;
};

inline std::vector<GermSeed> branch_enumerate(const ParamCurve& c,
                                              const SurfacePoint& p,
                                              const SurfacePoint& q,
                                              double tol = 1e-6) {
  auto zs_p = preimages_of(c, p, tol);
  auto zs_q = preimages_of(c, q, tol);
  if (zs_p.empty() || zs_q.empty())
    throw std::invalid_argument("branch_enumerate: curve misses p or q");
  std::vector<GermSeed> out;
  for (auto zp : zs_p)
    for (auto zq : zs_q) out.push_back({zp, zq});
  return out;
}

// ---------------------------------------------------------------------------
// Emptiness probe: attempt the through-point system from randomized starts
// near valid W members; report the convergence count (evidence, not proof).

struct EmptyLocusReport {
  int attempts = 0;
  int convergences = 0;
};

inline EmptyLocusReport empty_locus_probe(const SeveriSystem& sys,
                                          const std::vector<ParamCurve>& pool,
                                          const SurfacePoint& p, int attempts,
                                          std::uint64_t seed) {
  if (pool.empty())
    throw std::invalid_argument("empty_locus_probe: need seed members");
  Rng rng(seed);
  ConstrainedSystem cs(sys, {IncidenceConstraint::through_point(p)});
  GaussNewtonOptions opt;
  opt.tol = 1e-9;
  EmptyLocusReport rep;
  rep.attempts = attempts;
  for (int a = 0; a < attempts; ++a) {
    const ParamCurve& c = pool[a % pool.size()];
    // Random start: perturbed member, tracked preimage from the u-equation.
    VecC xb = sys.pack(c);
    for (int i = 0; i < xb.size(); ++i) xb(i) += rng.complex(0.05);
    auto cand = preimage_candidates(sys.unpack(xb), p);
    Complex z0 = cand.empty() ? rng.complex(1.0)
                              : cand[rng.integer(0, int(cand.size()) - 1)].z;
    VecC x(cs.num_unknowns());
    x.head(xb.size()) = xb;
    x(xb.size()) = z0;
    auto res = gauss_newton(cs.fn(), x, opt);
    if (!res.converged) continue;
    // A convergence only counts if the limit is a genuine nodal member.
    try {
      ParamCurve sol = cs.unpack(res.x);
      if (find_nodes(implicitize(sol).f).size() ==
          static_cast<size_t>(sys.m() - 1))
        ++rep.convergences;
    } catch (const NumericError&) {
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// SVG rendering of curve displacement along a trace: the u-plane images of
// three parameter circles per sampled state, nodes and fixed points marked.

namespace detail {

inline std::string svg_color(int idx, int total) {
  // Blue-to-red sweep over the trace.
  double t = total > 1 ? double(idx) / double(total - 1) : 0.0;
  int r = static_cast<int>(40 + 180 * t);
  int b = static_cast<int>(220 - 180 * t);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x50%02x", r, b);
  return buf;
}

}  // namespace detail

inline std::string render_displacement_svg(const TraceResult& trace,
                                           int max_states = 9) {
  if (trace.states.empty())
    throw std::invalid_argument("render_displacement_svg: empty trace");
  const int W = 640, H = 640;
  // Collect u-plane samples to fix the viewport.
  std::vector<std::pair<double, double>> pts;
  int stride = std::max<size_t>(1, trace.states.size() / max_states);
  std::vector<size_t> shown;
  for (size_t k = 0; k < trace.states.size(); k += stride) shown.push_back(k);
  auto u_of = [](const ParamCurve& c, Complex z) {
    ProjPoint zp = ProjPoint::affine(z);
    return c.u0.eval(zp) / c.u1.eval(zp);
  };
  const int nsamp = 160;
  for (size_t k : shown)
    for (double rad : {0.6, 1.0, 1.7})
      for (int i = 0; i < nsamp; ++i) {
        Complex u = u_of(trace.states[k],
                         std::polar(rad, 6.283185307179586 * i / nsamp));
        if (std::abs(u) < 10.0) pts.push_back({u.real(), u.imag()});
      }
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (auto& [x, y] : pts) {
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  double span = std::max({xmax - xmin, ymax - ymin, 1e-6});
  double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
  double scale = 0.9 * W / span;
  auto px = [&](double x) { return 0.5 * W + scale * (x - cx); };
  auto py = [&](double y) { return 0.5 * H - scale * (y - cy); };

  std::string svg;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" "
                "height=\"%d\" viewBox=\"0 0 %d %d\">\n",
                W, H, W, H);
  svg += buf;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (size_t si = 0; si < shown.size(); ++si) {
    size_t k = shown[si];
    std::string color = detail::svg_color(int(si), int(shown.size()));
    for (double rad : {0.6, 1.0, 1.7}) {
      std::string path;
      bool pen_up = true;
      for (int i = 0; i <= nsamp; ++i) {
        Complex u = u_of(trace.states[k],
                         std::polar(rad, 6.283185307179586 * i / nsamp));
        if (std::abs(u) >= 10.0) {
          pen_up = true;
          continue;
        }
        std::snprintf(buf, sizeof(buf), "%c%.2f %.2f ", pen_up ? 'M' : 'L',
                      px(u.real()), py(u.imag()));
        path += buf;
        pen_up = false;
      }
      svg += "<path d=\"" + path + "\" fill=\"none\" stroke=\"" + color +
             "\" stroke-width=\"0.8\"/>\n";
    }
    // Nodes of this state.
    for (auto& [s, t] : trace.states[k].node_z) {
      Complex u = u_of(trace.states[k], s);
      if (std::abs(u) >= 10.0) continue;
      std::snprintf(buf, sizeof(buf),
                    "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\"/>\n",
                    px(u.real()), py(u.imag()), color.c_str());
      svg += buf;
    }
  }
  // Fixed points: images of the tracked preimages at the first state.
  if (!trace.aux.empty()) {
    for (Complex z : trace.aux.front()) {
      Complex u = u_of(trace.states.front(), z);
      if (std::abs(u) >= 10.0) continue;
      std::snprintf(buf, sizeof(buf),
                    "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"5\" fill=\"none\" "
                    "stroke=\"black\" stroke-width=\"1.5\"/>\n",
                    px(u.real()), py(u.imag()));
      svg += buf;
    }
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace mtw

#endif
