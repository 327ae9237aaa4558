#ifndef MINITWISTOR_WEYL_HPP
#define MINITWISTOR_WEYL_HPP

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "minitwistor/conformal.hpp"
#include "minitwistor/core.hpp"
#include "minitwistor/nodal_curve.hpp"
#include "minitwistor/numeric.hpp"
#include "minitwistor/trace.hpp"

namespace mtw {

using Vec3 = Eigen::Vector3cd;
using Mat3 = Eigen::Matrix3cd;

// ---------------------------------------------------------------------------
// Dense polynomials in three (complex) variables, used as surrogate models
// for the metric and the Weyl one-form on a chart.

inline const std::vector<std::array<int, 3>>& monomials3(int degree) {
  static std::vector<std::vector<std::array<int, 3>>> cache;
  while (static_cast<int>(cache.size()) <= degree) {
    int D = static_cast<int>(cache.size());
    std::vector<std::array<int, 3>> out;
    for (int d = 0; d <= D; ++d)
      for (int i = d; i >= 0; --i)
        for (int j = d - i; j >= 0; --j) out.push_back({i, j, d - i - j});
    cache.push_back(std::move(out));
  }
  return cache[degree];
}

struct Poly3 {
  int degree = 0;
  VecC coef;  // over monomials3(degree), in that order

  Poly3() : coef(VecC::Zero(1)) {}
  explicit Poly3(int d)
      : degree(d), coef(VecC::Zero(monomials3(d).size())) {}
  static Poly3 constant(Complex c) {
    Poly3 p(0);
    p.coef(0) = c;
    return p;
  }

  Complex eval(const Vec3& y) const {
    const auto& mono = monomials3(degree);
    Complex acc(0.0);
    for (size_t k = 0; k < mono.size(); ++k) {
      if (coef(k) == Complex(0.0)) continue;
      acc += coef(k) * std::pow(y(0), mono[k][0]) *
             std::pow(y(1), mono[k][1]) * std::pow(y(2), mono[k][2]);
    }
    return acc;
  }

  Poly3 deriv(int var) const {
    Poly3 out(std::max(0, degree - 1));
    const auto& mono = monomials3(degree);
    const auto& mout = monomials3(out.degree);
    for (size_t k = 0; k < mono.size(); ++k) {
      auto e = mono[k];
      if (e[var] == 0) continue;
      Complex c = coef(k) * double(e[var]);
      e[var] -= 1;
      for (size_t j = 0; j < mout.size(); ++j)
        if (mout[j] == e) {
          out.coef(j) += c;
          break;
        }
    }
    return out;
  }

  double max_abs() const {
    double m = 0;
    for (int k = 0; k < coef.size(); ++k) m = std::max(m, std::abs(coef(k)));
    return m;
  }
};

// ---------------------------------------------------------------------------
// Local chart on the Severi variety: three tangent directions at a base
// member, normalized against the gram so the metric at the origin is the
// identity; points are recovered by Gauss-Newton projection.

struct ChartFrame {
  ParamCurve base;
  SeveriSystem system;
  std::vector<TangentVector> directions;  // gram-orthonormal
  Mat3 gram0;  // identity up to rounding, kept as a diagnostic
  // Orthonormal basis of the jacobian kernel at the base (tangent + gauge).
  // The chart map pins the correction against this FIXED basis, which makes
  // it a holomorphic function of the coordinates; a moving (min-norm)
  // projection would depend on conj(x) at second order and poison
  // holomorphic fits of fields on the chart.
  MatC kernel;
};

inline ChartFrame build_chart(const SeveriSystem& sys, const ParamCurve& base) {
  auto raw = tangent_basis(sys, base);
  // Gram of the euclidean-orthonormal raw basis; its determinant sets the
  // overall scale s.  Directions are normalized so the gram becomes s * I
  // rather than I: this keeps their euclidean norms O(1), so chart
  // coordinates measure state displacement directly.  (Only the conformal
  // class is canonical; a scalar multiple of the identity is as good a
  // convention as the identity.)
  Mat3 graw;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      graw(i, j) = disc_pairing(raw[i].theta, raw[j].theta);
  double s = std::pow(std::abs(graw.determinant()), 1.0 / 3.0);
  if (s < 1e-300)
    throw DegenerateMetric("build_chart: degenerate gram at the base state");
  // Gram-Schmidt with respect to the complex-bilinear disc pairing.  The
  // pairing is symmetric, not Hermitian, so a vector can pair to near zero
  // with itself; rotate in a deterministic second vector when that happens.
  std::vector<TangentVector> dirs;
  std::vector<TangentVector> pool = raw;
  for (int step = 0; step < 3; ++step) {
    // Pick the pool vector with the largest self-pairing after removing the
    // components along the accepted directions.
    int best = -1;
    double best_val = 0.0;
    std::vector<TangentVector> reduced;
    for (size_t i = 0; i < pool.size(); ++i) {
      TangentVector v = pool[i];
      for (const auto& e : dirs) {
        Complex c = disc_pairing(v.theta, e.theta) /
                    disc_pairing(e.theta, e.theta);
        VecC coeffs(2);
        coeffs << Complex(1.0), -c;
        std::vector<TangentVector> pair{v, e};
        v = combine(pair, coeffs);
      }
      reduced.push_back(v);
      double val = std::abs(disc_pairing(v.theta, v.theta));
      if (val > best_val) {
        best_val = val;
        best = static_cast<int>(i);
      }
    }
    if (best < 0 || best_val < 1e-12)
      throw DegenerateMetric("build_chart: gram-orthogonalization degenerate");
    TangentVector v = reduced[best];
    Complex norm = std::sqrt(disc_pairing(v.theta, v.theta) / s);
    VecC one(1);
    one << Complex(1.0) / norm;
    std::vector<TangentVector> self{v};
    dirs.push_back(combine(self, one));
    pool.erase(pool.begin() + best);
  }
  ChartFrame out{base, sys, dirs, Mat3::Zero(), MatC()};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      out.gram0(i, j) = disc_pairing(dirs[i].theta, dirs[j].theta);
  VecC x0 = sys.pack(base);
  out.kernel = nullspace(numeric_jacobian(sys.fn(), x0), 1e-5);
  return out;
}

namespace detail {

// Residual of the chart's defining system at coordinate x: the variety
// equations plus the pinning rows N^H (s - base - B x).  Every equation is
// holomorphic in (s, x), so the solution s(x) is a holomorphic chart map.
inline ResidualFn chart_system(const ChartFrame& chart, const Vec3& x) {
  VecC lin = chart.system.pack(chart.base);
  for (int i = 0; i < 3; ++i) lin += x(i) * chart.directions[i].state;
  ResidualFn fn = chart.system.fn();
  MatC pin = chart.kernel.adjoint();
  return [fn, pin, lin](const VecC& s) {
    VecC r0 = fn(s);
    VecC r(r0.size() + pin.rows());
    r << r0, pin * (s - lin);
    return r;
  };
}

}  // namespace detail

// Chart map: x -> the unique nearby solution of the variety equations whose
// correction off base + sum x_i delta_i is pinned against the base kernel.
inline ParamCurve chart_to_state(const ChartFrame& chart, const Vec3& x,
                                 double domain_radius = 0.2) {
  if (x.norm() > domain_radius * 3.0)
    throw ProjectionFailure("chart_to_state: coordinate outside the chart");
  VecC x0 = chart.system.pack(chart.base);
  for (int i = 0; i < 3; ++i) x0 += x(i) * chart.directions[i].state;
  GaussNewtonOptions opt;
  opt.tol = 1e-12;
  auto res = gauss_newton(detail::chart_system(chart, x), x0, opt);
  if (!res.converged)
    throw ProjectionFailure("chart_to_state: projection did not converge");
  return chart.system.unpack(res.x);
}

// Coordinate recovery: the inverse of the chart map, found by Newton
// iteration on the projected linear recovery.  Round trips with
// chart_to_state close to solver accuracy.
inline Vec3 state_to_chart(const ChartFrame& chart, const ParamCurve& c,
                           double tol = 1e-10) {
  VecC target = chart.system.pack(c);
  MatC B(target.size(), 3);
  for (int i = 0; i < 3; ++i) B.col(i) = chart.directions[i].state;
  auto qr = B.completeOrthogonalDecomposition();
  Vec3 x = Vec3::Zero();
  for (int it = 0; it < 12; ++it) {
    ParamCurve cur = (it == 0) ? chart.base : chart_to_state(chart, x);
    VecC d = target - chart.system.pack(cur);
    VecC dx = qr.solve(d);
    x += Vec3(dx(0), dx(1), dx(2));
    if (dx.norm() < tol) return x;
  }
  throw ProjectionFailure("state_to_chart: recovery did not converge");
}

// The gram matrix field in chart coordinates.  The coordinate frame is the
// exact differential of the chart map, obtained from the implicit function
// theorem on the chart's defining system:
//   [J; N^H] ds_i = [0; N^H delta_i].
inline Mat3 chart_gram(const ChartFrame& chart, const Vec3& x) {
  const SeveriSystem& sys = chart.system;
  ParamCurve center = chart_to_state(chart, x);
  VecC s0 = sys.pack(center);
  MatC J = numeric_jacobian(sys.fn(), s0);
  MatC Jaug(J.rows() + chart.kernel.cols(), J.cols());
  Jaug << J, chart.kernel.adjoint();
  auto qr = Jaug.colPivHouseholderQr();
  std::vector<TangentVector> frame;
  for (int i = 0; i < 3; ++i) {
    VecC rhs = VecC::Zero(Jaug.rows());
    rhs.tail(chart.kernel.cols()) =
        chart.kernel.adjoint() * chart.directions[i].state;
    VecC ds = qr.solve(rhs);
    frame.push_back(make_tangent(sys, center, ds, 1e-4));
  }
  Mat3 g;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      g(i, j) = disc_pairing(frame[i].theta, frame[j].theta);
  return g;
}

// ---------------------------------------------------------------------------
// Surrogate model: polynomial metric and Weyl one-form in the SCALED chart
// coordinate y = x / domain_radius (unit-polydisc conditioning).

struct SurrogateModel {
  double domain_radius = 0.05;
  std::array<std::array<Poly3, 3>, 3> g;  // symmetric in (i,j), variables y
  std::array<Poly3, 3> a;                 // one-form components, variables y
  double metric_fit_residual = 0.0;
  double geodesic_fit_residual = 0.0;
};

struct EWReport {
  Poly3 lambda_field;
  double residual_tracefree = 0.0;
  double geodesic_fit_residual = 0.0;
  double compat_residual = 0.0;
};

// Deterministic sample coordinates in the unit polydisc (complex directions),
// suitable for a holomorphic fit.
inline std::vector<Vec3> chart_samples(int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec3> out;
  for (int i = 0; i < count; ++i) {
    Vec3 y;
    for (int k = 0; k < 3; ++k)
      y(k) = Complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)) * 0.7;
    out.push_back(y);
  }
  return out;
}

// Least-squares polynomial fit of a sampled gram field over the given sample
// coordinates (y-units).  The fit residual is relative to the gram scale.
inline SurrogateModel fit_metric_samples(const std::vector<Vec3>& ys,
                                         const std::vector<Mat3>& grams,
                                         double domain_radius,
                                         int degree = 4) {
  const auto& mono = monomials3(degree);
  int nb = static_cast<int>(mono.size());
  int ns = static_cast<int>(ys.size());
  if (ns < 2 * nb)
    throw IllConditionedFit("fit_metric: too few samples for the degree");
  MatC A(ns, nb);
  for (int s = 0; s < ns; ++s)
    for (int k = 0; k < nb; ++k)
      A(s, k) = std::pow(ys[s](0), mono[k][0]) * std::pow(ys[s](1), mono[k][1]) *
                std::pow(ys[s](2), mono[k][2]);
  Eigen::ColPivHouseholderQR<MatC> qr(A);
  double scale = 0.0;
  for (int s = 0; s < ns; ++s)
    scale = std::max(scale, grams[s].cwiseAbs().maxCoeff());
  SurrogateModel model;
  model.domain_radius = domain_radius;
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      VecC b(ns);
      for (int s = 0; s < ns; ++s) b(s) = grams[s](i, j);
      VecC cf = qr.solve(b);
      worst = std::max(worst, (A * cf - b).norm() /
                                  (std::sqrt(double(ns)) * scale));
      Poly3 p(degree);
      p.coef = cf;
      model.g[i][j] = p;
      model.g[j][i] = p;
    }
  model.metric_fit_residual = worst;
  if (!std::isfinite(worst))
    throw IllConditionedFit("fit_metric: non-finite fit");
  for (int k = 0; k < 3; ++k) model.a[k] = Poly3(2);
  return model;
}

inline SurrogateModel fit_metric(const ChartFrame& chart, double domain_radius,
                                 const std::vector<Vec3>& ys, int degree = 4) {
  std::vector<Mat3> grams(ys.size());
  for (size_t s = 0; s < ys.size(); ++s)
    grams[s] = chart_gram(chart, domain_radius * ys[s]);
  return fit_metric_samples(ys, grams, domain_radius, degree);
}

// ---------------------------------------------------------------------------
// Pointwise evaluation of the connection and curvature of a surrogate model.
// All derivatives of g and a are exact polynomial derivatives; the matrix
// inverse is numeric per point.

namespace detail {

struct ModelDerivs {
  // Cached derivative polynomials of the model.
  std::array<std::array<Poly3, 3>, 3> g;
  std::array<std::array<std::array<Poly3, 3>, 3>, 3> dg;     // dg[l](i,j)
  std::array<std::array<std::array<std::array<Poly3, 3>, 3>, 3>, 3> ddg;
  std::array<Poly3, 3> a;
  std::array<std::array<Poly3, 3>, 3> da;  // da[l][j] = d a_j / d y_l

  explicit ModelDerivs(const SurrogateModel& m) {
    g = m.g;
    a = m.a;
    for (int l = 0; l < 3; ++l)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) dg[l][i][j] = m.g[i][j].deriv(l);
    for (int l = 0; l < 3; ++l)
      for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) ddg[l][k][i][j] = dg[k][i][j].deriv(l);
    for (int l = 0; l < 3; ++l)
      for (int j = 0; j < 3; ++j) da[l][j] = m.a[j].deriv(l);
  }
};

struct ConnectionPoint {
  Mat3 G, Gi;
  Vec3 A;
  // Gamma[k](i,j) and its derivative dGamma[l][k](i,j).
  std::array<Mat3, 3> Gamma;
  std::array<std::array<Mat3, 3>, 3> dGamma;
};

inline ConnectionPoint connection_at(const ModelDerivs& md, const Vec3& y) {
  ConnectionPoint out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out.G(i, j) = md.g[i][j].eval(y);
  out.Gi = out.G.inverse();
  for (int k = 0; k < 3; ++k) out.A(k) = md.a[k].eval(y);

  std::array<Mat3, 3> Dg, DA_dummy;
  std::array<std::array<Mat3, 3>, 3> DDg;
  for (int l = 0; l < 3; ++l)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) Dg[l](i, j) = md.dg[l][i][j].eval(y);
  for (int l = 0; l < 3; ++l)
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) DDg[l][k](i, j) = md.ddg[l][k][i][j].eval(y);
  Mat3 Da;  // Da(l, j) = d a_j / d y_l
  for (int l = 0; l < 3; ++l)
    for (int j = 0; j < 3; ++j) Da(l, j) = md.da[l][j].eval(y);

  // Levi-Civita part and the Weyl correction
  //   Gamma^k_ij = LC^k_ij - 1/2 (d^k_i a_j + d^k_j a_i - g_ij a^k),
  // the unique torsion-free connection with nabla g = a (x) g.
  Vec3 Asharp = out.Gi * out.A;
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        Complex lc(0.0);
        for (int l = 0; l < 3; ++l)
          lc += 0.5 * out.Gi(k, l) *
                (Dg[i](l, j) + Dg[j](l, i) - Dg[l](i, j));
        Complex w = -0.5 * ((k == i ? out.A(j) : Complex(0.0)) +
                            (k == j ? out.A(i) : Complex(0.0)) -
                            out.G(i, j) * Asharp(k));
        out.Gamma[k](i, j) = lc + w;
      }

  // d/dy_m of the above; d(G^{-1}) = -G^{-1} (dG) G^{-1}.
  std::array<Mat3, 3> dGi;
  for (int m = 0; m < 3; ++m) dGi[m] = -out.Gi * Dg[m] * out.Gi;
  for (int m = 0; m < 3; ++m) {
    Vec3 dAsharp = dGi[m] * out.A + out.Gi * Da.row(m).transpose();
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          Complex dlc(0.0);
          for (int l = 0; l < 3; ++l) {
            dlc += 0.5 * dGi[m](k, l) *
                   (Dg[i](l, j) + Dg[j](l, i) - Dg[l](i, j));
            dlc += 0.5 * out.Gi(k, l) *
                   (DDg[m][i](l, j) + DDg[m][j](l, i) - DDg[m][l](i, j));
          }
          Complex dw = -0.5 * ((k == i ? Da(m, j) : Complex(0.0)) +
                               (k == j ? Da(m, i) : Complex(0.0)) -
                               Dg[m](i, j) * Asharp(k) -
                               out.G(i, j) * dAsharp(k));
          out.dGamma[m][k](i, j) = dlc + dw;
        }
  }
  (void)DA_dummy;
  return out;
}

// Symmetrized Ricci tensor at a point.
inline Mat3 ricci_sym(const ConnectionPoint& cp) {
  // R^l_{ijk} = d_j Gamma^l_{ik} - d_k Gamma^l_{ij}
  //           + Gamma^l_{js} Gamma^s_{ik} - Gamma^l_{ks} Gamma^s_{ij};
  // Ric_{ik} = R^j_{ijk}.
  Mat3 ric;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) {
      Complex acc(0.0);
      for (int j = 0; j < 3; ++j) {
        acc += cp.dGamma[j][j](i, k) - cp.dGamma[k][j](i, j);
        for (int s = 0; s < 3; ++s)
          acc += cp.Gamma[j](j, s) * cp.Gamma[s](i, k) -
                 cp.Gamma[j](k, s) * cp.Gamma[s](i, j);
      }
      ric(i, k) = acc;
    }
  return 0.5 * (ric + ric.transpose());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Weyl one-form fit from geodesic samples.

struct GeodesicSample {
  Vec3 y;   // position (scaled chart coordinates)
  Vec3 T;   // velocity dy/dt
  Vec3 Acc; // acceleration d2y/dt2
};

// Extract (position, velocity, acceleration) triples from a traced path by
// interpolating a quartic through sliding five-state windows of chart
// coordinates (second-derivative error O(h^3) in the step size).
inline std::vector<GeodesicSample> geodesic_samples_from_trace(
    const ChartFrame& chart, double domain_radius, const TraceResult& trace) {
  std::vector<GeodesicSample> out;
  std::vector<Vec3> ys;
  for (const auto& c : trace.states)
    ys.push_back(state_to_chart(chart, c) / domain_radius);
  for (size_t k = 2; k + 2 < ys.size(); ++k) {
    if (ys[k].norm() > 1.0) continue;
    // Times relative to the center state, scaled to O(1) for conditioning.
    double span = trace.arc_params[k + 2] - trace.arc_params[k - 2];
    if (!(span > 0)) continue;
    Eigen::Matrix<double, 5, 5> V;
    for (int r = 0; r < 5; ++r) {
      double t = (trace.arc_params[k - 2 + r] - trace.arc_params[k]) / span;
      double p = 1.0;
      for (int c = 0; c < 5; ++c, p *= t) V(r, c) = p;
    }
    auto lu = V.partialPivLu();
    GeodesicSample smp;
    smp.y = ys[k];
    for (int c = 0; c < 3; ++c) {
      Eigen::Matrix<Complex, 5, 1> vals;
      for (int r = 0; r < 5; ++r) vals(r) = ys[k - 2 + r](c);
      Eigen::Matrix<Complex, 5, 1> cf = lu.solve(vals);
      smp.T(c) = cf(1) / span;
      smp.Acc(c) = 2.0 * cf(2) / (span * span);
    }
    out.push_back(smp);
  }
  return out;
}

// Fit the Weyl one-form a (degree <= 2 polynomial in y) so the geodesic
// equation holds along the samples:  Acc + Gamma(a)(T,T) is parallel to T.
// Linear least squares in the a-coefficients and one lambda per sample.
inline void fit_weyl_form(SurrogateModel& model,
                          const std::vector<GeodesicSample>& samples,
                          int a_degree = 2) {
  detail::ModelDerivs md(model);  // a is still zero here; only g parts used
  const auto& mono = monomials3(a_degree);
  int nb = static_cast<int>(mono.size());
  int ns = static_cast<int>(samples.size());
  if (ns < 10)
    throw RankDeficientFit("fit_weyl_form: too few geodesic samples");
  // Unknowns: 3*nb coefficients of a, then ns lambdas.
  int nu = 3 * nb + ns;
  MatC A = MatC::Zero(3 * ns, nu);
  VecC rhs = VecC::Zero(3 * ns);
  double scale = 0.0;
  for (int s = 0; s < ns; ++s) {
    const auto& smp = samples[s];
    auto cp = detail::connection_at(md, smp.y);
    // Levi-Civita acceleration (a-independent part).
    Vec3 lc;
    for (int k = 0; k < 3; ++k) {
      Complex acc(0.0);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          acc += cp.Gamma[k](i, j) * smp.T(i) * smp.T(j);
      lc(k) = acc;
    }
    Vec3 r0 = smp.Acc + lc;
    Complex gTT(0.0);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) gTT += cp.G(i, j) * smp.T(i) * smp.T(j);
    Complex aT_row;  // assembled per monomial below
    VecC mvals(nb);
    for (int k = 0; k < nb; ++k)
      mvals(k) = std::pow(smp.y(0), mono[k][0]) * std::pow(smp.y(1), mono[k][1]) *
                 std::pow(smp.y(2), mono[k][2]);
    for (int k = 0; k < 3; ++k) {
      rhs(3 * s + k) = -r0(k);
      // Weyl term: -(a(T) T^k - 1/2 g(T,T) (G^{-1} a)^k), linear in a.
      for (int comp = 0; comp < 3; ++comp)
        for (int mo = 0; mo < nb; ++mo) {
          Complex co = smp.T(comp) * smp.T(k) * mvals(mo);
          co -= 0.5 * gTT * cp.Gi(k, comp) * mvals(mo);
          A(3 * s + k, comp * nb + mo) -= co;
        }
      // -lambda T^k
      A(3 * s + k, 3 * nb + s) = -smp.T(k);
      scale = std::max(scale, std::abs(r0(k)) + smp.T.norm());
    }
  }
  VecC sol = A.completeOrthogonalDecomposition().solve(rhs);
  double resid = (A * sol - rhs).norm() /
                 std::max(scale * std::sqrt(double(3 * ns)), 1e-300);
  for (int comp = 0; comp < 3; ++comp) {
    Poly3 p(a_degree);
    p.coef = sol.segment(comp * nb, nb);
    model.a[comp] = p;
  }
  model.geodesic_fit_residual = resid;
}

// Residual of the geodesic equation for held-out samples under the fitted
// model (per-sample lambda eliminated by projection orthogonal to T).
inline double geodesic_equation_residual(const SurrogateModel& model,
                                         const std::vector<GeodesicSample>& samples) {
  detail::ModelDerivs md(model);
  double worst = 0.0;
  for (const auto& smp : samples) {
    auto cp = detail::connection_at(md, smp.y);
    Vec3 r;
    for (int k = 0; k < 3; ++k) {
      Complex acc = smp.Acc(k);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          acc += cp.Gamma[k](i, j) * smp.T(i) * smp.T(j);
      r(k) = acc;
    }
    // Remove the component along T (reparametrization freedom).
    Vec3 t = smp.T / smp.T.norm();
    r -= (t.adjoint() * r)(0) * t;
    double sc = std::max(smp.Acc.norm() + smp.T.squaredNorm(), 1e-300);
    worst = std::max(worst, r.norm() / sc);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Einstein-Weyl verification: symmetrized Ricci versus Lambda g on a grid.

inline EWReport ew_residual(const SurrogateModel& model, int grid = 4,
                            double grid_radius = 0.6) {
  detail::ModelDerivs md(model);
  EWReport rep;
  rep.geodesic_fit_residual = model.geodesic_fit_residual;
  std::vector<Vec3> pts;
  Rng rng(20240811);
  for (int i = 0; i < grid * grid * grid; ++i) {
    Vec3 y;
    for (int k = 0; k < 3; ++k)
      y(k) = Complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)) *
             (grid_radius / 1.4142135623730951);
    pts.push_back(y);
  }
  double worst = 0.0, worst_compat = 0.0;
  std::vector<Complex> lambdas;
  for (const auto& y : pts) {
    auto cp = detail::connection_at(md, y);
    Mat3 ric = detail::ricci_sym(cp);
    Complex lam = (cp.Gi * ric).trace() / 3.0;
    lambdas.push_back(lam);
    double rs = std::max(ric.cwiseAbs().maxCoeff(), 1e-300);
    worst = std::max(worst, (ric - lam * cp.G).cwiseAbs().maxCoeff() / rs);
    // Compatibility: nabla_l g_ij - a_l g_ij = 0 identically for the
    // standard Weyl connection; checked to rounding.
    std::array<Mat3, 3> Dg;
    for (int l = 0; l < 3; ++l)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) Dg[l](i, j) = md.dg[l][i][j].eval(y);
    double gs = std::max(cp.G.cwiseAbs().maxCoeff(), 1e-300);
    for (int l = 0; l < 3; ++l)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          Complex nab = Dg[l](i, j) - cp.A(l) * cp.G(i, j);
          for (int s = 0; s < 3; ++s)
            nab -= cp.Gamma[s](l, i) * cp.G(s, j) +
                   cp.Gamma[s](l, j) * cp.G(i, s);
          worst_compat = std::max(worst_compat, std::abs(nab) / gs);
        }
  }
  rep.residual_tracefree = worst;
  rep.compat_residual = worst_compat;
  // Fit Lambda as a quadratic field (reported, not used in the residual).
  {
    const auto& mono = monomials3(2);
    int nb = static_cast<int>(mono.size());
    MatC A(pts.size(), nb);
    VecC b(pts.size());
    for (size_t s = 0; s < pts.size(); ++s) {
      for (int k = 0; k < nb; ++k)
        A(s, k) = std::pow(pts[s](0), mono[k][0]) *
                  std::pow(pts[s](1), mono[k][1]) *
                  std::pow(pts[s](2), mono[k][2]);
      b(s) = lambdas[s];
    }
    Poly3 lam(2);
    lam.coef = A.completeOrthogonalDecomposition().solve(b);
    rep.lambda_field = lam;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// End-to-end pipeline for one refinement level.

struct EWPipelineOptions {
  double domain_radius = 0.05;
  int metric_samples = 500;
  int geodesic_count = 30;
  int trace_steps = 24;
  std::uint64_t seed = 11;
};

inline SurrogateModel fit_surrogate(const ChartFrame& chart,
                                    const EWPipelineOptions& opt) {
  auto ys = chart_samples(opt.metric_samples, opt.seed);
  SurrogateModel model = fit_metric(chart, opt.domain_radius, ys);
  Rng rng(opt.seed + 1);
  std::vector<GeodesicSample> samples;
  for (int gidx = 0; gidx < opt.geodesic_count; ++gidx) {
    Complex z1 = rng.complex(0.8), z2 = rng.complex(0.8);
    if (std::abs(z1 - z2) < 0.3) z2 += Complex(0.5, 0.4);
    SurfacePoint p = chart.base.at(z1), q = chart.base.at(z2);
    try {
      // Gauge-pinned trace in the chart's slice: states are then exactly
      // chart images and the recovered coordinates carry no gauge drift.
      // The step stays fixed (no growth) so the finite-difference windows in
      // the sample extraction stay accurate.
      double h = opt.domain_radius / 10.0;
      ConstrainedSystem cs(chart.system,
                           {IncidenceConstraint::through_point(p),
                            IncidenceConstraint::through_point(q)});
      VecC base_pack = chart.system.pack(chart.base);
      cs.pin_gauge(chart.system.gauge_directions(base_pack), base_pack);
      auto tr = trace_path(cs, chart.base, {z1, z2}, opt.trace_steps, h, 1e-4,
                           h);
      auto smp = geodesic_samples_from_trace(chart, opt.domain_radius, tr);
      samples.insert(samples.end(), smp.begin(), smp.end());
    } catch (const NumericError&) {
      continue;  // occasional branch-point hit; other arcs suffice
    }
  }
  fit_weyl_form(model, samples);
  return model;
}

}  // namespace mtw

#endif
