// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure.  Runs the full-size verification (several minutes).

#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "minitwistor/picard.hpp"
#include "minitwistor/real.hpp"
#include "minitwistor/weyl.hpp"

using namespace mtw;
using mtwtest::make_member;

namespace {

int failures = 0;

void report(int idx, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", idx, name,
              detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// 1. Exact lattice identities for the family class, m = 2..6.
void criterion1() {
  bool ok = true;
  for (int m = 2; m <= 6 && ok; ++m) {
    auto c = DivisorClass::severi_family(m);
    auto c2 = self_intersection(c);
    auto delta = adjunction_nodes(c);
    auto sd = severi_dimension(c2, delta);
    LatticeContext ctx{2 * m};
    ok = c2 == 2 * m && delta == m - 1 && sd.dim == 3 && sd.hypothesis_ok &&
         system_dimension(c2, delta) == m + 2 &&
         minimality_report(ctx, c).numerically_minimal;
  }
  report(1, "lattice identities m=2..6", ok, "");
}

// 2. Nullity modulo gauge = 3 at 10 states; node count preserved over 200
// continuation steps, for m = 2 and 3.
void criterion2() {
  bool ok = true;
  std::string detail;
  for (int m : {2, 3}) {
    auto cfg = random_config(m, 1, 7);
    auto pc = make_member(cfg);
    SeveriSystem sys(cfg);
    SurfacePoint p = pc.at(Complex(0.37, 0.41));
    SurfacePoint q = pc.at(Complex(-0.52, 0.18));
    // Fixed small steps: 200 states sampling the family without running the
    // adaptive controller out toward a branch point.
    auto tr = trace_geodesic(sys, pc, p, q, 200, 0.01, Complex(0), Complex(0),
                             0.01);
    if (tr.states.size() < 201) {
      ok = false;
      detail = fmt("m=%d trace stopped at %zu states", m, tr.states.size());
      break;
    }
    for (const auto& d : tr.diagnostics)
      if (d.node_count >= 0 && d.node_count != m - 1) {
        ok = false;
        detail = fmt("m=%d node count %d", m, d.node_count);
      }
    size_t stride = tr.states.size() / 10;
    for (size_t i = 0; i < 10 && ok; ++i) {
      auto rep = constraint_report(sys, tr.states[i * stride]);
      if (rep.tangent_dimension != 3 || rep.gauge_dimension != 5) {
        ok = false;
        detail = fmt("m=%d tangent dim %d at state %zu", m,
                     rep.tangent_dimension, i * stride);
      }
    }
    if (!ok) break;
  }
  report(2, "severi rank and node-count preservation", ok, detail);
}

// 3. Map-model and section-model thetas agree for 20 random tangents at 5
// states, relative residual < 1e-7.
void criterion3() {
  auto cfg = random_config(2, 1, 7);
  auto pc = make_member(cfg);
  SeveriSystem sys(cfg);
  SurfacePoint p = pc.at(Complex(0.37, 0.41));
  SurfacePoint q = pc.at(Complex(-0.52, 0.18));
  auto tr = trace_geodesic(sys, pc, p, q, 16, 0.05);
  Rng rng(5);
  double worst = 0.0;
  for (int s = 0; s < 5; ++s) {
    const ParamCurve& c = tr.states[s * 4];
    auto basis = tangent_basis(sys, c);
    auto F = implicitize(c);
    std::vector<TangentVector> sample;
    for (int t = 0; t < 20; ++t) {
      VecC coeff(3);
      for (int i = 0; i < 3; ++i) coeff(i) = rng.complex(1.0);
      sample.push_back(combine(basis, coeff));
    }
    worst = std::max(worst, tangent_model_mismatch(c, F.f, sample));
  }
  report(3, "tangent-model equivalence", worst < 1e-7,
         fmt("worst relative residual %.3e", worst));
}

// 4. Polarized discriminant gram; null-plane round trip; degenerate induced
// metric on the null surface grid.
void criterion4() {
  bool ok = true;
  std::string detail;
  QuadraticClass e[3] = {QuadraticClass(1.0, 0.0, 0.0),
                         QuadraticClass(0.0, 1.0, 0.0),
                         QuadraticClass(0.0, 0.0, 1.0)};
  double want[3][3] = {{0, 0, -2}, {0, 1, 0}, {-2, 0, 0}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (disc_pairing(e[i], e[j]) != Complex(want[i][j])) ok = false;
  if (!ok) detail = "polarization matrix mismatch";

  auto cfg = random_config(2, 1, 7);
  auto pc = make_member(cfg);
  SeveriSystem sys(cfg);
  auto basis = tangent_basis(sys, pc);
  Rng rng(9);
  double worst_rt = 0.0;
  for (int t = 0; t < 20; ++t) {
    ProjPoint z = ProjPoint::affine(rng.complex(1.0));
    auto plane = null_plane_at(basis, z);
    auto img = null_plane_to_point(pc, plane);
    worst_rt = std::max(worst_rt, proj_distance(img.witness_root, z));
  }
  if (worst_rt >= 1e-8) {
    ok = false;
    detail = fmt("round trip %.3e", worst_rt);
  }

  SurfacePoint p = pc.at(Complex(0.37, 0.41));
  auto patch = trace_null_surface(sys, pc, p, 2, 5e-3);
  double worst_deg = 0.0;
  for (double d : patch.degeneracy) worst_deg = std::max(worst_deg, d);
  if (patch.states.size() != 25 || worst_deg >= 1e-6) {
    ok = false;
    detail = fmt("grid %zu degeneracy %.3e", patch.states.size(), worst_deg);
  }
  report(4, "null structure", ok,
         ok ? fmt("round trip %.1e, degeneracy %.1e", worst_rt, worst_deg)
            : detail);
}

// 5. Branch combinatorics: 1 / 2 / 4 germ seeds, each tracing >= 20 steps.
void criterion5() {
  bool ok = true;
  std::string detail;
  auto check_seeds = [&](const PointConfig& cfg, const ParamCurve& pc,
                         const SurfacePoint& p, const SurfacePoint& q,
                         size_t want, const char* label) {
    SeveriSystem sys(cfg);
    auto seeds = branch_enumerate(pc, p, q);
    if (seeds.size() != want) {
      ok = false;
      detail = fmt("%s: %zu seeds (want %zu)", label, seeds.size(), want);
      return;
    }
    for (const auto& s : seeds) {
      try {
        auto tr = trace_geodesic(sys, pc, p, q, 20, 0.03, s.zp, s.zq);
        if (tr.states.size() < 21) {
          ok = false;
          detail = fmt("%s: trace stopped at %zu", label, tr.states.size());
        }
      } catch (const std::exception& ex) {
        ok = false;
        detail = fmt("%s: %s", label, ex.what());
      }
    }
  };
  {
    auto cfg = random_config(2, 1, 7);
    auto pc = make_member(cfg);
    SurfacePoint p = pc.at(Complex(0.37, 0.41));
    SurfacePoint q = pc.at(Complex(-0.52, 0.18));
    check_seeds(cfg, pc, p, q, 1, "generic");
    SurfacePoint nodep = pc.at(pc.node_z[0].first);
    if (ok) check_seeds(cfg, pc, nodep, q, 2, "one node");
  }
  if (ok) {
    auto cfg = random_config(3, 1, 7);
    auto pc = make_member(cfg);
    SurfacePoint n0 = pc.at(pc.node_z[0].first);
    SurfacePoint n1 = pc.at(pc.node_z[1].first);
    check_seeds(cfg, pc, n0, n1, 4, "two nodes");
  }
  report(5, "branch combinatorics 1/2/4", ok, detail);
}

// 6. Einstein-Weyl verification at full size, three refinement levels, plus
// the analytic controls.
void criterion6() {
  bool ok = true;
  std::string detail;
  // Flat control.
  {
    SurrogateModel m;
    m.domain_radius = 1.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        m.g[i][j] = Poly3::constant(i == j ? Complex(1.0 + i) : Complex(0.3));
    for (int k = 0; k < 3; ++k) m.a[k] = Poly3(2);
    auto rep = ew_residual(m);
    if (rep.residual_tracefree >= 1e-3 || rep.compat_residual >= 1e-3) {
      ok = false;
      detail = "flat control failed";
    }
  }
  // Synthetic known-(g, a) recovery.
  {
    Rng rng(3);
    SurrogateModel m;
    m.domain_radius = 1.0;
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) {
        Poly3 p(4);
        p.coef(0) = (i == j) ? Complex(1.0) : Complex(0.1, 0.05);
        for (int t = 1; t < 4; ++t) p.coef(t) = rng.complex(0.05);
        m.g[i][j] = p;
        m.g[j][i] = p;
      }
    std::array<Poly3, 3> a_true;
    for (int k = 0; k < 3; ++k) {
      a_true[k] = Poly3(2);
      for (int t = 0; t < 4; ++t) a_true[k].coef(t) = rng.complex(0.3);
    }
    SurrogateModel m_with = m;
    m_with.a = a_true;
    detail::ModelDerivs md(m_with);
    std::vector<GeodesicSample> samples;
    for (int s = 0; s < 120; ++s) {
      GeodesicSample smp;
      for (int k = 0; k < 3; ++k) smp.y(k) = rng.complex(0.5);
      for (int k = 0; k < 3; ++k) smp.T(k) = rng.complex(1.0);
      auto cp = detail::connection_at(md, smp.y);
      Complex lam = rng.complex(0.4);
      for (int k = 0; k < 3; ++k) {
        Complex acc = lam * smp.T(k);
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            acc -= cp.Gamma[k](i, j) * smp.T(i) * smp.T(j);
        smp.Acc(k) = acc;
      }
      samples.push_back(smp);
    }
    fit_weyl_form(m, samples);
    double err = 0, scale = 0;
    for (int k = 0; k < 3; ++k) {
      err = std::max(err, (m.a[k].coef - a_true[k].coef).norm());
      scale = std::max(scale, a_true[k].coef.norm());
    }
    if (err / scale >= 1e-3) {
      ok = false;
      detail = fmt("one-form recovery %.3e", err / scale);
    }
  }
  // Full m=2 pipeline over three levels.
  double tf[3] = {0, 0, 0};
  if (ok) {
    auto cfg = random_config(2, 1, 7);
    auto pc = make_member(cfg);
    SeveriSystem sys(cfg);
    auto chart = build_chart(sys, pc);
    EWPipelineOptions opt;  // radius 0.05, 500 samples, 30 geodesics
    for (int level = 0; level < 3 && ok; ++level) {
      auto model = fit_surrogate(chart, opt);
      auto rep = ew_residual(model);
      tf[level] = rep.residual_tracefree;
      if (model.geodesic_fit_residual >= 1e-3) {
        ok = false;
        detail = fmt("level %d geodesic fit %.3e", level,
                     model.geodesic_fit_residual);
      }
      if (rep.compat_residual >= 1e-10) {
        ok = false;
        detail = fmt("level %d compat %.3e", level, rep.compat_residual);
      }
      opt.domain_radius *= 0.5;
    }
    if (ok && !(tf[0] < 5e-2 && tf[1] < tf[0] && tf[2] < tf[1])) {
      ok = false;
      detail = fmt("tracefree not decreasing: %.3e %.3e %.3e", tf[0], tf[1],
                   tf[2]);
    }
  }
  report(6, "Einstein-Weyl verification", ok,
         ok ? fmt("tracefree %.2e -> %.2e -> %.2e", tf[0], tf[1], tf[2])
            : detail);
}

// 7. Real slice: reality conditions, positive metric at 10 states, sigma-fixed
// geodesics, real fitted connection.
void criterion7() {
  bool ok = true;
  std::string detail;
  try {
    auto mem = construct_real_member(2, 21);
    auto rc = reality_check(mem.curve);
    if (!rc.all()) {
      ok = false;
      detail = "reality conditions failed";
    }
    SurfacePoint pt = mem.curve.at(Complex(0.37, 0.21));
    auto tr = real_geodesic(mem.config, mem.curve, pt, 20, 0.02);
    if (tr.states.size() < 11) {
      ok = false;
      detail = fmt("geodesic stopped at %zu states", tr.states.size());
    }
    size_t stride = std::max<size_t>(1, tr.states.size() / 10);
    int checked = 0;
    for (size_t i = 0; i < tr.states.size() && checked < 10; i += stride) {
      const auto& c = tr.states[i];
      auto rci = reality_check(c);
      if (rci.equivariance_residual > 1e-6) {
        ok = false;
        detail = fmt("state %zu not sigma-fixed (%.2e)", i,
                     rci.equivariance_residual);
      }
      auto M = real_metric_at(mem.config, c, real_structure_of(mem.config, c));
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(M);
      if (es.eigenvalues()(0) <= 0.0) {
        ok = false;
        detail = fmt("metric not positive at state %zu", i);
      }
      ++checked;
    }
    if (ok) {
      auto fit = real_ew_fit(mem.config, mem.curve);
      if (fit.max_im_connection >= 1e-6 || fit.max_im_one_form >= 1e-6) {
        ok = false;
        detail = fmt("Im connection %.3e", fit.max_im_connection);
      } else {
        detail = fmt("Im connection %.1e", fit.max_im_connection);
      }
    }
  } catch (const std::exception& ex) {
    ok = false;
    detail = ex.what();
  }
  report(7, "real slice", ok, detail);
}

// 8. Negative controls.
void criterion8() {
  bool ok = true;
  std::string detail;
  // Shared-parameter m=3 configuration violates condition (*).
  std::vector<ProjPoint> s = {ProjPoint::affine(Complex(0.0)),
                              ProjPoint::affine(Complex(1.0)),
                              ProjPoint{Complex(1.0), Complex(0.0)}};
  if (condition_star_check(3, s, s)) {
    ok = false;
    detail = "condition (*) accepted the excluded configuration";
  }
  // Idle exceptional point: class reported non-minimal.
  auto c = DivisorClass::severi_family(2);
  c.mults.push_back(0);
  if (minimality_report(LatticeContext{5}, c).numerically_minimal) {
    ok = false;
    detail = "idle exceptional point reported minimal";
  }
  // Through-point system on a contracted-curve point: 0/50 convergences.
  if (ok) {
    std::vector<ProjPoint> a = {ProjPoint::affine(Complex(0.0)),
                                ProjPoint::affine(Complex(1.0))};
    std::vector<ProjPoint> b = {ProjPoint::affine(Complex(2.0)),
                                ProjPoint::affine(Complex(3.0))};
    auto cfg = cstar_config(2, {0}, a, b, Complex(0.7, 0.2));
    auto pc = make_member(cfg);
    SeveriSystem sys(cfg);
    SurfacePoint contracted(ProjPoint::affine(Complex(0.45, 0.3)),
                            ProjPoint::affine(Complex(0.0)));
    auto rep = empty_locus_probe(sys, {pc}, contracted, 50, 3);
    if (rep.convergences != 0) {
      ok = false;
      detail = fmt("%d/%d convergences on the contracted curve",
                   rep.convergences, rep.attempts);
    } else {
      detail = "0/50 convergences";
    }
  }
  report(8, "negative controls", ok, detail);
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  if (failures) std::printf("%d criterion(s) FAILED\n", failures);
  else std::printf("all 8 criteria passed\n");
  return failures ? 1 : 0;
}
