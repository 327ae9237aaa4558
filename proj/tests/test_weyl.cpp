#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "minitwistor/weyl.hpp"

using namespace mtw;
using mtwtest::make_member;

namespace {

SurrogateModel flat_model() {
  SurrogateModel m;
  m.domain_radius = 1.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      m.g[i][j] = Poly3::constant(i == j ? Complex(1.0 + i) : Complex(0.3));
  for (int k = 0; k < 3; ++k) m.a[k] = Poly3(2);
  return m;
}

// Degree-4 Taylor model of the constant-curvature metric
// g_ij = delta_ij (1 + kappa r^2)^{-2}, sectional curvature 4 kappa.
SurrogateModel space_form_model(double kappa) {
  SurrogateModel m;
  m.domain_radius = 1.0;
  const auto& mono = monomials3(4);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Poly3 p(4);
      if (i == j) {
        for (size_t t = 0; t < mono.size(); ++t) {
          auto e = mono[t];
          int tot = e[0] + e[1] + e[2];
          if (tot == 0) p.coef(t) = 1.0;
          if (tot == 2 && (e[0] == 2 || e[1] == 2 || e[2] == 2))
            p.coef(t) = -2.0 * kappa;
          if (tot == 4) {
            if (e[0] == 4 || e[1] == 4 || e[2] == 4)
              p.coef(t) = 3.0 * kappa * kappa;
            else if (e[0] != 1 && e[1] != 1 && e[2] != 1)
              p.coef(t) = 6.0 * kappa * kappa;
          }
        }
      }
      m.g[i][j] = p;
    }
  for (int k = 0; k < 3; ++k) m.a[k] = Poly3(2);
  return m;
}

}  // namespace

TEST_CASE("flat control: all residuals vanish") {
  auto rep = ew_residual(flat_model());
  CHECK(rep.residual_tracefree < 1e-12);
  CHECK(rep.compat_residual < 1e-12);
}

TEST_CASE("space form control: Einstein, lambda matches the curvature") {
  double kappa = 0.01;
  auto rep = ew_residual(space_form_model(kappa));
  CHECK(rep.residual_tracefree < 1e-3);
  CHECK(rep.compat_residual < 1e-12);
  // Ricci = 2K g with K = 4 kappa, so the lambda field is 8 kappa at 0 (up
  // to the degree-4 truncation error).
  CHECK(std::abs(std::abs(rep.lambda_field.coef(0)) - 8.0 * kappa) <
        1e-2 * 8.0 * kappa);
}

TEST_CASE("synthetic samples recover a known one-form") {
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
  CHECK(err / scale < 1e-3);
  CHECK(m.geodesic_fit_residual < 1e-8);
}

TEST_CASE("pinned chart at a member") {
  auto cfg = random_config(2, 1, 7);
  auto pc = make_member(cfg);
  SeveriSystem sys(cfg);
  auto chart = build_chart(sys, pc);
  // Base gram is a positive multiple of the identity by construction.
  CHECK(std::abs(chart.gram0(0, 1)) + std::abs(chart.gram0(0, 2)) +
            std::abs(chart.gram0(1, 2)) <
        1e-10 * std::abs(chart.gram0(0, 0)));
  CHECK(std::abs(chart.gram0(0, 0) - chart.gram0(2, 2)) <
        1e-10 * std::abs(chart.gram0(0, 0)));
  // Coordinates round trip through the pinned solve.
  Vec3 x(Complex(0.012, 0.005), Complex(-0.008, 0.011),
         Complex(0.004, -0.013));
  auto st = chart_to_state(chart, x);
  CHECK((state_to_chart(chart, st) - x).norm() < 1e-10);
}

TEST_CASE("pipeline level yields small fit residuals") {
  auto cfg = random_config(2, 1, 7);
  auto pc = make_member(cfg);
  SeveriSystem sys(cfg);
  auto chart = build_chart(sys, pc);
  EWPipelineOptions opt;
  opt.metric_samples = 150;
  opt.geodesic_count = 10;
  auto model = fit_surrogate(chart, opt);
  auto rep = ew_residual(model);
  CHECK(model.metric_fit_residual < 1e-3);
  CHECK(model.geodesic_fit_residual < 1e-3);
  CHECK(rep.compat_residual < 1e-10);
  // Reduced sample count for speed; the acceptance gate runs the full-size
  // pipeline with the tighter threshold.
  CHECK(rep.residual_tracefree < 0.15);
}
