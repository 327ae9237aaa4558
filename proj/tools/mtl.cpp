// Command-line front end: configuration generation, lattice reports, member
// solving, traces, Einstein-Weyl verification, real slices, figure emission.
//
// Exit codes: 0 success, 1 numeric failure (diagnostic JSON emitted),
// 2 usage error.  MTL_TOL overrides the default validation tolerance.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "minitwistor/json_io.hpp"
#include "minitwistor/picard.hpp"
#include "minitwistor/real.hpp"
#include "minitwistor/weyl.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

double default_tol() {
  if (const char* env = std::getenv("MTL_TOL")) {
    double v = std::strtod(env, nullptr);
    if (v > 0) return v;
  }
  return 1e-6;
}

mtw::Json manifest(const std::string& subcommand,
                   const std::vector<std::string>& inputs,
                   const std::vector<std::string>& outputs,
                   std::uint64_t seed, double tol) {
  mtw::Json m;
  m["subcommand"] = subcommand;
  m["inputs"] = inputs;
  m["outputs"] = outputs;
  m["seed"] = seed;
  m["tolerance"] = mtw::jsonio::fp(tol);
  m["version"] = kVersion;
  return m;
}

void emit(const std::string& out_path, const mtw::Json& j) {
  if (out_path.empty())
    std::printf("%s\n", j.dump(2).c_str());
  else
    mtw::jsonio::save(out_path, j);
}

// Surface point from a comma-separated list: "u,v" (real affine values) or
// "ure,uim,vre,vim".
mtw::SurfacePoint parse_point(const std::string& s) {
  std::vector<double> vals;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) vals.push_back(std::strtod(item.c_str(), nullptr));
  mtw::Complex u, v;
  if (vals.size() == 2) {
    u = vals[0];
    v = vals[1];
  } else if (vals.size() == 4) {
    u = mtw::Complex(vals[0], vals[1]);
    v = mtw::Complex(vals[2], vals[3]);
  } else {
    throw CLI::ValidationError("--p/--q expects u,v or ure,uim,vre,vim");
  }
  return {mtw::ProjPoint::affine(u).normalized(),
          mtw::ProjPoint::affine(v).normalized()};
}

mtw::DivisorClass parse_class(const std::string& s) {
  auto colon = s.find(':');
  std::string head = s.substr(0, colon);
  mtw::DivisorClass c;
  if (std::sscanf(head.c_str(), "%ld,%ld", &c.k, &c.l) != 2)
    throw CLI::ValidationError("--class expects k,l:m1,...,mn");
  if (colon != std::string::npos) {
    std::stringstream ss(s.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ','))
      c.mults.push_back(std::strtol(item.c_str(), nullptr, 10));
  }
  return c;
}

mtw::ParamCurve solve_member(const mtw::PointConfig& config, double step) {
  auto seed_curve = mtw::reducible_seed(config);
  std::vector<int> keep;
  for (size_t i = 1; i < seed_curve.nodes.size(); ++i)
    keep.push_back(static_cast<int>(i));
  auto smoothed = mtw::smooth_one_node(seed_curve, keep, config, step);
  return mtw::parametrize(smoothed, config);
}

mtw::Json trace_to_json(const mtw::TraceResult& tr) {
  return mtw::jsonio::trace(tr);
}

// ---------------------------------------------------------------------------

int cmd_config(int m, int k, std::uint64_t seed, const std::string& out,
               double tol) {
  auto cfg = mtw::random_config(m, k, seed);
  cfg.validate(tol);
  auto j = mtw::jsonio::config(cfg);
  j["manifest"] = manifest("config", {}, {out}, seed, tol);
  emit(out, j);
  std::printf("config: m=%d k=%d seed=%llu points=%zu -> %s\n", m, k,
              (unsigned long long)seed, cfg.points.size(),
              out.empty() ? "(stdout)" : out.c_str());
  return 0;
}

int cmd_lattice(const std::string& cls, const std::string& out, double tol) {
  auto c = parse_class(cls);
  mtw::LatticeContext ctx{static_cast<int>(c.mults.size())};
  auto c2 = mtw::self_intersection(c);
  auto delta = mtw::adjunction_nodes(c);
  auto sd = mtw::severi_dimension(c2, delta);
  mtw::Json j;
  j["class"] = mtw::Json{{"k", c.k}, {"l", c.l}, {"mults", c.mults}};
  j["self_intersection"] = c2;
  j["nodes"] = delta;
  j["severi_dimension"] = sd.dim;
  j["severi_hypothesis_ok"] = sd.hypothesis_ok;
  try {
    j["system_dimension"] = mtw::system_dimension(c2, delta);
  } catch (const std::invalid_argument&) {
    j["system_dimension"] = -1;
  }
  j["index"] = c2 / 2;  // C^2 = 2m for an index-m family class
  auto rep = mtw::minimality_report(ctx, c);
  mtw::Json cands = mtw::Json::array();
  for (const auto& e : rep.candidates)
    cands.push_back(mtw::Json{{"k", e.k}, {"l", e.l}, {"mults", e.mults}});
  j["minimality"] = mtw::Json{{"numerically_minimal", rep.numerically_minimal},
                              {"candidates", cands}};
  j["manifest"] = manifest("lattice", {}, {out}, 0, tol);
  emit(out, j);
  std::printf("lattice: C^2=%ld delta=%ld severi_dim=%ld minimal=%d\n",
              (long)c2, (long)delta, (long)sd.dim,
              (int)rep.numerically_minimal);
  return 0;
}

int cmd_solve(const std::string& config_path, const std::string& out,
              double step, double tol) {
  auto cfg = mtw::jsonio::config_from(mtw::jsonio::load(config_path));
  cfg.validate(tol);
  auto pc = solve_member(cfg, step);
  mtw::SeveriSystem sys(cfg);
  auto rep = mtw::constraint_report(sys, pc);
  auto j = mtw::jsonio::curve(pc);
  j["diagnostics"] =
      mtw::Json{{"residual_norm", mtw::jsonio::fp(rep.residual_norm)},
                {"jacobian_nullity", rep.jacobian_nullity},
                {"gauge_dimension", rep.gauge_dimension},
                {"tangent_dimension", rep.tangent_dimension},
                {"node_count", (int)pc.node_z.size()}};
  j["manifest"] = manifest("solve", {config_path}, {out}, cfg.seed, tol);
  emit(out, j);
  std::printf("solve: m=%d nodes=%zu residual=%.3e tangent_dim=%d -> %s\n",
              cfg.m, pc.node_z.size(), rep.residual_norm,
              rep.tangent_dimension, out.empty() ? "(stdout)" : out.c_str());
  return 0;
}

int cmd_metric(const std::string& config_path, const std::string& curve_path,
               const std::string& out, double tol) {
  auto cfg = mtw::jsonio::config_from(mtw::jsonio::load(config_path));
  auto pc = mtw::jsonio::curve_from(mtw::jsonio::load(curve_path));
  mtw::SeveriSystem sys(cfg);
  auto mp = mtw::metric_at(sys, pc);
  mtw::Json j;
  mtw::Json gram = mtw::Json::array();
  for (int i = 0; i < 3; ++i) {
    mtw::Json row = mtw::Json::array();
    for (int jj = 0; jj < 3; ++jj) row.push_back(mtw::jsonio::cx(mp.gram(i, jj)));
    gram.push_back(row);
  }
  j["gram"] = gram;
  Eigen::JacobiSVD<Eigen::Matrix3cd> svd(mp.gram);
  mtw::Json svals = mtw::Json::array();
  for (int i = 0; i < 3; ++i)
    svals.push_back(mtw::jsonio::fp(svd.singularValues()(i)));
  j["singular_values"] = svals;
  mtw::Json basis = mtw::Json::array();
  for (const auto& t : mp.basis)
    basis.push_back(mtw::Json::array({mtw::jsonio::cx(t.theta.a),
                                      mtw::jsonio::cx(t.theta.b),
                                      mtw::jsonio::cx(t.theta.c)}));
  j["theta_basis"] = basis;
  // Null-cone round trip at a generic parameter value as a diagnostic.
  mtw::ProjPoint z = mtw::ProjPoint::affine(mtw::Complex(0.37, 0.11));
  auto plane = mtw::null_plane_at(mp.basis, z);
  auto img = mtw::null_plane_to_point(pc, plane, tol);
  j["null_cone"] =
      mtw::Json{{"witness_point", mtw::jsonio::surface_point(img.point)},
                {"witness_residual",
                 mtw::jsonio::fp(mtw::surface_distance(img.point, pc.at(z)))},
                {"branch", img.branch}};
  j["manifest"] =
      manifest("metric", {config_path, curve_path}, {out}, cfg.seed, tol);
  emit(out, j);
  std::printf("metric: svals=%.3e,%.3e,%.3e null-cone residual=%.3e\n",
              svd.singularValues()(0), svd.singularValues()(1),
              svd.singularValues()(2),
              j["null_cone"]["witness_residual"].get<double>());
  return 0;
}

int cmd_trace(const std::string& config_path, const std::string& curve_path,
              const std::string& mode, const std::string& p_str,
              const std::string& q_str, int steps, double h, int jobs,
              const std::string& out, const std::string& svg_path,
              double tol) {
  auto cfg = mtw::jsonio::config_from(mtw::jsonio::load(config_path));
  auto pc = mtw::jsonio::curve_from(mtw::jsonio::load(curve_path));
  mtw::SeveriSystem sys(cfg);
  mtw::Json j;
  mtw::TraceResult first;
  if (mode == "geodesic") {
    auto p = parse_point(p_str), q = parse_point(q_str);
    auto seeds = mtw::branch_enumerate(pc, p, q, tol);
    std::vector<mtw::TraceResult> traces(seeds.size());
    std::vector<std::string> failures(seeds.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
      for (size_t i = next++; i < seeds.size(); i = next++) {
        try {
          traces[i] = mtw::trace_geodesic(sys, pc, p, q, steps, h,
                                          seeds[i].zp, seeds[i].zq);
        } catch (const std::exception& e) {
          failures[i] = e.what();
        }
      }
    };
    int nt = std::max(1, std::min<int>(jobs, (int)seeds.size()));
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    size_t ok = 0;
    while (ok < seeds.size() && !failures[ok].empty()) ++ok;
    if (ok == seeds.size())
      throw mtw::StepFailure("trace: every branch germ failed: " + failures[0]);
    first = traces[ok];
    j = trace_to_json(first);
    j["branches"] = (int)seeds.size();
    mtw::Json extra = mtw::Json::array();
    for (size_t i = 0; i < seeds.size(); ++i) {
      if (i == ok || !failures[i].empty()) continue;
      extra.push_back(trace_to_json(traces[i]));
    }
    j["branch_traces"] = extra;
  } else if (mode == "nodal") {
    first = mtw::trace_nodal_locus(sys, pc, parse_point(p_str), steps, h);
    j = trace_to_json(first);
  } else if (mode == "nullgeo") {
    first = mtw::trace_null_geodesic(sys, pc, parse_point(p_str), steps, h);
    j = trace_to_json(first);
  } else if (mode == "nullsurf") {
    auto patch = mtw::trace_null_surface(sys, pc, parse_point(p_str));
    // Present the grid in the trace layout; the degeneracy ratio of the
    // restricted gram rides in the theta_disc_ratio slot.
    for (size_t i = 0; i < patch.states.size(); ++i) {
      first.states.push_back(patch.states[i]);
      first.aux.push_back({patch.tracked_z[i]});
      first.arc_params.push_back((double)i);
      mtw::StepDiagnostics d;
      d.arc_param = (double)i;
      d.theta_disc_ratio = patch.degeneracy[i];
      d.min_preimage_separation =
          mtw::detail::min_preimage_separation(patch.states[i],
                                               {patch.tracked_z[i]});
      first.diagnostics.push_back(d);
    }
    j = trace_to_json(first);
    j["half_width"] = patch.half_width;
  } else {
    throw CLI::ValidationError(
        "--mode must be geodesic|nullsurf|nodal|nullgeo");
  }
  j["mode"] = mode;
  j["manifest"] =
      manifest("trace", {config_path, curve_path}, {out}, cfg.seed, tol);
  emit(out, j);
  if (!svg_path.empty()) {
    std::ofstream svg(svg_path);
    svg << mtw::render_displacement_svg(first);
  }
  std::printf("trace: mode=%s states=%zu branch_hit=%d -> %s\n", mode.c_str(),
              first.states.size(), (int)first.hit_branch_point,
              out.empty() ? "(stdout)" : out.c_str());
  return 0;
}

int cmd_ew_check(const std::string& config_path, const std::string& curve_path,
                 int levels, double radius, int samples, int geodesics,
                 std::uint64_t seed, int jobs, const std::string& out,
                 const std::string& csv_path, double tol) {
  auto cfg = mtw::jsonio::config_from(mtw::jsonio::load(config_path));
  cfg.scaled_d2_cache();  // warm the lazy cache before threading
  auto pc = mtw::jsonio::curve_from(mtw::jsonio::load(curve_path));
  mtw::SeveriSystem sys(cfg);
  auto chart = mtw::build_chart(sys, pc);
  struct Level {
    double radius;
    mtw::SurrogateModel model;
    mtw::EWReport report;
    std::string failure;
  };
  std::vector<Level> lv(levels);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int i = next++; i < levels; i = next++) {
      mtw::EWPipelineOptions opt;
      opt.domain_radius = radius / std::pow(2.0, i);
      opt.metric_samples = samples;
      opt.geodesic_count = geodesics;
      opt.seed = seed;
      lv[i].radius = opt.domain_radius;
      try {
        lv[i].model = mtw::fit_surrogate(chart, opt);
        lv[i].report = mtw::ew_residual(lv[i].model);
      } catch (const std::exception& e) {
        lv[i].failure = e.what();
      }
    }
  };
  int nt = std::max(1, std::min(jobs, levels));
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (auto& l : lv)
    if (!l.failure.empty()) throw mtw::NumericError("ew-check: " + l.failure);
  mtw::Json j;
  j["levels"] = mtw::Json::array();
  bool monotone = true;
  for (int i = 0; i < levels; ++i) {
    if (i > 0 &&
        lv[i].report.residual_tracefree >= lv[i - 1].report.residual_tracefree)
      monotone = false;
    j["levels"].push_back(mtw::Json{
        {"level", i},
        {"domain_radius", mtw::jsonio::fp(lv[i].radius)},
        {"metric_fit_residual", mtw::jsonio::fp(lv[i].model.metric_fit_residual)},
        {"geodesic_fit_residual",
         mtw::jsonio::fp(lv[i].model.geodesic_fit_residual)},
        {"compat_residual", mtw::jsonio::fp(lv[i].report.compat_residual)},
        {"residual_tracefree",
         mtw::jsonio::fp(lv[i].report.residual_tracefree)}});
  }
  j["monotone_tracefree"] = monotone;
  j["manifest"] =
      manifest("ew-check", {config_path, curve_path}, {out, csv_path},
               seed, tol);
  emit(out, j);
  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    csv << "level,domain_radius,metric_fit_residual,geodesic_fit_residual,"
           "compat_residual,residual_tracefree\n";
    for (int i = 0; i < levels; ++i) {
      char buf[256];
      std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g,%.12g,%.12g\n", i,
                    lv[i].radius, lv[i].model.metric_fit_residual,
                    lv[i].model.geodesic_fit_residual,
                    lv[i].report.compat_residual,
                    lv[i].report.residual_tracefree);
      csv << buf;
    }
  }
  std::printf("ew-check: levels=%d tracefree[last]=%.3e monotone=%d\n", levels,
              lv[levels - 1].report.residual_tracefree, (int)monotone);
  return 0;
}

int cmd_real(int m, std::uint64_t seed, int steps, double h, bool run_fit,
             const std::string& out, const std::string& csv_path, double tol) {
  auto mem = mtw::construct_real_member(m, seed);
  auto rep = mtw::reality_check(mem.curve, tol);
  auto M = mtw::real_metric_at(mem.config, mem.curve, mem.data);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(M);
  mtw::Json j;
  j["m"] = m;
  j["seed"] = seed;
  j["config"] = mtw::jsonio::config(mem.config);
  j["curve"] = mtw::jsonio::curve(mem.curve);
  mtw::Json pairing = mtw::Json::array();
  for (const auto& [s, t] : mem.data.node_pairing)
    pairing.push_back(mtw::Json::array(
        {mtw::Json::array({mtw::jsonio::cx(s.z0), mtw::jsonio::cx(s.z1)}),
         mtw::Json::array({mtw::jsonio::cx(t.z0), mtw::jsonio::cx(t.z1)})}));
  j["structure"] = mtw::Json{{"h", mtw::jsonio::cx(mem.data.h)},
                             {"theta_phase", mtw::jsonio::cx(mem.data.theta_phase)},
                             {"h_spread", mtw::jsonio::fp(mem.data.h_spread)},
                             {"node_pairing", pairing}};
  j["reality"] = mtw::Json{
      {"invariant", rep.invariant},
      {"branch_exchange", rep.branch_exchange},
      {"no_offnode_real_points", rep.no_offnode_real_points},
      {"equivariance_residual", mtw::jsonio::fp(rep.equivariance_residual)},
      {"node_pairing_residual", mtw::jsonio::fp(rep.node_pairing_residual)},
      {"min_offnode_real_distance",
       mtw::jsonio::fp(rep.min_offnode_real_distance)}};
  mtw::Json eigs = mtw::Json::array();
  for (int i = 0; i < 3; ++i) eigs.push_back(mtw::jsonio::fp(es.eigenvalues()(i)));
  j["metric_eigenvalues"] = eigs;
  // One real geodesic from a generic point of the member.
  mtw::Rng rng(seed + 17);
  auto p = mem.curve.at(rng.complex(0.7));
  auto tr = mtw::real_geodesic(mem.config, mem.curve, p, steps, h);
  j["geodesic"] = trace_to_json(tr);
  if (run_fit) {
    auto fit = mtw::real_ew_fit(mem.config, mem.curve);
    j["ew_fit"] = mtw::Json{
        {"gram_im_residual", mtw::jsonio::fp(fit.gram_im_residual)},
        {"metric_fit_residual",
         mtw::jsonio::fp(fit.model.metric_fit_residual)},
        {"geodesic_fit_residual", mtw::jsonio::fp(fit.geodesic_fit_residual)},
        {"max_im_connection", mtw::jsonio::fp(fit.max_im_connection)},
        {"max_im_one_form", mtw::jsonio::fp(fit.max_im_one_form)}};
  }
  j["manifest"] = manifest("real", {}, {out, csv_path}, seed, tol);
  emit(out, j);
  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    csv << "state,arc_param,eig1,eig2,eig3\n";
    for (size_t i = 0; i < tr.states.size(); ++i) {
      auto Mi = mtw::real_metric_at(
          mem.config, tr.states[i],
          mtw::real_structure_of(mem.config, tr.states[i]));
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> esi(Mi);
      char buf[200];
      std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g,%.12g,%.12g\n", i,
                    tr.arc_params[i], esi.eigenvalues()(0),
                    esi.eigenvalues()(1), esi.eigenvalues()(2));
      csv << buf;
    }
  }
  std::printf("real: m=%d eigs=%.3e,%.3e,%.3e h_spread=%.1e states=%zu\n", m,
              es.eigenvalues()(0), es.eigenvalues()(1), es.eigenvalues()(2),
              mem.data.h_spread, tr.states.size());
  return 0;
}

int cmd_render(const std::string& trace_path, const std::string& out,
               int max_states) {
  auto tr = mtw::jsonio::trace_from(mtw::jsonio::load(trace_path));
  std::ofstream svg(out);
  if (!svg) throw std::runtime_error("cannot write " + out);
  svg << mtw::render_displacement_svg(tr, max_states);
  std::printf("render: %zu states -> %s\n", tr.states.size(), out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"minitwistor surfaces, Severi varieties, Einstein-Weyl checks"};
  app.require_subcommand(1);
  double tol = default_tol();

  // config
  auto* c_config = app.add_subcommand("config", "generate a surface configuration");
  int cfg_m = 2, cfg_k = 1;
  std::uint64_t cfg_seed = 1;
  std::string cfg_out;
  c_config->add_option("--m", cfg_m, "index (2m blow-up points)")->required();
  c_config->add_option("--k", cfg_k, "bidegree split (k,1)+(m-k,1)");
  c_config->add_option("--seed", cfg_seed, "random seed");
  c_config->add_option("--out", cfg_out, "output JSON path");

  // lattice
  auto* c_lat = app.add_subcommand("lattice", "lattice report for a class");
  std::string lat_class, lat_out;
  c_lat->add_option("--class", lat_class, "class as k,l:m1,...,mn")->required();
  c_lat->add_option("--out", lat_out, "output JSON path");

  // solve
  auto* c_solve = app.add_subcommand("solve", "construct an (m-1)-nodal member");
  std::string sol_cfg, sol_out;
  double sol_step = 0.5;
  c_solve->add_option("--config", sol_cfg, "config JSON")->required();
  c_solve->add_option("--out", sol_out, "output curve JSON");
  c_solve->add_option("--step", sol_step, "node smoothing step");

  // metric
  auto* c_metric = app.add_subcommand("metric", "conformal gram + null cone");
  std::string met_cfg, met_curve, met_out;
  c_metric->add_option("--config", met_cfg, "config JSON")->required();
  c_metric->add_option("--curve", met_curve, "curve JSON")->required();
  c_metric->add_option("--out", met_out, "output JSON path");

  // trace
  auto* c_trace = app.add_subcommand("trace", "continuation traces");
  std::string tr_cfg, tr_curve, tr_mode = "geodesic", tr_p, tr_q, tr_out,
              tr_svg;
  int tr_steps = 30, tr_jobs = 1;
  double tr_h = 0.02;
  c_trace->add_option("--config", tr_cfg, "config JSON")->required();
  c_trace->add_option("--curve", tr_curve, "curve JSON")->required();
  c_trace->add_option("--mode", tr_mode, "geodesic|nullsurf|nodal|nullgeo");
  c_trace->add_option("--p", tr_p, "surface point u,v")->required();
  c_trace->add_option("--q", tr_q, "second point (geodesic mode)");
  c_trace->add_option("--steps", tr_steps, "continuation steps");
  c_trace->add_option("--step", tr_h, "step size");
  c_trace->add_option("--jobs", tr_jobs, "parallel branch traces");
  c_trace->add_option("--out", tr_out, "output JSON path");
  c_trace->add_option("--svg", tr_svg, "optional SVG figure path");

  // ew-check
  auto* c_ew = app.add_subcommand("ew-check", "Einstein-Weyl verification");
  std::string ew_cfg, ew_curve, ew_out, ew_csv;
  int ew_levels = 3, ew_samples = 500, ew_geos = 30, ew_jobs = 1;
  double ew_radius = 0.05;
  std::uint64_t ew_seed = 11;
  c_ew->add_option("--config", ew_cfg, "config JSON")->required();
  c_ew->add_option("--curve", ew_curve, "curve JSON")->required();
  c_ew->add_option("--levels", ew_levels, "refinement levels");
  c_ew->add_option("--radius", ew_radius, "chart radius at level 0");
  c_ew->add_option("--samples", ew_samples, "metric samples per level");
  c_ew->add_option("--geodesics", ew_geos, "geodesic count per level");
  c_ew->add_option("--seed", ew_seed, "sample seed");
  c_ew->add_option("--jobs", ew_jobs, "parallel levels");
  c_ew->add_option("--out", ew_out, "report JSON path");
  c_ew->add_option("--csv", ew_csv, "residual CSV path");

  // real
  auto* c_real = app.add_subcommand("real", "real member + real slice checks");
  int re_m = 2, re_steps = 20;
  std::uint64_t re_seed = 1;
  double re_h = 0.02;
  bool re_fit = false;
  std::string re_out, re_csv;
  c_real->add_option("--m", re_m, "index (must be even)")->required();
  c_real->add_option("--seed", re_seed, "random seed");
  c_real->add_option("--steps", re_steps, "geodesic steps");
  c_real->add_option("--step", re_h, "geodesic step size");
  c_real->add_flag("--fit", re_fit, "also run the real-slice EW fit");
  c_real->add_option("--out", re_out, "output JSON path");
  c_real->add_option("--csv", re_csv, "per-state eigenvalue CSV");

  // render
  auto* c_render = app.add_subcommand("render", "SVG figure from a trace");
  std::string rd_trace, rd_out;
  int rd_max = 9;
  c_render->add_option("--trace", rd_trace, "trace JSON")->required();
  c_render->add_option("--out", rd_out, "SVG output path")->required();
  c_render->add_option("--max-states", rd_max, "curves drawn");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::string sub = app.get_subcommands().front()->get_name();
  try {
    if (c_config->parsed()) return cmd_config(cfg_m, cfg_k, cfg_seed, cfg_out, tol);
    if (c_lat->parsed()) return cmd_lattice(lat_class, lat_out, tol);
    if (c_solve->parsed()) return cmd_solve(sol_cfg, sol_out, sol_step, tol);
    if (c_metric->parsed()) return cmd_metric(met_cfg, met_curve, met_out, tol);
    if (c_trace->parsed())
      return cmd_trace(tr_cfg, tr_curve, tr_mode, tr_p, tr_q, tr_steps, tr_h,
                       tr_jobs, tr_out, tr_svg, tol);
    if (c_ew->parsed())
      return cmd_ew_check(ew_cfg, ew_curve, ew_levels, ew_radius, ew_samples,
                          ew_geos, ew_seed, ew_jobs, ew_out, ew_csv, tol);
    if (c_real->parsed())
      return cmd_real(re_m, re_seed, re_steps, re_h, re_fit, re_out, re_csv,
                      tol);
    if (c_render->parsed()) return cmd_render(rd_trace, rd_out, rd_max);
  } catch (const std::exception& e) {
    mtw::Json err;
    err["error"] = e.what();
    err["subcommand"] = sub;
    err["detail"] = "numeric or input failure; see error string";
    std::fprintf(stderr, "%s\n", err.dump(2).c_str());
    return 1;
  }
  return 2;
}
