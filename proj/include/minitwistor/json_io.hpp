#ifndef MINITWISTOR_JSON_IO_HPP
#define MINITWISTOR_JSON_IO_HPP

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "minitwistor/nodal_curve.hpp"
#include "minitwistor/surface_config.hpp"
#include "minitwistor/trace.hpp"

namespace mtw {

using Json = nlohmann::ordered_json;

namespace jsonio {

// All floating values pass through a fixed-precision round trip so output
// bytes depend only on the mathematical content, not on accumulation order
// noise below the serialization precision.
inline double fp(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

inline Json cx(Complex z) { return Json::array({fp(z.real()), fp(z.imag())}); }

inline Complex cx_from(const Json& j) {
  return Complex(j.at(0).get<double>(), j.at(1).get<double>());
}

inline Json form(const BinaryForm& f) {
  Json out = Json::array();
  for (int i = 0; i <= f.degree(); ++i) out.push_back(cx(f[i]));
  return out;
}

inline BinaryForm form_from(const Json& j) {
  std::vector<Complex> c;
  for (const auto& e : j) c.push_back(cx_from(e));
  return BinaryForm(std::move(c));
}

// Surface points in the interchange format are affine (u, v) pairs.
inline Json surface_point(const SurfacePoint& p) {
  ProjPoint u = p.u.normalized(), v = p.v.normalized();
  if (std::abs(u.z1) < 1e-12 || std::abs(v.z1) < 1e-12)
    throw NumericError("json: surface point at infinity has no affine form");
  return Json::array({cx(u.z0 / u.z1), cx(v.z0 / v.z1)});
}

inline SurfacePoint surface_point_from(const Json& j) {
  return {ProjPoint::affine(cx_from(j.at(0))).normalized(),
          ProjPoint::affine(cx_from(j.at(1))).normalized()};
}

inline Json graph_curve(const RationalGraphCurve& c) {
  return Json{{"num", form(c.num)}, {"den", form(c.den)}};
}

inline RationalGraphCurve graph_curve_from(const Json& j) {
  return {form_from(j.at("num")), form_from(j.at("den"))};
}

inline Json config(const PointConfig& c) {
  Json out;
  out["m"] = c.m;
  out["k"] = c.k;
  out["points"] = Json::array();
  for (const auto& p : c.points) out["points"].push_back(surface_point(p));
  out["assignment"] = c.assignment;
  out["curves"] = Json{{"d1", graph_curve(c.curves.d1)},
                       {"d2", graph_curve(c.curves.d2)},
                       {"c", cx(c.curves.c)}};
  out["seed"] = c.seed;
  out["cstar"] = c.cstar;
  out["toric"] = c.toric;
  return out;
}

inline PointConfig config_from(const Json& j) {
  PointConfig c;
  c.m = j.at("m").get<int>();
  c.k = j.at("k").get<int>();
  for (const auto& e : j.at("points"))
    c.points.push_back(surface_point_from(e));
  c.assignment = j.at("assignment").get<std::vector<int>>();
  c.curves.d1 = graph_curve_from(j.at("curves").at("d1"));
  c.curves.d2 = graph_curve_from(j.at("curves").at("d2"));
  c.curves.c = cx_from(j.at("curves").at("c"));
  c.seed = j.value("seed", std::uint64_t(0));
  c.cstar = j.value("cstar", false);
  c.toric = j.value("toric", false);
  return c;
}

inline Json curve(const ParamCurve& c) {
  Json out;
  out["u0"] = form(c.u0);
  out["u1"] = form(c.u1);
  out["v0"] = form(c.v0);
  out["v1"] = form(c.v1);
  out["base_z"] = Json::array();
  for (auto z : c.base_z) out["base_z"].push_back(cx(z));
  out["node_z"] = Json::array();
  for (const auto& [s, t] : c.node_z)
    out["node_z"].push_back(Json::array({cx(s), cx(t)}));
  return out;
}

inline ParamCurve curve_from(const Json& j) {
  ParamCurve c;
  c.u0 = form_from(j.at("u0"));
  c.u1 = form_from(j.at("u1"));
  c.v0 = form_from(j.at("v0"));
  c.v1 = form_from(j.at("v1"));
  for (const auto& e : j.at("base_z")) c.base_z.push_back(cx_from(e));
  for (const auto& e : j.at("node_z"))
    c.node_z.emplace_back(cx_from(e.at(0)), cx_from(e.at(1)));
  return c;
}

inline Json trace(const TraceResult& t) {
  Json out;
  out["states"] = Json::array();
  for (const auto& c : t.states) out["states"].push_back(curve(c));
  out["aux"] = Json::array();
  for (const auto& a : t.aux) {
    Json row = Json::array();
    for (auto z : a) row.push_back(cx(z));
    out["aux"].push_back(row);
  }
  out["arc_params"] = Json::array();
  for (double a : t.arc_params) out["arc_params"].push_back(fp(a));
  out["diagnostics"] = Json::array();
  for (const auto& d : t.diagnostics)
    out["diagnostics"].push_back(
        Json{{"arc_param", fp(d.arc_param)},
             {"step", fp(d.step)},
             {"newton_iterations", d.newton_iterations},
             {"node_count", d.node_count},
             {"theta_disc_ratio", fp(d.theta_disc_ratio)},
             {"null_tangent", d.null_tangent},
             {"min_preimage_separation", fp(d.min_preimage_separation)}});
  out["hit_branch_point"] = t.hit_branch_point;
  return out;
}

inline TraceResult trace_from(const Json& j) {
  TraceResult t;
  for (const auto& e : j.at("states")) t.states.push_back(curve_from(e));
  for (const auto& row : j.at("aux")) {
    std::vector<Complex> a;
    for (const auto& e : row) a.push_back(cx_from(e));
    t.aux.push_back(a);
  }
  for (const auto& e : j.at("arc_params")) t.arc_params.push_back(e.get<double>());
  for (const auto& e : j.at("diagnostics")) {
    StepDiagnostics d;
    d.arc_param = e.at("arc_param").get<double>();
    d.step = e.at("step").get<double>();
    d.newton_iterations = e.at("newton_iterations").get<int>();
    d.node_count = e.at("node_count").get<int>();
    d.theta_disc_ratio = e.at("theta_disc_ratio").get<double>();
    d.null_tangent = e.at("null_tangent").get<bool>();
    d.min_preimage_separation = e.at("min_preimage_separation").get<double>();
    t.diagnostics.push_back(d);
  }
  t.hit_branch_point = j.at("hit_branch_point").get<bool>();
  return t;
}

inline Json load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return Json::parse(in);
}

inline void save(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

// -------------------------------------------------------------------------
// Minimal structural validator for the shipped schema files (the subset of
// JSON Schema they use: type, properties, required, items, enum, minItems).

inline void validate(const Json& value, const Json& schema,
                     const std::string& path, std::vector<std::string>& errors);

inline bool type_matches(const Json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "number") return v.is_number();
  if (t == "integer") return v.is_number_integer() || v.is_number_unsigned();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  return false;
}

inline void validate(const Json& value, const Json& schema,
                     const std::string& path,
                     std::vector<std::string>& errors) {
  if (schema.contains("type")) {
    const auto& t = schema.at("type");
    bool ok = t.is_array()
                  ? std::any_of(t.begin(), t.end(),
                                [&](const Json& e) {
                                  return type_matches(value, e.get<std::string>());
                                })
                  : type_matches(value, t.get<std::string>());
    if (!ok) {
      errors.push_back(path + ": type mismatch");
      return;
    }
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const auto& e : schema.at("enum")) ok = ok || e == value;
    if (!ok) errors.push_back(path + ": not in enum");
  }
  if (value.is_object()) {
    if (schema.contains("required"))
      for (const auto& r : schema.at("required"))
        if (!value.contains(r.get<std::string>()))
          errors.push_back(path + ": missing " + r.get<std::string>());
    if (schema.contains("properties"))
      for (auto it = schema.at("properties").begin();
           it != schema.at("properties").end(); ++it)
        if (value.contains(it.key()))
          validate(value.at(it.key()), it.value(), path + "/" + it.key(),
                   errors);
  }
  if (value.is_array()) {
    if (schema.contains("minItems") &&
        value.size() < schema.at("minItems").get<size_t>())
      errors.push_back(path + ": too few items");
    if (schema.contains("items")) {
      const auto& items = schema.at("items");
      for (size_t i = 0; i < value.size(); ++i)
        validate(value.at(i), items, path + "/" + std::to_string(i), errors);
    }
  }
}

inline std::vector<std::string> validate_against(const Json& value,
                                                 const Json& schema) {
  std::vector<std::string> errors;
  validate(value, schema, "#", errors);
  return errors;
}

}  // namespace jsonio
}  // namespace mtw

#endif
