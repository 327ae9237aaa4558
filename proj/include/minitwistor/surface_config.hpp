#ifndef MINITWISTOR_SURFACE_CONFIG_HPP
#define MINITWISTOR_SURFACE_CONFIG_HPP

#include <algorithm>
#include <optional>
#include <vector>

#include "minitwistor/biform.hpp"
#include "minitwistor/binary_form.hpp"
#include "minitwistor/core.hpp"

namespace mtw {

// Graph curve v = P(u)/Q(u) of bidegree (deg P, 1); implicit equation
// v0 Q(u) - v1 P(u) = 0.
struct RationalGraphCurve {
  BinaryForm num;  // P
  BinaryForm den;  // Q, same degree slot as P

  int bidegree_u() const { return num.degree(); }

  Complex residual_at(const SurfacePoint& pt) const {
    ProjPoint u = pt.u.normalized(), v = pt.v.normalized();
    return v.z0 * den.eval(u) - v.z1 * num.eval(u);
  }
  bool contains(const SurfacePoint& pt, double tol = 1e-7) const {
    double scale = std::max(num.max_abs(), den.max_abs());
    return std::abs(residual_at(pt)) <= tol * std::max(scale, 1.0);
  }
  SurfacePoint point_at(const ProjPoint& u) const {
    return {u.normalized(), ProjPoint(num.eval(u), den.eval(u)).normalized()};
  }
  // Bidegree (deg P, 1) implicit form.
  BiForm implicit_form() const {
    BiForm f(num.degree(), 1);
    f.set_v_slice(0, den);                       // v0 Q
    f.set_v_slice(1, num * Complex(-1.0));       // - v1 P
    return f;
  }
};

struct SplitCurvePair {
  RationalGraphCurve d1;  // bidegree (k, 1)
  RationalGraphCurve d2;  // bidegree (m-k, 1)
  Complex c{1.0};         // constant scaling d2's ratio

  // D2's effective graph is v = c * num2/den2.
  RationalGraphCurve d2_scaled() const {
    RationalGraphCurve r = d2;
    r.num = r.num * c;
    return r;
  }
};

// The m intersection points of D1 and D2; throws on a tangential contact.
inline std::vector<SurfacePoint> transversality_check(const SplitCurvePair& pair,
                                                      double tol = 1e-7) {
  const auto d2s = pair.d2_scaled();
  // P1 Q2' - P2' Q1 = 0 where P2' = c P2; pad degrees to k + (m-k).
  BinaryForm lhs = pair.d1.num * d2s.den;
  BinaryForm rhs = d2s.num * pair.d1.den;
  BinaryForm res = lhs - rhs;
  if (res.is_zero(1e-10 * std::max(lhs.max_abs(), 1.0)))
    throw TangentialIntersection("transversality_check: curves coincide");
  std::vector<SurfacePoint> out;
  for (const auto& r : roots(res)) {
    if (r.multiplicity > 1)
      throw TangentialIntersection("transversality_check: double intersection");
    out.push_back(pair.d1.point_at(r.point));
  }
  return out;
}

struct PointConfig {
  int m = 0;
  int k = 0;
  std::vector<SurfacePoint> points;  // 2m blow-up points
  std::vector<int> assignment;       // 1 or 2 per point
  SplitCurvePair curves;
  std::uint64_t seed = 0;
  bool cstar = false;
  bool toric = false;

  const RationalGraphCurve& curve_of(int idx) const {
    return assignment[idx] == 1 ? curves.d1 : scaled_d2_cache();
  }
  const RationalGraphCurve& scaled_d2_cache() const {
    if (!d2s_) d2s_ = curves.d2_scaled();
    return *d2s_;
  }

  void validate(double tol = 1e-6) const {
    if (static_cast<int>(points.size()) != 2 * m)
      throw NumericError("config: expected 2m points");
    int on1 = 0;
    for (size_t i = 0; i < points.size(); ++i) {
      const auto& own = assignment[i] == 1 ? curves.d1 : scaled_d2_cache();
      const auto& other = assignment[i] == 1 ? scaled_d2_cache() : curves.d1;
      if (!own.contains(points[i], tol))
        throw NumericError("config: point off its curve");
      if (other.contains(points[i], tol))
        throw NumericError("config: point lies on both curves");
      if (assignment[i] == 1) ++on1;
      for (size_t j = 0; j < i; ++j)
        if (surface_distance(points[i], points[j]) < 1e-6)
          throw NumericError("config: coincident points");
    }
    if (on1 != 2 * k) throw NumericError("config: split count mismatch");
    transversality_check(curves);
  }

 private:
  mutable std::optional<RationalGraphCurve> d2s_;
};

// Condition (*) of the C^*-symmetric construction: after independent
// renumbering of a and b there is a proper nonempty index subset I with the
// four value-disjointness properties.
inline bool condition_star_check(int m, const std::vector<ProjPoint>& a,
                                 const std::vector<ProjPoint>& b,
                                 double tol = 1e-8) {
  // Group each side into distinct projective values with counts.
  auto group = [&](const std::vector<ProjPoint>& v) {
    std::vector<std::pair<ProjPoint, int>> g;
    for (const auto& p : v) {
      bool found = false;
      for (auto& [q, cnt] : g)
        if (proj_equal(p, q, tol)) {
          ++cnt;
          found = true;
          break;
        }
      if (!found) g.emplace_back(p.normalized(), 1);
    }
    return g;
  };
  auto ga = group(a), gb = group(b);
  int na = static_cast<int>(ga.size()), nb = static_cast<int>(gb.size());
  auto values_meet = [&](const std::vector<ProjPoint>& x,
                         const std::vector<ProjPoint>& y) {
    for (const auto& p : x)
      for (const auto& q : y)
        if (proj_equal(p, q, tol)) return true;
    return false;
  };
  for (int sa = 0; sa < (1 << na); ++sa) {
    int ka = 0;
    std::vector<ProjPoint> in_a, out_a;
    for (int i = 0; i < na; ++i)
      if (sa & (1 << i)) {
        ka += ga[i].second;
        in_a.push_back(ga[i].first);
      } else {
        out_a.push_back(ga[i].first);
      }
    if (ka == 0 || ka == m) continue;
    for (int sb = 0; sb < (1 << nb); ++sb) {
      int kb = 0;
      std::vector<ProjPoint> in_b, out_b;
      for (int i = 0; i < nb; ++i)
        if (sb & (1 << i)) {
          kb += gb[i].second;
          in_b.push_back(gb[i].first);
        } else {
          out_b.push_back(gb[i].first);
        }
      if (kb != ka) continue;
      if (values_meet(in_a, in_b)) continue;
      if (values_meet(out_a, out_b)) continue;
      return true;
    }
  }
  return false;
}

// Subset overload: I indexes a directly (no renumbering search); used when
// the caller already fixed the split.
inline bool condition_star_holds_for(const std::vector<int>& I,
                                     const std::vector<ProjPoint>& a,
                                     const std::vector<ProjPoint>& b,
                                     double tol = 1e-8) {
  int m = static_cast<int>(a.size());
  std::vector<ProjPoint> ai, ao, bi, bo;
  std::vector<bool> in(m, false);
  for (int i : I) in[i] = true;
  for (int i = 0; i < m; ++i) {
    (in[i] ? ai : ao).push_back(a[i]);
    (in[i] ? bi : bo).push_back(b[i]);
  }
  auto meet = [&](const std::vector<ProjPoint>& x, const std::vector<ProjPoint>& y) {
    for (const auto& p : x)
      for (const auto& q : y)
        if (proj_equal(p, q, tol)) return true;
    return false;
  };
  return !meet(ai, ao) && !meet(bi, bo) && !meet(ai, bi) && !meet(ao, bo);
}

// Generic configuration: random split-curve pair with 2k points on D1 and
// 2(m-k) on D2.  Deterministic in the seed.
inline PointConfig random_config(int m, int k, std::uint64_t seed) {
  if (m < 2 || k < 1 || k >= m)
    throw std::invalid_argument("random_config: need m >= 2, 1 <= k < m");
  Rng rng(seed);
  for (int attempt = 0; attempt < 64; ++attempt) {
    PointConfig cfg;
    cfg.m = m;
    cfg.k = k;
    cfg.seed = seed;
    auto rand_form = [&](int deg) {
      std::vector<Complex> c(deg + 1);
      for (auto& x : c) x = rng.complex(1.0);
      return BinaryForm(std::move(c));
    };
    cfg.curves.d1.num = rand_form(k);
    cfg.curves.d1.den = rand_form(k);
    cfg.curves.d2.num = rand_form(m - k);
    cfg.curves.d2.den = rand_form(m - k);
    cfg.curves.c = Complex(1.0);
    try {
      transversality_check(cfg.curves);
    } catch (const TangentialIntersection&) {
      continue;
    }
    // Irreducibility of the graphs: numerator and denominator coprime.
    auto coprime = [&](const RationalGraphCurve& d) {
      for (const auto& r : roots(d.num))
        if (std::abs(d.den.eval(r.point)) < 1e-6 * std::max(d.den.max_abs(), 1.0))
          return false;
      return true;
    };
    if (!coprime(cfg.curves.d1) || !coprime(cfg.curves.d2)) continue;

    bool ok = true;
    auto place = [&](const RationalGraphCurve& own, const RationalGraphCurve& other,
                     int label, int count) {
      for (int i = 0; i < count && ok; ++i) {
        bool placed = false;
        for (int t = 0; t < 50; ++t) {
          SurfacePoint pt = own.point_at(ProjPoint::affine(rng.complex(1.2)));
          if (other.contains(pt, 1e-4)) continue;
          bool sep = true;
          for (const auto& q : cfg.points)
            if (surface_distance(pt, q) < 1e-3) sep = false;
          if (!sep) continue;
          cfg.points.push_back(pt);
          cfg.assignment.push_back(label);
          placed = true;
          break;
        }
        if (!placed) ok = false;
      }
    };
    place(cfg.curves.d1, cfg.scaled_d2_cache(), 1, 2 * k);
    place(cfg.scaled_d2_cache(), cfg.curves.d1, 2, 2 * (m - k));
    if (!ok) continue;
    cfg.validate();
    return cfg;
  }
  throw NumericError("random_config: could not build a transversal configuration");
}

// C^*-symmetric configuration: points (a_i, 0) and (b_i, infinity), curves
// from the explicit rational equations with constant c.
inline PointConfig cstar_config(int m, const std::vector<int>& I,
                                const std::vector<ProjPoint>& a,
                                const std::vector<ProjPoint>& b, Complex c) {
  if (static_cast<int>(a.size()) != m || static_cast<int>(b.size()) != m)
    throw std::invalid_argument("cstar_config: need m values of a and b");
  if (I.empty() || static_cast<int>(I.size()) >= m)
    throw std::invalid_argument("cstar_config: I must be a proper nonempty subset");
  if (!condition_star_holds_for(I, a, b))
    throw ConditionStarViolated("cstar_config: condition (*) fails for this split");

  PointConfig cfg;
  cfg.m = m;
  cfg.k = static_cast<int>(I.size());
  cfg.cstar = true;
  std::vector<bool> in(m, false);
  for (int i : I) in[i] = true;
  std::vector<ProjPoint> aI, bI, aO, bO;
  for (int i = 0; i < m; ++i) {
    (in[i] ? aI : aO).push_back(a[i]);
    (in[i] ? bI : bO).push_back(b[i]);
  }
  auto pad = [](BinaryForm f, int deg) {
    // from_roots drops degree when roots sit at infinity; restore the slot.
    while (f.degree() < deg) {
      std::vector<Complex> c2(f.coeffs());
      c2.insert(c2.begin(), Complex(0.0));
      f = BinaryForm(std::move(c2));
    }
    return f;
  };
  cfg.curves.d1.num = pad(from_roots(aI), cfg.k);
  cfg.curves.d1.den = pad(from_roots(bI), cfg.k);
  cfg.curves.d2.num = pad(from_roots(aO), m - cfg.k);
  cfg.curves.d2.den = pad(from_roots(bO), m - cfg.k);
  cfg.curves.c = c;

  ProjPoint v0(Complex(0.0), Complex(1.0));
  ProjPoint vinf(Complex(1.0), Complex(0.0));
  for (int i = 0; i < m; ++i) {
    cfg.points.emplace_back(a[i].normalized(), v0);
    cfg.assignment.push_back(in[i] ? 1 : 2);
  }
  for (int i = 0; i < m; ++i) {
    cfg.points.emplace_back(b[i].normalized(), vinf);
    cfg.assignment.push_back(in[i] ? 1 : 2);
  }
  // Toric iff {a_i, b_i} consists of exactly two projective values.
  std::vector<ProjPoint> distinct;
  for (const auto& p : a) {
    bool found = false;
    for (auto& q : distinct) found = found || proj_equal(p, q, 1e-8);
    if (!found) distinct.push_back(p);
  }
  for (const auto& p : b) {
    bool found = false;
    for (auto& q : distinct) found = found || proj_equal(p, q, 1e-8);
    if (!found) distinct.push_back(p);
  }
  cfg.toric = distinct.size() == 2;
  cfg.validate();
  return cfg;
}

}  // namespace mtw

#endif
