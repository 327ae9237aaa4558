#ifndef MINITWISTOR_PICARD_HPP
#define MINITWISTOR_PICARD_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "minitwistor/core.hpp"

namespace mtw {

struct LatticeContext {
  int n = 0;  // number of blow-ups of P^1 x P^1
};

// Class mu^* O(k,l) - sum mults_i E_i on the n-point blow-up of the quadric.
// Multiplicities of the subtracted exceptional classes are stored positive.
struct DivisorClass {
  std::int64_t k = 0;
  std::int64_t l = 0;
  std::vector<std::int64_t> mults;

  DivisorClass() = default;
  DivisorClass(std::int64_t k_, std::int64_t l_, std::vector<std::int64_t> m)
      : k(k_), l(l_), mults(std::move(m)) {}

  static DivisorClass severi_family(int m) {
    // C = mu^* O(m,2) - sum_{i=1}^{2m} E_i, the section 5.1 family class.
    return DivisorClass(m, 2, std::vector<std::int64_t>(2 * m, 1));
  }
  static DivisorClass exceptional(const LatticeContext& ctx, int j) {
    DivisorClass e(0, 0, std::vector<std::int64_t>(ctx.n, 0));
    e.mults[j] = -1;  // E_j = -( -E_j ), i.e. mu^*O(0,0) - (-1) E_j
    return e;
  }
};

inline std::int64_t intersect(const DivisorClass& a, const DivisorClass& b) {
  if (a.mults.size() != b.mults.size())
    throw std::invalid_argument("intersect: lattice context mismatch");
  std::int64_t s = a.k * b.l + a.l * b.k;
  for (size_t i = 0; i < a.mults.size(); ++i) s -= a.mults[i] * b.mults[i];
  return s;
}

inline std::int64_t self_intersection(const DivisorClass& a) {
  return intersect(a, a);
}

inline DivisorClass canonical_class(const LatticeContext& ctx) {
  // K = mu^* O(-2,-2) + sum E_i
  return DivisorClass(-2, -2, std::vector<std::int64_t>(ctx.n, -1));
}

// delta = (C^2 + C.K)/2 + 1 (arithmetic genus of the class; the number of
// nodes of a rational member).
inline std::int64_t adjunction_nodes(const DivisorClass& c) {
  LatticeContext ctx{static_cast<int>(c.mults.size())};
  std::int64_t s = self_intersection(c) + intersect(c, canonical_class(ctx));
  if (s % 2 != 0) throw std::invalid_argument("adjunction_nodes: parity violation");
  return s / 2 + 1;
}

struct SeveriDim {
  std::int64_t dim = 0;
  bool hypothesis_ok = true;  // c2 + 1 - 2 delta > 0
};

inline SeveriDim severi_dimension(std::int64_t c2, std::int64_t delta) {
  return {c2 + 1 - 2 * delta, c2 + 1 - 2 * delta > 0};
}

inline std::int64_t system_dimension(std::int64_t c2, std::int64_t delta) {
  if (!(c2 > 2 * delta - 2))
    throw std::invalid_argument("system_dimension: hypothesis C^2 > 2 delta - 2 fails");
  return c2 + 1 - delta;
}

namespace detail {

// Enumerate m_i >= 0 with given sum, sum of squares, and dot product against
// the multiplicities of C.
inline void enumerate_mults(const std::vector<std::int64_t>& cm, size_t idx,
                            std::int64_t sum, std::int64_t sumsq,
                            std::int64_t dot, std::vector<std::int64_t>& cur,
                            std::vector<std::vector<std::int64_t>>& out) {
  if (sum < 0 || sumsq < 0 || dot < 0) return;
  if (idx == cm.size()) {
    if (sum == 0 && sumsq == 0 && dot == 0) out.push_back(cur);
    return;
  }
  // Feasibility of the residual budget over the remaining slots:
  // Cauchy-Schwarz sum^2 <= r * sumsq, and the dot target must lie between
  // min(cm) * sum and max(cm) * sum (all entries are nonnegative).
  std::int64_t r = static_cast<std::int64_t>(cm.size() - idx);
  if (sum * sum > r * sumsq) return;
  std::int64_t lo = cm[idx], hi = cm[idx];
  for (size_t j = idx + 1; j < cm.size(); ++j) {
    lo = std::min(lo, cm[j]);
    hi = std::max(hi, cm[j]);
  }
  if (dot < lo * sum || dot > hi * sum) return;
  std::int64_t cap = static_cast<std::int64_t>(std::sqrt(double(std::max<std::int64_t>(sumsq, 0))));
  for (std::int64_t v = 0; v <= std::min(sum, cap); ++v) {
    if (v * v > sumsq) break;
    cur[idx] = v;
    enumerate_mults(cm, idx + 1, sum - v, sumsq - v * v, dot - v * cm[idx],
                    cur, out);
  }
  cur[idx] = 0;
}

}  // namespace detail

// All candidate (-1)-classes E = mu^*O(k',l') - sum m'_i E_i with
// k',l',m'_i >= 0 satisfying E^2 = -1, K.E = -1, C.E = 0.  Pure exceptional
// classes E_j are handled separately by minimality_report.
inline std::vector<DivisorClass> enumerate_candidate_minus_one_classes(
    const LatticeContext& ctx, const DivisorClass& c) {
  std::vector<DivisorClass> out;
  const std::int64_t n = ctx.n;
  // K.E = -1  =>  sum m_i = 2k' + 2l' - 1
  // E^2 = -1  =>  sum m_i^2 = 2k'l' + 1
  // C.E = 0   =>  sum c_i m_i = c.k l' + c.l k'
  // Cauchy-Schwarz (sum)^2 <= n (sumsq) bounds the search box.
  std::int64_t box = 4 * n + 8;
  for (std::int64_t kp = 0; kp <= box; ++kp) {
    for (std::int64_t lp = 0; lp <= box; ++lp) {
      if (kp + lp == 0) continue;
      std::int64_t s = 2 * kp + 2 * lp - 1;
      std::int64_t q = 2 * kp * lp + 1;
      if (s < 0 || q < 0) continue;
      if (n == 0) {
        if (s != 0 || q != 0) continue;
      } else if (s * s > n * q) {
        continue;
      }
      std::int64_t dot = c.k * lp + c.l * kp;
      std::vector<std::int64_t> cur(n, 0);
      std::vector<std::vector<std::int64_t>> hits;
      detail::enumerate_mults(c.mults, 0, s, q, dot, cur, hits);
      for (auto& m : hits) out.emplace_back(kp, lp, m);
    }
  }
  return out;
}

struct MinimalityReport {
  bool numerically_minimal = true;
  std::vector<DivisorClass> candidates;  // needs geometric effectivity check
};

inline MinimalityReport minimality_report(const LatticeContext& ctx,
                                          const DivisorClass& c) {
  MinimalityReport rep;
  // Pure exceptional classes are contracted iff C.E_j = 0, i.e. mult_j = 0.
  for (int j = 0; j < ctx.n; ++j) {
    if (c.mults[j] == 0) rep.candidates.push_back(DivisorClass::exceptional(ctx, j));
  }
  auto others = enumerate_candidate_minus_one_classes(ctx, c);
  rep.candidates.insert(rep.candidates.end(), others.begin(), others.end());
  rep.numerically_minimal = rep.candidates.empty();
  return rep;
}

}  // namespace mtw

#endif
