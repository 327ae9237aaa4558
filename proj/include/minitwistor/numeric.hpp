#ifndef MINITWISTOR_NUMERIC_HPP
#define MINITWISTOR_NUMERIC_HPP

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <functional>
#include <limits>

#include "minitwistor/core.hpp"

namespace mtw {

using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;

using ResidualFn = std::function<VecC(const VecC&)>;

// Central-difference jacobian.  All systems here are holomorphic, so the
// truncation error is O(h^2); h near the rounding/truncation crossover
// eps^(1/3) keeps the entry noise at ~1e-11.
inline MatC numeric_jacobian(const ResidualFn& f, const VecC& x,
                             double h = 1e-5) {
  VecC r0 = f(x);
  MatC J(r0.size(), x.size());
  for (int j = 0; j < x.size(); ++j) {
    VecC xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    J.col(j) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return J;
}

struct GaussNewtonOptions {
  int max_iters = 40;
  double tol = 1e-12;        // residual norm target (relative to scale)
  double scale = 1.0;        // problem scale for the tolerance
  double max_step = 1e3;     // diverged if a step exceeds this
  double svd_threshold = 1e-8;
};

struct GaussNewtonResult {
  VecC x;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Minimum-norm Gauss-Newton; rank-deficient jacobians (gauge directions,
// positive-dimensional solution sets) are handled by the SVD pseudo-inverse.
inline GaussNewtonResult gauss_newton(const ResidualFn& f, VecC x,
                                      const GaussNewtonOptions& opt = {}) {
  GaussNewtonResult out;
  out.x = x;
  out.residual_norm = std::numeric_limits<double>::infinity();
  for (int it = 0; it <= opt.max_iters; ++it) {
    VecC r = f(x);
    double rn = r.norm();
    // Near the numeric-jacobian noise floor the iteration dithers; keep the
    // best iterate seen rather than the last.
    if (rn < out.residual_norm) {
      out.residual_norm = rn;
      out.x = x;
      out.iterations = it;
    }
    if (rn <= opt.tol * opt.scale || it == opt.max_iters) break;
    MatC J = numeric_jacobian(f, x);
    Eigen::JacobiSVD<MatC> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(opt.svd_threshold);
    VecC dx = -svd.solve(r);
    if (!dx.allFinite() || dx.norm() > opt.max_step) break;
    x += dx;
  }
  out.converged = out.residual_norm <= opt.tol * opt.scale;
  return out;
}

// Orthonormal basis of the numeric nullspace of J (right singular vectors
// with singular value below threshold * sigma_max).
inline MatC nullspace(const MatC& J, double rel_threshold = 1e-7) {
  Eigen::JacobiSVD<MatC> svd(J, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  double smax = s.size() ? s(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > rel_threshold * std::max(smax, 1e-300)) ++rank;
  int dim = static_cast<int>(J.cols()) - rank;
  return svd.matrixV().rightCols(dim);
}

inline int numeric_rank(const MatC& J, double rel_threshold = 1e-7) {
  return static_cast<int>(J.cols()) -
         static_cast<int>(nullspace(J, rel_threshold).cols());
}

// Project the columns of V onto the orthogonal complement of span(G)
// (Hermitian inner product), then re-orthonormalize; near-zero columns drop.
// The drop threshold separates genuine residual directions (norm O(1) for an
// orthonormal input basis) from projection noise, which sits at the accuracy
// of the numeric kernel (~1e-8); keep it well above that.
inline MatC project_out(const MatC& V, const MatC& G, double drop = 1e-4) {
  MatC W = V;
  if (G.cols() > 0) {
    Eigen::HouseholderQR<MatC> qr(G);
    MatC Q = qr.householderQ() * MatC::Identity(G.rows(), G.cols());
    W -= Q * (Q.adjoint() * W);
  }
  // Column-wise Gram-Schmidt with drops.
  MatC out(W.rows(), W.cols());
  int kept = 0;
  for (int j = 0; j < W.cols(); ++j) {
    VecC v = W.col(j);
    for (int i = 0; i < kept; ++i) v -= out.col(i).dot(v) * out.col(i);
    if (v.norm() > drop) out.col(kept++) = v / v.norm();
  }
  return out.leftCols(kept);
}

}  // namespace mtw

#endif
