#ifndef MINITWISTOR_BINARY_FORM_HPP
#define MINITWISTOR_BINARY_FORM_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cassert>
#include <cmath>
#include <utility>
#include <vector>

#include "minitwistor/core.hpp"

namespace mtw {

// Point of CP^1 in homogeneous coordinates.
struct ProjPoint {
  Complex z0{0.0};
  Complex z1{0.0};

  ProjPoint() = default;
  ProjPoint(Complex a, Complex b) : z0(a), z1(b) {}
  static ProjPoint affine(Complex z) { return {z, Complex(1.0)}; }
  static ProjPoint infinity_point() { return {Complex(1.0), Complex(0.0)}; }

  bool is_finite(double tol = kDefaultTol) const {
    return std::abs(z1) > tol * std::max(std::abs(z0), 1.0);
  }
  Complex affine_value() const { return z0 / z1; }

  // Scale so the coordinate of largest modulus is 1.
  ProjPoint normalized() const {
    if (std::abs(z0) >= std::abs(z1)) return {Complex(1.0), z1 / z0};
    return {z0 / z1, Complex(1.0)};
  }
  // The fixed-point-free involution z -> -1/conj(z).
  ProjPoint antipode() const { return {-std::conj(z1), std::conj(z0)}; }
};

inline double proj_distance(const ProjPoint& p, const ProjPoint& q) {
  double s = std::max({std::abs(p.z0), std::abs(p.z1)}) *
             std::max({std::abs(q.z0), std::abs(q.z1)});
  if (s == 0.0) return 0.0;
  return std::abs(p.z0 * q.z1 - p.z1 * q.z0) / s;
}

inline bool proj_equal(const ProjPoint& p, const ProjPoint& q,
                       double tol = kDefaultTol) {
  return proj_distance(p, q) <= tol;
}

// Homogeneous polynomial in (z0, z1).  coeffs[j] multiplies z0^{d-j} z1^j,
// so in the affine chart z = z0/z1 the coefficient sequence reads
// highest-power-first.
class BinaryForm {
 public:
  BinaryForm() : coeffs_(1, Complex(0.0)) {}
  explicit BinaryForm(std::vector<Complex> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) coeffs_.assign(1, Complex(0.0));
  }
  static BinaryForm zero(int degree) {
    return BinaryForm(std::vector<Complex>(degree + 1, Complex(0.0)));
  }
  static BinaryForm constant(Complex c) { return BinaryForm({c}); }
  // The linear form vanishing at p = (a, b): b z0 - a z1.
  static BinaryForm vanishing_at(const ProjPoint& p) {
    return BinaryForm({p.z1, -p.z0});
  }

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<Complex>& coeffs() const { return coeffs_; }
  Complex& operator[](int j) { return coeffs_[j]; }
  Complex operator[](int j) const { return coeffs_[j]; }

  double max_abs() const {
    double m = 0.0;
    for (const auto& c : coeffs_) m = std::max(m, std::abs(c));
    return m;
  }
  bool is_zero(double tol = kDefaultTol) const { return max_abs() <= tol; }

  Complex eval(const ProjPoint& p) const {
    // Horner in the dominant variable for stability.
    if (std::abs(p.z0) <= std::abs(p.z1)) {
      Complex t = p.z0 / p.z1, acc(0.0);
      for (const auto& c : coeffs_) acc = acc * t + c;
      return acc * std::pow(p.z1, degree());
    }
    Complex t = p.z1 / p.z0, acc(0.0);
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it)
      acc = acc * t + *it;
    return acc * std::pow(p.z0, degree());
  }
  Complex eval_affine(Complex z) const { return eval(ProjPoint::affine(z)); }

  // d/dz in the affine chart z = z0/z1, homogenized to degree d-1.
  BinaryForm derivative() const {
    int d = degree();
    if (d == 0) return zero(0);
    std::vector<Complex> out(d);
    for (int j = 0; j < d; ++j) out[j] = coeffs_[j] * double(d - j);
    return BinaryForm(std::move(out));
  }

  BinaryForm operator*(const BinaryForm& o) const {
    std::vector<Complex> out(degree() + o.degree() + 1, Complex(0.0));
    for (int i = 0; i <= degree(); ++i)
      for (int j = 0; j <= o.degree(); ++j) out[i + j] += coeffs_[i] * o[j];
    return BinaryForm(std::move(out));
  }
  BinaryForm operator*(Complex s) const {
    auto out = coeffs_;
    for (auto& c : out) c *= s;
    return BinaryForm(std::move(out));
  }
  BinaryForm operator+(const BinaryForm& o) const {
    assert(degree() == o.degree());
    auto out = coeffs_;
    for (int j = 0; j <= o.degree(); ++j) out[j] += o[j];
    return BinaryForm(std::move(out));
  }
  BinaryForm operator-(const BinaryForm& o) const {
    return *this + o * Complex(-1.0);
  }

  // F(M(z0,z1)) for a 2x2 matrix M acting on (z0,z1).
  BinaryForm substitute(const Eigen::Matrix2cd& M) const {
    int d = degree();
    // new z0 = M00 z0 + M01 z1, new z1 = M10 z0 + M11 z1
    BinaryForm l0({M(0, 0), M(0, 1)});
    BinaryForm l1({M(1, 0), M(1, 1)});
    BinaryForm acc = zero(0);
    // Horner over powers of l0, l1.
    std::vector<BinaryForm> pow1(d + 1, BinaryForm({Complex(1.0)}));
    for (int j = 1; j <= d; ++j) pow1[j] = pow1[j - 1] * l1;
    BinaryForm p0({Complex(1.0)});
    BinaryForm result = zero(d);
    for (int j = d; j >= 0; --j) {
      BinaryForm term = p0 * pow1[j] * coeffs_[j];
      for (int i = 0; i <= d; ++i) result[i] += term[i];
      if (j > 0) p0 = p0 * l0;
    }
    return result;
  }

  // Infinitesimal sl2 action: (G00 z0 + G01 z1) dF/dz0 + (G10 z0 + G11 z1) dF/dz1.
  BinaryForm sl2_derivative(const Eigen::Matrix2cd& G) const {
    int d = degree();
    std::vector<Complex> out(d + 1, Complex(0.0));
    for (int j = 0; j <= d; ++j) {
      Complex c = coeffs_[j];
      // dF/dz0 term has exponent pattern z0^{d-j-1} z1^j, weight (d-j).
      if (d - j > 0) {
        out[j] += G(0, 0) * c * double(d - j);       // * z0
        if (j + 1 <= d) out[j + 1] += G(0, 1) * c * double(d - j);  // * z1
      }
      // dF/dz1 term: z0^{d-j} z1^{j-1}, weight j.
      if (j > 0) {
        out[j - 1] += G(1, 0) * c * double(j);  // * z0
        out[j] += G(1, 1) * c * double(j);      // * z1
      }
    }
    return BinaryForm(std::move(out));
  }

 private:
  std::vector<Complex> coeffs_;
};

// Coefficients (a, b, c) of a z0^2 + b z0 z1 + c z1^2.
struct QuadraticClass {
  Complex a{0.0}, b{0.0}, c{0.0};
  QuadraticClass() = default;
  QuadraticClass(Complex a_, Complex b_, Complex c_) : a(a_), b(b_), c(c_) {}
  explicit QuadraticClass(const BinaryForm& f) {
    assert(f.degree() == 2);
    a = f[0];
    b = f[1];
    c = f[2];
  }
  BinaryForm form() const { return BinaryForm({a, b, c}); }
  double max_abs() const {
    return std::max({std::abs(a), std::abs(b), std::abs(c)});
  }
};

inline Complex disc_quadratic(const QuadraticClass& q) {
  return q.b * q.b - 4.0 * q.a * q.c;
}

inline BinaryForm from_roots(const std::vector<ProjPoint>& points) {
  BinaryForm f({Complex(1.0)});
  for (const auto& p : points) f = f * BinaryForm::vanishing_at(p.normalized());
  // Monic in the first nonvanishing coefficient.
  double m = f.max_abs();
  for (int j = 0; j <= f.degree(); ++j) {
    if (std::abs(f[j]) > 1e-12 * m) {
      Complex lead = f[j];
      for (int i = 0; i <= f.degree(); ++i) f[i] /= lead;
      break;
    }
  }
  return f;
}

inline BinaryForm wronskian(const BinaryForm& p, const BinaryForm& q) {
  assert(p.degree() == q.degree());
  int d = p.degree();
  if (d == 0) return BinaryForm::zero(0);
  BinaryForm w = p * q.derivative() - p.derivative() * q;  // degree 2d-1 slot
  // Affine degree is at most 2d-2: the top z0-coefficient cancels.
  std::vector<Complex> out(2 * d - 1);
  for (int j = 0; j < 2 * d - 1; ++j) out[j] = w[j + 1];
  return BinaryForm(std::move(out));
}

struct RootWithMultiplicity {
  ProjPoint point;
  int multiplicity = 1;
  double condition = 0.0;  // cluster spread diagnostic
};

// Companion-matrix roots of the dehomogenized polynomial, with explicit
// handling of roots at infinity and multiplicity clustering.
inline std::vector<RootWithMultiplicity> roots(const BinaryForm& f,
                                               double cluster_tol = 1e-5) {
  double scale = f.max_abs();
  if (scale == 0.0) throw NumericError("roots: zero form");
  int d = f.degree();
  // Leading (z0-side) coefficients below tolerance give roots at infinity.
  int inf_mult = 0;
  while (inf_mult < d && std::abs(f[d - (d - inf_mult)]) <= 1e-12 * scale)
    ++inf_mult;
  // coeffs[0..] are z^d..z^0 in the affine chart; f[j] multiplies z^{d-j}.
  int lead = inf_mult;  // first index with |f[lead]| above tolerance
  std::vector<Complex> affine;  // monic, degree d - inf_mult
  int da = d - lead;
  affine.resize(da + 1);
  for (int j = 0; j <= da; ++j) affine[j] = f[lead + j] / f[lead];

  std::vector<Complex> raw;
  if (da > 0) {
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(da, da);
    for (int i = 1; i < da; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < da; ++i) comp(i, da - 1) = -affine[da - i];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp);
    for (int i = 0; i < da; ++i) raw.push_back(es.eigenvalues()(i));
  }

  // Greedy clustering for multiple roots.
  std::vector<RootWithMultiplicity> out;
  std::vector<bool> used(raw.size(), false);
  for (size_t i = 0; i < raw.size(); ++i) {
    if (used[i]) continue;
    std::vector<Complex> cluster{raw[i]};
    used[i] = true;
    double local = std::max(1.0, std::abs(raw[i]));
    for (size_t j = i + 1; j < raw.size(); ++j) {
      if (!used[j] && std::abs(raw[j] - raw[i]) <= cluster_tol * local) {
        cluster.push_back(raw[j]);
        used[j] = true;
      }
    }
    Complex mean(0.0);
    for (auto& z : cluster) mean += z;
    mean /= double(cluster.size());
    double spread = 0.0;
    for (auto& z : cluster) spread = std::max(spread, std::abs(z - mean));
    RootWithMultiplicity r;
    r.point = ProjPoint::affine(mean).normalized();
    r.multiplicity = static_cast<int>(cluster.size());
    r.condition = spread;
    out.push_back(r);
  }
  if (inf_mult > 0)
    out.push_back({ProjPoint::infinity_point(), inf_mult, 0.0});
  return out;
}

// Least-squares quotient q with n ~ d*q; throws if n does not vanish at the
// divisor's roots.
inline BinaryForm divide_exact(const BinaryForm& n, const BinaryForm& d,
                               double tol = kDefaultTol) {
  if (n.degree() < d.degree())
    throw DivisionResidualTooLarge("divide_exact: degree(n) < degree(d)");
  int dq = n.degree() - d.degree();
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n.degree() + 1, dq + 1);
  for (int i = 0; i <= d.degree(); ++i)
    for (int j = 0; j <= dq; ++j) A(i + j, j) = d[i];
  Eigen::VectorXcd b(n.degree() + 1);
  for (int i = 0; i <= n.degree(); ++i) b(i) = n[i];
  Eigen::VectorXcd q = A.colPivHouseholderQr().solve(b);
  double resid = (A * q - b).norm();
  double nscale = std::max(b.norm(), 1e-300);
  if (resid > tol * nscale)
    throw DivisionResidualTooLarge("divide_exact: residual " +
                                   std::to_string(resid / nscale));
  std::vector<Complex> qc(dq + 1);
  for (int j = 0; j <= dq; ++j) qc[j] = q(j);
  return BinaryForm(std::move(qc));
}

}  // namespace mtw

#endif
