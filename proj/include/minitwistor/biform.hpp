#ifndef MINITWISTOR_BIFORM_HPP
#define MINITWISTOR_BIFORM_HPP

#include <cassert>
#include <vector>

#include "minitwistor/binary_form.hpp"
#include "minitwistor/core.hpp"

namespace mtw {

// Point of P^1 x P^1.
struct SurfacePoint {
  ProjPoint u;
  ProjPoint v;
  SurfacePoint() = default;
  SurfacePoint(ProjPoint u_, ProjPoint v_) : u(u_), v(v_) {}
};

inline double surface_distance(const SurfacePoint& p, const SurfacePoint& q) {
  return std::max(proj_distance(p.u, q.u), proj_distance(p.v, q.v));
}

// Bihomogeneous form of bidegree (p, q) in ((u0,u1),(v0,v1)).
// c(i,j) multiplies u0^{p-i} u1^i v0^{q-j} v1^j.
class BiForm {
 public:
  BiForm() : p_(0), q_(0), c_(1, Complex(0.0)) {}
  BiForm(int p, int q) : p_(p), q_(q), c_((p + 1) * (q + 1), Complex(0.0)) {}

  int deg_u() const { return p_; }
  int deg_v() const { return q_; }
  Complex& at(int i, int j) { return c_[i * (q_ + 1) + j]; }
  Complex at(int i, int j) const { return c_[i * (q_ + 1) + j]; }
  const std::vector<Complex>& coeffs() const { return c_; }
  std::vector<Complex>& coeffs() { return c_; }

  double max_abs() const {
    double m = 0.0;
    for (auto& x : c_) m = std::max(m, std::abs(x));
    return m;
  }

  Complex eval(const SurfacePoint& pt) const {
    // Collapse over v first: row i gives the u-coefficient of a v-form.
    Complex acc(0.0);
    ProjPoint u = pt.u.normalized(), v = pt.v.normalized();
    for (int i = 0; i <= p_; ++i) {
      Complex row(0.0);
      for (int j = 0; j <= q_; ++j)
        row += at(i, j) * std::pow(v.z0, q_ - j) * std::pow(v.z1, j);
      acc += row * std::pow(u.z0, p_ - i) * std::pow(u.z1, i);
    }
    return acc;
  }

  // Affine partials d/du, d/dv in the charts u = u0/u1, v = v0/v1,
  // homogenized to bidegree (p-1, q) resp. (p, q-1).
  BiForm du() const {
    assert(p_ >= 1);
    BiForm out(p_ - 1, q_);
    for (int i = 0; i < p_; ++i)
      for (int j = 0; j <= q_; ++j) out.at(i, j) = at(i, j) * double(p_ - i);
    return out;
  }
  BiForm dv() const {
    assert(q_ >= 1);
    BiForm out(p_, q_ - 1);
    for (int i = 0; i <= p_; ++i)
      for (int j = 0; j < q_; ++j) out.at(i, j) = at(i, j) * double(q_ - j);
    return out;
  }

  BiForm operator*(const BiForm& o) const {
    BiForm out(p_ + o.p_, q_ + o.q_);
    for (int i = 0; i <= p_; ++i)
      for (int j = 0; j <= q_; ++j)
        for (int a = 0; a <= o.p_; ++a)
          for (int b = 0; b <= o.q_; ++b)
            out.at(i + a, j + b) += at(i, j) * o.at(a, b);
    return out;
  }
  BiForm operator*(Complex s) const {
    BiForm out = *this;
    for (auto& x : out.c_) x *= s;
    return out;
  }
  BiForm operator+(const BiForm& o) const {
    assert(p_ == o.p_ && q_ == o.q_);
    BiForm out = *this;
    for (size_t i = 0; i < c_.size(); ++i) out.c_[i] += o.c_[i];
    return out;
  }
  BiForm operator-(const BiForm& o) const { return *this + o * Complex(-1.0); }

  // The u-polynomial multiplying v0^{q-j} v1^j.
  BinaryForm v_slice(int j) const {
    std::vector<Complex> cc(p_ + 1);
    for (int i = 0; i <= p_; ++i) cc[i] = at(i, j);
    return BinaryForm(std::move(cc));
  }
  void set_v_slice(int j, const BinaryForm& f) {
    assert(f.degree() == p_);
    for (int i = 0; i <= p_; ++i) at(i, j) = f[i];
  }

  void normalize() {
    double m = max_abs();
    if (m > 0)
      for (auto& x : c_) x /= m;
  }

 private:
  int p_, q_;
  std::vector<Complex> c_;
};

}  // namespace mtw

#endif
