#include "gencont/tensor.hpp"

#include <cmath>
#include <string>

namespace gencont {

Decomposition decompose(const Mat3& m) {
  Decomposition d;
  d.sym = sym(m);
  d.skew = skw(m);
  d.sph = sph(m);
  d.dev = dev(m);
  d.devsym = devsym(m);
  return d;
}

double frobenius(const Mat3& a, const Mat3& b) { return (a.array() * b.array()).sum(); }

Mat3 anti(const Vec3& v) {
  Mat3 a;
  a << 0.0, -v(2), v(1),
       v(2), 0.0, -v(0),
      -v(1), v(0), 0.0;
  return a;
}

Vec3 axl(const Mat3& a) {
  const double scale = a.norm();
  if (sym(a).norm() > 1e-12 * scale) {
    throw InvalidSkew("axl: symmetric part is " + std::to_string(sym(a).norm()) +
                      " against matrix norm " + std::to_string(scale));
  }
  return Vec3(a(2, 1), a(0, 2), a(1, 0));
}

Mat3 cross_mat_vec(const Mat3& p, const Vec3& v) {
  Mat3 r;
  for (int i = 0; i < 3; ++i) {
    r.row(i) = Vec3(p.row(i)).cross(v).transpose();
  }
  return r;
}

Mat3 anti_power(const Vec3& v, int n) {
  if (n < 1) throw ArgumentError("anti_power: exponent must be >= 1, got " + std::to_string(n));
  // anti(v)^3 = -|v|^2 anti(v), so powers cycle with period two up to scale:
  //   n = 2k-1:  (-1)^(k-1) |v|^(2k-2) anti(v)
  //   n = 2k:    (-1)^(k-1) |v|^(2k-2) anti(v)^2,  anti(v)^2 = v v^T - |v|^2 Id.
  const double t2 = v.squaredNorm();
  const int k = (n + 1) / 2;
  const double coeff = ((k - 1) % 2 == 0 ? 1.0 : -1.0) * std::pow(t2, k - 1);
  if (n % 2 == 1) return coeff * anti(v);
  const Mat3 anti2 = v * v.transpose() - t2 * Mat3::Identity();
  return coeff * anti2;
}

BoundarySplit split_boundary(const Mat3& p, const Vec3& nu) {
  if (std::abs(nu.norm() - 1.0) > 1e-12) {
    throw InvalidNormal("split_boundary: |nu| = " + std::to_string(nu.norm()) +
                        ", expected a unit vector");
  }
  const Mat3 nn = nu * nu.transpose();
  BoundarySplit s;
  s.normal = p * nn;
  s.tangential = p * (Mat3::Identity() - nn);
  return s;
}

Mat3 nye_forward(const Mat3& g) { return g.trace() * Mat3::Identity() - g.transpose(); }

Mat3 nye_inverse(const Mat3& c) { return 0.5 * c.trace() * Mat3::Identity() - c.transpose(); }

double Tensor333::norm() const {
  double n2 = 0.0;
  for (int k = 0; k < 3; ++k) n2 += s_[k].squaredNorm();
  return std::sqrt(n2);
}

const Tensor333& Tensor333::epsilon() {
  static const Tensor333 eps = [] {
    Tensor333 e;
    e(0, 1, 2) = e(1, 2, 0) = e(2, 0, 1) = 1.0;
    e(0, 2, 1) = e(2, 1, 0) = e(1, 0, 2) = -1.0;
    return e;
  }();
  return eps;
}

double frobenius(const Tensor333& a, const Tensor333& b) {
  double s = 0.0;
  for (int k = 0; k < 3; ++k) s += frobenius(a.slice(k), b.slice(k));
  return s;
}

Tensor333 devsym3(const Tensor333& t) {
  Tensor333 r;
  for (int k = 0; k < 3; ++k) r.slice(k) = devsym(t.slice(k));
  return r;
}

Tensor333 skew3(const Tensor333& t) {
  Tensor333 r;
  for (int k = 0; k < 3; ++k) r.slice(k) = skw(t.slice(k));
  return r;
}

Tensor333 sph3(const Tensor333& t) {
  Tensor333 r;
  for (int k = 0; k < 3; ++k) r.slice(k) = sph(t.slice(k));
  return r;
}

Mat3 dot_vec(const Tensor333& t, const Vec3& v) {
  Mat3 r = Mat3::Zero();
  for (int k = 0; k < 3; ++k) r += t.slice(k) * v(k);
  return r;
}

Tensor333 levi_lift(const Mat3& m) {
  // Slice k of the lift is m * anti(e_k); contracting the last index with nu
  // then reproduces m * anti(nu), the row-wise cross product with nu.
  Tensor333 r;
  for (int k = 0; k < 3; ++k) {
    r.slice(k) = m * anti(Vec3::Unit(k));
  }
  return r;
}

Mat3 curl_from_grad(const Tensor333& dp) {
  const Tensor333& eps = Tensor333::epsilon();
  Mat3 c = Mat3::Zero();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) c(a, b) += eps(b, i, j) * dp(a, j, i);
  return c;
}

}  // namespace gencont
