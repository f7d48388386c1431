#pragma once

#include <Eigen/Dense>

#include <array>

#include "gencont/errors.hpp"

namespace gencont {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// ---------------------------------------------------------------------------
// Second order algebra
// ---------------------------------------------------------------------------

inline Mat3 sym(const Mat3& m) { return 0.5 * (m + m.transpose()); }
inline Mat3 skw(const Mat3& m) { return 0.5 * (m - m.transpose()); }
inline Mat3 sph(const Mat3& m) { return (m.trace() / 3.0) * Mat3::Identity(); }
inline Mat3 dev(const Mat3& m) { return m - sph(m); }
inline Mat3 devsym(const Mat3& m) { return dev(sym(m)); }

/// All four orthogonal pieces of a matrix at once.
struct Decomposition {
  Mat3 sym;
  Mat3 skew;
  Mat3 sph;
  Mat3 dev;
  Mat3 devsym;
};

Decomposition decompose(const Mat3& m);

/// Frobenius inner product <a, b> = a_ij b_ij.
double frobenius(const Mat3& a, const Mat3& b);

/// anti(v) w == cross(v, w) for every w.
Mat3 anti(const Vec3& v);

/// Inverse of anti() on skew matrices. Throws InvalidSkew when the symmetric
/// part of `a` exceeds 1e-12 times its norm.
Vec3 axl(const Mat3& a);

/// Row-wise cross product: row i of the result is cross(row_i(p), v).
/// Identical to p * anti(v).
Mat3 cross_mat_vec(const Mat3& p, const Vec3& v);

/// anti(v)^n for n >= 1 in closed form (no matrix products). Throws
/// ArgumentError for n < 1.
Mat3 anti_power(const Vec3& v, int n);

/// P split against a unit normal: tangential = P (Id - nu nu^T),
/// normal = P nu nu^T. Throws InvalidNormal unless | |nu| - 1 | <= 1e-12.
struct BoundarySplit {
  Mat3 tangential;
  Mat3 normal;
};
BoundarySplit split_boundary(const Mat3& p, const Vec3& nu);

/// Nye's map tr(G) Id - G^T, taking the gradient of an axial vector field to
/// the curl of the corresponding skew matrix field.
Mat3 nye_forward(const Mat3& g);

/// Inverse Nye map 0.5 tr(C) Id - C^T; nye_inverse(nye_forward(G)) == G.
Mat3 nye_inverse(const Mat3& c);

// ---------------------------------------------------------------------------
// Third order tensors
// ---------------------------------------------------------------------------

/// Dense third order tensor T(i,j,k). Slice k is the Mat3 T(.,.,k). For
/// gradients of matrix fields the last index is the derivative direction,
/// (DP)(i,j,k) = d_k P(i,j).
class Tensor333 {
 public:
  Tensor333() {
    for (auto& s : s_) s.setZero();
  }

  double& operator()(int i, int j, int k) { return s_[k](i, j); }
  double operator()(int i, int j, int k) const { return s_[k](i, j); }

  Mat3& slice(int k) { return s_[k]; }
  const Mat3& slice(int k) const { return s_[k]; }

  Tensor333& operator+=(const Tensor333& o) {
    for (int k = 0; k < 3; ++k) s_[k] += o.s_[k];
    return *this;
  }
  Tensor333& operator-=(const Tensor333& o) {
    for (int k = 0; k < 3; ++k) s_[k] -= o.s_[k];
    return *this;
  }
  Tensor333& operator*=(double c) {
    for (int k = 0; k < 3; ++k) s_[k] *= c;
    return *this;
  }

  friend Tensor333 operator+(Tensor333 a, const Tensor333& b) { return a += b; }
  friend Tensor333 operator-(Tensor333 a, const Tensor333& b) { return a -= b; }
  friend Tensor333 operator*(double c, Tensor333 t) { return t *= c; }
  friend Tensor333 operator*(Tensor333 t, double c) { return t *= c; }

  double norm() const;

  /// The Levi-Civita tensor eps(i,j,k).
  static const Tensor333& epsilon();

 private:
  std::array<Mat3, 3> s_;
};

/// Frobenius inner product over all 27 entries.
double frobenius(const Tensor333& a, const Tensor333& b);

// Projections acting on the first two indices, slice by slice. They are
// orthogonal, idempotent, and devsym3 + skew3 + sph3 == identity.
Tensor333 devsym3(const Tensor333& t);
Tensor333 skew3(const Tensor333& t);
Tensor333 sph3(const Tensor333& t);

/// Contraction with a vector over the last index: (T . v)(i,j) = T(i,j,k) v_k.
Mat3 dot_vec(const Tensor333& t, const Vec3& v);

/// Embeds a second order moment as a third order one,
///   levi_lift(m)(a,j,k) = m(a,b) eps(b,k,j),
/// so that dot_vec(levi_lift(m), nu) == cross_mat_vec(m, nu) for every nu.
Tensor333 levi_lift(const Mat3& m);

/// Row-wise curl recovered from a full gradient:
///   (Curl P)(a,b) = eps(b,i,j) DP(a,j,i).
Mat3 curl_from_grad(const Tensor333& dp);

}  // namespace gencont
