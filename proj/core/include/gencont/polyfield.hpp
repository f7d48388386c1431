#pragma once

#include <functional>
#include <random>
#include <vector>

#include "gencont/tensor.hpp"

namespace gencont {

/// Polynomial tensor field on R^3 with dense trivariate coefficients per
/// component and a total-degree cap. Rank 0..3 (scalar, vector, matrix,
/// third order). Components are stored flattened row-major, so a rank 2
/// field has component index i*3+j and a rank 3 field (i*3+j)*3+k.
///
/// Differentiation is exact, which makes these fields the reference
/// instruments for every differential identity in the library.
class PolyField {
 public:
  static constexpr int kDefaultCap = 3;

  explicit PolyField(int rank, int cap = kDefaultCap);

  /// All monomials with total degree <= cap drawn uniformly from [-1, 1].
  static PolyField random(int rank, std::mt19937_64& rng, int cap = kDefaultCap);

  int rank() const { return rank_; }
  int cap() const { return cap_; }
  int ncomp() const { return static_cast<int>(comps_.size()); }

  double coeff(int comp, int ex, int ey, int ez) const;
  void set_coeff(int comp, int ex, int ey, int ez, double value);

  /// Derivative of one component along an axis, as a scalar field.
  PolyField diff_comp(int comp, int axis) const;

  double eval_comp(int comp, const Vec3& x) const;

  double eval_scalar(const Vec3& x) const;    // rank 0
  Vec3 eval_vec(const Vec3& x) const;         // rank 1
  Mat3 eval_mat(const Vec3& x) const;         // rank 2
  Tensor333 eval_ten3(const Vec3& x) const;   // rank 3

  /// Exact integral of a rank 0 field over a box (monomial antiderivatives).
  friend struct Domain;
  friend PolyField grad(const PolyField& f);
  friend PolyField curl_mat(const PolyField& p);
  friend PolyField div_mat(const PolyField& p);
  friend PolyField div_ten3(const PolyField& t);
  friend PolyField levi_lift_field(const PolyField& m);
  friend PolyField operator-(const PolyField& a, const PolyField& b);

 private:
  int idx(int ex, int ey, int ez) const;
  void require_rank(int r, const char* op) const;

  int rank_;
  int cap_;
  std::vector<std::vector<double>> comps_;
};

/// Gradient appends the derivative index last: rank r in, rank r+1 out.
/// (grad f)_i = d_i f, (Du)(i,j) = d_j u_i, (DP)(i,j,k) = d_k P(i,j).
/// Throws ShapeError for rank 3 input.
PolyField grad(const PolyField& f);

/// Row-wise curl of a matrix field: (Curl P)(a,b) = eps(b,i,j) d_i P(a,j).
/// Throws ShapeError unless rank 2.
PolyField curl_mat(const PolyField& p);

/// Row-wise divergence of a matrix field: (Div P)_i = d_j P(i,j).
/// Throws ShapeError unless rank 2.
PolyField div_mat(const PolyField& p);

/// Divergence of a third order field over its last index:
/// (DIV T)(i,j) = d_k T(i,j,k). Throws ShapeError unless rank 3.
PolyField div_ten3(const PolyField& t);

/// Pointwise levi_lift of a matrix field (no differentiation involved).
/// Throws ShapeError unless rank 2.
PolyField levi_lift_field(const PolyField& m);

/// Componentwise difference; ranks and caps must agree (ShapeError).
PolyField operator-(const PolyField& a, const PolyField& b);

/// Axis-aligned box with tensor-product Gauss-Legendre quadrature. The rule
/// for polynomial degree D uses ceil((D+1)/2) points per axis and is exact
/// through degree 2*cap for products of two capped fields.
struct Domain {
  Vec3 lo;
  Vec3 hi;

  Domain(const Vec3& lo_, const Vec3& hi_);

  /// Gauss quadrature sized for the given total polynomial degree.
  double integrate(const std::function<double(const Vec3&)>& f, int degree) const;

  /// Exact integral of a rank 0 polynomial field.
  double integrate(const PolyField& f) const;

  /// Integral of the squared Frobenius norm of any-rank field, by quadrature
  /// at the exactness degree 2*cap.
  double l2_norm2(const PolyField& f) const;

  /// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
  static void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);
};

/// Verifies |Curl P|_L2^2 <= 2 |DP|_L2^2 on a matrix field.
struct CurlBoundReport {
  double curl_norm2;
  double grad_norm2;
  bool ok;
};
CurlBoundReport check_curl_bound(const PolyField& p, const Domain& d);

struct IdentityReport {
  double residual;
  double scale;
  bool ok;
};

/// Verifies DIV levi_lift(Curl P) == -Curl Curl P in L2 on a matrix field.
IdentityReport check_curlcurl_identity(const PolyField& p, const Domain& d);

/// Verifies that the normal-normal component of the lifted couple traction
/// vanishes identically: nu . (levi_lift(m) . nu) nu == 0 at quadrature
/// points of the domain, for a matrix field m.
IdentityReport check_moment_trace(const PolyField& m, const Vec3& nu, const Domain& d);

}  // namespace gencont
