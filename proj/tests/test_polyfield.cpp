#include <random>

#include "doctest.h"
#include "gencont/polyfield.hpp"

using namespace gencont;

namespace {

const Domain kBox(Vec3(-1.0, -0.5, -2.0), Vec3(1.5, 1.0, 0.5));

}  // namespace

TEST_CASE("field: exact differentiation against finite differences") {
  std::mt19937_64 rng(11);
  const PolyField f = PolyField::random(0, rng);
  const PolyField g = grad(f);
  const double h = 1e-6;
  for (int t = 0; t < 20; ++t) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Vec3 x(u(rng), u(rng), u(rng));
    const Vec3 gx = g.eval_vec(x);
    for (int a = 0; a < 3; ++a) {
      Vec3 xp = x, xm = x;
      xp(a) += h;
      xm(a) -= h;
      const double fd = (f.eval_scalar(xp) - f.eval_scalar(xm)) / (2.0 * h);
      CHECK(std::abs(gx(a) - fd) <= 1e-8 * std::max(std::abs(gx(a)), 1.0));
    }
  }
}

TEST_CASE("field: gradient layout puts the derivative index last") {
  // f(x) = x0^2 x2: (grad f)_0 = 2 x0 x2, (grad f)_2 = x0^2.
  PolyField f(0);
  f.set_coeff(0, 2, 0, 1, 1.0);
  const PolyField g = grad(f);
  const Vec3 x(0.7, -0.3, 0.4);
  const Vec3 gx = g.eval_vec(x);
  CHECK(std::abs(gx(0) - 2.0 * x(0) * x(2)) <= 1e-15);
  CHECK(std::abs(gx(1)) == 0.0);
  CHECK(std::abs(gx(2) - x(0) * x(0)) <= 1e-15);

  // Second gradient symmetry in the two derivative slots.
  std::mt19937_64 rng(12);
  const PolyField u = PolyField::random(1, rng);
  const PolyField d2u = grad(grad(u));
  std::uniform_real_distribution<double> uu(-1.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    const Vec3 y(uu(rng), uu(rng), uu(rng));
    const Tensor333 h = d2u.eval_ten3(y);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) CHECK(std::abs(h(i, j, k) - h(i, k, j)) <= 1e-13);
  }
}

TEST_CASE("field: curl of every gradient vanishes identically") {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 50; ++t) {
    const PolyField u = PolyField::random(1, rng);
    const PolyField c = curl_mat(grad(u));
    CHECK(kBox.l2_norm2(c) <= 1e-22 * std::max(kBox.l2_norm2(grad(u)), 1.0));
  }
}

TEST_CASE("field: curl energy is bounded by twice the gradient energy") {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 50; ++t) {
    const CurlBoundReport r = check_curl_bound(PolyField::random(2, rng), kBox);
    CHECK(r.ok);
    CHECK(r.curl_norm2 <= 2.0 * r.grad_norm2 * (1.0 + 1e-12));
  }
}

TEST_CASE("field: lifted curl divergence equals minus curl curl") {
  std::mt19937_64 rng(15);
  for (int t = 0; t < 50; ++t) {
    const PolyField p = PolyField::random(2, rng);
    const IdentityReport r = check_curlcurl_identity(p, kBox);
    CHECK(r.ok);
    CHECK(r.residual <= 1e-10 * std::max(r.scale, 1e-30));
    // The same statement assembled by hand from the public pieces.
    const PolyField direct = div_ten3(levi_lift_field(curl_mat(p)));
    const PolyField cc = curl_mat(curl_mat(p));
    const PolyField zero = direct - (PolyField(2, p.cap()) - cc);  // direct + cc
    CHECK(kBox.l2_norm2(zero) <= 1e-20 * std::max(kBox.l2_norm2(cc), 1.0));
  }
}

TEST_CASE("field: normal trace of a lifted moment vanishes") {
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const PolyField m = PolyField::random(2, rng);
    Vec3 nu(u(rng), u(rng), u(rng));
    if (nu.norm() < 0.1) nu = Vec3::UnitX();
    nu.normalize();
    const IdentityReport r = check_moment_trace(m, nu, kBox);
    CHECK(r.ok);
    CHECK(r.residual <= 1e-12 * std::max(r.scale, 1.0));
  }
}

TEST_CASE("field: Nye map takes axial gradients to curls") {
  // Curl(anti(a)) == tr(Da) Id - (Da)^T for any vector field a.
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const PolyField a = PolyField::random(1, rng);
    const PolyField anti_a = [&] {
      PolyField out(2, a.cap());
      for (int ex = 0; ex <= a.cap(); ++ex)
        for (int ey = 0; ey + ex <= a.cap(); ++ey)
          for (int ez = 0; ez + ey + ex <= a.cap(); ++ez) {
            const double c0 = a.coeff(0, ex, ey, ez);
            const double c1 = a.coeff(1, ex, ey, ez);
            const double c2 = a.coeff(2, ex, ey, ez);
            if (c2 != 0.0) {
              out.set_coeff(0 * 3 + 1, ex, ey, ez, -c2);
              out.set_coeff(1 * 3 + 0, ex, ey, ez, c2);
            }
            if (c1 != 0.0) {
              out.set_coeff(0 * 3 + 2, ex, ey, ez, c1);
              out.set_coeff(2 * 3 + 0, ex, ey, ez, -c1);
            }
            if (c0 != 0.0) {
              out.set_coeff(1 * 3 + 2, ex, ey, ez, -c0);
              out.set_coeff(2 * 3 + 1, ex, ey, ez, c0);
            }
          }
      return out;
    }();
    const PolyField lhs = curl_mat(anti_a);
    for (int s = 0; s < 10; ++s) {
      const Vec3 x(u(rng), u(rng), u(rng));
      const Mat3 da = grad(a).eval_mat(x);
      const Mat3 want = nye_forward(da);
      CHECK((lhs.eval_mat(x) - want).norm() <= 1e-12 * std::max(want.norm(), 1.0));
    }
  }
}

TEST_CASE("field: quadrature integrates polynomials exactly") {
  // x^2 y^3 over the box: product of 1D monomial integrals.
  PolyField f(0, 5);
  f.set_coeff(0, 2, 3, 0, 1.0);
  const auto mono = [](double lo, double hi, int p) {
    return (std::pow(hi, p + 1) - std::pow(lo, p + 1)) / (p + 1);
  };
  const double exact = mono(kBox.lo(0), kBox.hi(0), 2) * mono(kBox.lo(1), kBox.hi(1), 3) *
                       mono(kBox.lo(2), kBox.hi(2), 0);
  CHECK(std::abs(kBox.integrate(f) - exact) <= 1e-13 * std::abs(exact));
  const double by_quad =
      kBox.integrate([&](const Vec3& x) { return f.eval_scalar(x); }, 5);
  CHECK(std::abs(by_quad - exact) <= 1e-13 * std::abs(exact));
}

TEST_CASE("field: shape errors") {
  std::mt19937_64 rng(18);
  const PolyField scalar = PolyField::random(0, rng);
  const PolyField vec = PolyField::random(1, rng);
  const PolyField mat = PolyField::random(2, rng);
  CHECK_THROWS_AS((void)curl_mat(vec), ShapeError);
  CHECK_THROWS_AS((void)div_mat(vec), ShapeError);
  CHECK_THROWS_AS((void)div_ten3(mat), ShapeError);
  CHECK_THROWS_AS((void)levi_lift_field(vec), ShapeError);
  CHECK_THROWS_AS((void)grad(grad(grad(vec))), ShapeError);
  CHECK_THROWS_AS((void)(scalar - vec), ShapeError);
  CHECK_THROWS_AS(Domain(Vec3::Zero(), Vec3::Zero()), ArgumentError);
}
