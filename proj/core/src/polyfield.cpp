#include "gencont/polyfield.hpp"

#include <cmath>
#include <string>

namespace gencont {

namespace {

int ncomp_for_rank(int rank) {
  switch (rank) {
    case 0: return 1;
    case 1: return 3;
    case 2: return 9;
    case 3: return 27;
    default: throw ShapeError("PolyField: rank must be 0..3, got " + std::to_string(rank));
  }
}

double eps_entry(int i, int j, int k) { return Tensor333::epsilon()(i, j, k); }

}  // namespace

PolyField::PolyField(int rank, int cap) : rank_(rank), cap_(cap) {
  if (cap < 0) throw ShapeError("PolyField: negative degree cap");
  const int n = ncomp_for_rank(rank);
  const int stride = (cap_ + 1) * (cap_ + 1) * (cap_ + 1);
  comps_.assign(n, std::vector<double>(stride, 0.0));
}

PolyField PolyField::random(int rank, std::mt19937_64& rng, int cap) {
  PolyField f(rank, cap);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& c : f.comps_) {
    for (int ex = 0; ex <= cap; ++ex)
      for (int ey = 0; ey + ex <= cap; ++ey)
        for (int ez = 0; ez + ey + ex <= cap; ++ez) c[f.idx(ex, ey, ez)] = u(rng);
  }
  return f;
}

int PolyField::idx(int ex, int ey, int ez) const {
  return (ex * (cap_ + 1) + ey) * (cap_ + 1) + ez;
}

void PolyField::require_rank(int r, const char* op) const {
  if (rank_ != r) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(r) + " field, got rank " +
                     std::to_string(rank_));
  }
}

double PolyField::coeff(int comp, int ex, int ey, int ez) const {
  return comps_.at(comp).at(idx(ex, ey, ez));
}

void PolyField::set_coeff(int comp, int ex, int ey, int ez, double value) {
  if (ex + ey + ez > cap_) throw ShapeError("PolyField: monomial above the degree cap");
  comps_.at(comp).at(idx(ex, ey, ez)) = value;
}

PolyField PolyField::diff_comp(int comp, int axis) const {
  PolyField out(0, cap_);
  auto& dst = out.comps_[0];
  const auto& src = comps_.at(comp);
  for (int ex = 0; ex <= cap_; ++ex) {
    for (int ey = 0; ey <= cap_; ++ey) {
      for (int ez = 0; ez <= cap_; ++ez) {
        const double c = src[idx(ex, ey, ez)];
        if (c == 0.0) continue;
        int e[3] = {ex, ey, ez};
        if (e[axis] == 0) continue;
        const double factor = e[axis];
        e[axis] -= 1;
        dst[out.idx(e[0], e[1], e[2])] += factor * c;
      }
    }
  }
  return out;
}

double PolyField::eval_comp(int comp, const Vec3& x) const {
  const auto& c = comps_.at(comp);
  // Powers up front; caps are tiny so this is plenty fast.
  std::vector<double> px(cap_ + 1, 1.0), py(cap_ + 1, 1.0), pz(cap_ + 1, 1.0);
  for (int e = 1; e <= cap_; ++e) {
    px[e] = px[e - 1] * x(0);
    py[e] = py[e - 1] * x(1);
    pz[e] = pz[e - 1] * x(2);
  }
  double v = 0.0;
  for (int ex = 0; ex <= cap_; ++ex)
    for (int ey = 0; ey <= cap_; ++ey)
      for (int ez = 0; ez <= cap_; ++ez) {
        const double cc = c[idx(ex, ey, ez)];
        if (cc != 0.0) v += cc * px[ex] * py[ey] * pz[ez];
      }
  return v;
}

double PolyField::eval_scalar(const Vec3& x) const {
  require_rank(0, "eval_scalar");
  return eval_comp(0, x);
}

Vec3 PolyField::eval_vec(const Vec3& x) const {
  require_rank(1, "eval_vec");
  return Vec3(eval_comp(0, x), eval_comp(1, x), eval_comp(2, x));
}

Mat3 PolyField::eval_mat(const Vec3& x) const {
  require_rank(2, "eval_mat");
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = eval_comp(i * 3 + j, x);
  return m;
}

Tensor333 PolyField::eval_ten3(const Vec3& x) const {
  require_rank(3, "eval_ten3");
  Tensor333 t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) t(i, j, k) = eval_comp((i * 3 + j) * 3 + k, x);
  return t;
}

PolyField grad(const PolyField& f) {
  if (f.rank_ >= 3) throw ShapeError("grad: rank 3 fields are not differentiated further");
  PolyField out(f.rank_ + 1, f.cap_);
  for (int c = 0; c < f.ncomp(); ++c) {
    for (int axis = 0; axis < 3; ++axis) {
      out.comps_[c * 3 + axis] = f.diff_comp(c, axis).comps_[0];
    }
  }
  return out;
}

PolyField curl_mat(const PolyField& p) {
  p.require_rank(2, "curl_mat");
  PolyField out(2, p.cap_);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      auto& dst = out.comps_[a * 3 + b];
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          const double e = eps_entry(b, i, j);
          if (e == 0.0) continue;
          const auto d = p.diff_comp(a * 3 + j, i);
          for (size_t m = 0; m < dst.size(); ++m) dst[m] += e * d.comps_[0][m];
        }
      }
    }
  }
  return out;
}

PolyField div_mat(const PolyField& p) {
  p.require_rank(2, "div_mat");
  PolyField out(1, p.cap_);
  for (int i = 0; i < 3; ++i) {
    auto& dst = out.comps_[i];
    for (int j = 0; j < 3; ++j) {
      const auto d = p.diff_comp(i * 3 + j, j);
      for (size_t m = 0; m < dst.size(); ++m) dst[m] += d.comps_[0][m];
    }
  }
  return out;
}

PolyField div_ten3(const PolyField& t) {
  t.require_rank(3, "div_ten3");
  PolyField out(2, t.cap_);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      auto& dst = out.comps_[i * 3 + j];
      for (int k = 0; k < 3; ++k) {
        const auto d = t.diff_comp((i * 3 + j) * 3 + k, k);
        for (size_t m = 0; m < dst.size(); ++m) dst[m] += d.comps_[0][m];
      }
    }
  }
  return out;
}

PolyField levi_lift_field(const PolyField& m) {
  m.require_rank(2, "levi_lift_field");
  PolyField out(3, m.cap_);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        auto& dst = out.comps_[(i * 3 + j) * 3 + k];
        for (int b = 0; b < 3; ++b) {
          const double e = eps_entry(b, k, j);
          if (e == 0.0) continue;
          const auto& src = m.comps_[i * 3 + b];
          for (size_t q = 0; q < dst.size(); ++q) dst[q] += e * src[q];
        }
      }
  return out;
}

PolyField operator-(const PolyField& a, const PolyField& b) {
  if (a.rank_ != b.rank_ || a.cap_ != b.cap_) {
    throw ShapeError("operator-: field shapes differ (rank " + std::to_string(a.rank_) + "/" +
                     std::to_string(b.rank_) + ", cap " + std::to_string(a.cap_) + "/" +
                     std::to_string(b.cap_) + ")");
  }
  PolyField out = a;
  for (int c = 0; c < out.ncomp(); ++c)
    for (size_t m = 0; m < out.comps_[c].size(); ++m) out.comps_[c][m] -= b.comps_[c][m];
  return out;
}

Domain::Domain(const Vec3& lo_, const Vec3& hi_) : lo(lo_), hi(hi_) {
  for (int a = 0; a < 3; ++a) {
    if (!(hi(a) > lo(a))) throw ArgumentError("Domain: hi must exceed lo on every axis");
  }
}

void Domain::gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw ArgumentError("gauss_legendre: need at least one point");
  // Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights come
  // from the first eigenvector components.
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jac(k, k - 1) = b;
    jac(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  nodes.resize(n);
  weights.resize(n);
  for (int k = 0; k < n; ++k) {
    nodes[k] = es.eigenvalues()(k);
    const double v0 = es.eigenvectors()(0, k);
    weights[k] = 2.0 * v0 * v0;
  }
}

double Domain::integrate(const std::function<double(const Vec3&)>& f, int degree) const {
  const int n = degree / 2 + 1;  // exact through degree 2n-1 >= degree
  std::vector<double> xs, ws;
  gauss_legendre(n, xs, ws);
  double total = 0.0;
  const Vec3 mid = 0.5 * (lo + hi);
  const Vec3 half = 0.5 * (hi - lo);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        const Vec3 x(mid(0) + half(0) * xs[a], mid(1) + half(1) * xs[b], mid(2) + half(2) * xs[c]);
        total += ws[a] * ws[b] * ws[c] * f(x);
      }
  return total * half(0) * half(1) * half(2);
}

double Domain::integrate(const PolyField& f) const {
  f.require_rank(0, "Domain::integrate");
  double total = 0.0;
  for (int ex = 0; ex <= f.cap(); ++ex)
    for (int ey = 0; ey <= f.cap(); ++ey)
      for (int ez = 0; ez <= f.cap(); ++ez) {
        const double c = f.coeff(0, ex, ey, ez);
        if (c == 0.0) continue;
        const double ix = (std::pow(hi(0), ex + 1) - std::pow(lo(0), ex + 1)) / (ex + 1);
        const double iy = (std::pow(hi(1), ey + 1) - std::pow(lo(1), ey + 1)) / (ey + 1);
        const double iz = (std::pow(hi(2), ez + 1) - std::pow(lo(2), ez + 1)) / (ez + 1);
        total += c * ix * iy * iz;
      }
  return total;
}

double Domain::l2_norm2(const PolyField& f) const {
  const auto sq = [&f](const Vec3& x) {
    double s = 0.0;
    for (int c = 0; c < f.ncomp(); ++c) {
      const double v = f.eval_comp(c, x);
      s += v * v;
    }
    return s;
  };
  return integrate(sq, 2 * f.cap());
}

CurlBoundReport check_curl_bound(const PolyField& p, const Domain& d) {
  CurlBoundReport r;
  r.curl_norm2 = d.l2_norm2(curl_mat(p));
  r.grad_norm2 = d.l2_norm2(grad(p));
  r.ok = r.curl_norm2 <= 2.0 * r.grad_norm2 * (1.0 + 1e-12) + 1e-14;
  return r;
}

IdentityReport check_curlcurl_identity(const PolyField& p, const Domain& d) {
  const PolyField lhs = div_ten3(levi_lift_field(curl_mat(p)));
  PolyField rhs = curl_mat(curl_mat(p));
  // The identity reads DIV levi_lift(Curl P) = -Curl Curl P.
  PolyField sum = lhs - (PolyField(2, p.cap()) - rhs);  // lhs + rhs
  IdentityReport r;
  r.residual = std::sqrt(d.l2_norm2(sum));
  r.scale = std::sqrt(d.l2_norm2(rhs)) + 1e-300;
  r.ok = r.residual <= 1e-12 * r.scale;
  return r;
}

IdentityReport check_moment_trace(const PolyField& m, const Vec3& nu, const Domain& d) {
  if (std::abs(nu.norm() - 1.0) > 1e-12) {
    throw InvalidNormal("check_moment_trace: normal must have unit length");
  }
  IdentityReport r{0.0, 0.0, true};
  const auto probe = [&](const Vec3& x) {
    const Mat3 mm = m.eval_mat(x);
    const Mat3 traction = dot_vec(levi_lift(mm), nu);
    r.residual = std::max(r.residual, std::abs(nu.dot(traction * nu)));
    r.scale = std::max(r.scale, mm.norm());
    return 0.0;
  };
  d.integrate(probe, 2 * m.cap());
  r.scale += 1e-300;
  r.ok = r.residual <= 1e-12 * r.scale;
  return r;
}

}  // namespace gencont
