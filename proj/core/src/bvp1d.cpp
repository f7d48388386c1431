#include "gencont/bvp1d.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace gencont {

namespace {

constexpr double kGaussPoint = 0.57735026918962576451;  // 1/sqrt(3)

struct Ansatz {
  std::vector<std::string> fields;
  bool second_gradient = false;
  int ylen = 0;  // value+derivative per field, plus u'' for second gradient
};

Ansatz ansatz_for(Model model, TestKind test) {
  Ansatz a;
  a.second_gradient = (model == Model::SecondGradient);
  if (test == TestKind::SimpleShear) {
    switch (model) {
      case Model::LinearElastic: a.fields = {"u1"}; break;
      case Model::Micromorphic:
      case Model::RelaxedMicromorphic: a.fields = {"u1", "P12", "P21"}; break;
      case Model::Cosserat: a.fields = {"u1", "a3"}; break;
      case Model::SecondGradient: a.fields = {"u"}; break;
    }
  } else {
    switch (model) {
      case Model::LinearElastic: a.fields = {"u2"}; break;
      case Model::Micromorphic:
      case Model::RelaxedMicromorphic: a.fields = {"u2", "P11", "P22", "P33"}; break;
      case Model::Cosserat:
        throw SpecError(
            "Cosserat extension has no content: the extension ansatz is diagonal and the "
            "microrotation is skew");
      case Model::SecondGradient: a.fields = {"u"}; break;
    }
  }
  a.ylen = 2 * static_cast<int>(a.fields.size()) + (a.second_gradient ? 1 : 0);
  return a;
}

// Expands the reduced point state into full slab kinematics. The through
// thickness coordinate is x2 (index 1), so every derivative lands in the
// k = 1 slot of a gradient.
KinematicState state_from_flat(Model model, TestKind test, const double* y) {
  KinematicState s;
  if (test == TestKind::SimpleShear) {
    switch (model) {
      case Model::LinearElastic:
        s.Du(0, 1) = y[1];
        break;
      case Model::Micromorphic:
      case Model::RelaxedMicromorphic:
        s.Du(0, 1) = y[1];
        s.P(0, 1) = y[2];
        s.P(1, 0) = y[4];
        s.DP(0, 1, 1) = y[3];
        s.DP(1, 0, 1) = y[5];
        break;
      case Model::Cosserat: {
        s.Du(0, 1) = y[1];
        const Mat3 gen = anti(Vec3::Unit(2));
        s.P = y[2] * gen;
        s.DP.slice(1) = y[3] * gen;
        break;
      }
      case Model::SecondGradient:
        s.Du(0, 1) = y[1];
        s.D2u(0, 1, 1) = y[2];
        break;
    }
  } else {
    switch (model) {
      case Model::LinearElastic:
        s.Du(1, 1) = y[1];
        break;
      case Model::Micromorphic:
      case Model::RelaxedMicromorphic:
        s.Du(1, 1) = y[1];
        s.P(0, 0) = y[2];
        s.P(1, 1) = y[4];
        s.P(2, 2) = y[6];
        s.DP(0, 0, 1) = y[3];
        s.DP(1, 1, 1) = y[5];
        s.DP(2, 2, 1) = y[7];
        break;
      case Model::Cosserat:
        throw SpecError("Cosserat extension is not supported");
      case Model::SecondGradient:
        s.Du(1, 1) = y[1];
        s.D2u(1, 1, 1) = y[2];
        break;
    }
  }
  return s;
}

// The reduced energy is an exact quadratic form in the point state, so the
// constant Hessian is recovered by polarization of the constitutive energy.
Eigen::MatrixXd ansatz_hessian(Model model, TestKind test, const IsotropicModuli& p) {
  const Ansatz az = ansatz_for(model, test);
  const int m = az.ylen;
  const auto w = [&](const std::vector<double>& y) {
    return energy_density(model, p, state_from_flat(model, test, y.data()));
  };
  Eigen::MatrixXd a(m, m);
  std::vector<double> y(m, 0.0);
  std::vector<double> wi(m);
  for (int i = 0; i < m; ++i) {
    std::fill(y.begin(), y.end(), 0.0);
    y[i] = 1.0;
    wi[i] = w(y);
    a(i, i) = 2.0 * wi[i];
  }
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      std::fill(y.begin(), y.end(), 0.0);
      y[i] = 1.0;
      y[j] = 1.0;
      a(i, j) = a(j, i) = w(y) - wi[i] - wi[j];
    }
  }
  return a;
}

// Quadratic C1 B-splines on a uniform open knot vector (end multiplicity 3):
// n elements carry n + 2 coefficients; u' is linear and u'' constant per
// element, so the two point Gauss rule integrates the element energy
// exactly. At the left end u(x0) = c0 and u'(x0) = 2 (c1 - c0) / he, which
// turns both clamped conditions into single-coefficient pins.
struct QuadSpline {
  int n = 0;
  double x0 = 0.0;
  double he = 0.0;
  std::vector<double> knots;

  QuadSpline(int n_, double x0_, double he_) : n(n_), x0(x0_), he(he_) {
    knots.resize(n + 5);
    for (int i = 0; i < 3; ++i) knots[i] = x0;
    for (int i = 1; i < n; ++i) knots[i + 2] = x0 + he * i;
    for (int i = 0; i < 3; ++i) knots[n + 2 + i] = x0 + he * n;
  }

  int ndof() const { return n + 2; }

  // Values, first, and second derivatives of the three basis functions
  // active on element e, indices e, e+1, e+2, at physical coordinate x.
  void basis(int e, double x, double val[3], double d1[3], double d2[3]) const {
    const int s = e + 2;  // knot span of this element
    const auto n0 = [&](int j) { return j == s ? 1.0 : 0.0; };
    const auto frac = [](double num, double den) { return den != 0.0 ? num / den : 0.0; };
    const auto n1 = [&](int j) {
      return frac(x - knots[j], knots[j + 1] - knots[j]) * n0(j) +
             frac(knots[j + 2] - x, knots[j + 2] - knots[j + 1]) * n0(j + 1);
    };
    const auto dn1 = [&](int j) {
      return frac(1.0, knots[j + 1] - knots[j]) * n0(j) -
             frac(1.0, knots[j + 2] - knots[j + 1]) * n0(j + 1);
    };
    for (int a = 0; a < 3; ++a) {
      const int i = e + a;
      const double inv02 = frac(1.0, knots[i + 2] - knots[i]);
      const double inv13 = frac(1.0, knots[i + 3] - knots[i + 1]);
      val[a] = (x - knots[i]) * inv02 * n1(i) + (knots[i + 3] - x) * inv13 * n1(i + 1);
      d1[a] = 2.0 * (inv02 * n1(i) - inv13 * n1(i + 1));
      d2[a] = 2.0 * (inv02 * dn1(i) - inv13 * dn1(i + 1));
    }
  }

  double eval(const std::vector<double>& c, double x, int deriv) const {
    int e = static_cast<int>(std::floor((x - x0) / he));
    e = std::clamp(e, 0, n - 1);
    double v[3], d1[3], d2[3];
    basis(e, x, v, d1, d2);
    const double* row = deriv == 0 ? v : (deriv == 1 ? d1 : d2);
    double r = 0.0;
    for (int a = 0; a < 3; ++a) r += row[a] * c[e + a];
    return r;
  }
};

int field_index(const std::vector<std::string>& fields, const std::string& name) {
  const auto it = std::find(fields.begin(), fields.end(), name);
  if (it == fields.end()) throw SpecError("field '" + name + "' is not active in this ansatz");
  return static_cast<int>(it - fields.begin());
}

void check_problem(const ProblemSpec& spec) {
  if (spec.n < 8) {
    throw ArgumentError("ProblemSpec: n >= 8 required (got " + std::to_string(spec.n) + ")");
  }
  if (spec.h <= 0.0) throw ArgumentError("ProblemSpec: slab thickness must be positive");
  if (spec.gamma == 0.0) throw ArgumentError("ProblemSpec: gamma must be nonzero");
  const bool sg = spec.model == Model::SecondGradient;
  const bool sg_bc = spec.bc == BcKind::NormalClamp || spec.bc == BcKind::MixedSG;
  if (sg && !sg_bc) {
    throw SpecError("second gradient model takes NormalClamp or MixedSG boundary conditions");
  }
  if (!sg && sg_bc) {
    throw SpecError(to_string(spec.bc) + " applies to the second gradient model only");
  }
  if (spec.model == Model::Cosserat && spec.bc == BcKind::ConsistentCoupling) {
    throw SpecError(
        "Cosserat consistent coupling ties the boundary microrotation to the unknown normal "
        "derivative of u, which is outside this elimination-based solver");
  }
}

// Well-posedness of the consistent coupling problem requires the micro self
// energy to control the components the boundary tie leaves free. When it is
// singular on the active directions, the large-length limit loses
// coercivity, so the solve is refused up front with the kernel dimension of
// that micro form.
void guard_consistent_coupling(const ProblemSpec& spec) {
  if (spec.bc != BcKind::ConsistentCoupling) return;
  if (spec.model != Model::Micromorphic && spec.model != Model::RelaxedMicromorphic) return;
  const IsotropicModuli& p = spec.params;
  int dim = 0;
  if (spec.test == TestKind::SimpleShear) {
    // Active symmetric direction: sym(e1 x e2 + e2 x e1); energy mu_micro.
    if (p.mu_micro <= 0.0) dim = 1;
  } else {
    // Active diagonal directions: Hessian 2 mu_micro I + lambda_micro 1 1^T.
    Mat3 hess = 2.0 * p.mu_micro * Mat3::Identity() +
                p.lambda_micro * Mat3::Ones();
    Eigen::SelfAdjointEigenSolver<Mat3> es(hess);
    const double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
    for (int i = 0; i < 3; ++i) {
      if (es.eigenvalues()(i) <= 1e-12 * scale) ++dim;
    }
  }
  if (dim > 0) {
    throw SingularSystem(
        "consistent coupling with a singular micro self energy: the interior micro field is "
        "uncontrolled in " + std::to_string(dim) + " direction(s); mu_micro > 0 (and kappa_micro "
        "> 0 in extension) is required",
        dim);
  }
}

}  // namespace

std::string to_string(TestKind t) {
  return t == TestKind::SimpleShear ? "simple_shear" : "uniaxial_extension";
}

std::string to_string(BcKind b) {
  switch (b) {
    case BcKind::FullDirichlet: return "full_dirichlet";
    case BcKind::ConsistentCoupling: return "consistent_coupling";
    case BcKind::FreeMicro: return "free_micro";
    case BcKind::NormalClamp: return "normal_clamp";
    case BcKind::MixedSG: return "mixed_sg";
  }
  throw ArgumentError("to_string: unknown boundary condition");
}

TestKind test_from_string(const std::string& s) {
  if (s == "simple_shear" || s == "shear") return TestKind::SimpleShear;
  if (s == "uniaxial_extension" || s == "extension") return TestKind::UniaxialExtension;
  throw ArgumentError("unknown test kind '" + s + "'");
}

BcKind bc_from_string(const std::string& s) {
  if (s == "full_dirichlet") return BcKind::FullDirichlet;
  if (s == "consistent_coupling" || s == "cc") return BcKind::ConsistentCoupling;
  if (s == "free_micro" || s == "free") return BcKind::FreeMicro;
  if (s == "normal_clamp") return BcKind::NormalClamp;
  if (s == "mixed_sg" || s == "mixed") return BcKind::MixedSG;
  throw ArgumentError("unknown boundary condition '" + s + "'");
}

std::vector<std::string> field_names(Model model, TestKind test) {
  return ansatz_for(model, test).fields;
}

double reduce_energy(Model model, TestKind test, const IsotropicModuli& p, const PointState& y) {
  const Ansatz az = ansatz_for(model, test);
  const size_t nf = az.fields.size();
  if (y.value.size() != nf || y.deriv.size() != nf) {
    throw SpecError("PointState size does not match the ansatz (" + std::to_string(nf) +
                    " fields)");
  }
  std::vector<double> flat(az.ylen, 0.0);
  for (size_t f = 0; f < nf; ++f) {
    flat[2 * f] = y.value[f];
    flat[2 * f + 1] = y.deriv[f];
  }
  if (az.second_gradient) flat.back() = y.u_second;
  return energy_density(model, p, state_from_flat(model, test, flat.data()));
}

AssembledSystem assemble(const ProblemSpec& spec) {
  check_problem(spec);
  const Ansatz az = ansatz_for(spec.model, spec.test);
  const int nf = static_cast<int>(az.fields.size());
  const double he = spec.h / spec.n;
  const double x0 = -0.5 * spec.h;
  const Eigen::MatrixXd a = ansatz_hessian(spec.model, spec.test, spec.params);

  AssembledSystem sys;
  sys.fields = az.fields;
  sys.he = he;

  std::vector<Eigen::Triplet<double>> trip;
  const double xis[2] = {-kGaussPoint, kGaussPoint};

  if (!az.second_gradient) {
    sys.n_dofs = (spec.n + 1) * nf;
    const int m = az.ylen;
    Eigen::MatrixXd b(m, 2 * nf);
    for (int e = 0; e < spec.n; ++e) {
      Eigen::MatrixXd ke = Eigen::MatrixXd::Zero(2 * nf, 2 * nf);
      for (double xi : xis) {
        const double n1 = 0.5 * (1.0 - xi);
        const double n2 = 0.5 * (1.0 + xi);
        b.setZero();
        for (int f = 0; f < nf; ++f) {
          b(2 * f, f) = n1;
          b(2 * f, nf + f) = n2;
          b(2 * f + 1, f) = -1.0 / he;
          b(2 * f + 1, nf + f) = 1.0 / he;
        }
        ke += (0.5 * he) * b.transpose() * a * b;
      }
      for (int r = 0; r < 2 * nf; ++r) {
        const int gr = (e + r / nf) * nf + (r % nf);
        for (int c = 0; c < 2 * nf; ++c) {
          const int gc = (e + c / nf) * nf + (c % nf);
          if (ke(r, c) != 0.0) trip.emplace_back(gr, gc, ke(r, c));
        }
      }
    }
  } else {
    const QuadSpline spline(spec.n, x0, he);
    sys.n_dofs = spline.ndof();
    for (int e = 0; e < spec.n; ++e) {
      Eigen::MatrixXd ke = Eigen::MatrixXd::Zero(3, 3);
      for (double xi : xis) {
        const double x = x0 + he * (e + 0.5 * (1.0 + xi));
        double v[3], d1[3], d2[3];
        spline.basis(e, x, v, d1, d2);
        Eigen::MatrixXd b(3, 3);
        for (int c = 0; c < 3; ++c) {
          b(0, c) = v[c];
          b(1, c) = d1[c];
          b(2, c) = d2[c];
        }
        ke += (0.5 * he) * b.transpose() * a * b;
      }
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
          if (ke(r, c) != 0.0) trip.emplace_back(e + r, e + c, ke(r, c));
    }
  }

  sys.K.resize(sys.n_dofs, sys.n_dofs);
  sys.K.setFromTriplets(trip.begin(), trip.end());

  // Essential pins. The displacement is always driven antisymmetrically.
  const double u_left = -0.5 * spec.gamma * spec.h;
  const double u_right = 0.5 * spec.gamma * spec.h;
  if (!az.second_gradient) {
    sys.constraints.emplace_back(0, u_left);
    sys.constraints.emplace_back(spec.n * nf, u_right);
    const auto pin_both_ends = [&](const std::string& name) {
      const int f = field_index(az.fields, name);
      sys.constraints.emplace_back(f, 0.0);
      sys.constraints.emplace_back(spec.n * nf + f, 0.0);
    };
    switch (spec.bc) {
      case BcKind::FullDirichlet:
        for (int f = 1; f < nf; ++f) pin_both_ends(az.fields[f]);
        break;
      case BcKind::ConsistentCoupling:
        if (nf > 1) {
          if (spec.test == TestKind::SimpleShear) {
            pin_both_ends("P21");
          } else {
            pin_both_ends("P11");
            pin_both_ends("P33");
          }
        }
        break;
      case BcKind::FreeMicro:
        break;
      default:
        break;  // unreachable, check_problem filtered these
    }
  } else {
    const int nd = sys.n_dofs;
    sys.constraints.emplace_back(0, u_left);
    sys.constraints.emplace_back(nd - 1, u_right);
    if (spec.bc == BcKind::NormalClamp) {
      // u'( -h/2 ) = 2 (c1 - c0) / he = 0 and likewise at the other end.
      sys.constraints.emplace_back(1, u_left);
      sys.constraints.emplace_back(nd - 2, u_right);
    }
  }
  return sys;
}

Solution1D solve(const ProblemSpec& spec) {
  check_problem(spec);
  guard_consistent_coupling(spec);
  const AssembledSystem sys = assemble(spec);
  const int nd = sys.n_dofs;

  std::vector<int> to_free(nd, -1);
  std::vector<double> pinned(nd, 0.0);
  std::vector<bool> is_pinned(nd, false);
  for (const auto& [dof, val] : sys.constraints) {
    is_pinned[dof] = true;
    pinned[dof] = val;
  }
  int nfree = 0;
  for (int i = 0; i < nd; ++i) {
    if (!is_pinned[i]) to_free[i] = nfree++;
  }

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nfree);
  std::vector<Eigen::Triplet<double>> trip;
  for (int col = 0; col < sys.K.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.K, col); it; ++it) {
      const int r = static_cast<int>(it.row());
      const int c = static_cast<int>(it.col());
      if (is_pinned[r]) continue;
      if (is_pinned[c]) {
        rhs(to_free[r]) -= it.value() * pinned[c];
      } else {
        trip.emplace_back(to_free[r], to_free[c], it.value());
      }
    }
  }
  Eigen::SparseMatrix<double> kff(nfree, nfree);
  kff.setFromTriplets(trip.begin(), trip.end());

  // Symmetric diagonal equilibration keeps the pivot test meaningful across
  // the wide entry scales a large L_c / fine grid combination produces.
  Eigen::VectorXd dscale(nfree);
  for (int i = 0; i < nfree; ++i) {
    const double d = kff.coeff(i, i);
    dscale(i) = d > 0.0 ? 1.0 / std::sqrt(d) : 1.0;
  }
  Eigen::SparseMatrix<double> ks = kff;
  for (int col = 0; col < ks.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(ks, col); it; ++it) {
      it.valueRef() *= dscale(it.row()) * dscale(it.col());
    }
  }

  const auto report_singular = [&]() -> void {
    // Kernel dimension from a dense eigensolve of the reduced operator.
    int dim = 0;
    if (nfree <= 4096) {
      Eigen::MatrixXd dense(ks);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
      const double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
      for (int i = 0; i < nfree; ++i) {
        if (std::abs(es.eigenvalues()(i)) <= 1e-10 * scale) ++dim;
      }
    }
    throw SingularSystem("reduced stiffness matrix is singular (kernel dimension " +
                             std::to_string(dim) + ")",
                         dim);
  };

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  ldlt.compute(ks);
  if (ldlt.info() != Eigen::Success) report_singular();
  {
    const Eigen::VectorXd d = ldlt.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    if (!(dmax > 0.0) || d.minCoeff() <= 1e-12 * dmax) report_singular();
  }

  Eigen::VectorXd xs = ldlt.solve(dscale.asDiagonal() * rhs);
  Eigen::VectorXd xf = dscale.asDiagonal() * xs;
  const double rscale = std::max(rhs.norm(), 1e-300);

  // Refine against the unscaled operator. One factored solve loses digits
  // once the curvature block dwarfs the lower order terms (large L_c on a
  // fine grid); cheap refinement sweeps win them back, and the loop stops
  // as soon as the residual stalls.
  double rnorm = (kff * xf - rhs).norm();
  for (int pass = 0; pass < 8 && rnorm > 1e-15 * rscale; ++pass) {
    const Eigen::VectorXd r = rhs - kff * xf;
    const Eigen::VectorXd dx =
        dscale.asDiagonal() * ldlt.solve((dscale.asDiagonal() * r).eval()).eval();
    const Eigen::VectorXd cand = xf + dx;
    const double cnorm = (kff * cand - rhs).norm();
    if (cnorm >= rnorm) break;
    xf = cand;
    rnorm = cnorm;
  }
  if (rnorm > 1e-8 * rscale) report_singular();

  Eigen::VectorXd x(nd);
  for (int i = 0; i < nd; ++i) x(i) = is_pinned[i] ? pinned[i] : xf(to_free[i]);

  Solution1D sol;
  sol.n_dofs = nd;
  sol.residual = rnorm / rscale;
  sol.raw_dofs.assign(x.data(), x.data() + nd);
  sol.names = sys.fields;
  // The quadratic form x' K x loses digits to cancellation once the
  // curvature entries dwarf the O(1) energy; the element loop evaluates the
  // same quadrature from local states, where the near zero derivatives are
  // formed before they are squared, and stays at machine precision.
  sol.energy = dof_energy(spec, sol.raw_dofs);
  sol.stiffness = apparent_stiffness(sol.energy, spec.gamma, spec.h);

  const double x0 = -0.5 * spec.h;
  sol.x.resize(spec.n + 1);
  for (int i = 0; i <= spec.n; ++i) sol.x[i] = x0 + sys.he * i;

  const int nf = static_cast<int>(sys.fields.size());
  sol.profiles.assign(sys.fields.size(), std::vector<double>(spec.n + 1, 0.0));
  if (spec.model != Model::SecondGradient) {
    for (int f = 0; f < nf; ++f)
      for (int i = 0; i <= spec.n; ++i) sol.profiles[f][i] = x(i * nf + f);
  } else {
    const QuadSpline spline(spec.n, x0, sys.he);
    for (int i = 0; i <= spec.n; ++i) sol.profiles[0][i] = spline.eval(sol.raw_dofs, sol.x[i], 0);
  }
  return sol;
}

double apparent_stiffness(double energy, double gamma, double h) {
  if (gamma == 0.0 || h <= 0.0) throw ArgumentError("apparent_stiffness: gamma h must be nonzero");
  return 2.0 * energy / (gamma * gamma * h);
}

double dof_energy(const ProblemSpec& spec, const std::vector<double>& dofs) {
  check_problem(spec);
  const Ansatz az = ansatz_for(spec.model, spec.test);
  const int nf = static_cast<int>(az.fields.size());
  const double he = spec.h / spec.n;
  const double x0 = -0.5 * spec.h;
  const double xis[2] = {-kGaussPoint, kGaussPoint};
  double total = 0.0;
  if (!az.second_gradient) {
    if (static_cast<int>(dofs.size()) != (spec.n + 1) * nf) {
      throw ArgumentError("dof_energy: dof vector does not match the grid");
    }
    std::vector<double> y(az.ylen, 0.0);
    for (int e = 0; e < spec.n; ++e) {
      for (double xi : xis) {
        const double n1 = 0.5 * (1.0 - xi);
        const double n2 = 0.5 * (1.0 + xi);
        for (int f = 0; f < nf; ++f) {
          const double a = dofs[e * nf + f];
          const double b = dofs[(e + 1) * nf + f];
          y[2 * f] = n1 * a + n2 * b;
          y[2 * f + 1] = (b - a) / he;
        }
        total += 0.5 * he *
                 energy_density(spec.model, spec.params,
                                state_from_flat(spec.model, spec.test, y.data()));
      }
    }
  } else {
    const QuadSpline spline(spec.n, x0, he);
    if (static_cast<int>(dofs.size()) != spline.ndof()) {
      throw ArgumentError("dof_energy: dof vector does not match the grid");
    }
    for (int e = 0; e < spec.n; ++e) {
      for (double xi : xis) {
        const double x = x0 + he * (e + 0.5 * (1.0 + xi));
        double v[3], d1[3], d2[3];
        spline.basis(e, x, v, d1, d2);
        double y[3] = {0.0, 0.0, 0.0};
        for (int a = 0; a < 3; ++a) {
          y[0] += v[a] * dofs[e + a];
          y[1] += d1[a] * dofs[e + a];
          y[2] += d2[a] * dofs[e + a];
        }
        total += 0.5 * he *
                 energy_density(spec.model, spec.params,
                                state_from_flat(spec.model, spec.test, y));
      }
    }
  }
  return total;
}

double coercivity_eigenvalue(const ProblemSpec& spec) {
  const AssembledSystem sys = assemble(spec);
  const int nd = sys.n_dofs;
  const double he = sys.he;

  std::vector<Eigen::Triplet<double>> trip;
  if (spec.model != Model::SecondGradient) {
    const int nf = static_cast<int>(sys.fields.size());
    const double m00 = he / 3.0;
    const double m01 = he / 6.0;
    for (int e = 0; e < spec.n; ++e) {
      for (int f = 0; f < nf; ++f) {
        const int a = e * nf + f;
        const int b = (e + 1) * nf + f;
        trip.emplace_back(a, a, m00);
        trip.emplace_back(b, b, m00);
        trip.emplace_back(a, b, m01);
        trip.emplace_back(b, a, m01);
      }
    }
  } else {
    const double x0 = -0.5 * spec.h;
    const QuadSpline spline(spec.n, x0, he);
    // Three point Gauss is exact for the degree four spline products.
    const double gx[3] = {-0.77459666924148337704, 0.0, 0.77459666924148337704};
    const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    for (int e = 0; e < spec.n; ++e) {
      for (int q = 0; q < 3; ++q) {
        const double x = x0 + he * (e + 0.5 * (1.0 + gx[q]));
        double v[3], d1[3], d2[3];
        spline.basis(e, x, v, d1, d2);
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c)
            trip.emplace_back(e + r, e + c, 0.5 * he * gw[q] * v[r] * v[c]);
      }
    }
  }
  Eigen::SparseMatrix<double> mass(nd, nd);
  mass.setFromTriplets(trip.begin(), trip.end());

  std::vector<bool> is_pinned(nd, false);
  for (const auto& [dof, val] : sys.constraints) {
    (void)val;
    is_pinned[dof] = true;
  }
  std::vector<int> to_free(nd, -1);
  int nfree = 0;
  for (int i = 0; i < nd; ++i) {
    if (!is_pinned[i]) to_free[i] = nfree++;
  }
  if (nfree == 0) throw ArgumentError("coercivity_eigenvalue: every dof is pinned");

  Eigen::MatrixXd kff = Eigen::MatrixXd::Zero(nfree, nfree);
  Eigen::MatrixXd mff = Eigen::MatrixXd::Zero(nfree, nfree);
  const auto copy_free = [&](const Eigen::SparseMatrix<double>& src, Eigen::MatrixXd& dst) {
    for (int col = 0; col < src.outerSize(); ++col) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(src, col); it; ++it) {
        const int r = static_cast<int>(it.row());
        const int c = static_cast<int>(it.col());
        if (!is_pinned[r] && !is_pinned[c]) dst(to_free[r], to_free[c]) += it.value();
      }
    }
  };
  copy_free(sys.K, kff);
  copy_free(mass, mff);

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(kff, mff);
  if (es.info() != Eigen::Success) {
    throw ArgumentError("coercivity_eigenvalue: generalized eigensolve failed");
  }
  return es.eigenvalues()(0);
}

MomentTraceReport natural_moment_trace(const ProblemSpec& spec, const Solution1D& sol) {
  check_problem(spec);
  if (spec.model == Model::LinearElastic) {
    throw ArgumentError("natural_moment_trace: linear elasticity carries no moment");
  }
  const Ansatz az = ansatz_for(spec.model, spec.test);
  const int nf = static_cast<int>(az.fields.size());
  const double he = spec.h / spec.n;

  const auto scalar_at = [&](bool high) {
    std::vector<double> y(az.ylen, 0.0);
    if (spec.model != Model::SecondGradient) {
      if (static_cast<int>(sol.raw_dofs.size()) != (spec.n + 1) * nf) {
        throw ArgumentError("natural_moment_trace: solution does not match the problem");
      }
      const int end = high ? spec.n : 0;
      const int inner = high ? spec.n - 1 : 1;
      for (int f = 0; f < nf; ++f) {
        const double ve = sol.raw_dofs[end * nf + f];
        const double vi = sol.raw_dofs[inner * nf + f];
        y[2 * f] = ve;
        y[2 * f + 1] = (high ? ve - vi : vi - ve) / he;
      }
    } else {
      const QuadSpline spline(spec.n, -0.5 * spec.h, he);
      if (static_cast<int>(sol.raw_dofs.size()) != spline.ndof()) {
        throw ArgumentError("natural_moment_trace: solution does not match the problem");
      }
      const double x = (high ? 0.5 : -0.5) * spec.h;
      y[0] = spline.eval(sol.raw_dofs, x, 0);
      y[1] = spline.eval(sol.raw_dofs, x, 1);
      y[2] = spline.eval(sol.raw_dofs, x, 2);
    }
    const KinematicState s = state_from_flat(spec.model, spec.test, y.data());
    const auto mv = moment(spec.model, spec.params, s);
    const Tensor333 t =
        std::holds_alternative<Tensor333>(mv) ? std::get<Tensor333>(mv)
                                              : levi_lift(std::get<Mat3>(mv));
    const Vec3 nu = (high ? 1.0 : -1.0) * Vec3::Unit(1);
    return nu.dot(dot_vec(t, nu) * nu);
  };

  MomentTraceReport rep;
  rep.low = scalar_at(false);
  rep.high = scalar_at(true);
  return rep;
}

StiffnessCurve sweep_lc(const ProblemSpec& spec, const std::vector<double>& lcs, int jobs) {
  if (lcs.empty()) throw ArgumentError("sweep_lc: empty length list");
  StiffnessCurve curve;
  curve.model = spec.model;
  curve.test = spec.test;
  curve.bc = spec.bc;
  curve.lc = lcs;
  curve.stiffness.assign(lcs.size(), 0.0);

  const int nthreads = std::max(1, std::min<int>(jobs, static_cast<int>(lcs.size())));
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  std::atomic<size_t> next{0};
  std::mutex err_mutex;
  const auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= lcs.size()) return;
      try {
        ProblemSpec local = spec;
        local.params.L_c = lcs[i];
        curve.stiffness[i] = solve(local).stiffness;
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  if (nthreads == 1) {
    worker();
  } else {
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return curve;
}

std::vector<double> log_spaced(double lo, double hi, int npoints) {
  if (npoints < 2 || lo <= 0.0 || hi <= lo) {
    throw ArgumentError("log_spaced: need npoints >= 2 and 0 < lo < hi");
  }
  std::vector<double> v(npoints);
  for (int i = 0; i < npoints; ++i) {
    v[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (npoints - 1));
  }
  return v;
}

bool is_monotone_nondecreasing(const std::vector<double>& v, double tol) {
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  for (size_t i = 1; i < v.size(); ++i) {
    if (v[i] < v[i - 1] - tol * scale) return false;
  }
  return true;
}

double sg_effective_length(const IsotropicModuli& p, TestKind test) {
  const DerivedModuli d = derive(p);
  const double l2 = test == TestKind::SimpleShear
                        ? p.mu * p.L_c * p.L_c * (p.a1 + p.a2) / (2.0 * d.mu_macro)
                        : 2.0 * p.mu * p.L_c * p.L_c * (p.a1 + p.a3) / (3.0 * d.M_macro);
  return std::sqrt(l2);
}

double analytic_sg_dirichlet(const IsotropicModuli& p, TestKind test, double h, double gamma,
                             double x) {
  const double l = sg_effective_length(p, test);
  if (l == 0.0) return gamma * x;
  // sinh(x/l)/cosh(h/2l) with only nonpositive exponents, so large h/l is safe.
  const double s = (std::exp((x - 0.5 * h) / l) - std::exp((-x - 0.5 * h) / l)) /
                   (1.0 + std::exp(-h / l));
  const double t = std::tanh(0.5 * h / l);
  return 0.5 * gamma * h * (x / h - (l / h) * s) / (0.5 - (l / h) * t);
}

BoundaryResiduals boundary_residuals(const ProblemSpec& spec, const Solution1D& sol) {
  const AssembledSystem sys = assemble(spec);
  if (static_cast<int>(sol.raw_dofs.size()) != sys.n_dofs) {
    throw ArgumentError("boundary_residuals: solution does not match the problem");
  }
  BoundaryResiduals out;
  if (spec.model != Model::SecondGradient) {
    const int nf = static_cast<int>(sys.fields.size());
    for (const auto& [dof, val] : sys.constraints) {
      const int node = dof / nf;
      const std::string side = node == 0 ? "-h/2" : "+h/2";
      const std::string label = sys.fields[dof % nf] + "(" + side + ")";
      out.entries.emplace_back(label, std::abs(sol.raw_dofs[dof] - val));
    }
  } else {
    const QuadSpline spline(spec.n, -0.5 * spec.h, sys.he);
    const double ends[2] = {-0.5 * spec.h, 0.5 * spec.h};
    const double targets[2] = {-0.5 * spec.gamma * spec.h, 0.5 * spec.gamma * spec.h};
    for (int s = 0; s < 2; ++s) {
      const std::string side = s == 0 ? "-h/2" : "+h/2";
      out.entries.emplace_back("u(" + side + ")",
                               std::abs(spline.eval(sol.raw_dofs, ends[s], 0) - targets[s]));
      if (spec.bc == BcKind::NormalClamp) {
        out.entries.emplace_back("u'(" + side + ")",
                                 std::abs(spline.eval(sol.raw_dofs, ends[s], 1)));
      }
    }
  }
  for (const auto& [label, r] : out.entries) out.max_abs = std::max(out.max_abs, r);
  return out;
}

ConvergenceStudy convergence_study(const ProblemSpec& spec, const std::vector<int>& ns) {
  if (ns.size() < 2) throw ArgumentError("convergence_study: need at least two grids");
  ConvergenceStudy study;
  study.ns = ns;

  const bool analytic =
      spec.model == Model::SecondGradient && spec.bc == BcKind::NormalClamp;
  Solution1D ref;
  int n_ref = 0;
  if (!analytic) {
    n_ref = 8 * *std::max_element(ns.begin(), ns.end());
    ProblemSpec rs = spec;
    rs.n = n_ref;
    ref = solve(rs);
  }

  for (int n : ns) {
    ProblemSpec cs = spec;
    cs.n = n;
    const Solution1D sol = solve(cs);
    double err = 0.0;
    for (int i = 0; i <= n; ++i) {
      double exact;
      if (analytic) {
        exact = analytic_sg_dirichlet(spec.params, spec.test, spec.h, spec.gamma, sol.x[i]);
      } else {
        if (n_ref % n != 0) throw ArgumentError("convergence_study: grids must nest");
        exact = ref.profiles[0][i * (n_ref / n)];
      }
      err = std::max(err, std::abs(sol.profiles[0][i] - exact));
    }
    study.errors.push_back(err);
    study.hs.push_back(spec.h / n);
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int m = static_cast<int>(ns.size());
  for (int i = 0; i < m; ++i) {
    const double lx = std::log(study.hs[i]);
    const double ly = std::log(std::max(study.errors[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    if (i > 0) {
      study.step_orders.push_back(std::log(study.errors[i - 1] / study.errors[i]) /
                                  std::log(study.hs[i - 1] / study.hs[i]));
    }
  }
  study.observed_order = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return study;
}

}  // namespace gencont
