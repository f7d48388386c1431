#include "gencont/modes.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>

namespace gencont {

namespace {

constexpr double kRankTol = 1e-10;

using RowList = std::vector<Eigen::RowVectorXd>;

Eigen::MatrixXd stack(const RowList& rows, int cols) {
  Eigen::MatrixXd m(rows.size(), cols);
  for (size_t i = 0; i < rows.size(); ++i) m.row(static_cast<int>(i)) = rows[i];
  return m;
}

/// Orthonormal null space basis of (rows x cols), with the relative singular
/// value threshold kRankTol. An empty row list yields the identity.
Eigen::MatrixXd nullspace(const RowList& rows, int cols) {
  if (rows.empty()) return Eigen::MatrixXd::Identity(cols, cols);
  const Eigen::MatrixXd m = stack(rows, cols);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double tol = kRankTol * std::max(sv.size() > 0 ? sv(0) : 0.0, 1e-300);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) ++rank;
  }
  return svd.matrixV().rightCols(cols - rank);
}

// --- index helpers for the 21-dim mode space -------------------------------

int idx_A(int i, int j) { return 3 * i + j; }
int idx_b(int i) { return 9 + i; }
int idx_P(int i, int j) { return 12 + 3 * i + j; }

void add_sym_rows(RowList& rows, double wa, int (*ia)(int, int), double wb, int (*ib)(int, int)) {
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(21);
      r(ia(i, j)) += 0.5 * wa;
      r(ia(j, i)) += 0.5 * wa;
      if (wb != 0.0) {
        r(ib(i, j)) += 0.5 * wb;
        r(ib(j, i)) += 0.5 * wb;
      }
      rows.push_back(r);
    }
  }
}

void add_skew_rows(RowList& rows, double wa, int (*ia)(int, int), double wb, int (*ib)(int, int)) {
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(21);
      r(ia(i, j)) += 0.5 * wa;
      r(ia(j, i)) -= 0.5 * wa;
      if (wb != 0.0) {
        r(ib(i, j)) += 0.5 * wb;
        r(ib(j, i)) -= 0.5 * wb;
      }
      rows.push_back(r);
    }
  }
}

void add_full_rows(RowList& rows, int (*ia)(int, int)) {
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(21);
      r(ia(i, j)) = 1.0;
      rows.push_back(r);
    }
  }
}

RowList kernel_rows(Model model, const IsotropicModuli& p) {
  RowList rows;
  switch (model) {
    case Model::LinearElastic:
    case Model::SecondGradient:
      add_sym_rows(rows, 1.0, idx_A, 0.0, idx_A);
      add_full_rows(rows, idx_P);
      break;
    case Model::Cosserat:
      add_sym_rows(rows, 1.0, idx_A, 0.0, idx_A);
      add_sym_rows(rows, 1.0, idx_P, 0.0, idx_P);
      if (p.mu_c > 0.0) add_skew_rows(rows, 1.0, idx_A, -1.0, idx_P);
      break;
    case Model::Micromorphic:
    case Model::RelaxedMicromorphic:
      // Curl of a constant P vanishes, so the relaxed model shares these rows.
      add_sym_rows(rows, 1.0, idx_A, -1.0, idx_P);
      add_sym_rows(rows, 1.0, idx_P, 0.0, idx_P);
      if (p.mu_c > 0.0) add_skew_rows(rows, 1.0, idx_A, -1.0, idx_P);
      break;
  }
  return rows;
}

std::vector<ModeVector> to_modes(const Eigen::MatrixXd& basis) {
  std::vector<ModeVector> out;
  for (int c = 0; c < basis.cols(); ++c) {
    Eigen::Matrix<double, 21, 1> v = basis.col(c);
    // The SVD leaves roundoff dust in slots the subspace does not touch. A
    // mode whose micro part is nothing but that dust would still fail the
    // Cosserat skew guard (noise is neither symmetric nor skew), so snap
    // negligible entries before handing the basis out.
    const double top = v.cwiseAbs().maxCoeff();
    for (int i = 0; i < 21; ++i) {
      if (std::abs(v(i)) <= 1e-13 * top) v(i) = 0.0;
    }
    out.push_back(ModeVector::unflatten(v));
  }
  return out;
}

}  // namespace

Eigen::Matrix<double, 21, 1> ModeVector::flatten() const {
  Eigen::Matrix<double, 21, 1> v;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) v(idx_A(i, j)) = A_u(i, j);
  for (int i = 0; i < 3; ++i) v(idx_b(i)) = b(i);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) v(idx_P(i, j)) = P0(i, j);
  return v;
}

ModeVector ModeVector::unflatten(const Eigen::Matrix<double, 21, 1>& v) {
  ModeVector m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m.A_u(i, j) = v(idx_A(i, j));
  for (int i = 0; i < 3; ++i) m.b(i) = v(idx_b(i));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m.P0(i, j) = v(idx_P(i, j));
  return m;
}

std::string to_string(GammaSpec g) {
  switch (g) {
    case GammaSpec::ClampU: return "clamp_u";
    case GammaSpec::ClampUClampP: return "clamp_u_clamp_p";
    case GammaSpec::ClampUConsistent: return "clamp_u_consistent";
    case GammaSpec::ClampUSym: return "clamp_u_sym";
    case GammaSpec::ClampUDevSym: return "clamp_u_devsym";
  }
  throw ArgumentError("to_string: unknown gamma spec");
}

GammaSpec gamma_from_string(const std::string& s) {
  if (s == "clamp_u" || s == "clamp-u") return GammaSpec::ClampU;
  if (s == "clamp_u_clamp_p" || s == "clamp-u+p") return GammaSpec::ClampUClampP;
  if (s == "clamp_u_consistent" || s == "clamp_u_cc" || s == "clamp-u+cc") {
    return GammaSpec::ClampUConsistent;
  }
  if (s == "clamp_u_sym" || s == "clamp-u+sym") return GammaSpec::ClampUSym;
  if (s == "clamp_u_devsym" || s == "clamp-u+devsym") return GammaSpec::ClampUDevSym;
  throw ArgumentError("unknown gamma spec '" + s + "'");
}

KernelReport zero_energy_kernel(Model model, const IsotropicModuli& p) {
  const Eigen::MatrixXd basis = nullspace(kernel_rows(model, p), 21);
  KernelReport rep;
  rep.dim = static_cast<int>(basis.cols());
  rep.basis = to_modes(basis);
  return rep;
}

ModeReport apply_bc(Model model, const IsotropicModuli& p, GammaSpec bc, const Vec3& nu,
                    const Vec3& x0) {
  if (std::abs(nu.norm() - 1.0) > 1e-12) {
    throw InvalidNormal("apply_bc: boundary normal must have unit length");
  }
  const Eigen::MatrixXd kernel = nullspace(kernel_rows(model, p), 21);

  // Two tangents spanning the plane.
  const int least = [&nu] {
    int k = 0;
    for (int i = 1; i < 3; ++i)
      if (std::abs(nu(i)) < std::abs(nu(k))) k = i;
    return k;
  }();
  const Vec3 t1 = nu.cross(Vec3::Unit(least)).normalized();
  const Vec3 t2 = nu.cross(t1);

  RowList rows;
  // u = 0 on the plane: A_u annihilates both tangents and A_u x0 + b = 0.
  for (const Vec3& t : {t1, t2}) {
    for (int i = 0; i < 3; ++i) {
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(21);
      for (int j = 0; j < 3; ++j) r(idx_A(i, j)) = t(j);
      rows.push_back(r);
    }
  }
  for (int i = 0; i < 3; ++i) {
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(21);
    for (int j = 0; j < 3; ++j) r(idx_A(i, j)) = x0(j);
    r(idx_b(i)) = 1.0;
    rows.push_back(r);
  }

  const Mat3 an = anti(nu);
  const auto tie_entry = [&an](int i, int j) {
    // Row coefficients of ((A_u - P0) anti(nu))(i, j).
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(21);
    for (int k = 0; k < 3; ++k) {
      r(idx_A(i, k)) += an(k, j);
      r(idx_P(i, k)) -= an(k, j);
    }
    return r;
  };

  switch (bc) {
    case GammaSpec::ClampU:
      break;
    case GammaSpec::ClampUClampP:
      add_full_rows(rows, idx_P);
      break;
    case GammaSpec::ClampUConsistent:
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) rows.push_back(tie_entry(i, j));
      break;
    case GammaSpec::ClampUSym:
      for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) rows.push_back(0.5 * (tie_entry(i, j) + tie_entry(j, i)));
      break;
    case GammaSpec::ClampUDevSym:
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          Eigen::RowVectorXd r = 0.5 * (tie_entry(i, j) + tie_entry(j, i));
          if (i == j) {
            for (int k = 0; k < 3; ++k) r -= (1.0 / 3.0) * tie_entry(k, k);
          }
          rows.push_back(r);
        }
      break;
  }

  // Restrict the boundary rows to the kernel.
  Eigen::MatrixXd restricted = stack(rows, 21) * kernel;
  RowList rrows;
  for (int i = 0; i < restricted.rows(); ++i) rrows.push_back(restricted.row(i));
  const Eigen::MatrixXd local = nullspace(rrows, static_cast<int>(kernel.cols()));
  const Eigen::MatrixXd surviving = kernel * local;

  ModeReport rep;
  rep.model = model;
  rep.mu_c = p.mu_c;
  rep.bc = bc;
  rep.dim_before = static_cast<int>(kernel.cols());
  rep.dim_after = static_cast<int>(surviving.cols());
  rep.expected = expected_dim_after(model, p.mu_c > 0.0, bc);
  rep.match = rep.dim_after == rep.expected;
  rep.basis = to_modes(surviving);
  return rep;
}

int expected_dim_after(Model model, bool mu_c_positive, GammaSpec bc) {
  // Clamping u on a plane kills every admissible A_u and b. What can survive
  // is an unconstrained skew P0, which exists only for the mu_c = 0 coupled
  // models, and only until any P-side condition is added.
  const bool free_skew_p0 =
      (model == Model::Cosserat || model == Model::Micromorphic ||
       model == Model::RelaxedMicromorphic) &&
      !mu_c_positive;
  if (bc == GammaSpec::ClampU && free_skew_p0) return 3;
  return 0;
}

RedundancyReport redundancy_classify(Model model, const IsotropicModuli& p) {
  if (model == Model::LinearElastic) {
    throw ArgumentError("redundancy_classify: linear elasticity has no curvature term");
  }

  // Coefficient space of quadratic u and affine P:
  //   A0 (9) | Ak (27, Du = A0 + Ak x_k) | P0 (9) | G (27, P = P0 + G_k x_k)
  const int na0 = 0, nak = 9, np0 = 36, ng = 45, dim = 72;
  const auto a0 = [&](int i, int j) { return na0 + 3 * i + j; };
  const auto ak = [&](int i, int j, int k) { return nak + 9 * k + 3 * i + j; };
  const auto p0 = [&](int i, int j) { return np0 + 3 * i + j; };
  const auto gk = [&](int i, int j, int k) { return ng + 9 * k + 3 * i + j; };

  RowList domain;
  // Du must integrate to a displacement: d_k (Du)(i,j) symmetric in (j,k).
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = j + 1; k < 3; ++k) {
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(dim);
        r(ak(i, j, k)) += 1.0;
        r(ak(i, k, j)) -= 1.0;
        domain.push_back(r);
      }

  const auto zero_whole_p = [&](RowList& rows) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(dim);
        r(p0(i, j)) = 1.0;
        rows.push_back(r);
        for (int k = 0; k < 3; ++k) {
          Eigen::RowVectorXd rg = Eigen::RowVectorXd::Zero(dim);
          rg(gk(i, j, k)) = 1.0;
          rows.push_back(rg);
        }
      }
  };

  // sym / skew of (wa X + wb Y) for the constant and each linear slice, where
  // X, Y are indexers into the coefficient space.
  enum class Part { Sym, Skew };
  const auto add_part = [&](RowList& rows, Part part, double wa,
                            const std::function<int(int, int, int)>& xa, double wb,
                            const std::function<int(int, int, int)>& xb) {
    for (int slice = 0; slice < 4; ++slice) {  // 0: constant, 1..3: linear k
      for (int i = 0; i < 3; ++i) {
        const int jlo = part == Part::Sym ? i : i + 1;
        for (int j = jlo; j < 3; ++j) {
          if (part == Part::Skew && j == i) continue;
          Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(dim);
          const double sgn = part == Part::Sym ? 1.0 : -1.0;
          r(xa(i, j, slice)) += 0.5 * wa;
          r(xa(j, i, slice)) += sgn * 0.5 * wa;
          if (wb != 0.0) {
            r(xb(i, j, slice)) += 0.5 * wb;
            r(xb(j, i, slice)) += sgn * 0.5 * wb;
          }
          rows.push_back(r);
        }
      }
    }
  };
  const auto du_at = [&](int i, int j, int slice) { return slice == 0 ? a0(i, j) : ak(i, j, slice - 1); };
  const auto pp_at = [&](int i, int j, int slice) { return slice == 0 ? p0(i, j) : gk(i, j, slice - 1); };

  RowList w1;
  RowList w2;
  switch (model) {
    case Model::SecondGradient:
      zero_whole_p(domain);
      add_part(w1, Part::Sym, 1.0, du_at, 0.0, du_at);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k) {
            Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(dim);
            r(ak(i, j, k)) = 1.0;
            w2.push_back(r);
          }
      break;
    case Model::Cosserat:
      add_part(domain, Part::Sym, 1.0, pp_at, 0.0, pp_at);  // P stays skew
      add_part(w1, Part::Sym, 1.0, du_at, 0.0, du_at);
      if (p.mu_c > 0.0) add_part(w1, Part::Skew, 1.0, du_at, -1.0, pp_at);
      break;
    case Model::Micromorphic:
    case Model::RelaxedMicromorphic:
      add_part(w1, Part::Sym, 1.0, du_at, -1.0, pp_at);
      add_part(w1, Part::Sym, 1.0, pp_at, 0.0, pp_at);
      if (p.mu_c > 0.0) add_part(w1, Part::Skew, 1.0, du_at, -1.0, pp_at);
      break;
    default:
      break;
  }

  if (model == Model::Micromorphic) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(dim);
          r(gk(i, j, k)) = 1.0;
          w2.push_back(r);
        }
  } else if (model == Model::RelaxedMicromorphic || model == Model::Cosserat) {
    // (Curl P)(a, b) = eps(b, i, j) G(a, j, i).
    const Tensor333& eps = Tensor333::epsilon();
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(dim);
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            const double e = eps(b, i, j);
            if (e != 0.0) r(gk(a, j, i)) += e;
          }
        w2.push_back(r);
      }
  }

  const auto with_domain = [&](const RowList& extra) {
    RowList all = domain;
    all.insert(all.end(), extra.begin(), extra.end());
    return all;
  };

  const Eigen::MatrixXd n1 = nullspace(with_domain(w1), dim);
  const Eigen::MatrixXd n2 = nullspace(with_domain(w2), dim);
  const Eigen::MatrixXd w2_on_n1 = stack(w2, dim) * n1;
  const Eigen::MatrixXd w1_on_n2 = stack(w1, dim) * n2;

  RedundancyReport rep;
  rep.model = model;
  rep.lower_forces_all = w2_on_n1.norm() <= kRankTol;
  rep.curvature_forces_all = w1_on_n2.norm() <= kRankTol;
  rep.redundant = rep.lower_forces_all || rep.curvature_forces_all;

  if (!rep.redundant && n1.cols() > 0) {
    // Field with vanishing lower order energy but active curvature.
    int best = 0;
    double best_norm = -1.0;
    for (int c = 0; c < n1.cols(); ++c) {
      const double nn = w2_on_n1.col(c).norm();
      if (nn > best_norm) {
        best_norm = nn;
        best = c;
      }
    }
    const Eigen::VectorXd v = n1.col(best);
    rep.witness_curvature = best_norm;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        rep.witness.A_u(i, j) = v(a0(i, j));
        rep.witness.P0(i, j) = v(p0(i, j));
      }
  }
  return rep;
}

CrosscheckReport discrete_kernel_crosscheck(Model model, const IsotropicModuli& p, TestKind test,
                                            int n) {
  ProblemSpec spec;
  spec.model = model;
  spec.test = test;
  spec.bc = model == Model::SecondGradient ? BcKind::MixedSG : BcKind::FreeMicro;
  spec.params = p;
  spec.n = n;
  const AssembledSystem sys = assemble(spec);

  // Fully unconstrained operator: count its numerical null space.
  Eigen::MatrixXd dense(sys.K);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
  const double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
  CrosscheckReport rep;
  for (int i = 0; i < dense.rows(); ++i) {
    if (std::abs(es.eigenvalues()(i)) <= 1e-10 * scale) ++rep.dim_discrete;
  }

  // Mode vectors the slab ansatz can represent.
  std::vector<ModeVector> span;
  {
    ModeVector grad_mode;   // constant primary gradient
    ModeVector shift_mode;  // rigid shift of the primary displacement
    if (test == TestKind::SimpleShear) {
      grad_mode.A_u(0, 1) = 1.0;
      shift_mode.b(0) = 1.0;
    } else {
      grad_mode.A_u(1, 1) = 1.0;
      shift_mode.b(1) = 1.0;
    }
    span.push_back(grad_mode);
    span.push_back(shift_mode);
    const auto push_p = [&span](int i, int j) {
      ModeVector m;
      m.P0(i, j) = 1.0;
      span.push_back(m);
    };
    if (model == Model::Micromorphic || model == Model::RelaxedMicromorphic) {
      if (test == TestKind::SimpleShear) {
        push_p(0, 1);
        push_p(1, 0);
      } else {
        push_p(0, 0);
        push_p(1, 1);
        push_p(2, 2);
      }
    } else if (model == Model::Cosserat) {
      ModeVector m;
      m.P0 = anti(Vec3::Unit(2));
      span.push_back(m);
    }
  }
  Eigen::MatrixXd s(21, span.size());
  for (size_t c = 0; c < span.size(); ++c) s.col(static_cast<int>(c)) = span[c].flatten();

  const Eigen::MatrixXd c = stack(kernel_rows(model, p), 21);
  const Eigen::MatrixXd restricted = c.rows() > 0 ? Eigen::MatrixXd(c * s) : Eigen::MatrixXd();
  RowList rrows;
  for (int i = 0; i < restricted.rows(); ++i) rrows.push_back(restricted.row(i));
  rep.dim_predicted = static_cast<int>(nullspace(rrows, static_cast<int>(span.size())).cols());
  rep.match = rep.dim_discrete == rep.dim_predicted;
  return rep;
}

}  // namespace gencont
