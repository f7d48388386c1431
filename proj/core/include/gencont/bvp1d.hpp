#pragma once

#include <Eigen/Sparse>

#include <string>
#include <utility>
#include <vector>

#include "gencont/constitutive.hpp"

namespace gencont {

/// Slab kinematics driven through the boundary: a shear profile u1(x2) or an
/// extension profile u2(x2), with the slab occupying x2 in [-h/2, h/2].
enum class TestKind {
  SimpleShear,
  UniaxialExtension,
};

/// Boundary treatment of the micro field (or, for the second gradient model,
/// of the normal derivative of u). The displacement itself is always driven,
/// u(-h/2) = -gamma h/2 and u(+h/2) = +gamma h/2.
///  - FullDirichlet: every active micro component pinned to zero at the ends
///  - ConsistentCoupling: only the tangential tie Du x nu = P x nu, which on
///    this geometry pins P21 (shear) or P11 and P33 (extension); the rest is
///    natural
///  - FreeMicro: no essential condition on the micro field
///  - NormalClamp: second gradient only, u and u' both prescribed
///  - MixedSG: second gradient only, u prescribed, u' natural
enum class BcKind {
  FullDirichlet,
  ConsistentCoupling,
  FreeMicro,
  NormalClamp,
  MixedSG,
};

std::string to_string(TestKind t);
std::string to_string(BcKind b);
TestKind test_from_string(const std::string& s);  // ArgumentError
BcKind bc_from_string(const std::string& s);      // ArgumentError

struct ProblemSpec {
  Model model = Model::Micromorphic;
  TestKind test = TestKind::SimpleShear;
  BcKind bc = BcKind::ConsistentCoupling;
  IsotropicModuli params;
  double h = 1.0;
  double gamma = 1.0;
  int n = 64;  // elements, at least 8
};

/// Scalar unknowns of the reduced problem, in order. Shear: {u1, P12, P21}
/// (micromorphic/relaxed), {u1, a3} (Cosserat), {u1} (linear elastic), {u}
/// (second gradient). Extension: {u2, P11, P22, P33}, {u2}, {u}. Throws
/// SpecError for unsupported combinations (Cosserat extension).
std::vector<std::string> field_names(Model model, TestKind test);

/// Pointwise values of the reduced unknowns and their first derivatives,
/// aligned with field_names(); u_second carries u'' for the second gradient
/// model and is ignored otherwise.
struct PointState {
  std::vector<double> value;
  std::vector<double> deriv;
  double u_second = 0.0;
};

/// Energy density of the full model evaluated on the slab ansatz: the point
/// state is expanded into complete (Du, P, DP, D2u) tensors and fed through
/// the constitutive energy, so no hand-reduced formula exists anywhere in
/// the solve path.
double reduce_energy(Model model, TestKind test, const IsotropicModuli& p, const PointState& y);

/// Unconstrained operator plus the essential pins the boundary conditions
/// would impose. P1 nodal dofs are interleaved (node * nfields + field); the
/// second gradient model uses n + 2 quadratic B-spline coefficients.
struct AssembledSystem {
  Eigen::SparseMatrix<double> K;
  std::vector<std::pair<int, double>> constraints;  // dof index -> pinned value
  int n_dofs = 0;
  double he = 0.0;
  std::vector<std::string> fields;
};

AssembledSystem assemble(const ProblemSpec& spec);

struct Solution1D {
  std::vector<double> x;                       // nodes
  std::vector<std::string> names;              // profile names
  std::vector<std::vector<double>> profiles;   // nodal values per name
  std::vector<double> raw_dofs;                // solver state, for diagnostics
  double energy = 0.0;
  double stiffness = 0.0;
  int n_dofs = 0;
  double residual = 0.0;  // |K x - f| / |f| on the reduced system
};

/// Assembles, eliminates the essential pins, factors, and solves. Throws
/// SingularSystem (with the kernel dimension) when the micro field is not
/// controlled: either up front, when consistent coupling leaves the micro
/// self energy singular, or from the factorization when the reduced matrix
/// itself is singular.
Solution1D solve(const ProblemSpec& spec);

/// 2 E / (gamma^2 h): the energy-equivalent stiffness of the slab.
double apparent_stiffness(double energy, double gamma, double h);

/// Total energy of an arbitrary dof vector by direct quadrature of the
/// constitutive energy density. No stiffness matrix is involved, so finite
/// differences of this value are an independent oracle for the assembled
/// operator.
double dof_energy(const ProblemSpec& spec, const std::vector<double>& dofs);

/// Smallest eigenvalue of the eliminated (homogeneously constrained)
/// operator relative to the field mass matrix: an L2 normalized discrete
/// coercivity constant that is stable under mesh refinement, unlike the raw
/// matrix eigenvalue which scales with the element size.
double coercivity_eigenvalue(const ProblemSpec& spec);

/// Normal-normal moment traction nu . (m nu) nu at the two slab ends,
/// evaluated from one sided end-element derivatives with the outward
/// normals -e2 / +e2. Second order moments are lifted to third order first
/// (which makes the value vanish identically); the third order models in
/// extension report the genuine natural boundary residual of the consistent
/// coupling problem. Linear elasticity has no moment (ArgumentError).
struct MomentTraceReport {
  double low = 0.0;   // x2 = -h/2
  double high = 0.0;  // x2 = +h/2
};
MomentTraceReport natural_moment_trace(const ProblemSpec& spec, const Solution1D& sol);

struct StiffnessCurve {
  Model model;
  TestKind test;
  BcKind bc;
  std::vector<double> lc;
  std::vector<double> stiffness;
};

/// Solves the same problem over a list of characteristic lengths; jobs > 1
/// distributes the solves over threads.
StiffnessCurve sweep_lc(const ProblemSpec& spec, const std::vector<double>& lcs, int jobs = 1);

/// Logarithmically spaced values from lo to hi inclusive.
std::vector<double> log_spaced(double lo, double hi, int npoints);

/// True when v never decreases by more than tol * max|v| step to step.
bool is_monotone_nondecreasing(const std::vector<double>& v, double tol = 1e-9);

/// Closed-form displacement of the second gradient slab with u and u' both
/// prescribed at the ends (the NormalClamp problem):
///   u(x) = (gamma h / 2) [ (x/h) ch - (l/h) sinh(x/l) ] / [ ch/2 - (l/h) sh ]
/// with ch = cosh(h/2l), sh = sinh(h/2l) and the effective length l set by
/// the curvature weights (shear and extension differ).
double analytic_sg_dirichlet(const IsotropicModuli& p, TestKind test, double h, double gamma,
                             double x);

/// The effective length l of that solution.
double sg_effective_length(const IsotropicModuli& p, TestKind test);

struct BoundaryResiduals {
  std::vector<std::pair<std::string, double>> entries;
  double max_abs = 0.0;
};

/// Evaluates every essential boundary relation of the problem on a computed
/// solution. Values are absolute residuals; essential pins should sit at the
/// solver tolerance.
BoundaryResiduals boundary_residuals(const ProblemSpec& spec, const Solution1D& sol);

struct ConvergenceStudy {
  std::vector<int> ns;
  std::vector<double> hs;      // element sizes
  std::vector<double> errors;  // nodal max error of the primary field
  std::vector<double> step_orders;
  double observed_order = 0.0;  // least squares slope of log err vs log h
};

/// Error against the closed form for the NormalClamp second gradient
/// problem, and against a fine grid (8x the largest n) otherwise. Element
/// counts must divide the reference grid, so powers of two are the natural
/// choice.
ConvergenceStudy convergence_study(const ProblemSpec& spec, const std::vector<int>& ns);

}  // namespace gencont
