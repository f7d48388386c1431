#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "gencont/bvp1d.hpp"
#include "gencont/constitutive.hpp"

namespace gencont {

/// A point of the 21-dimensional space of affine displacement and constant
/// micro distortion: u(x) = A_u x + b, P(x) = P0. Flat layout: A_u row-major
/// (0..8), b (9..11), P0 row-major (12..20).
struct ModeVector {
  Mat3 A_u = Mat3::Zero();
  Vec3 b = Vec3::Zero();
  Mat3 P0 = Mat3::Zero();

  Eigen::Matrix<double, 21, 1> flatten() const;
  static ModeVector unflatten(const Eigen::Matrix<double, 21, 1>& v);
};

/// Boundary data clamped on a plane through x0 with unit normal nu.
///  - ClampU: u = 0 on the plane
///  - ClampUClampP: u = 0 and P = 0
///  - ClampUConsistent: u = 0 and the tangential tie (Du - P) x nu = 0
///  - ClampUSym / ClampUDevSym: u = 0 and the sym (devsym) part of the tie
enum class GammaSpec {
  ClampU,
  ClampUClampP,
  ClampUConsistent,
  ClampUSym,
  ClampUDevSym,
};

std::string to_string(GammaSpec g);
GammaSpec gamma_from_string(const std::string& s);  // ArgumentError

struct KernelReport {
  int dim = 0;
  std::vector<ModeVector> basis;  // orthonormal in the flat coordinates
};

/// Null space of the energy on the mode space (every curvature measure of a
/// mode vanishes, so only the lower order terms act). The constraint rows
/// follow the model: linear elastic and second gradient demand sym A_u = 0
/// and carry no P0; the micromorphic pair demands sym(A_u - P0) = 0 and
/// sym P0 = 0, plus skew(A_u - P0) = 0 once mu_c > 0; Cosserat demands
/// sym A_u = 0 and skew P0 with the same coupling row.
KernelReport zero_energy_kernel(Model model, const IsotropicModuli& p);

struct ModeReport {
  Model model = Model::Micromorphic;
  double mu_c = 0.0;
  GammaSpec bc = GammaSpec::ClampU;
  int dim_before = 0;
  int dim_after = 0;
  int expected = 0;
  bool match = false;
  std::vector<ModeVector> basis;  // of the constrained kernel
};

/// Intersects the zero energy kernel with the boundary rows of a GammaSpec
/// and compares the surviving dimension against the catalogued expectation.
ModeReport apply_bc(Model model, const IsotropicModuli& p, GammaSpec bc, const Vec3& nu,
                    const Vec3& x0);

/// Catalogued dimension of the constrained kernel.
int expected_dim_after(Model model, bool mu_c_positive, GammaSpec bc);

/// Redundancy of the curvature term in the sense of the additive split
/// W = W1(Du, P) + W2(curvature): the model is redundant when either
/// "W1 == 0 forces W == 0" or "W2 == 0 forces W == 0" holds over fields
/// (tested exactly on the space of quadratic u and affine P, where both
/// implications reduce to null space inclusions).
struct RedundancyReport {
  Model model = Model::Micromorphic;
  bool redundant = false;
  bool lower_forces_all = false;      // W1 == 0 forces W == 0
  bool curvature_forces_all = false;  // W2 == 0 forces W == 0
  // For a non-redundant model: constant part of a field with W1 == 0 but
  // W2 > 0, and the curvature energy norm it carries.
  ModeVector witness;
  double witness_curvature = 0.0;
};

RedundancyReport redundancy_classify(Model model, const IsotropicModuli& p);

struct CrosscheckReport {
  int dim_discrete = 0;
  int dim_predicted = 0;
  bool match = false;
};

/// Assembles the 1D operator with no essential constraints at all and counts
/// its null space, then predicts the same number by intersecting the mode
/// kernel with the subspace the slab ansatz can represent.
CrosscheckReport discrete_kernel_crosscheck(Model model, const IsotropicModuli& p, TestKind test,
                                            int n);

}  // namespace gencont
