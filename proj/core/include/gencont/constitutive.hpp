#pragma once

#include <random>
#include <string>
#include <variant>
#include <vector>

#include "gencont/tensor.hpp"

namespace gencont {

/// The five material models the library evaluates.
enum class Model {
  LinearElastic,
  Cosserat,
  Micromorphic,
  RelaxedMicromorphic,
  SecondGradient,
};

std::string to_string(Model m);
Model model_from_string(const std::string& s);  // ArgumentError

/// Full isotropic parameter set. The same record feeds every model; each
/// model reads the subset it needs.
///  - (mu_e, lambda_e): elastic (relative deformation) scale
///  - (mu_micro, lambda_micro): micro self energy scale
///  - mu_c: rotational coupling modulus, >= 0
///  - mu: reference shear modulus multiplying the curvature terms
///  - L_c: characteristic length, >= 0
///  - a1, a2, a3: curvature weights of the gradient-type models
///  - alpha1..alpha3: curvature weights of the Cosserat model
struct IsotropicModuli {
  double mu_e = 1.0;
  double lambda_e = 1.0;
  double mu_micro = 1.0;
  double lambda_micro = 1.0;
  double mu_c = 1.0;
  double mu = 1.0;
  double L_c = 1.0;
  double a1 = 1.0;
  double a2 = 1.0;
  double a3 = 1.0;
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  double alpha3 = 1.0;
};

/// Names every violated parameter requirement; empty means valid. Checked:
/// mu_e > 0, mu_micro > 0, mu_c >= 0, mu > 0, L_c >= 0, a_i > 0,
/// alpha_i > 0, kappa_e > 0, kappa_micro > 0.
std::vector<std::string> validate(const IsotropicModuli& p);

/// Harmonic-type (series spring) combination m1*m2/(m1+m2).
double reuss(double m1, double m2);

/// Solve reuss(x, known) == target for x. Throws InfiniteModulus when
/// known == target (the finite answer escapes to infinity) and
/// ArgumentError when known < target (no positive solution exists).
double reuss_invert(double target, double known);

/// Longitudinal (uniaxial strain) modulus 2 mu + lambda.
double longitudinal_modulus(double mu, double lambda);

/// Macroscopic scale moduli induced by (e, micro) pairs, plus the
/// large-length limits mu_bar and M_bar.
struct DerivedModuli {
  double kappa_e;
  double kappa_micro;
  double mu_macro;
  double kappa_macro;
  double lambda_macro;
  double M_macro;   // 2 mu_macro + lambda_macro
  double M_e;       // 2 mu_e + lambda_e
  double M_micro;   // 2 mu_micro + lambda_micro
  double mu_bar;    // (mu_e + mu_c) mu_micro / (mu_e + mu_c + mu_micro)
  double M_bar;     // M_e M_micro / (M_e + M_micro)
};

DerivedModuli derive(const IsotropicModuli& p);

/// Pointwise kinematic state. Models read the slots they use:
///   LinearElastic:        Du
///   Cosserat:             Du, P (microrotation, must be skew), DP
///   Micromorphic:         Du, P, DP
///   RelaxedMicromorphic:  Du, P, DP (only through Curl P)
///   SecondGradient:       Du, D2u
struct KinematicState {
  Mat3 Du = Mat3::Zero();
  Mat3 P = Mat3::Zero();
  Tensor333 DP;
  Tensor333 D2u;
};

/// Strain energy density of a model at a state. Throws InvalidSkew when the
/// Cosserat microrotation has a symmetric part above 1e-12 of its norm.
double energy_density(Model model, const IsotropicModuli& p, const KinematicState& s);

/// Force stress, the energy gradient with respect to Du.
Mat3 stress_sigma(Model model, const IsotropicModuli& p, const KinematicState& s);

/// Micro self stress 2 mu_micro sym P + lambda_micro tr(P) Id for the
/// micromorphic pair; zero for models without a micro self energy.
Mat3 stress_micro(Model model, const IsotropicModuli& p, const KinematicState& s);

/// Moment (hyper) stress, the energy gradient with respect to the curvature
/// argument: third order against DP (micromorphic), third order against D2u
/// (second gradient), second order against Curl P (relaxed micromorphic and
/// Cosserat). Linear elasticity has none and throws ArgumentError.
std::variant<Mat3, Tensor333> moment(Model model, const IsotropicModuli& p, const KinematicState& s);

/// Largest |W(shifted) - W| over random trials of the additive shift
///   u -> u + A1 x + b,  P -> P + A2,
/// with independent skew A1, A2. This leaves the energy of the mu_c = 0
/// models exactly invariant; a positive mu_c couples A1 to A2, so the check
/// refuses those parameters with ArgumentError.
double check_invariance(Model model, const IsotropicModuli& p, int trials, std::mt19937_64& rng);

/// Same probe with A1 == A2 (the objectivity direction), valid for every
/// mu_c >= 0. Returns the largest |W(shifted) - W| observed.
double check_objectivity(Model model, const IsotropicModuli& p, int trials, std::mt19937_64& rng);

/// Random state with entries in [-1, 1] (Cosserat gets a skew P).
KinematicState random_state(Model model, std::mt19937_64& rng);

}  // namespace gencont
