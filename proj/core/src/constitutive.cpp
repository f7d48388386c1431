#include "gencont/constitutive.hpp"

#include <cmath>

namespace gencont {

namespace {

double sq(double x) { return x * x; }

void require_skew_microrotation(const Mat3& a) {
  if (sym(a).norm() > 1e-12 * a.norm()) {
    throw InvalidSkew("Cosserat microrotation must be skew (|sym| = " +
                      std::to_string(sym(a).norm()) + ")");
  }
}

// Curvature energy of the gradient-type models, as displayed:
//   (mu L^2 / 2) (a1 |devsym T|^2 + a2 |skew T|^2 + (2/9) a3 |Id tr T|^2),
// where T is DP (micromorphic) or D2u (second gradient) and the projections
// act slice by slice on the first two indices.
double curvature_third(const IsotropicModuli& p, const Tensor333& t, double w1, double w2,
                       double w3) {
  const Tensor333 tds = devsym3(t);
  const Tensor333 tsk = skew3(t);
  double tr2 = 0.0;
  for (int k = 0; k < 3; ++k) tr2 += 3.0 * sq(t.slice(k).trace());
  const double scale = 0.5 * p.mu * sq(p.L_c);
  return scale * (w1 * frobenius(tds, tds) + w2 * frobenius(tsk, tsk) + (2.0 / 9.0) * w3 * tr2);
}

// Exact gradient of curvature_third with respect to T. Note the spherical
// weight: with sph3 the orthogonal projection, the gradient carries 2 a3,
// equivalently (2/3) a3 against Id tr(T).
Tensor333 moment_third(const IsotropicModuli& p, const Tensor333& t, double w1, double w2,
                       double w3) {
  const double scale = p.mu * sq(p.L_c);
  Tensor333 m = devsym3(t) * w1 + skew3(t) * w2 + sph3(t) * (2.0 * w3);
  return m * scale;
}

// Curvature energy of the curl-type models:
//   (mu L^2 / 2) (w1 |devsym C|^2 + w2 |skew C|^2 + (w3/3) tr(C)^2).
double curvature_second(const IsotropicModuli& p, const Mat3& c, double w1, double w2, double w3) {
  const double scale = 0.5 * p.mu * sq(p.L_c);
  return scale * (w1 * devsym(c).squaredNorm() + w2 * skw(c).squaredNorm() + (w3 / 3.0) * sq(c.trace()));
}

Mat3 moment_second(const IsotropicModuli& p, const Mat3& c, double w1, double w2, double w3) {
  const double scale = p.mu * sq(p.L_c);
  return scale * (w1 * devsym(c) + w2 * skw(c) + (w3 / 3.0) * c.trace() * Mat3::Identity());
}

}  // namespace

std::string to_string(Model m) {
  switch (m) {
    case Model::LinearElastic: return "linear_elastic";
    case Model::Cosserat: return "cosserat";
    case Model::Micromorphic: return "micromorphic";
    case Model::RelaxedMicromorphic: return "relaxed_micromorphic";
    case Model::SecondGradient: return "second_gradient";
  }
  throw ArgumentError("to_string: unknown model");
}

Model model_from_string(const std::string& s) {
  if (s == "linear_elastic" || s == "le") return Model::LinearElastic;
  if (s == "cosserat") return Model::Cosserat;
  if (s == "micromorphic" || s == "mm") return Model::Micromorphic;
  if (s == "relaxed_micromorphic" || s == "rm") return Model::RelaxedMicromorphic;
  if (s == "second_gradient" || s == "sg") return Model::SecondGradient;
  throw ArgumentError("unknown model '" + s + "'");
}

std::vector<std::string> validate(const IsotropicModuli& p) {
  std::vector<std::string> bad;
  const auto need = [&bad](bool ok, const std::string& msg) {
    if (!ok) bad.push_back(msg);
  };
  need(p.mu_e > 0.0, "mu_e must be positive");
  need(p.mu_micro > 0.0, "mu_micro must be positive");
  need(p.mu_c >= 0.0, "mu_c must be nonnegative");
  need(p.mu > 0.0, "mu must be positive");
  need(p.L_c >= 0.0, "L_c must be nonnegative");
  need(p.a1 > 0.0, "a1 must be positive");
  need(p.a2 > 0.0, "a2 must be positive");
  need(p.a3 > 0.0, "a3 must be positive");
  need(p.alpha1 > 0.0, "alpha1 must be positive");
  need(p.alpha2 > 0.0, "alpha2 must be positive");
  need(p.alpha3 > 0.0, "alpha3 must be positive");
  need(p.lambda_e + 2.0 * p.mu_e / 3.0 > 0.0, "kappa_e = lambda_e + 2 mu_e / 3 must be positive");
  need(p.lambda_micro + 2.0 * p.mu_micro / 3.0 > 0.0,
       "kappa_micro = lambda_micro + 2 mu_micro / 3 must be positive");
  return bad;
}

double reuss(double m1, double m2) { return m1 * m2 / (m1 + m2); }

double reuss_invert(double target, double known) {
  if (target <= 0.0 || known <= 0.0) {
    throw ArgumentError("reuss_invert: moduli must be positive");
  }
  if (std::abs(known - target) <= 1e-12 * std::max(known, target)) {
    throw InfiniteModulus("reuss_invert: the companion modulus escapes to infinity");
  }
  if (known < target) {
    throw ArgumentError("reuss_invert: series combination cannot exceed either branch");
  }
  return target * known / (known - target);
}

double longitudinal_modulus(double mu, double lambda) { return 2.0 * mu + lambda; }

DerivedModuli derive(const IsotropicModuli& p) {
  DerivedModuli d;
  d.kappa_e = p.lambda_e + 2.0 * p.mu_e / 3.0;
  d.kappa_micro = p.lambda_micro + 2.0 * p.mu_micro / 3.0;
  d.mu_macro = reuss(p.mu_e, p.mu_micro);
  d.kappa_macro = reuss(d.kappa_e, d.kappa_micro);
  d.lambda_macro = d.kappa_macro - 2.0 * d.mu_macro / 3.0;
  d.M_macro = longitudinal_modulus(d.mu_macro, d.lambda_macro);
  d.M_e = longitudinal_modulus(p.mu_e, p.lambda_e);
  d.M_micro = longitudinal_modulus(p.mu_micro, p.lambda_micro);
  d.mu_bar = (p.mu_e + p.mu_c) * p.mu_micro / (p.mu_e + p.mu_c + p.mu_micro);
  d.M_bar = d.M_e * d.M_micro / (d.M_e + d.M_micro);
  return d;
}

double energy_density(Model model, const IsotropicModuli& p, const KinematicState& s) {
  switch (model) {
    case Model::LinearElastic: {
      const DerivedModuli d = derive(p);
      return d.mu_macro * sym(s.Du).squaredNorm() + 0.5 * d.lambda_macro * sq(s.Du.trace());
    }
    case Model::Micromorphic: {
      const Mat3 e = s.Du - s.P;
      return p.mu_e * sym(e).squaredNorm() + p.mu_c * skw(e).squaredNorm() +
             0.5 * p.lambda_e * sq(e.trace()) + p.mu_micro * sym(s.P).squaredNorm() +
             0.5 * p.lambda_micro * sq(s.P.trace()) +
             curvature_third(p, s.DP, p.a1, p.a2, p.a3);
    }
    case Model::RelaxedMicromorphic: {
      const Mat3 e = s.Du - s.P;
      const Mat3 c = curl_from_grad(s.DP);
      return p.mu_e * sym(e).squaredNorm() + p.mu_c * skw(e).squaredNorm() +
             0.5 * p.lambda_e * sq(e.trace()) + p.mu_micro * sym(s.P).squaredNorm() +
             0.5 * p.lambda_micro * sq(s.P.trace()) +
             curvature_second(p, c, p.a1, p.a2, p.a3);
    }
    case Model::Cosserat: {
      require_skew_microrotation(s.P);
      const Mat3 c = curl_from_grad(s.DP);
      return p.mu_e * sym(s.Du).squaredNorm() + 0.5 * p.lambda_e * sq(s.Du.trace()) +
             p.mu_c * (skw(s.Du) - s.P).squaredNorm() +
             curvature_second(p, c, p.alpha1, p.alpha2, p.alpha3);
    }
    case Model::SecondGradient: {
      const DerivedModuli d = derive(p);
      return d.mu_macro * sym(s.Du).squaredNorm() + 0.5 * d.lambda_macro * sq(s.Du.trace()) +
             curvature_third(p, s.D2u, p.a1, p.a2, p.a3);
    }
  }
  throw ArgumentError("energy_density: unknown model");
}

Mat3 stress_sigma(Model model, const IsotropicModuli& p, const KinematicState& s) {
  switch (model) {
    case Model::LinearElastic:
    case Model::SecondGradient: {
      const DerivedModuli d = derive(p);
      return 2.0 * d.mu_macro * sym(s.Du) + d.lambda_macro * s.Du.trace() * Mat3::Identity();
    }
    case Model::Micromorphic:
    case Model::RelaxedMicromorphic: {
      const Mat3 e = s.Du - s.P;
      return 2.0 * p.mu_e * sym(e) + 2.0 * p.mu_c * skw(e) + p.lambda_e * e.trace() * Mat3::Identity();
    }
    case Model::Cosserat: {
      require_skew_microrotation(s.P);
      return 2.0 * p.mu_e * sym(s.Du) + p.lambda_e * s.Du.trace() * Mat3::Identity() +
             2.0 * p.mu_c * (skw(s.Du) - s.P);
    }
  }
  throw ArgumentError("stress_sigma: unknown model");
}

Mat3 stress_micro(Model model, const IsotropicModuli& p, const KinematicState& s) {
  switch (model) {
    case Model::Micromorphic:
    case Model::RelaxedMicromorphic:
      return 2.0 * p.mu_micro * sym(s.P) + p.lambda_micro * s.P.trace() * Mat3::Identity();
    case Model::LinearElastic:
    case Model::Cosserat:
    case Model::SecondGradient:
      return Mat3::Zero();
  }
  throw ArgumentError("stress_micro: unknown model");
}

std::variant<Mat3, Tensor333> moment(Model model, const IsotropicModuli& p,
                                     const KinematicState& s) {
  switch (model) {
    case Model::LinearElastic:
      throw ArgumentError("moment: linear elasticity carries no moment stress");
    case Model::Micromorphic:
      return moment_third(p, s.DP, p.a1, p.a2, p.a3);
    case Model::SecondGradient:
      return moment_third(p, s.D2u, p.a1, p.a2, p.a3);
    case Model::RelaxedMicromorphic:
      return moment_second(p, curl_from_grad(s.DP), p.a1, p.a2, p.a3);
    case Model::Cosserat: {
      require_skew_microrotation(s.P);
      return moment_second(p, curl_from_grad(s.DP), p.alpha1, p.alpha2, p.alpha3);
    }
  }
  throw ArgumentError("moment: unknown model");
}

KinematicState random_state(Model model, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  KinematicState s;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s.Du(i, j) = u(rng);
  if (model == Model::Cosserat) {
    s.P = anti(Vec3(u(rng), u(rng), u(rng)));
  } else {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) s.P(i, j) = u(rng);
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        s.DP(i, j, k) = u(rng);
        s.D2u(i, j, k) = u(rng);
      }
  // D2u is a second gradient, so it must be symmetric in (j, k).
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = j + 1; k < 3; ++k) {
        const double v = 0.5 * (s.D2u(i, j, k) + s.D2u(i, k, j));
        s.D2u(i, j, k) = v;
        s.D2u(i, k, j) = v;
      }
  return s;
}

namespace {

double shift_probe(Model model, const IsotropicModuli& p, int trials, std::mt19937_64& rng,
                   bool coupled) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    KinematicState s = random_state(model, rng);
    const Mat3 a1 = anti(Vec3(u(rng), u(rng), u(rng)));
    const Mat3 a2 = coupled ? a1 : anti(Vec3(u(rng), u(rng), u(rng)));
    KinematicState shifted = s;
    shifted.Du = s.Du + a1;
    if (model != Model::LinearElastic && model != Model::SecondGradient) {
      shifted.P = s.P + a2;
    }
    const double w0 = energy_density(model, p, s);
    const double w1 = energy_density(model, p, shifted);
    worst = std::max(worst, std::abs(w1 - w0));
  }
  return worst;
}

}  // namespace

double check_invariance(Model model, const IsotropicModuli& p, int trials, std::mt19937_64& rng) {
  const bool has_coupling = model == Model::Cosserat || model == Model::Micromorphic ||
                            model == Model::RelaxedMicromorphic;
  if (has_coupling && p.mu_c != 0.0) {
    throw ArgumentError(
        "check_invariance: independent shifts require mu_c == 0; use check_objectivity for "
        "coupled parameters");
  }
  return shift_probe(model, p, trials, rng, /*coupled=*/false);
}

double check_objectivity(Model model, const IsotropicModuli& p, int trials, std::mt19937_64& rng) {
  return shift_probe(model, p, trials, rng, /*coupled=*/true);
}

}  // namespace gencont
