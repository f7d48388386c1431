// Command line front end: identity suites, homogenization, 1D solves, L_c
// sweeps, convergence studies, and zero energy mode reports.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gencont/bvp1d.hpp"
#include "gencont/constitutive.hpp"
#include "gencont/io.hpp"
#include "gencont/modes.hpp"
#include "gencont/polyfield.hpp"
#include "gencont/tensor.hpp"

namespace {

using namespace gencont;

// ---------------------------------------------------------------------------
// identities
// ---------------------------------------------------------------------------

constexpr double kAlgebraTol = 1e-12;
constexpr double kFieldTol = 1e-10;

struct FamilyResult {
  std::string name;
  double max_rel = 0.0;
  double tol = kAlgebraTol;
  bool pass = true;
};

double rel(double err, double scale) { return err / std::max(scale, 1e-300); }

Mat3 random_mat(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = u(rng);
  return m;
}

Vec3 random_vec(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return Vec3(u(rng), u(rng), u(rng));
}

Vec3 random_unit(std::mt19937_64& rng) {
  for (;;) {
    const Vec3 v = random_vec(rng);
    if (v.norm() > 0.1) return v.normalized();
  }
}

FamilyResult fam_decomposition(std::mt19937_64& rng, int trials) {
  FamilyResult f{"orthogonal decomposition"};
  for (int t = 0; t < trials; ++t) {
    const Mat3 m = random_mat(rng);
    const Decomposition d = decompose(m);
    const double s = m.norm();
    double e = (d.sym + d.skew - m).norm();
    e = std::max(e, (d.dev + d.sph - m).norm());
    e = std::max(e, (d.devsym + d.skew + d.sph - m).norm());
    e = std::max(e, std::abs(frobenius(d.sym, d.skew)));
    e = std::max(e, std::abs(frobenius(d.dev, d.sph)));
    e = std::max(e, (devsym(d.devsym) - d.devsym).norm());
    f.max_rel = std::max(f.max_rel, rel(e, s));
  }
  f.pass = f.max_rel <= f.tol;
  return f;
}

FamilyResult fam_anti_axl(std::mt19937_64& rng, int trials) {
  FamilyResult f{"anti/axl round trip"};
  for (int t = 0; t < trials; ++t) {
    const Vec3 v = random_vec(rng);
    const Mat3 a = anti(v);
    double e = (axl(a) - v).norm();
    e = std::max(e, (anti(axl(a)) - a).norm());
    f.max_rel = std::max(f.max_rel, rel(e, std::max(v.norm(), 1e-6)));
  }
  f.pass = f.max_rel <= f.tol;
  return f;
}

FamilyResult fam_anti_product(std::mt19937_64& rng, int trials) {
  FamilyResult f{"anti(v) w = v x w"};
  for (int t = 0; t < trials; ++t) {
    const Vec3 v = random_vec(rng);
    const Vec3 w = random_vec(rng);
    const double e = (anti(v) * w - v.cross(w)).norm();
    f.max_rel = std::max(f.max_rel, rel(e, std::max(v.norm() * w.norm(), 1e-6)));
  }
  f.pass = f.max_rel <= f.tol;
  return f;
}

FamilyResult fam_anti_power(std::mt19937_64& rng, int trials) {
  FamilyResult f{"anti powers closed form"};
  for (int t = 0; t < trials; ++t) {
    const Vec3 v = random_vec(rng);
    Mat3 prod = anti(v);
    for (int n = 1; n <= 6; ++n) {
      const double e = (anti_power(v, n) - prod).norm();
      f.max_rel = std::max(f.max_rel, rel(e, std::max(prod.norm(), 1e-6)));
      prod = prod * anti(v);
    }
  }
  f.pass = f.max_rel <= f.tol;
  return f;
}

FamilyResult fam_cross_mat(std::mt19937_64& rng, int trials) {
  FamilyResult f{"row cross = P anti(v)"};
  for (int t = 0; t < trials; ++t) {
    const Mat3 p = random_mat(rng);
    const Vec3 v = random_vec(rng);
    const Mat3 r = cross_mat_vec(p, v);
    double e = (r - p * anti(v)).norm();
    for (int i = 0; i < 3; ++i) {
      e = std::max(e, (r.row(i).transpose() - Vec3(p.row(i)).cross(v)).norm());
    }
    f.max_rel = std::max(f.max_rel, rel(e, std::max(p.norm() * v.norm(), 1e-6)));
  }
  f.pass = f.max_rel <= f.tol;
  return f;
}

FamilyResult fam_boundary_split(std::mt19937_64& rng, int trials) {
  FamilyResult f{"boundary split"};
  for (int t = 0; t < trials; ++t) {
    const Mat3 p = random_mat(rng);
    const Vec3 nu = random_unit(rng);
    const BoundarySplit s = split_boundary(p, nu);
    double e = (s.tangential + s.normal - p).norm();
    e = std::max(e, (s.tangential * nu).norm());
    e = std::max(e, (s.normal - (p * nu) * nu.transpose()).norm());
    // anti(nu)^2 = nu nu^T - Id, so the tangential part is -P anti(nu)^2.
    e = std::max(e, (s.tangential + p * anti_power(nu, 2)).norm());
    f.max_rel = std::max(f.max_rel, rel(e, p.norm()));
  }
  f.pass = f.max_rel <= f.tol;
  return f;
}

FamilyResult fam_skew_cross(std::mt19937_64& rng, int trials) {
  FamilyResult f{"rank-one tangential trace"};
  for (int t = 0; t < trials; ++t) {
    const Vec3 p = random_vec(rng);
    const Mat3 m = p * Vec3::UnitX().transpose();  // only the first column
    const Vec3 e1 = Vec3::UnitX();
    double e = cross_mat_vec(m, e1).norm();  // P x e1 = 0
    // skew(P) x e1 = -1/2 e1 (p x e1)^T: entries (0, -p3, p2) / 2 in row one.
    const Mat3 expected = -0.5 * e1 * p.cross(e1).transpose();
    e = std::max(e, (cross_mat_vec(skw(m), e1) - expected).norm());
    // With P x e1 = 0 the sym and skew tangential traces cancel.
    e = std::max(e, (cross_mat_vec(sym(m), e1) + cross_mat_vec(skw(m), e1)).norm());
    f.max_rel = std::max(f.max_rel, rel(e, std::max(p.norm(), 1e-6)));
  }
  f.pass = f.max_rel <= f.tol;
  return f;
}

FamilyResult fam_nye(std::mt19937_64& rng, int trials, bool inject) {
  FamilyResult f{"Nye round trip"};
  const auto forward = [inject](const Mat3& g) -> Mat3 {
    if (inject) return g.trace() * Mat3::Identity() + g.transpose();
    return nye_forward(g);
  };
  for (int t = 0; t < trials; ++t) {
    const Mat3 g = random_mat(rng);
    const Mat3 c = random_mat(rng);
    double e = (nye_inverse(forward(g)) - g).norm();
    e = std::max(e, (forward(nye_inverse(c)) - c).norm());
    f.max_rel = std::max(f.max_rel, rel(e, std::max(g.norm(), c.norm())));
  }
  f.pass = f.max_rel <= f.tol;
  return f;
}

// anti applied pointwise to a polynomial vector field.
PolyField anti_field(const PolyField& a) {
  PolyField out(2, a.cap());
  // (i, j, sign, source component): anti(v)(i,j) entries.
  const int table[6][4] = {{0, 1, -1, 2}, {0, 2, +1, 1}, {1, 0, +1, 2},
                           {1, 2, -1, 0}, {2, 0, -1, 1}, {2, 1, +1, 0}};
  for (const auto& row : table) {
    for (int ex = 0; ex <= a.cap(); ++ex)
      for (int ey = 0; ey + ex <= a.cap(); ++ey)
        for (int ez = 0; ez + ey + ex <= a.cap(); ++ez) {
          const double c = a.coeff(row[3], ex, ey, ez);
          if (c != 0.0) out.set_coeff(row[0] * 3 + row[1], ex, ey, ez, row[2] * c);
        }
  }
  return out;
}

// Nye map applied pointwise to a rank 2 polynomial field.
PolyField nye_field_of(const PolyField& g) {
  PolyField out(2, g.cap());
  for (int ex = 0; ex <= g.cap(); ++ex)
    for (int ey = 0; ey + ex <= g.cap(); ++ey)
      for (int ez = 0; ez + ey + ex <= g.cap(); ++ez) {
        const double tr =
            g.coeff(0, ex, ey, ez) + g.coeff(4, ex, ey, ez) + g.coeff(8, ex, ey, ez);
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            const double v = (i == j ? tr : 0.0) - g.coeff(j * 3 + i, ex, ey, ez);
            if (v != 0.0) out.set_coeff(i * 3 + j, ex, ey, ez, v);
          }
      }
  return out;
}

FamilyResult fam_curl_gradient(std::mt19937_64& rng, int trials, const Domain& d) {
  FamilyResult f{"Curl of a gradient vanishes", 0.0, kFieldTol};
  for (int t = 0; t < trials; ++t) {
    const PolyField u = PolyField::random(1, rng);
    const PolyField du = grad(u);
    const double e = std::sqrt(d.l2_norm2(curl_mat(du)));
    f.max_rel = std::max(f.max_rel, rel(e, std::sqrt(d.l2_norm2(du))));
  }
  f.pass = f.max_rel <= f.tol;
  return f;
}

FamilyResult fam_nye_field(std::mt19937_64& rng, int trials, const Domain& d) {
  FamilyResult f{"Nye field map", 0.0, kFieldTol};
  for (int t = 0; t < trials; ++t) {
    const PolyField a = PolyField::random(1, rng);
    const PolyField lhs = curl_mat(anti_field(a));
    const PolyField rhs = nye_field_of(grad(a));
    const double e = std::sqrt(d.l2_norm2(lhs - rhs));
    f.max_rel = std::max(f.max_rel, rel(e, std::sqrt(d.l2_norm2(rhs))));
  }
  f.pass = f.max_rel <= f.tol;
  return f;
}

FamilyResult fam_curl_bound(std::mt19937_64& rng, int trials, const Domain& d) {
  FamilyResult f{"Curl bound", 0.0, kFieldTol};
  bool all_ok = true;
  for (int t = 0; t < trials; ++t) {
    const CurlBoundReport r = check_curl_bound(PolyField::random(2, rng), d);
    all_ok = all_ok && r.ok;
    f.max_rel = std::max(f.max_rel, r.curl_norm2 / std::max(2.0 * r.grad_norm2, 1e-300));
  }
  f.tol = 1.0;  // the bound itself: |Curl P|^2 <= 2 |DP|^2
  f.pass = all_ok && f.max_rel <= f.tol;
  return f;
}

FamilyResult fam_curl_curl(std::mt19937_64& rng, int trials, const Domain& d) {
  FamilyResult f{"DIV lift = -Curl Curl", 0.0, kFieldTol};
  for (int t = 0; t < trials; ++t) {
    const IdentityReport r = check_curlcurl_identity(PolyField::random(2, rng), d);
    f.max_rel = std::max(f.max_rel, rel(r.residual, r.scale));
  }
  f.pass = f.max_rel <= f.tol;
  return f;
}

FamilyResult fam_lift_traction(std::mt19937_64& rng, int trials, const Domain& d) {
  FamilyResult f{"lifted traction m x nu"};
  for (int t = 0; t < trials; ++t) {
    const Mat3 m = random_mat(rng);
    const Vec3 nu = random_unit(rng);
    const double e = (dot_vec(levi_lift(m), nu) - cross_mat_vec(m, nu)).norm();
    f.max_rel = std::max(f.max_rel, rel(e, m.norm()));
  }
  for (int t = 0; t < trials / 10; ++t) {
    const IdentityReport r = check_moment_trace(PolyField::random(2, rng), random_unit(rng), d);
    f.max_rel = std::max(f.max_rel, rel(r.residual, r.scale));
  }
  f.pass = f.max_rel <= f.tol;
  return f;
}

FamilyResult fam_reuss(std::mt19937_64& rng, int trials) {
  FamilyResult f{"Reuss forward/inverse"};
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int t = 0; t < trials; ++t) {
    IsotropicModuli p;
    p.mu_e = u(rng);
    p.lambda_e = u(rng);
    p.mu_micro = u(rng);
    p.lambda_micro = u(rng);
    p.mu_c = u(rng);
    const DerivedModuli d = derive(p);
    double e = rel(std::abs(d.mu_macro - reuss(p.mu_e, p.mu_micro)), d.mu_macro);
    e = std::max(e, rel(std::abs(reuss_invert(d.mu_macro, p.mu_micro) - p.mu_e), p.mu_e));
    e = std::max(e, rel(std::abs(reuss_invert(d.kappa_macro, d.kappa_micro) - d.kappa_e), d.kappa_e));
    e = std::max(e, rel(std::abs(d.lambda_macro - (d.kappa_macro - 2.0 * d.mu_macro / 3.0)),
                        std::abs(d.kappa_macro)));
    e = std::max(e, rel(std::abs(d.M_macro - (2.0 * d.mu_macro + d.lambda_macro)), d.M_macro));
    e = std::max(e, rel(std::abs(d.mu_bar - (p.mu_e + p.mu_c) * p.mu_micro /
                                                (p.mu_e + p.mu_c + p.mu_micro)),
                        d.mu_bar));
    e = std::max(e, rel(std::abs(d.M_bar - d.M_e * d.M_micro / (d.M_e + d.M_micro)), d.M_bar));
    f.max_rel = std::max(f.max_rel, e);
  }
  f.pass = f.max_rel <= f.tol;
  return f;
}

FamilyResult fam_moment_duality(std::mt19937_64& rng, int trials) {
  FamilyResult f{"stress/moment duality"};
  const Model models[5] = {Model::LinearElastic, Model::Cosserat, Model::Micromorphic,
                           Model::RelaxedMicromorphic, Model::SecondGradient};
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (int t = 0; t < trials; ++t) {
    const Model model = models[t % 5];
    IsotropicModuli p;
    p.mu_e = u(rng);
    p.lambda_e = u(rng);
    p.mu_micro = u(rng);
    p.lambda_micro = u(rng);
    p.mu_c = (t % 2 == 0) ? 0.0 : u(rng);
    p.mu = u(rng);
    p.L_c = u(rng);
    p.a1 = u(rng);
    p.a2 = u(rng);
    p.a3 = u(rng);
    p.alpha1 = u(rng);
    p.alpha2 = u(rng);
    p.alpha3 = u(rng);
    const KinematicState s = random_state(model, rng);
    const double w = energy_density(model, p, s);
    const Mat3 sigma = stress_sigma(model, p, s);
    double pair = 0.0;
    switch (model) {
      case Model::LinearElastic:
        pair = 0.5 * frobenius(sigma, s.Du);
        break;
      case Model::SecondGradient:
        pair = 0.5 * frobenius(sigma, s.Du) +
               0.5 * frobenius(std::get<Tensor333>(moment(model, p, s)), s.D2u);
        break;
      case Model::Micromorphic:
        pair = 0.5 * frobenius(sigma, Mat3(s.Du - s.P)) +
               0.5 * frobenius(stress_micro(model, p, s), s.P) +
               0.5 * frobenius(std::get<Tensor333>(moment(model, p, s)), s.DP);
        break;
      case Model::RelaxedMicromorphic:
        pair = 0.5 * frobenius(sigma, Mat3(s.Du - s.P)) +
               0.5 * frobenius(stress_micro(model, p, s), s.P) +
               0.5 * frobenius(std::get<Mat3>(moment(model, p, s)), curl_from_grad(s.DP));
        break;
      case Model::Cosserat:
        pair = 0.5 * (frobenius(sigma, s.Du) - frobenius(skw(sigma), s.P) +
                      frobenius(std::get<Mat3>(moment(model, p, s)), curl_from_grad(s.DP)));
        break;
    }
    f.max_rel = std::max(f.max_rel, rel(std::abs(pair - w), std::abs(w)));
  }
  f.pass = f.max_rel <= f.tol;
  return f;
}

int run_identities(uint64_t seed, bool inject, const std::string& json_path) {
  std::mt19937_64 rng(seed);
  const Domain box(Vec3(-1.0, -1.0, -1.0), Vec3(1.0, 1.0, 1.0));
  const int n_alg = 1000;
  const int n_field = 100;

  std::vector<FamilyResult> results;
  results.push_back(fam_decomposition(rng, n_alg));
  results.push_back(fam_anti_axl(rng, n_alg));
  results.push_back(fam_anti_product(rng, n_alg));
  results.push_back(fam_anti_power(rng, n_alg));
  results.push_back(fam_cross_mat(rng, n_alg));
  results.push_back(fam_boundary_split(rng, n_alg));
  results.push_back(fam_skew_cross(rng, n_alg));
  results.push_back(fam_nye(rng, n_alg, inject));
  results.push_back(fam_curl_gradient(rng, n_field, box));
  results.push_back(fam_nye_field(rng, n_field, box));
  results.push_back(fam_curl_bound(rng, n_field, box));
  results.push_back(fam_curl_curl(rng, n_field, box));
  results.push_back(fam_lift_traction(rng, n_alg, box));
  results.push_back(fam_reuss(rng, n_alg));
  results.push_back(fam_moment_duality(rng, n_alg));

  int failed = 0;
  std::string first_failure;
  for (const auto& r : results) {
    char line[160];
    std::snprintf(line, sizeof(line), "%s  %-28s  max_rel = %.3e  (tol %.0e)",
                  r.pass ? "PASS" : "FAIL", r.name.c_str(), r.max_rel, r.tol);
    std::cout << line << "\n";
    if (!r.pass) {
      ++failed;
      if (first_failure.empty()) first_failure = r.name;
    }
  }
  std::cout << "identities: " << results.size() << " families, " << failed
            << " failed (seed " << seed << ")\n";
  if (failed > 0) std::cout << "FAILED: " << first_failure << "\n";

  if (!json_path.empty()) {
    nlohmann::ordered_json j;
    j["seed"] = seed;
    j["all_pass"] = failed == 0;
    nlohmann::ordered_json fams = nlohmann::ordered_json::array();
    for (const auto& r : results) {
      nlohmann::ordered_json e;
      e["name"] = r.name;
      e["max_rel"] = r.max_rel;
      e["tol"] = r.tol;
      e["pass"] = r.pass;
      fams.push_back(e);
    }
    j["families"] = fams;
    std::ofstream out(json_path);
    if (!out) throw IoError("cannot write '" + json_path + "'");
    out << j.dump(2) << "\n";
  }
  return failed == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// parameter handling shared by the solver-facing subcommands
// ---------------------------------------------------------------------------

IsotropicModuli load_params_or_default(const std::string& path) {
  if (path.empty()) return IsotropicModuli{};
  return read_params(resolve_params_path(path));
}

void print_derived(const IsotropicModuli& p) {
  const DerivedModuli d = derive(p);
  const auto line = [](const char* name, double v) {
    std::cout << name << " = " << format_full(v) << "\n";
  };
  line("mu_macro", d.mu_macro);
  line("kappa_macro", d.kappa_macro);
  line("lambda_macro", d.lambda_macro);
  line("M_macro", d.M_macro);
  line("M_e", d.M_e);
  line("M_micro", d.M_micro);
  line("kappa_e", d.kappa_e);
  line("kappa_micro", d.kappa_micro);
  line("mu_bar", d.mu_bar);
  line("M_bar", d.M_bar);
}

int run_homogenize(const std::string& params_path, const std::string& invert) {
  IsotropicModuli p = load_params_or_default(params_path);
  if (invert == "e") {
    // The file's e-slots hold macroscopic targets; recover the true e-moduli
    // from the micro pair.
    const double mu_t = p.mu_e;
    const double kappa_t = p.lambda_e + 2.0 * p.mu_e / 3.0;
    const double kappa_micro = p.lambda_micro + 2.0 * p.mu_micro / 3.0;
    p.mu_e = reuss_invert(mu_t, p.mu_micro);
    const double kappa_e = reuss_invert(kappa_t, kappa_micro);
    p.lambda_e = kappa_e - 2.0 * p.mu_e / 3.0;
    std::cout << "inverted mu_e = " << format_full(p.mu_e) << "\n";
    std::cout << "inverted lambda_e = " << format_full(p.lambda_e) << "\n";
  } else if (invert == "micro") {
    const double mu_t = p.mu_micro;
    const double kappa_t = p.lambda_micro + 2.0 * p.mu_micro / 3.0;
    const double kappa_e = p.lambda_e + 2.0 * p.mu_e / 3.0;
    p.mu_micro = reuss_invert(mu_t, p.mu_e);
    const double kappa_micro = reuss_invert(kappa_t, kappa_e);
    p.lambda_micro = kappa_micro - 2.0 * p.mu_micro / 3.0;
    std::cout << "inverted mu_micro = " << format_full(p.mu_micro) << "\n";
    std::cout << "inverted lambda_micro = " << format_full(p.lambda_micro) << "\n";
  } else if (!invert.empty()) {
    throw ArgumentError("--invert takes 'e' or 'micro'");
  }
  print_derived(p);
  return 0;
}

// ---------------------------------------------------------------------------
// solve / sweep / converge / modes
// ---------------------------------------------------------------------------

struct CommonFlags {
  std::string model = "micromorphic";
  std::string test = "simple_shear";
  std::string bc = "consistent_coupling";
  std::string params_path;
  double h = 1.0;
  double gamma = 1.0;
  int n = 64;
  double mu_c = -1.0;  // negative: keep the file value
  double lc = -1.0;    // negative: keep the file value
  std::string out;
};

ProblemSpec build_spec(const CommonFlags& c) {
  ProblemSpec spec;
  spec.model = model_from_string(c.model);
  spec.test = test_from_string(c.test);
  spec.bc = bc_from_string(c.bc);
  spec.params = load_params_or_default(c.params_path);
  if (c.mu_c >= 0.0) spec.params.mu_c = c.mu_c;
  if (c.lc >= 0.0) spec.params.L_c = c.lc;
  spec.h = c.h;
  spec.gamma = c.gamma;
  spec.n = c.n;
  return spec;
}

void write_or_print(const std::string& out, const std::string& content) {
  if (out.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream f(out);
  if (!f) throw IoError("cannot write '" + out + "'");
  f << content;
}

int run_solve(const CommonFlags& c) {
  const ProblemSpec spec = build_spec(c);
  const Solution1D sol = solve(spec);
  std::cout << "model = " << to_string(spec.model) << ", test = " << to_string(spec.test)
            << ", bc = " << to_string(spec.bc) << "\n";
  std::cout << "n = " << spec.n << ", dofs = " << sol.n_dofs << "\n";
  std::cout << "energy = " << format_full(sol.energy) << "\n";
  std::cout << "stiffness = " << format_full(sol.stiffness) << "\n";
  std::cout << "residual = " << format_full(sol.residual) << "\n";
  if (!c.out.empty()) {
    std::ostringstream csv;
    write_profiles_csv(csv, sol);
    write_or_print(c.out, csv.str());
    std::cout << "profiles written to " << c.out << "\n";
  }
  return 0;
}

int run_sweep(const CommonFlags& c, double lc_min, double lc_max, int lc_points, int jobs) {
  ProblemSpec spec = build_spec(c);
  if (lc_min <= 0.0) lc_min = 1e-3 * spec.h;
  if (lc_max <= 0.0) lc_max = 1e3 * spec.h;
  const std::vector<double> lcs = log_spaced(lc_min, lc_max, lc_points);
  const StiffnessCurve curve = sweep_lc(spec, lcs, jobs);
  std::ostringstream csv;
  write_curve_csv(csv, curve);
  write_or_print(c.out, csv.str());
  if (!c.out.empty()) {
    std::cout << "sweep: " << lcs.size() << " points, stiffness "
              << format_full(curve.stiffness.front()) << " -> "
              << format_full(curve.stiffness.back()) << ", written to " << c.out << "\n";
  }
  return 0;
}

int run_converge(const CommonFlags& c, std::vector<int> ns) {
  const ProblemSpec spec = build_spec(c);
  if (ns.empty()) ns = {16, 32, 64, 128};
  const ConvergenceStudy study = convergence_study(spec, ns);
  std::ostringstream csv;
  csv << "n,h_e,error,step_order\n";
  for (size_t i = 0; i < study.ns.size(); ++i) {
    csv << study.ns[i] << ',' << format_full(study.hs[i]) << ',' << format_full(study.errors[i])
        << ',';
    if (i > 0) csv << format_full(study.step_orders[i - 1]);
    csv << '\n';
  }
  write_or_print(c.out, csv.str());
  std::cout << "observed order = " << format_full(study.observed_order) << "\n";
  return 0;
}

int run_modes(const std::string& model_s, double mu_c, const std::string& bc_s,
              const std::string& params_path, bool redundancy, bool crosscheck,
              const std::string& test_s, int n, const std::string& out) {
  const Model model = model_from_string(model_s);
  IsotropicModuli p = load_params_or_default(params_path);
  if (mu_c >= 0.0) p.mu_c = mu_c;

  if (redundancy) {
    const RedundancyReport rep = redundancy_classify(model, p);
    write_or_print(out, redundancy_json(rep) + "\n");
    return 0;
  }
  if (crosscheck) {
    const CrosscheckReport rep =
        discrete_kernel_crosscheck(model, p, test_from_string(test_s), n);
    std::cout << "discrete kernel dim = " << rep.dim_discrete
              << ", predicted = " << rep.dim_predicted << (rep.match ? " (match)" : " (MISMATCH)")
              << "\n";
    return rep.match ? 0 : 1;
  }
  const GammaSpec bc = gamma_from_string(bc_s);
  const ModeReport rep = apply_bc(model, p, bc, Vec3::UnitY(), Vec3::Zero());
  std::cout << "model = " << to_string(model) << ", mu_c = " << format_full(p.mu_c)
            << ", bc = " << to_string(bc) << "\n";
  std::cout << "kernel dim " << rep.dim_before << " -> " << rep.dim_after << " (expected "
            << rep.expected << ")" << (rep.match ? "" : "  MISMATCH") << "\n";
  if (!out.empty()) {
    write_or_print(out, mode_report_json(rep) + "\n");
  }
  return rep.match ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"generalized continua toolkit: identities, homogenization, 1D boundary value "
               "problems, characteristic length sweeps, and zero energy mode reports"};
  app.require_subcommand(1);

  // identities
  auto* cmd_id = app.add_subcommand("identities", "run the tensor and field identity suite");
  uint64_t seed = 42;
  bool inject = false;
  std::string id_json;
  cmd_id->add_option("--seed", seed, "random seed (default 42)");
  cmd_id->add_option("--json", id_json, "write a JSON report to this path");
  cmd_id->add_flag("--inject-nye", inject, "test hook: flip a sign in the Nye forward map")
      ->group("");

  // homogenize
  auto* cmd_hom = app.add_subcommand("homogenize", "derived macroscopic moduli from a parameter file");
  std::string hom_params;
  std::string hom_invert;
  cmd_hom->add_option("--params", hom_params, "parameter file")->required();
  cmd_hom->add_option("--invert", hom_invert,
                      "treat 'e' or 'micro' slots as macroscopic targets and invert the series "
                      "combination");

  // shared solver flags
  const auto add_common = [](CLI::App* cmd, CommonFlags& c, bool with_n) {
    // --h is the slab thickness here, so help retreats to --help alone.
    cmd->set_help_flag("--help", "print this help message and exit");
    cmd->add_option("--model", c.model, "linear_elastic|cosserat|micromorphic|relaxed_micromorphic|second_gradient");
    cmd->add_option("--test", c.test, "simple_shear|uniaxial_extension");
    cmd->add_option("--bc", c.bc, "full_dirichlet|consistent_coupling|free_micro|normal_clamp|mixed_sg");
    cmd->add_option("--params", c.params_path, "parameter file (default: all ones)");
    cmd->add_option("--h", c.h, "slab thickness");
    cmd->add_option("--gamma", c.gamma, "boundary drive amplitude");
    if (with_n) cmd->add_option("--n", c.n, "number of elements");
    cmd->add_option("--mu-c", c.mu_c, "override the coupling modulus");
    cmd->add_option("--lc", c.lc, "override the characteristic length");
    cmd->add_option("--out", c.out, "output file (default: stdout)");
  };

  auto* cmd_solve = app.add_subcommand("solve", "solve one 1D boundary value problem");
  CommonFlags solve_flags;
  add_common(cmd_solve, solve_flags, true);

  auto* cmd_sweep = app.add_subcommand("sweep", "stiffness versus characteristic length");
  CommonFlags sweep_flags;
  double lc_min = -1.0, lc_max = -1.0;
  int lc_points = 13;
  int jobs = 1;
  add_common(cmd_sweep, sweep_flags, true);
  cmd_sweep->add_option("--lc-min", lc_min, "smallest L_c (default 1e-3 h)");
  cmd_sweep->add_option("--lc-max", lc_max, "largest L_c (default 1e3 h)");
  cmd_sweep->add_option("--lc-points", lc_points, "number of log spaced points (default 13)");
  cmd_sweep->add_option("--jobs", jobs, "solve rows concurrently");

  auto* cmd_conv = app.add_subcommand("converge", "grid refinement study");
  CommonFlags conv_flags;
  std::vector<int> conv_ns;
  add_common(cmd_conv, conv_flags, false);
  cmd_conv->add_option("--ns", conv_ns, "element counts (default 16 32 64 128)");

  auto* cmd_modes = app.add_subcommand("modes", "zero energy mode and redundancy reports");
  std::string modes_model = "micromorphic";
  double modes_mu_c = -1.0;
  std::string modes_bc = "clamp_u";
  std::string modes_params;
  std::string modes_out;
  bool modes_redundancy = false;
  bool modes_crosscheck = false;
  std::string modes_test = "simple_shear";
  int modes_n = 16;
  cmd_modes->add_option("--model", modes_model, "model name");
  cmd_modes->add_option("--mu-c", modes_mu_c, "coupling modulus (default: parameter file value)");
  cmd_modes->add_option("--bc", modes_bc,
                        "clamp_u|clamp_u_clamp_p|clamp_u_consistent|clamp_u_sym|clamp_u_devsym");
  cmd_modes->add_option("--params", modes_params, "parameter file (default: all ones)");
  cmd_modes->add_option("--out", modes_out, "write the JSON report to this path");
  cmd_modes->add_flag("--redundancy", modes_redundancy, "classify the curvature redundancy instead");
  cmd_modes->add_flag("--crosscheck", modes_crosscheck,
                      "compare the discrete free-free kernel with the mode prediction");
  cmd_modes->add_option("--test", modes_test, "ansatz for --crosscheck");
  cmd_modes->add_option("--n", modes_n, "elements for --crosscheck");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(cmd_id)) return run_identities(seed, inject, id_json);
    if (app.got_subcommand(cmd_hom)) return run_homogenize(hom_params, hom_invert);
    if (app.got_subcommand(cmd_solve)) return run_solve(solve_flags);
    if (app.got_subcommand(cmd_sweep))
      return run_sweep(sweep_flags, lc_min, lc_max, lc_points, jobs);
    if (app.got_subcommand(cmd_conv)) return run_converge(conv_flags, conv_ns);
    if (app.got_subcommand(cmd_modes))
      return run_modes(modes_model, modes_mu_c, modes_bc, modes_params, modes_redundancy,
                       modes_crosscheck, modes_test, modes_n, modes_out);
  } catch (const InfiniteModulus& e) {
    std::cout << "inf\n";
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
