#include <random>

#include "doctest.h"
#include "gencont/bvp1d.hpp"

using namespace gencont;

namespace {

IsotropicModuli mixed_params() {
  IsotropicModuli p;
  p.mu_e = 2.0;
  p.lambda_e = 1.5;
  p.mu_micro = 3.0;
  p.lambda_micro = 0.8;
  p.mu_c = 0.6;
  p.mu = 1.3;
  p.L_c = 0.4;
  p.a1 = 1.1;
  p.a2 = 0.7;
  p.a3 = 1.9;
  p.alpha1 = 0.9;
  p.alpha2 = 1.4;
  p.alpha3 = 0.5;
  return p;
}

PointState rand_point(int nfields, std::mt19937_64& rng, bool sg = false) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PointState y;
  y.value.resize(nfields);
  y.deriv.resize(nfields);
  for (int f = 0; f < nfields; ++f) {
    y.value[f] = u(rng);
    y.deriv[f] = u(rng);
  }
  if (sg) y.u_second = u(rng);
  return y;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-30); }

}  // namespace

TEST_CASE("bvp: reduced energies match hand formulas") {
  std::mt19937_64 rng(31);
  const IsotropicModuli p = mixed_params();
  const double scale = p.mu * p.L_c * p.L_c;

  for (int t = 0; t < 50; ++t) {
    // Micromorphic shear: unknowns u1, P12, P21.
    {
      const PointState y = rand_point(3, rng);
      const double du = y.deriv[0], s = y.value[1] + y.value[2], d = y.value[1] - y.value[2];
      const double qs = y.deriv[1] + y.deriv[2], qd = y.deriv[1] - y.deriv[2];
      const double hand = 0.5 * p.mu_e * (du - s) * (du - s) + 0.5 * p.mu_c * (du - d) * (du - d) +
                          0.5 * p.mu_micro * s * s +
                          0.25 * scale * (p.a1 * qs * qs + p.a2 * qd * qd);
      const double got = reduce_energy(Model::Micromorphic, TestKind::SimpleShear, p, y);
      CHECK(rel_err(got, hand) <= 1e-13);
    }

    // Relaxed micromorphic shear: same lower terms, curl curvature.
    // Row 0 of P (the P12 slot) is the vector P12 e2, whose curl vanishes
    // when P12 depends on x2 alone, so only P21 feeds the curvature:
    // Curl P = -P21' e2 (x) e3, split half and half into devsym and skew.
    {
      const PointState y = rand_point(3, rng);
      const double du = y.deriv[0], s = y.value[1] + y.value[2], d = y.value[1] - y.value[2];
      const double q2 = y.deriv[2];
      const double hand = 0.5 * p.mu_e * (du - s) * (du - s) + 0.5 * p.mu_c * (du - d) * (du - d) +
                          0.5 * p.mu_micro * s * s +
                          0.25 * scale * (p.a1 + p.a2) * q2 * q2;
      const double got = reduce_energy(Model::RelaxedMicromorphic, TestKind::SimpleShear, p, y);
      CHECK(rel_err(got, hand) <= 1e-13);
    }

    // Micromorphic extension: unknowns u2, P11, P22, P33.
    {
      const PointState y = rand_point(4, rng);
      const double dv = y.deriv[0];
      const double p11 = y.value[1], p22 = y.value[2], p33 = y.value[3];
      const double q11 = y.deriv[1], q22 = y.deriv[2], q33 = y.deriv[3];
      const double trp = p11 + p22 + p33, trq = q11 + q22 + q33;
      const double hand =
          p.mu_e * (p11 * p11 + (dv - p22) * (dv - p22) + p33 * p33) +
          0.5 * p.lambda_e * (dv - trp) * (dv - trp) +
          p.mu_micro * (p11 * p11 + p22 * p22 + p33 * p33) + 0.5 * p.lambda_micro * trp * trp +
          0.5 * scale *
              (p.a1 * (q11 * q11 + q22 * q22 + q33 * q33 - trq * trq / 3.0) +
               2.0 / 3.0 * p.a3 * trq * trq);
      const double got = reduce_energy(Model::Micromorphic, TestKind::UniaxialExtension, p, y);
      CHECK(rel_err(got, hand) <= 1e-13);
    }

    // Cosserat shear: unknowns u1, a3 with P = a3 anti(e3). As for the
    // relaxed model only the e2 (x) e1 row curls, Curl P = -a3' e2 (x) e3,
    // which matches the Nye image of the axial gradient a3' e3 (x) e2.
    {
      const PointState y = rand_point(2, rng);
      const double du = y.deriv[0], a3 = y.value[1], da3 = y.deriv[1];
      const double hand = 0.5 * p.mu_e * du * du +
                          2.0 * p.mu_c * (0.5 * du + a3) * (0.5 * du + a3) +
                          0.25 * scale * (p.alpha1 + p.alpha2) * da3 * da3;
      const double got = reduce_energy(Model::Cosserat, TestKind::SimpleShear, p, y);
      CHECK(rel_err(got, hand) <= 1e-13);
    }

    // Second gradient, both tests.
    {
      const DerivedModuli dm = derive(p);
      PointState y = rand_point(1, rng, true);
      double hand = 0.5 * dm.mu_macro * y.deriv[0] * y.deriv[0] +
                    0.25 * scale * (p.a1 + p.a2) * y.u_second * y.u_second;
      CHECK(rel_err(reduce_energy(Model::SecondGradient, TestKind::SimpleShear, p, y), hand) <=
            1e-13);
      y = rand_point(1, rng, true);
      hand = 0.5 * dm.M_macro * y.deriv[0] * y.deriv[0] +
             scale / 3.0 * (p.a1 + p.a3) * y.u_second * y.u_second;
      CHECK(rel_err(reduce_energy(Model::SecondGradient, TestKind::UniaxialExtension, p, y),
                    hand) <= 1e-13);
    }

    // Linear elastic, both tests (macro moduli, no curvature).
    {
      const DerivedModuli dm = derive(p);
      PointState y = rand_point(1, rng);
      CHECK(rel_err(reduce_energy(Model::LinearElastic, TestKind::SimpleShear, p, y),
                    0.5 * dm.mu_macro * y.deriv[0] * y.deriv[0]) <= 1e-13);
      CHECK(rel_err(reduce_energy(Model::LinearElastic, TestKind::UniaxialExtension, p, y),
                    0.5 * dm.M_macro * y.deriv[0] * y.deriv[0]) <= 1e-13);
    }
  }
}

TEST_CASE("bvp: problem validation") {
  ProblemSpec spec;
  spec.n = 4;
  CHECK_THROWS_WITH_AS(solve(spec), "ProblemSpec: n >= 8 required (got 4)", ArgumentError);
  spec.n = 64;
  spec.model = Model::Cosserat;
  spec.test = TestKind::UniaxialExtension;
  spec.bc = BcKind::FullDirichlet;
  CHECK_THROWS_AS(solve(spec), SpecError);
  spec.test = TestKind::SimpleShear;
  spec.bc = BcKind::ConsistentCoupling;
  CHECK_THROWS_AS(solve(spec), SpecError);
  spec.model = Model::Micromorphic;
  spec.bc = BcKind::NormalClamp;
  CHECK_THROWS_AS(solve(spec), SpecError);
  spec.model = Model::SecondGradient;
  spec.bc = BcKind::FullDirichlet;
  CHECK_THROWS_AS(solve(spec), SpecError);
  CHECK_THROWS_AS(field_names(Model::Cosserat, TestKind::UniaxialExtension), SpecError);
}

TEST_CASE("bvp: linear elastic slab is exact at machine precision") {
  ProblemSpec spec;
  spec.model = Model::LinearElastic;
  spec.bc = BcKind::FullDirichlet;
  spec.params = mixed_params();
  spec.h = 2.5;
  spec.gamma = 0.7;
  spec.n = 16;
  const DerivedModuli dm = derive(spec.params);

  spec.test = TestKind::SimpleShear;
  Solution1D sol = solve(spec);
  CHECK(rel_err(sol.stiffness, dm.mu_macro) <= 1e-12);
  CHECK(sol.residual <= 1e-10);
  for (size_t i = 0; i < sol.x.size(); ++i) {
    CHECK(std::abs(sol.profiles[0][i] - spec.gamma * sol.x[i]) <= 1e-12 * spec.h);
  }

  spec.test = TestKind::UniaxialExtension;
  sol = solve(spec);
  CHECK(rel_err(sol.stiffness, dm.M_macro) <= 1e-12);
}

TEST_CASE("bvp: second gradient mixed conditions reproduce the macro stiffness") {
  ProblemSpec spec;
  spec.model = Model::SecondGradient;
  spec.bc = BcKind::MixedSG;
  spec.params = mixed_params();
  spec.n = 64;
  const DerivedModuli dm = derive(spec.params);
  for (const double lc : {0.01, 0.3, 2.0}) {
    spec.params.L_c = lc;
    spec.test = TestKind::SimpleShear;
    CHECK(rel_err(solve(spec).stiffness, dm.mu_macro) <= 1e-10);
    spec.test = TestKind::UniaxialExtension;
    CHECK(rel_err(solve(spec).stiffness, dm.M_macro) <= 1e-10);
  }
}

TEST_CASE("bvp: second gradient clamped profile matches the closed form") {
  ProblemSpec spec;
  spec.model = Model::SecondGradient;
  spec.bc = BcKind::NormalClamp;
  spec.test = TestKind::SimpleShear;
  spec.params = mixed_params();
  spec.h = 1.0;
  spec.gamma = 1.0;
  spec.n = 200;
  const Solution1D sol = solve(spec);
  double max_err = 0.0;
  for (size_t i = 0; i < sol.x.size(); ++i) {
    const double ref = analytic_sg_dirichlet(spec.params, spec.test, spec.h, spec.gamma, sol.x[i]);
    max_err = std::max(max_err, std::abs(sol.profiles[0][i] - ref));
  }
  CHECK(max_err <= 2e-4 * spec.gamma * spec.h);

  // Clamping the normal derivative blocks the boundary layer, so the slab is
  // strictly stiffer than the macro material and stiffens with L_c.
  const DerivedModuli dm = derive(spec.params);
  CHECK(sol.stiffness > dm.mu_macro);
  std::vector<double> lcs = log_spaced(1e-2, 1e2, 9);
  const StiffnessCurve curve = sweep_lc(spec, lcs, 2);
  CHECK(is_monotone_nondecreasing(curve.stiffness));
  CHECK(curve.stiffness.front() >= dm.mu_macro * (1.0 - 1e-9));

  // The effective length follows the curvature weights.
  const double l2 = spec.params.mu * spec.params.L_c * spec.params.L_c *
                    (spec.params.a1 + spec.params.a2) / (2.0 * dm.mu_macro);
  CHECK(rel_err(sg_effective_length(spec.params, TestKind::SimpleShear),
                std::sqrt(l2)) <= 1e-12);
}

TEST_CASE("bvp: consistent coupling interpolates between macro and zero-curl limits") {
  ProblemSpec spec;
  spec.model = Model::Micromorphic;
  spec.test = TestKind::SimpleShear;
  spec.bc = BcKind::ConsistentCoupling;
  spec.params = mixed_params();
  spec.h = 1.0;
  spec.n = 400;
  const DerivedModuli dm = derive(spec.params);

  spec.params.L_c = 1e-3;
  CHECK(rel_err(solve(spec).stiffness, dm.mu_macro) <= 1e-2);
  spec.params.L_c = 1e3;
  CHECK(rel_err(solve(spec).stiffness, dm.mu_bar) <= 1e-2);

  // The whole curve is sandwiched and monotone.
  spec.params.L_c = 1.0;
  const StiffnessCurve curve = sweep_lc(spec, log_spaced(1e-3, 1e3, 7), 2);
  CHECK(is_monotone_nondecreasing(curve.stiffness));
  for (const double k : curve.stiffness) {
    CHECK(k >= dm.mu_macro * (1.0 - 1e-9));
    CHECK(k <= dm.mu_bar * (1.0 + 1e-9));
  }

  // The relaxed model shares both endpoints on this test.
  spec.model = Model::RelaxedMicromorphic;
  spec.params.L_c = 1e-3;
  CHECK(rel_err(solve(spec).stiffness, dm.mu_macro) <= 1e-2);
  spec.params.L_c = 1e3;
  CHECK(rel_err(solve(spec).stiffness, dm.mu_bar) <= 1e-2);

  // Extension drives the longitudinal moduli instead.
  spec.model = Model::Micromorphic;
  spec.test = TestKind::UniaxialExtension;
  spec.params.L_c = 1e3;
  CHECK(rel_err(solve(spec).stiffness, dm.M_bar) <= 1e-2);
  spec.params.L_c = 1e-3;
  CHECK(rel_err(solve(spec).stiffness, dm.M_macro) <= 1e-2);
}

TEST_CASE("bvp: full Dirichlet pins the micro field and overshoots mu_bar") {
  ProblemSpec spec;
  spec.model = Model::Micromorphic;
  spec.test = TestKind::SimpleShear;
  spec.bc = BcKind::FullDirichlet;
  spec.params = mixed_params();
  spec.n = 400;
  spec.params.L_c = 1e3;
  // P is pinned to zero at the ends and constant in the bulk, so it vanishes
  // and the slab responds with mu_e + mu_c.
  const Solution1D sol = solve(spec);
  CHECK(rel_err(sol.stiffness, spec.params.mu_e + spec.params.mu_c) <= 1e-2);

  // At equal L_c the fully pinned slab is at least as stiff as the
  // consistently coupled one.
  for (const double lc : {0.05, 0.5, 5.0}) {
    spec.params.L_c = lc;
    const double full = solve(spec).stiffness;
    ProblemSpec cc = spec;
    cc.bc = BcKind::ConsistentCoupling;
    CHECK(full >= solve(cc).stiffness * (1.0 - 1e-9));
  }
}

TEST_CASE("bvp: singular configurations are reported, not solved") {
  ProblemSpec spec;
  spec.model = Model::Micromorphic;
  spec.test = TestKind::SimpleShear;
  spec.bc = BcKind::ConsistentCoupling;
  spec.params = mixed_params();
  spec.params.mu_micro = 0.0;
  CHECK_THROWS_AS(solve(spec), SingularSystem);

  // Free micro boundary with mu_c = 0: the antisymmetric combination
  // P12 - P21 carries no energy once only its derivative is penalized, so
  // the reduced operator has a one dimensional kernel.
  spec.params = mixed_params();
  spec.params.mu_c = 0.0;
  spec.bc = BcKind::FreeMicro;
  try {
    solve(spec);
    FAIL("expected SingularSystem");
  } catch (const SingularSystem& e) {
    CHECK(e.kernel_dim == 1);
  }

  // The same data under consistent coupling pins that combination at the
  // boundary and solves fine.
  spec.bc = BcKind::ConsistentCoupling;
  const Solution1D sol = solve(spec);
  CHECK(sol.residual <= 1e-8);
}

TEST_CASE("bvp: assembled operator matches the quadrature energy") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const Model model : {Model::Micromorphic, Model::SecondGradient}) {
    ProblemSpec spec;
    spec.model = model;
    spec.test = TestKind::SimpleShear;
    spec.bc = model == Model::SecondGradient ? BcKind::NormalClamp : BcKind::ConsistentCoupling;
    spec.params = mixed_params();
    spec.n = 16;
    const AssembledSystem sys = assemble(spec);
    for (int t = 0; t < 5; ++t) {
      std::vector<double> dofs(sys.n_dofs);
      for (auto& v : dofs) v = u(rng);
      const Eigen::Map<const Eigen::VectorXd> x(dofs.data(), sys.n_dofs);
      const double quad = dof_energy(spec, dofs);
      const double matrix = 0.5 * x.dot(sys.K * x);
      CHECK(rel_err(quad, matrix) <= 1e-12);
    }
  }
}

TEST_CASE("bvp: coercivity constant is mesh stable and positive") {
  ProblemSpec spec;
  spec.model = Model::Micromorphic;
  spec.test = TestKind::SimpleShear;
  spec.bc = BcKind::ConsistentCoupling;
  spec.params = mixed_params();
  spec.params.mu_c = 0.0;
  spec.n = 100;
  const double c100 = coercivity_eigenvalue(spec);
  spec.n = 200;
  const double c200 = coercivity_eigenvalue(spec);
  CHECK(c100 > 0.0);
  CHECK(c200 > 0.0);
  CHECK(std::abs(c200 - c100) <= 0.2 * c100);
}

TEST_CASE("bvp: essential boundary relations hold on the discrete solution") {
  ProblemSpec spec;
  spec.model = Model::Micromorphic;
  spec.test = TestKind::SimpleShear;
  spec.bc = BcKind::ConsistentCoupling;
  spec.params = mixed_params();
  spec.n = 64;
  const Solution1D sol = solve(spec);
  const BoundaryResiduals br = boundary_residuals(spec, sol);
  CHECK(!br.entries.empty());
  CHECK(br.max_abs <= 1e-10);
}

TEST_CASE("bvp: natural moment residual shrinks under refinement") {
  ProblemSpec spec;
  spec.model = Model::Micromorphic;
  spec.test = TestKind::UniaxialExtension;
  spec.bc = BcKind::ConsistentCoupling;
  spec.params = mixed_params();
  spec.n = 64;
  const MomentTraceReport coarse = natural_moment_trace(spec, solve(spec));
  spec.n = 256;
  const MomentTraceReport fine = natural_moment_trace(spec, solve(spec));
  const double c = std::max(std::abs(coarse.low), std::abs(coarse.high));
  const double f = std::max(std::abs(fine.low), std::abs(fine.high));
  CHECK(f < 0.7 * c);

  ProblemSpec le = spec;
  le.model = Model::LinearElastic;
  le.bc = BcKind::FullDirichlet;
  const Solution1D lsol = solve(le);
  CHECK_THROWS_AS(natural_moment_trace(le, lsol), ArgumentError);
}

TEST_CASE("bvp: sweeps are deterministic across thread counts") {
  ProblemSpec spec;
  spec.model = Model::RelaxedMicromorphic;
  spec.test = TestKind::SimpleShear;
  spec.bc = BcKind::ConsistentCoupling;
  spec.params = mixed_params();
  spec.n = 64;
  const std::vector<double> lcs = log_spaced(0.01, 10.0, 6);
  CHECK(lcs.size() == 6);
  CHECK(std::abs(lcs.front() - 0.01) <= 1e-15);
  CHECK(std::abs(lcs.back() - 10.0) <= 1e-12);
  const StiffnessCurve one = sweep_lc(spec, lcs, 1);
  const StiffnessCurve four = sweep_lc(spec, lcs, 4);
  REQUIRE(one.stiffness.size() == four.stiffness.size());
  for (size_t i = 0; i < one.stiffness.size(); ++i) {
    CHECK(one.stiffness[i] == four.stiffness[i]);
  }
}

TEST_CASE("bvp: convergence orders") {
  ProblemSpec spec;
  spec.model = Model::SecondGradient;
  spec.test = TestKind::SimpleShear;
  spec.bc = BcKind::NormalClamp;
  spec.params = mixed_params();
  const ConvergenceStudy sg = convergence_study(spec, {50, 100, 200});
  CHECK(sg.observed_order >= 1.7);
  CHECK(sg.observed_order <= 2.3);

  spec.model = Model::Micromorphic;
  spec.bc = BcKind::ConsistentCoupling;
  const ConvergenceStudy mm = convergence_study(spec, {16, 32, 64});
  CHECK(mm.observed_order >= 1.7);
}

TEST_CASE("bvp: apparent stiffness normalization") {
  CHECK(apparent_stiffness(0.5, 1.0, 1.0) == 1.0);
  CHECK(std::abs(apparent_stiffness(2.0, 0.5, 4.0) - 4.0) <= 1e-15);
}
