#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spectral_type/special.hpp"
#include "spectral_type/sturm.hpp"

using namespace spectral_type;
using namespace spectral_type::sturm;
using numerics::Interval;

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

WeightedProblem string_problem() {
  return {Interval(0, 1), [](double) { return 1.0; }, std::nullopt, BoundaryCondition::dirichlet()};
}

WeightedProblem radial_problem(double mu, double r = 1.0) {
  return {Interval(0, r), [mu](double s) { return std::pow(s, mu - 1); }, std::nullopt,
          BoundaryCondition::natural_dirichlet()};
}

double lambda_of(double mu) { return special::lambda_mu(special::DimensionParam(mu)).lambda; }

Mesh graded_for(double mu, const Interval& iv, int cells) {
  return Mesh::graded(iv, cells, std::max(1.0, 2.0 / mu));
}

}  // namespace

TEST(BoundaryCondition, RejectsNaturalBothEnds) {
  EXPECT_THROW((BoundaryCondition{Endpoint::Natural, Endpoint::Natural}), Error);
}

TEST(Mesh, Validation) {
  EXPECT_THROW(Mesh::uniform(Interval(0, 1), 10), Error);  // too few interior nodes
  std::vector<double> bad(30);
  for (int i = 0; i < 30; ++i) bad[i] = i;
  bad[7] = bad[6];
  EXPECT_THROW(Mesh(bad, 1.0), Error);
  const auto m = Mesh::graded(Interval(0, 2), 100, 2.0);
  EXPECT_EQ(m.cells(), 100u);
  EXPECT_EQ(m.nodes().front(), 0.0);
  EXPECT_EQ(m.nodes().back(), 2.0);
  EXPECT_NEAR(m.nodes()[1], 2.0 * 1e-4, 1e-18);
}

TEST(Fem, VibratingString) {
  const auto sol = first_eigen_fem(string_problem(), Mesh::uniform(Interval(0, 1), 2000));
  EXPECT_NEAR(sol.lambda, kPi2, 0.01);
  EXPECT_LT(sol.residual, 1e-8);
}

TEST(Fem, RadialBesselConstants) {
  for (double mu : {2.0, 3.0}) {
    const auto p = radial_problem(mu);
    const auto sol = first_eigen_fem(p, graded_for(mu, p.interval, 4000));
    EXPECT_NEAR(sol.lambda / lambda_of(mu), 1.0, 2e-3) << mu;
  }
  EXPECT_NEAR(lambda_of(2.0), 5.7832, 1e-3);
}

TEST(Fem, DegenerateWeightBelowOne) {
  const auto p = radial_problem(0.5);
  const auto sol = first_eigen_fem(p, graded_for(0.5, p.interval, 4000));
  EXPECT_NEAR(sol.lambda / lambda_of(0.5), 1.0, 2e-3);
}

TEST(Fem, EigenfunctionInvariants) {
  const auto p = radial_problem(4.0);
  const auto mesh = graded_for(4.0, p.interval, 1000);
  const auto sol = first_eigen_fem(p, mesh);
  ASSERT_EQ(sol.eigenfunction.size(), mesh.nodes().size());
  EXPECT_EQ(detail::interior_sign_changes(sol.eigenfunction), 0u);
  for (double v : sol.eigenfunction) EXPECT_GE(v, 0.0);
  EXPECT_EQ(sol.eigenfunction.back(), 0.0);
  EXPECT_NEAR(rayleigh_quotient(sol.eigenfunction, p, mesh) / sol.lambda, 1.0, 1e-10);
  // normalized so that int u^2 w = 1 (P1 mass form)
  const auto pencil = detail::assemble(p, mesh);
  EXPECT_NEAR(pencil.mass_form(sol.eigenfunction) * pencil.q_scale, 1.0, 1e-10);
}

TEST(Fem, SingularMassOnVanishingCell) {
  WeightedProblem p{Interval(0, 1), [](double s) { return s < 0.5 ? 0.0 : 1.0; }, std::nullopt,
                    BoundaryCondition::dirichlet()};
  try {
    first_eigen_fem(p, Mesh::uniform(p.interval, 100));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularMass);
  }
}

TEST(Shoot, AgreesWithFem) {
  {
    const auto p = string_problem();
    const double fem = first_eigen_fem(p, Mesh::uniform(p.interval, 2000)).lambda;
    const double sh = first_eigen_shoot(p).lambda;
    EXPECT_NEAR(sh, kPi2, 1e-6);
    EXPECT_NEAR(sh / fem, 1.0, 1e-3);
  }
  for (double mu : {2.0, 3.0, 4.0}) {
    const auto p = radial_problem(mu);
    const double fem = first_eigen_fem(p, graded_for(mu, p.interval, 4000)).lambda;
    const double sh = first_eigen_shoot(p, {}, std::max(1.0, 2.0 / mu)).lambda;
    EXPECT_NEAR(sh / fem, 1.0, 1e-3) << mu;
    EXPECT_NEAR(sh / lambda_of(mu), 1.0, 1e-3) << mu;
  }
}

TEST(Shoot, EigenfunctionIsPositive) {
  const auto sol = first_eigen_shoot(radial_problem(6.0));
  EXPECT_NEAR(sol.lambda / lambda_of(6.0), 1.0, 1e-6);
  EXPECT_EQ(detail::interior_sign_changes(sol.eigenfunction), 0u);
}

TEST(Rayleigh, HatFunction) {
  const auto p = string_problem();
  const auto mesh = Mesh::uniform(p.interval, 20);
  std::vector<double> u(21);
  for (int i = 0; i <= 20; ++i) u[i] = 1.0 - std::abs(i / 10.0 - 1.0);
  EXPECT_NEAR(rayleigh_quotient(u, p, mesh), 12.0, 1e-12);
  std::vector<double> u3(u);
  for (double& v : u3) v *= 3;
  EXPECT_NEAR(rayleigh_quotient(u3, p, mesh), 12.0, 1e-12);
}

TEST(Rayleigh, Errors) {
  const auto p = string_problem();
  const auto mesh = Mesh::uniform(p.interval, 20);
  std::vector<double> zero(21, 0.0);
  try {
    rayleigh_quotient(zero, p, mesh);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroDenominator);
  }
  std::vector<double> ones(21, 1.0);
  EXPECT_THROW(rayleigh_quotient(ones, p, mesh), Error);  // violates u(0) = u(1) = 0
}

TEST(Properties, DomainMonotonicity) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.2, 2.0);
  for (int trial = 0; trial < 5; ++trial) {
    const double a = u(rng), b = u(rng), c = u(rng);
    auto w = [=](double x) { return 1.0 + a * x * x + b * std::sin(c * x) * std::sin(c * x); };
    double prev = INFINITY;
    for (double hi : {1.0, 1.5, 2.5, 4.0}) {
      WeightedProblem p{Interval(0, hi), w, std::nullopt, BoundaryCondition::dirichlet()};
      const double lam = first_eigen_fem(p, Mesh::uniform(p.interval, 1000)).lambda;
      EXPECT_LE(lam, prev);
      prev = lam;
    }
  }
}

TEST(Properties, ScalingLaw) {
  for (double mu : {2.0, 3.0, 5.0}) {
    for (double r : {0.5, 1.0, 2.0, 5.0}) {
      const auto p = radial_problem(mu, r);
      const double lam = first_eigen_fem(p, graded_for(mu, p.interval, 4000)).lambda;
      EXPECT_NEAR(lam * r * r / lambda_of(mu), 1.0, 2e-3) << mu << " " << r;
    }
  }
}

TEST(Properties, SecondOrderConvergence) {
  const auto p = radial_problem(3.0);
  double prev = 0.0;
  for (int cells : {250, 500, 1000, 2000}) {
    const double err = std::abs(first_eigen_fem(p, graded_for(3.0, p.interval, cells)).lambda - kPi2);
    if (prev > 0.0) {
      EXPECT_GE(prev / err, 3.0) << cells;
    }
    prev = err;
  }
}

TEST(Properties, MinimalityOverRandomVectors) {
  const auto p = radial_problem(3.0);
  const auto mesh = graded_for(3.0, p.interval, 400);
  const double lam = first_eigen_fem(p, mesh).lambda;
  std::mt19937 rng(17);
  std::normal_distribution<double> g(0, 1);
  const auto sol = first_eigen_fem(p, mesh);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> u(mesh.nodes().size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = sol.eigenfunction[i] + 0.3 * g(rng) * (trial % 2 ? 1 : 0.01);
    u.back() = 0.0;
    EXPECT_GE(rayleigh_quotient(u, p, mesh), lam * (1 - 1e-12));
  }
}

TEST(Properties, GeneralizedQuotientWithPotentialWeight) {
  // -u'' = lambda q u with q = 4 on (0,1): lambda = pi^2 / 4
  WeightedProblem p{Interval(0, 1), [](double) { return 1.0; }, [](double) { return 4.0; },
                    BoundaryCondition::dirichlet()};
  EXPECT_NEAR(first_eigen_fem(p, Mesh::uniform(p.interval, 2000)).lambda, kPi2 / 4, 1e-5);
  EXPECT_NEAR(first_eigen_shoot(p).lambda, kPi2 / 4, 1e-8);
}
