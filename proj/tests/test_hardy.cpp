#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "spectral_type/hardy.hpp"

using namespace spectral_type;
using namespace spectral_type::hardy;
using numerics::Interval;
using surface::Profile;

namespace {

constexpr double kPi = std::numbers::pi;

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvariantViolation;  // sentinel: nothing thrown
}

double sharp(int n) { return 0.25 * (n - 2.0) * (n - 2.0); }

}  // namespace

TEST(RadialModel, WeightsAndDomains) {
  const auto e = RadialModel::euclidean(3);
  EXPECT_DOUBLE_EQ(e.weight(2.0), 4.0);
  EXPECT_DOUBLE_EQ(e.rho(2.0), 2.0);
  EXPECT_FALSE(e.admits(Interval(-1, 1)));
  const auto w = RadialModel::warped(Profile::dprs());
  EXPECT_DOUBLE_EQ(w.weight(1.0), std::exp(1.0));
  EXPECT_DOUBLE_EQ(w.rho(-3.0), 3.0);
  EXPECT_TRUE(w.admits(Interval(-5, 5)));
  EXPECT_THROW(RadialModel::euclidean(1), Error);
}

TEST(HardyInfimum, ThreeDimensionalExamples) {
  const auto m = RadialModel::euclidean(3);
  for (double R : {1.0, 10.0}) {
    const auto rep = hardy_infimum(m, Interval(0, R));
    EXPECT_DOUBLE_EQ(rep.sharp_constant, 0.25);
    EXPECT_DOUBLE_EQ(rep.epsilon, 1e-3 * R);
    EXPECT_GE(rep.discrete_infimum, 0.25 - 5e-3) << R;
    EXPECT_LE(rep.discrete_infimum, 0.25 + 0.3) << R;
  }
}

TEST(HardyInfimum, FourDimensionalBracket) {
  const auto rep = hardy_infimum(RadialModel::euclidean(4), Interval(0, 10), 8000);
  EXPECT_DOUBLE_EQ(rep.sharp_constant, 1.0);
  EXPECT_GE(rep.discrete_infimum, 0.995);
  EXPECT_LE(rep.discrete_infimum, 1.25);
}

TEST(HardyInfimum, ScaleInvariance) {
  // the quotient is invariant under s -> k s when eps scales with the support
  const auto m = RadialModel::euclidean(3);
  const double a = hardy_infimum(m, Interval(0, 1), 8000, 1e-3).discrete_infimum;
  const double b = hardy_infimum(m, Interval(0, 10), 8000, 1e-2).discrete_infimum;
  EXPECT_NEAR(a / b, 1.0, 1e-9);
}

TEST(HardyInfimum, SmallerEpsilonMovesTowardSharpConstant) {
  const auto m = RadialModel::euclidean(3);
  const double coarse = hardy_infimum(m, Interval(0, 1), 8000, 1e-3).discrete_infimum;
  const double fine = hardy_infimum(m, Interval(0, 1), 8000, 5e-4).discrete_infimum;
  EXPECT_LT(fine, coarse);
  EXPECT_GE(fine, 0.25 - 5e-3);
}

TEST(HardyInfimum, SharpnessFromBelow) {
  for (int n : {3, 4, 5}) {
    const auto m = RadialModel::euclidean(n);
    double prev = INFINITY;
    for (double R : {10.0, 20.0, 50.0}) {
      const double v = hardy_infimum(m, Interval(0, R), 8000, 0.01).discrete_infimum;
      EXPECT_GE(v, sharp(n) - 5e-3) << n << " " << R;
      EXPECT_LT(v - sharp(n), prev - sharp(n)) << n << " " << R;
      prev = v;
    }
    // mesh refinement: flat up to the weight quadrature, which can lift it by ~2e-5
    const double c4 = hardy_infimum(m, Interval(0, 50), 4000, 0.01).discrete_infimum;
    const double c8 = hardy_infimum(m, Interval(0, 50), 8000, 0.01).discrete_infimum;
    EXPECT_LE(c8, c4 + 1e-4) << n;
  }
}

TEST(HardyInfimum, MinimizerReproducesEigenvalue) {
  const auto m = RadialModel::euclidean(3);
  const Interval support(0, 10);
  const double eps = 0.01;
  const auto rep = hardy_infimum(m, support, 2000, eps);
  sturm::WeightedProblem problem{support, [](double s) { return s * s; },
                                 [eps](double s) { return s * s / (s * s + eps * eps); },
                                 sturm::BoundaryCondition::natural_dirichlet()};
  const auto mesh = sturm::Mesh::graded(support, 2000, 2.0);
  ASSERT_EQ(mesh.nodes(), rep.nodes);
  EXPECT_NEAR(sturm::rayleigh_quotient(rep.minimizer, problem, mesh) / rep.discrete_infimum, 1.0, 1e-10);
}

TEST(HardyInfimum, Errors) {
  EXPECT_EQ(kind_of([] { hardy_infimum(RadialModel::euclidean(2), Interval(0, 1)); }),
            ErrorKind::MeaninglessConstant);
  EXPECT_EQ(kind_of([] { hardy_infimum(RadialModel::euclidean(3), Interval(-1, 1)); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { hardy_infimum(RadialModel::euclidean(3), Interval(0, 1), 1000, 0.0); }),
            ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { hardy_infimum(RadialModel::warped(Profile::power_law(1.0)), Interval(-40, 40)); }),
            ErrorKind::MeaninglessConstant);
}

TEST(HardyInfimum, WarpedGrowthIndex) {
  const auto m = RadialModel::warped(Profile::power_law(6.0));
  EXPECT_NEAR(mu_effective(m, Interval(-50, 50)), 6.0, 0.01);
  const auto rep = hardy_infimum(m, Interval(-50, 50), 4000);
  EXPECT_GT(rep.discrete_infimum, 0.0);
  EXPECT_NEAR(rep.sharp_constant, 4.0, 0.02);
}

TEST(NearOptimizer, ApproachesSharpConstant) {
  EXPECT_LE(near_optimizer_quotient(3, 1e-6, 1e6), 0.27);
  for (int n : {3, 4, 5}) {
    const double q = near_optimizer_quotient(n, 1e-6, 1e6);
    EXPECT_GE(q, sharp(n));
    EXPECT_LE(q, 1.1 * sharp(n)) << n;
    // in log variables the excess is int f'^2 / int f^2 = (2 / ramp) / (L - 4 ramp / 3) for a trapezoid
    const double L = std::log(1e12), ramp = 0.375 * L;
    EXPECT_NEAR(q - sharp(n), 2.0 / (ramp * (L - 4.0 * ramp / 3.0)), 1e-9) << n;
  }
  double prev = INFINITY;
  for (double rho1 : {1e2, 1e4, 1e8}) {
    const double q = near_optimizer_quotient(3, 1.0 / rho1, rho1);
    EXPECT_LT(q, prev);
    prev = q;
  }
  EXPECT_THROW(near_optimizer_quotient(2, 0.1, 10), Error);
  EXPECT_THROW(near_optimizer_quotient(3, 1.0, 0.5), Error);
}

TEST(EuclideanBall, Examples) {
  const auto a = check_prop17(2, 1.0);
  EXPECT_TRUE(a.pass);
  EXPECT_NEAR(a.lambda, 5.7832, 0.005 * 5.7832);
  const auto b = check_prop17(3, 2.0);
  EXPECT_TRUE(b.pass);
  EXPECT_NEAR(b.lambda / (kPi * kPi / 4), 1.0, 5e-3);
  const auto c = check_prop17(5, 1.0);
  const double j = oracle::first_zero(1.5);
  EXPECT_TRUE(c.pass);
  EXPECT_NEAR(c.lambda / (j * j), 1.0, 5e-3);
  EXPECT_NEAR(c.lambda_n / (j * j), 1.0, 1e-9);
}

TEST(EuclideanBall, GridOfDimensionsAndRadii) {
  for (int n : {2, 3, 4, 5}) {
    for (double r : {0.5, 1.0, 3.0}) {
      const auto rep = check_prop17(n, r);
      EXPECT_TRUE(rep.pass) << n << " " << r << " err " << rep.relative_error;
      EXPECT_DOUBLE_EQ(rep.lambda_times_r2, rep.lambda * r * r);
    }
  }
  EXPECT_THROW(check_prop17(21, 1.0), Error);
  EXPECT_THROW(check_prop17(3, 0.0), Error);
}

TEST(Capacity, Examples) {
  EXPECT_NEAR(capacity(RadialModel::euclidean(3), 1.0, INFINITY).value, 4 * kPi, 1e-12);
  EXPECT_EQ(capacity(RadialModel::euclidean(2), 1.0, INFINITY).value, 0.0);
  // DPRS: the right end contributes 2 pi e^{r0} / 1, the left end nothing
  EXPECT_NEAR(capacity(RadialModel::warped(Profile::dprs()), 1e-9, INFINITY).value, 2 * kPi, 1e-8);
  EXPECT_NEAR(sphere_area(2), 2 * kPi, 1e-14);
  EXPECT_NEAR(sphere_area(3), 4 * kPi, 1e-13);
  EXPECT_NEAR(sphere_area(4), 2 * kPi * kPi, 1e-12);
  EXPECT_THROW(capacity(RadialModel::euclidean(3), 2.0, 1.0), Error);
}

TEST(Capacity, DiscreteCrossCheck) {
  const auto m = RadialModel::euclidean(3);
  const double closed = capacity(m, 1.0, 10.0).value;
  EXPECT_NEAR(closed, 4 * kPi / 0.9, 1e-12);
  EXPECT_NEAR(capacity_discrete(m, 1.0, 10.0) / closed, 1.0, 0.01);
  EXPECT_THROW(capacity_discrete(RadialModel::warped(Profile::dprs()), 1.0, 2.0), Error);
}

TEST(Capacity, Monotonicity) {
  std::vector<RadialModel> models{RadialModel::euclidean(2), RadialModel::euclidean(3), RadialModel::euclidean(5),
                                  RadialModel::warped(Profile::power_law(3.0)),
                                  RadialModel::warped(Profile::exponential_decay(1.0)),
                                  RadialModel::warped(Profile::dprs())};
  for (const auto& m : models) {
    double prev = INFINITY;
    for (double R : {2.0, 4.0, 8.0, 16.0}) {
      const double v = capacity(m, 1.0, R).value;
      EXPECT_LT(v, prev) << m.name() << " R=" << R;
      prev = v;
    }
    EXPECT_LE(capacity(m, 1.0, INFINITY).value, prev) << m.name();
    EXPECT_LT(capacity(m, 0.5, 8.0).value, capacity(m, 1.0, 8.0).value) << m.name();
  }
}

TEST(Capacity, LimitAgreesWithTypeVerdict) {
  std::vector<double> t, w;
  for (int i = -128; i <= 128; ++i) {
    t.push_back(0.5 * i);
    w.push_back(1.0 + 0.25 * i * i);
  }
  std::vector<Profile> profiles{Profile::power_law(0.5),
                                Profile::power_law(2.0),
                                Profile::power_law(3.0),
                                Profile::exponential_decay(1.0),
                                Profile::dprs(),
                                Profile::staircase(),
                                Profile::slowly_varying(surface::SlowChoice::LogPower, 1.0),
                                Profile::slowly_varying(surface::SlowChoice::Power, 0.5),
                                Profile::slowly_varying(surface::SlowChoice::LogLog, 1.0),
                                Profile::tabulated(t, w)};
  for (const auto& p : profiles) {
    const double limit = capacity(RadialModel::warped(p), 1.0, INFINITY).value;
    const bool hyperbolic = surface::h_bounds(p).verdict == surface::SurfaceType::Hyperbolic;
    EXPECT_EQ(limit > 0.0, hyperbolic) << p.name();
  }
}

TEST(HardyScan, Examples) {
  const auto three = verify_hardy_scan(RadialModel::euclidean(3), {Interval(0, 10), Interval(0, 50)}, {2000, 4000, 8000});
  EXPECT_GE(three.lower_bound, 0.24);
  EXPECT_TRUE(three.positive);
  EXPECT_TRUE(three.stable);
  EXPECT_EQ(three.rows.size(), 6u);
  const auto four = verify_hardy_scan(RadialModel::euclidean(4), {Interval(0, 50)}, {4000, 8000});
  EXPECT_GE(four.lower_bound, 0.95);
  const auto warped = verify_hardy_scan(RadialModel::warped(Profile::power_law(6.0)), {Interval(-50, 50)}, {2000, 4000});
  EXPECT_GT(warped.lower_bound, 0.0);
  EXPECT_TRUE(warped.stable);
}

TEST(HardyScan, ComparisonWithSharpInequality) {
  // 1/(1 + rho^2) <= 1/rho^2, so the non-sharp infimum dominates the sharp one
  const auto m = RadialModel::euclidean(3);
  const auto scan = verify_hardy_scan(m, {Interval(0, 10)}, {8000});
  EXPECT_GE(scan.lower_bound, hardy_infimum(m, Interval(0, 10), 8000, 1e-9).discrete_infimum * (1 - 1e-9));
}

TEST(HardyScan, Errors) {
  const auto m = RadialModel::euclidean(3);
  EXPECT_THROW(verify_hardy_scan(m, {}, {1000}), Error);
  EXPECT_THROW(verify_hardy_scan(m, {Interval(0, 1)}, {}), Error);
  EXPECT_THROW(verify_hardy_scan(m, {Interval(-1, 1)}, {1000}), Error);
}
