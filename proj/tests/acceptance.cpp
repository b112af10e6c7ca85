// Acceptance run: one PASS/FAIL line per criterion, with the measured numbers and
// wall time. Exits nonzero if any criterion fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "spectral_type/spectral_type.hpp"

using namespace spectral_type;
using numerics::Interval;
using surface::Profile;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string format(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double lambda_of(double mu) { return special::lambda_mu(special::DimensionParam(mu)).lambda; }

Outcome bessel_oracles() {
  double worst = 0.0;
  for (double nu : {-0.9, -0.5, 0.0, 0.5, 1.0, 2.0, 5.0, 20.0, 60.0}) {
    worst = std::max(worst, std::abs(special::first_zero(special::BesselOrder(nu)) - oracle::first_zero(nu)));
  }
  const double l2 = lambda_of(2.0), l3 = lambda_of(3.0);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const bool ok = worst <= 1e-9 && l2 >= 5.7831 && l2 <= 5.7833 && std::abs(l3 - pi2) <= 1e-8;
  return {ok, format("max |j - oracle| = %.2e, lambda_2 = %.6f, |lambda_3 - pi^2| = %.2e", worst, l2,
                     std::abs(l3 - pi2))};
}

Outcome radial_equivalence() {
  bool ok = true;
  double worst_rel = 0.0, worst_order = 1e9;
  for (double mu : {2.0, 3.0, 4.0, 6.0, 10.0}) {
    const sturm::WeightedProblem p{Interval(0, 1), [mu](double s) { return std::pow(s, mu - 1); }, std::nullopt,
                                   sturm::BoundaryCondition::natural_dirichlet()};
    const double exact = lambda_of(mu);
    std::vector<double> err;
    for (int cells : {1000, 2000, 4000}) {
      const auto mesh = sturm::Mesh::graded(p.interval, cells, std::max(1.0, 2.0 / mu));
      err.push_back(std::abs(sturm::first_eigen_fem(p, mesh).lambda - exact) / exact);
    }
    worst_rel = std::max(worst_rel, err.back());
    for (std::size_t i = 1; i < err.size(); ++i) worst_order = std::min(worst_order, std::log2(err[i - 1] / err[i]));
    ok = ok && err.back() <= 2e-3;
  }
  ok = ok && worst_order >= 1.8;
  return {ok, format("max rel err at 4000 cells = %.2e, min observed order = %.2f", worst_rel, worst_order)};
}

Outcome lemma_residuals() {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst21 = 0.0, worst23 = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double mu = 0.2 + 39.8 * u(rng);
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    worst21 = std::max(worst21, special::check_lemma21(special::DimensionParam(mu), a, b));
  }
  for (int i = 0; i < 20; ++i) {
    const double mu = 2.0 + 1e-3 + 38.0 * u(rng);
    const double x = 1e-3 + (1.0 - 1e-3) * u(rng);
    worst23 = std::max(worst23, special::check_lemma23(special::DimensionParam(mu), x));
  }
  return {worst21 < 1e-8 && worst23 < 1e-8, format("max residual: energy %.2e, hardy %.2e", worst21, worst23)};
}

Outcome euclidean_balls() {
  bool ok = true;
  double worst = 0.0;
  for (int n : {2, 3, 4, 5}) {
    for (double r : {0.5, 1.0, 3.0}) {
      const auto rep = hardy::check_prop17(n, r);
      ok = ok && rep.pass;
      worst = std::max(worst, rep.relative_error);
    }
  }
  return {ok, format("max |lambda_1 r^2 - lambda_n| / lambda_n = %.2e", worst)};
}

Outcome sharp_hardy() {
  bool ok = true;
  std::string detail;
  for (int n : {3, 4, 5}) {
    const auto m = hardy::RadialModel::euclidean(n);
    const double c = 0.25 * (n - 2.0) * (n - 2.0);
    double prev_slack = INFINITY;
    std::string slacks;
    for (double R : {10.0, 20.0, 50.0}) {
      const double v = hardy::hardy_infimum(m, Interval(0, R), 8000, 0.01).discrete_infimum;
      const double slack = v - c;
      if (R == 10.0) ok = ok && slack >= -0.005 && slack <= 0.3;
      ok = ok && slack >= -0.005 && slack < prev_slack;
      prev_slack = slack;
      slacks += format("%s%.4f", slacks.empty() ? "" : ">", slack);
    }
    const double q = hardy::near_optimizer_quotient(n, 1e-6, 1e6);
    ok = ok && std::abs(q - c) <= 0.1 * c;
    detail += format("%sn=%d slack %s, near-optimizer %.4f", detail.empty() ? "" : "; ", n, slacks.c_str(), q);
  }
  return {ok, detail};
}

Outcome type_classification() {
  using surface::SurfaceType;
  bool ok = true;
  auto expect = [&](const Profile& p, SurfaceType t) { ok = ok && surface::h_bounds(p).verdict == t; };
  for (double a : {0.5, 1.0, 2.0}) expect(Profile::power_law(a), SurfaceType::Parabolic);
  for (double a : {2.5, 3.0, 6.0}) expect(Profile::power_law(a), SurfaceType::Hyperbolic);
  expect(Profile::exponential_decay(1.0), SurfaceType::Parabolic);
  expect(Profile::dprs(), SurfaceType::Hyperbolic);
  expect(Profile::staircase(), SurfaceType::Hyperbolic);
  return {ok, "10 profiles classified"};
}

Outcome dprs_floor() {
  bool ok = true;
  std::string detail;
  for (double r : {4.0, 8.0, 16.0}) {
    const double lam = surface::lambda1_ball(Profile::dprs(), r).lambda;
    const double up = surface::upper_test_quotient(Profile::dprs(), r);
    // for DPRS the sine test function is the exact eigenfunction, so up equals lam up to rounding
    ok = ok && lam >= 0.25 && lam <= up * (1 + 1e-10);
    detail += format("%sr=%g: %.8f <= %.8f", detail.empty() ? "" : ", ", r, lam, up);
  }
  const std::vector<Profile> builtin{Profile::power_law(0.5),
                                     Profile::power_law(3.0),
                                     Profile::exponential_decay(1.0),
                                     Profile::dprs(),
                                     Profile::staircase(),
                                     Profile::slowly_varying(surface::SlowChoice::LogPower, 1.0),
                                     Profile::slowly_varying(surface::SlowChoice::Power, 0.5),
                                     Profile::slowly_varying(surface::SlowChoice::LogLog, 1.0)};
  int rows = 0;
  for (const auto& p : builtin) {
    for (const auto& row : surface::scan(p, numerics::geometric_grid(1.0, 24.0, 8), {}, 0)) {
      const double slack = 1e-10 * row.lambda1;
      ok = ok && row.dprs_bound <= row.lambda1 + slack && row.lambda1 <= row.upper + slack;
      ++rows;
    }
  }
  return {ok, detail + format("; sandwich held on %d scan rows", rows)};
}

Outcome exponential_sharpness() {
  const auto p = Profile::exponential_decay(1.0);
  std::vector<double> r, y;
  for (double x = 8.0; x <= 24.0; x += 2.0) {
    r.push_back(x);
    y.push_back(-std::log(surface::lambda1_ball(p, x).lambda));
  }
  const double n = r.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    sx += r[i];
    sy += y[i];
    sxx += r[i] * r[i];
    sxy += r[i] * y[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double alpha = surface::estimate(p, surface::Quantity::AlphaStar, Interval(8, 24)).value;
  const double tilde = surface::estimate(p, surface::Quantity::LambdaTilde, Interval(8, 24), 8, {}, 0).value;
  const bool ok = slope >= 0.85 && slope <= 1.15 && alpha >= 0.98 && alpha <= 1.02 && tilde >= alpha - 0.05;
  return {ok, format("slope %.4f, alpha_* %.4f, Lambda~_* %.4f", slope, alpha, tilde)};
}

Outcome slowly_varying_two_sided() {
  const auto p = Profile::slowly_varying(surface::SlowChoice::Power, 0.5);
  bool ok = true;
  std::string detail;
  for (const auto& row : surface::scan(p, {25.0, 50.0, 100.0, 200.0}, {}, 0)) {
    const double v = row.lambda1 * row.r;
    ok = ok && v >= 0.2 && v <= 5.0;
    detail += format("%sr=%g: %.4f", detail.empty() ? "lambda_1 r: " : ", ", row.r, v);
  }
  return {ok, detail};
}

Outcome volume_positivity() {
  const auto p = Profile::power_law(6.0);
  const Interval window(10, 200);
  const double lambda_star = surface::estimate(p, surface::Quantity::LambdaStar, window, 8, {}, 0).value;
  const double mu = special::inverse_lambda_mu(lambda_star);
  double floor = INFINITY;
  for (double r : numerics::geometric_grid(10, 200, 64)) {
    floor = std::min(floor, surface::volume_ball(p, r) / std::pow(r, mu));
  }
  const double nu_star = surface::estimate(p, surface::Quantity::NuStar, window).value;
  const double cap = lambda_of(6.05);
  const bool ok = floor > 0.0 && std::isfinite(floor) && std::abs(nu_star - 6.0) <= 0.05 && lambda_star <= cap;
  return {ok, format("Lambda_* %.4f <= lambda_6.05 %.4f, matched mu %.4f, min |B_r|/r^mu %.4f, nu_* %.4f",
                     lambda_star, cap, mu, floor, nu_star)};
}

std::string run_scan() {
  const std::string cmd = std::string("\"") + SPECTRAL_TYPE_CLI +
                          "\" --no-banner scan --family power_law --alpha 3 --r-min 4 --r-max 32 --points 6";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {};
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
  return pclose(pipe) == 0 ? out : std::string{};
}

Outcome determinism() {
  const std::string a = run_scan(), b = run_scan();
  return {!a.empty() && a == b, format("%zu bytes, %s", a.size(), a == b ? "identical" : "differ")};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "Bessel oracle suite", 5, bessel_oracles},
      {2, "radial eigenvalue equivalence", 30, radial_equivalence},
      {3, "identity residuals", 10, lemma_residuals},
      {4, "Euclidean ball eigenvalues", 20, euclidean_balls},
      {5, "sharp Hardy constant", 60, sharp_hardy},
      {6, "type classification", 5, type_classification},
      {7, "DPRS floor and sandwich", 60, dprs_floor},
      {8, "exponential-decay sharpness", 90, exponential_sharpness},
      {9, "slowly varying two-sided bound", 120, slowly_varying_two_sided},
      {10, "volume growth positivity", 60, volume_positivity},
      {11, "scan determinism", 10, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs <= c.budget_s;
    failures += pass ? 0 : 1;
    std::printf("criterion %2d %-32s %s  [%.2f s / %.0f s]  %s\n", c.id, c.name, pass ? "PASS" : "FAIL", secs,
                c.budget_s, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
