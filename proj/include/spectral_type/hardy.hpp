#pragma once

// Hardy inequalities and capacity on radial models: Euclidean R^n in polar
// coordinates (weight s^{n-1}, rho = s) and warped surfaces (weight eta', rho = |t|).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "spectral_type/error.hpp"
#include "spectral_type/numerics.hpp"
#include "spectral_type/special.hpp"
#include "spectral_type/sturm.hpp"
#include "spectral_type/surface.hpp"

namespace spectral_type::hardy {

using numerics::Interval;
using numerics::Tolerance;

class RadialModel {
 public:
  enum class Kind { EuclideanRadial, WarpedSurface };

  static RadialModel euclidean(int n) {
    if (n < 2) throw Error(ErrorKind::InvalidArgument, "Euclidean dimension must be >= 2");
    RadialModel m;
    m.kind_ = Kind::EuclideanRadial;
    m.n_ = n;
    return m;
  }
  static RadialModel warped(surface::Profile profile) {
    RadialModel m;
    m.kind_ = Kind::WarpedSurface;
    m.profile_ = std::move(profile);
    return m;
  }

  Kind kind() const { return kind_; }
  int dimension() const { return n_; }
  const surface::Profile& profile() const { return *profile_; }

  double weight(double x) const {
    return kind_ == Kind::EuclideanRadial ? std::pow(x, n_ - 1) : profile_->eta_prime(x);
  }
  double rho(double x) const { return std::abs(x); }

  /// Whether `iv` lies in the model's coordinate domain.
  bool admits(const Interval& iv) const {
    if (kind_ == Kind::EuclideanRadial) return iv.lo >= 0.0;
    if (const auto dom = profile_->domain()) return iv.lo >= dom->lo && iv.hi <= dom->hi;
    return true;
  }

  std::string name() const {
    return kind_ == Kind::EuclideanRadial ? "euclidean(n=" + std::to_string(n_) + ")"
                                          : "warped(" + profile_->name() + ")";
  }

 private:
  Kind kind_ = Kind::EuclideanRadial;
  int n_ = 0;
  std::optional<surface::Profile> profile_;
};

struct HardyReport {
  double mu_effective;
  double discrete_infimum;
  double sharp_constant;  // ((mu - 2) / 2)^2
  double epsilon;
  std::vector<double> nodes;
  std::vector<double> minimizer;
};

namespace detail {

/// Euclidean supports starting at the origin keep a natural condition there: a point
/// has zero capacity in dimension >= 2, so no boundary value is imposed.
inline sturm::BoundaryCondition support_bc(const RadialModel& m, const Interval& support) {
  if (m.kind() == RadialModel::Kind::EuclideanRadial && support.lo == 0.0) {
    return sturm::BoundaryCondition::natural_dirichlet();
  }
  return sturm::BoundaryCondition::dirichlet();
}

/// Cells cluster quadratically at an origin endpoint, where the Hardy minimizer
/// varies on the scale of epsilon.
inline sturm::Mesh support_mesh(const RadialModel& m, const Interval& support, int cells) {
  const bool origin = m.kind() == RadialModel::Kind::EuclideanRadial && support.lo == 0.0;
  return sturm::Mesh::graded(support, cells, origin ? 2.0 : 1.0);
}

inline void check_support(const RadialModel& m, const Interval& support) {
  if (!m.admits(support)) {
    throw Error(ErrorKind::InvalidArgument, "support " + std::to_string(support.lo) + ".." +
                                                std::to_string(support.hi) + " outside " + m.name());
  }
}

}  // namespace detail

/// Volume-growth index used for the sharp constant: n for R^n, and the log-log slope
/// of |B_r| over the outer half of the support for warped surfaces.
inline double mu_effective(const RadialModel& m, const Interval& support) {
  if (m.kind() == RadialModel::Kind::EuclideanRadial) return m.dimension();
  const double R = std::max(std::abs(support.lo), std::abs(support.hi));
  std::vector<std::pair<double, double>> samples;
  for (double r : numerics::geometric_grid(0.5 * R, R, 8)) {
    samples.emplace_back(r, surface::volume_ball(m.profile(), r));
  }
  return numerics::fit_log_slope(samples).slope;
}

/// Discrete infimum of int u'^2 w / int u^2 w / rho_eps^2 over u vanishing on the
/// support boundary, with rho_eps = sqrt(rho^2 + eps^2). eps defaults to 1e-3 of
/// the support width.
inline HardyReport hardy_infimum(const RadialModel& m, const Interval& support, int cells = 8000,
                                 std::optional<double> epsilon = std::nullopt) {
  detail::check_support(m, support);
  const double mu = mu_effective(m, support);
  if (!(mu > 2.0)) {
    throw Error(ErrorKind::MeaninglessConstant,
                "sharp constant meaningless for mu <= 2 (mu = " + std::to_string(mu) + ")");
  }
  const double eps = epsilon.value_or(1e-3 * support.width());
  if (!(eps > 0) || !std::isfinite(eps)) throw Error(ErrorKind::InvalidArgument, "epsilon must be > 0");
  sturm::WeightedProblem problem{
      support, [&m](double x) { return m.weight(x); },
      [&m, eps](double x) { return m.weight(x) / (m.rho(x) * m.rho(x) + eps * eps); },
      detail::support_bc(m, support)};
  const auto mesh = detail::support_mesh(m, support, cells);
  auto sol = sturm::first_eigen_fem(problem, mesh);
  const double c = 0.5 * (mu - 2.0);
  return HardyReport{mu, sol.lambda, c * c, eps, mesh.nodes(), std::move(sol.eigenfunction)};
}

/// Quotient of the near-optimizer u = rho^{-(n-2)/2} f(log rho) on the annulus
/// (rho0, rho1) of R^n, f a trapezoid in log rho with ramps of length `ramp`. In the
/// variable t = log rho the quotient is ((n-2)/2)^2 + int f'^2 / int f^2; it is
/// evaluated here by direct quadrature of the original quotient.
inline double near_optimizer_quotient(int n, double rho0, double rho1, double ramp_fraction = 0.375) {
  if (n < 3) throw Error(ErrorKind::MeaninglessConstant, "near-optimizer needs n >= 3");
  if (!(rho0 > 0) || !(rho1 > rho0)) throw Error(ErrorKind::InvalidArgument, "annulus needs 0 < rho0 < rho1");
  const double a = 0.5 * (n - 2);
  const double t0 = std::log(rho0), t1 = std::log(rho1);
  const double ramp = ramp_fraction * (t1 - t0);
  auto f = [&](double t) { return std::clamp(std::min(t - t0, t1 - t) / ramp, 0.0, 1.0); };
  auto df = [&](double t) {
    if (t - t0 < ramp) return 1.0 / ramp;
    if (t1 - t < ramp) return -1.0 / ramp;
    return 0.0;
  };
  // u(rho) = rho^{-a} f(log rho),  u'(rho) = rho^{-a-1} (f' - a f)
  double num = 0.0, den = 0.0;
  const double cuts[] = {t0, t0 + ramp, t1 - ramp, t1};
  for (int i = 0; i < 3; ++i) {
    if (!(cuts[i + 1] > cuts[i])) continue;
    const Interval piece(cuts[i], cuts[i + 1]);
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    const double slope = df(mid);
    num += numerics::integrate(
        [&](double t) {
          const double rho = std::exp(t);
          const double du = std::pow(rho, -a - 1.0) * (slope - a * f(t));
          return du * du * std::pow(rho, n - 1) * rho;
        },
        piece, Tolerance(0.0, 1e-12));
    den += numerics::integrate(
        [&](double t) {
          const double rho = std::exp(t);
          const double u = std::pow(rho, -a) * f(t);
          return u * u * std::pow(rho, n - 3) * rho;
        },
        piece, Tolerance(0.0, 1e-12));
  }
  return num / den;
}

struct BallEigenReport {
  int n;
  double r;
  double lambda;
  double lambda_times_r2;
  double lambda_n;
  double relative_error;
  bool pass;  // relative_error <= 0.5%
};

/// Ball B(0, r) in R^n: lambda_1 r^2 = lambda_n.
inline BallEigenReport check_prop17(int n, double r, int cells = 4000) {
  if (n < 2 || n > 20) throw Error(ErrorKind::InvalidArgument, "check_prop17 needs 2 <= n <= 20");
  if (!(r > 0) || !std::isfinite(r)) throw Error(ErrorKind::InvalidArgument, "radius must be > 0");
  sturm::WeightedProblem problem{Interval(0.0, r), [n](double s) { return std::pow(s, n - 1); },
                                 std::nullopt, sturm::BoundaryCondition::natural_dirichlet()};
  const double grading = std::max(1.0, 2.0 / n);
  const auto sol = sturm::first_eigen_fem(problem, sturm::Mesh::graded(problem.interval, cells, grading));
  const double ln = special::lambda_mu(special::DimensionParam{static_cast<double>(n)}).lambda;
  const double scaled = sol.lambda * r * r;
  const double err = std::abs(scaled - ln) / ln;
  return BallEigenReport{n, r, sol.lambda, scaled, ln, err, err <= 5e-3};
}

struct CapacityValue {
  double r0;
  double R;  // may be +inf
  double value;
};

/// Area of the unit sphere S^{n-1}.
inline double sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / special::gamma_fn(0.5 * n);
}

/// Capacity of {rho <= r0} inside {rho < R} by the explicit radial minimizer:
/// each end contributes (area of the level set) / int dt / w.
inline CapacityValue capacity(const RadialModel& m, double r0, double R) {
  if (!(r0 > 0) || !(R > r0) || std::isnan(R)) {
    throw Error(ErrorKind::InvalidArgument, "capacity needs 0 < r0 < R");
  }
  if (m.kind() == RadialModel::Kind::EuclideanRadial) {
    const int n = m.dimension();
    double resistance;
    if (n == 2) {
      resistance = std::isinf(R) ? surface::kInf : std::log(R / r0);
    } else {
      const double tail = std::isinf(R) ? 0.0 : std::pow(R, 2.0 - n);
      resistance = (std::pow(r0, 2.0 - n) - tail) / (n - 2.0);
    }
    return {r0, R, sphere_area(n) / resistance};
  }
  const auto& p = m.profile();
  double total = 0.0;
  for (auto side : {surface::Side::Right, surface::Side::Left}) {
    double resistance;
    if (std::isinf(R)) {
      const auto tail = surface::h_tail(p, r0, side);
      resistance = tail ? *tail : surface::kInf;
    } else {
      resistance = side == surface::Side::Right ? surface::detail::inverse_slope_integral(p, r0, R)
                                                : surface::detail::inverse_slope_integral(p, -R, -r0);
    }
    total += 2.0 * std::numbers::pi / resistance;
  }
  return {r0, R, total};
}

/// Capacity by minimizing the discrete Dirichlet energy of P1 functions equal to 1
/// at r0 and 0 at R (Euclidean models only), as an independent check of the
/// closed form.
inline double capacity_discrete(const RadialModel& m, double r0, double R, int cells = 4000) {
  if (m.kind() != RadialModel::Kind::EuclideanRadial) {
    throw Error(ErrorKind::InvalidArgument, "discrete capacity is implemented for Euclidean models");
  }
  if (!(r0 > 0) || !(R > r0) || !std::isfinite(R)) {
    throw Error(ErrorKind::InvalidArgument, "discrete capacity needs 0 < r0 < R < inf");
  }
  // geometric nodes resolve the r^{2-n} profile uniformly
  const auto x = numerics::geometric_grid(r0, R, cells + 1);
  std::vector<double> k(cells);
  for (int c = 0; c < cells; ++c) {
    const double mid = 0.5 * (x[c] + x[c + 1]);
    k[c] = m.weight(mid) / (x[c + 1] - x[c]);
  }
  // interior nodes 1..cells-1: -k[c-1] u[c-1] + (k[c-1] + k[c]) u[c] - k[c] u[c+1] = 0
  const std::size_t n = static_cast<std::size_t>(cells - 1);
  std::vector<double> diag(n), rhs(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) diag[i] = k[i] + k[i + 1];
  rhs[0] = k[0];  // u(r0) = 1
  for (std::size_t i = 1; i < n; ++i) {
    const double l = -k[i] / diag[i - 1];
    diag[i] += l * k[i];
    rhs[i] -= l * rhs[i - 1];
  }
  std::vector<double> u(n);
  u[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) u[i] = (rhs[i] + k[i + 1] * u[i + 1]) / diag[i];
  double energy = 0.0;
  for (int c = 0; c < cells; ++c) {
    const double left = c == 0 ? 1.0 : u[c - 1];
    const double right = c == cells - 1 ? 0.0 : u[c];
    energy += k[c] * (right - left) * (right - left);
  }
  return sphere_area(m.dimension()) * energy;
}

struct HardyScanRow {
  Interval support;
  int cells;
  double infimum;
};

struct HardyScanReport {
  std::vector<HardyScanRow> rows;
  double lower_bound;  // min over rows
  bool positive;
  bool stable;  // each support's infimum moves < 1% between consecutive meshes
};

/// Non-sharp Hardy inequality C int u^2 w / (1 + rho^2) <= int u'^2 w over a
/// schedule of supports and mesh sizes.
inline HardyScanReport verify_hardy_scan(const RadialModel& m, const std::vector<Interval>& supports,
                                         const std::vector<int>& cell_counts) {
  if (supports.empty() || cell_counts.empty()) {
    throw Error(ErrorKind::InvalidArgument, "hardy scan needs supports and cell counts");
  }
  HardyScanReport rep{{}, surface::kInf, false, true};
  for (const auto& support : supports) {
    detail::check_support(m, support);
    sturm::WeightedProblem problem{support, [&m](double x) { return m.weight(x); },
                                   [&m](double x) { return m.weight(x) / (1.0 + m.rho(x) * m.rho(x)); },
                                   detail::support_bc(m, support)};
    double previous = 0.0;
    for (std::size_t i = 0; i < cell_counts.size(); ++i) {
      const int cells = cell_counts[i];
      const double inf = sturm::first_eigen_fem(problem, detail::support_mesh(m, support, cells)).lambda;
      rep.rows.push_back({support, cells, inf});
      rep.lower_bound = std::min(rep.lower_bound, inf);
      if (i > 0 && std::abs(inf - previous) > 0.01 * std::abs(previous)) rep.stable = false;
      previous = inf;
    }
  }
  rep.positive = rep.lower_bound > 0.0;
  rep.stable = rep.stable && rep.positive;
  return rep;
}

}  // namespace spectral_type::hardy
