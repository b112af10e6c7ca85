#pragma once

// First eigenpair of one-dimensional weighted Rayleigh quotients
//
//     min  int u'^2 w  /  int u^2 q        (q = w unless a potential weight is given)
//
// by conforming P1 finite elements (generalised tridiagonal pencil) and, as an
// independent route, by Pruefer-angle shooting.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "spectral_type/error.hpp"
#include "spectral_type/numerics.hpp"

namespace spectral_type::sturm {

using numerics::Interval;
using numerics::Tolerance;
using ScalarFn = std::function<double(double)>;

enum class Endpoint { Dirichlet, Natural };

struct BoundaryCondition {
  Endpoint lo;
  Endpoint hi;

  BoundaryCondition(Endpoint lo_, Endpoint hi_) : lo(lo_), hi(hi_) {
    if (lo == Endpoint::Natural && hi == Endpoint::Natural) {
      throw Error(ErrorKind::InvalidArgument,
                  "at least one endpoint must carry a Dirichlet condition");
    }
  }

  static BoundaryCondition dirichlet() { return {Endpoint::Dirichlet, Endpoint::Dirichlet}; }
  static BoundaryCondition natural_dirichlet() { return {Endpoint::Natural, Endpoint::Dirichlet}; }
};

struct WeightedProblem {
  Interval interval;
  ScalarFn weight;
  std::optional<ScalarFn> potential_weight;
  BoundaryCondition bc;

  double denominator_weight(double s) const {
    return potential_weight ? (*potential_weight)(s) : weight(s);
  }
};

class Mesh {
 public:
  explicit Mesh(std::vector<double> nodes, double grading = 1.0)
      : nodes_(std::move(nodes)), grading_(grading) {
    if (nodes_.size() < 18) {
      throw Error(ErrorKind::InvalidArgument, "mesh needs at least 16 interior nodes");
    }
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
      if (!(nodes_[i] > nodes_[i - 1])) {
        throw Error(ErrorKind::InvalidArgument, "mesh nodes must be strictly increasing");
      }
    }
  }

  static Mesh uniform(const Interval& iv, int cells) { return graded(iv, cells, 1.0); }

  /// Nodes lo + (hi - lo) (i / cells)^k, clustered at lo for k > 1.
  static Mesh graded(const Interval& iv, int cells, double k) {
    if (cells < 17) throw Error(ErrorKind::InvalidArgument, "mesh needs at least 17 cells");
    if (!(k >= 1.0)) throw Error(ErrorKind::InvalidArgument, "grading exponent must be >= 1");
    std::vector<double> nodes(static_cast<std::size_t>(cells) + 1);
    for (int i = 0; i <= cells; ++i) {
      nodes[static_cast<std::size_t>(i)] =
          iv.lo + iv.width() * std::pow(static_cast<double>(i) / cells, k);
    }
    nodes.back() = iv.hi;
    return Mesh(std::move(nodes), k);
  }

  const std::vector<double>& nodes() const { return nodes_; }
  std::size_t cells() const { return nodes_.size() - 1; }
  double grading() const { return grading_; }
  double max_width() const {
    double m = 0;
    for (std::size_t i = 1; i < nodes_.size(); ++i) m = std::max(m, nodes_[i] - nodes_[i - 1]);
    return m;
  }

 private:
  std::vector<double> nodes_;
  double grading_;
};

struct EigenSolution {
  double lambda;
  std::vector<double> eigenfunction;  // per mesh node, >= 0, int u^2 q = 1
  double residual;
  Mesh mesh;
  int iterations = 0;
};

namespace detail {

/// Per-cell coefficients of the discrete pencil, with both weights divided by
/// their maxima. Cell c couples nodes c and c+1:
///   stiffness  stiff[c] * [[1, -1], [-1, 1]]
///   mass       mass[c]  * [[1/3, 1/6], [1/6, 1/3]]
struct Pencil {
  std::vector<double> stiff;
  std::vector<double> mass;
  double w_scale = 1.0;
  double q_scale = 1.0;
  std::size_t first = 0;  // first free node
  std::size_t last = 0;   // last free node (inclusive)

  std::size_t free_count() const { return last - first + 1; }

  double energy(const std::vector<double>& u) const {
    double e = 0.0;
    for (std::size_t c = 0; c < stiff.size(); ++c) {
      const double d = u[c + 1] - u[c];
      e += stiff[c] * d * d;
    }
    return e;
  }

  double mass_form(const std::vector<double>& u) const {
    double m = 0.0;
    for (std::size_t c = 0; c < mass.size(); ++c) {
      m += mass[c] * (u[c] * u[c] + u[c] * u[c + 1] + u[c + 1] * u[c + 1]) / 3.0;
    }
    return m;
  }

  double a_diag(std::size_t i) const {
    double v = 0.0;
    if (i > 0) v += stiff[i - 1];
    if (i < stiff.size()) v += stiff[i];
    return v;
  }
  double b_diag(std::size_t i) const {
    double v = 0.0;
    if (i > 0) v += mass[i - 1];
    if (i < mass.size()) v += mass[i];
    return v / 3.0;
  }
  // couplings between node i and i+1
  double a_off(std::size_t i) const { return -stiff[i]; }
  double b_off(std::size_t i) const { return mass[i] / 6.0; }

  /// LDL^T pivots of A - sigma B restricted to the free nodes.
  ///
  /// Each pivot is split as d_k = stiff[k] + r_k and the recursion is carried on
  /// r_k, which avoids the cancellation stiff + stiff' - stiff^2 / d that wipes out
  /// the pivots when neighbouring cells differ in stiffness by many orders of
  /// magnitude (graded meshes against singular weights).
  std::vector<double> pivots(double sigma) const {
    std::vector<double> d(free_count());
    double r = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
      const std::size_t i = first + k;
      const double own = i < stiff.size() ? stiff[i] : 0.0;
      if (k == 0) {
        r = (i > 0 ? stiff[i - 1] : 0.0) - sigma * b_diag(i);
      } else {
        const double s = stiff[i - 1];
        const double beta = sigma * mass[i - 1] / 6.0;
        r = -sigma * b_diag(i) + (s * (r - 2.0 * beta) - beta * beta) / d[k - 1];
      }
      double diag = own + r;
      if (diag == 0.0) diag = 1e-300;
      d[k] = diag;
    }
    return d;
  }

  /// Number of eigenvalues of the pencil below sigma (Sylvester inertia).
  std::size_t count_below(double sigma) const {
    std::size_t n = 0;
    for (double p : pivots(sigma)) n += (p < 0.0);
    return n;
  }

  /// Solves (A - sigma B) x = B u on the free nodes; Dirichlet entries stay zero.
  std::vector<double> shifted_solve(double sigma, const std::vector<double>& u) const {
    const std::size_t n = free_count();
    std::vector<double> rhs(n);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = first + k;
      double v = b_diag(i) * u[i];
      if (i > 0) v += b_off(i - 1) * u[i - 1];
      if (i + 1 < u.size()) v += b_off(i) * u[i + 1];
      rhs[k] = v;
    }
    const auto d = pivots(sigma);
    // forward: L y = rhs, with L(k, k-1) = off / d[k-1]
    for (std::size_t k = 1; k < n; ++k) {
      const std::size_t i = first + k;
      const double off = a_off(i - 1) - sigma * b_off(i - 1);
      rhs[k] -= off / d[k - 1] * rhs[k - 1];
    }
    for (std::size_t k = 0; k < n; ++k) rhs[k] /= d[k];
    for (std::size_t k = n - 1; k-- > 0;) {
      const std::size_t i = first + k;
      const double off = a_off(i) - sigma * b_off(i);
      rhs[k] -= off / d[k] * rhs[k + 1];
    }
    std::vector<double> x(u.size(), 0.0);
    for (std::size_t k = 0; k < n; ++k) x[first + k] = rhs[k];
    return x;
  }

  /// ||A u - lambda B u|| / ||B u|| over the free nodes.
  double residual(const std::vector<double>& u, double lambda) const {
    double rn = 0.0, bn = 0.0;
    for (std::size_t i = first; i <= last; ++i) {
      double au = a_diag(i) * u[i];
      double bu = b_diag(i) * u[i];
      if (i > 0) {
        au += a_off(i - 1) * u[i - 1];
        bu += b_off(i - 1) * u[i - 1];
      }
      if (i + 1 < u.size()) {
        au += a_off(i) * u[i + 1];
        bu += b_off(i) * u[i + 1];
      }
      rn += (au - lambda * bu) * (au - lambda * bu);
      bn += bu * bu;
    }
    return std::sqrt(rn / bn);
  }
};

inline Pencil assemble(const WeightedProblem& p, const Mesh& m) {
  const auto& x = m.nodes();
  if (std::abs(x.front() - p.interval.lo) > 1e-12 * p.interval.width() ||
      std::abs(x.back() - p.interval.hi) > 1e-12 * p.interval.width()) {
    throw Error(ErrorKind::InvalidArgument, "mesh does not span the problem interval");
  }
  const std::size_t cells = m.cells();
  Pencil pen;
  pen.stiff.resize(cells);
  pen.mass.resize(cells);
  std::vector<double> w(cells), q(cells);
  double wmax = 0.0, qmax = 0.0;
  for (std::size_t c = 0; c < cells; ++c) {
    const double mid = 0.5 * (x[c] + x[c + 1]);
    w[c] = p.weight(mid);
    q[c] = p.denominator_weight(mid);
    if (!(w[c] > 0.0) || !std::isfinite(w[c]) || !(q[c] > 0.0) || !std::isfinite(q[c])) {
      throw Error(ErrorKind::SingularMass,
                  "weight not positive and finite on the cell at " + std::to_string(mid));
    }
    wmax = std::max(wmax, w[c]);
    qmax = std::max(qmax, q[c]);
  }
  for (std::size_t c = 0; c < cells; ++c) {
    const double h = x[c + 1] - x[c];
    pen.stiff[c] = (w[c] / wmax) / h;
    pen.mass[c] = (q[c] / qmax) * h;
  }
  pen.w_scale = wmax;
  pen.q_scale = qmax;
  pen.first = p.bc.lo == Endpoint::Dirichlet ? 1 : 0;
  pen.last = p.bc.hi == Endpoint::Dirichlet ? cells - 1 : cells;
  return pen;
}

inline std::size_t interior_sign_changes(const std::vector<double>& u) {
  double scale = 0.0;
  for (double v : u) scale = std::max(scale, std::abs(v));
  const double floor = 1e-10 * scale;
  int last_sign = 0;
  std::size_t changes = 0;
  for (double v : u) {
    if (std::abs(v) <= floor) continue;
    const int s = v > 0 ? 1 : -1;
    if (last_sign != 0 && s != last_sign) ++changes;
    last_sign = s;
  }
  return changes;
}

}  // namespace detail

/// Discrete Rayleigh quotient of a piecewise-linear u (values at mesh nodes), using
/// the same per-cell quadrature as the finite-element pencil.
inline double rayleigh_quotient(const std::vector<double>& u, const WeightedProblem& p,
                                const Mesh& m) {
  if (u.size() != m.nodes().size()) {
    throw Error(ErrorKind::InvalidArgument, "vector length does not match mesh");
  }
  const auto pen = detail::assemble(p, m);
  double scale = 0.0;
  for (double v : u) scale = std::max(scale, std::abs(v));
  const double slack = 1e-12 * scale;
  if ((p.bc.lo == Endpoint::Dirichlet && std::abs(u.front()) > slack) ||
      (p.bc.hi == Endpoint::Dirichlet && std::abs(u.back()) > slack)) {
    throw Error(ErrorKind::InvalidArgument, "test function violates a Dirichlet condition");
  }
  const double den = pen.mass_form(u);
  if (!(den > 0.0)) throw Error(ErrorKind::ZeroDenominator, "test function is identically zero");
  return pen.energy(u) / den * (pen.w_scale / pen.q_scale);
}

/// Smallest eigenpair of the P1 Galerkin pencil A u = lambda B u.
///
/// A shift just below lambda_1 is located by bisection on the Sylvester inertia of
/// A - sigma B; inverse iteration with that shift then converges in a handful of
/// steps even when lambda_2 / lambda_1 is close to one. The eigenvalue is the
/// Rayleigh quotient, evaluated cell by cell so that tiny eigenvalues do not
/// suffer cancellation.
inline EigenSolution first_eigen_fem(const WeightedProblem& p, const Mesh& m) {
  const auto pen = detail::assemble(p, m);
  const std::size_t nodes = m.nodes().size();

  std::vector<double> u(nodes, 0.0);
  for (std::size_t i = pen.first; i <= pen.last; ++i) u[i] = 1.0;

  double hi = pen.energy(u) / pen.mass_form(u);
  hi = hi * (1.0 + 1e-9) + 1e-300;
  for (int k = 0; pen.count_below(hi) == 0; ++k) {
    if (k > 60) throw Error(ErrorKind::NoConvergence, "could not bracket the first eigenvalue");
    hi *= 2.0;
  }
  double lo = hi;
  for (int k = 0;; ++k) {
    if (k > 3000) throw Error(ErrorKind::NoConvergence, "eigenvalue lower bracket failed");
    lo *= 0.5;
    if (pen.count_below(lo) == 0) break;
    hi = lo;
  }
  for (int k = 0; k < 200 && hi / lo > 1.0 + 1e-7; ++k) {
    const double mid = std::sqrt(lo * hi);
    if (pen.count_below(mid) == 0) lo = mid;
    else hi = mid;
  }

  double lambda = pen.energy(u) / pen.mass_form(u);
  int iterations = 0;
  bool converged = false;
  for (; iterations < 200; ++iterations) {
    u = pen.shifted_solve(lo, u);
    const double norm = std::sqrt(pen.mass_form(u));
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw Error(ErrorKind::NoConvergence, "inverse iteration produced a degenerate vector");
    }
    for (double& v : u) v /= norm;
    const double next = pen.energy(u) / pen.mass_form(u);
    const bool small_step = std::abs(next - lambda) <= 1e-12 * next;
    lambda = next;
    if (small_step && iterations > 0) {
      converged = true;
      ++iterations;
      break;
    }
  }
  if (!converged) throw Error(ErrorKind::NoConvergence, "inverse iteration hit its cap");

  double sum = 0.0;
  for (double v : u) sum += v;
  if (sum < 0.0) {
    for (double& v : u) v = -v;
  }
  if (detail::interior_sign_changes(u) != 0) {
    throw Error(ErrorKind::NoConvergence, "converged vector is not a first eigenfunction");
  }
  const double residual = pen.residual(u, lambda);
  const double norm = std::sqrt(pen.mass_form(u) * pen.q_scale);
  for (double& v : u) v = std::max(0.0, v / norm);

  return EigenSolution{lambda * pen.w_scale / pen.q_scale, std::move(u), residual, m, iterations};
}

// ---------------------------------------------------------------------------
// Shooting
// ---------------------------------------------------------------------------

namespace detail {

struct PruferState {
  double theta;
  double log_r;
};

/// Dormand-Prince 5(4) integration of the Pruefer system (u = R sin(theta),
/// w u' = R cos(theta))
///   theta' = cos^2(theta) / w + lambda q sin^2(theta)
///   (log R)' = (1 / w - lambda q) sin(theta) cos(theta)
/// in the variable u with s = lo + (hi - lo) u^k, between u0 and u1, recording the
/// accepted steps (as s values) when asked to.
inline PruferState integrate_prufer(const WeightedProblem& p, double lambda, double u0, double u1,
                                    double k, PruferState y, const Tolerance& tol,
                                    std::vector<std::pair<double, PruferState>>* trace) {
  const double lo = p.interval.lo;
  const double span = p.interval.width();
  auto to_s = [&](double u) { return lo + span * std::pow(u, k); };
  auto rhs = [&](double u, const PruferState& st) {
    const double s = to_s(u);
    const double ds = span * k * std::pow(u, k - 1.0);
    const double w = p.weight(s);
    const double q = p.denominator_weight(s);
    // st.theta holds the Pruefer angle minus pi/2, so that cos(angle) is exact
    // near the natural start where it is divided by a vanishing weight
    const double c = -std::sin(st.theta);
    const double sn = std::cos(st.theta);
    return PruferState{ds * (c * c / w + lambda * q * sn * sn), ds * (1.0 / w - lambda * q) * sn * c};
  };
  auto axpy = [](const PruferState& a, double h, std::initializer_list<std::pair<double, PruferState>> ks) {
    PruferState out = a;
    for (const auto& [c, k] : ks) {
      out.theta += h * c * k.theta;
      out.log_r += h * c * k.log_r;
    }
    return out;
  };
  const double width = u1 - u0;
  const double hmax = width / 64.0;
  double h = std::min(hmax, width * 1e-4);
  double s = u0;
  if (trace) trace->push_back({to_s(s), y});
  while (s < u1) {
    const bool last = s + h >= u1 - 1e-12 * width;
    if (last) h = u1 - s;
    const auto k1 = rhs(s, y);
    const auto k2 = rhs(s + h / 5, axpy(y, h, {{1.0 / 5, k1}}));
    const auto k3 = rhs(s + 3 * h / 10, axpy(y, h, {{3.0 / 40, k1}, {9.0 / 40, k2}}));
    const auto k4 = rhs(s + 4 * h / 5, axpy(y, h, {{44.0 / 45, k1}, {-56.0 / 15, k2}, {32.0 / 9, k3}}));
    const auto k5 = rhs(s + 8 * h / 9, axpy(y, h, {{19372.0 / 6561, k1}, {-25360.0 / 2187, k2},
                                                  {64448.0 / 6561, k3}, {-212.0 / 729, k4}}));
    const auto k6 = rhs(s + h, axpy(y, h, {{9017.0 / 3168, k1}, {-355.0 / 33, k2},
                                          {46732.0 / 5247, k3}, {49.0 / 176, k4},
                                          {-5103.0 / 18656, k5}}));
    const auto y5 = axpy(y, h, {{35.0 / 384, k1}, {500.0 / 1113, k3}, {125.0 / 192, k4},
                                {-2187.0 / 6784, k5}, {11.0 / 84, k6}});
    const auto k7 = rhs(s + h, y5);
    const auto y4 = axpy(y, h, {{5179.0 / 57600, k1}, {7571.0 / 16695, k3}, {393.0 / 640, k4},
                                {-92097.0 / 339200, k5}, {187.0 / 2100, k6}, {1.0 / 40, k7}});
    const double err = std::abs(y5.theta - y4.theta);
    const double scale = tol.abs + tol.rel * std::abs(y5.theta);
    if (!std::isfinite(err)) {
      throw Error(ErrorKind::StiffnessFailure, "non-finite Pruefer step at s=" + std::to_string(s));
    }
    const double factor = err > 0 ? 0.9 * std::pow(scale / err, 0.2) : 5.0;
    if (err <= scale) {
      s = last ? u1 : s + h;
      y = y5;
      if (trace) trace->push_back({to_s(s), y});
    } else if (h < 1e-14 * width) {
      throw Error(ErrorKind::StiffnessFailure,
                  "step size underflow at s=" + std::to_string(to_s(s)));
    }
    h = std::min(hmax, h * std::clamp(factor, 0.2, 5.0));
  }
  return y;
}

}  // namespace detail

/// First eigenvalue by shooting on (w u')' + lambda q u = 0 in Pruefer form. The
/// angle at the far end is monotone in lambda and the first eigenvalue is where it
/// first reaches its boundary value (pi for Dirichlet, pi/2 for natural). Weights
/// singular or degenerate at lo call for grading k > 1 (s - lo ~ u^k).
inline EigenSolution first_eigen_shoot(const WeightedProblem& p, const Tolerance& tol = {},
                                       double grading = 1.0) {
  if (!(grading >= 1.0)) throw Error(ErrorKind::InvalidArgument, "grading exponent must be >= 1");
  const double width = p.interval.width();
  const double offset = 1e-9 * width;
  const Tolerance ode_tol(std::max(tol.abs, 1e-14), std::max(tol.rel, 1e-13));
  const double s0 = p.interval.lo + offset;
  // a Dirichlet start is exact at lo; a natural one sits just inside it
  const double u0 = p.bc.lo == Endpoint::Dirichlet ? 0.0 : std::pow(1e-9, 1.0 / grading);
  const double u1 = p.bc.hi == Endpoint::Dirichlet ? 1.0 : 1.0 - 1e-9;
  // angles below are shifted by -pi/2
  const double target = p.bc.hi == Endpoint::Dirichlet ? 0.5 * std::numbers::pi : 0.0;

  // mass of q on (lo, s0): fixes the regular solution's angle just inside lo
  const double q_head = numerics::integrate([&](double s) { return p.denominator_weight(s); },
                                            Interval(p.interval.lo, s0), Tolerance(0.0, 1e-10), 4.0);
  auto start = [&](double lambda) {
    if (p.bc.lo == Endpoint::Dirichlet) return detail::PruferState{-0.5 * std::numbers::pi, 0.0};
    return detail::PruferState{std::atan(lambda * q_head), 0.0};
  };
  auto mismatch = [&](double lambda) {
    return detail::integrate_prufer(p, lambda, u0, u1, grading, start(lambda), ode_tol, nullptr).theta - target;
  };

  double hi = 1.0;
  for (int k = 0; mismatch(hi) <= 0.0; ++k) {
    if (k > 200) throw Error(ErrorKind::NoConvergence, "shooting could not bracket lambda");
    hi *= 2.0;
  }
  const double lambda = numerics::find_root(mismatch, Interval(0.0, hi),
                                            Tolerance(1e-300, std::max(tol.rel, 1e-13)));

  std::vector<std::pair<double, detail::PruferState>> trace;
  const auto end = detail::integrate_prufer(p, lambda, u0, u1, grading, start(lambda), ode_tol, &trace);
  std::vector<double> nodes;
  std::vector<double> values;
  nodes.push_back(p.interval.lo);
  values.push_back(p.bc.lo == Endpoint::Dirichlet ? 0.0 : std::exp(trace.front().second.log_r));
  for (const auto& [s, st] : trace) {
    if (s <= nodes.back()) continue;
    nodes.push_back(s);
    values.push_back(std::exp(st.log_r) * std::cos(st.theta));
  }
  if (nodes.back() < p.interval.hi) {
    nodes.push_back(p.interval.hi);
    values.push_back(p.bc.hi == Endpoint::Dirichlet ? 0.0 : values.back());
  } else if (p.bc.hi == Endpoint::Dirichlet) {
    values.back() = 0.0;
  }
  double norm = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double mid = 0.5 * (nodes[i] + nodes[i - 1]);
    const double um = 0.5 * (values[i] + values[i - 1]);
    norm += um * um * p.denominator_weight(mid) * (nodes[i] - nodes[i - 1]);
  }
  norm = std::sqrt(norm);
  for (double& v : values) v = std::max(0.0, v / norm);
  Mesh mesh(std::move(nodes));
  return EigenSolution{lambda, std::move(values), std::abs(end.theta - target), std::move(mesh), 0};
}

}  // namespace spectral_type::sturm
