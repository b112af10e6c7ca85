#pragma once

// Shared numerical kernels: adaptive Simpson quadrature with optional endpoint
// grading, a bracketing root finder and least-squares slope fits.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spectral_type/error.hpp"

namespace spectral_type::numerics {

struct Interval {
  double lo;
  double hi;

  Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
      throw Error(ErrorKind::InvalidArgument,
                  "interval requires finite lo < hi, got (" + std::to_string(lo) + ", " +
                      std::to_string(hi) + ")");
    }
  }

  double width() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

struct Tolerance {
  double abs = 1e-12;
  double rel = 1e-12;
  int max_depth = 50;

  Tolerance() = default;
  Tolerance(double abs_, double rel_, int max_depth_ = 50)
      : abs(abs_), rel(rel_), max_depth(max_depth_) {
    if (abs < 0 || rel < 0 || !(abs + rel > 0) || max_depth <= 0) {
      throw Error(ErrorKind::InvalidArgument, "tolerance needs abs, rel >= 0, abs + rel > 0");
    }
  }
};

struct SlopeFit {
  double slope;
  double intercept;
  double max_abs_residual;
  Interval window;
};

namespace detail {

template <class G>
double simpson_adapt(G& g, double a, double fa, double m, double fm, double b, double fb,
                     double whole, double eps, int depth, int max_depth, bool& failed) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = g(lm);
  const double frm = g(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double refined = left + right;
  const double delta = refined - whole;
  const double roundoff = 64.0 * std::numeric_limits<double>::epsilon() *
                          (std::abs(left) + std::abs(right));
  if (std::abs(delta) <= 15.0 * eps || std::abs(delta) <= roundoff || lm <= a || rm >= b) {
    return refined + delta / 15.0;
  }
  if (depth >= max_depth) {
    failed = true;
    return refined + delta / 15.0;
  }
  return simpson_adapt(g, a, fa, lm, flm, m, fm, left, 0.5 * eps, depth + 1, max_depth, failed) +
         simpson_adapt(g, m, fm, rm, frm, b, fb, right, 0.5 * eps, depth + 1, max_depth, failed);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over iv with a Richardson-corrected panel rule.
///
/// With grading k > 1 the integral is evaluated in the variable u where
/// s = lo + (hi - lo) u^k, which tames integrable endpoint singularities at lo.
/// f is never evaluated exactly at lo in that case: the u = 0 sample takes the
/// value at u = 2^-64 (0 if that still rounds to lo), so k must be large enough
/// that f(s) ds/du stays bounded as u -> 0.
/// Throws NonConvergence past max_depth or after 2^23 integrand evaluations.
template <class F>
double integrate(F&& f, const Interval& iv, const Tolerance& tol = {}, double grading = 1.0) {
  if (!(grading >= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "grading exponent must be >= 1");
  }
  const double width = iv.width();
  // an unreachable tolerance (noisy integrand) must fail rather than recurse forever
  constexpr long kMaxEvaluations = 1L << 23;
  long evaluations = 0;
  auto g = [&](double u) -> double {
    if (++evaluations > kMaxEvaluations) {
      throw Error(ErrorKind::NonConvergence, "adaptive quadrature exceeded its evaluation budget");
    }
    double value;
    if (grading == 1.0) {
      value = f(iv.lo + width * u) * width;
    } else {
      if (u <= 0.0) u = 0x1p-64;
      const double s = iv.lo + width * std::pow(u, grading);
      if (s == iv.lo) return 0.0;
      value = f(s) * grading * std::pow(u, grading - 1.0) * width;
    }
    if (!std::isfinite(value)) {
      throw Error(ErrorKind::NonFinite, "integrand is not finite at u=" + std::to_string(u));
    }
    return value;
  };

  constexpr int kPanels = 4;
  double nodes[2 * kPanels + 1];
  double values[2 * kPanels + 1];
  for (int i = 0; i <= 2 * kPanels; ++i) {
    nodes[i] = static_cast<double>(i) / (2 * kPanels);
    values[i] = g(nodes[i]);
  }
  double wholes[kPanels];
  double coarse = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    const int i = 2 * p;
    wholes[p] = (nodes[i + 2] - nodes[i]) / 6.0 * (values[i] + 4.0 * values[i + 1] + values[i + 2]);
    coarse += wholes[p];
  }
  const double target = std::max(tol.abs, tol.rel * std::abs(coarse));
  bool failed = false;
  double total = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    const int i = 2 * p;
    total += detail::simpson_adapt(g, nodes[i], values[i], nodes[i + 1], values[i + 1], nodes[i + 2],
                                   values[i + 2], wholes[p], target / kPanels, 1, tol.max_depth,
                                   failed);
  }
  if (failed) {
    throw Error(ErrorKind::NonConvergence,
                "adaptive quadrature reached max depth " + std::to_string(tol.max_depth));
  }
  return total;
}

/// Bracketed root of f: secant steps that never leave the bracket, with a forced
/// bisection whenever a step fails to halve the bracket. Terminates once the
/// bracket is narrower than tol.abs (or tol.rel relative to the root).
template <class F>
double find_root(F&& f, const Interval& bracket, const Tolerance& tol = {}) {
  double a = bracket.lo;
  double b = bracket.hi;
  double fa = f(a);
  double fb = f(b);
  if (!std::isfinite(fa) || !std::isfinite(fb)) {
    throw Error(ErrorKind::NonFinite, "root function not finite at bracket endpoints");
  }
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0) == (fb > 0)) {
    throw Error(ErrorKind::InvalidBracket, "f has the same sign at both ends of [" +
                                               std::to_string(a) + ", " + std::to_string(b) + "]");
  }
  auto target = [&] {
    return std::max(tol.abs, tol.rel * std::min(std::abs(a), std::abs(b)));
  };
  bool force_bisect = false;
  for (int iter = 0; iter < 400; ++iter) {
    const double w = b - a;
    const double t = target();
    if (w <= t) break;
    double x = b - fb * (b - a) / (fb - fa);
    if (force_bisect || !(x > a && x < b)) {
      x = 0.5 * (a + b);
    } else {
      const double margin = 0.5 * t;
      x = std::clamp(x, a + margin, b - margin);
    }
    if (x <= a || x >= b) break;  // bracket is at floating-point resolution
    const double fx = f(x);
    if (!std::isfinite(fx)) {
      throw Error(ErrorKind::NonFinite, "root function not finite at x=" + std::to_string(x));
    }
    if (fx == 0.0) return x;
    if ((fx > 0) == (fa > 0)) {
      a = x;
      fa = fx;
    } else {
      b = x;
      fb = fx;
    }
    force_bisect = (b - a) > 0.5 * w;
  }
  return std::abs(fa) < std::abs(fb) ? a : b;
}

/// Ordinary least-squares line y = slope * x + intercept.
inline SlopeFit fit_line(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw Error(ErrorKind::InvalidArgument, "fit_line: x and y sizes differ");
  }
  if (xs.size() < 3) {
    throw Error(ErrorKind::InsufficientSamples, "need at least 3 samples, got " +
                                                    std::to_string(xs.size()));
  }
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) {
      throw Error(ErrorKind::InvalidArgument, "sample abscissae must be strictly increasing");
    }
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double worst = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    worst = std::max(worst, std::abs(ys[i] - (slope * xs[i] + intercept)));
  }
  return SlopeFit{slope, intercept, worst, Interval(xs.front(), xs.back())};
}

/// Least-squares slope of log y against log x. The window is reported in the
/// original x units.
inline SlopeFit fit_log_slope(std::span<const std::pair<double, double>> samples) {
  if (samples.size() < 3) {
    throw Error(ErrorKind::InsufficientSamples, "need at least 3 samples, got " +
                                                    std::to_string(samples.size()));
  }
  std::vector<double> lx, ly;
  lx.reserve(samples.size());
  ly.reserve(samples.size());
  for (const auto& [x, y] : samples) {
    if (!(x > 0) || !(y > 0)) {
      throw Error(ErrorKind::InvalidArgument, "log-slope samples must be positive");
    }
    lx.push_back(std::log(x));
    ly.push_back(std::log(y));
  }
  SlopeFit fit = fit_line(lx, ly);
  fit.window = Interval(samples.front().first, samples.back().first);
  return fit;
}

/// Geometrically spaced grid of `count` points from lo to hi inclusive.
inline std::vector<double> geometric_grid(double lo, double hi, int count) {
  if (!(lo > 0) || !(hi > lo) || count < 2) {
    throw Error(ErrorKind::InvalidArgument, "geometric grid needs 0 < lo < hi and count >= 2");
  }
  std::vector<double> out(static_cast<std::size_t>(count));
  const double step = std::log(hi / lo) / (count - 1);
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
  out.back() = hi;
  return out;
}

}  // namespace spectral_type::numerics
