#pragma once

// Bessel functions of the first kind for real order nu > -1, their first
// positive zeros, the eigenvalue constants lambda_mu = j_{mu/2-1}^2 and the
// extremal radial profiles built from them.

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <string>
#include <vector>

#include "spectral_type/error.hpp"
#include "spectral_type/numerics.hpp"

namespace spectral_type::special {

inline constexpr double kMaxOrder = 120.0;
inline constexpr double kMaxArgument = 500.0;
inline constexpr double kMaxMu = 240.0;

// ---------------------------------------------------------------------------
// Gamma function (Lanczos, g = 7, nine terms)
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr double kLanczosG = 7.0;
inline constexpr double kLanczos[9] = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

inline double lanczos_sum(double x) {
  double a = kLanczos[0];
  for (int i = 1; i < 9; ++i) a += kLanczos[i] / (x + i);
  return a;
}

}  // namespace detail

/// log Gamma(x) for x > 0.
inline double log_gamma(double x) {
  if (!(x > 0)) throw Error(ErrorKind::OutOfSupportedRange, "log_gamma needs x > 0");
  if (x < 0.5) {
    // reflection keeps the Lanczos sum in its accurate range
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
  }
  const double xm = x - 1.0;
  const double t = xm + detail::kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (xm + 0.5) * std::log(t) - t +
         std::log(detail::lanczos_sum(xm));
}

/// Gamma(x) for real x that is not a non-positive integer.
inline double gamma_fn(double x) {
  if (x < 0.5) {
    if (x == std::floor(x)) throw Error(ErrorKind::OutOfSupportedRange, "gamma pole");
    return std::numbers::pi / (std::sin(std::numbers::pi * x) * gamma_fn(1.0 - x));
  }
  const double xm = x - 1.0;
  const double t = xm + detail::kLanczosG + 0.5;
  // t^{xm+1/2} split in two halves so it does not overflow before exp(-t) is applied
  const double half_power = std::pow(t, 0.5 * (xm + 0.5));
  return std::sqrt(2.0 * std::numbers::pi) * half_power * (half_power * std::exp(-t)) *
         detail::lanczos_sum(xm);
}

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

struct BesselOrder {
  double nu;
  explicit BesselOrder(double nu_) : nu(nu_) {
    if (!(nu > -1.0) || !std::isfinite(nu)) {
      throw Error(ErrorKind::OutOfSupportedRange, "Bessel order must exceed -1, got " +
                                                      std::to_string(nu));
    }
  }
};

struct DimensionParam {
  double mu;
  explicit DimensionParam(double mu_) : mu(mu_) {
    if (!(mu > 0.0) || !std::isfinite(mu)) {
      throw Error(ErrorKind::OutOfSupportedRange, "mu must be positive, got " +
                                                      std::to_string(mu));
    }
  }
  double order() const { return 0.5 * mu - 1.0; }
};

struct EigenConstant {
  DimensionParam mu;
  double j;       // first positive zero of J_{mu/2-1}
  double lambda;  // j * j
};

// ---------------------------------------------------------------------------
// J_nu evaluation
// ---------------------------------------------------------------------------

namespace detail {

/// Neumaier-compensated accumulator.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      carry += (sum - t) + x;
    } else {
      carry += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

/// The power series has no cancellation worth worrying about here.
inline bool series_regime(double nu, double t) { return t <= 5.0 || t * t <= 8.0 * (nu + 1.0); }

/// sum_m (-1)^m / (m! Gamma(m+nu+1)) x^{2m}, normalised so the leading term is 1/Gamma(nu+1)
/// times `lead`. Returns lead * sum_m (-1)^m Gamma(nu+1) / (m! Gamma(m+nu+1)) x^{2m}.
inline double even_series(double nu, double x, double lead) {
  CompensatedSum acc;
  double term = 1.0;
  acc.add(term);
  const double q = -x * x;
  for (int m = 1; m < 1000; ++m) {
    term *= q / (m * (m + nu));
    acc.add(term);
    if (std::abs(term) <= 1e-18 * std::abs(acc.value())) break;
  }
  return lead * acc.value();
}

inline double series_j(double nu, double t) {
  if (t == 0.0) {
    if (nu == 0.0) return 1.0;
    return nu > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  const double half = 0.5 * t;
  const double lead = std::exp(nu * std::log(half) - log_gamma(nu + 1.0));
  return even_series(nu, half, lead);
}

/// Hankel asymptotic expansion, used only as a normalisation for |v| < 2, t >= 25.
inline double hankel_j(double v, double t) {
  const double mu4 = 4.0 * v * v;
  double p = 1.0;
  double q = 0.0;
  double term = 1.0;
  double last = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 80; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = term * (mu4 - odd * odd) / (k * 8.0 * t);
    if (std::abs(next) > last) break;  // asymptotic series started diverging
    term = next;
    last = std::abs(term);
    // term = a_k(v) / t^k; signs alternate in pairs
    const int r = k % 4;
    if (r == 1) q += term;
    else if (r == 2) p -= term;
    else if (r == 3) q -= term;
    else p += term;
    if (last < 1e-18) break;
  }
  const double omega = t - (0.5 * v + 0.25) * std::numbers::pi;
  return std::sqrt(2.0 / (std::numbers::pi * t)) * (p * std::cos(omega) - q * std::sin(omega));
}

/// Miller backward recurrence over the orders nu0 + k, nu0 = nu - floor(nu) (or nu
/// itself when negative), normalised either by the Neumann sum
/// (t/2)^nu0 / Gamma(nu0+1) = sum_k (nu0+2k) Gamma(nu0+k) / (k! Gamma(nu0+1)) J_{nu0+2k}(t)
/// or, for large t, by a least-squares match against Hankel values at nu0 and nu0+1.
inline double miller_j(double nu, double t) {
  const double nu0 = nu >= 0.0 ? nu - std::floor(nu) : nu;
  const int target = static_cast<int>(std::lround(nu - nu0));
  const double top = std::max(t, nu);
  int n = static_cast<int>(std::ceil(top + 30.0 + 12.0 * std::cbrt(top)));
  n = std::max(n, target + 4);
  if (n % 2) ++n;

  std::vector<double> f(static_cast<std::size_t>(n) + 2, 0.0);
  f[static_cast<std::size_t>(n)] = 1.0;
  for (int k = n; k >= 1; --k) {
    const auto ku = static_cast<std::size_t>(k);
    f[ku - 1] = 2.0 * (nu0 + k) / t * f[ku] - f[ku + 1];
    if (std::abs(f[ku - 1]) > 1e250) {
      for (std::size_t i = ku - 1; i < f.size(); ++i) f[i] *= 1e-250;
    }
  }

  double scale;
  if (t >= 25.0) {
    const double j0 = hankel_j(nu0, t);
    const double j1 = hankel_j(nu0 + 1.0, t);
    scale = (f[0] * j0 + f[1] * j1) / (f[0] * f[0] + f[1] * f[1]);
  } else {
    CompensatedSum s;
    s.add(f[0]);
    double d = 1.0;
    for (int k = 1; 2 * k <= n; ++k) {
      if (k > 1) d *= (nu0 + k - 1.0) / k;
      s.add((nu0 + 2.0 * k) * d * f[static_cast<std::size_t>(2 * k)]);
    }
    const double lhs = std::exp(nu0 * std::log(0.5 * t) - log_gamma(nu0 + 1.0));
    scale = lhs / s.value();
  }
  return scale * f[static_cast<std::size_t>(target)];
}

/// J_nu(t) without range checks (nu > -1, t >= 0).
inline double bessel_unchecked(double nu, double t) {
  if (series_regime(nu, t)) return series_j(nu, t);
  return miller_j(nu, t);
}

inline double bessel_prime_unchecked(double nu, double t) {
  if (t == 0.0) {
    if (nu == 0.0 || nu > 1.0) return 0.0;
    if (nu == 1.0) return 0.5;
    return nu > 0.0 ? std::numeric_limits<double>::infinity()
                    : -std::numeric_limits<double>::infinity();
  }
  if (series_regime(nu, t)) {
    const double half = 0.5 * t;
    double base = std::exp(nu * std::log(half) - log_gamma(nu + 1.0));
    CompensatedSum acc;
    acc.add(base * nu / t);
    const double q = -half * half;
    for (int m = 1; m < 1000; ++m) {
      base *= q / (m * (m + nu));
      const double term = base * (2.0 * m + nu) / t;
      acc.add(term);
      if (std::abs(term) <= 1e-18 * std::abs(acc.value())) break;
    }
    return acc.value();
  }
  return nu / t * bessel_unchecked(nu, t) - bessel_unchecked(nu + 1.0, t);
}

/// s^{-nu} J_nu(k s), finite at s = 0 for every nu > -1.
inline double scaled_bessel(double nu, double k, double s) {
  const double x = k * s;
  if (series_regime(nu, x)) {
    const double lead = std::exp(nu * std::log(0.5 * k) - log_gamma(nu + 1.0));
    return even_series(nu, 0.5 * x, lead);
  }
  return std::pow(s, -nu) * bessel_unchecked(nu, x);
}

inline void check_range(double nu, double t) {
  if (!(nu > -1.0) || nu > kMaxOrder) {
    throw Error(ErrorKind::OutOfSupportedRange,
                "Bessel order " + std::to_string(nu) + " outside (-1, 120]");
  }
  if (!(t >= 0.0) || t > kMaxArgument) {
    throw Error(ErrorKind::OutOfSupportedRange,
                "Bessel argument " + std::to_string(t) + " outside [0, 500]");
  }
}

}  // namespace detail

/// J_nu(t) for nu in (-1, 120] and t in [0, 500].
inline double bessel_j(BesselOrder order, double t) {
  detail::check_range(order.nu, t);
  return detail::bessel_unchecked(order.nu, t);
}

/// d/dt J_nu(t).
inline double bessel_j_prime(BesselOrder order, double t) {
  detail::check_range(order.nu, t);
  return detail::bessel_prime_unchecked(order.nu, t);
}

/// First positive zero j_nu of J_nu.
///
/// For nu >= 1 the scan starts at nu (j_nu > nu) and runs past the McMahon-type
/// estimate nu + 1.8557 nu^{1/3}; below that a fixed window (0, 6] is scanned with a
/// step that shrinks as nu -> -1 so the first sign change cannot be skipped.
/// Positivity on (0, j_nu) is confirmed on 64 interior samples.
inline double first_zero(BesselOrder order) {
  const double nu = order.nu;
  detail::check_range(nu, 0.0);
  auto j = [nu](double x) { return detail::bessel_unchecked(nu, x); };

  double step, x, stop;
  if (nu >= 1.0) {
    step = 0.05;
    x = nu;
    stop = nu + 1.8557 * std::cbrt(nu) + 3.0;
  } else {
    step = std::min(0.05, 0.5 * std::sqrt(nu + 1.0));
    x = step;
    stop = 6.0;
  }
  double prev_x = x;
  double prev = j(x);
  if (!(prev > 0)) {
    throw Error(ErrorKind::BracketingFailure, "J_nu not positive at scan start for nu=" +
                                                  std::to_string(nu));
  }
  bool found = false;
  while (x < stop) {
    x = prev_x + step;
    const double v = j(x);
    if (v <= 0.0) {
      found = true;
      break;
    }
    prev_x = x;
    prev = v;
  }
  if (!found) {
    throw Error(ErrorKind::BracketingFailure, "no sign change of J_nu found for nu=" +
                                                  std::to_string(nu));
  }
  const double root =
      numerics::find_root(j, numerics::Interval(prev_x, x), numerics::Tolerance(1e-15, 4e-16));
  for (int i = 1; i <= 64; ++i) {
    if (j(root * i / 65.0) < 0.0) {  // deep underflow reads as 0 for large nu
      throw Error(ErrorKind::BracketingFailure,
                  "J_nu changes sign before the located zero for nu=" + std::to_string(nu));
    }
  }
  return root;
}

namespace detail {

class EigenConstantCache {
 public:
  static EigenConstantCache& instance() {
    static EigenConstantCache cache;
    return cache;
  }

  EigenConstant get(DimensionParam mu) {
    {
      std::shared_lock lock(mutex_);
      if (auto it = table_.find(mu.mu); it != table_.end()) return it->second;
    }
    const double j = first_zero(BesselOrder(mu.order()));
    EigenConstant value{mu, j, j * j};
    std::unique_lock lock(mutex_);
    table_.emplace(mu.mu, value);
    return value;
  }

 private:
  std::shared_mutex mutex_;
  std::map<double, EigenConstant> table_;
};

}  // namespace detail

/// lambda_mu = j_{mu/2-1}^2, the first eigenvalue of the unit-interval problem with
/// measure s^{mu-1} ds and Dirichlet condition at s = 1. Memoised per mu.
inline EigenConstant lambda_mu(DimensionParam mu) {
  if (mu.mu > kMaxMu) {
    throw Error(ErrorKind::OutOfSupportedRange, "mu " + std::to_string(mu.mu) +
                                                    " outside (0, 240]");
  }
  return detail::EigenConstantCache::instance().get(mu);
}

/// The mu in (0, 240] whose lambda_mu equals the given value.
inline double inverse_lambda_mu(double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda must be positive");
  auto f = [lambda](double mu) { return lambda_mu(DimensionParam(mu)).lambda - lambda; };
  const double lo = 1e-6;
  if (f(kMaxMu) < 0.0 || f(lo) > 0.0) {
    throw Error(ErrorKind::OutOfSupportedRange, "lambda outside the range of mu in (0, 240]");
  }
  return numerics::find_root(f, numerics::Interval(lo, kMaxMu), numerics::Tolerance(1e-12, 1e-13));
}

// ---------------------------------------------------------------------------
// Extremal profiles
// ---------------------------------------------------------------------------

namespace detail {
inline void check_unit(double s) {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw Error(ErrorKind::OutOfSupportedRange, "s must lie in [0, 1], got " + std::to_string(s));
  }
}
}  // namespace detail

/// psi_mu(s) = s^{1-mu/2} J_{mu/2-1}(sqrt(lambda_mu) s); the even power series is
/// used near s = 0 so the value stays finite for mu < 2.
inline double psi(DimensionParam mu, double s) {
  detail::check_unit(s);
  const auto ec = lambda_mu(mu);
  return detail::scaled_bessel(mu.order(), ec.j, s);
}

/// psi_mu'(s) = -j s * s^{-mu/2} J_{mu/2}(j s) with j = sqrt(lambda_mu), from
/// (z^{-nu} J_nu)' = -z^{-nu} J_{nu+1}.
inline double psi_prime(DimensionParam mu, double s) {
  detail::check_unit(s);
  const auto ec = lambda_mu(mu);
  if (s == 0.0) return 0.0;
  return -ec.j * s * detail::scaled_bessel(mu.order() + 1.0, ec.j, s);
}

/// Phi(s) = J_{mu/2-1}(sqrt(lambda_mu) s).
inline double phi(DimensionParam mu, double s) {
  detail::check_unit(s);
  const auto ec = lambda_mu(mu);
  return detail::bessel_unchecked(mu.order(), ec.j * s);
}

inline double phi_prime(DimensionParam mu, double s) {
  detail::check_unit(s);
  const auto ec = lambda_mu(mu);
  return ec.j * detail::bessel_prime_unchecked(mu.order(), ec.j * s);
}

// ---------------------------------------------------------------------------
// Identity checks
// ---------------------------------------------------------------------------

namespace detail {
inline numerics::Tolerance identity_tolerance() { return numerics::Tolerance(1e-14, 1e-13, 60); }
}  // namespace detail

/// Residual of the energy identity
///   int_a^b (lambda psi^2 - psi'^2) s^{mu-1} ds = -psi'(b)psi(b)b^{mu-1} + psi'(a)psi(a)a^{mu-1}
/// together with the flux identity psi'(b) b^{mu-1} = -lambda int_0^b psi t^{mu-1} dt.
/// Returns the larger of the two absolute residuals.
inline double check_lemma21(DimensionParam mu, double a, double b) {
  if (!(a >= 0.0 && a <= b && b <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "need 0 <= a <= b <= 1");
  }
  if (a == b) return 0.0;
  const auto ec = lambda_mu(mu);
  const double m = mu.mu;
  auto boundary = [&](double s) {
    if (s == 0.0) return 0.0;
    return psi_prime(mu, s) * psi(mu, s) * std::pow(s, m - 1.0);
  };
  auto energy = [&](double s) {
    const double p = psi(mu, s);
    const double dp = psi_prime(mu, s);
    return (ec.lambda * p * p - dp * dp) * std::pow(s, m - 1.0);
  };
  auto mass = [&](double s) { return psi(mu, s) * std::pow(s, m - 1.0); };

  const double grading_from_zero = std::max(1.0, std::ceil(2.0 / m));
  const auto tol = detail::identity_tolerance();
  const double lhs = numerics::integrate(energy, numerics::Interval(a, b), tol,
                                         a == 0.0 ? grading_from_zero : 1.0);
  const double rhs = -boundary(b) + boundary(a);
  const double flux_lhs = psi_prime(mu, b) * std::pow(b, m - 1.0);
  const double flux_rhs =
      -ec.lambda * numerics::integrate(mass, numerics::Interval(0.0, b), tol, grading_from_zero);
  return std::max(std::abs(lhs - rhs), std::abs(flux_lhs - flux_rhs));
}

/// Residual of
///   int_0^x Phi'^2 s ds = lambda int_0^x Phi^2 s ds - ((mu-2)/2)^2 int_0^x Phi^2 ds/s + Phi'(x)Phi(x)x
/// for mu > 2 and x in (0, 1].
inline double check_lemma23(DimensionParam mu, double x) {
  if (!(mu.mu > 2.0)) throw Error(ErrorKind::MeaninglessConstant, "check_lemma23 needs mu > 2");
  if (!(x > 0.0 && x <= 1.0)) throw Error(ErrorKind::InvalidArgument, "need x in (0, 1]");
  const auto ec = lambda_mu(mu);
  const double nu = mu.order();
  // On (0, s0) Phi = c s^nu (1 + O((j s0)^2)); those pieces are taken in closed form.
  // The rest is integrated in v = log s, where every integrand is smooth even for nu near 0.
  const double s0 = 1e-6 * x;
  const double c = std::exp(nu * std::log(0.5 * ec.j) - log_gamma(nu + 1.0));
  const double p2 = c * c * std::pow(s0, 2.0 * nu);
  const double kinetic0 = 0.5 * nu * p2;
  const double hardy0 = p2 / (2.0 * nu);
  const double mass0 = p2 * s0 * s0 / (2.0 * nu + 2.0);
  const auto tol = detail::identity_tolerance();
  const numerics::Interval iv(std::log(s0), std::log(x));
  auto in_log = [&](auto f) {
    return numerics::integrate([&](double v) { return f(std::exp(v)); }, iv, tol);
  };
  // each integrand already carries the ds = s dv factor
  const double kinetic = in_log([&](double s) {
    const double d = phi_prime(mu, s) * s;
    return d * d;
  });
  const double mass = in_log([&](double s) {
    const double p = phi(mu, s) * s;
    return p * p;
  });
  const double hardy = in_log([&](double s) {
    const double p = phi(mu, s);
    return p * p;
  });
  const double lhs = kinetic0 + kinetic;
  const double rhs = ec.lambda * (mass0 + mass) - nu * nu * (hardy0 + hardy) +
                     phi_prime(mu, x) * phi(mu, x) * x;
  return std::abs(lhs - rhs);
}

}  // namespace spectral_type::special
