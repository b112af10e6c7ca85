#pragma once

// Warped-product surfaces M = R x S^1 with metric dt^2 + eta'(t)^2 dtheta^2.
//
// Balls are B_r = {|t| < r}; their first Dirichlet eigenvalue reduces to the
// theta-independent problem  min int phi'^2 eta' / int phi^2 eta'  on (-r, r),
// since every angular mode k adds k^2 / eta'^2 >= 0 to the quotient.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "spectral_type/error.hpp"
#include "spectral_type/numerics.hpp"
#include "spectral_type/sturm.hpp"

namespace spectral_type::surface {

using numerics::Interval;
using numerics::Tolerance;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct PowerLaw {
  double alpha;
};
struct ExponentialDecay {
  double alpha;
};
struct Dprs {};
struct Staircase {};

enum class SlowChoice { LogPower, Power, LogLog };

/// eta = exp(-int_1^{-t} mu) for t < -1 and 2 exp(int_1^t mu) for t > 1.
/// LogPower uses mu(t) = (1 + log t)^beta / t, Power mu(t) = t^-alpha and
/// LogLog mu(t) = log(t + 1)^-gamma.
struct SlowlyVarying {
  SlowChoice choice;
  double param;
};

/// Piecewise-linear eta' through the nodes; eta(t.front()) = eta_at_start.
struct Tabulated {
  std::vector<double> t;
  std::vector<double> eta_prime;
  double eta_at_start = 0.0;
};

namespace detail {

inline double smoothstep_down(double x) { return x >= 1.0 ? 0.0 : 1.0 - x * x * (3.0 - 2.0 * x); }
inline double smoothstep_down_integral(double x) {
  if (x >= 1.0) return 0.5;
  const double x2 = x * x;
  return x - x2 * x + 0.5 * x2 * x2;
}

/// Positive C^1 slope profile on [-1, 1] with eta'(-1) = a, eta'(1) = b and total
/// rise eta(1) - eta(-1) = rise: a plateau m with smoothstep blends of width delta
/// into each end. The blends shrink when a + b is large compared to the rise, so
/// the slope stays positive where a single cubic would have to dip below zero.
struct Bridge {
  double left_value = 0.0;
  double a = 1.0;
  double b = 1.0;
  double m = 1.0;
  double delta = 1.0;

  static Bridge make(double left_value, double rise, double a, double b) {
    Bridge br;
    br.left_value = left_value;
    br.a = a;
    br.b = b;
    const double plateau = rise - 0.5 * (a + b);
    if (plateau >= 0.25 * rise) {
      br.m = plateau;
      br.delta = 1.0;
    } else {
      br.m = 0.25 * rise;
      br.delta = 0.5 * rise / (0.5 * (a + b) - 0.25 * rise);
    }
    return br;
  }

  double slope(double t) const {
    return m + (a - m) * smoothstep_down((1.0 + t) / delta) +
           (b - m) * smoothstep_down((1.0 - t) / delta);
  }
  double value(double t) const {
    return left_value + m * (t + 1.0) + (a - m) * delta * smoothstep_down_integral((1.0 + t) / delta) +
           (b - m) * delta * (0.5 - smoothstep_down_integral((1.0 - t) / delta));
  }
};

inline double slow_mu(const SlowlyVarying& s, double t) {
  switch (s.choice) {
    case SlowChoice::LogPower: return std::pow(1.0 + std::log(t), s.param) / t;
    case SlowChoice::Power: return std::pow(t, -s.param);
    case SlowChoice::LogLog: return std::pow(std::log(t + 1.0), -s.param);
  }
  return 0.0;
}

inline constexpr int kLogLogKnots = 1024;

/// int_1^{1+k} mu for k = 0..kLogLogKnots (no closed form for the log-log choice).
inline std::vector<double> loglog_knots(const SlowlyVarying& s) {
  std::vector<double> knots(kLogLogKnots + 1, 0.0);
  for (int k = 1; k <= kLogLogKnots; ++k) {
    knots[k] = knots[k - 1] + numerics::integrate([&](double x) { return slow_mu(s, x); },
                                                  Interval(k, k + 1.0), Tolerance(0.0, 1e-14));
  }
  return knots;
}

/// int_1^t mu(s) ds for t >= 1; `knots` is only consulted for the log-log choice.
inline double slow_mu_integral(const SlowlyVarying& s, double t, const std::vector<double>& knots) {
  if (t <= 1.0) return 0.0;
  switch (s.choice) {
    case SlowChoice::LogPower:
      return (std::pow(1.0 + std::log(t), s.param + 1.0) - 1.0) / (s.param + 1.0);
    case SlowChoice::Power: return (std::pow(t, 1.0 - s.param) - 1.0) / (1.0 - s.param);
    case SlowChoice::LogLog: {
      const double k = std::min(std::floor(t - 1.0), static_cast<double>(kLogLogKnots));
      const double from = 1.0 + k;
      const double base = knots[static_cast<std::size_t>(k)];
      if (t == from) return base;
      return base + numerics::integrate([&](double x) { return slow_mu(s, x); }, Interval(from, t),
                                        Tolerance(0.0, 1e-15));
    }
  }
  return 0.0;
}

// cubic Hermite basis on [0, 1] and antiderivatives from 0
inline double h00(double x) { return (1 + 2 * x) * (1 - x) * (1 - x); }
inline double h10(double x) { return x * (1 - x) * (1 - x); }
inline double h01(double x) { return x * x * (3 - 2 * x); }
inline double h11(double x) { return x * x * (x - 1); }
inline double H00(double x) { return x - x * x * x + 0.5 * x * x * x * x; }
inline double H10(double x) { return 0.5 * x * x - 2.0 * x * x * x / 3.0 + 0.25 * x * x * x * x; }
inline double H01(double x) { return x * x * x - 0.5 * x * x * x * x; }
inline double H11(double x) { return 0.25 * x * x * x * x - x * x * x / 3.0; }

inline constexpr double kStaircaseMaxT = 700.0;

/// Block n >= 2 of the staircase covers [2^n - 1, 2^{n+1} - 1):
///   [a-1, a]    Hermite cubic from e^{a-1} (slope e^{a-1}) down to n^2 (slope 0)
///   [a, a+1]    plateau n^2
///   [a+1, a+2]  Hermite cubic from n^2 (slope 0) up to e^{a+2} (slope e^{a+2})
///   [a+2, 2a-1] e^t
/// with a = 2^n. Both cubics stay >= n^2 on their segments.
struct StairBlock {
  int n;
  double a;
};

inline StairBlock stair_block(double t) {
  int n = static_cast<int>(std::floor(std::log2(t + 1.0)));
  while (std::ldexp(1.0, n) - 1.0 > t) --n;
  while (std::ldexp(1.0, n + 1) - 1.0 <= t) ++n;
  return {n, std::ldexp(1.0, n)};
}

inline double stair_slope(double t) {
  if (t < 3.0) return std::exp(t);
  const auto [n, a] = stair_block(t);
  const double n2 = static_cast<double>(n) * n;
  if (t < a) {
    const double x = t - (a - 1.0);
    const double e = std::exp(a - 1.0);
    return h00(x) * e + h10(x) * e + h01(x) * n2;
  }
  if (t <= a + 1.0) return n2;
  if (t < a + 2.0) {
    const double x = t - (a + 1.0);
    const double e = std::exp(a + 2.0);
    return h00(x) * n2 + h01(x) * e + h11(x) * e;
  }
  return std::exp(t);
}

/// eta(2^n - 1) - eta(3) summed over complete blocks below n.
inline double stair_block_mass(int n) {
  const double a = std::ldexp(1.0, n);
  const double n2 = static_cast<double>(n) * n;
  const double e0 = std::exp(a - 1.0);
  const double e1 = std::exp(a + 2.0);
  return (0.5 * e0 + e0 / 12.0 + 0.5 * n2) + n2 + (0.5 * n2 + 0.5 * e1 - e1 / 12.0) +
         (std::exp(2.0 * a - 1.0) - e1);
}

inline double stair_value(double t) {
  if (t < 3.0) return std::exp(t);
  const auto [n, a] = stair_block(t);
  const double n2 = static_cast<double>(n) * n;
  double v = std::exp(3.0);
  for (int k = 2; k < n; ++k) v += stair_block_mass(k);
  const double e0 = std::exp(a - 1.0);
  const double e1 = std::exp(a + 2.0);
  if (t < a) {
    const double x = t - (a - 1.0);
    return v + H00(x) * e0 + H10(x) * e0 + H01(x) * n2;
  }
  v += 0.5 * e0 + e0 / 12.0 + 0.5 * n2;
  if (t <= a + 1.0) return v + (t - a) * n2;
  v += n2;
  if (t < a + 2.0) {
    const double x = t - (a + 1.0);
    return v + H00(x) * n2 + H01(x) * e1 + H11(x) * e1;
  }
  v += 0.5 * n2 + 0.5 * e1 - e1 / 12.0;
  return v + std::exp(t) - e1;
}

/// eta(hi) - eta(lo) summed segment by segment, so that a short difference far out
/// (e.g. across a plateau next to e^64) keeps its digits.
inline double stair_mass(double lo, double hi) {
  double total = 0.0;
  if (lo < 3.0) {
    const double top = std::min(hi, 3.0);
    total += std::exp(top) - std::exp(lo);
    lo = top;
  }
  while (lo < hi) {
    const auto [n, a] = stair_block(lo);
    const double n2 = static_cast<double>(n) * n;
    const double e0 = std::exp(a - 1.0);
    const double e1 = std::exp(a + 2.0);
    const double cuts[] = {a - 1.0, a, a + 1.0, a + 2.0, 2.0 * a - 1.0};
    int k = 0;
    while (lo >= cuts[k + 1]) ++k;
    const double top = std::min(hi, cuts[k + 1]);
    auto local = [&](double t) {
      const double x = t - cuts[k];
      if (k == 0) return H00(x) * e0 + H10(x) * e0 + H01(x) * n2;
      if (k == 1) return x * n2;
      return H00(x) * n2 + H01(x) * e1 + H11(x) * e1;
    };
    total += k == 3 ? std::exp(top) - std::exp(lo) : local(top) - local(lo);
    lo = top;
  }
  return total;
}

}  // namespace detail

/// A rotationally symmetric surface given by eta (eta' > 0 is the circle length
/// over 2 pi). Immutable after construction.
class Profile {
 public:
  using Family = std::variant<PowerLaw, ExponentialDecay, Dprs, Staircase, SlowlyVarying, Tabulated>;

  explicit Profile(Family family) : family_(std::move(family)) {
    std::visit([this](const auto& f) { init(f); }, family_);
  }

  static Profile power_law(double alpha) { return Profile(PowerLaw{alpha}); }
  static Profile exponential_decay(double alpha) { return Profile(ExponentialDecay{alpha}); }
  static Profile dprs() { return Profile(Dprs{}); }
  static Profile staircase() { return Profile(Staircase{}); }
  static Profile slowly_varying(SlowChoice c, double param) { return Profile(SlowlyVarying{c, param}); }
  static Profile tabulated(std::vector<double> t, std::vector<double> eta_prime, double eta0 = 0.0) {
    return Profile(Tabulated{std::move(t), std::move(eta_prime), eta0});
  }

  const Family& family() const { return family_; }

  double eta(double t) const {
    check_t(t);
    return std::visit([&](const auto& f) { return eta_of(f, t); }, family_);
  }
  double eta_prime(double t) const {
    check_t(t);
    return std::visit([&](const auto& f) { return eta_prime_of(f, t); }, family_);
  }

  /// Threshold c with t mu(t) increasing on [c, inf) (slowly varying family only).
  double slow_constant() const { return slow_c_; }

  /// Points where eta' changes its formula, for samplers that must not miss kinks.
  std::vector<double> breakpoints(double r) const {
    std::vector<double> out;
    if (std::holds_alternative<Staircase>(family_)) {
      for (int n = 2; std::ldexp(1.0, n) - 1.0 <= std::min(r, detail::kStaircaseMaxT); ++n) {
        const double a = std::ldexp(1.0, n);
        for (double x : {a - 1.0, a, a + 1.0, a + 2.0}) {
          if (x <= r) out.push_back(x);
        }
      }
    } else if (const auto* tab = std::get_if<Tabulated>(&family_)) {
      for (double x : tab->t) {
        if (std::abs(x) <= r) out.push_back(x);
      }
    } else {
      if (r >= 1.0) out.insert(out.end(), {-1.0, 1.0});
    }
    return out;
  }

  /// Finite domain of eta for tabulated profiles.
  std::optional<Interval> domain() const {
    if (const auto* tab = std::get_if<Tabulated>(&family_)) return Interval(tab->t.front(), tab->t.back());
    if (std::holds_alternative<Staircase>(family_)) return Interval(-kInf_safe(), detail::kStaircaseMaxT);
    return std::nullopt;
  }

  std::string name() const {
    return std::visit(
        [](const auto& f) -> std::string {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, PowerLaw>) return "power_law(alpha=" + num(f.alpha) + ")";
          else if constexpr (std::is_same_v<T, ExponentialDecay>) return "exp_decay(alpha=" + num(f.alpha) + ")";
          else if constexpr (std::is_same_v<T, Dprs>) return "dprs";
          else if constexpr (std::is_same_v<T, Staircase>) return "staircase";
          else if constexpr (std::is_same_v<T, SlowlyVarying>) {
            switch (f.choice) {
              case SlowChoice::LogPower: return "slowly_varying(log_power, beta=" + num(f.param) + ")";
              case SlowChoice::Power: return "slowly_varying(power, alpha=" + num(f.param) + ")";
              case SlowChoice::LogLog: return "slowly_varying(log_log, gamma=" + num(f.param) + ")";
            }
            return "slowly_varying";
          } else {
            return "tabulated(" + std::to_string(f.t.size()) + " nodes)";
          }
        },
        family_);
  }

 private:
  static double kInf_safe() { return std::numeric_limits<double>::max(); }

  static std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
  }

  void check_t(double t) const {
    if (!std::isfinite(t)) throw Error(ErrorKind::InvalidArgument, "profile evaluated at non-finite t");
    if (std::holds_alternative<Staircase>(family_) && t > detail::kStaircaseMaxT) {
      throw Error(ErrorKind::OutOfSupportedRange, "staircase profile supported for t <= 700");
    }
    if (const auto* tab = std::get_if<Tabulated>(&family_)) {
      if (t < tab->t.front() || t > tab->t.back()) {
        throw Error(ErrorKind::OutOfSupportedRange,
                    "t=" + std::to_string(t) + " outside the tabulated range");
      }
    }
  }

  void init(const PowerLaw& f) {
    if (!(f.alpha > 0) || !std::isfinite(f.alpha)) {
      throw Error(ErrorKind::InvalidArgument, "power law needs alpha > 0");
    }
    bridge_ = detail::Bridge::make(1.0, 1.0, f.alpha, 2.0 * f.alpha);
  }
  void init(const ExponentialDecay& f) {
    if (!(f.alpha > 0) || !std::isfinite(f.alpha)) {
      throw Error(ErrorKind::InvalidArgument, "exponential decay needs alpha > 0");
    }
  }
  void init(const Dprs&) {}
  void init(const Staircase&) {}
  void init(const SlowlyVarying& f) {
    const bool ok = f.choice == SlowChoice::Power ? (f.param > 0 && f.param < 1) : f.param > 0;
    if (!ok || !std::isfinite(f.param)) {
      throw Error(ErrorKind::InvalidArgument, "slowly varying parameter out of range");
    }
    const double mu1 = detail::slow_mu(f, 1.0);
    bridge_ = detail::Bridge::make(1.0, 1.0, mu1, 2.0 * mu1);
    if (f.choice == SlowChoice::LogLog) cumulative_ = detail::loglog_knots(f);
    slow_c_ = 1.0;
    if (f.choice == SlowChoice::LogLog) {
      // (t mu)' >= 0  <=>  log(t+1) >= gamma t / (t+1); the gap is smallest at t = gamma - 1
      auto gap = [&](double t) { return std::log(t + 1.0) - f.param * t / (t + 1.0); };
      const double valley = std::max(1.0, f.param - 1.0);
      if (gap(valley) < 0.0) {
        slow_c_ = numerics::find_root(gap, Interval(valley, std::exp(f.param) + 1.0),
                                      Tolerance(1e-12, 1e-14));
      }
    }
  }
  void init(const Tabulated& f) {
    if (f.t.size() != f.eta_prime.size() || f.t.size() < 4) {
      throw Error(ErrorKind::InvalidArgument, "tabulated profile needs >= 4 (t, eta') pairs");
    }
    for (std::size_t i = 0; i < f.t.size(); ++i) {
      if (!std::isfinite(f.t[i]) || !(f.eta_prime[i] > 0) || !std::isfinite(f.eta_prime[i])) {
        throw Error(ErrorKind::InvalidArgument, "tabulated eta' must be positive and finite");
      }
      if (i > 0 && !(f.t[i] > f.t[i - 1])) {
        throw Error(ErrorKind::InvalidArgument, "tabulated t must be strictly increasing");
      }
    }
    if (!(f.t.front() < 0.0 && f.t.back() > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "tabulated range must contain t = 0");
    }
    if (!(f.eta_at_start >= 0) || !std::isfinite(f.eta_at_start)) {
      throw Error(ErrorKind::InvalidArgument, "tabulated eta0 must be finite and >= 0");
    }
    cumulative_.assign(f.t.size(), f.eta_at_start);
    for (std::size_t i = 1; i < f.t.size(); ++i) {
      cumulative_[i] = cumulative_[i - 1] + 0.5 * (f.eta_prime[i] + f.eta_prime[i - 1]) * (f.t[i] - f.t[i - 1]);
    }
  }

  // --- eta and eta' per family ---
  double eta_of(const PowerLaw& f, double t) const {
    if (t < -1.0) return std::pow(-t, -f.alpha);
    if (t > 1.0) return 2.0 * std::pow(t, f.alpha);
    return bridge_.value(t);
  }
  double eta_prime_of(const PowerLaw& f, double t) const {
    if (t < -1.0) return f.alpha * std::pow(-t, -f.alpha - 1.0);
    if (t > 1.0) return 2.0 * f.alpha * std::pow(t, f.alpha - 1.0);
    return bridge_.slope(t);
  }

  // eta' = exp(-alpha |t|) outside [-1, 1] and exp(-alpha (1 + t^2) / 2) inside
  static double eta_of(const ExponentialDecay& f, double t) {
    const double al = f.alpha;
    if (t < -1.0) return std::exp(al * t) / al;
    const double left = std::exp(-al) / al;
    const double k = std::sqrt(0.5 * al);
    const double mid_scale = std::exp(-0.5 * al) * std::sqrt(std::numbers::pi / (2.0 * al));
    if (t <= 1.0) return left + mid_scale * (std::erf(k * t) + std::erf(k));
    const double at_one = left + 2.0 * mid_scale * std::erf(k);
    return at_one + (std::exp(-al) - std::exp(-al * t)) / al;
  }
  static double eta_prime_of(const ExponentialDecay& f, double t) {
    if (std::abs(t) > 1.0) return std::exp(-f.alpha * std::abs(t));
    return std::exp(-0.5 * f.alpha * (1.0 + t * t));
  }

  static double eta_of(const Dprs&, double t) { return std::exp(t); }
  static double eta_prime_of(const Dprs&, double t) { return std::exp(t); }

  static double eta_of(const Staircase&, double t) { return detail::stair_value(t); }
  static double eta_prime_of(const Staircase&, double t) { return detail::stair_slope(t); }

  double eta_of(const SlowlyVarying& f, double t) const {
    if (t < -1.0) return std::exp(-detail::slow_mu_integral(f, -t, cumulative_));
    if (t > 1.0) return 2.0 * std::exp(detail::slow_mu_integral(f, t, cumulative_));
    return bridge_.value(t);
  }
  double eta_prime_of(const SlowlyVarying& f, double t) const {
    if (t < -1.0) return detail::slow_mu(f, -t) * std::exp(-detail::slow_mu_integral(f, -t, cumulative_));
    if (t > 1.0) return 2.0 * detail::slow_mu(f, t) * std::exp(detail::slow_mu_integral(f, t, cumulative_));
    return bridge_.slope(t);
  }

  double eta_of(const Tabulated& f, double t) const {
    const std::size_t i = segment(f, t);
    const double x = t - f.t[i];
    const double slope = (f.eta_prime[i + 1] - f.eta_prime[i]) / (f.t[i + 1] - f.t[i]);
    return cumulative_[i] + f.eta_prime[i] * x + 0.5 * slope * x * x;
  }
  static double eta_prime_of(const Tabulated& f, double t) {
    const std::size_t i = segment(f, t);
    const double x = (t - f.t[i]) / (f.t[i + 1] - f.t[i]);
    return f.eta_prime[i] + x * (f.eta_prime[i + 1] - f.eta_prime[i]);
  }
  static std::size_t segment(const Tabulated& f, double t) {
    auto it = std::upper_bound(f.t.begin(), f.t.end(), t);
    std::size_t i = static_cast<std::size_t>(it - f.t.begin());
    i = std::clamp<std::size_t>(i, 1, f.t.size() - 1);
    return i - 1;
  }

  Family family_;
  detail::Bridge bridge_;
  double slow_c_ = 1.0;
  std::vector<double> cumulative_;  // eta at tabulated nodes, or log-log knots
};

// ---------------------------------------------------------------------------
// Volumes
// ---------------------------------------------------------------------------

inline void check_radius(double r) {
  if (!(r > 0) || !std::isfinite(r)) {
    throw Error(ErrorKind::InvalidArgument, "radius must be positive and finite");
  }
}

/// |B_r| = 2 pi (eta(r) - eta(-r)).
inline double volume_ball(const Profile& p, double r) {
  check_radius(r);
  return 2.0 * std::numbers::pi * (p.eta(r) - p.eta(-r));
}

/// |M \ B_r|, +infinity when either end has infinite volume. Tabulated profiles
/// say nothing beyond their table, so their ends count as infinite.
inline double volume_complement(const Profile& p, double r) {
  check_radius(r);
  if (const auto* e = std::get_if<ExponentialDecay>(&p.family())) {
    const double al = e->alpha;
    if (r >= 1.0) return 4.0 * std::numbers::pi * std::exp(-al * r) / al;
    // eta(inf) - eta(r) + eta(-r)
    const double k = std::sqrt(0.5 * al);
    const double mid_scale = std::exp(-0.5 * al) * std::sqrt(std::numbers::pi / (2.0 * al));
    const double inner = mid_scale * (std::erf(k) - std::erf(k * r));
    return 2.0 * std::numbers::pi * 2.0 * (std::exp(-al) / al + inner);
  }
  return kInf;
}

// ---------------------------------------------------------------------------
// Type classification through h(t) = int_0^t ds / eta'(s)
// ---------------------------------------------------------------------------

enum class SurfaceType { Parabolic, Hyperbolic };

inline std::string_view to_string(SurfaceType t) {
  return t == SurfaceType::Parabolic ? "Parabolic" : "Hyperbolic";
}

struct TailSample {
  double cutoff;
  double h_plus;   // h(cutoff)
  double h_minus;  // h(-cutoff)
};

struct TypeVerdict {
  SurfaceType verdict;
  double h_sup;  // +inf when the right tail diverges
  double h_inf;  // -inf when the left tail diverges
  std::vector<TailSample> evidence;
  bool heuristic = false;  // ruled by the ratio test rather than closed form
};

enum class Side { Right, Left };

namespace detail {

/// int over offsets y in [near, far] from an anchor of g(y), for g with a feature of
/// unknown (possibly tiny) width at y = 0: evaluated in v = log y, where the
/// feature has O(1) width. near = 0 is allowed.
template <class G>
double integrate_log_anchored(G&& g, double near, double far) {
  constexpr double kFloor = 1e-300;
  double total = 0.0;
  if (near < kFloor) {
    total += kFloor * g(0.0);
    near = kFloor;
  }
  total += numerics::integrate(
      [&](double v) {
        const double y = std::exp(v);
        return g(y) * y;
      },
      Interval(std::log(near), std::log(far)), Tolerance(1e-300, 1e-12, 60));
  return total;
}

/// 1/eta' on the staircase cubics as a function of the distance y to the adjacent
/// plateau (closed forms free of cancellation as y -> 0).
inline double stair_inverse_before_plateau(int n, double a, double y) {
  const double n2 = static_cast<double>(n) * n;
  const double e = std::exp(a - 1.0);
  return 1.0 / (n2 + y * y * ((3.0 - 2.0 * y) * (e - n2) + (1.0 - y) * e));
}
inline double stair_inverse_after_plateau(int n, double a, double y) {
  const double n2 = static_cast<double>(n) * n;
  const double e = std::exp(a + 2.0);
  return 1.0 / (n2 + y * y * ((2.0 - y) * e - (3.0 - 2.0 * y) * n2));
}

/// int_{t0}^{t1} dt / eta' for a finite range with t0 < t1 (quadrature split at kinks).
inline double inverse_slope_integral(const Profile& p, double t0, double t1) {
  if (t1 <= t0) return 0.0;
  std::vector<double> cuts{t0};
  for (double b : p.breakpoints(std::max(std::abs(t0), std::abs(t1)))) {
    if (b > t0 && b < t1) cuts.push_back(b);
  }
  if (t0 < 0.0 && t1 > 0.0) cuts.push_back(0.0);
  cuts.push_back(t1);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  auto inv = [&](double t) { return 1.0 / p.eta_prime(t); };
  const bool stairs = std::holds_alternative<Staircase>(p.family());
  double total = 0.0;
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    const double lo = cuts[i - 1], hi = cuts[i];
    const double mid = 0.5 * (lo + hi);
    if (stairs && mid >= 3.0) {
      // the cubic next to each plateau rises from n^2 to ~e^{2^n} within a sliver
      const auto [n, a] = stair_block(mid);
      if (mid < a) {
        total += integrate_log_anchored(
            [&](double y) { return stair_inverse_before_plateau(n, a, y); }, a - hi, a - lo);
        continue;
      }
      if (mid > a + 1.0 && mid < a + 2.0) {
        total += integrate_log_anchored(
            [&](double y) { return stair_inverse_after_plateau(n, a, y); }, lo - (a + 1.0), hi - (a + 1.0));
        continue;
      }
    }
    total += numerics::integrate(inv, Interval(lo, hi), Tolerance(1e-15, 1e-12, 60));
  }
  return total;
}

/// Exact int dt / eta' across one linear segment of a tabulated profile.
inline double linear_inverse_integral(double x0, double y0, double x1, double y1) {
  const double rel = (y1 - y0) / y0;
  if (std::abs(rel) < 1e-8) return (x1 - x0) / (0.5 * (y0 + y1));
  return (x1 - x0) * std::log(y1 / y0) / (y1 - y0);
}

/// Tail increments over doubling cutoffs: last three ratios all <= 0.8 means
/// convergent, all >= 0.95 divergent, anything else is inconclusive.
enum class TailRuling { Converges, Diverges, Inconclusive };

inline TailRuling ratio_ruling(const std::vector<double>& increments) {
  if (increments.size() < 4) return TailRuling::Inconclusive;
  bool all_small = true, all_large = true;
  for (std::size_t i = increments.size() - 3; i < increments.size(); ++i) {
    const double ratio = increments[i] / increments[i - 1];
    all_small = all_small && ratio <= 0.8;
    all_large = all_large && ratio >= 0.95;
  }
  if (all_small) return TailRuling::Converges;
  if (all_large) return TailRuling::Diverges;
  return TailRuling::Inconclusive;
}

struct TabulatedTail {
  TailRuling ruling;
  double remainder;  // extrapolated tail beyond the table when convergent
  std::vector<double> increments;
};

inline TabulatedTail tabulated_tail(const Profile& p, const Tabulated& tab, Side side) {
  const double end = side == Side::Right ? tab.t.back() : -tab.t.front();
  auto h_abs = [&](double x) {
    return side == Side::Right ? inverse_slope_integral(p, 0.0, x) : inverse_slope_integral(p, -x, 0.0);
  };
  std::vector<double> increments;
  double prev = h_abs(std::min(1.0, end));
  for (double cut = 2.0; cut <= end; cut *= 2.0) {
    const double next = h_abs(cut);
    increments.push_back(next - prev);
    prev = next;
  }
  TabulatedTail out{ratio_ruling(increments), kInf, increments};
  if (out.ruling == TailRuling::Converges) {
    const std::size_t k = increments.size();
    const double q = increments[k - 1] / increments[k - 2];
    out.remainder = increments[k - 1] * q / (1.0 - q);
  }
  return out;
}

inline double trigamma_tail(int from) {
  // sum_{n >= from} 1 / n^2
  double s = 0.0;
  int n = from;
  for (; n < from + 64; ++n) s += 1.0 / (static_cast<double>(n) * n);
  const double N = n;
  return s + 1.0 / N + 0.5 / (N * N) + 1.0 / (6.0 * N * N * N);
}

}  // namespace detail

/// h(t) = int_0^t ds / eta'(s), by closed form where available.
inline double h_value(const Profile& p, double t) {
  if (t == 0.0) return 0.0;
  if (const auto* d = std::get_if<Dprs>(&p.family())) {
    (void)d;
    return -std::expm1(-t);
  }
  if (const auto* pl = std::get_if<PowerLaw>(&p.family())) {
    const double al = pl->alpha;
    if (t > 1.0) {
      const double tail = al == 2.0 ? std::log(t) / 4.0
                                    : (std::pow(t, 2.0 - al) - 1.0) / (2.0 * al * (2.0 - al));
      return detail::inverse_slope_integral(p, 0.0, 1.0) + tail;
    }
    if (t < -1.0) {
      return -detail::inverse_slope_integral(p, -1.0, 0.0) -
             (std::pow(-t, al + 2.0) - 1.0) / (al * (al + 2.0));
    }
  }
  if (const auto* e = std::get_if<ExponentialDecay>(&p.family())) {
    const double al = e->alpha;
    const double core = detail::inverse_slope_integral(p, 0.0, 1.0);
    if (t > 1.0) return core + (std::exp(al * t) - std::exp(al)) / al;
    if (t < -1.0) return -core - (std::exp(-al * t) - std::exp(al)) / al;
  }
  if (std::holds_alternative<Staircase>(p.family()) && t < 0.0) return -std::expm1(-t);
  return t > 0.0 ? detail::inverse_slope_integral(p, 0.0, t) : -detail::inverse_slope_integral(p, t, 0.0);
}

/// int_{t0}^inf dt / eta' (Right) or int_{-inf}^{-t0} dt / eta' (Left) for t0 >= 0;
/// nullopt when the tail diverges.
inline std::optional<double> h_tail(const Profile& p, double t0, Side side) {
  if (!(t0 >= 0) || !std::isfinite(t0)) throw Error(ErrorKind::InvalidArgument, "tail start must be >= 0");
  const auto& fam = p.family();
  if (std::holds_alternative<Dprs>(fam)) {
    if (side == Side::Left) return std::nullopt;
    return std::exp(-t0);
  }
  if (const auto* pl = std::get_if<PowerLaw>(&fam)) {
    const double al = pl->alpha;
    if (side == Side::Left || al <= 2.0) return std::nullopt;
    const double from = std::max(t0, 1.0);
    double v = std::pow(from, 2.0 - al) / (2.0 * al * (al - 2.0));
    if (t0 < 1.0) v += detail::inverse_slope_integral(p, t0, 1.0);
    return v;
  }
  if (std::holds_alternative<ExponentialDecay>(fam)) return std::nullopt;
  if (std::holds_alternative<Staircase>(fam)) {
    if (side == Side::Left) return std::nullopt;
    // blocks n <= 8 by quadrature; later blocks are plateaus 1/n^2 up to
    // contributions of order exp(-2^n / 2)
    const double cut = std::ldexp(1.0, 9) - 1.0;
    if (t0 > cut) throw Error(ErrorKind::OutOfSupportedRange, "staircase tail start beyond 511");
    return detail::inverse_slope_integral(p, t0, cut) + detail::trigamma_tail(9);
  }
  if (const auto* sv = std::get_if<SlowlyVarying>(&fam)) {
    if (side == Side::Left) return std::nullopt;
    (void)sv;
    double total = 0.0;
    double lo = t0;
    double width = std::max(1.0, t0);
    for (int k = 0; k < 200; ++k) {
      const double piece = detail::inverse_slope_integral(p, lo, lo + width);
      total += piece;
      if (piece <= 1e-16 * total) return total;
      lo += width;
      width *= 1.5;
    }
    throw Error(ErrorKind::NonConvergence, "slowly varying h tail did not settle");
  }
  const auto& tab = std::get<Tabulated>(fam);
  const auto tail = detail::tabulated_tail(p, tab, side);
  if (tail.ruling == detail::TailRuling::Inconclusive) {
    throw Error(ErrorKind::InconclusiveTail, "tabulated samples end before the tail ratio stabilizes");
  }
  if (tail.ruling == detail::TailRuling::Diverges) return std::nullopt;
  const double end = side == Side::Right ? tab.t.back() : -tab.t.front();
  const double within = side == Side::Right ? detail::inverse_slope_integral(p, t0, end)
                                            : detail::inverse_slope_integral(p, -end, -t0);
  return within + tail.remainder;
}

/// Parabolic iff h is unbounded in both directions.
inline TypeVerdict h_bounds(const Profile& p, const std::vector<double>& cutoffs = {1, 2, 4, 8, 16, 32}) {
  TypeVerdict v{SurfaceType::Parabolic, kInf, -kInf, {}, std::holds_alternative<Tabulated>(p.family())};
  double prev = 0.0;
  for (double c : cutoffs) {
    if (!(c > prev)) throw Error(ErrorKind::InvalidArgument, "cutoffs must be positive and increasing");
    prev = c;
    if (const auto dom = p.domain(); dom && (c > dom->hi || -c < dom->lo)) break;
    v.evidence.push_back({c, h_value(p, c), h_value(p, -c)});
  }
  if (const auto right = h_tail(p, 0.0, Side::Right)) v.h_sup = *right;
  if (const auto left = h_tail(p, 0.0, Side::Left)) v.h_inf = -*left;
  v.verdict = (std::isfinite(v.h_sup) || std::isfinite(v.h_inf)) ? SurfaceType::Hyperbolic
                                                                 : SurfaceType::Parabolic;
  return v;
}

// ---------------------------------------------------------------------------
// lambda_1(B_r)
// ---------------------------------------------------------------------------

struct BallOptions {
  int cells = 4000;
};

inline sturm::WeightedProblem ball_problem(const Profile& p, double r) {
  check_radius(r);
  if (const auto* e = std::get_if<ExponentialDecay>(&p.family()); e && r > 25.0 / e->alpha * (1 + 1e-12)) {
    throw Error(ErrorKind::OutOfSupportedRange,
                "exponential decay balls are capped at r = 25/alpha for double precision");
  }
  if (const auto dom = p.domain(); dom && (r > dom->hi || -r < dom->lo)) {
    throw Error(ErrorKind::OutOfSupportedRange, "ball (-r, r) leaves the profile's domain");
  }
  return sturm::WeightedProblem{Interval(-r, r), [&p](double t) { return p.eta_prime(t); },
                                std::nullopt, sturm::BoundaryCondition::dirichlet()};
}

inline sturm::Mesh ball_mesh(double r, const BallOptions& opt) {
  return sturm::Mesh::uniform(Interval(-r, r), opt.cells);
}

inline sturm::EigenSolution lambda1_ball(const Profile& p, double r, const BallOptions& opt = {}) {
  const auto problem = ball_problem(p, r);
  return sturm::first_eigen_fem(problem, ball_mesh(r, opt));
}

/// (1/4) inf_{|t| <= r} (eta'/eta)^2, exact on the closed-form ends and sampled at
/// 4096 points (plus kinks and +-r) elsewhere.
inline double dprs_bound(const Profile& p, double r) {
  check_radius(r);
  const auto& fam = p.family();
  if (std::holds_alternative<Dprs>(fam)) return 0.25;
  double best = kInf;
  auto consider = [&](double t) {
    const double ratio = p.eta_prime(t) / p.eta(t);
    best = std::min(best, ratio * ratio);
  };
  double sample_lo = -r, sample_hi = r;
  if (const auto* pl = std::get_if<PowerLaw>(&fam); pl && r > 1.0) {
    // eta'/eta = alpha/|t| on both ends
    best = std::min(best, pl->alpha * pl->alpha / (r * r));
    sample_lo = -1.0;
    sample_hi = 1.0;
  } else if (const auto* e = std::get_if<ExponentialDecay>(&fam); e && r > 1.0) {
    // alpha on the left end; decreasing on the right end
    best = std::min(best, e->alpha * e->alpha);
    consider(r);
    sample_lo = -1.0;
    sample_hi = 1.0;
  }
  constexpr int kSamples = 4096;
  for (int i = 0; i < kSamples; ++i) {
    consider(sample_lo + (sample_hi - sample_lo) * i / (kSamples - 1));
  }
  for (double b : p.breakpoints(r)) {
    if (b >= -r && b <= r) consider(b);
  }
  consider(-r);
  consider(r);
  return 0.25 * best;
}

/// Smallest discrete Rayleigh quotient on the ball mesh over three admissible
/// trapezoid/sine test functions. Because it is taken on the same mesh and
/// quadrature as the solver, it bounds the solver's eigenvalue from above.
inline double upper_test_quotient(const Profile& p, double r, const BallOptions& opt = {}) {
  const auto problem = ball_problem(p, r);
  const auto mesh = ball_mesh(r, opt);
  const auto& x = mesh.nodes();
  const double ramp = std::min(1.0, 0.25 * r);
  auto build = [&](auto f) {
    std::vector<double> u(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) u[i] = f(x[i]);
    u.front() = 0.0;
    u.back() = 0.0;
    return u;
  };
  // ramp up on [0, ramp], flat, ramp down on [r - ramp, r]
  auto right_trapezoid = build([&](double t) {
    if (t <= 0.0 || t >= r) return 0.0;
    return std::min({1.0, t / ramp, (r - t) / ramp});
  });
  auto symmetric = build([&](double t) { return std::min(1.0, (r - std::abs(t)) / ramp); });
  auto sine = build([&](double t) {
    return std::sin(std::numbers::pi * (t + r) / (2.0 * r)) / std::sqrt(p.eta_prime(t));
  });
  double best = kInf;
  for (const auto* u : {&right_trapezoid, &symmetric, &sine}) {
    try {
      best = std::min(best, sturm::rayleigh_quotient(*u, problem, mesh));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ZeroDenominator) throw;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Scans and asymptotic estimates
// ---------------------------------------------------------------------------

struct ScanRow {
  double r;
  double lambda1;
  double r2lambda1;
  double dprs_bound;
  double vol_ball;
  double vol_complement;
  double upper;
};

inline unsigned resolve_threads(unsigned requested) {
  unsigned n = requested == 0 ? std::thread::hardware_concurrency() : requested;
  return std::max(1u, n);
}

/// Evaluates every radius (possibly concurrently) and returns rows sorted by r.
/// A failure at some radius is rethrown with the radius named.
inline std::vector<ScanRow> scan(const Profile& p, std::vector<double> radii,
                                 const BallOptions& opt = {}, unsigned threads = 1) {
  std::sort(radii.begin(), radii.end());
  std::vector<ScanRow> rows(radii.size());
  std::vector<std::optional<Error>> failures(radii.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < radii.size(); i = next++) {
      const double r = radii[i];
      try {
        const double lam = lambda1_ball(p, r, opt).lambda;
        rows[i] = ScanRow{r, lam, r * r * lam, dprs_bound(p, r), volume_ball(p, r),
                          volume_complement(p, r), upper_test_quotient(p, r, opt)};
      } catch (const Error& e) {
        failures[i] = Error(e.kind(), "at r=" + std::to_string(r) + ": " + e.what());
      }
    }
  };
  const unsigned n = std::min<unsigned>(resolve_threads(threads), std::max<std::size_t>(1, radii.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& f : failures) {
    if (f) throw *f;
  }
  return rows;
}

enum class Quantity { LambdaStar, LambdaStarUpper, LambdaTilde, NuStar, AlphaStar, AlphaStarUpper };

inline std::string_view to_string(Quantity q) {
  switch (q) {
    case Quantity::LambdaStar: return "LambdaStar";
    case Quantity::LambdaStarUpper: return "LambdaStarUpper";
    case Quantity::LambdaTilde: return "LambdaTilde";
    case Quantity::NuStar: return "NuStar";
    case Quantity::AlphaStar: return "AlphaStar";
    case Quantity::AlphaStarUpper: return "AlphaStarUpper";
  }
  return "?";
}

/// Finite-window proxy for a liminf / limsup as r -> infinity. Always heuristic.
struct AsymptoticEstimate {
  Quantity quantity;
  double value;
  Interval window;
  std::vector<std::pair<double, double>> samples;  // (r, sampled quantity)
};

namespace detail {

inline double trailing_extreme(const std::vector<std::pair<double, double>>& s, bool take_max) {
  double best = take_max ? -kInf : kInf;
  for (std::size_t i = s.size() / 2; i < s.size(); ++i) {
    best = take_max ? std::max(best, s[i].second) : std::min(best, s[i].second);
  }
  return best;
}

/// Local slopes of -log(y) against r between consecutive trailing-half samples.
inline double trailing_decay_rate(const std::vector<std::pair<double, double>>& s, bool take_max) {
  double best = take_max ? -kInf : kInf;
  for (std::size_t i = s.size() / 2; i + 1 < s.size(); ++i) {
    const double slope = -(std::log(s[i + 1].second) - std::log(s[i].second)) / (s[i + 1].first - s[i].first);
    best = take_max ? std::max(best, slope) : std::min(best, slope);
  }
  return best;
}

}  // namespace detail

inline AsymptoticEstimate estimate(const Profile& p, Quantity q, const Interval& window, int samples = 8,
                                   const BallOptions& opt = {}, unsigned threads = 1) {
  if (samples < 6) {
    throw Error(ErrorKind::InsufficientSamples, "estimates need at least 6 radii in the window");
  }
  if (!(window.lo > 0)) throw Error(ErrorKind::InvalidArgument, "estimate window must have r > 0");
  const auto radii = numerics::geometric_grid(window.lo, window.hi, samples);
  AsymptoticEstimate out{q, 0.0, window, {}};
  switch (q) {
    case Quantity::NuStar: {
      for (double r : radii) out.samples.emplace_back(r, volume_ball(p, r));
      out.value = numerics::fit_log_slope(out.samples).slope;
      break;
    }
    case Quantity::AlphaStar:
    case Quantity::AlphaStarUpper: {
      for (double r : radii) {
        const double v = volume_complement(p, r);
        if (!std::isfinite(v)) {
          throw Error(ErrorKind::MeaninglessConstant, "complement volume is infinite for " + p.name());
        }
        out.samples.emplace_back(r, v);
      }
      out.value = detail::trailing_decay_rate(out.samples, q == Quantity::AlphaStarUpper);
      break;
    }
    case Quantity::LambdaStar:
    case Quantity::LambdaStarUpper:
    case Quantity::LambdaTilde: {
      const auto rows = scan(p, radii, opt, threads);
      for (const auto& row : rows) {
        out.samples.emplace_back(row.r, q == Quantity::LambdaTilde ? row.lambda1 : row.r2lambda1);
      }
      out.value = q == Quantity::LambdaTilde
                      ? detail::trailing_decay_rate(out.samples, false)
                      : detail::trailing_extreme(out.samples, q == Quantity::LambdaStarUpper);
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Staircase upper bound
// ---------------------------------------------------------------------------

struct StaircaseRow {
  double r;
  double bound;             // trapezoid quotient bound from closed-form eta
  double bound_quadrature;  // same bound with eta differences by quadrature of eta'
  double envelope;          // e^{-r/2} (log r)^2
};

struct StaircaseReport {
  std::vector<StaircaseRow> rows;
  double fitted_constant;  // max bound / envelope
  bool within_envelope;    // every bound <= fitted_constant * envelope
  SurfaceType verdict;
};

/// The trapezoid test function (0 -> 1 on [0,1], 1 on [1, r-1], 1 -> 0 on [r-1, r])
/// gives lambda_1(B_r) <= (eta(r) - eta(r-1) + eta(1) - eta(0)) / (eta(r-1) - eta(1)).
inline StaircaseReport staircase_checks(const std::vector<double>& radii) {
  const Profile p = Profile::staircase();
  StaircaseReport rep{{}, 0.0, true, h_bounds(p).verdict};
  for (double r : radii) {
    if (!(r >= 16.0)) throw Error(ErrorKind::InvalidArgument, "staircase checks need r >= 16");
    const double num = detail::stair_mass(r - 1.0, r) + detail::stair_mass(0.0, 1.0);
    const double den = detail::stair_mass(1.0, r - 1.0);
    auto mass = [&](double a, double b) {
      double total = 0.0;
      std::vector<double> cuts{a};
      for (double k : p.breakpoints(b)) {
        if (k > a && k < b) cuts.push_back(k);
      }
      cuts.push_back(b);
      std::sort(cuts.begin(), cuts.end());
      for (std::size_t i = 1; i < cuts.size(); ++i) {
        total += numerics::integrate([&](double t) { return p.eta_prime(t); }, Interval(cuts[i - 1], cuts[i]),
                                     Tolerance(0.0, 1e-14, 60));
      }
      return total;
    };
    const double num_q = mass(r - 1.0, r) + mass(0.0, 1.0);
    const double den_q = mass(1.0, r - 1.0);
    const double envelope = std::exp(-0.5 * r) * std::pow(std::log(r), 2);
    rep.rows.push_back({r, num / den, num_q / den_q, envelope});
    rep.fitted_constant = std::max(rep.fitted_constant, (num / den) / envelope);
  }
  for (const auto& row : rep.rows) {
    rep.within_envelope = rep.within_envelope && row.bound <= rep.fitted_constant * row.envelope * (1 + 1e-12);
  }
  return rep;
}

}  // namespace spectral_type::surface
