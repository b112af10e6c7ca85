// spectral-type: command-line front end. Every command writes plain text or CSV to
// stdout (or --out); numbers use 12 significant digits so outputs diff cleanly.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spectral_type/spectral_type.hpp"

namespace st = spectral_type;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kBadArguments = 2, kSolverFailure = 3, kSemanticMisuse = 4, kInvariant = 5 };

int exit_code(st::ErrorKind kind) {
  using K = st::ErrorKind;
  switch (kind) {
    case K::InvalidArgument:
    case K::InvalidBracket:
    case K::InsufficientSamples:
    case K::OutOfSupportedRange: return kBadArguments;
    case K::MeaninglessConstant: return kSemanticMisuse;
    case K::InvariantViolation: return kInvariant;
    default: return kSolverFailure;
  }
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.11e", x);
  return buf;
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Common {
  bool no_banner = false;
  std::string out;
  unsigned threads = 0;
};

/// Settings shared by the profile-driven commands, layered defaults < file < flags.
struct ProfileFlags {
  std::string config;
  std::optional<std::string> family, mu_choice, csv;
  std::optional<double> alpha, beta, gamma, eta0;

  void attach(CLI::App* app) {
    app->add_option("--profile", config, "profile config file (key=value lines)")->check(CLI::ExistingFile);
    app->add_option("--family", family, "power_law|exp_decay|dprs|staircase|slowly_varying|tabulated");
    app->add_option("--alpha", alpha, "power-law / decay exponent, or the power choice of mu");
    app->add_option("--beta", beta, "log_power exponent");
    app->add_option("--gamma", gamma, "log_log exponent");
    app->add_option("--mu-choice", mu_choice, "log_power|power|log_log");
    app->add_option("--csv", csv, "tabulated profile CSV (t, eta_prime)");
    app->add_option("--eta0", eta0, "eta at the first tabulated node");
  }

  void layer(st::config::Settings& s) const {
    using st::config::Source;
    s.set("family", "dprs", Source::Default);
    s.set("alpha", "3", Source::Default);
    s.set("beta", "1", Source::Default);
    s.set("gamma", "1", Source::Default);
    s.set("mu_choice", "log_power", Source::Default);
    s.set("eta0", "0", Source::Default);
    if (!config.empty()) {
      for (const auto& [k, v] : st::config::parse_config_text(st::config::read_file(config))) {
        s.set(k, v, Source::File);
      }
    }
    auto flag = [&](const char* key, const auto& v) {
      if (!v) return;
      if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, std::string>) {
        s.set(key, *v, Source::Flag);
      } else {
        std::ostringstream ss;
        ss.precision(17);
        ss << *v;
        s.set(key, ss.str(), Source::Flag);
      }
    };
    flag("family", family);
    flag("alpha", alpha);
    flag("beta", beta);
    flag("gamma", gamma);
    flag("mu_choice", mu_choice);
    flag("csv", csv);
    flag("eta0", eta0);
  }

  fs::path base() const { return config.empty() ? fs::path{} : fs::path(config).parent_path(); }
};

std::string banner(const std::string& command, const st::config::Settings& s) {
  std::string b = "# spectral-type " + command + " " + timestamp() + "\n";
  for (const auto& [k, v] : s.all()) {
    b += "# " + k + "=" + v.value + " (" + std::string(st::config::to_string(v.source)) + ")\n";
  }
  return b;
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw st::Error(st::ErrorKind::InvalidArgument, "cannot write " + c.out);
  f << text;
}

unsigned thread_budget(unsigned requested) {
  unsigned n = st::surface::resolve_threads(requested);
  if (const char* env = std::getenv("SPECTRAL_TYPE_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || cap < 1) {
      throw st::Error(st::ErrorKind::InvalidArgument, "SPECTRAL_TYPE_THREADS must be a positive integer");
    }
    n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

void require_positive(double v, const char* what) {
  if (!(v > 0) || !std::isfinite(v)) {
    throw st::Error(st::ErrorKind::InvalidArgument, std::string(what) + " must be positive");
  }
}

// --- commands ---

struct BesselArgs {
  std::optional<double> nu, mu;
};

int cmd_bessel(const Common& c, const BesselArgs& a) {
  std::string text;
  if (a.nu) {
    const double j = st::special::first_zero(st::special::BesselOrder{*a.nu});
    text = "nu,j\n" + fmt(*a.nu) + "," + fmt(j) + "\n";
  } else {
    const auto ec = st::special::lambda_mu(st::special::DimensionParam{*a.mu});
    text = "mu,j,lambda\n" + fmt(*a.mu) + "," + fmt(ec.j) + "," + fmt(ec.lambda) + "\n";
  }
  emit(c, text);
  return kOk;
}

/// Flag if any of the named options was given on the command line, else Default.
st::config::Source source_of(const CLI::App* cmd, std::initializer_list<const char*> names) {
  for (const char* n : names) {
    if (cmd && cmd->get_option(n)->count() > 0) return st::config::Source::Flag;
  }
  return st::config::Source::Default;
}

struct ScanArgs {
  const CLI::App* cmd = nullptr;
  std::vector<double> radii;
  double r_min = 4, r_max = 16;
  int points = 3;
  int cells = 4000;
};

int cmd_scan(const Common& c, const ProfileFlags& pf, const ScanArgs& a) {
  st::config::Settings s;
  pf.layer(s);
  using st::config::Source;
  std::vector<double> radii = a.radii;
  if (radii.empty()) {
    require_positive(a.r_min, "--r-min");
    if (!(a.r_max > a.r_min) || a.points < 2) {
      throw st::Error(st::ErrorKind::InvalidArgument, "need --r-max > --r-min and --points >= 2");
    }
    radii = st::numerics::geometric_grid(a.r_min, a.r_max, a.points);
  }
  for (double r : radii) require_positive(r, "radius");
  if (a.cells < 18) throw st::Error(st::ErrorKind::InvalidArgument, "--cells must be >= 18");
  std::string list;
  for (double r : radii) list += (list.empty() ? "" : ",") + fmt(r);
  s.set("radii", list, source_of(a.cmd, {"--r", "--r-min", "--r-max", "--points"}));
  s.set("cells", std::to_string(a.cells), source_of(a.cmd, {"--cells"}));

  const auto profile = st::config::make_profile(s, pf.base());
  const auto rows = st::surface::scan(profile, radii, {a.cells}, thread_budget(c.threads));
  std::string text = c.no_banner ? "" : banner("scan", s);
  text += "r,lambda1,r2lambda1,dprs_bound,vol_ball,vol_complement\n";
  for (const auto& row : rows) {
    // the sandwich dprs_bound <= lambda1 <= upper is checked before anything is written
    const double slack = 1e-10 * row.lambda1;
    if (!(row.dprs_bound <= row.lambda1 + slack) || !(row.lambda1 <= row.upper + slack)) {
      throw st::Error(st::ErrorKind::InvariantViolation,
                      "sandwich dprs_bound <= lambda1 <= upper violated at r=" + fmt(row.r) + ": " +
                          fmt(row.dprs_bound) + " / " + fmt(row.lambda1) + " / " + fmt(row.upper));
    }
    text += fmt(row.r) + "," + fmt(row.lambda1) + "," + fmt(row.r2lambda1) + "," + fmt(row.dprs_bound) + "," +
            fmt(row.vol_ball) + "," + fmt(row.vol_complement) + "\n";
  }
  emit(c, text);
  return kOk;
}

struct AsymptoticsArgs {
  const CLI::App* cmd = nullptr;
  double r_min = 8, r_max = 64;
  int samples = 8;
  int cells = 4000;
};

int cmd_asymptotics(const Common& c, const ProfileFlags& pf, const AsymptoticsArgs& a) {
  using st::surface::Quantity;
  st::config::Settings s;
  pf.layer(s);
  require_positive(a.r_min, "--r-min");
  if (!(a.r_max > a.r_min)) throw st::Error(st::ErrorKind::InvalidArgument, "need --r-max > --r-min");
  s.set("window", fmt(a.r_min) + ".." + fmt(a.r_max), source_of(a.cmd, {"--r-min", "--r-max"}));
  s.set("samples", std::to_string(a.samples), source_of(a.cmd, {"--samples"}));
  const auto profile = st::config::make_profile(s, pf.base());
  const st::numerics::Interval window(a.r_min, a.r_max);
  const unsigned threads = thread_budget(c.threads);

  std::string text = c.no_banner ? "" : banner("asymptotics", s);
  text += "quantity,value,window_lo,window_hi,samples,note\n";
  for (Quantity q : {Quantity::LambdaStar, Quantity::LambdaStarUpper, Quantity::LambdaTilde, Quantity::NuStar,
                     Quantity::AlphaStar, Quantity::AlphaStarUpper}) {
    const std::string name(st::surface::to_string(q));
    try {
      const auto e = st::surface::estimate(profile, q, window, a.samples, {a.cells}, threads);
      std::string note = "finite-window heuristic";
      if (q == Quantity::LambdaStar || q == Quantity::LambdaStarUpper) {
        bool increasing = true;
        for (std::size_t i = 1; i < e.samples.size(); ++i) {
          increasing = increasing && e.samples[i].second > e.samples[i - 1].second;
        }
        if (increasing && e.samples.back().second > 1e3) note += "; consistent with Lambda_*=+inf";
      }
      text += name + "," + fmt(e.value) + "," + fmt(e.window.lo) + "," + fmt(e.window.hi) + "," +
              std::to_string(e.samples.size()) + "," + note + "\n";
    } catch (const st::Error& e) {
      if (e.kind() != st::ErrorKind::MeaninglessConstant) throw;
      text += name + ",nan," + fmt(a.r_min) + "," + fmt(a.r_max) + ",0,not applicable: " + e.what() + "\n";
    }
  }
  emit(c, text);
  return kOk;
}

int cmd_type(const Common& c, const ProfileFlags& pf) {
  st::config::Settings s;
  pf.layer(s);
  const auto profile = st::config::make_profile(s, pf.base());
  const auto v = st::surface::h_bounds(profile);
  std::string text = c.no_banner ? "" : banner("type", s);
  text += "verdict=" + std::string(st::surface::to_string(v.verdict)) + " h_sup=" + fmt(v.h_sup) +
          " h_inf=" + fmt(v.h_inf) + (v.heuristic ? " (ratio-test heuristic)" : "") + "\n";
  text += "cutoff,h_plus,h_minus\n";
  for (const auto& e : v.evidence) text += fmt(e.cutoff) + "," + fmt(e.h_plus) + "," + fmt(e.h_minus) + "\n";
  emit(c, text);
  return kOk;
}

struct HardyArgs {
  std::optional<int> euclidean;
  bool check_ball = false;
  int n = 3;
  double r = 1.0;
  double radius = 10.0;
  int cells = 8000;
  std::optional<double> epsilon;
};

int cmd_hardy(const Common& c, const HardyArgs& a) {
  std::string text;
  if (a.check_ball) {
    const auto rep = st::hardy::check_prop17(a.n, a.r, a.cells);
    text = "n,r,lambda1,lambda1_r2,lambda_n,relative_error,status\n" + std::to_string(rep.n) + "," + fmt(rep.r) +
           "," + fmt(rep.lambda) + "," + fmt(rep.lambda_times_r2) + "," + fmt(rep.lambda_n) + "," +
           fmt(rep.relative_error) + "," + (rep.pass ? "PASS" : "FAIL") + "\n";
    emit(c, text);
    return rep.pass ? kOk : kInvariant;
  }
  if (!a.euclidean) throw st::Error(st::ErrorKind::InvalidArgument, "hardy needs --euclidean N or --check-prop17");
  require_positive(a.radius, "--radius");
  const auto model = st::hardy::RadialModel::euclidean(*a.euclidean);
  const auto rep = st::hardy::hardy_infimum(model, st::numerics::Interval(0.0, a.radius), a.cells, a.epsilon);
  text = "n,support_hi,cells,epsilon,infimum,sharp_constant\n" + std::to_string(*a.euclidean) + "," +
         fmt(a.radius) + "," + std::to_string(a.cells) + "," + fmt(rep.epsilon) + "," +
         fmt(rep.discrete_infimum) + "," + fmt(rep.sharp_constant) + "\n";
  emit(c, text);
  return kOk;
}

/// Fixed configurations for the psi identities; the residual bound is 1e-8.
int cmd_identities(const Common& c) {
  struct Case {
    double mu, a, b;
  };
  const Case cases[] = {{2, 0, 1}, {3, 0.1, 0.9}, {4, 0, 0.5}, {2.5, 0.2, 1}, {6, 0.3, 0.7},
                        {10, 0, 1}, {0.5, 0.05, 0.6}, {20, 0.1, 1}, {1, 0, 1}, {7.5, 0.4, 0.95}};
  std::string text = "identity,mu,a,b,residual,status\n";
  bool ok = true;
  for (const auto& k : cases) {
    const double res = st::special::check_lemma21(st::special::DimensionParam{k.mu}, k.a, k.b);
    ok = ok && res < 1e-8;
    text += "energy," + fmt(k.mu) + "," + fmt(k.a) + "," + fmt(k.b) + "," + fmt(res) + "," +
            (res < 1e-8 ? "PASS" : "FAIL") + "\n";
  }
  for (const auto& k : cases) {
    if (!(k.mu > 2.0)) continue;
    const double res = st::special::check_lemma23(st::special::DimensionParam{k.mu}, k.b);
    ok = ok && res < 1e-8;
    text += "hardy," + fmt(k.mu) + "," + fmt(0.0) + "," + fmt(k.b) + "," + fmt(res) + "," +
            (res < 1e-8 ? "PASS" : "FAIL") + "\n";
  }
  emit(c, text);
  return ok ? kOk : kInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral and type computations on radial models and surfaces of revolution", "spectral-type"};
  app.require_subcommand(1);
  Common common;
  app.add_flag("--no-banner", common.no_banner, "omit the timestamped banner comment");
  app.add_option("--out", common.out, "write output to this path instead of stdout");
  app.add_option("--threads", common.threads, "worker threads (0 = hardware; capped by SPECTRAL_TYPE_THREADS)");
  app.fallthrough();

  BesselArgs bessel;
  auto* cb = app.add_subcommand("bessel", "first Bessel zero j_nu, or (mu, j, lambda_mu)");
  auto* nu_opt = cb->add_option("--nu", bessel.nu, "Bessel order");
  auto* mu_opt = cb->add_option("--mu", bessel.mu, "dimension parameter mu");
  nu_opt->excludes(mu_opt);
  cb->require_option(1);

  ProfileFlags scan_profile, asym_profile, type_profile;
  ScanArgs scan;
  auto* cs = app.add_subcommand("scan", "lambda_1(B_r), bounds and volumes over a radius grid (CSV)");
  scan_profile.attach(cs);
  scan.cmd = cs;
  cs->add_option("--r", scan.radii, "explicit radii")->delimiter(',');
  cs->add_option("--r-min", scan.r_min, "smallest radius of the geometric grid");
  cs->add_option("--r-max", scan.r_max, "largest radius of the geometric grid");
  cs->add_option("--points", scan.points, "grid points");
  cs->add_option("--cells", scan.cells, "finite-element cells per ball");

  AsymptoticsArgs asym;
  auto* ca = app.add_subcommand("asymptotics", "finite-window estimates of the asymptotic constants");
  asym_profile.attach(ca);
  asym.cmd = ca;
  ca->add_option("--r-min", asym.r_min, "window start");
  ca->add_option("--r-max", asym.r_max, "window end");
  ca->add_option("--samples", asym.samples, "radii in the window (>= 6)");
  ca->add_option("--cells", asym.cells, "finite-element cells per ball");

  auto* ct = app.add_subcommand("type", "parabolic / hyperbolic verdict from the h-integral");
  type_profile.attach(ct);

  HardyArgs hardy;
  auto* ch = app.add_subcommand("hardy", "discrete Hardy infimum on a Euclidean radial model");
  ch->add_option("--euclidean", hardy.euclidean, "dimension n");
  ch->add_flag("--check-prop17", hardy.check_ball, "check lambda_1(B(0,r)) r^2 = lambda_n");
  ch->add_option("--n", hardy.n, "dimension for --check-prop17");
  ch->add_option("--r", hardy.r, "ball radius for --check-prop17");
  ch->add_option("--radius", hardy.radius, "support (0, radius) for --euclidean");
  ch->add_option("--cells", hardy.cells, "finite-element cells");
  ch->add_option("--epsilon", hardy.epsilon, "regularization of 1/rho^2 (default 1e-3 * radius)");

  auto* ci = app.add_subcommand("identities", "residual suite for the psi identities");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kBadArguments;
  }

  try {
    if (cb->parsed()) return cmd_bessel(common, bessel);
    if (cs->parsed()) return cmd_scan(common, scan_profile, scan);
    if (ca->parsed()) return cmd_asymptotics(common, asym_profile, asym);
    if (ct->parsed()) return cmd_type(common, type_profile);
    if (ch->parsed()) return cmd_hardy(common, hardy);
    if (ci->parsed()) return cmd_identities(common);
  } catch (const st::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverFailure;
  }
  return kBadArguments;
}
