#pragma once

// Profile configuration: line-oriented key=value files, a two-column CSV loader
// for tabulated profiles, and layered settings (defaults < file < flags).

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "spectral_type/error.hpp"
#include "spectral_type/surface.hpp"

namespace spectral_type::config {

enum class Source { Default, File, Flag };

inline std::string_view to_string(Source s) {
  switch (s) {
    case Source::Default: return "default";
    case Source::File: return "file";
    case Source::Flag: return "flag";
  }
  return "?";
}

struct Setting {
  std::string value;
  Source source;
};

/// Ordered key -> value store where later layers override earlier ones.
class Settings {
 public:
  void set(const std::string& key, const std::string& value, Source source) {
    auto it = values_.find(key);
    if (it == values_.end() || static_cast<int>(source) >= static_cast<int>(it->second.source)) {
      values_[key] = Setting{value, source};
    }
  }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw Error(ErrorKind::InvalidArgument, "missing setting '" + key + "'");
    return it->second.value;
  }
  double number(const std::string& key) const {
    const std::string& text = get(key);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != text.size() || !std::isfinite(v)) {
      throw Error(ErrorKind::InvalidArgument, "setting '" + key + "' is not a finite number: '" + text + "'");
    }
    return v;
  }
  const std::map<std::string, Setting>& all() const { return values_; }

 private:
  std::map<std::string, Setting> values_;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
inline std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::InvalidArgument, "config line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw Error(ErrorKind::InvalidArgument, "config line " + std::to_string(lineno) + ": empty key or value");
    }
    if (out.count(key)) {
      throw Error(ErrorKind::InvalidArgument, "config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    out[key] = value;
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Table {
  std::vector<double> t;
  std::vector<double> eta_prime;
};

/// Two-column CSV (t, eta_prime). A non-numeric first line is taken as a header.
inline Table parse_table_csv(const std::string& text) {
  Table tab;
  std::istringstream in(text);
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw Error(ErrorKind::InvalidArgument, "csv line " + std::to_string(lineno) + ": expected two columns");
    }
    const std::string a = detail::trim(line.substr(0, comma));
    const std::string b = detail::trim(line.substr(comma + 1));
    double x = 0, y = 0;
    std::size_t ua = 0, ub = 0;
    try {
      x = std::stod(a, &ua);
      y = std::stod(b, &ub);
    } catch (const std::exception&) {
      ua = ub = 0;
    }
    if (ua != a.size() || ub != b.size() || a.empty() || b.empty()) {
      if (tab.t.empty() && lineno == 1) continue;  // header
      throw Error(ErrorKind::InvalidArgument, "csv line " + std::to_string(lineno) + ": non-numeric value");
    }
    if (!tab.t.empty() && !(x > tab.t.back())) {
      throw Error(ErrorKind::InvalidArgument, "csv line " + std::to_string(lineno) + ": t must be strictly increasing");
    }
    tab.t.push_back(x);
    tab.eta_prime.push_back(y);
  }
  return tab;
}

inline surface::SlowChoice parse_slow_choice(const std::string& s) {
  if (s == "log_power") return surface::SlowChoice::LogPower;
  if (s == "power") return surface::SlowChoice::Power;
  if (s == "log_log") return surface::SlowChoice::LogLog;
  throw Error(ErrorKind::InvalidArgument, "mu_choice must be log_power|power|log_log, got '" + s + "'");
}

/// Builds a Profile from settings. Relative csv paths resolve against `base`.
inline surface::Profile make_profile(const Settings& s, const std::filesystem::path& base = {}) {
  const std::string& family = s.get("family");
  if (family == "power_law") return surface::Profile::power_law(s.number("alpha"));
  if (family == "exp_decay") return surface::Profile::exponential_decay(s.number("alpha"));
  if (family == "dprs") return surface::Profile::dprs();
  if (family == "staircase") return surface::Profile::staircase();
  if (family == "slowly_varying") {
    const auto choice = parse_slow_choice(s.get("mu_choice"));
    const char* key = choice == surface::SlowChoice::LogPower ? "beta"
                      : choice == surface::SlowChoice::Power  ? "alpha"
                                                              : "gamma";
    return surface::Profile::slowly_varying(choice, s.number(key));
  }
  if (family == "tabulated") {
    std::filesystem::path csv = s.get("csv");
    if (csv.is_relative() && !base.empty()) csv = base / csv;
    auto tab = parse_table_csv(read_file(csv));
    const double eta0 = s.has("eta0") ? s.number("eta0") : 0.0;
    return surface::Profile::tabulated(std::move(tab.t), std::move(tab.eta_prime), eta0);
  }
  throw Error(ErrorKind::InvalidArgument,
              "family must be power_law|exp_decay|dprs|staircase|slowly_varying|tabulated, got '" + family + "'");
}

}  // namespace spectral_type::config
