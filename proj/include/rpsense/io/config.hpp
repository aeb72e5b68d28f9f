/* Copyright 2026 The rpsense Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

// Run configuration: a flat `key = value` text format with dotted sections,
// overridable key by key from the command line. Every key is validated
// before any computation starts; unknown keys are errors.

#include <rpsense/analysis.hpp>
#include <rpsense/yields.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace rpsense {

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config error: " + what) {}
};

enum class SweepFamily { Ball, ZAxis, Mixed };

inline std::string to_string(SweepFamily f) {
  switch (f) {
    case SweepFamily::Ball: return "ball";
    case SweepFamily::ZAxis: return "zaxis";
    case SweepFamily::Mixed: return "mixed";
  }
  return "?";
}

struct InitialSpec {
  /// bloch: rho0 (x) rho0 (x) 1/2 from `bloch`; mixed: 1/8; trivial: the
  /// Zeeman-trivial family with `trivial`; family: one draw from `family`.
  std::string kind = "bloch";
  BlochVector bloch{0.0, 0.0, 1.0};
  TrivialStateParams trivial;
  InitialFamily family = InitialFamily::BallUniform;
};

struct EnvSpec {
  /// mixed: 1/8; bloch: rho0^(x)3 from `bloch`.
  std::string kind = "mixed";
  BlochVector bloch{0.0, 0.0, 1.0};
};

struct RunConfig {
  SensorParams params;
  GridSpec grid;
  int sweep_states = 150;
  SweepFamily sweep_family = SweepFamily::Mixed;
  bool sweep_anchor = true;
  std::uint64_t seed = 1;
  InitialSpec initial;
  EnvSpec env;
  ObservableSet observables;
  double eps_tail = kDefaultEpsTail;
  int n_sub = kDefaultNSub;
  std::string output_dir = "out";
  bool output_svg = true;
  int threads = 1;
  int verify_samples = 100;
  int verify_angles = 100;
  bool verify_fault = false;
  int swap_env_states = 500;
  InitialFamily swap_family = InitialFamily::BallUniform;
  std::string yields_mode = "point";
  FieldAngles yields_angles{0.0, kPi / 2};
  /// Keys given explicitly (file or command line).
  std::set<std::string> explicit_keys;

  bool is_explicit(const std::string& key) const { return explicit_keys.count(key) != 0; }
};

struct ConfigEntry {
  std::string value;
  std::string origin;  // "path:line" or "--flag"
};

using ConfigEntries = std::map<std::string, ConfigEntry>;

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& v, const ConfigEntry& e, const std::string& key) {
  if (v == "pi/2") return kPi / 2;
  if (v == "pi/4") return kPi / 4;
  if (v == "pi") return kPi;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x)) {
    throw ConfigError(e.origin + ": " + key + " expects a number, got '" + v + "'");
  }
  return x;
}

inline long long parse_int(const std::string& v, const ConfigEntry& e, const std::string& key) {
  long long x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || r.ec != std::errc{} || r.ptr != v.data() + v.size()) {
    throw ConfigError(e.origin + ": " + key + " expects an integer, got '" + v + "'");
  }
  return x;
}

inline bool parse_bool(const std::string& v, const ConfigEntry& e, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(e.origin + ": " + key + " expects true/false, got '" + v + "'");
}

}  // namespace detail

inline ConfigEntries parse_config_text(const std::string& text, const std::string& source) {
  ConfigEntries out;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    const std::string origin = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(origin + ": expected 'key = value'");
    const std::string key = detail::trim(std::string_view(t).substr(0, eq));
    const std::string value = detail::trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ConfigError(origin + ": empty key");
    if (out.count(key) != 0) throw ConfigError(origin + ": duplicate key '" + key + "'");
    out[key] = {value, origin};
  }
  return out;
}

inline ConfigEntries read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

namespace detail {

using Setter = std::function<void(RunConfig&, const std::string&, const ConfigEntry&, const std::string&)>;

inline InitialFamily parse_family(const std::string& v, const ConfigEntry& e, const std::string& key) {
  if (v == "ball") return InitialFamily::BallUniform;
  if (v == "zaxis") return InitialFamily::ZAxis;
  throw ConfigError(e.origin + ": " + key + " must be 'ball' or 'zaxis', got '" + v + "'");
}

inline const std::map<std::string, Setter>& config_setters() {
  static const std::map<std::string, Setter> setters = [] {
    std::map<std::string, Setter> s;
    s["params.j_abc"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.params.j_abc = parse_double(v, e, k); };
    s["params.j_se_tau"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.params.j_se_tau = parse_double(v, e, k); };
    s["params.k"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.params.k = parse_double(v, e, k); };
    s["params.gamma_b0"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.params.gamma_b0 = parse_double(v, e, k); };
    s["params.tau_se"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.params.tau_se = parse_double(v, e, k); };
    s["params.tau_ee"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.params.tau_ee = parse_double(v, e, k); };
    s["params.interaction"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string&) {
      try {
        c.params.interaction_kind = interaction_from_string(v);
      } catch (const InvalidInput&) {
        throw ConfigError(e.origin + ": params.interaction must be 'cnot' or 'swap', got '" + v + "'");
      }
    };
    s["grid.n_theta"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.grid.n_theta = static_cast<int>(parse_int(v, e, k)); };
    s["grid.n_phi"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.grid.n_phi = static_cast<int>(parse_int(v, e, k)); };
    s["sweep.n_states"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.sweep_states = static_cast<int>(parse_int(v, e, k)); };
    s["sweep.family"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) {
      if (v == "ball") c.sweep_family = SweepFamily::Ball;
      else if (v == "zaxis") c.sweep_family = SweepFamily::ZAxis;
      else if (v == "mixed") c.sweep_family = SweepFamily::Mixed;
      else throw ConfigError(e.origin + ": " + k + " must be ball, zaxis or mixed, got '" + v + "'");
    };
    s["sweep.anchor"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.sweep_anchor = parse_bool(v, e, k); };
    s["seed"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) {
      const long long x = parse_int(v, e, k);
      if (x < 0) throw ConfigError(e.origin + ": seed must be non-negative");
      c.seed = static_cast<std::uint64_t>(x);
    };
    s["initial.kind"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) {
      if (v != "bloch" && v != "mixed" && v != "trivial" && v != "family") {
        throw ConfigError(e.origin + ": " + k + " must be bloch, mixed, trivial or family, got '" + v + "'");
      }
      c.initial.kind = v;
    };
    s["initial.bloch_x"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.initial.bloch.x = parse_double(v, e, k); };
    s["initial.bloch_y"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.initial.bloch.y = parse_double(v, e, k); };
    s["initial.bloch_z"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.initial.bloch.z = parse_double(v, e, k); };
    s["initial.p_ab"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.initial.trivial.p_ab = parse_double(v, e, k); };
    s["initial.p_ac"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.initial.trivial.p_ac = parse_double(v, e, k); };
    s["initial.p_bc"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.initial.trivial.p_bc = parse_double(v, e, k); };
    s["initial.p_abc"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.initial.trivial.p_abc = parse_double(v, e, k); };
    s["initial.family"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.initial.family = parse_family(v, e, k); };
    s["env.kind"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) {
      if (v != "mixed" && v != "bloch") throw ConfigError(e.origin + ": " + k + " must be mixed or bloch, got '" + v + "'");
      c.env.kind = v;
    };
    s["env.bloch_x"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.env.bloch.x = parse_double(v, e, k); };
    s["env.bloch_y"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.env.bloch.y = parse_double(v, e, k); };
    s["env.bloch_z"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.env.bloch.z = parse_double(v, e, k); };
    s["observables"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) {
      c.observables.kinds.clear();
      if (v == "none" || v.empty()) return;
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = trim(item);
        try {
          const ObservableKind kind = observable_from_string(item);
          if (std::find(c.observables.kinds.begin(), c.observables.kinds.end(), kind) != c.observables.kinds.end()) {
            throw ConfigError(e.origin + ": " + k + " lists '" + item + "' twice");
          }
          c.observables.kinds.push_back(kind);
        } catch (const InvalidInput&) {
          throw ConfigError(e.origin + ": " + k + ": unknown observable '" + item +
                            "' (expected c1_star, mutual, discord, holevo)");
        }
      }
    };
    s["observables.normalize"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.observables.normalize = parse_bool(v, e, k); };
    s["eps_tail"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.eps_tail = parse_double(v, e, k); };
    s["n_sub"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.n_sub = static_cast<int>(parse_int(v, e, k)); };
    s["discord.restarts"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.observables.discord.restarts = static_cast<int>(parse_int(v, e, k)); };
    s["discord.max_iters"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.observables.discord.max_iters = static_cast<int>(parse_int(v, e, k)); };
    s["discord.tol"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.observables.discord.tol = parse_double(v, e, k); };
    s["discord.warm_tol"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.observables.discord.warm_tol = parse_double(v, e, k); };
    s["discord.polish"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.observables.discord.polish = parse_bool(v, e, k); };
    s["output.dir"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string&) {
      if (v.empty()) throw ConfigError(e.origin + ": output.dir must not be empty");
      c.output_dir = v;
    };
    s["output.svg"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.output_svg = parse_bool(v, e, k); };
    s["threads"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.threads = static_cast<int>(parse_int(v, e, k)); };
    s["verify.samples"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.verify_samples = static_cast<int>(parse_int(v, e, k)); };
    s["verify.n_angles"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.verify_angles = static_cast<int>(parse_int(v, e, k)); };
    s["verify.fault"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.verify_fault = parse_bool(v, e, k); };
    s["swap_demo.n_env_states"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.swap_env_states = static_cast<int>(parse_int(v, e, k)); };
    s["swap_demo.family"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.swap_family = parse_family(v, e, k); };
    s["yields.mode"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) {
      if (v != "point" && v != "grid") throw ConfigError(e.origin + ": " + k + " must be point or grid, got '" + v + "'");
      c.yields_mode = v;
    };
    s["yields.theta"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.yields_angles.theta = parse_double(v, e, k); };
    s["yields.phi"] = [](RunConfig& c, const std::string& v, const ConfigEntry& e, const std::string& k) { c.yields_angles.phi = parse_double(v, e, k); };
    return s;
  }();
  return setters;
}

}  // namespace detail

/// Every key the configuration accepts.
inline std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& [k, v] : detail::config_setters()) out.push_back(k);
  return out;
}

/// Range checks that need the whole configuration.
inline void validate_config(const RunConfig& c) {
  try {
    c.params.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("params: ") + e.what());
  }
  if (c.grid.n_theta < 4) throw ConfigError("grid.n_theta must be >= 4");
  if (c.grid.n_phi < 3) throw ConfigError("grid.n_phi must be >= 3");
  if (c.sweep_states < 1) throw ConfigError("sweep.n_states must be >= 1");
  if (!(c.eps_tail > 0.0 && c.eps_tail < 1.0)) throw ConfigError("eps_tail must lie in (0, 1)");
  if (c.n_sub < 1) throw ConfigError("n_sub must be >= 1");
  if (c.observables.discord.restarts < 1) throw ConfigError("discord.restarts must be >= 1");
  if (c.observables.discord.max_iters < 1) throw ConfigError("discord.max_iters must be >= 1");
  if (!(c.observables.discord.tol > 0.0)) throw ConfigError("discord.tol must be positive");
  if (!(c.observables.discord.warm_tol > 0.0)) throw ConfigError("discord.warm_tol must be positive");
  if (c.threads < 1) throw ConfigError("threads must be >= 1");
  if (c.verify_samples < 1) throw ConfigError("verify.samples must be >= 1");
  if (c.verify_angles < 6) throw ConfigError("verify.n_angles must be >= 6");
  if (c.swap_env_states < 0) throw ConfigError("swap_demo.n_env_states must be >= 0");
  if (c.initial.bloch.norm() > 1.0 + 1e-12) throw ConfigError("initial Bloch vector is longer than 1");
  if (c.env.bloch.norm() > 1.0 + 1e-12) throw ConfigError("environment Bloch vector is longer than 1");
  if (c.initial.kind == "trivial") {
    try {
      (void)trivial_state(c.initial.trivial);
    } catch (const InvalidInput& e) {
      throw ConfigError(std::string("initial.p_*: ") + e.what());
    }
  }
}

/// Applies file entries, then overrides (later wins), then validates.
inline RunConfig build_config(const ConfigEntries& file, const ConfigEntries& overrides) {
  RunConfig c;
  const auto& setters = detail::config_setters();
  for (const ConfigEntries* layer : {&file, &overrides}) {
    for (const auto& [key, entry] : *layer) {
      auto it = setters.find(key);
      if (it == setters.end()) throw ConfigError(entry.origin + ": unknown key '" + key + "'");
      it->second(c, entry.value, entry, key);
      c.explicit_keys.insert(key);
    }
  }
  validate_config(c);
  return c;
}

namespace detail {

inline std::string fmt17(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

/// Canonical text of every setting that affects results. Thread count and
/// output location are excluded so they never change output bytes.
inline std::string canonical_config(const RunConfig& c) {
  using detail::fmt17;
  std::ostringstream os;
  auto kv = [&os](const std::string& k, const std::string& v) { os << k << '=' << v << '\n'; };
  kv("discord.max_iters", std::to_string(c.observables.discord.max_iters));
  kv("discord.polish", c.observables.discord.polish ? "true" : "false");
  kv("discord.restarts", std::to_string(c.observables.discord.restarts));
  kv("discord.tol", fmt17(c.observables.discord.tol));
  kv("discord.warm_tol", fmt17(c.observables.discord.warm_tol));
  kv("env.bloch", fmt17(c.env.bloch.x) + "," + fmt17(c.env.bloch.y) + "," + fmt17(c.env.bloch.z));
  kv("env.kind", c.env.kind);
  kv("eps_tail", fmt17(c.eps_tail));
  kv("grid", std::to_string(c.grid.n_theta) + "x" + std::to_string(c.grid.n_phi));
  kv("initial.bloch", fmt17(c.initial.bloch.x) + "," + fmt17(c.initial.bloch.y) + "," + fmt17(c.initial.bloch.z));
  kv("initial.family", to_string(c.initial.family));
  kv("initial.kind", c.initial.kind);
  kv("initial.trivial", fmt17(c.initial.trivial.p_ab) + "," + fmt17(c.initial.trivial.p_ac) + "," +
                            fmt17(c.initial.trivial.p_bc) + "," + fmt17(c.initial.trivial.p_abc));
  kv("n_sub", std::to_string(c.n_sub));
  std::string obs;
  for (const auto& n : c.observables.names()) obs += (obs.empty() ? "" : ",") + n;
  kv("observables", obs);
  kv("observables.normalize", c.observables.normalize ? "true" : "false");
  kv("params.gamma_b0", fmt17(c.params.gamma_b0));
  kv("params.interaction", to_string(c.params.interaction_kind));
  kv("params.j_abc", fmt17(c.params.j_abc));
  kv("params.j_se_tau", fmt17(c.params.j_se_tau));
  kv("params.k", fmt17(c.params.k));
  kv("params.tau_ee", fmt17(c.params.tau_ee));
  kv("params.tau_se", fmt17(c.params.tau_se));
  kv("seed", std::to_string(c.seed));
  kv("swap_demo", std::to_string(c.swap_env_states) + "," + to_string(c.swap_family));
  kv("sweep", std::to_string(c.sweep_states) + "," + to_string(c.sweep_family) + "," + (c.sweep_anchor ? "anchor" : "noanchor"));
  kv("verify", std::to_string(c.verify_samples) + "," + std::to_string(c.verify_angles) + "," + (c.verify_fault ? "fault" : "clean"));
  kv("yields", c.yields_mode + "," + fmt17(c.yields_angles.theta) + "," + fmt17(c.yields_angles.phi));
  return os.str();
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string config_hash(const RunConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical_config(c))));
  return buf;
}

}  // namespace rpsense
