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

// Experiment drivers behind the command-line subcommands. Each takes a
// validated RunConfig, writes its files under output_dir and returns an exit
// code. Work is spread over threads by index; files are written afterwards
// by a single writer, so output bytes do not depend on the thread count.

#include <rpsense/analysis.hpp>
#include <rpsense/io/config.hpp>
#include <rpsense/io/csv.hpp>
#include <rpsense/io/svg.hpp>
#include <rpsense/parallel.hpp>
#include <rpsense/yields.hpp>

#include <filesystem>
#include <iomanip>
#include <ostream>

namespace rpsense {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitNumerical = 2, kExitVerification = 3 };

struct CommandOutcome {
  int exit_code = kExitOk;
  std::vector<std::string> files;
};

/// A run finished but broke one of its own consistency checks.
class InvariantViolation : public NumericalError {
 public:
  explicit InvariantViolation(const std::string& what) : NumericalError("invariant violated: " + what) {}
};

namespace detail {

inline constexpr double kYieldSlack = 1e-9;
inline constexpr double kFixedPointTol = 1e-9;

inline std::string out_path(const RunConfig& c, const std::string& name) {
  std::filesystem::create_directories(c.output_dir);
  return (std::filesystem::path(c.output_dir) / name).string();
}

inline void check_yield_range(double y, const std::string& what) {
  if (!(y >= -kYieldSlack && y <= 1.0 + kYieldSlack)) {
    throw InvariantViolation(what + " yield " + format_double(y) + " outside [0, 1]");
  }
}

inline DensityMatrix environment_state(const RunConfig& c) {
  if (c.env.kind == "mixed") return DensityMatrix::maximally_mixed(kEnvDim);
  const DensityMatrix q = qubit_from_bloch(c.env.bloch);
  return tensor(tensor(q, q), q);
}

struct StateRow {
  std::uint64_t seed = 0;
  std::string family;
  BlochVector bloch;
  DensityMatrix state = DensityMatrix::maximally_mixed(kSystemDim);
};

/// Row 0 is the maximally mixed anchor when enabled; row i >= 1 is a draw
/// seeded with derive_seed(seed, i). Mixed sweeps alternate z-axis (odd
/// rows) and ball (even rows).
inline std::vector<StateRow> sweep_rows(const RunConfig& c) {
  std::vector<StateRow> rows;
  for (int i = 0; i < c.sweep_states; ++i) {
    StateRow r;
    r.seed = derive_seed(c.seed, static_cast<std::uint64_t>(i));
    if (i == 0 && c.sweep_anchor) {
      r.family = "anchor";
      r.bloch = {0.0, 0.0, 0.0};
    } else {
      InitialFamily fam = c.sweep_family == SweepFamily::ZAxis ? InitialFamily::ZAxis : InitialFamily::BallUniform;
      if (c.sweep_family == SweepFamily::Mixed) fam = (i % 2 == 1) ? InitialFamily::ZAxis : InitialFamily::BallUniform;
      Rng rng(r.seed);
      r.family = to_string(fam);
      r.bloch = draw_bloch(rng, fam);
    }
    r.state = system_state_from_bloch(r.bloch);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline StateRow initial_row(const RunConfig& c) {
  StateRow r;
  r.seed = c.seed;
  r.family = c.initial.kind;
  if (c.initial.kind == "mixed") return r;
  if (c.initial.kind == "trivial") {
    r.state = trivial_state(c.initial.trivial);
    return r;
  }
  if (c.initial.kind == "family") {
    Rng rng(derive_seed(c.seed, 0));
    r.bloch = draw_bloch(rng, c.initial.family);
    r.family = to_string(c.initial.family);
  } else {
    r.bloch = c.initial.bloch;
  }
  r.state = system_state_from_bloch(r.bloch);
  return r;
}

inline ScanOptions scan_options(const RunConfig& c) {
  ScanOptions o;
  o.eps_tail = c.eps_tail;
  o.n_sub = c.n_sub;
  o.threads = c.threads;
  o.observables = c.observables;
  return o;
}

/// Orientation average with the grid quadrature (no divisor checks).
inline double grid_mean(const std::vector<double>& v, const GridSpec& g) {
  const auto w = grid_weights(g);
  double m = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) m += w[i] * v[i];
  return m;
}

inline double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

/// Weighted yields are linear in the trajectory, so I = D + chi carries over.
inline void check_reassembly(const ObservableSet& set, const std::vector<double>& values, const std::string& where) {
  int im = -1, id = -1, ih = -1;
  for (std::size_t i = 0; i < set.kinds.size(); ++i) {
    if (set.kinds[i] == ObservableKind::Mutual) im = static_cast<int>(i);
    if (set.kinds[i] == ObservableKind::Discord) id = static_cast<int>(i);
    if (set.kinds[i] == ObservableKind::Holevo) ih = static_cast<int>(i);
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw InvariantViolation(where + ": non-finite " + set.names()[i] + " yield");
  }
  if (id >= 0 && values[static_cast<std::size_t>(id)] < -1e-12) {
    throw InvariantViolation(where + ": negative discord yield");
  }
  if (im >= 0 && id >= 0 && ih >= 0) {
    const double gap = values[static_cast<std::size_t>(im)] - values[static_cast<std::size_t>(id)] -
                       values[static_cast<std::size_t>(ih)];
    if (std::abs(gap) > 1e-9) throw InvariantViolation(where + ": mutual != discord + holevo (" + format_double(gap) + ")");
  }
}

inline std::vector<std::string> suffixed(const std::vector<std::string>& names, const std::string& suffix) {
  std::vector<std::string> out;
  for (const auto& n : names) out.push_back(n + suffix);
  return out;
}

inline std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace detail

inline CommandOutcome cmd_scan(const RunConfig& c, std::ostream& log) {
  const detail::StateRow row = detail::initial_row(c);
  const ScanResult scan = angle_scan(c.params, row.state, detail::environment_state(c), c.grid, detail::scan_options(c));
  for (const auto& p : scan.points) detail::check_yield_range(p.yield, "scan");
  const Anisotropy an = anisotropy(scan);
  if (!(an.ra >= 0.0)) throw InvariantViolation("negative relative anisotropy");

  const auto names = c.observables.names();
  CsvTable table(detail::concat({"theta", "phi", "yield", "delta_flag"}, detail::suffixed(names, "_yield")));
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    const auto& p = scan.points[i];
    detail::check_reassembly(c.observables, p.observables, "scan");
    // extremes are only marked when the scan is not flat to round-off
    const bool signal = an.delta > detail::kFixedPointTol;
    const int flag = signal && i == an.argmax ? 1 : (signal && i == an.argmin ? -1 : 0);
    std::vector<CsvTable::Cell> cells{p.angles.theta, p.angles.phi, p.yield, flag};
    for (double v : p.observables) cells.emplace_back(v);
    table.add(std::move(cells));
  }
  CsvTable summary(detail::concat({"delta", "ra", "mean", "objective", "theta_max", "phi_max", "theta_min", "phi_min"},
                                  detail::suffixed(names, "_mean")));
  std::vector<CsvTable::Cell> cells{an.delta,
                                    an.ra,
                                    an.mean,
                                    an.objective,
                                    scan.points[an.argmax].angles.theta,
                                    scan.points[an.argmax].angles.phi,
                                    scan.points[an.argmin].angles.theta,
                                    scan.points[an.argmin].angles.phi};
  for (std::size_t i = 0; i < names.size(); ++i) cells.emplace_back(detail::grid_mean(scan.observable(i), c.grid));
  summary.add(std::move(cells));

  CommandOutcome out;
  const std::string header = provenance_header(c, "scan");
  out.files.push_back(detail::out_path(c, "scan.csv"));
  write_text_file(out.files.back(), table.str(header));
  out.files.push_back(detail::out_path(c, "scan_summary.csv"));
  write_text_file(out.files.back(), summary.str(header));
  log << "scan: " << scan.points.size() << " orientations, delta=" << format_double(an.delta)
      << " ra=" << format_double(an.ra) << " mean=" << format_double(an.mean) << '\n';
  return out;
}

inline CommandOutcome cmd_sweep(const RunConfig& c, std::ostream& log) {
  const auto rows = detail::sweep_rows(c);
  std::vector<DensityMatrix> states;
  for (const auto& r : rows) states.push_back(r.state);
  const DensityMatrix env = detail::environment_state(c);
  if (c.observables.needs_joint()) {
    log << "sweep: correlation observables need one full trajectory per state and orientation; this is slow\n";
  }
  const auto scans = scan_states(c.params, states, env, c.grid, detail::scan_options(c));

  auto index_of = [&](ObservableKind k) -> int {
    for (std::size_t i = 0; i < c.observables.kinds.size(); ++i)
      if (c.observables.kinds[i] == k) return static_cast<int>(i);
    return -1;
  };
  const int i_c1 = index_of(ObservableKind::C1Star);
  const int i_chi = index_of(ObservableKind::Holevo);
  const int i_d = index_of(ObservableKind::Discord);
  const int i_mi = index_of(ObservableKind::Mutual);
  auto obs_mean = [&](const ScanResult& s, int idx) {
    return idx < 0 ? std::nan("") : detail::grid_mean(s.observable(static_cast<std::size_t>(idx)), c.grid);
  };

  std::vector<std::string> cols{"seed",       "family", "bloch_x",   "bloch_y", "bloch_z",      "c1_initial", "yield_mean",
                                "delta",      "ra",     "objective", "c1star_yield", "chi_yield", "discord_yield"};
  if (i_mi >= 0) cols.push_back("mutual_yield");
  CsvTable table(cols);
  ScatterSpec plot{"Initial coherence vs anisotropy", "C1(rho_ABC(0)) [bits]", "delta", {}, provenance_header(c, "sweep")};
  plot.series = {{"zaxis, z >= 0", "#1f77b4", {}, {}},
                 {"zaxis, z < 0", "#17becf", {}, {}},
                 {"ball, z >= 0", "#d62728", {}, {}},
                 {"ball, z < 0", "#ff7f0e", {}, {}},
                 {"maximally mixed", "#000000", {}, {}}};
  for (std::size_t s = 0; s < rows.size(); ++s) {
    const auto& r = rows[s];
    for (const auto& p : scans[s].points) detail::check_yield_range(p.yield, "sweep row " + std::to_string(s));
    for (const auto& p : scans[s].points) detail::check_reassembly(c.observables, p.observables, "sweep");
    const Anisotropy an = anisotropy(scans[s]);
    if (r.family == "anchor" && c.env.kind == "mixed" && an.delta > detail::kFixedPointTol) {
      throw InvariantViolation("maximally mixed anchor shows anisotropy " + format_double(an.delta));
    }
    const double c1 = coherence_c1(r.state);
    std::vector<CsvTable::Cell> cells{r.seed,    r.family, r.bloch.x, r.bloch.y,           r.bloch.z,          c1,
                                      an.mean,   an.delta, an.ra,     an.objective,        obs_mean(scans[s], i_c1),
                                      obs_mean(scans[s], i_chi), obs_mean(scans[s], i_d)};
    if (i_mi >= 0) cells.emplace_back(obs_mean(scans[s], i_mi));
    table.add(std::move(cells));
    std::size_t series = 4;
    if (r.family != "anchor") series = (r.family == "zaxis" ? 0 : 2) + (r.bloch.z < 0.0 ? 1 : 0);
    plot.series[series].x.push_back(c1);
    plot.series[series].y.push_back(an.delta);
  }
  CommandOutcome out;
  out.files.push_back(detail::out_path(c, "sweep.csv"));
  write_text_file(out.files.back(), table.str(provenance_header(c, "sweep")));
  if (c.output_svg) {
    out.files.push_back(detail::out_path(c, "sweep.svg"));
    write_text_file(out.files.back(), scatter_svg(plot));
  }
  log << "sweep: " << rows.size() << " states x " << c.grid.size() << " orientations\n";
  return out;
}

/// Environment draws for the SWAP demo: 1/8, |0><0|^3, then random product
/// states rho0^(x)3.
inline CommandOutcome cmd_swap_demo(const RunConfig& c, std::ostream& log) {
  SensorParams params = c.params;
  if (c.is_explicit("params.interaction") && params.interaction_kind != InteractionKind::Swap) {
    throw ConfigError("swap-demo requires params.interaction = swap");
  }
  params.interaction_kind = InteractionKind::Swap;
  if (!c.is_explicit("params.j_se_tau")) params.j_se_tau = SensorParams::swap_reference().j_se_tau;
  params.validate();

  struct EnvRow {
    std::uint64_t seed = 0;
    std::string family;
    BlochVector bloch;
  };
  std::vector<EnvRow> envs{{derive_seed(c.seed, 0), "mixed", {0.0, 0.0, 0.0}},
                           {derive_seed(c.seed, 1), "pure_z", {0.0, 0.0, 1.0}}};
  for (int i = 0; i < c.swap_env_states; ++i) {
    EnvRow e;
    e.seed = derive_seed(c.seed, static_cast<std::uint64_t>(i + 2));
    Rng rng(e.seed);
    e.family = to_string(c.swap_family);
    e.bloch = draw_bloch(rng, c.swap_family);
    envs.push_back(e);
  }
  std::vector<DensityMatrix> env_states;
  for (const auto& e : envs) {
    const DensityMatrix q = qubit_from_bloch(e.bloch);
    env_states.push_back(tensor(tensor(q, q), q));
  }

  const auto angles = grid_angles(c.grid);
  const int periods = horizon_periods(params, c.eps_tail);
  const std::vector<DensityMatrix> system{DensityMatrix::maximally_mixed(kSystemDim)};
  // yields[angle][env]
  std::vector<std::vector<double>> yields(angles.size(), std::vector<double>(envs.size()));
  parallel_for(static_cast<int>(angles.size()), c.threads, [&](int a) {
    const auto au = static_cast<std::size_t>(a);
    const SegmentKernels kern = build_segment_kernels(params, *build_segments(params, angles[au]), 0);
    for (std::size_t e = 0; e < envs.size(); ++e) {
      yields[au][e] = batch_yields(build_iteration_maps(kern, env_states[e]), system, periods).front().singlet;
    }
  });

  CsvTable table({"seed", "family", "bloch_x", "bloch_y", "bloch_z", "c1_env", "yield_mean", "delta", "ra"});
  double mixed_delta = 0.0;
  double best_coherent = 0.0;
  for (std::size_t e = 0; e < envs.size(); ++e) {
    std::vector<double> v;
    for (std::size_t a = 0; a < angles.size(); ++a) {
      detail::check_yield_range(yields[a][e], "swap-demo");
      v.push_back(yields[a][e]);
    }
    const Anisotropy an = anisotropy(v, c.grid);
    const double c1 = coherence_c1(env_states[e]);
    if (e == 0) mixed_delta = an.delta;
    else if (c1 > 1e-12) best_coherent = std::max(best_coherent, an.delta);
    table.add({envs[e].seed, envs[e].family, envs[e].bloch.x, envs[e].bloch.y, envs[e].bloch.z, c1, an.mean, an.delta,
               an.ra});
  }
  CommandOutcome out;
  out.files.push_back(detail::out_path(c, "swap_demo.csv"));
  write_text_file(out.files.back(), table.str(provenance_header(c, "swap-demo")));
  log << "swap-demo: " << envs.size() << " environments, delta(1/8)=" << format_double(mixed_delta)
      << " max coherent delta=" << format_double(best_coherent) << '\n';
  if (mixed_delta > detail::kFixedPointTol) {
    throw InvariantViolation("doubly mixed SWAP run shows anisotropy " + format_double(mixed_delta));
  }
  if (!(best_coherent > 0.0)) throw InvariantViolation("no coherent environment produced anisotropy");
  return out;
}

inline CommandOutcome cmd_verify(const RunConfig& c, std::ostream& log) {
  VerifyOptions opts;
  opts.samples = c.verify_samples;
  opts.n_angles = c.verify_angles;
  opts.seed = c.seed;
  opts.fault = c.verify_fault;
  opts.threads = c.threads;
  opts.params = c.params;
  const VerificationReport rep = run_verification(opts);

  CsvTable table({"name", "samples", "max_residual", "verdict"});
  log << std::left << std::setw(24) << "check" << std::setw(9) << "samples" << std::setw(26) << "residual"
      << "verdict\n";
  for (const auto& chk : rep.checks) {
    const char* verdict = chk.passed ? "PASS" : "FAIL";
    table.add({chk.name, chk.samples, chk.residual, verdict});
    log << std::left << std::setw(24) << chk.name << std::setw(9) << chk.samples << std::setw(26)
        << format_double(chk.residual) << verdict << (chk.detail.empty() ? "" : "  " + chk.detail) << '\n';
  }
  log << "angles per check: " << rep.n_angles << '\n';
  CommandOutcome out;
  out.files.push_back(detail::out_path(c, "verify_summary.csv"));
  write_text_file(out.files.back(),
                  table.str(provenance_header(c, "verify") + "# angles=" + std::to_string(rep.n_angles) + '\n'));
  if (!rep.all_passed()) {
    for (const auto& chk : rep.checks)
      if (!chk.passed) log << "FAILED: " << chk.name << " residual " << format_double(chk.residual) << '\n';
    out.exit_code = kExitVerification;
  }
  return out;
}

/// Weighted yields of the configured observables for the sweep states,
/// either at one orientation (`point`) or averaged over the grid (`grid`).
inline CommandOutcome cmd_yields(const RunConfig& c, std::ostream& log) {
  const auto rows = detail::sweep_rows(c);
  const DensityMatrix env = detail::environment_state(c);
  const auto names = c.observables.names();
  CommandOutcome out;
  if (c.yields_mode == "point") {
    const auto segs = build_segments(c.params, c.yields_angles);
    std::vector<WeightedYieldResult> res(rows.size());
    parallel_for(static_cast<int>(rows.size()), c.threads, [&](int i) {
      const auto iu = static_cast<std::size_t>(i);
      res[iu] = weighted_yields(c.params, *segs, rows[iu].state, env, c.observables, c.n_sub, c.eps_tail);
    });
    CsvTable table(detail::concat(
        {"seed", "family", "bloch_x", "bloch_y", "bloch_z", "c1_initial", "theta", "phi", "singlet"},
        detail::suffixed(names, "_yield")));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      detail::check_yield_range(res[i].singlet, "yields");
      detail::check_reassembly(c.observables, res[i].values, "yields");
      const auto& r = rows[i];
      std::vector<CsvTable::Cell> cells{r.seed,    r.family, r.bloch.x, r.bloch.y,           r.bloch.z,
                                        coherence_c1(r.state), c.yields_angles.theta, c.yields_angles.phi,
                                        res[i].singlet};
      for (double v : res[i].values) cells.emplace_back(v);
      table.add(std::move(cells));
    }
    out.files.push_back(detail::out_path(c, "yields.csv"));
    write_text_file(out.files.back(), table.str(provenance_header(c, "yields")));
  } else {
    std::vector<DensityMatrix> states;
    for (const auto& r : rows) states.push_back(r.state);
    const auto scans = scan_states(c.params, states, env, c.grid, detail::scan_options(c));
    CsvTable table(detail::concat(
        detail::concat({"seed", "family", "bloch_x", "bloch_y", "bloch_z", "c1_initial", "yield_mean", "delta", "ra"},
                       detail::suffixed(names, "_mean")),
        detail::suffixed(names, "_delta")));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (const auto& p : scans[i].points) {
        detail::check_yield_range(p.yield, "yields");
        detail::check_reassembly(c.observables, p.observables, "yields");
      }
      const Anisotropy an = anisotropy(scans[i]);
      const auto& r = rows[i];
      std::vector<CsvTable::Cell> cells{r.seed,    r.family, r.bloch.x, r.bloch.y, r.bloch.z,
                                        coherence_c1(r.state), an.mean, an.delta, an.ra};
      for (std::size_t k = 0; k < names.size(); ++k) cells.emplace_back(detail::grid_mean(scans[i].observable(k), c.grid));
      for (std::size_t k = 0; k < names.size(); ++k) cells.emplace_back(detail::spread(scans[i].observable(k)));
      table.add(std::move(cells));
    }
    out.files.push_back(detail::out_path(c, "yields.csv"));
    write_text_file(out.files.back(), table.str(provenance_header(c, "yields")));
  }
  log << "yields: " << rows.size() << " states, mode " << c.yields_mode << '\n';
  return out;
}

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"scan", "sweep", "swap-demo", "verify", "yields"};
  return names;
}

/// Runs a command and maps failures onto exit codes: 1 for configuration
/// problems, 2 for numerical failures and broken invariants.
inline CommandOutcome run_command(const std::string& name, const RunConfig& c, std::ostream& log) {
  try {
    if (name == "scan") return cmd_scan(c, log);
    if (name == "sweep") return cmd_sweep(c, log);
    if (name == "swap-demo") return cmd_swap_demo(c, log);
    if (name == "verify") return cmd_verify(c, log);
    if (name == "yields") return cmd_yields(c, log);
    throw ConfigError("unknown command '" + name + "'");
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return {kExitConfig, {}};
  } catch (const InvalidInput& e) {
    log << "error: " << e.what() << '\n';
    return {kExitConfig, {}};
  } catch (const std::filesystem::filesystem_error& e) {
    log << "error: " << e.what() << '\n';
    return {kExitConfig, {}};
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return {kExitNumerical, {}};
  }
}

}  // namespace rpsense
