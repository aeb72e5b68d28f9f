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

// Singlet recombination yields, observable yields weighted by the singlet
// integrand, angle-grid scans and anisotropy statistics.

#include <rpsense/correlations.hpp>
#include <rpsense/parallel.hpp>
#include <rpsense/transfer.hpp>

#include <functional>
#include <optional>

namespace rpsense {

/// k int_0^tau e^{-kt} tr[P U_t rho U_t^dagger] dt, evaluated in closed form
/// in the eigenbasis of the segment Hamiltonian. `proj` has the propagator's
/// dimension.
inline double segment_yield(const Matrix& rho, const Propagator& prop, const Matrix& proj, double k, double tau) {
  if (!(k > 0.0)) throw InvalidInput("segment_yield needs k > 0");
  if (!(tau > 0.0)) throw InvalidInput("segment_yield needs tau > 0");
  if (rho.rows() != prop.dim() || proj.rows() != prop.dim()) {
    throw InvalidInput("segment_yield: state, projector and propagator dimensions differ");
  }
  if (max_abs(proj - proj.adjoint()) > 1e-12) throw InvalidInput("segment_yield needs a Hermitian projector");
  const Complex y = detail::kernel_contract(prop.to_eigenbasis(rho), prop.to_eigenbasis(proj),
                                            detail::yield_kernel(prop.energies(), k, tau), k);
  const double scale = std::max(1.0, rho.norm() * proj.norm());
  if (std::abs(y.imag()) > 1e-12 * scale) {
    throw NumericalError("segment yield has imaginary part " + std::to_string(y.imag()));
  }
  return y.real();
}

inline double segment_yield(const DensityMatrix& rho, const Propagator& prop, const PauliSum& proj, double k,
                            double tau) {
  const Matrix p = prop.dim() == kSystemDim ? system_block(proj) : to_dense(proj);
  return segment_yield(rho.matrix(), prop, p, k, tau);
}

namespace detail {

inline void require_unit_trace(const DensityMatrix& rho, int dim, const char* what) {
  if (rho.dim() != dim) throw InvalidInput(std::string(what) + " has the wrong dimension");
  if (std::abs(rho.trace() - 1.0) > 1e-8) throw InvalidInput(std::string(what) + " must have unit trace");
}

}  // namespace detail

/// Total singlet yield over the horizon set by eps_tail, stepping a
/// CollisionEngine period by period.
inline double singlet_yield(const SensorParams& params, std::shared_ptr<const SegmentPropagators> segments,
                            const DensityMatrix& rho_s0, const DensityMatrix& rho_e0, const FieldAngles& angles,
                            double eps_tail = kDefaultEpsTail) {
  detail::require_unit_trace(rho_s0, kSystemDim, "initial system state");
  detail::require_unit_trace(rho_e0, kEnvDim, "environment state");
  const int periods = horizon_periods(params, eps_tail);
  const Matrix p64 = to_dense(singlet_projector());
  const Matrix p8 = system_block(singlet_projector());
  CollisionEngine engine(params, angles, std::move(segments), rho_s0, rho_e0);
  const SegmentPropagators& segs = engine.segments();
  double y = 0.0;
  for (int n = 0; n < periods; ++n) {
    y += segment_yield(engine.joint().matrix(), segs.collision, p64, params.k, params.tau_se);
    const DensityMatrix collided = engine.collided();
    const Matrix sys = trace_out_second(collided.matrix(), kSystemDim, kEnvDim);
    y += segment_yield(sys, segs.free, p8, params.k, params.tau_ee);
    engine.advance_from(collided);
  }
  return y;
}

inline double singlet_yield(const SensorParams& params, const DensityMatrix& rho_s0, const DensityMatrix& rho_e0,
                            const FieldAngles& angles, double eps_tail = kDefaultEpsTail) {
  return singlet_yield(params, build_segments(params, angles), rho_s0, rho_e0, angles, eps_tail);
}

// ---------------------------------------------------------------------------
// Observables

enum class ObservableKind { C1Star, Mutual, Discord, Holevo };

inline std::string to_string(ObservableKind k) {
  switch (k) {
    case ObservableKind::C1Star: return "c1_star";
    case ObservableKind::Mutual: return "mutual";
    case ObservableKind::Discord: return "discord";
    case ObservableKind::Holevo: return "holevo";
  }
  throw InvalidInput("unknown observable");
}

inline ObservableKind observable_from_string(const std::string& s) {
  for (ObservableKind k : {ObservableKind::C1Star, ObservableKind::Mutual, ObservableKind::Discord,
                           ObservableKind::Holevo}) {
    if (s == to_string(k)) return k;
  }
  throw InvalidInput("unknown observable '" + s + "'");
}

/// Observables evaluated along a trajectory. C1* acts on the decayed radical
/// state rho_ABC; the correlation measures act on the S:E split of the joint
/// state, trace-normalized unless `normalize` is off, in which case they are
/// scaled by the remaining trace.
struct ObservableSet {
  std::vector<ObservableKind> kinds;
  bool normalize = true;
  DiscordOptions discord;

  bool empty() const { return kinds.empty(); }
  std::size_t size() const { return kinds.size(); }

  bool needs_joint() const {
    return std::any_of(kinds.begin(), kinds.end(), [](ObservableKind k) { return k != ObservableKind::C1Star; });
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (ObservableKind k : kinds) out.push_back(to_string(k));
    return out;
  }
};

/// Stateful evaluator; discord warm-starts from the previous node's basis.
class ObservableEvaluator {
 public:
  explicit ObservableEvaluator(ObservableSet set) : set_(std::move(set)) {}

  void evaluate(const Matrix& system, const Matrix* joint, double* out) {
    std::optional<DiscordResult> d;
    for (std::size_t i = 0; i < set_.kinds.size(); ++i) {
      const ObservableKind kind = set_.kinds[i];
      if (kind == ObservableKind::C1Star) {
        out[i] = coherence_c1_star(system);
        continue;
      }
      if (joint == nullptr) throw ContractError("correlation observable evaluated without the joint state");
      const double scale = set_.normalize ? 1.0 : joint->trace().real();
      if (kind == ObservableKind::Mutual) {
        out[i] = scale * mutual_information(*joint);
        continue;
      }
      if (!d) {
        d = discord(*joint, MeasuredSide::First, set_.discord, Bipartition{}, warm_ ? &*warm_ : nullptr);
        warm_ = d->basis.unitary;
      }
      out[i] = scale * (kind == ObservableKind::Discord ? d->value : d->holevo);
    }
  }

 private:
  ObservableSet set_;
  std::optional<Matrix> warm_;
};

struct WeightedYieldResult {
  double singlet = 0.0;
  std::vector<double> values;
};

inline constexpr int kDefaultNSub = 8;

namespace detail {

/// Walks the trajectory once, accumulating the analytic singlet yield and
/// calling node(system, joint_or_null, weight, segment, m, decay) at n_sub + 1
/// trapezoid nodes per segment (segment 0 = collision, 1 = free; decay is
/// e^{-kt} relative to the segment start). Joint states are formed only when
/// requested for that segment.
template <class NodeFn>
double weighted_pass(const SensorParams& params, const SegmentPropagators& segs, const DensityMatrix& rho_s0,
                     const DensityMatrix& rho_e0, int periods, int n_sub, bool joint_collision, bool joint_free,
                     NodeFn&& node) {
  const bool need_joint = joint_free;
  if (n_sub < 1) throw InvalidInput("n_sub must be at least 1");
  const double k = params.k;
  const Propagator& pa = segs.collision;
  const Propagator& pb = segs.free;
  const Matrix pa_tilde = pa.to_eigenbasis(to_dense(singlet_projector()));
  const Matrix pb_tilde = pb.to_eigenbasis(system_block(singlet_projector()));
  const Matrix ka = yield_kernel(pa.energies(), k, params.tau_se);
  const Matrix kb = yield_kernel(pb.energies(), k, params.tau_ee);
  const double ha = params.tau_se / n_sub;
  const double hb = params.tau_ee / n_sub;
  std::vector<Matrix> phases;
  std::vector<Matrix> ub;
  std::vector<Matrix> ub_joint;
  for (int m = 0; m <= n_sub; ++m) {
    phases.push_back(pa.decay_phases(m * ha, k));
    ub.push_back(pb.unitary(m * hb));
    if (need_joint) ub_joint.push_back(kron(ub.back(), Matrix::Identity(kEnvDim, kEnvDim)));
  }
  const Matrix& env = rho_e0.matrix();
  Matrix sys = rho_s0.matrix();
  double y = 0.0;
  for (int n = 0; n < periods; ++n) {
    const Matrix jt = pa.to_eigenbasis(kron(sys, env));
    y += kernel_contract(jt, pa_tilde, ka, k).real();
    Matrix collided;
    for (int m = 0; m <= n_sub; ++m) {
      Matrix joint = pa.from_eigenbasis(jt.cwiseProduct(phases[static_cast<std::size_t>(m)]));
      const Matrix s = trace_out_second(joint, kSystemDim, kEnvDim);
      node(s, joint_collision ? &joint : nullptr, trapezoid_weight(m, n_sub, ha), 0, m,
           std::exp(-k * m * ha));
      if (m == n_sub) collided = std::move(joint);
    }
    const Matrix sc = trace_out_second(collided, kSystemDim, kEnvDim);
    y += kernel_contract(pb.to_eigenbasis(sc), pb_tilde, kb, k).real();
    for (int m = 0; m <= n_sub; ++m) {
      const double decay = std::exp(-k * m * hb);
      const auto mi = static_cast<std::size_t>(m);
      const Matrix s = decay * (ub[mi] * sc * ub[mi].adjoint());
      if (need_joint) {
        const Matrix joint = decay * (ub_joint[mi] * collided * ub_joint[mi].adjoint());
        node(s, &joint, trapezoid_weight(m, n_sub, hb), 1, m, decay);
      } else {
        node(s, nullptr, trapezoid_weight(m, n_sub, hb), 1, m, decay);
      }
      if (m == n_sub) sys = s;
    }
  }
  return y;
}

inline double singlet_weight(const Matrix& system) {
  // tr[P_singlet rho_S] on the 8-dim system.
  static const Matrix p8 = system_block(singlet_projector());
  return (p8.cwiseProduct(system.transpose())).sum().real();
}

inline void check_normalization(double singlet) {
  if (!(singlet >= 1e-12)) {
    throw DegenerateNormalization("singlet yield " + std::to_string(singlet) + " too small to normalize observable yields");
  }
}

}  // namespace detail

/// (k / phi_singlet) int f(rho(t)) tr[P rho(t)] dt for a functional of the
/// decayed 64-dim joint state. The normalizer is the same trapezoid sum
/// without f, so f = 1 gives exactly 1.
inline WeightedYieldResult weighted_yield(const SensorParams& params, const DensityMatrix& rho_s0,
                                          const DensityMatrix& rho_e0, const FieldAngles& angles,
                                          const std::function<double(const DensityMatrix&)>& observable,
                                          int n_sub = kDefaultNSub, double eps_tail = kDefaultEpsTail) {
  detail::require_unit_trace(rho_s0, kSystemDim, "initial system state");
  detail::require_unit_trace(rho_e0, kEnvDim, "environment state");
  const auto segs = build_segments(params, angles);
  double num = 0.0;
  double den = 0.0;
  WeightedYieldResult out;
  out.singlet = detail::weighted_pass(params, *segs, rho_s0, rho_e0, horizon_periods(params, eps_tail), n_sub, true,
                                      true, [&](const Matrix& s, const Matrix* joint, double w, int, int, double) {
                                        const double p = w * detail::singlet_weight(s);
                                        num += p * observable(DensityMatrix::from_trusted(*joint));
                                        den += p;
                                      });
  detail::check_normalization(out.singlet);
  out.values.push_back(num / den);
  return out;
}

/// Weighted yields of a set of observables along one trajectory.
///
/// The free segment applies U (x) 1 to the post-collision state. Every
/// observable here is invariant under unitaries on the system (the measured
/// side for discord), and C1* and the unnormalized measures are homogeneous
/// of degree one in the trace, so free-segment values follow from the
/// post-collision value without re-evaluation.
inline WeightedYieldResult weighted_yields(const SensorParams& params, const SegmentPropagators& segs,
                                           const DensityMatrix& rho_s0, const DensityMatrix& rho_e0,
                                           const ObservableSet& set, int n_sub = kDefaultNSub,
                                           double eps_tail = kDefaultEpsTail) {
  detail::require_unit_trace(rho_s0, kSystemDim, "initial system state");
  detail::require_unit_trace(rho_e0, kEnvDim, "environment state");
  ObservableEvaluator eval(set);
  const std::size_t nobs = set.size();
  std::vector<double> num(nobs, 0.0);
  std::vector<double> vals(nobs, 0.0);
  std::vector<double> collided(nobs, 0.0);
  double den = 0.0;
  WeightedYieldResult out;
  out.singlet = detail::weighted_pass(
      params, segs, rho_s0, rho_e0, horizon_periods(params, eps_tail), n_sub, set.needs_joint(), false,
      [&](const Matrix& s, const Matrix* joint, double w, int segment, int m, double decay) {
        const double p = w * detail::singlet_weight(s);
        den += p;
        if (nobs == 0) return;
        if (segment == 0) {
          eval.evaluate(s, joint, vals.data());
          if (m == n_sub) collided = vals;
        } else {
          for (std::size_t i = 0; i < nobs; ++i) {
            const bool scales = set.kinds[i] == ObservableKind::C1Star || !set.normalize;
            vals[i] = scales ? decay * collided[i] : collided[i];
          }
        }
        for (std::size_t i = 0; i < nobs; ++i) num[i] += p * vals[i];
      });
  detail::check_normalization(out.singlet);
  for (double v : num) out.values.push_back(v / den);
  return out;
}

inline WeightedYieldResult weighted_yields(const SensorParams& params, const DensityMatrix& rho_s0,
                                           const DensityMatrix& rho_e0, const FieldAngles& angles,
                                           const ObservableSet& set, int n_sub = kDefaultNSub,
                                           double eps_tail = kDefaultEpsTail) {
  return weighted_yields(params, *build_segments(params, angles), rho_s0, rho_e0, set, n_sub, eps_tail);
}

/// Singlet yields (and system-only weighted yields) of many initial states
/// at one field orientation, advanced together through the period map.
/// Result rows are per state.
inline std::vector<WeightedYieldResult> batch_yields(const IterationMaps& maps,
                                                     const std::vector<DensityMatrix>& states, int periods,
                                                     const ObservableSet& set = {}) {
  if (set.needs_joint()) throw InvalidInput("batch_yields supports system observables only");
  if (!set.empty() && maps.n_sub < 1) throw InvalidInput("iteration maps were built without quadrature nodes");
  const auto n = static_cast<Eigen::Index>(states.size());
  Matrix s(kVecDim, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    detail::require_unit_trace(states[static_cast<std::size_t>(j)], kSystemDim, "initial system state");
    s.col(j) = detail::vec(states[static_cast<std::size_t>(j)].matrix());
  }
  Eigen::RowVectorXcd y = Eigen::RowVectorXcd::Zero(n);
  const std::size_t nobs = set.size();
  std::vector<double> num(static_cast<std::size_t>(n) * nobs, 0.0);
  std::vector<double> den(static_cast<std::size_t>(n), 0.0);
  std::vector<ObservableEvaluator> evals(static_cast<std::size_t>(n), ObservableEvaluator(set));
  std::vector<double> vals(nobs);
  // Free segment: rho(t) = e^{-kt} U rho_c U^dagger. System observables are
  // unitarily invariant and homogeneous of degree one (C1*), so their value
  // is e^{-kt} f(rho_c) and one evaluation per period covers the segment.
  auto visit = [&](Eigen::Index j, double singlet, double w, const double* known) {
    const auto ju = static_cast<std::size_t>(j);
    const double p = w * singlet;
    den[ju] += p;
    for (std::size_t i = 0; i < nobs; ++i) num[ju * nobs + i] += p * known[i];
  };
  // tr[P e^{-kt} U c U^dagger] = e^{-kt} tr[(U^dagger P U) c]
  std::vector<Eigen::RowVectorXcd> free_rows;
  for (const Matrix& u : maps.free_unitaries) {
    free_rows.push_back(detail::trace_row(u.adjoint() * system_block(singlet_projector()) * u));
  }
  // The first collision node of a period is the last free node of the
  // previous one, so its values are carried over.
  std::vector<double> carried(static_cast<std::size_t>(n) * nobs, 0.0);
  for (int it = 0; it < periods; ++it) {
    y += maps.yield_row * s;
    if (!set.empty()) {
      const int ns = maps.n_sub;
      for (int m = 0; m < ns; ++m) {
        const Matrix x = m == 0 ? s : Matrix(maps.collision_nodes[static_cast<std::size_t>(m)] * s);
        for (Eigen::Index j = 0; j < n; ++j) {
          const Matrix sys = detail::unvec(x.col(j), kSystemDim);
          double* v = vals.data();
          if (m == 0 && it > 0) v = carried.data() + static_cast<std::size_t>(j) * nobs;
          else evals[static_cast<std::size_t>(j)].evaluate(sys, nullptr, v);
          visit(j, detail::singlet_weight(sys), trapezoid_weight(m, ns, maps.h_collision), v);
        }
      }
      const Matrix collided = maps.collision_nodes[static_cast<std::size_t>(ns)] * s;
      for (Eigen::Index j = 0; j < n; ++j) {
        const Matrix c = detail::unvec(collided.col(j), kSystemDim);
        evals[static_cast<std::size_t>(j)].evaluate(c, nullptr, vals.data());
        visit(j, detail::singlet_weight(c), trapezoid_weight(ns, ns, maps.h_collision), vals.data());
        std::vector<double> scaled(nobs);
        for (int m = 0; m <= ns; ++m) {
          const auto mi = static_cast<std::size_t>(m);
          for (std::size_t i = 0; i < nobs; ++i) scaled[i] = maps.free_decay[mi] * vals[i];
          const double p = maps.free_decay[mi] * (free_rows[mi] * collided.col(j))(0).real();
          visit(j, p, trapezoid_weight(m, ns, maps.h_free), scaled.data());
        }
        std::copy(scaled.begin(), scaled.end(), carried.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(j) * nobs));
      }
    }
    s = maps.period_map * s;
  }
  std::vector<WeightedYieldResult> out(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    auto& r = out[static_cast<std::size_t>(j)];
    r.singlet = y(j).real();
    if (nobs == 0) continue;
    detail::check_normalization(r.singlet);
    for (std::size_t i = 0; i < nobs; ++i) {
      r.values.push_back(num[static_cast<std::size_t>(j) * nobs + i] / den[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Angle grids and scans

struct GridSpec {
  int n_theta = 16;
  int n_phi = 9;

  int size() const { return n_theta * n_phi; }
};

/// theta_j = 2 pi j / n_theta, phi_i = pi i / (n_phi - 1), ordered by
/// (i_phi, i_theta).
inline std::vector<FieldAngles> grid_angles(const GridSpec& g) {
  if (g.n_theta < 4 || g.n_phi < 3) throw InvalidInput("angle grid needs n_theta >= 4 and n_phi >= 3");
  std::vector<FieldAngles> out;
  out.reserve(static_cast<std::size_t>(g.size()));
  for (int i = 0; i < g.n_phi; ++i) {
    for (int j = 0; j < g.n_theta; ++j) {
      out.push_back({2.0 * kPi * j / g.n_theta, kPi * i / (g.n_phi - 1)});
    }
  }
  return out;
}

/// Quadrature weights for the orientation average over a grid: trapezoid in
/// phi with the sin(phi) Jacobian, rectangle rule in theta, normalized to
/// sum to one so that constant scans average exactly.
inline std::vector<double> grid_weights(const GridSpec& g) {
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(g.size()));
  double total = 0.0;
  for (int i = 0; i < g.n_phi; ++i) {
    const double trap = (i == 0 || i == g.n_phi - 1) ? 0.5 : 1.0;
    const double wi = trap * std::sin(kPi * i / (g.n_phi - 1));
    for (int j = 0; j < g.n_theta; ++j) {
      w.push_back(wi);
      total += wi;
    }
  }
  for (double& x : w) x /= total;
  return w;
}

struct ScanPoint {
  FieldAngles angles;
  double yield = 0.0;
  std::vector<double> observables;
};

struct ScanResult {
  GridSpec grid;
  std::vector<std::string> observable_names;
  std::vector<ScanPoint> points;

  std::vector<double> yields() const {
    std::vector<double> out;
    for (const auto& p : points) out.push_back(p.yield);
    return out;
  }

  std::vector<double> observable(std::size_t index) const {
    std::vector<double> out;
    for (const auto& p : points) out.push_back(p.observables.at(index));
    return out;
  }
};

struct ScanOptions {
  double eps_tail = kDefaultEpsTail;
  int n_sub = kDefaultNSub;
  int threads = 1;
  ObservableSet observables;
};

/// Scans many initial states over one grid. Each orientation builds its
/// propagators and period maps once and shares them across states; joint
/// observables fall back to one full trajectory per state.
inline std::vector<ScanResult> scan_states(const SensorParams& params, const std::vector<DensityMatrix>& states,
                                           const DensityMatrix& rho_e0, const GridSpec& grid,
                                           const ScanOptions& opts = {}) {
  params.validate();
  const auto angles = grid_angles(grid);
  detail::require_unit_trace(rho_e0, kEnvDim, "environment state");
  const int periods = horizon_periods(params, opts.eps_tail);
  const auto n_angles = angles.size();
  const bool joint = opts.observables.needs_joint();
  // per angle, per state
  std::vector<std::vector<WeightedYieldResult>> cells(n_angles);
  parallel_for(static_cast<int>(n_angles), opts.threads, [&](int a) {
    const auto au = static_cast<std::size_t>(a);
    const auto segs = build_segments(params, angles[au]);
    const bool batch_obs = !opts.observables.empty() && !joint;
    const IterationMaps maps = build_iteration_maps(params, *segs, rho_e0, batch_obs ? opts.n_sub : 0);
    cells[au] = batch_yields(maps, states, periods, batch_obs ? opts.observables : ObservableSet{});
    if (joint) {
      for (std::size_t s = 0; s < states.size(); ++s) {
        cells[au][s].values =
            weighted_yields(params, *segs, states[s], rho_e0, opts.observables, opts.n_sub, opts.eps_tail).values;
      }
    }
  });
  std::vector<ScanResult> out(states.size());
  for (std::size_t s = 0; s < states.size(); ++s) {
    out[s].grid = grid;
    out[s].observable_names = opts.observables.names();
    for (std::size_t a = 0; a < n_angles; ++a) {
      out[s].points.push_back({angles[a], cells[a][s].singlet, cells[a][s].values});
    }
  }
  return out;
}

inline ScanResult angle_scan(const SensorParams& params, const DensityMatrix& rho_s0, const DensityMatrix& rho_e0,
                             const GridSpec& grid, const ScanOptions& opts = {}) {
  return scan_states(params, {rho_s0}, rho_e0, grid, opts).front();
}

// ---------------------------------------------------------------------------
// Anisotropy

struct Anisotropy {
  double delta = 0.0;
  double ra = 0.0;
  double mean = 0.0;
  double objective = 0.0;
  std::size_t argmax = 0;
  std::size_t argmin = 0;
};

/// Statistics of a scalar over grid points. When the values do not fill the
/// grid (ad hoc point sets) the mean falls back to equal weights.
inline Anisotropy anisotropy(const std::vector<double>& values, const GridSpec& grid) {
  if (values.empty()) throw InvalidInput("anisotropy of an empty scan");
  Anisotropy a;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  a.argmin = static_cast<std::size_t>(lo - values.begin());
  a.argmax = static_cast<std::size_t>(hi - values.begin());
  a.delta = *hi - *lo;
  if (static_cast<int>(values.size()) == grid.size() && grid.n_phi >= 3) {
    const auto w = grid_weights(grid);
    for (std::size_t i = 0; i < values.size(); ++i) a.mean += w[i] * values[i];
  } else {
    for (double v : values) a.mean += v;
    a.mean /= static_cast<double>(values.size());
  }
  if (!(std::abs(a.mean) >= 1e-12)) throw DegenerateNormalization("orientation-averaged yield below 1e-12");
  a.ra = a.delta / a.mean;
  a.objective = a.delta * a.mean;
  return a;
}

inline Anisotropy anisotropy(const ScanResult& scan) { return anisotropy(scan.yields(), scan.grid); }

}  // namespace rpsense
