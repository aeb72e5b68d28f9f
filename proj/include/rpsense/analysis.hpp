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

// Numerical certification of the commutator statements behind the sensor
// model. Every check is classified twice: by exact Pauli algebra (a
// commutator is zero when no coefficient survives pruning) and by dense
// matrices (zero when the Frobenius norm is <= 1e-12). "For all angles" is
// sampled on the six axis directions plus Fibonacci-sphere points.

#include <rpsense/dynamics.hpp>
#include <rpsense/parallel.hpp>

#include <functional>

namespace rpsense {

inline constexpr double kDenseZero = 1e-12;
inline constexpr double kNonzeroThreshold = 1e-10;

// ---------------------------------------------------------------------------
// Zeeman-trivial state family

struct TrivialStateParams {
  double p_ab = 0.0;
  double p_ac = 0.0;
  double p_bc = 0.0;
  double p_abc = 0.0;
};

/// 1/8 + sum_pairs p sigma.sigma + p_abc * (sigma^A . (sigma^B x sigma^C)).
inline PauliSum trivial_state_operator(const TrivialStateParams& tp) {
  PauliSum op = PauliSum::identity(1.0 / 8.0);
  const std::array<std::tuple<int, int, double>, 3> pairs{
      {{kA, kB, tp.p_ab}, {kA, kC, tp.p_ac}, {kB, kC, tp.p_bc}}};
  for (auto [a, b, p] : pairs) {
    if (p == 0.0) continue;
    for (Pauli s : {Pauli::X, Pauli::Y, Pauli::Z}) op.add(PauliString::pair(a, s, b, s, p));
  }
  if (tp.p_abc != 0.0) {
    // Levi-Civita contraction over (A, B, C).
    for (const char* lbl : {"XYZ", "ZXY", "YZX"}) op.add(PauliString::parse(lbl, tp.p_abc));
    for (const char* lbl : {"XZY", "YXZ", "ZYX"}) op.add(PauliString::parse(lbl, -tp.p_abc));
  }
  return op;
}

inline DensityMatrix trivial_state(const TrivialStateParams& tp) {
  const Matrix m = system_block(trivial_state_operator(tp));
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  const double min_ev = es.eigenvalues().minCoeff();
  if (min_ev < -1e-10) {
    throw InvalidInput("trivial-state parameters are not positive semidefinite (min eigenvalue " +
                       std::to_string(min_ev) + ")");
  }
  return DensityMatrix(m);
}

/// Draws admissible parameters by rejection from a box that contains the
/// PSD region's neighborhood of the origin.
inline TrivialStateParams random_trivial_params(Rng& rng) {
  constexpr double box = 1.0 / 12.0;
  for (;;) {
    TrivialStateParams tp{rng.uniform(-box, box), rng.uniform(-box, box), rng.uniform(-box, box),
                          rng.uniform(-box, box)};
    const Matrix m = system_block(trivial_state_operator(tp));
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() >= -1e-10) return tp;
  }
}

/// Random full-rank 8-dim state G G^dagger / tr with Gaussian G.
inline DensityMatrix random_generic_state(Rng& rng, int dim = kSystemDim) {
  Matrix g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
  const Matrix m = g * g.adjoint();
  return DensityMatrix(m / m.trace().real());
}

// ---------------------------------------------------------------------------
// Angle sets

/// +-x, +-y, +-z followed by n - 6 Fibonacci-sphere directions.
inline std::vector<FieldAngles> verification_angles(int n = 100) {
  if (n < 6) throw InvalidInput("verification angle set needs at least the six axes");
  std::vector<FieldAngles> out{{0.0, kPi / 2}, {kPi, kPi / 2}, {kPi / 2, kPi / 2},
                               {3 * kPi / 2, kPi / 2}, {0.0, 0.0}, {0.0, kPi}};
  const int m = n - 6;
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < m; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / m;
    out.push_back({std::fmod(golden * i, 2.0 * kPi), std::acos(z)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dual-route commutator classification

struct CommutatorNorms {
  double dense = 0.0;
  bool pauli_zero = true;

  bool dense_zero() const { return dense <= kDenseZero; }
  bool agree() const { return pauli_zero == dense_zero(); }
};

inline CommutatorNorms commutator_norms(const PauliSum& a, const PauliSum& b) {
  CommutatorNorms r;
  r.pauli_zero = commutator(a, b).empty();
  r.dense = dense_commutator(to_dense(a), to_dense(b)).norm();
  return r;
}

/// Pauli expansion of an 8-dim system operator embedded as op (x) 1_E.
inline PauliSum system_operator(const Matrix& op8) {
  return from_dense(kron(op8, Matrix::Identity(kEnvDim, kEnvDim)));
}

/// max over angles of ||[rho (x) 1_E, H_B]||_F for an 8-dim state, with the
/// Pauli-route classification folded in.
struct CommutantCheck {
  double max_norm = 0.0;
  bool pauli_zero = true;
  bool routes_agree = true;
};

inline CommutantCheck zeeman_commutant(const DensityMatrix& rho, const std::vector<FieldAngles>& angles,
                                       const SensorParams& params = SensorParams::reference()) {
  if (rho.dim() != kSystemDim) throw InvalidInput("Zeeman commutant check needs an 8-dim state");
  const PauliSum rho_p = system_operator(rho.matrix());
  const Matrix rho_big = kron(rho.matrix(), Matrix::Identity(kEnvDim, kEnvDim));
  CommutantCheck out;
  for (const auto& ang : angles) {
    const PauliSum hb = h_zeeman(params, ang);
    const bool pz = commutator(rho_p, hb).empty();
    const double dn = dense_commutator(rho_big, to_dense(hb)).norm();
    out.max_norm = std::max(out.max_norm, dn);
    out.pauli_zero = out.pauli_zero && pz;
    out.routes_agree = out.routes_agree && (pz == (dn <= kDenseZero));
  }
  return out;
}

inline double check_zeeman_commutant(const DensityMatrix& rho, int n_angles = 100) {
  return zeeman_commutant(rho, verification_angles(n_angles)).max_norm;
}

// ---------------------------------------------------------------------------
// Necessity flags

struct Lemma3Flags {
  bool state_vs_full = false;    // [rho_SE, H0 + V + H_B] != 0 at some angle
  bool singlet_vs_h0v = false;   // [P, H0 + V] != 0
  bool zeeman_vs_h0v = false;    // [H_B, H0 + V] != 0 at some angle
  bool routes_agree = true;
  double norm_state = 0.0;
  double norm_singlet = 0.0;
  double norm_zeeman = 0.0;
};

/// The exchange Hamiltonian used by the checks; replaceable for mutation
/// testing.
using ExchangeBuilder = std::function<PauliSum(const SensorParams&)>;

inline PauliSum faulty_exchange(const SensorParams& p) {
  // Flips the sign of the X_A X_B exchange term.
  PauliSum h = h_exchange(p);
  h.add(PauliString::pair(kA, Pauli::X, kB, Pauli::X, p.j_abc));
  return h;
}

inline Lemma3Flags verify_lemma3(const SensorParams& params, const DensityMatrix& rho_se,
                                 const std::vector<FieldAngles>& angles, const PauliSum& h0,
                                 const PauliSum& v) {
  if (rho_se.dim() != kJointDim) throw InvalidInput("verify_lemma3 needs a 64-dim state");
  Lemma3Flags f;
  const PauliSum rho_p = from_dense(rho_se.matrix());
  const PauliSum h0v = h0 + v;
  const Matrix rho_d = rho_se.matrix();
  const Matrix h0v_d = to_dense(h0v);
  auto classify = [&f](const CommutatorNorms& c, bool& flag, double& norm) {
    f.routes_agree = f.routes_agree && c.agree();
    norm = std::max(norm, c.dense);
    flag = flag || c.dense > kNonzeroThreshold;
  };
  {
    const auto c = commutator_norms(singlet_projector(), h0v);
    classify(c, f.singlet_vs_h0v, f.norm_singlet);
  }
  for (const auto& ang : angles) {
    const PauliSum hb = h_zeeman(params, ang);
    const Matrix hb_d = to_dense(hb);
    CommutatorNorms c1;
    c1.pauli_zero = commutator(rho_p, h0v + hb).empty();
    c1.dense = dense_commutator(rho_d, h0v_d + hb_d).norm();
    classify(c1, f.state_vs_full, f.norm_state);
    CommutatorNorms c2;
    c2.pauli_zero = commutator(hb, h0v).empty();
    c2.dense = dense_commutator(hb_d, h0v_d).norm();
    classify(c2, f.zeeman_vs_h0v, f.norm_zeeman);
  }
  return f;
}

inline Lemma3Flags verify_lemma3(const SensorParams& params, const DensityMatrix& rho_se, int angles_sample = 100) {
  return verify_lemma3(params, rho_se, verification_angles(angles_sample), h_exchange(params), v_interaction(params));
}

// ---------------------------------------------------------------------------
// Random interactions

/// V = sum_alpha sum_ij g^alpha_ij sigma_i^alpha sigma_j^{E_alpha} with random
/// couplings on every (i, j) != (0, 0); genuine two-body terms are present
/// with probability one.
inline PauliSum random_pair_interaction(Rng& rng, bool cross_terms = true, bool system_terms = true) {
  constexpr std::array<Pauli, 4> ps{Pauli::I, Pauli::X, Pauli::Y, Pauli::Z};
  PauliSum v;
  for (int site : {kA, kB, kC}) {
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        if (i == 0 && j == 0) continue;
        if (!cross_terms && i != 0 && j != 0) continue;
        if (!system_terms && i != 0) continue;
        const double g = rng.normal();
        v.add(PauliString::pair(site, ps[static_cast<std::size_t>(i)], site + 3, ps[static_cast<std::size_t>(j)], g));
      }
    }
  }
  return v;
}

/// Random Hermitian operator on the radicals (all non-identity strings on
/// A, B, C with Gaussian coefficients).
inline PauliSum random_system_hamiltonian(Rng& rng) {
  constexpr std::array<Pauli, 4> ps{Pauli::I, Pauli::X, Pauli::Y, Pauli::Z};
  PauliSum h;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) {
        if (a == 0 && b == 0 && c == 0) continue;
        PauliString s;
        s.labels[kA] = ps[static_cast<std::size_t>(a)];
        s.labels[kB] = ps[static_cast<std::size_t>(b)];
        s.labels[kC] = ps[static_cast<std::size_t>(c)];
        s.coefficient = rng.normal();
        h.add(s);
      }
  return h;
}

// ---------------------------------------------------------------------------
// Suite

struct CheckResult {
  std::string name;
  int samples = 0;
  /// For vanishing checks the largest residual; for nonvanishing checks the
  /// smallest detected norm (the margin above zero).
  double residual = 0.0;
  bool passed = false;
  std::string detail;
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  int n_angles = 0;

  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
  }
};

struct VerifyOptions {
  int samples = 100;
  int n_angles = 100;
  std::uint64_t seed = 20240601;
  bool fault = false;
  int threads = 1;
  SensorParams params = SensorParams::reference();
};

namespace detail {

struct VanishAccum {
  double worst = 0.0;
  bool ok = true;
  bool agree = true;

  void add(const CommutatorNorms& c) {
    worst = std::max(worst, c.dense);
    ok = ok && c.dense_zero() && c.pauli_zero;
    agree = agree && c.agree();
  }
};

struct NonzeroAccum {
  double margin = std::numeric_limits<double>::infinity();
  bool ok = true;
  bool agree = true;

  void add(double norm, bool pauli_zero, bool routes_agree) {
    margin = std::min(margin, norm);
    ok = ok && norm > kNonzeroThreshold && !pauli_zero;
    agree = agree && routes_agree;
  }
};

inline CheckResult finish(std::string name, int samples, double residual, bool ok, bool agree, std::string detail = {}) {
  CheckResult r;
  r.name = std::move(name);
  r.samples = samples;
  r.residual = residual;
  r.passed = ok && agree;
  if (!agree) detail += (detail.empty() ? "" : "; ") + std::string("Pauli and dense routes disagree");
  r.detail = std::move(detail);
  return r;
}

/// Non-maximally-mixed test states cycling through three constructions.
inline DensityMatrix prop5_state(Rng& rng, int index) {
  switch (index % 3) {
    case 0: return random_generic_state(rng);
    case 1: {
      BlochVector r = draw_bloch(rng, InitialFamily::BallUniform);
      if (r.norm() < 1e-3) r.z = 0.5;
      return system_state_from_bloch(r);
    }
    default: {
      TrivialStateParams tp = random_trivial_params(rng);
      if (std::abs(tp.p_ab) < 1e-3) tp.p_ab = 1e-2;
      return trivial_state(tp);
    }
  }
}

}  // namespace detail

/// Runs every certification check. Each check draws from its own seeded
/// stream, so results do not depend on the thread count.
inline VerificationReport run_verification(const VerifyOptions& opts) {
  if (opts.samples < 1) throw InvalidInput("verification needs at least one sample");
  const SensorParams& params = opts.params;
  params.validate();
  const ExchangeBuilder exchange = opts.fault ? ExchangeBuilder(faulty_exchange) : ExchangeBuilder(h_exchange);
  const auto angles = verification_angles(opts.n_angles);
  const int n = opts.samples;
  const PauliSum p_singlet = singlet_projector();
  const PauliSum hex = exchange(params);
  const PauliSum v_table = v_interaction(params);

  std::vector<std::function<std::vector<CheckResult>()>> tasks;

  tasks.emplace_back([&]() -> std::vector<CheckResult> {
    // SU(2) symmetry of the exchange: [H_ex, S_a] = 0 and [P, H_ex] = 0.
    detail::VanishAccum acc;
    for (Pauli ax : {Pauli::X, Pauli::Y, Pauli::Z}) acc.add(commutator_norms(hex, total_system_spin(ax)));
    acc.add(commutator_norms(p_singlet, hex));
    return {detail::finish("exchange_su2", 4, acc.worst, acc.ok, acc.agree)};
  });

  tasks.emplace_back([&]() -> std::vector<CheckResult> {
    Rng rng(derive_seed(opts.seed, 1));
    double worst = 0.0;
    bool ok = true;
    bool agree = true;
    for (int s = 0; s < n; ++s) {
      const auto c = zeeman_commutant(trivial_state(random_trivial_params(rng)), angles, params);
      worst = std::max(worst, c.max_norm);
      ok = ok && c.max_norm <= kDenseZero && c.pauli_zero;
      agree = agree && c.routes_agree;
    }
    return {detail::finish("lemma1_trivial_family", n, worst, ok, agree)};
  });

  tasks.emplace_back([&]() -> std::vector<CheckResult> {
    Rng rng(derive_seed(opts.seed, 2));
    detail::NonzeroAccum acc;
    for (int s = 0; s < n; ++s) {
      const auto c = zeeman_commutant(random_generic_state(rng), angles, params);
      acc.add(c.max_norm, c.pauli_zero, c.routes_agree);
    }
    return {detail::finish("lemma1_generic_states", n, acc.margin, acc.ok, acc.agree)};
  });

  tasks.emplace_back([&]() -> std::vector<CheckResult> {
    // Unitality: one full period maps 1/64 to e^{-kT} 1/64 for arbitrary
    // segment generators.
    Rng rng(derive_seed(opts.seed, 3));
    double worst = 0.0;
    const DensityMatrix env = DensityMatrix::maximally_mixed(kEnvDim);
    for (int s = 0; s < n; ++s) {
      const Propagator coll(to_dense(random_system_hamiltonian(rng) + random_pair_interaction(rng)));
      const Propagator free(system_block(random_system_hamiltonian(rng)));
      auto segs = std::make_shared<SegmentPropagators>(SegmentPropagators{coll, free});
      CollisionEngine e(params, FieldAngles{}, segs, DensityMatrix::maximally_mixed(kSystemDim), env);
      e.step();
      const Matrix expect = std::exp(-params.k * params.period()) * Matrix::Identity(kJointDim, kJointDim) / 64.0;
      worst = std::max(worst, (e.joint().matrix() - expect).norm());
    }
    return {detail::finish("lemma2_unitality", n, worst, worst <= kDenseZero, true)};
  });

  tasks.emplace_back([&]() -> std::vector<CheckResult> {
    Rng rng(derive_seed(opts.seed, 4));
    const DensityMatrix env = DensityMatrix::maximally_mixed(kEnvDim);
    detail::NonzeroAccum acc;
    bool ok = true;
    bool agree = true;
    std::string detail_msg;
    for (int s = 0; s < n; ++s) {
      BlochVector r = draw_bloch(rng, s % 2 == 0 ? InitialFamily::BallUniform : InitialFamily::ZAxis);
      if (r.norm() < 1e-3) r.z = 0.5;
      const auto f = verify_lemma3(params, tensor(system_state_from_bloch(r), env), angles, hex, v_table);
      acc.margin = std::min({acc.margin, f.norm_state, f.norm_singlet, f.norm_zeeman});
      ok = ok && f.state_vs_full && f.singlet_vs_h0v && f.zeeman_vs_h0v;
      agree = agree && f.routes_agree;
    }
    const auto mm = verify_lemma3(params, DensityMatrix::maximally_mixed(kJointDim), angles, hex, v_table);
    if (mm.state_vs_full || !mm.singlet_vs_h0v || !mm.zeeman_vs_h0v) {
      ok = false;
      detail_msg = "maximally mixed state flags wrong";
    }
    SensorParams no_v = params;
    const auto nv = verify_lemma3(no_v, tensor(system_state_from_bloch({0, 0, 0.5}), env), angles, hex, PauliSum{});
    if (nv.singlet_vs_h0v) {
      ok = false;
      detail_msg += (detail_msg.empty() ? "" : "; ") + std::string("[P, H_ex] nonzero without V");
    }
    agree = agree && mm.routes_agree && nv.routes_agree;
    return {detail::finish("lemma3_necessity", n, acc.margin, ok, agree, detail_msg)};
  });

  tasks.emplace_back([&]() -> std::vector<CheckResult> {
    Rng rng(derive_seed(opts.seed, 5));
    detail::NonzeroAccum acc;
    const PauliSum h = hex + v_table;
    for (int s = 0; s < n; ++s) {
      const DensityMatrix rho = detail::prop5_state(rng, s);
      const PauliSum rho_p = system_operator(rho.matrix());
      const Matrix rho_d = kron(rho.matrix(), Matrix::Identity(kEnvDim, kEnvDim)) / 8.0;
      double best = 0.0;
      bool pz = true;
      bool agree = true;
      for (const auto& ang : angles) {
        const PauliSum full = h + h_zeeman(params, ang);
        const bool z = commutator(rho_p, full).empty();
        const double dn = dense_commutator(rho_d, to_dense(full)).norm();
        best = std::max(best, dn);
        pz = pz && z;
        agree = agree && (z == (dn <= kDenseZero));
        if (dn > kNonzeroThreshold && !z) break;
      }
      acc.add(best, pz, agree);
    }
    return {detail::finish("prop5_forward", n, acc.margin, acc.ok, acc.agree)};
  });

  tasks.emplace_back([&]() -> std::vector<CheckResult> {
    detail::VanishAccum acc;
    const PauliSum rho_p = PauliSum::identity(1.0 / 64.0);
    for (const auto& ang : angles) acc.add(commutator_norms(rho_p, hex + v_table + h_zeeman(params, ang)));
    return {detail::finish("prop5_reverse", static_cast<int>(angles.size()), acc.worst, acc.ok, acc.agree)};
  });

  tasks.emplace_back([&]() -> std::vector<CheckResult> {
    Rng rng(derive_seed(opts.seed, 6));
    detail::NonzeroAccum l6;
    detail::NonzeroAccum l7;
    detail::NonzeroAccum l8;
    for (int s = 0; s < n; ++s) {
      PauliSum v = random_pair_interaction(rng);
      if (s == 0) v = v_interaction(params);
      if (s == 1) v = v_interaction(SensorParams::swap_reference());
      const auto c6 = commutator_norms(p_singlet, v);
      l6.add(c6.dense, c6.pauli_zero, c6.agree());
      const PauliSum h0 = random_system_hamiltonian(rng);
      const auto c7 = commutator_norms(p_singlet, h0 + v);
      l7.add(c7.dense, c7.pauli_zero, c7.agree());
      double best = 0.0;
      bool pz = true;
      bool agree = true;
      const PauliSum h0v = h0 + v;
      for (const auto& ang : angles) {
        const auto c8 = commutator_norms(h_zeeman(params, ang), h0v);
        best = std::max(best, c8.dense);
        pz = pz && c8.pauli_zero;
        agree = agree && c8.agree();
        if (!c8.pauli_zero && c8.dense > kNonzeroThreshold) break;
      }
      l8.add(best, pz, agree);
    }
    return {detail::finish("lemma6_interaction", n, l6.margin, l6.ok, l6.agree),
            detail::finish("lemma7_interaction", n, l7.margin, l7.ok, l7.agree),
            detail::finish("lemma8_interaction", n, l8.margin, l8.ok, l8.agree)};
  });

  tasks.emplace_back([&]() -> std::vector<CheckResult> {
    // Converse: an interaction acting only on the environment particles
    // commutes with the singlet projector.
    Rng rng(derive_seed(opts.seed, 7));
    detail::VanishAccum acc;
    for (int s = 0; s < n; ++s) acc.add(commutator_norms(p_singlet, random_pair_interaction(rng, false, false)));
    return {detail::finish("interaction_converse", n, acc.worst, acc.ok, acc.agree)};
  });

  std::vector<std::vector<CheckResult>> results(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), opts.threads,
               [&](int i) { results[static_cast<std::size_t>(i)] = tasks[static_cast<std::size_t>(i)](); });

  VerificationReport report;
  report.n_angles = static_cast<int>(angles.size());
  for (auto& group : results)
    for (auto& r : group) report.checks.push_back(std::move(r));
  return report;
}

}  // namespace rpsense
