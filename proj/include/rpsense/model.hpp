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

// Hamiltonians and projectors of the three-radical sensor. Energies are in
// units of the A-B coupling scale d_AB and hbar = 1. The radicals sit on the
// z axis at z = -0.5, 0.5, 1.5, but no term used here depends on position.

#include <rpsense/pauli.hpp>

#include <string>

namespace rpsense {

enum class InteractionKind { Cnot, Swap };

inline std::string to_string(InteractionKind k) {
  switch (k) {
    case InteractionKind::Cnot: return "cnot";
    case InteractionKind::Swap: return "swap";
  }
  throw InvalidInput("unknown interaction kind");
}

inline InteractionKind interaction_from_string(const std::string& s) {
  if (s == "cnot" || s == "CNOT") return InteractionKind::Cnot;
  if (s == "swap" || s == "SWAP") return InteractionKind::Swap;
  throw InvalidInput("unknown interaction kind '" + s + "'");
}

/// Model constants. Defaults reproduce the reference configuration:
/// isotropic exchange J = 1, k = 0.0245, gamma*B0 = 0.215,
/// tau_se = tau_ee = 1 and J_se * tau_se = pi/2 (a CNOT per collision).
struct SensorParams {
  double j_abc = 1.0;
  double j_se_tau = kPi / 2.0;
  double k = 0.0245;
  double gamma_b0 = 0.215;
  double tau_se = 1.0;
  double tau_ee = 1.0;
  InteractionKind interaction_kind = InteractionKind::Cnot;

  static SensorParams reference() { return {}; }

  /// Reference constants with the isotropic exchange collision calibrated to
  /// a perfect SWAP (J_se * tau_se = pi/4).
  static SensorParams swap_reference() {
    SensorParams p;
    p.interaction_kind = InteractionKind::Swap;
    p.j_se_tau = kPi / 4.0;
    return p;
  }

  double j_se() const { return j_se_tau / tau_se; }
  double period() const { return tau_se + tau_ee; }

  void validate() const {
    if (!(k > 0.0)) throw InvalidInput("recombination rate k must be positive");
    if (!(tau_se > 0.0)) throw InvalidInput("tau_se must be positive");
    if (!(tau_ee > 0.0)) throw InvalidInput("tau_ee must be positive");
    if (!std::isfinite(j_abc) || !std::isfinite(j_se_tau) || !std::isfinite(gamma_b0)) {
      throw InvalidInput("model couplings must be finite");
    }
    if (interaction_kind != InteractionKind::Cnot && interaction_kind != InteractionKind::Swap) {
      throw InvalidInput("unknown interaction kind");
    }
  }
};

/// Field direction: theta is the azimuth in [0, 2pi), phi the polar angle in
/// [0, pi].
struct FieldAngles {
  double theta = 0.0;
  double phi = 0.0;

  std::array<double, 3> direction() const {
    return {std::cos(theta) * std::sin(phi), std::sin(theta) * std::sin(phi), std::cos(phi)};
  }
};

/// -J sum_{a<b} (1/2 + 2 S_a . S_b) over the three radical pairs.
inline PauliSum h_exchange(const SensorParams& p) {
  PauliSum h;
  if (p.j_abc == 0.0) return h;
  constexpr std::array<std::pair<int, int>, 3> pairs{{{kA, kB}, {kA, kC}, {kB, kC}}};
  for (auto [a, b] : pairs) {
    h += PauliSum::identity(-0.5 * p.j_abc);
    for (Pauli s : {Pauli::X, Pauli::Y, Pauli::Z}) {
      h.add(PauliString::pair(a, s, b, s, -0.5 * p.j_abc));
    }
  }
  return h;
}

/// gamma B0 n . sum_a S_a, acting on the radicals only.
inline PauliSum h_zeeman(const SensorParams& p, const FieldAngles& angles) {
  const auto n = angles.direction();
  const double half = 0.5 * p.gamma_b0;
  PauliSum h;
  for (int site : {kA, kB, kC}) {
    h.add(PauliString::single(site, Pauli::X, half * n[0]));
    h.add(PauliString::single(site, Pauli::Y, half * n[1]));
    h.add(PauliString::single(site, Pauli::Z, half * n[2]));
  }
  return h;
}

/// Radical-environment coupling for one radical `site` and its own
/// environment particle.
inline PauliSum v_pair(const SensorParams& p, int site) {
  const int env = site + 3;
  const double j = p.j_se();
  PauliSum v;
  switch (p.interaction_kind) {
    case InteractionKind::Cnot:
      // (J/2)(1 - Z_s)(1 - X_e)
      v += PauliSum::identity(0.5 * j);
      v.add(PauliString::single(env, Pauli::X, -0.5 * j));
      v.add(PauliString::single(site, Pauli::Z, -0.5 * j));
      v.add(PauliString::pair(site, Pauli::Z, env, Pauli::X, 0.5 * j));
      return v;
    case InteractionKind::Swap:
      for (Pauli s : {Pauli::X, Pauli::Y, Pauli::Z}) v.add(PauliString::pair(site, s, env, s, j));
      return v;
  }
  throw InvalidInput("unknown interaction kind");
}

inline PauliSum v_interaction(const SensorParams& p) {
  PauliSum v;
  for (int site : {kA, kB, kC}) v += v_pair(p, site);
  return v;
}

/// Singlet projector on (A, B): (1 - sigma_A . sigma_B) / 4.
inline PauliSum singlet_projector() {
  PauliSum pr = PauliSum::identity(0.25);
  for (Pauli s : {Pauli::X, Pauli::Y, Pauli::Z}) pr.add(PauliString::pair(kA, s, kB, s, -0.25));
  return pr;
}

/// Total spin component sum_a sigma_i^a on the radicals.
inline PauliSum total_system_spin(Pauli axis) {
  PauliSum s;
  for (int site : {kA, kB, kC}) s.add(PauliString::single(site, axis));
  return s;
}

/// Restriction of a Pauli sum supported on the radicals to the 8-dim system
/// space.
inline Matrix system_block(const PauliSum& op) {
  if (op.touches({kEA, kEB, kEC})) {
    throw InvalidInput("operator acts on environment sites; no system restriction");
  }
  const Matrix full = to_dense(op);
  // Basis index = 8 * system + environment; environment index 0 block.
  Matrix out(kSystemDim, kSystemDim);
  for (int i = 0; i < kSystemDim; ++i) {
    for (int j = 0; j < kSystemDim; ++j) out(i, j) = full(i * kEnvDim, j * kEnvDim);
  }
  return out;
}

}  // namespace rpsense
