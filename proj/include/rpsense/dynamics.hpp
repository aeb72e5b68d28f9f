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

// Piecewise-analytic propagation of drho/dt = -i[H, rho] - k rho through the
// two-segment collision schedule. Each segment Hamiltonian is diagonalized
// once; in its eigenbasis element (i, j) evolves as exp((-i dw_ij - k) t).

#include <rpsense/model.hpp>
#include <rpsense/states.hpp>

#include <memory>

namespace rpsense {

/// Cached eigendecomposition H = V diag(w) V^dagger of a segment Hamiltonian.
class Propagator {
 public:
  Propagator() = default;

  explicit Propagator(const Matrix& hamiltonian) {
    if (hamiltonian.rows() != hamiltonian.cols()) throw InvalidInput("Hamiltonian must be square");
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(hamiltonian));
    if (es.info() != Eigen::Success) throw NumericalError("Hamiltonian eigendecomposition failed");
    energies_ = es.eigenvalues();
    vectors_ = es.eigenvectors();
  }

  explicit Propagator(const PauliSum& hamiltonian) : Propagator(to_dense(hamiltonian)) {}

  int dim() const { return static_cast<int>(energies_.size()); }
  const RealVector& energies() const { return energies_; }
  const Matrix& vectors() const { return vectors_; }

  Matrix to_eigenbasis(const Matrix& m) const { return vectors_.adjoint() * m * vectors_; }
  Matrix from_eigenbasis(const Matrix& m) const { return vectors_ * m * vectors_.adjoint(); }

  Matrix reconstruct() const {
    return vectors_ * energies_.cast<Complex>().asDiagonal() * vectors_.adjoint();
  }

  /// exp(-i H tau).
  Matrix unitary(double tau) const {
    Vector phases(dim());
    for (int i = 0; i < dim(); ++i) phases(i) = std::exp(-kI * energies_(i) * tau);
    return vectors_ * phases.asDiagonal() * vectors_.adjoint();
  }

  /// Elementwise factors exp((-i (w_i - w_j) - k) tau).
  Matrix decay_phases(double tau, double k) const {
    const int d = dim();
    Vector ph(d);
    for (int i = 0; i < d; ++i) ph(i) = std::exp(-kI * energies_(i) * tau);
    const double damp = std::exp(-k * tau);
    Matrix f(d, d);
    for (int j = 0; j < d; ++j) {
      for (int i = 0; i < d; ++i) f(i, j) = damp * ph(i) * std::conj(ph(j));
    }
    return f;
  }

 private:
  RealVector energies_;
  Matrix vectors_;
};

/// e^{-k tau} U rho U^dagger with U = exp(-i H tau), evaluated in the
/// eigenbasis of H.
inline Matrix evolve_matrix(const Matrix& rho, const Propagator& prop, double tau, double k) {
  if (tau < 0.0) throw InvalidInput("segment duration must be non-negative");
  if (rho.rows() != prop.dim()) throw InvalidInput("state and propagator dimensions differ");
  if (tau == 0.0) return rho;
  const Matrix evolved = prop.to_eigenbasis(rho).cwiseProduct(prop.decay_phases(tau, k));
  return prop.from_eigenbasis(evolved);
}

inline DensityMatrix evolve_segment(const DensityMatrix& rho, const Propagator& prop, double tau, double k) {
  return DensityMatrix::from_trusted(evolve_matrix(rho.matrix(), prop, tau, k));
}

/// Applies a system-only propagator (dimension d_s) to a joint state on
/// d_s x d_e: e^{-k tau} (U (x) 1) rho (U (x) 1)^dagger.
inline Matrix evolve_system_factor(const Matrix& joint, const Propagator& system_prop, double tau, double k) {
  if (tau < 0.0) throw InvalidInput("segment duration must be non-negative");
  const int ds = system_prop.dim();
  const int de = static_cast<int>(joint.rows()) / ds;
  if (ds * de != joint.rows()) throw InvalidInput("joint dimension not divisible by system dimension");
  if (tau == 0.0) return joint;
  const Matrix u = kron(system_prop.unitary(tau), Matrix::Identity(de, de));
  return std::exp(-k * tau) * (u * joint * u.adjoint());
}

/// The two segment generators of one collision period, shared by every
/// trajectory at the same parameters and field angles.
struct SegmentPropagators {
  /// H_ex + H_B + V_SE on the 64-dim joint space (collision segment).
  Propagator collision;
  /// H_ex + H_B restricted to the 8-dim system (free segment); on the joint
  /// space it acts as U (x) 1_E.
  Propagator free;
};

inline std::shared_ptr<const SegmentPropagators> build_segments(const SensorParams& params, const FieldAngles& angles) {
  params.validate();
  const PauliSum system_h = h_exchange(params) + h_zeeman(params, angles);
  auto segs = std::make_shared<SegmentPropagators>();
  segs->collision = Propagator(system_h + v_interaction(params));
  segs->free = Propagator(system_block(system_h));
  return segs;
}

/// Number of collision periods covering the yield horizon
/// t_max = ln(1/eps_tail)/k (at least one).
inline int horizon_periods(const SensorParams& params, double eps_tail) {
  if (!(eps_tail > 0.0 && eps_tail < 1.0)) throw InvalidInput("eps_tail must lie in (0, 1)");
  params.validate();
  const double t_max = std::log(1.0 / eps_tail) / params.k;
  const double periods = t_max / params.period();
  return std::max(1, static_cast<int>(std::ceil(periods - 1e-12)));
}

inline double horizon(const SensorParams& params, double eps_tail) {
  return horizon_periods(params, eps_tail) * params.period();
}

inline constexpr double kDefaultEpsTail = 1e-8;

/// One trajectory of the repeated-collision model. The joint state held
/// between steps is always the product rho_S (x) fresh environment that
/// starts an iteration.
class CollisionEngine {
 public:
  CollisionEngine(const SensorParams& params, const FieldAngles& angles, const DensityMatrix& rho_s0,
                  const DensityMatrix& fresh_env)
      : CollisionEngine(params, angles, build_segments(params, angles), rho_s0, fresh_env) {}

  CollisionEngine(const SensorParams& params, const FieldAngles& angles,
                  std::shared_ptr<const SegmentPropagators> segments, const DensityMatrix& rho_s0,
                  const DensityMatrix& fresh_env)
      : params_(params), angles_(angles), segments_(std::move(segments)), fresh_env_(fresh_env) {
    if (rho_s0.dim() != kSystemDim || fresh_env.dim() != kEnvDim) {
      throw InvalidInput("collision engine needs 8-dim system and environment states");
    }
    joint_ = tensor(rho_s0, fresh_env_);
    initial_trace_ = joint_.trace();
  }

  const SensorParams& params() const { return params_; }
  const FieldAngles& angles() const { return angles_; }
  const SegmentPropagators& segments() const { return *segments_; }
  std::shared_ptr<const SegmentPropagators> shared_segments() const { return segments_; }
  const DensityMatrix& joint() const { return joint_; }
  const DensityMatrix& fresh_env() const { return fresh_env_; }
  double time() const { return t_; }
  int iteration() const { return n_; }
  double initial_trace() const { return initial_trace_; }

  /// Joint state after the collision segment of the current iteration.
  DensityMatrix collided() const { return evolve_segment(joint_, segments_->collision, params_.tau_se, params_.k); }

  /// Advances one period: collision for tau_se, free evolution for tau_ee,
  /// then the environment particles are replaced by fresh ones.
  CollisionEngine& step() { return advance_from(collided()); }

  /// Completes the current iteration given its post-collision joint state.
  CollisionEngine& advance_from(const DensityMatrix& collided_joint) {
    const DensityMatrix system{DensityMatrix::from_trusted(trace_out_second(collided_joint.matrix(), kSystemDim, kEnvDim))};
    const DensityMatrix evolved = evolve_segment(system, segments_->free, params_.tau_ee, params_.k);
    joint_ = tensor(evolved, fresh_env_);
    t_ += params_.period();
    ++n_;
    return *this;
  }

 private:
  SensorParams params_;
  FieldAngles angles_;
  std::shared_ptr<const SegmentPropagators> segments_;
  DensityMatrix joint_;
  DensityMatrix fresh_env_;
  double t_ = 0.0;
  int n_ = 0;
  double initial_trace_ = 1.0;
};

inline CollisionEngine step(CollisionEngine engine) {
  engine.step();
  return engine;
}

/// Classic fixed-step RK4 integration of drho/dt = -i[H, rho] - k rho.
/// Test oracle only.
inline DensityMatrix ode_reference(const DensityMatrix& rho, const PauliSum& h, double k, double tau, double dt) {
  if (!(dt > 0.0) || dt > tau / 100.0 + 1e-15) throw InvalidInput("ode_reference needs 0 < dt <= tau/100");
  if (rho.dim() != kJointDim) throw InvalidInput("ode_reference works on the 64-dim joint space");
  const Matrix hd = to_dense(h);
  auto rhs = [&](const Matrix& r) -> Matrix { return -kI * (hd * r - r * hd) - k * r; };
  const int steps = static_cast<int>(std::llround(tau / dt));
  const double h_step = tau / steps;
  Matrix r = rho.matrix();
  for (int s = 0; s < steps; ++s) {
    const Matrix k1 = rhs(r);
    const Matrix k2 = rhs(r + 0.5 * h_step * k1);
    const Matrix k3 = rhs(r + 0.5 * h_step * k2);
    const Matrix k4 = rhs(r + h_step * k3);
    r += (h_step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return DensityMatrix::from_trusted(r);
}

}  // namespace rpsense
