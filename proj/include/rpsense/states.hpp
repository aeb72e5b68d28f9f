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

// Density matrices over qubit registers, entropies in bits, and the
// basis-independent coherence measures.

#include <rpsense/core.hpp>

#include <algorithm>
#include <bit>
#include <vector>

namespace rpsense {

/// Eigenvalues at or below this threshold contribute nothing to entropies.
inline constexpr double kEntropyEigenFloor = 1e-12;

/// Hermitian, positive semidefinite matrix over n qubits. The trace is not
/// forced to one: states evolved under recombination keep their decayed
/// trace, and normalization is an explicit caller decision.
class DensityMatrix {
 public:
  DensityMatrix() = default;

  explicit DensityMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() < 2 || !std::has_single_bit(static_cast<unsigned>(m_.rows()))) {
      throw InvalidInput("density matrix must be square with power-of-two dimension >= 2");
    }
    const double scale = std::max(1.0, max_abs(m_));
    if (max_abs(m_ - m_.adjoint()) > 1e-10 * scale) {
      throw InvalidInput("density matrix is not Hermitian");
    }
    m_ = hermitian_part(m_);
    trace_ = m_.trace().real();
    if (!(trace_ > 0.0) || trace_ > 1.0 + 1e-10) {
      throw InvalidInput("density matrix trace outside (0, 1]: " + std::to_string(trace_));
    }
  }

  static DensityMatrix maximally_mixed(int dim) {
    return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim));
  }

  /// |psi><psi| for a unit vector psi.
  static DensityMatrix pure(const Vector& psi) {
    const double n = psi.norm();
    if (std::abs(n - 1.0) > 1e-10) throw InvalidInput("pure state vector must be normalized");
    return DensityMatrix(psi * psi.adjoint());
  }

  /// |index><index| in the computational basis of dimension `dim`.
  static DensityMatrix basis_state(int dim, int index) {
    Vector v = Vector::Zero(dim);
    v(index) = 1.0;
    return pure(v);
  }

  const Matrix& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  int num_qubits() const { return std::countr_zero(static_cast<unsigned>(m_.rows())); }
  double trace() const { return trace_; }

  DensityMatrix normalized() const { return DensityMatrix(m_ / trace_); }

  /// Scales the state; used for decay factors.
  DensityMatrix scaled(double factor) const {
    DensityMatrix out = *this;
    out.m_ *= factor;
    out.trace_ *= factor;
    if (!(out.trace_ > 0.0)) throw InvalidInput("scaling must keep the trace positive");
    return out;
  }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  /// Builds a state from a matrix produced by trusted propagation code,
  /// skipping the trace bound (round-off may exceed it by ~1e-15).
  static DensityMatrix from_trusted(Matrix m) {
    DensityMatrix out;
    out.m_ = hermitian_part(m);
    out.trace_ = out.m_.trace().real();
    return out;
  }

 private:
  Matrix m_;
  double trace_ = 0.0;
};

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix::from_trusted(kron(a.matrix(), b.matrix()));
}

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

/// (1 + r . sigma) / 2.
inline DensityMatrix qubit_from_bloch(const BlochVector& r) {
  if (r.norm() > 1.0 + 1e-12) throw InvalidInput("Bloch vector longer than 1");
  Matrix m(2, 2);
  m << 0.5 * (1.0 + r.z), 0.5 * Complex(r.x, -r.y), 0.5 * Complex(r.x, r.y), 0.5 * (1.0 - r.z);
  return DensityMatrix(m);
}

enum class InitialFamily { BallUniform, ZAxis };

inline std::string to_string(InitialFamily f) {
  return f == InitialFamily::BallUniform ? "ball" : "zaxis";
}

inline BlochVector draw_bloch(Rng& rng, InitialFamily family) {
  if (family == InitialFamily::ZAxis) return {0.0, 0.0, rng.uniform(-1.0, 1.0)};
  // Uniform direction times radius u^(1/3).
  const double cos_t = rng.uniform(-1.0, 1.0);
  const double az = rng.uniform(0.0, 2.0 * kPi);
  const double radius = std::cbrt(rng.uniform());
  const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
  return {radius * sin_t * std::cos(az), radius * sin_t * std::sin(az), radius * cos_t};
}

/// rho0 (x) rho0 (x) 1/2 on (A, B, C) with rho0 the qubit of Bloch vector r.
inline DensityMatrix system_state_from_bloch(const BlochVector& r) {
  const DensityMatrix q = qubit_from_bloch(r);
  return tensor(tensor(q, q), DensityMatrix::maximally_mixed(2));
}

/// Three identical qubits rho0^(x)3, the product form used for environments.
inline DensityMatrix product_state_from_bloch(const BlochVector& r) {
  const DensityMatrix q = qubit_from_bloch(r);
  return tensor(tensor(q, q), q);
}

inline DensityMatrix sample_initial_family(Rng& rng, InitialFamily family) {
  return system_state_from_bloch(draw_bloch(rng, family));
}

enum class EntropyMode { Normalized, Raw };

/// -sum lambda log2 lambda of the eigenvalues of a PSD matrix (already
/// divided by the trace in Normalized mode).
inline double entropy_of_eigenvalues(const RealVector& eigenvalues) {
  double s = 0.0;
  for (double lam : eigenvalues) {
    if (lam < -1e-8) {
      throw NumericalError("negative eigenvalue " + std::to_string(lam) + " in entropy");
    }
    if (lam > kEntropyEigenFloor) s -= lam * std::log2(lam);
  }
  return s;
}

inline double von_neumann_entropy(const Matrix& m, EntropyMode mode = EntropyMode::Normalized) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  RealVector ev = es.eigenvalues();
  if (mode == EntropyMode::Normalized) {
    const double tr = m.trace().real();
    if (!(tr > 0.0)) throw InvalidInput("entropy of a state with non-positive trace");
    ev /= tr;
  }
  return entropy_of_eigenvalues(ev);
}

inline double von_neumann_entropy(const DensityMatrix& rho, EntropyMode mode = EntropyMode::Normalized) {
  return von_neumann_entropy(rho.matrix(), mode);
}

/// log2 d - S(rho) on a unit-trace state.
inline double coherence_c1(const DensityMatrix& rho) {
  if (std::abs(rho.trace() - 1.0) > 1e-8) {
    throw ContractError("coherence_c1 needs unit trace (got " + std::to_string(rho.trace()) +
                        "); use coherence_c1_star for decayed states");
  }
  return std::log2(static_cast<double>(rho.dim())) - von_neumann_entropy(rho, EntropyMode::Raw);
}

/// Distance to the scaled maximally mixed state tr(rho) 1/d, valid for
/// trace-decreasing states: (log2 d - log2 tr) tr - S_raw.
inline double coherence_c1_star(const Matrix& m) {
  const double tr = m.trace().real();
  if (!(tr > 0.0)) throw InvalidInput("coherence_c1_star needs a positive trace");
  const double d = static_cast<double>(m.rows());
  return (std::log2(d) - std::log2(tr)) * tr - von_neumann_entropy(m, EntropyMode::Raw);
}

inline double coherence_c1_star(const DensityMatrix& rho) { return coherence_c1_star(rho.matrix()); }

/// Partial trace keeping the listed qubit sites (0 = most significant).
inline Matrix partial_trace(const Matrix& m, int num_qubits, std::vector<int> keep) {
  if (keep.empty()) throw InvalidInput("partial_trace needs a non-empty keep set");
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  for (int s : keep) {
    if (s < 0 || s >= num_qubits) throw InvalidInput("partial_trace site out of range");
  }
  std::vector<int> traced;
  for (int s = 0; s < num_qubits; ++s) {
    if (!std::binary_search(keep.begin(), keep.end(), s)) traced.push_back(s);
  }
  const int nk = static_cast<int>(keep.size());
  const int nt = static_cast<int>(traced.size());
  auto embed = [num_qubits](const std::vector<int>& sites, int value) {
    int idx = 0;
    const int n = static_cast<int>(sites.size());
    for (int i = 0; i < n; ++i) {
      const int bit = (value >> (n - 1 - i)) & 1;
      idx |= bit << (num_qubits - 1 - sites[static_cast<std::size_t>(i)]);
    }
    return idx;
  };
  const int dk = 1 << nk;
  const int dt = 1 << nt;
  std::vector<int> keep_idx(static_cast<std::size_t>(dk));
  std::vector<int> trace_idx(static_cast<std::size_t>(dt));
  for (int i = 0; i < dk; ++i) keep_idx[static_cast<std::size_t>(i)] = embed(keep, i);
  for (int i = 0; i < dt; ++i) trace_idx[static_cast<std::size_t>(i)] = embed(traced, i);
  Matrix out = Matrix::Zero(dk, dk);
  for (int i = 0; i < dk; ++i) {
    for (int j = 0; j < dk; ++j) {
      Complex acc = 0.0;
      for (int t : trace_idx) acc += m(keep_idx[static_cast<std::size_t>(i)] + t, keep_idx[static_cast<std::size_t>(j)] + t);
      out(i, j) = acc;
    }
  }
  return out;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, std::vector<int> keep) {
  return DensityMatrix::from_trusted(partial_trace(rho.matrix(), rho.num_qubits(), std::move(keep)));
}

/// tr_B of a matrix on dA x dB (first factor major).
inline Matrix trace_out_second(const Matrix& m, int da, int db) {
  Matrix out = Matrix::Zero(da, da);
  for (int i = 0; i < da; ++i) {
    for (int j = 0; j < da; ++j) {
      Complex acc = 0.0;
      for (int e = 0; e < db; ++e) acc += m(i * db + e, j * db + e);
      out(i, j) = acc;
    }
  }
  return out;
}

/// tr_A of a matrix on dA x dB.
inline Matrix trace_out_first(const Matrix& m, int da, int db) {
  Matrix out = Matrix::Zero(db, db);
  for (int s = 0; s < da; ++s) out += m.block(s * db, s * db, db, db);
  return out;
}

}  // namespace rpsense
