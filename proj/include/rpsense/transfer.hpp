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

// One collision period as a linear map on the 8-dim system state. Because
// the environment is refreshed every period, rho_S(n+1) = L[rho_S(n)] for a
// fixed 64 x 64 superoperator L at given parameters and field angles. Many
// initial states can then be advanced together with one matrix product per
// period. vec() is column-major: index a + 8 b holds rho(a, b).

#include <rpsense/dynamics.hpp>

#include <vector>

namespace rpsense {

inline constexpr int kVecDim = kSystemDim * kSystemDim;

namespace detail {

/// G_ij = (exp(a_ij tau) - 1) / a_ij with a_ij = -i (w_i - w_j) - k.
inline Matrix yield_kernel(const RealVector& energies, double k, double tau) {
  const Eigen::Index d = energies.size();
  Matrix g(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      const Complex a(-k, -(energies(i) - energies(j)));
      g(i, j) = (std::exp(a * tau) - 1.0) / a;
    }
  }
  return g;
}

/// k sum_ij P_ji rho_ij G_ij with everything in the eigenbasis.
inline Complex kernel_contract(const Matrix& rho_tilde, const Matrix& proj_tilde, const Matrix& kernel, double k) {
  return k * (proj_tilde.transpose().cwiseProduct(rho_tilde).cwiseProduct(kernel)).sum();
}

inline Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

inline Matrix unvec(const Eigen::Ref<const Vector>& v, int d) {
  Matrix m(d, d);
  Eigen::Map<Vector>(m.data(), m.size()) = v;
  return m;
}

}  // namespace detail

/// Linear pieces of one collision period acting on vec(rho_S).
struct IterationMaps {
  /// vec(rho_S(n+1)) = period_map vec(rho_S(n)).
  Matrix period_map;
  /// Singlet yield accumulated over one period (both segments, analytic).
  Eigen::RowVectorXcd yield_row;
  /// Sub-segments per segment for weighted quadrature (0 when no nodes).
  int n_sub = 0;
  /// vec(rho_S) at quadrature nodes of the collision segment, m = 0..n_sub.
  std::vector<Matrix> collision_nodes;
  /// Free-segment unitaries and decay at nodes m = 0..n_sub, applied to the
  /// post-collision system state: e^{-k t} U rho U^dagger.
  std::vector<Matrix> free_unitaries;
  std::vector<double> free_decay;
  double h_collision = 0.0;
  double h_free = 0.0;
  /// tr[P X] = p_row vec(X) for the singlet projector restricted to S.
  Eigen::RowVectorXcd p_row;
};

/// Environment-independent pieces of one period at fixed angles: segment
/// unitaries at the quadrature nodes and the yield observables
/// W = V (P~ o G^T) V^dagger, so that a segment yield is k tr[W rho].
struct SegmentKernels {
  SensorParams params;
  int n_sub = 0;
  double h_collision = 0.0;
  double h_free = 0.0;
  Matrix u_collision;
  Matrix u_free;
  Matrix w_collision;
  Matrix w_free;
  std::vector<Matrix> collision_node_unitaries;
  std::vector<Matrix> free_node_unitaries;
};

inline SegmentKernels build_segment_kernels(const SensorParams& params, const SegmentPropagators& segs, int n_sub) {
  if (n_sub < 0) throw InvalidInput("n_sub must be non-negative");
  const Propagator& pa = segs.collision;
  const Propagator& pb = segs.free;
  SegmentKernels kern;
  kern.params = params;
  kern.n_sub = n_sub;
  kern.u_collision = pa.unitary(params.tau_se);
  kern.u_free = pb.unitary(params.tau_ee);
  const Matrix ga = detail::yield_kernel(pa.energies(), params.k, params.tau_se);
  const Matrix gb = detail::yield_kernel(pb.energies(), params.k, params.tau_ee);
  kern.w_collision = pa.from_eigenbasis(pa.to_eigenbasis(to_dense(singlet_projector())).cwiseProduct(ga.transpose()));
  kern.w_free = pb.from_eigenbasis(pb.to_eigenbasis(system_block(singlet_projector())).cwiseProduct(gb.transpose()));
  if (n_sub > 0) {
    kern.h_collision = params.tau_se / n_sub;
    kern.h_free = params.tau_ee / n_sub;
    for (int m = 0; m <= n_sub; ++m) {
      kern.collision_node_unitaries.push_back(pa.unitary(m * kern.h_collision));
      kern.free_node_unitaries.push_back(pb.unitary(m * kern.h_free));
    }
  }
  return kern;
}

namespace detail {

/// Superoperator of X -> scale * tr_E[U (X (x) rho_E) U^dagger] acting on
/// vec(X), assembled from the Kraus operators
/// K_jk = sqrt(lambda_k) (1 (x) <j|) U (1 (x) |e_k>).
inline Matrix collision_superop(const Matrix& u, const RealVector& lam, const Matrix& evecs, double scale) {
  Matrix sup = Matrix::Zero(kVecDim, kVecDim);
  const Matrix eye = Matrix::Identity(kSystemDim, kSystemDim);
  for (int k = 0; k < kEnvDim; ++k) {
    if (lam(k) <= 0.0) continue;
    const Matrix ue = u * kron(eye, evecs.col(k));
    const double amp = std::sqrt(scale * lam(k));
    for (int j = 0; j < kEnvDim; ++j) {
      Matrix kr(kSystemDim, kSystemDim);
      for (int s = 0; s < kSystemDim; ++s)
        for (int s2 = 0; s2 < kSystemDim; ++s2) kr(s, s2) = amp * ue(s * kEnvDim + j, s2);
      sup += kron(kr.conjugate(), kr);
    }
  }
  return sup;
}

/// Row r with r vec(X) = tr[M X].
inline Eigen::RowVectorXcd trace_row(const Matrix& m) {
  Eigen::RowVectorXcd row(m.size());
  const auto d = m.rows();
  for (Eigen::Index b = 0; b < d; ++b)
    for (Eigen::Index a = 0; a < d; ++a) row(a + d * b) = m(b, a);
  return row;
}

}  // namespace detail

inline IterationMaps build_iteration_maps(const SegmentKernels& kern, const DensityMatrix& fresh_env) {
  if (fresh_env.dim() != kEnvDim) throw InvalidInput("environment state must be 8-dim");
  const SensorParams& params = kern.params;
  const double k = params.k;
  Eigen::SelfAdjointEigenSolver<Matrix> es(fresh_env.matrix());
  RealVector lam = es.eigenvalues();
  for (Eigen::Index i = 0; i < lam.size(); ++i) lam(i) = std::max(lam(i), 0.0);
  const Matrix& evecs = es.eigenvectors();

  IterationMaps maps;
  maps.n_sub = kern.n_sub;
  maps.h_collision = kern.h_collision;
  maps.h_free = kern.h_free;
  maps.p_row = detail::trace_row(system_block(singlet_projector()));

  const Matrix coll = detail::collision_superop(kern.u_collision, lam, evecs, std::exp(-k * params.tau_se));
  const Matrix free_sup = std::exp(-k * params.tau_ee) * kron(kern.u_free.conjugate(), kern.u_free);
  maps.period_map = free_sup * coll;

  // tr[W (X (x) rho_E)] = tr[R X] with R = tr_E[W (1 (x) rho_E)].
  const Matrix r_coll = trace_out_second(kern.w_collision * kron(Matrix::Identity(kSystemDim, kSystemDim), fresh_env.matrix()),
                                         kSystemDim, kEnvDim);
  maps.yield_row = k * (detail::trace_row(r_coll) + detail::trace_row(kern.w_free) * coll);

  for (int m = 0; m <= kern.n_sub && kern.n_sub > 0; ++m) {
    const auto mi = static_cast<std::size_t>(m);
    maps.collision_nodes.push_back(
        detail::collision_superop(kern.collision_node_unitaries[mi], lam, evecs, std::exp(-k * m * kern.h_collision)));
    maps.free_unitaries.push_back(kern.free_node_unitaries[mi]);
    maps.free_decay.push_back(std::exp(-k * m * kern.h_free));
  }
  return maps;
}

inline IterationMaps build_iteration_maps(const SensorParams& params, const SegmentPropagators& segs,
                                          const DensityMatrix& fresh_env, int n_sub) {
  return build_iteration_maps(build_segment_kernels(params, segs, n_sub), fresh_env);
}

/// Trapezoid weight of node m out of n_sub sub-intervals of width h.
inline double trapezoid_weight(int m, int n_sub, double h) { return (m == 0 || m == n_sub) ? 0.5 * h : h; }

}  // namespace rpsense
