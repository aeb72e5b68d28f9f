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

// Mutual information, measurement-optimized discord and Holevo information
// between the two factors of a bipartite state. States are trace-normalized
// before any measure is taken, so decayed states can be passed directly.
//
// Discord measures factor X with rank-one projectors U|i><i|U^dagger and
// conditions the other factor Y:
//   D = S(X) - S(XY) + min_U sum_i p_i S(rho_{Y|i}),   chi = I - D.
// The minimization is heuristic: the result is an upper bound on the true
// discord, reproducible for a fixed seed.

#include <rpsense/states.hpp>

#include <optional>

namespace rpsense {

enum class MeasuredSide { First, Second };

struct Bipartition {
  int dim_first = kSystemDim;
  int dim_second = kEnvDim;
};

struct MeasurementBasis {
  /// Columns are the measured directions on the measured factor.
  Matrix unitary;

  Matrix projector(int i) const { return unitary.col(i) * unitary.col(i).adjoint(); }
};

struct DiscordOptions {
  int restarts = 16;
  int max_iters = 200;
  double tol = 1e-7;
  std::uint64_t seed = 20200101;
  /// Coordinate-descent refinement over generator entries after the
  /// gradient stage.
  bool polish = true;
  /// Trajectory mode: with a warm-start basis from a nearby state only
  /// warm_restarts starts are run, to warm_tol, without the polish stage.
  int warm_restarts = 1;
  double warm_tol = 1e-5;
};

struct DiscordResult {
  double value = 0.0;
  MeasurementBasis basis;
  double mutual = 0.0;
  double holevo = 0.0;
};

struct CorrelationReport {
  double mutual = 0.0;
  double discord = 0.0;
  double holevo = 0.0;
  double system_entropy = 0.0;
  double objective_gap = 0.0;
};

namespace detail {

inline Matrix normalized_matrix(const Matrix& m) {
  const double tr = m.trace().real();
  if (!(tr > 0.0)) throw InvalidInput("correlation measure of a state with non-positive trace");
  return m / tr;
}

/// Reorders a state on dA x dB into dB x dA.
inline Matrix swap_factors(const Matrix& m, int da, int db) {
  Matrix out(m.rows(), m.cols());
  for (int a = 0; a < da; ++a)
    for (int b = 0; b < db; ++b)
      for (int a2 = 0; a2 < da; ++a2)
        for (int b2 = 0; b2 < db; ++b2) out(b * da + a, b2 * da + a2) = m(a * db + b, a2 * db + b2);
  return out;
}

inline void check_split(const Matrix& m, const Bipartition& split) {
  if (m.rows() != static_cast<Eigen::Index>(split.dim_first) * split.dim_second || m.rows() != m.cols()) {
    throw InvalidInput("state dimension does not match the bipartition");
  }
}

/// Conditional-entropy objective for measuring the first factor of a
/// normalized state on dm x do.
class ConditionalEntropy {
 public:
  ConditionalEntropy(const Matrix& rho, int dm, int d_other) : rho_(rho), dm_(dm), do_(d_other) {}

  int measured_dim() const { return dm_; }

  /// sum_i p_i S(rho_{Y|i}) for measurement directions given by U's columns.
  double value(const Matrix& u) const {
    double total = 0.0;
    for (int i = 0; i < dm_; ++i) {
      const Matrix sigma = conditional_block(u.col(i));
      const double p = sigma.trace().real();
      if (p <= 1e-15) continue;
      Eigen::SelfAdjointEigenSolver<Matrix> es(sigma, Eigen::EigenvaluesOnly);
      total += p * entropy_of_eigenvalues(clamp(es.eigenvalues() / p));
    }
    return total;
  }

  /// Value and the Hermitian gradient A with respect to U -> U exp(i G):
  /// dJ = tr(G A).
  double value_and_gradient(const Matrix& u, Matrix& grad) const {
    double total = 0.0;
    Matrix w = Matrix::Zero(dm_, dm_);
    for (int i = 0; i < dm_; ++i) {
      const Matrix sigma = conditional_block(u.col(i));
      const double p = sigma.trace().real();
      if (p <= 1e-15) continue;
      Eigen::SelfAdjointEigenSolver<Matrix> es(sigma / p);
      const RealVector lam = clamp(es.eigenvalues());
      total += p * entropy_of_eigenvalues(lam);
      // M = -log2(rho_{Y|i}), regularized at the entropy floor.
      RealVector neglog(lam.size());
      for (Eigen::Index j = 0; j < lam.size(); ++j) neglog(j) = -std::log2(std::max(lam(j), 1e-15));
      const Matrix m = es.eigenvectors() * neglog.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
      // R[s, s'] = tr[rho_{s s'} M] over do x do blocks; w_i = R u_i.
      Matrix r(dm_, dm_);
      for (int s = 0; s < dm_; ++s) {
        for (int s2 = 0; s2 < dm_; ++s2) {
          r(s, s2) = rho_.block(s * do_, s2 * do_, do_, do_).cwiseProduct(m.transpose()).sum();
        }
      }
      w.col(i) = r * u.col(i);
    }
    const Matrix q = u.adjoint() * w;
    grad = -kI * (q - q.adjoint());
    return total;
  }

 private:
  static RealVector clamp(RealVector v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = std::max(v(i), 0.0);
    return v;
  }

  /// Unnormalized p_i rho_{Y|i} = (u^dagger (x) 1) rho (u (x) 1).
  Matrix conditional_block(const Eigen::Ref<const Vector>& u) const {
    Matrix sigma = Matrix::Zero(do_, do_);
    for (int s = 0; s < dm_; ++s) {
      const Complex cs = std::conj(u(s));
      if (cs == Complex{}) continue;
      for (int s2 = 0; s2 < dm_; ++s2) {
        const Complex coeff = cs * u(s2);
        if (coeff == Complex{}) continue;
        sigma += coeff * rho_.block(s * do_, s2 * do_, do_, do_);
      }
    }
    return hermitian_part(sigma);
  }

  const Matrix& rho_;
  int dm_;
  int do_;
};

inline Matrix expi_hermitian(const Matrix& g, double scale) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(g));
  Vector ph(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < ph.size(); ++i) ph(i) = std::exp(kI * scale * es.eigenvalues()(i));
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

inline Matrix random_unitary(Rng& rng, int d) {
  Matrix g(d, d);
  for (int i = 0; i < d; ++i) {
    g(i, i) = rng.normal();
    for (int j = i + 1; j < d; ++j) {
      const Complex z(rng.normal(), rng.normal());
      g(i, j) = z / std::sqrt(2.0);
      g(j, i) = std::conj(g(i, j));
    }
  }
  return expi_hermitian(g, kPi);
}

/// Hermitian basis element k of d x d matrices (diagonal, symmetric real,
/// antisymmetric imaginary).
inline Matrix hermitian_basis(int d, int k) {
  Matrix e = Matrix::Zero(d, d);
  if (k < d) {
    e(k, k) = 1.0;
    return e;
  }
  int idx = k - d;
  const int pairs = d * (d - 1) / 2;
  const bool imag = idx >= pairs;
  if (imag) idx -= pairs;
  int i = 0;
  while (idx >= d - 1 - i) {
    idx -= d - 1 - i;
    ++i;
  }
  const int j = i + 1 + idx;
  if (imag) {
    e(i, j) = -kI;
    e(j, i) = kI;
  } else {
    e(i, j) = 1.0;
    e(j, i) = 1.0;
  }
  return e;
}

/// Steepest descent on U exp(-i alpha A) with backtracking, then optional
/// coordinate descent over the generator entries. Stops when the gradient
/// norm or the per-step decrease falls below tol.
inline double minimize_conditional_entropy(const ConditionalEntropy& obj, Matrix& u, const DiscordOptions& opts) {
  Matrix grad;
  double f = obj.value_and_gradient(u, grad);
  double alpha = 1.0;
  for (int it = 0; it < opts.max_iters; ++it) {
    const double gnorm2 = grad.squaredNorm();
    if (std::sqrt(gnorm2) < opts.tol) break;
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(grad));
    bool accepted = false;
    double a = std::min(alpha * 2.0, 4.0);
    for (int bt = 0; bt < 40; ++bt) {
      Vector ph(es.eigenvalues().size());
      for (Eigen::Index i = 0; i < ph.size(); ++i) ph(i) = std::exp(-kI * a * es.eigenvalues()(i));
      const Matrix trial = u * (es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint());
      const double ft = obj.value(trial);
      if (ft <= f - 1e-4 * a * gnorm2) {
        u = trial;
        alpha = a;
        accepted = true;
        break;
      }
      a *= 0.5;
    }
    if (!accepted) break;
    const double prev = f;
    f = obj.value_and_gradient(u, grad);
    if (prev - f < 1e-2 * opts.tol) break;
  }
  if (!opts.polish) return f;
  const int d = obj.measured_dim();
  const int n_dirs = d * d;
  for (double step = 1e-2; step >= opts.tol; step *= 0.25) {
    bool improved = true;
    int sweeps = 0;
    while (improved && sweeps < 8) {
      improved = false;
      ++sweeps;
      for (int k = 0; k < n_dirs; ++k) {
        const Matrix e = hermitian_basis(d, k);
        for (double sign : {1.0, -1.0}) {
          const Matrix trial = u * expi_hermitian(e, sign * step);
          const double ft = obj.value(trial);
          if (ft < f - 1e-15) {
            u = trial;
            f = ft;
            improved = true;
            break;
          }
        }
      }
    }
  }
  return f;
}

}  // namespace detail

inline double mutual_information(const Matrix& state, const Bipartition& split = {}) {
  detail::check_split(state, split);
  const Matrix rho = detail::normalized_matrix(state);
  const double sx = von_neumann_entropy(trace_out_second(rho, split.dim_first, split.dim_second), EntropyMode::Raw);
  const double sy = von_neumann_entropy(trace_out_first(rho, split.dim_first, split.dim_second), EntropyMode::Raw);
  const double sxy = von_neumann_entropy(rho, EntropyMode::Raw);
  return sx + sy - sxy;
}

inline double mutual_information(const DensityMatrix& rho, const Bipartition& split = {}) {
  return mutual_information(rho.matrix(), split);
}

/// Measurement-optimized discord with the measurement on `side`. A warm
/// start basis, when given, is tried before the computational basis and the
/// random restarts.
inline DiscordResult discord(const Matrix& state, MeasuredSide side, const DiscordOptions& opts,
                             const Bipartition& split = {}, const Matrix* warm_start = nullptr) {
  if (opts.restarts <= 0) throw InvalidInput("discord needs at least one restart");
  const bool warm = warm_start != nullptr;
  const int restarts = warm ? std::max(1, opts.warm_restarts) : opts.restarts;
  DiscordOptions run_opts = opts;
  if (warm) {
    run_opts.tol = opts.warm_tol;
    run_opts.polish = false;
  }
  detail::check_split(state, split);
  Matrix rho = detail::normalized_matrix(state);
  int dm = split.dim_first;
  int d_other = split.dim_second;
  if (side == MeasuredSide::Second) {
    rho = detail::swap_factors(rho, split.dim_first, split.dim_second);
    std::swap(dm, d_other);
  }
  const double s_measured = von_neumann_entropy(trace_out_second(rho, dm, d_other), EntropyMode::Raw);
  const double s_other = von_neumann_entropy(trace_out_first(rho, dm, d_other), EntropyMode::Raw);
  const double s_joint = von_neumann_entropy(rho, EntropyMode::Raw);
  const double mutual = s_measured + s_other - s_joint;

  const detail::ConditionalEntropy objective(rho, dm, d_other);
  double best = std::numeric_limits<double>::infinity();
  Matrix best_u = Matrix::Identity(dm, dm);
  int restart = 0;
  auto run = [&](Matrix u) {
    const double f = detail::minimize_conditional_entropy(objective, u, run_opts);
    if (f < best) {
      best = f;
      best_u = u;
    }
  };
  if (warm_start != nullptr) {
    if (warm_start->rows() != dm) throw InvalidInput("warm-start basis has the wrong dimension");
    run(*warm_start);
    ++restart;
  }
  if (restart < restarts) {
    run(Matrix::Identity(dm, dm));
    ++restart;
  }
  for (int r = 1; restart < restarts; ++r, ++restart) {
    Rng rng(derive_seed(opts.seed, static_cast<std::uint64_t>(r)));
    run(detail::random_unitary(rng, dm));
  }
  DiscordResult out;
  out.value = std::max(0.0, s_measured - s_joint + best);
  out.basis.unitary = best_u;
  out.mutual = mutual;
  out.holevo = mutual - out.value;
  return out;
}

inline DiscordResult discord(const DensityMatrix& rho, MeasuredSide side = MeasuredSide::First,
                             const DiscordOptions& opts = {}, const Bipartition& split = {}) {
  return discord(rho.matrix(), side, opts, split);
}

inline double holevo(const DensityMatrix& rho, MeasuredSide side = MeasuredSide::First,
                     const DiscordOptions& opts = {}, const Bipartition& split = {}) {
  return discord(rho, side, opts, split).holevo;
}

/// Objectivity diagnostics with the system (first factor) measured.
/// objective_gap = |chi - S(rho_S)| + D vanishes exactly for objective states.
inline CorrelationReport objectivity_report(const DensityMatrix& rho, const DiscordOptions& opts = {},
                                            const Bipartition& split = {}) {
  const DiscordResult d = discord(rho.matrix(), MeasuredSide::First, opts, split);
  CorrelationReport r;
  r.mutual = d.mutual;
  r.discord = d.value;
  r.holevo = d.holevo;
  const Matrix rho_n = detail::normalized_matrix(rho.matrix());
  r.system_entropy = von_neumann_entropy(trace_out_second(rho_n, split.dim_first, split.dim_second), EntropyMode::Raw);
  r.objective_gap = std::abs(r.holevo - r.system_entropy) + r.discord;
  return r;
}

}  // namespace rpsense
