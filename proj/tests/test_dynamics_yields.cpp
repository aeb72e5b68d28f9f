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

#include <rpsense/analysis.hpp>
#include <rpsense/dynamics.hpp>
#include <rpsense/parallel.hpp>
#include <rpsense/transfer.hpp>
#include <rpsense/yields.hpp>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace rpsense {
namespace {

Matrix singlet8() { return system_block(singlet_projector()); }

SensorParams zeeman_only() {
  SensorParams p;
  p.j_abc = 0.0;
  p.j_se_tau = 0.0;
  return p;
}

// Propagation ----------------------------------------------------------------

TEST(Propagator, Reconstruction) {
  Rng rng(1);
  for (int d : {8, 64}) {
    const Matrix h = oracle::random_hermitian(rng, d, 2.0);
    const Propagator p(h);
    EXPECT_LT((p.reconstruct() - h).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((p.vectors().adjoint() * p.vectors() - Matrix::Identity(d, d)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((p.unitary(0.7) - oracle::unitary(h, 0.7)).norm(), 1e-10);
  }
}

TEST(Propagator, EvolveSegmentAgainstExpm) {
  Rng rng(2);
  const Matrix h = oracle::random_hermitian(rng, 64, 2.0);
  const DensityMatrix rho(oracle::random_density(rng, 64));
  const Propagator p(h);
  const double k = 0.0245, tau = 1.3;
  const Matrix u = oracle::unitary(h, tau);
  const Matrix ref = std::exp(-k * tau) * u * rho.matrix() * u.adjoint();
  EXPECT_LT((evolve_segment(rho, p, tau, k).matrix() - ref).norm(), 1e-12);
  EXPECT_LT((evolve_segment(rho, p, 0.0, k).matrix() - rho.matrix()).norm(), 1e-14);
}

TEST(Propagator, Unitality) {
  Rng rng(3);
  const DensityMatrix mixed = DensityMatrix::maximally_mixed(64);
  for (int i = 0; i < 20; ++i) {
    const Propagator p(oracle::random_hermitian(rng, 64, 3.0));
    const Matrix out = evolve_segment(mixed, p, 1.0, 0.0245).matrix();
    EXPECT_LT((out - std::exp(-0.0245) * mixed.matrix()).norm(), 1e-12);
  }
}

TEST(Propagator, AgreesWithOdeReference) {
  Rng rng(4);
  const SensorParams p;
  const PauliSum h = h_zeeman(p, {0.0, 0.0});
  const DensityMatrix rho(oracle::random_density(rng, 64));
  const DensityMatrix ode = ode_reference(rho, h, 1e-300, 1.0, 1e-2);
  const DensityMatrix exact = evolve_segment(rho, Propagator(to_dense(h)), 1.0, 1e-300);
  EXPECT_LT((ode.matrix() - exact.matrix()).norm(), 1e-8);
  EXPECT_NEAR(ode_reference(rho, h, 0.0245, 1.0, 1e-2).trace(), std::exp(-0.0245), 1e-9);
  // H = 0: pure decay
  const DensityMatrix decay = ode_reference(rho, PauliSum{}, 0.5, 1.0, 1e-2);
  EXPECT_LT((decay.matrix() - std::exp(-0.5) * rho.matrix()).norm(), 1e-9);
  EXPECT_THROW(ode_reference(rho, h, 0.1, 1.0, 0.5), InvalidInput);
}

TEST(Propagator, CnotSpectrumIsAzimuthallySymmetric) {
  const SensorParams p;
  for (double phi : {0.3, 1.2, 2.5}) {
    const auto a = build_segments(p, {0.0, phi});
    const auto b = build_segments(p, {1.9, phi});
    EXPECT_LT((a->collision.energies() - b->collision.energies()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

// Collision engine -------------------------------------------------------------

TEST(Engine, UnitalFixedPoint) {
  const SensorParams p;
  CollisionEngine e(p, {0.4, 1.1}, DensityMatrix::maximally_mixed(8), DensityMatrix::maximally_mixed(8));
  e.step();
  EXPECT_LT((e.joint().matrix() - std::exp(-p.k * p.period()) * Matrix::Identity(64, 64) / 64.0).norm(), 1e-12);
}

TEST(Engine, CnotCollisionAgainstExpm) {
  SensorParams p;
  p.j_abc = 0.0;
  p.gamma_b0 = 0.0;
  const DensityMatrix s0 = DensityMatrix::basis_state(8, 0);
  const DensityMatrix e0 = DensityMatrix::basis_state(8, 0);
  CollisionEngine e(p, {}, s0, e0);
  const Matrix u = oracle::unitary(to_dense(v_interaction(p)), p.tau_se);
  const Matrix ref = std::exp(-p.k * p.tau_se) * u * tensor(s0, e0).matrix() * u.adjoint();
  EXPECT_LT((e.collided().matrix() - ref).norm(), 1e-12);
  // control |0> leaves the environment in |000>
  EXPECT_NEAR(e.collided().matrix()(0, 0).real(), std::exp(-p.k * p.tau_se), 1e-12);
}

TEST(Engine, SemigroupWithoutInteraction) {
  SensorParams p;
  p.j_se_tau = 0.0;
  Rng rng(5);
  const DensityMatrix s0(oracle::random_density(rng, 8));
  const FieldAngles a{0.7, 0.9};
  CollisionEngine e(p, a, s0, DensityMatrix::maximally_mixed(8));
  e.step().step();
  const Matrix h = system_block(h_exchange(p) + h_zeeman(p, a));
  const Matrix u = oracle::unitary(h, 2 * p.period());
  const Matrix ref = std::exp(-2 * p.k * p.period()) * u * s0.matrix() * u.adjoint();
  EXPECT_LT((trace_out_second(e.joint().matrix(), 8, 8) - ref).norm(), 1e-12);
  EXPECT_EQ(e.iteration(), 2);
  EXPECT_DOUBLE_EQ(e.time(), 2 * p.period());
}

TEST(Engine, TraceLawAndPositivity) {
  const SensorParams p;
  Rng rng(6);
  CollisionEngine e(p, {1.0, 2.0}, sample_initial_family(rng, InitialFamily::BallUniform),
                    product_state_from_bloch(draw_bloch(rng, InitialFamily::BallUniform)));
  for (int n = 1; n <= 400; ++n) {
    e.step();
    EXPECT_NEAR(e.joint().trace(), std::exp(-p.k * e.time()), 1e-9);
    if (n % 50 == 0) {
      EXPECT_GE(e.joint().min_eigenvalue(), -1e-9);
    }
  }
}

TEST(Engine, RejectsWrongDimensions) {
  EXPECT_THROW(CollisionEngine(SensorParams{}, {}, DensityMatrix::maximally_mixed(4), DensityMatrix::maximally_mixed(8)),
               InvalidInput);
}

TEST(Horizon, PeriodCount) {
  const SensorParams p;
  const double t_max = std::log(1e8) / p.k;
  const int n = horizon_periods(p, 1e-8);
  EXPECT_EQ(n, static_cast<int>(std::ceil(t_max / p.period())));
  EXPECT_GE(horizon(p, 1e-8), t_max);
  EXPECT_LT(horizon(p, 1e-8) - p.period(), t_max);
  SensorParams fast;
  fast.k = 1.0;
  EXPECT_EQ(horizon_periods(fast, std::exp(-1.0)), 1);
  EXPECT_THROW(horizon_periods(p, 0.0), InvalidInput);
  EXPECT_THROW(horizon_periods(p, 1.0), InvalidInput);
}

// Segment yields -------------------------------------------------------------

TEST(SegmentYield, ClosedForms) {
  const SensorParams p;
  const double k = p.k, tau = 1.0;
  // P commutes with H and the state sits in the singlet: constant integrand 1.
  Vector psi = Vector::Zero(8);
  psi(2) = 1 / std::sqrt(2.0);  // |010>
  psi(4) = -1 / std::sqrt(2.0);  // |100>
  const Propagator hex(system_block(h_exchange(p)));
  EXPECT_NEAR(segment_yield(DensityMatrix::pure(psi).matrix(), hex, singlet8(), k, tau), 1 - std::exp(-k * tau), 1e-14);
  const Propagator full(to_dense(h_exchange(p) + h_zeeman(p, {0.2, 0.4}) + v_interaction(p)));
  EXPECT_NEAR(segment_yield(DensityMatrix::maximally_mixed(64), full, singlet_projector(), k, tau),
              0.25 * (1 - std::exp(-k * tau)), 1e-14);
  EXPECT_THROW(segment_yield(Matrix::Identity(8, 8) / 8.0, hex, singlet8(), 0.0, tau), InvalidInput);
  EXPECT_THROW(segment_yield(Matrix::Identity(8, 8) / 8.0, hex, singlet8(), k, -1.0), InvalidInput);
}

TEST(SegmentYield, MatchesQuadrature) {
  Rng rng(7);
  for (int i = 0; i < 5; ++i) {
    const Matrix h = oracle::random_hermitian(rng, 8, 3.0);
    const Matrix rho = oracle::random_density(rng, 8);
    const Matrix proj = oracle::random_projector(rng, 8, 2);
    const double k = rng.uniform(0.01, 0.5);
    EXPECT_NEAR(segment_yield(rho, Propagator(h), proj, k, 1.0), oracle::simpson_yield(rho, h, proj, k, 1.0, 10000),
                1e-9);
  }
}

TEST(SegmentYield, Additivity) {
  Rng rng(8);
  const Matrix h = oracle::random_hermitian(rng, 64, 2.0);
  const Propagator p(h);
  const DensityMatrix rho(oracle::random_density(rng, 64));
  const double k = 0.0245;
  const Matrix proj = to_dense(singlet_projector());
  const double whole = segment_yield(rho.matrix(), p, proj, k, 1.0);
  double parts = 0.0;
  Matrix r = rho.matrix();
  for (int s = 0; s < 4; ++s) {
    parts += segment_yield(r, p, proj, k, 0.25);
    r = evolve_matrix(r, p, 0.25, k);
  }
  EXPECT_NEAR(whole, parts, 1e-12);
}

// Full yields ------------------------------------------------------------------

TEST(SingletYield, UnitalFixedPoint) {
  const SensorParams p;
  for (const FieldAngles& a : {FieldAngles{0, 0}, FieldAngles{1.0, 0.5}, FieldAngles{4.0, 2.8}}) {
    EXPECT_NEAR(singlet_yield(p, DensityMatrix::maximally_mixed(8), DensityMatrix::maximally_mixed(8), a), 0.25, 1e-8);
  }
}

TEST(SingletYield, ZeemanOnlyKeepsInitialSingletWeight) {
  const SensorParams p = zeeman_only();
  Rng rng(9);
  for (int i = 0; i < 3; ++i) {
    const DensityMatrix s0 = random_generic_state(rng);
    const double expected = (singlet8() * s0.matrix()).trace().real();
    for (int j = 0; j < 3; ++j) {
      const FieldAngles a{rng.uniform(0, 2 * kPi), rng.uniform(0, kPi)};
      EXPECT_NEAR(singlet_yield(p, s0, DensityMatrix::maximally_mixed(8), a), expected, 1e-8);
    }
  }
}

TEST(SingletYield, SingletStartIsBounded) {
  Vector psi = Vector::Zero(8);
  psi(2) = 1 / std::sqrt(2.0);
  psi(4) = -1 / std::sqrt(2.0);
  const double y = singlet_yield(SensorParams{}, DensityMatrix::pure(psi), DensityMatrix::maximally_mixed(8), {0.3, 0.3});
  EXPECT_GT(y, 0.0);
  EXPECT_LE(y, 1.0 + 1e-9);
}

TEST(SingletYield, RejectsSubnormalizedStart) {
  EXPECT_THROW(singlet_yield(SensorParams{}, DensityMatrix::maximally_mixed(8).scaled(0.5),
                             DensityMatrix::maximally_mixed(8), {}),
               InvalidInput);
}

TEST(TransferMaps, MatchCollisionEngine) {
  const SensorParams p;
  Rng rng(10);
  const FieldAngles a{0.6, 1.3};
  const auto segs = build_segments(p, a);
  for (const DensityMatrix& env : {DensityMatrix::maximally_mixed(8), product_state_from_bloch({0, 0, 1}),
                                   product_state_from_bloch(draw_bloch(rng, InitialFamily::BallUniform))}) {
    const DensityMatrix s0 = sample_initial_family(rng, InitialFamily::BallUniform);
    const IterationMaps maps = build_iteration_maps(p, *segs, env, 0);
    const double batch = batch_yields(maps, {s0}, horizon_periods(p, 1e-8)).front().singlet;
    EXPECT_NEAR(batch, singlet_yield(p, segs, s0, env, a, 1e-8), 1e-12);
    // one period of the map against the engine
    CollisionEngine e(p, a, segs, s0, env);
    e.step();
    const Matrix next = detail::unvec(maps.period_map * detail::vec(s0.matrix()), 8);
    EXPECT_LT((next - trace_out_second(e.joint().matrix(), 8, 8)).norm(), 1e-13);
  }
}

TEST(TransferMaps, HorizonExtensionIsBelowTail) {
  const SensorParams p;
  Rng rng(11);
  std::vector<DensityMatrix> states;
  for (int i = 0; i < 4; ++i) states.push_back(sample_initial_family(rng, InitialFamily::BallUniform));
  const auto segs = build_segments(p, {0.0, 1.0});
  const IterationMaps maps = build_iteration_maps(p, *segs, DensityMatrix::maximally_mixed(8), 0);
  const int n = horizon_periods(p, 1e-8);
  const auto a = batch_yields(maps, states, n);
  const auto b = batch_yields(maps, states, n + 1);
  const auto c = batch_yields(maps, states, 2 * n);
  for (std::size_t i = 0; i < states.size(); ++i) {
    EXPECT_LE(std::abs(b[i].singlet - a[i].singlet), 1e-8);
    EXPECT_LE(std::abs(c[i].singlet - a[i].singlet), 1e-8);
  }
  // doubling eps_tail
  const auto d = batch_yields(maps, states, horizon_periods(p, 2e-8));
  for (std::size_t i = 0; i < states.size(); ++i) EXPECT_LE(std::abs(d[i].singlet - a[i].singlet), 2e-8);
}

// Weighted yields ----------------------------------------------------------------

TEST(WeightedYield, ConstantObservableIsOne) {
  Rng rng(12);
  const auto r = weighted_yield(SensorParams{}, sample_initial_family(rng, InitialFamily::BallUniform),
                                DensityMatrix::maximally_mixed(8), {0.3, 0.8}, [](const DensityMatrix&) { return 1.0; },
                                4, 1e-4);
  EXPECT_NEAR(r.values.front(), 1.0, 1e-12);
}

TEST(WeightedYield, CoherenceOfMixedStateVanishes) {
  const auto r = weighted_yield(
      SensorParams{}, DensityMatrix::maximally_mixed(8), DensityMatrix::maximally_mixed(8), {0.3, 0.8},
      [](const DensityMatrix& joint) { return coherence_c1_star(joint); }, 4, 1e-4);
  EXPECT_NEAR(r.values.front(), 0.0, 1e-12);
  EXPECT_NEAR(r.singlet, 0.25, 1e-3);
}

TEST(WeightedYield, ReuseMatchesGenericPass) {
  const SensorParams p;
  Rng rng(13);
  const DensityMatrix s0 = sample_initial_family(rng, InitialFamily::BallUniform);
  const DensityMatrix env = DensityMatrix::maximally_mixed(8);
  const FieldAngles a{0.5, 1.2};
  const double eps = 1e-2;
  ObservableSet set;
  set.kinds = {ObservableKind::C1Star, ObservableKind::Mutual};
  const auto fast = weighted_yields(p, s0, env, a, set, 4, eps);
  const auto c1 = weighted_yield(
      p, s0, env, a, [](const DensityMatrix& j) { return coherence_c1_star(trace_out_second(j.matrix(), 8, 8)); }, 4, eps);
  const auto mi = weighted_yield(p, s0, env, a, [](const DensityMatrix& j) { return mutual_information(j); }, 4, eps);
  EXPECT_NEAR(fast.values[0], c1.values[0], 1e-10);
  EXPECT_NEAR(fast.values[1], mi.values[0], 1e-10);
  EXPECT_NEAR(fast.singlet, c1.singlet, 1e-12);
  // raw mode scales by the remaining trace
  ObservableSet raw = set;
  raw.normalize = false;
  raw.kinds = {ObservableKind::Mutual};
  const auto mi_raw = weighted_yield(
      p, s0, env, a, [](const DensityMatrix& j) { return j.trace() * mutual_information(j); }, 4, eps);
  EXPECT_NEAR(weighted_yields(p, s0, env, a, raw, 4, eps).values[0], mi_raw.values[0], 1e-10);
}

TEST(WeightedYield, BatchMatchesTrajectory) {
  const SensorParams p;
  Rng rng(14);
  const DensityMatrix s0 = sample_initial_family(rng, InitialFamily::ZAxis);
  const DensityMatrix env = DensityMatrix::maximally_mixed(8);
  const FieldAngles a{0.0, 0.7};
  ObservableSet set;
  set.kinds = {ObservableKind::C1Star};
  const auto segs = build_segments(p, a);
  const auto direct = weighted_yields(p, *segs, s0, env, set, 8, 1e-8);
  const auto batch = batch_yields(build_iteration_maps(p, *segs, env, 8), {s0}, horizon_periods(p, 1e-8), set).front();
  EXPECT_NEAR(batch.values[0], direct.values[0], 1e-12);
  EXPECT_NEAR(batch.singlet, direct.singlet, 1e-12);
  ObservableSet joint;
  joint.kinds = {ObservableKind::Mutual};
  EXPECT_THROW(batch_yields(build_iteration_maps(p, *segs, env, 8), {s0}, 10, joint), InvalidInput);
}

TEST(WeightedYield, QuadratureConverges) {
  const SensorParams p;
  const DensityMatrix s0 = system_state_from_bloch({0, 0, 1});
  ObservableSet set;
  set.kinds = {ObservableKind::C1Star};
  const auto segs = build_segments(p, {0.0, kPi / 2});
  const auto env = DensityMatrix::maximally_mixed(8);
  const int n = horizon_periods(p, 1e-8);
  const double a = batch_yields(build_iteration_maps(p, *segs, env, 8), {s0}, n, set).front().values[0];
  const double b = batch_yields(build_iteration_maps(p, *segs, env, 16), {s0}, n, set).front().values[0];
  EXPECT_LT(std::abs(a - b), 1e-4);
}

TEST(WeightedYield, DegenerateNormalization) {
  // an initial state with no singlet weight and no dynamics never recombines
  const SensorParams p = zeeman_only();
  const DensityMatrix triplet = DensityMatrix::basis_state(8, 0);
  ObservableSet set;
  set.kinds = {ObservableKind::C1Star};
  EXPECT_THROW(weighted_yields(p, triplet, DensityMatrix::maximally_mixed(8), {0, 0}, set, 2, 1e-2),
               DegenerateNormalization);
}

// Scans and anisotropy -------------------------------------------------------

TEST(Scan, GridLayout) {
  const GridSpec g{16, 9};
  const auto a = grid_angles(g);
  ASSERT_EQ(a.size(), 144u);
  EXPECT_DOUBLE_EQ(a[1].theta, 2 * kPi / 16);
  EXPECT_DOUBLE_EQ(a[16].phi, kPi / 8);
  EXPECT_DOUBLE_EQ(a.back().phi, kPi);
  EXPECT_THROW(grid_angles({3, 9}), InvalidInput);
  EXPECT_THROW(grid_angles({8, 2}), InvalidInput);
  double total = 0;
  for (double w : grid_weights(g)) total += w;
  EXPECT_NEAR(total, 1.0, 1e-14);
}

TEST(Scan, TrivialStateIsFlatWithoutCoupling) {
  // invariant under global rotations, so static under H_ex + H_B
  SensorParams p;
  p.j_se_tau = 0.0;
  const auto scan = angle_scan(p, trivial_state({-1.0 / 24, 0.01, 0, 0.005}),
                               DensityMatrix::maximally_mixed(8), {8, 5});
  const auto y = scan.yields();
  EXPECT_LT(*std::max_element(y.begin(), y.end()) - *std::min_element(y.begin(), y.end()), 1e-10);
}

TEST(Scan, CnotYieldsDependOnPolarAngleOnly) {
  // z rotations commute with the coupling, the exchange and a z-axis state
  Rng rng(15);
  const GridSpec g{8, 5};
  const auto scan = angle_scan(SensorParams{}, sample_initial_family(rng, InitialFamily::ZAxis),
                               DensityMatrix::maximally_mixed(8), g);
  for (int i = 0; i < g.n_phi; ++i) {
    double lo = 1, hi = 0;
    for (int j = 0; j < g.n_theta; ++j) {
      const double y = scan.points[static_cast<std::size_t>(i * g.n_theta + j)].yield;
      lo = std::min(lo, y);
      hi = std::max(hi, y);
    }
    EXPECT_LT(hi - lo, 1e-9);
  }
}

TEST(Scan, DefaultGridInRangeAndThreadIndependent) {
  const DensityMatrix s0 = system_state_from_bloch({0, 0, 1});
  ScanOptions one, two;
  two.threads = 2;
  const auto a = angle_scan(SensorParams{}, s0, DensityMatrix::maximally_mixed(8), {16, 9}, one);
  const auto b = angle_scan(SensorParams{}, s0, DensityMatrix::maximally_mixed(8), {16, 9}, two);
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_GE(a.points[i].yield, 0.0);
    EXPECT_LE(a.points[i].yield, 1.0);
    EXPECT_EQ(a.points[i].yield, b.points[i].yield);
  }
  EXPECT_GT(anisotropy(a).delta, 1e-3);
}

TEST(Anisotropy, Statistics) {
  const GridSpec g{4, 3};
  const auto flat = anisotropy(std::vector<double>(12, 0.25), g);
  EXPECT_EQ(flat.delta, 0.0);
  EXPECT_EQ(flat.ra, 0.0);
  EXPECT_NEAR(flat.mean, 0.25, 1e-15);
  const auto toy = anisotropy(std::vector<double>{0.2, 0.3}, g);
  EXPECT_NEAR(toy.delta, 0.1, 1e-15);
  EXPECT_NEAR(toy.mean, 0.25, 1e-15);
  EXPECT_NEAR(toy.objective, 0.025, 1e-15);
  EXPECT_THROW(anisotropy(std::vector<double>(12, 0.0), g), DegenerateNormalization);
  EXPECT_THROW(anisotropy(std::vector<double>{}, g), InvalidInput);
}

TEST(Anisotropy, SphericalAverage) {
  const GridSpec g{4, 2001};
  std::vector<double> v;
  for (const auto& a : grid_angles(g)) v.push_back(std::pow(std::cos(a.phi / 2), 2));
  EXPECT_NEAR(anisotropy(v, g).mean, 0.5, 1e-4);
  auto shuffled = v;
  std::reverse(shuffled.begin(), shuffled.end());
  EXPECT_EQ(anisotropy(shuffled, g).delta, anisotropy(v, g).delta);
}

// Parallel helper --------------------------------------------------------------

TEST(Parallel, ResultsAndErrors) {
  std::vector<int> out(100);
  parallel_for(100, 4, [&](int i) { out[static_cast<std::size_t>(i)] = i * i; });
  for (int i = 0; i < 100; ++i) EXPECT_EQ(out[static_cast<std::size_t>(i)], i * i);
  try {
    parallel_for(50, 3, [](int i) {
      if (i == 7 || i == 30) throw std::runtime_error(std::to_string(i));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "7");
  }
}

}  // namespace
}  // namespace rpsense
