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
#include <rpsense/model.hpp>
#include <rpsense/pauli.hpp>
#include <rpsense/states.hpp>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace rpsense {
namespace {

PauliSum random_sum(Rng& rng, int terms) {
  PauliSum s;
  for (int t = 0; t < terms; ++t) {
    PauliString p;
    for (auto& l : p.labels) l = static_cast<Pauli>(rng.next_u64() % 4);
    p.coefficient = Complex(rng.normal(), rng.normal());
    s.add(p);
  }
  return s;
}

// Pauli algebra ------------------------------------------------------------

TEST(Pauli, SingleSiteProducts) {
  const auto xz = multiply(PauliString::parse("X"), PauliString::parse("Z"));
  EXPECT_EQ(xz.label_string(), "YIIIII");
  EXPECT_EQ(xz.coefficient, Complex(0, -1));
  const auto zz = multiply(PauliString::parse("Z"), PauliString::parse("Z"));
  EXPECT_EQ(zz.label_string(), "IIIIII");
  EXPECT_EQ(zz.coefficient, Complex(1, 0));
}

TEST(Pauli, TwoSiteProductMatchesDense) {
  const auto p = multiply(PauliString::parse("XX"), PauliString::parse("ZI"));
  EXPECT_EQ(p.label_string(), "YXIIII");
  EXPECT_EQ(p.coefficient, Complex(0, -1));
  const Matrix dense = oracle::kron_labels("XX") * oracle::kron_labels("ZI");
  EXPECT_LT((dense - p.coefficient * oracle::kron_labels("YX")).norm(), 1e-15);
}

TEST(Pauli, ProductMagnitudeIsMultiplicative) {
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const auto a = random_sum(rng, 1).strings().front();
    const auto b = random_sum(rng, 1).strings().front();
    EXPECT_NEAR(std::abs(multiply(a, b).coefficient), std::abs(a.coefficient) * std::abs(b.coefficient), 1e-12);
  }
}

TEST(Pauli, Commutators) {
  const auto c = commutator(PauliSum::single(kA, Pauli::Z), PauliSum::single(kA, Pauli::X));
  EXPECT_EQ(c.size(), 1u);
  EXPECT_EQ(c.coefficient("YIIIII"), Complex(0, 2));
  PauliSum xx;
  xx.add(PauliString::parse("XX"));
  const auto c2 = commutator(PauliSum::single(kA, Pauli::Z), xx);
  const Matrix zi = oracle::kron_labels("ZIIIII");
  const Matrix xxd = oracle::kron_labels("XXIIII");
  EXPECT_LT((to_dense(c2) - (zi * xxd - xxd * zi)).norm(), 1e-14);
  EXPECT_EQ(c2.coefficient("YXIIII"), Complex(0, 2));
  Rng rng(1);
  PauliSum h = random_sum(rng, 10);
  PauliSum herm = h + h.adjoint();
  EXPECT_TRUE(commutator(PauliSum::identity(1.0 / 8), herm).empty());
}

TEST(Pauli, DenseConversion) {
  EXPECT_LT((to_dense(PauliSum::identity()) - Matrix::Identity(64, 64)).norm(), 1e-15);
  const Matrix z0 = to_dense(PauliSum::single(kA, Pauli::Z));
  for (int i = 0; i < 64; ++i) EXPECT_EQ(z0(i, i).real(), i < 32 ? 1.0 : -1.0);
  Rng rng(2);
  const PauliSum s = random_sum(rng, 5);
  Matrix ref = Matrix::Zero(64, 64);
  for (const auto& p : s.strings()) ref += p.coefficient * oracle::kron_labels(p.label_string());
  EXPECT_LT((to_dense(s) - ref).norm(), 1e-13);
}

TEST(Pauli, FromDense) {
  const PauliSum id = from_dense(Matrix::Identity(64, 64) / 64.0);
  EXPECT_EQ(id.size(), 1u);
  EXPECT_NEAR(id.coefficient("IIIIII").real(), 1.0 / 64, 1e-16);
  const PauliSum x = from_dense(oracle::kron_labels("XIIIII"));
  EXPECT_EQ(x.size(), 1u);
  EXPECT_NEAR(x.coefficient("XIIIII").real(), 1.0, 1e-15);
  Rng rng(3);
  const Matrix h = oracle::random_hermitian(rng, 64);
  const PauliSum hp = from_dense(h);
  EXPECT_TRUE(hp.is_hermitian());
  EXPECT_LT((to_dense(hp) - h).norm(), 1e-12);
  EXPECT_THROW(from_dense(Matrix::Identity(8, 8)), InvalidInput);
}

TEST(Pauli, AlgebraicIdentities) {
  Rng rng(4);
  for (int i = 0; i < 10; ++i) {
    const PauliSum a = random_sum(rng, 4), b = random_sum(rng, 4), c = random_sum(rng, 4);
    EXPECT_LT(to_dense((a * b) * c - a * (b * c)).norm(), 1e-11);
    EXPECT_LT(to_dense(commutator(a, b) + commutator(b, a)).norm(), 1e-12);
    const PauliSum jac = commutator(a, commutator(b, c)) + commutator(b, commutator(c, a)) +
                         commutator(c, commutator(a, b));
    EXPECT_LT(to_dense(jac).norm(), 1e-12);
    const Matrix da = to_dense(a), db = to_dense(b);
    EXPECT_LT((to_dense(commutator(a, b)) - (da * db - db * da)).norm(), 1e-11);
  }
}

TEST(Pauli, PruneDropsRoundOff) {
  PauliSum s = PauliSum::single(kA, Pauli::X, 1.0);
  s -= PauliSum::single(kA, Pauli::X, 1.0 - 1e-16);
  EXPECT_TRUE(s.empty());
}

TEST(Pauli, TextRoundTrip) {
  Rng rng(6);
  const PauliSum s = random_sum(rng, 6);
  std::istringstream is(to_string(s));
  EXPECT_LT(to_dense(read_pauli_sum(is) - s).norm(), 1e-14);
}

// Model ----------------------------------------------------------------------

TEST(Model, ExchangeStructure) {
  SensorParams p;
  p.j_abc = 0.0;
  EXPECT_TRUE(h_exchange(p).empty());
  p.j_abc = 1.0;
  const PauliSum h = h_exchange(p);
  EXPECT_EQ(h.size(), 10u);
  EXPECT_NEAR(h.coefficient("IIIIII").real(), -1.5, 1e-15);
  EXPECT_NEAR(h.coefficient("XIXIII").real(), -0.5, 1e-15);
  // -(1/2) sum_{a<b} (1 + sigma_a . sigma_b), built from Kronecker products.
  Matrix ref = Matrix::Zero(64, 64);
  for (auto [a, b] : {std::pair{0, 1}, {0, 2}, {1, 2}}) {
    ref += -0.5 * Matrix::Identity(64, 64);
    for (char s : {'X', 'Y', 'Z'}) ref += -0.5 * oracle::kron_labels(oracle::labels2(6, a, s, b, s));
  }
  EXPECT_LT((to_dense(h) - ref).norm(), 1e-13);
  for (Pauli ax : {Pauli::X, Pauli::Y, Pauli::Z}) EXPECT_TRUE(commutator(h, total_system_spin(ax)).empty());
}

TEST(Model, ZeemanDirections) {
  const SensorParams p;
  const PauliSum z = h_zeeman(p, {0.0, 0.0});
  EXPECT_LT(to_dense(z - 0.5 * p.gamma_b0 * total_system_spin(Pauli::Z)).norm(), 1e-15);
  const PauliSum x = h_zeeman(p, {0.0, kPi / 2});
  EXPECT_LT(to_dense(x - 0.5 * p.gamma_b0 * total_system_spin(Pauli::X)).norm(), 1e-15);
  EXPECT_FALSE(z.touches({kEA, kEB, kEC}));
  Rng rng(7);
  double ref = -1;
  for (int i = 0; i < 50; ++i) {
    const FieldAngles a{rng.uniform(0, 2 * kPi), rng.uniform(0, kPi)};
    Eigen::SelfAdjointEigenSolver<Matrix> es(to_dense(h_zeeman(p, a)));
    const double top = es.eigenvalues().cwiseAbs().maxCoeff();
    if (ref < 0) ref = top;
    EXPECT_NEAR(top, ref, 1e-12);
  }
}

TEST(Model, CollisionCalibration) {
  // single-pair unitary on (A, E_A) against CNOT / SWAP built from projectors
  const Matrix i6 = Matrix::Identity(64, 64);
  const Matrix p1 = 0.5 * (i6 - oracle::kron_labels("ZIIIII"));
  const Matrix cnot = (i6 - p1) + p1 * oracle::kron_labels("IIIXII");
  Matrix swap = 0.5 * i6;
  for (char s : {'X', 'Y', 'Z'}) swap += 0.5 * oracle::kron_labels(oracle::labels2(6, 0, s, 3, s));
  const SensorParams cn = SensorParams::reference();
  const SensorParams sw = SensorParams::swap_reference();
  EXPECT_LT(oracle::phase_distance(oracle::unitary(to_dense(v_pair(cn, kA)), cn.tau_se), cnot), 1e-10);
  EXPECT_LT(oracle::phase_distance(oracle::unitary(to_dense(v_pair(sw, kA)), sw.tau_se), swap), 1e-10);
  EXPECT_FALSE(commutator(singlet_projector(), v_interaction(cn)).empty());
  EXPECT_FALSE(commutator(singlet_projector(), v_interaction(sw)).empty());
}

TEST(Model, InteractionHasNoSystemCrossTerms) {
  for (const auto& p : {SensorParams::reference(), SensorParams::swap_reference()}) {
    for (const auto& s : v_interaction(p).strings()) {
      int sys = 0;
      for (int site : {kA, kB, kC}) sys += s.labels[static_cast<std::size_t>(site)] != Pauli::I;
      EXPECT_LE(sys, 1) << s.label_string();
    }
  }
  // CNOT kind is diagonal on the radicals
  const PauliSum v = v_interaction(SensorParams::reference());
  for (int site : {kA, kB, kC}) EXPECT_TRUE(commutator(v, PauliSum::single(site, Pauli::Z)).empty());
}

TEST(Model, SingletProjector) {
  const PauliSum p = singlet_projector();
  EXPECT_TRUE((p * p - p).empty());
  EXPECT_NEAR((to_dense(p) / 64.0).trace().real(), 0.25, 1e-15);
  Rng rng(8);
  for (int i = 0; i < 20; ++i) {
    const FieldAngles a{rng.uniform(0, 2 * kPi), rng.uniform(0, kPi)};
    EXPECT_TRUE(commutator(p, h_zeeman(SensorParams::reference(), a)).empty());
  }
}

TEST(Model, ParamsValidation) {
  SensorParams p;
  EXPECT_NO_THROW(p.validate());
  EXPECT_DOUBLE_EQ(p.j_se(), kPi / 2);
  p.k = 0;
  EXPECT_THROW(p.validate(), InvalidInput);
  p = {};
  p.tau_ee = -1;
  EXPECT_THROW(p.validate(), InvalidInput);
  EXPECT_THROW(interaction_from_string("iswap"), InvalidInput);
}

TEST(Model, OperatorsAreHermitian) {
  const SensorParams p;
  for (const PauliSum& op : {h_exchange(p), h_zeeman(p, {0.3, 1.1}), v_interaction(p), singlet_projector(),
                             v_interaction(SensorParams::swap_reference())}) {
    const Matrix d = to_dense(op);
    EXPECT_LT((d - d.adjoint()).norm(), 1e-12);
    EXPECT_LT((to_dense(from_dense(d)) - d).norm(), 1e-12);
  }
}

// States -----------------------------------------------------------------------

TEST(States, BlochQubits) {
  EXPECT_LT((qubit_from_bloch({0, 0, 0}).matrix() - Matrix::Identity(2, 2) / 2.0).norm(), 1e-15);
  const Matrix up = qubit_from_bloch({0, 0, 1}).matrix();
  EXPECT_NEAR(up(0, 0).real(), 1.0, 1e-15);
  EXPECT_NEAR(up(1, 1).real(), 0.0, 1e-15);
  const double p = 0.3;
  const Matrix diag = qubit_from_bloch({0, 0, 2 * p - 1}).matrix();
  EXPECT_NEAR(diag(0, 0).real(), p, 1e-15);
  EXPECT_NEAR(diag(1, 1).real(), 1 - p, 1e-15);
  EXPECT_THROW(qubit_from_bloch({1, 1, 0}), InvalidInput);
}

TEST(States, DensityMatrixValidation) {
  Matrix m = Matrix::Identity(3, 3) / 3.0;
  EXPECT_THROW(DensityMatrix{m}, InvalidInput);
  Matrix nh = Matrix::Identity(2, 2) / 2.0;
  nh(0, 1) = 0.3;
  EXPECT_THROW(DensityMatrix{nh}, InvalidInput);
  EXPECT_THROW(DensityMatrix{Matrix::Identity(2, 2)}, InvalidInput);
  EXPECT_NEAR(DensityMatrix::maximally_mixed(8).scaled(0.5).trace(), 0.5, 1e-15);
}

TEST(States, FamilySampling) {
  Rng a(11), b(11);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(sample_initial_family(a, InitialFamily::BallUniform).matrix(),
              sample_initial_family(b, InitialFamily::BallUniform).matrix());
  }
  EXPECT_LT((system_state_from_bloch({0, 0, 0}).matrix() - Matrix::Identity(8, 8) / 8.0).norm(), 1e-15);
  const DensityMatrix up = system_state_from_bloch({0, 0, 1});
  EXPECT_NEAR(up.trace(), 1.0, 1e-15);
  EXPECT_NEAR(up.matrix()(0, 0).real(), 0.5, 1e-15);
  EXPECT_NEAR(up.matrix()(1, 1).real(), 0.5, 1e-15);
  Rng rng(12);
  double mean = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto r = draw_bloch(rng, InitialFamily::BallUniform);
    EXPECT_LE(r.norm(), 1.0);
    mean += r.norm();
  }
  EXPECT_NEAR(mean / n, 0.75, 0.01);
  const auto z = draw_bloch(rng, InitialFamily::ZAxis);
  EXPECT_EQ(z.x, 0.0);
  EXPECT_EQ(z.y, 0.0);
}

TEST(States, Entropy) {
  EXPECT_NEAR(von_neumann_entropy(DensityMatrix::basis_state(8, 3)), 0.0, 1e-12);
  EXPECT_NEAR(von_neumann_entropy(DensityMatrix::maximally_mixed(64)), 6.0, 1e-12);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 0.75;
  d(1, 1) = 0.25;
  EXPECT_NEAR(von_neumann_entropy(DensityMatrix(d)), oracle::binary_entropy(0.75), 1e-12);
  EXPECT_NEAR(oracle::binary_entropy(0.75), 0.811278, 1e-6);
}

TEST(States, CoherenceC1) {
  EXPECT_NEAR(coherence_c1(DensityMatrix::maximally_mixed(8)), 0.0, 1e-12);
  Rng rng(13);
  Vector psi(64);
  for (int i = 0; i < 64; ++i) psi(i) = Complex(rng.normal(), rng.normal());
  psi.normalize();
  EXPECT_NEAR(coherence_c1(DensityMatrix::pure(psi)), 6.0, 1e-10);
  const DensityMatrix s = system_state_from_bloch({0, 0, 0.5});
  EXPECT_NEAR(coherence_c1(s), 2 * (1 - oracle::binary_entropy(0.75)), 1e-12);
  EXPECT_NEAR(coherence_c1(s), 0.377444, 1e-6);
  EXPECT_THROW(coherence_c1(s.scaled(0.5)), ContractError);
  for (int i = 0; i < 10; ++i) {
    const DensityMatrix a(oracle::random_density(rng, 4)), b(oracle::random_density(rng, 2));
    EXPECT_NEAR(coherence_c1(tensor(a, b)), coherence_c1(a) + coherence_c1(b), 1e-10);
  }
}

TEST(States, CoherenceC1Star) {
  Rng rng(14);
  Vector psi(64);
  for (int i = 0; i < 64; ++i) psi(i) = Complex(rng.normal(), rng.normal());
  psi.normalize();
  const DensityMatrix pure = DensityMatrix::pure(psi);
  EXPECT_NEAR(coherence_c1_star(pure), 6.0, 1e-10);
  EXPECT_NEAR(coherence_c1_star(pure.scaled(0.5)), 3.0, 1e-10);
  for (double t : {0.0, 1.0, 50.0, 400.0}) {
    EXPECT_NEAR(coherence_c1_star(DensityMatrix::maximally_mixed(64).scaled(std::exp(-0.0245 * t))), 0.0, 1e-12);
  }
}

TEST(States, PartialTrace) {
  Rng rng(15);
  const DensityMatrix s(oracle::random_density(rng, 8)), e(oracle::random_density(rng, 8));
  const DensityMatrix joint = tensor(s, e);
  EXPECT_LT((partial_trace(joint, {kA, kB, kC}).matrix() - s.matrix()).norm(), 1e-14);
  EXPECT_LT((trace_out_second(joint.matrix(), 8, 8) - s.matrix()).norm(), 1e-14);
  EXPECT_LT((trace_out_first(joint.matrix(), 8, 8) - e.matrix()).norm(), 1e-14);
  Vector bell = Vector::Zero(4);
  bell(0) = bell(3) = 1 / std::sqrt(2.0);
  EXPECT_LT((partial_trace(DensityMatrix::pure(bell), {0}).matrix() - Matrix::Identity(2, 2) / 2.0).norm(), 1e-15);
  const DensityMatrix r(oracle::random_density(rng, 64));
  EXPECT_NEAR(partial_trace(r, {kA, kB, kC}).trace(), r.trace(), 1e-12);
  // non-contiguous sites against a Kronecker-built reference
  const DensityMatrix a(oracle::random_density(rng, 2)), b(oracle::random_density(rng, 2)), c(oracle::random_density(rng, 2));
  const DensityMatrix abc = tensor(tensor(a, b), c);
  EXPECT_LT((partial_trace(abc, {0, 2}).matrix() - kron(a.matrix(), c.matrix())).norm(), 1e-14);
}

// Zeeman-trivial family ------------------------------------------------------

TEST(TrivialStates, Family) {
  EXPECT_LT((trivial_state({}).matrix() - Matrix::Identity(8, 8) / 8.0).norm(), 1e-15);
  const DensityMatrix t = trivial_state({-1.0 / 24, 0, 0, 0});
  EXPECT_GE(t.min_eigenvalue(), -1e-12);
  Rng rng(16);
  std::vector<FieldAngles> angles;
  for (int i = 0; i < 50; ++i) angles.push_back({rng.uniform(0, 2 * kPi), rng.uniform(0, kPi)});
  EXPECT_LE(zeeman_commutant(t, angles).max_norm, 1e-12);
  for (int site = 0; site < 3; ++site) {
    EXPECT_LT((partial_trace(t, {site}).matrix() - Matrix::Identity(2, 2) / 2.0).norm(), 1e-15);
  }
  EXPECT_THROW(trivial_state({0.5, 0, 0, 0}), InvalidInput);
}

TEST(TrivialStates, TripleTermIsRotationInvariant) {
  // sigma^A . (sigma^B x sigma^C) written with dense Kronecker products
  Matrix ref = Matrix::Zero(8, 8);
  const std::array<std::array<char, 3>, 6> perm{{{'X', 'Y', 'Z'}, {'Y', 'Z', 'X'}, {'Z', 'X', 'Y'},
                                                 {'X', 'Z', 'Y'}, {'Y', 'X', 'Z'}, {'Z', 'Y', 'X'}}};
  for (std::size_t i = 0; i < perm.size(); ++i) {
    const std::string l{perm[i][0], perm[i][1], perm[i][2]};
    ref += (i < 3 ? 1.0 : -1.0) * oracle::kron_labels(l);
  }
  const Matrix got = system_block(trivial_state_operator({0, 0, 0, 1.0})) - Matrix::Identity(8, 8) / 8.0;
  EXPECT_LT((got - ref).norm(), 1e-14);
}

TEST(TrivialStates, CommutantChecks) {
  EXPECT_NEAR(check_zeeman_commutant(DensityMatrix::maximally_mixed(8)), 0.0, 1e-15);
  const DensityMatrix zero = DensityMatrix::basis_state(8, 0);
  EXPECT_GT(zeeman_commutant(zero, {{0.0, kPi / 2}}).max_norm, 0.1);
  Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    const auto chk = zeeman_commutant(trivial_state(random_trivial_params(rng)), verification_angles(100));
    EXPECT_LE(chk.max_norm, 1e-12);
    EXPECT_TRUE(chk.routes_agree);
  }
}

TEST(TrivialStates, AngleSet) {
  const auto a = verification_angles(100);
  ASSERT_EQ(a.size(), 100u);
  for (const auto& x : a) {
    const auto d = x.direction();
    EXPECT_NEAR(d[0] * d[0] + d[1] * d[1] + d[2] * d[2], 1.0, 1e-14);
  }
  EXPECT_NEAR(a[4].direction()[2], 1.0, 1e-15);
  EXPECT_NEAR(a[5].direction()[2], -1.0, 1e-15);
  EXPECT_THROW(verification_angles(5), InvalidInput);
}

}  // namespace
}  // namespace rpsense
