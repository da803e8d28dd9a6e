#include "qlll/qsat.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

using namespace qlll;

namespace {

Vector basis_state(int i, int d) {
  Vector v = Vector::Zero(d);
  v(i) = 1;
  return v;
}

// Dense embedding by explicit index arithmetic (qubit 0 = most significant bit),
// used as an oracle for the strided application in the library.
Matrix dense_embedding(const Projector &p, int n) {
  const int d = 1 << n, k = p.locality();
  const Matrix local = p.local_matrix();
  Matrix full = Matrix::Zero(d, d);
  for (int row = 0; row < d; ++row)
    for (int col = 0; col < d; ++col) {
      bool rest_equal = true;
      int lr = 0, lc = 0;
      for (int q = 0; q < n; ++q) {
        const int br = (row >> (n - 1 - q)) & 1, bc = (col >> (n - 1 - q)) & 1;
        const auto it = std::find(p.qubits.begin(), p.qubits.end(), q);
        if (it == p.qubits.end()) {
          rest_equal &= br == bc;
        } else {
          const int pos = static_cast<int>(it - p.qubits.begin());
          lr |= br << (k - 1 - pos);
          lc |= bc << (k - 1 - pos);
        }
      }
      if (rest_equal) full(row, col) = local(lr, lc);
    }
  return full;
}

QsatInstance random_instance_on(int n, int k, int m, SplitMix64 &rng) {
  QsatInstance inst{n, k, {}};
  for (int i = 0; i < m; ++i) {
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    for (int j = 0; j < k; ++j) std::swap(all[j], all[j + static_cast<int>(rng.below(n - j))]);
    inst.projectors.push_back(random_rank1_projector({all.begin(), all.begin() + k}, rng));
  }
  return inst;
}

}  // namespace

TEST(Qsat, HaarStateIsUnitAndDeterministic) {
  SplitMix64 a(17), b(17);
  const auto v = haar_random_state(1, a);
  EXPECT_NEAR(v.norm(), 1.0, 1e-14);
  EXPECT_EQ(v, haar_random_state(1, b));
  EXPECT_THROW(haar_random_state(0, a), InvalidArgument);
}

TEST(Qsat, HaarSecondMomentMatchesUniform) {
  // E|<e0|v>|^2 = 1/8 for k=3; Var = (1/8)(7/8)/(8+1) for Haar states.
  SplitMix64 rng(2024);
  const int samples = 100000;
  double sum = 0;
  for (int i = 0; i < samples; ++i) sum += std::norm(haar_random_state(3, rng)(0));
  const double mean = sum / samples;
  const double sigma = std::sqrt((1.0 / 8) * (7.0 / 8) / 9.0 / samples);
  EXPECT_NEAR(mean, 0.125, 3 * sigma);
}

TEST(Qsat, ValidationRejectsMalformedProjectors) {
  SplitMix64 rng(1);
  EXPECT_THROW(validate(random_rank1_projector({0, 0}, rng), 3), InvalidArgument);
  EXPECT_THROW(validate(random_rank1_projector({0, 5}, rng), 3), InvalidArgument);
  Projector bad{{0, 1}, Matrix::Ones(4, 1)};
  EXPECT_THROW(validate(bad, 3), InvalidArgument);
  Projector short_vec{{0, 1}, Matrix::Ones(2, 1) / std::sqrt(2.0)};
  EXPECT_THROW(validate(short_vec, 3), DimensionMismatch);
}

TEST(Qsat, SatisfyingSpaceRanks) {
  SplitMix64 rng(3);
  EXPECT_EQ(satisfying_space(random_rank1_projector({0, 2}, rng), 3).rank(), 6);
  Projector rank3{{0, 1}, Matrix::Identity(4, 3)};
  EXPECT_EQ(satisfying_space(rank3, 2).rank(), 1);

  const auto p = random_rank1_projector({1, 3, 4}, rng);
  const auto s = satisfying_space(p, 6);
  EXPECT_EQ(s.rank(), 56);
  for (Eigen::Index c = 0; c < s.rank(); ++c) EXPECT_LE(projector_residual(p, s.basis().col(c), 6), 1e-8);
}

TEST(Qsat, StridedApplicationMatchesDenseEmbedding) {
  SplitMix64 rng(4);
  for (const std::vector<int> &qs : {std::vector<int>{0}, {3}, {2, 0}, {1, 3}, {3, 0, 2}}) {
    const auto p = random_rank1_projector(qs, rng);
    const auto dense = dense_embedding(p, 4);
    Vector psi(16);
    for (auto &z : psi) z = Complex(rng.normal(), rng.normal());
    EXPECT_LE((apply_projector(p, psi, 4) - dense * psi).norm(), 1e-12);
  }
}

TEST(Qsat, QubitZeroIsMostSignificant) {
  // |1><1| on qubit 0 of 2 qubits kills |00>,|01> and keeps |10>,|11>.
  Projector p{{0}, basis_state(1, 2)};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(projector_residual(p, basis_state(i, 4), 2), i >= 2 ? 1.0 : 0.0, 1e-15);
}

TEST(Qsat, DisjointProjectorsFactorize) {
  SplitMix64 rng(5);
  QsatInstance inst{4, 2, {random_rank1_projector({0, 1}, rng), random_rank1_projector({2, 3}, rng)}};
  EXPECT_EQ(brute_force_sat_dim(inst), 9);

  QsatInstance single{5, 3, {random_rank1_projector({0, 2, 4}, rng)}};
  EXPECT_EQ(brute_force_sat_dim(single), 32 - 4);
  EXPECT_EQ(brute_force_relative_dimension(single), Rational(7, 8));
}

TEST(Qsat, DisjointSupportsProductFormula) {
  SplitMix64 rng(6);
  for (int t = 0; t < 20; ++t) {
    // Partition 8 qubits into disjoint blocks of size 1..3 with random ranks.
    QsatInstance inst{8, 3, {}};
    int q = 0;
    Eigen::Index expected = 1;
    while (q < 8) {
      const int k = std::min(8 - q, 1 + static_cast<int>(rng.below(3)));
      if (rng.below(3) == 0) {  // leave block free
        expected *= Eigen::Index{1} << k;
      } else {
        const int r = 1 + static_cast<int>(rng.below((1u << k) - 1));
        Matrix raw(1 << k, r);
        for (auto &z : raw.reshaped()) z = Complex(rng.normal(), rng.normal());
        Eigen::HouseholderQR<Matrix> qr(raw);
        std::vector<int> qs(k);
        std::iota(qs.begin(), qs.end(), q);
        inst.projectors.push_back({qs, qr.householderQ() * Matrix::Identity(1 << k, r)});
        expected *= (Eigen::Index{1} << k) - r;
      }
      q += k;
    }
    EXPECT_EQ(brute_force_sat_dim(inst), expected);
  }
}

TEST(Qsat, KernelOfSumAgreesWithIteratedIntersection) {
  SplitMix64 rng(7);
  for (int t = 0; t < 40; ++t) {
    const int n = 3 + static_cast<int>(rng.below(6));
    const int k = 2 + static_cast<int>(rng.below(2));
    const int m = static_cast<int>(rng.below(2 * n + 1));
    auto inst = random_instance_on(n, k, m, rng);
    const auto d = brute_force_sat_dim(inst);
    ASSERT_EQ(d, iterated_intersection_dim(inst)) << "n=" << n << " k=" << k << " m=" << m;
    std::reverse(inst.projectors.begin(), inst.projectors.end());
    ASSERT_EQ(brute_force_sat_dim(inst), d);
  }
}

TEST(Qsat, OverlappingPairOnThreeQubits) {
  SplitMix64 rng(8);
  QsatInstance inst{3, 2, {random_rank1_projector({0, 1}, rng), random_rank1_projector({1, 2}, rng)}};
  EXPECT_EQ(brute_force_sat_dim(inst), iterated_intersection_dim(inst));
  EXPECT_EQ(brute_force_sat_dim(inst), 8 - 4);
}

TEST(Qsat, BruteForceGuard) {
  QsatInstance inst{15, 1, {}};
  EXPECT_THROW(brute_force_sat_dim(inst), BruteForceBoundExceeded);
  ToleranceConfig tol;
  tol.max_qubits = 3;
  EXPECT_THROW(find_satisfying_state(QsatInstance{4, 1, {}}, tol), BruteForceBoundExceeded);
}

TEST(Qsat, FindSatisfyingState) {
  const auto empty = find_satisfying_state(QsatInstance{2, 2, {}});
  ASSERT_TRUE(empty);
  EXPECT_EQ(empty->amplitudes, basis_state(0, 4));

  QsatInstance zz{2, 2, {Projector{{0, 1}, basis_state(0, 4)}}};
  const auto s = find_satisfying_state(zz);
  ASSERT_TRUE(s);
  EXPECT_NEAR(std::abs(s->amplitudes(0)), 0.0, 1e-12);
  EXPECT_NEAR(s->amplitudes.norm(), 1.0, 1e-12);

  SplitMix64 rng(9);
  auto inst = random_instance_on(8, 3, 4, rng);
  const auto psi = find_satisfying_state(inst);
  ASSERT_TRUE(psi);
  EXPECT_TRUE(check_state(inst, *psi).pass);

  // All of C^2 on one qubit is forbidden.
  QsatInstance unsat{1, 1, {Projector{{0}, Matrix::Identity(2, 2)}}};
  EXPECT_FALSE(find_satisfying_state(unsat));
  EXPECT_EQ(brute_force_sat_dim(unsat), 0);
}

TEST(Qsat, CheckStateReportsViolations) {
  SplitMix64 rng(10);
  const auto p = random_rank1_projector({0}, rng);
  QsatInstance inst{3, 1, {p}};
  // psi = v ⊗ |00>
  Vector psi = Vector::Zero(8);
  psi(0) = p.vectors(0, 0);
  psi(4) = p.vectors(1, 0);
  const auto check = check_state(inst, StateVector{3, psi});
  EXPECT_FALSE(check.pass);
  EXPECT_NEAR(check.residuals[0], 1.0, 1e-12);
  EXPECT_THROW(check_state(inst, StateVector{2, Vector::Zero(4)}), DimensionMismatch);
}

TEST(Qsat, RestrictInstanceRelabels) {
  SplitMix64 rng(11);
  QsatInstance inst{5, 2, {random_rank1_projector({1, 4}, rng), random_rank1_projector({0, 2}, rng)}};
  const std::vector<std::size_t> ids{0};
  const auto sub = restrict_instance(inst, ids, {4, 1});
  EXPECT_EQ(sub.n_qubits, 2);
  EXPECT_EQ(sub.projectors[0].qubits, (std::vector<int>{0, 1}));
  const std::vector<std::size_t> bad{1};
  EXPECT_THROW(restrict_instance(inst, bad, {1, 4}), InvalidArgument);
}
