#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "entdist/certificate.hpp"
#include "entdist/random.hpp"
#include "entdist/tensor.hpp"
#include "oracles.hpp"

using namespace entdist;

namespace {

ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

ComplexMatrix diag(std::initializer_list<double> values) {
  ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(values.size()),
                                        static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) {
    m(i, i) = v;
    ++i;
  }
  return m;
}

// Random layout with 2..4 factors of dimension 1..3.
SubsystemLayout random_layout(Rng& rng) {
  std::uniform_int_distribution<std::size_t> nf(2, 4), df(1, 3);
  std::vector<std::size_t> dims(nf(rng));
  for (auto& d : dims) d = df(rng);
  std::uniform_int_distribution<std::size_t> cut(1, dims.size() - 1);
  return SubsystemLayout(dims, cut(rng));
}

std::vector<std::size_t> random_subset(std::size_t n, Rng& rng) {
  std::vector<std::size_t> out;
  std::bernoulli_distribution coin(0.5);
  for (std::size_t i = 0; i < n; ++i) {
    if (coin(rng)) out.push_back(i);
  }
  return out;
}

}  // namespace

TEST(SubsystemLayout, RejectsBadCut) {
  EXPECT_THROW(SubsystemLayout({2, 2}, 0), InputError);
  EXPECT_THROW(SubsystemLayout({2, 2}, 2), InputError);
  EXPECT_THROW(SubsystemLayout({2}, 1), InputError);
  EXPECT_THROW(SubsystemLayout({2, 0}, 1), InputError);
  const SubsystemLayout l({2, 3, 4}, 2);
  EXPECT_EQ(l.total_dim(), 24u);
  EXPECT_EQ(l.party_a_dim(), 6u);
  EXPECT_EQ(l.party_b_dim(), 4u);
}

TEST(Kron, IdentityTimesIdentity) {
  EXPECT_TRUE(kron(identity(2), identity(2)).isApprox(identity(4)));
}

TEST(Kron, PauliXTimesZIsHandExpanded) {
  // [[0, Z], [Z, 0]]
  ComplexMatrix expected(4, 4);
  expected << 0, 0, 1, 0,
              0, 0, 0, -1,
              1, 0, 0, 0,
              0, -1, 0, 0;
  EXPECT_EQ(oracle::max_abs(kron(pauli_x(), pauli_z()) - expected), 0.0);
}

TEST(Kron, ShapeArithmetic) {
  Rng rng(1);
  const auto k = kron(random_complex_matrix(2, 3, rng), random_complex_matrix(4, 5, rng));
  EXPECT_EQ(k.rows(), 8);
  EXPECT_EQ(k.cols(), 15);
}

TEST(Kron, EntryFormula) {
  Rng rng(2);
  const auto a = random_complex_matrix(3, 2, rng);
  const auto b = random_complex_matrix(2, 4, rng);
  const auto k = kron(a, b);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 2; ++j)
      for (Eigen::Index r = 0; r < 2; ++r)
        for (Eigen::Index c = 0; c < 4; ++c) EXPECT_EQ(k(i * 2 + r, j * 4 + c), a(i, j) * b(r, c));
}

TEST(PartialTranspose, EmptySetIsIdentity) {
  Rng rng(3);
  const auto m = random_complex_matrix(8, 8, rng);
  const SubsystemLayout layout({2, 2, 2}, 1);
  EXPECT_EQ(oracle::max_abs(partial_transpose(m, layout, {}) - m), 0.0);
}

TEST(PartialTranspose, MaxEntangledStateGivesScaledSwap) {
  // T_1 of |Psi_1><Psi_1| is swap / d: eigenvalues {-1/2, 1/2, 1/2, 1/2} at d = 2.
  Ket psi = Ket::Zero(4);
  psi(0) = psi(3) = 1.0 / std::sqrt(2.0);
  const SubsystemLayout layout({2, 2}, 1);
  const ComplexMatrix pt = partial_transpose(density(psi), layout, {0});
  EXPECT_LT(oracle::max_abs(pt - oracle::swap_operator(2) / 2.0), 1e-15);
  const auto ev = herm_eig(pt).values;
  const double expected[4] = {-0.5, 0.5, 0.5, 0.5};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(ev(i), expected[i], 1e-12);
}

TEST(PartialTranspose, MatchesDigitOracleOnRandomLayouts) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto layout = random_layout(rng);
    const auto m = random_complex_matrix(layout.total_dim(), layout.total_dim(), rng);
    const auto factors = random_subset(layout.num_factors(), rng);
    const auto ours = partial_transpose(m, layout, factors);
    const auto ref = oracle::partial_transpose(m, layout.factor_dims(), factors);
    ASSERT_EQ(oracle::max_abs(ours - ref), 0.0) << "trial " << trial;
  }
}

TEST(PartialTranspose, LinearInvolutiveTracePreservingHermitianPreserving) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto layout = random_layout(rng);
    const std::size_t n = layout.total_dim();
    const auto factors = random_subset(layout.num_factors(), rng);
    const auto a = random_complex_matrix(n, n, rng);
    const auto b = random_complex_matrix(n, n, rng);
    const Complex s(0.3, -1.7);
    const auto pt = [&](const ComplexMatrix& m) { return partial_transpose(m, layout, factors); };

    EXPECT_LT((pt(a + s * b) - (pt(a) + s * pt(b))).norm(), 1e-12);
    EXPECT_LT((pt(pt(a)) - a).norm(), 1e-12);
    EXPECT_LT(std::abs(pt(a).trace() - a.trace()), 1e-12);
    const auto h = random_hermitian(n, rng);
    EXPECT_LT(hermiticity_defect(pt(h)), 1e-12);
  }
}

TEST(PartialTranspose, DimensionMismatchThrows) {
  const SubsystemLayout layout({2, 2}, 1);
  EXPECT_THROW(partial_transpose(identity(3), layout, {0}), InputError);
  EXPECT_THROW(partial_transpose(identity(4), layout, {2}), InputError);
}

TEST(PermuteFactors, IdentityPermutation) {
  Rng rng(6);
  const SubsystemLayout layout({2, 3, 2}, 1);
  const auto m = random_complex_matrix(12, 12, rng);
  EXPECT_EQ(oracle::max_abs(permute_factors(m, layout, {0, 1, 2}) - m), 0.0);
}

TEST(PermuteFactors, SwapActsOnProductStates) {
  // |a1>|b1>|a2>|b2> -> |a1>|a2>|b1>|b2>
  Rng rng(7);
  const std::size_t d = 3;
  const auto layout = SubsystemLayout::uniform(d, 4, 2);
  auto vec = [&] { return Ket(random_complex_matrix(d, 1, rng).col(0).normalized()); };
  const Ket a1 = vec(), b1 = vec(), a2 = vec(), b2 = vec();
  const Ket in = kron(kron(a1, b1), kron(a2, b2));
  const Ket expected = kron(kron(a1, a2), kron(b1, b2));
  EXPECT_LT((permute_ket(in, layout, std::vector<std::size_t>{0, 2, 1, 3}) - expected).norm(), 1e-14);
  const ComplexMatrix rho = density(in);
  EXPECT_LT((permute_factors(rho, layout, {0, 2, 1, 3}) - density(expected)).norm(), 1e-13);
}

TEST(PermuteFactors, MatchesPermutationUnitaryAndInverts) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto layout = random_layout(rng);
    std::vector<std::size_t> perm(layout.num_factors());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const std::size_t n = layout.total_dim();
    const auto m = random_complex_matrix(n, n, rng);
    const auto u = oracle::permutation_unitary(layout.factor_dims(), perm);
    const auto out = permute_factors(m, layout, perm);
    ASSERT_LT((out - u * m * u.adjoint()).norm(), 1e-12);
    EXPECT_LT(std::abs(out.trace() - m.trace()), 1e-12);
    const SubsystemLayout permuted(permuted_dims(layout, perm), 1);
    const auto back = permute_factors(out, permuted, inverse_permutation(perm));
    EXPECT_EQ(oracle::max_abs(back - m), 0.0);
  }
}

TEST(PermuteFactors, SwapOfKronIsKronSwapped) {
  Rng rng(9);
  const auto a = random_complex_matrix(3, 3, rng);
  const auto b = random_complex_matrix(2, 2, rng);
  const SubsystemLayout layout({3, 2}, 1);
  EXPECT_LT((permute_factors(kron(a, b), layout, {1, 0}) - kron(b, a)).norm(), 1e-12);
}

TEST(PermuteFactors, RejectsInvalidPermutation) {
  const SubsystemLayout layout({2, 2, 2}, 1);
  EXPECT_THROW(permute_factors(identity(8), layout, {0, 0, 1}), InputError);
  EXPECT_THROW(permute_factors(identity(8), layout, {0, 1}), InputError);
  EXPECT_THROW(permute_factors(identity(4), layout, {0, 1, 2}), InputError);
}

TEST(HermEig, DiagonalSortsAscending) {
  const auto eig = herm_eig(diag({3, 1, 2}));
  EXPECT_NEAR(eig.values(0), 1.0, 1e-14);
  EXPECT_NEAR(eig.values(1), 2.0, 1e-14);
  EXPECT_NEAR(eig.values(2), 3.0, 1e-14);
}

TEST(HermEig, PauliXFromCharacteristicPolynomial) {
  // lambda^2 - 1 = 0
  const auto eig = herm_eig(pauli_x());
  EXPECT_NEAR(eig.values(0), -1.0, 1e-14);
  EXPECT_NEAR(eig.values(1), 1.0, 1e-14);
}

TEST(HermEig, ReconstructionAndUnitarityUpTo256) {
  Rng rng(10);
  for (std::size_t n : {1u, 2u, 5u, 16u, 64u, 81u, 256u}) {
    const auto m = random_hermitian(n, rng);
    const auto eig = herm_eig(m);
    const ComplexMatrix& v = eig.vectors;
    const ComplexMatrix lam = eig.values.cast<Complex>().asDiagonal();
    EXPECT_LE((m * v - v * lam).norm(), 1e-10 * m.norm()) << n;
    EXPECT_LE((v.adjoint() * v - identity(n)).norm(), 1e-10) << n;
    for (Eigen::Index i = 1; i < eig.values.size(); ++i) EXPECT_LE(eig.values(i - 1), eig.values(i));
  }
}

TEST(HermEig, RejectsNonHermitian) {
  ComplexMatrix m(2, 2);
  m << 1, 2, 0, 1;
  EXPECT_THROW(herm_eig(m), InputError);
  EXPECT_THROW(min_eigenvalue(m), InputError);
  EXPECT_THROW(psd_project(m), InputError);
}

TEST(PsdProject, AlreadyPsdUnchanged) {
  Rng rng(11);
  const auto q = random_psd(12, rng);
  EXPECT_LT((psd_project(q) - q).norm(), 1e-10);
}

TEST(PsdProject, ClipsNegativeEigenvalues) {
  EXPECT_LT((psd_project(diag({1, -1})) - diag({1, 0})).norm(), 1e-15);
}

TEST(PsdProject, NearestAgainstSampledPsdMatrices) {
  Rng rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    const auto m = random_hermitian(6, rng);
    const auto p = psd_project(m);
    const double best = (m - p).norm();
    for (int k = 0; k < 20; ++k) {
      const auto q = random_psd(6, rng) * (0.1 * (k + 1));
      EXPECT_LE(best, (m - q).norm() + 1e-12);
    }
    // Also beat small perturbations of the projection itself.
    for (int k = 0; k < 20; ++k) {
      const auto q = psd_project(p + 1e-3 * random_hermitian(6, rng));
      EXPECT_LE(best, (m - q).norm() + 1e-12);
    }
  }
}

TEST(PsdProject, Idempotent) {
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = psd_project(random_hermitian(16, rng));
    EXPECT_LT((psd_project(p) - p).norm(), 1e-10);
    EXPECT_GE(min_eigenvalue(p), -1e-12);
  }
}

TEST(MinEigenvalue, SimpleCases) {
  EXPECT_NEAR(min_eigenvalue(identity(4)), 1.0, 1e-15);
  EXPECT_NEAR(min_eigenvalue(diag({2, -3})), -3.0, 1e-15);
  EXPECT_TRUE(is_psd(identity(3)));
  EXPECT_FALSE(is_psd(diag({2, -3})));
}

TEST(MinEigenvalue, UpsilonAtDimensionThreeIsZero) {
  // Upsilon_k has eigenvalues 0 and 2 only.
  const auto basis = weyl_basis(3);
  for (const auto& u : basis.unitaries()) {
    EXPECT_NEAR(min_eigenvalue(hermitian_part(upsilon(u))), 0.0, 1e-10);
  }
}
