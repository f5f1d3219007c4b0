#include <gtest/gtest.h>

#include <cmath>

#include "cpka/tensor.hpp"
#include "helpers.hpp"

using namespace cpka;

TEST(FourthMoment, MatchesBruteForce) {
    const CMatrix z = testutil::random_complex(3, 50, 11);
    const FourthOrderTensor t = fourth_moment_tensor(z);
    ASSERT_EQ(t.data().size(), 81u);
    double err = 0;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c)
                for (int d = 0; d < 3; ++d) err = std::max(err, std::abs(t(a, b, c, d) - testutil::brute_moment(z, a, b, c, d)));
    EXPECT_LE(err, 1e-12);
}

TEST(FourthMoment, ScalarAndGaussianIdentities) {
    CMatrix u(1, 64);
    for (int j = 0; j < 64; ++j) u(0, j) = std::polar(1.0, 0.37 * j);
    EXPECT_NEAR(std::abs(fourth_moment_tensor(u)(0, 0, 0, 0) - 1.0), 0.0, 1e-12);

    const CMatrix g = testutil::whitened(testutil::random_real(2, 100000, 12));
    const FourthOrderTensor t = fourth_moment_tensor(g);
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(t(i, i, i, i).real(), 3.0, 0.1);
    EXPECT_TRUE(t.real_valued());

    const CMatrix gc = testutil::whitened(testutil::random_complex(2, 100000, 13));
    const FourthOrderTensor tc = fourth_moment_tensor(gc);
    EXPECT_FALSE(tc.real_valued());
    const CVector w = testutil::random_unit(2, 14);
    EXPECT_NEAR(cw4(tc, w), 2.0, 0.2);
    EXPECT_NEAR(cw4(t, testutil::random_unit(2, 15, false)), 3.0, 0.2);
}

TEST(FourthMoment, SymmetryGroupHolds) {
    const FourthOrderTensor t = fourth_moment_tensor(testutil::whitened(testutil::random_complex(4, 300, 16)));
    EXPECT_LE(symmetry_defect(t), 1e-12);
    // the conjugating relations in the seven-relation list need a real tensor
    EXPECT_GT(listed_symmetry_defect(t), 1e-3);
    const FourthOrderTensor r = fourth_moment_tensor(testutil::whitened(testutil::random_real(4, 300, 17)));
    EXPECT_LE(listed_symmetry_defect(r), 1e-12);
}

TEST(FourthMoment, CapacityGuard) {
    EXPECT_THROW(fourth_moment_tensor(testutil::random_complex(8, 10, 1), 1000), CapacityError);
}

TEST(Contraction, AgreesWithSamples) {
    const CMatrix z = testutil::whitened(testutil::random_complex(3, 400, 18));
    const FourthOrderTensor t = fourth_moment_tensor(z);
    for (std::uint64_t s = 0; s < 10; ++s) {
        const CVector w = testutil::random_unit(3, 100 + s);
        const double direct = testutil::direct_kurt(z, w);
        EXPECT_NEAR(cw4(t, w), direct, 1e-10 * std::max(1.0, direct));
        EXPECT_LT((cw3(t, w) - cw3_samples(z, w)).norm(), 1e-10);
        EXPECT_NEAR(cw4_samples(z, w), direct, 1e-10 * direct);
    }
    CVector bad = testutil::random_unit(3, 1) * 2.0;
    EXPECT_THROW(cw3(t, bad), InputError);
}

TEST(Contraction, ScalarCase) {
    FourthOrderTensor t(1);
    t(0, 0, 0, 0) = 2.5;
    CVector w(1);
    w(0) = std::polar(1.0, 0.7);
    EXPECT_LT(std::abs(cw3(t, w)(0) - 2.5 * w(0)), 1e-15);
}

TEST(Contraction, SequentialNModeMatchesQuadrupleSum) {
    const CMatrix z = testutil::random_complex(3, 60, 19);
    const FourthOrderTensor t = fourth_moment_tensor(z);
    const CVector w = testutil::random_unit(3, 20);
    // contracting modes 4, 3, 2 with w, w*, w leaves (Cw^3)_a
    DenseTensor d = DenseTensor::from(t);
    d = nmode_product(d, CVector(w), 4);
    d = nmode_product(d, CVector(w.conjugate()), 3);
    d = nmode_product(d, CVector(w), 2);
    ASSERT_EQ(d.order(), 1);
    CVector oracle = CVector::Zero(3);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c)
                for (int e = 0; e < 3; ++e) oracle(a) += t(a, b, c, e) * w(b) * std::conj(w(c)) * w(e);
    for (int a = 0; a < 3; ++a) EXPECT_LT(std::abs(d.data[static_cast<std::size_t>(a)] - oracle(a)), 1e-12);
    EXPECT_LT((contract3(t, w) - oracle).norm(), 1e-12);
}

TEST(NMode, IdentityAndAllOnes) {
    const FourthOrderTensor t = fourth_moment_tensor(testutil::random_complex(2, 20, 21));
    const DenseTensor d = DenseTensor::from(t);
    for (int m = 1; m <= 4; ++m) {
        const DenseTensor e = nmode_product(d, CMatrix(CMatrix::Identity(2, 2)), m);
        EXPECT_EQ(e.dims, d.dims);
        for (std::size_t i = 0; i < d.data.size(); ++i) EXPECT_EQ(e.data[i], d.data[i]);
    }
    DenseTensor ones = DenseTensor::zeros({2, 2, 2});
    for (auto& v : ones.data) v = 1.0;
    const DenseTensor r = nmode_product(ones, CVector(CVector::Ones(2)), 1);
    ASSERT_EQ(r.dims, (std::vector<int>{2, 2}));
    for (const auto& v : r.data) EXPECT_EQ(v, cd(2.0));
    EXPECT_THROW(nmode_product(ones, CVector(CVector::Ones(3)), 1), InputError);
    EXPECT_THROW(nmode_product(ones, CVector(CVector::Ones(2)), 4), InputError);
}

TEST(Coskewness, SymmetricAndSkewness) {
    // +-1 square wave: every third moment vanishes
    CMatrix sq(2, 1000);
    for (int j = 0; j < 1000; ++j) {
        sq(0, j) = (j / 7) % 2 ? 1.0 : -1.0;
        sq(1, j) = (j / 13) % 2 ? 1.0 : -1.0;
    }
    const ThirdOrderTensor s = coskewness_tensor(sq);
    for (double v : s.data()) EXPECT_LE(std::abs(v), 3.0 / std::sqrt(1000.0));

    Rng rng(22);
    std::exponential_distribution<double> ex(1.0);
    CMatrix e(1, 100000);
    for (int j = 0; j < 100000; ++j) e(0, j) = ex(rng.engine());
    e = testutil::whitened(e);
    EXPECT_NEAR(coskewness_tensor(e)(0, 0, 0), 2.0, 0.2);

    const ThirdOrderTensor r = coskewness_tensor(testutil::random_real(3, 50, 23));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) EXPECT_EQ(r(i, j, k), r(k, i, j));
    EXPECT_THROW(coskewness_tensor(testutil::random_complex(2, 10, 1)), InputError);
}

TEST(StatisticalTensor, SeededAndReal) {
    const FourthOrderTensor a = random_statistical_tensor(3, 5);
    const FourthOrderTensor b = random_statistical_tensor(3, 5);
    EXPECT_EQ(a.data(), b.data());
    EXPECT_EQ(a.data().size(), 81u);
    EXPECT_LE(symmetry_defect(a), 1e-12);
    for (std::uint64_t s = 0; s < 100; ++s) {
        const FourthOrderTensor t = random_statistical_tensor(3, s);
        for (std::uint64_t k = 0; k < 10; ++k) {
            const CVector w = testutil::random_unit(3, 1000 * s + k);
            const cd v = contract4(t, w);
            EXPECT_LE(std::abs(v.imag()), 1e-10 * std::max(1.0, std::abs(v.real())));
        }
    }
}

TEST(Cumulants, GaussianVanishesAndKurtosisEntry) {
    const int l = 100000;
    const CMatrix g = testutil::whitened(testutil::random_complex(2, l, 24));
    for (const auto& m : cumulant_matrices(g)) EXPECT_LE(m.norm(), 10.0 / std::sqrt(l));

    CMatrix u(1, 4000);
    for (int j = 0; j < 4000; ++j) u(0, j) = std::polar(1.0, 0.01 * j * j);
    const auto n = cumulant_matrices(u);
    ASSERT_EQ(n.size(), 1u);
    const double kurt = testutil::direct_kurt(u, CVector::Ones(1));
    const cd r = u.row(0).squaredNorm() / 4000.0;
    const cd q = (u.row(0).array() * u.row(0).array()).sum() / 4000.0;
    // circular only in expectation: include the sample pseudo-covariance term
    EXPECT_NEAR(n[0](0, 0).real(), kurt - 2.0 * std::norm(r) - std::norm(q), 1e-12);
}
