#include "fixtures.hpp"
#include "oracle.hpp"

#include <gtest/gtest.h>

using namespace feaudit;

namespace {

std::array<Vec3, 4> random_tet(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (;;) {
        std::array<Vec3, 4> x;
        for (auto& p : x) p = Vec3(d(rng), d(rng), d(rng));
        if (aspect_ratio(x) < 20.0) return x;
    }
}

double rel_diff(const Matrix12& K, const oracle::Dense& R) {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j) {
            const double r = R(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            num = std::max(num, std::abs(K(i, j) - r));
            den = std::max(den, std::abs(r));
        }
    return num / den;
}

}  // namespace

TEST(Material, Validation) {
    EXPECT_NO_THROW(Material{}.validate());
    Material m;
    m.nu = 0.5;
    EXPECT_THROW(m.validate(), Error);
    m = Material{};
    m.E = 0.0;
    EXPECT_THROW(m.validate(), Error);
    m = Material{};
    m.nu = -1.0;
    try {
        m.validate();
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidMaterial);
    }
}

TEST(Elasticity, MatchesInvertedCompliance) {
    for (double nu : {0.0, 0.3, 0.45}) {
        Material m;
        m.E = 7e10;
        m.nu = nu;
        const Matrix6 D = elasticity_matrix(m);
        const auto R = oracle::elasticity(m.E, nu);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                EXPECT_NEAR(D(i, j), R(static_cast<std::size_t>(i), static_cast<std::size_t>(j)), 1e-12 * m.E);
    }
}

TEST(ElementStiffness, MatchesDenseOracle) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto x = random_tet(rng);
        const Matrix12 K = element_stiffness(x, Material{});
        EXPECT_LT(rel_diff(K, oracle::element_stiffness(x, 210e9, 0.3)), 1e-12);
    }
}

TEST(ElementStiffness, SymmetricWithSixRigidModes) {
    std::mt19937_64 rng(12);
    const auto x = random_tet(rng);
    const Matrix12 K = element_stiffness(x, Material{});
    EXPECT_EQ(K, K.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix12> eig(K);
    const double top = eig.eigenvalues().maxCoeff();
    for (int i = 0; i < 6; ++i) EXPECT_LT(std::abs(eig.eigenvalues()[i]), 1e-10 * top);
    for (int i = 6; i < 12; ++i) EXPECT_GT(eig.eigenvalues()[i], 1e-6 * top);
}

TEST(ElementStiffness, IndependentOfInputOrientation) {
    std::mt19937_64 rng(13);
    const auto x = random_tet(rng);
    auto y = x;
    std::swap(y[2], y[3]);
    const Matrix12 Kx = element_stiffness(x, Material{});
    const Matrix12 Ky = element_stiffness(y, Material{});
    const int map[4] = {0, 1, 3, 2};
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            EXPECT_LT((Kx.block<3, 3>(3 * a, 3 * b) - Ky.block<3, 3>(3 * map[a], 3 * map[b])).norm(),
                      1e-12 * Kx.norm());
}

TEST(ElementStiffness, DegenerateElementIsRejected) {
    const std::array<Vec3, 4> flat{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0)};
    try {
        (void)element_stiffness(flat, Material{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateElement);
    }
}

TEST(StressRecovery, LinearFieldGivesExactStrain) {
    std::mt19937_64 rng(14);
    const auto x = random_tet(rng);
    Mat3 G;
    G << 1e-4, 2e-4, -3e-4, 0.5e-4, -1e-4, 2e-4, 4e-4, 1e-4, 3e-4;
    Vector12 ue;
    for (int a = 0; a < 4; ++a) ue.segment<3>(3 * a) = G * x[static_cast<std::size_t>(a)];
    const Mat3 eps = 0.5 * (G + G.transpose());
    Vector6 voigt;
    voigt << eps(0, 0), eps(1, 1), eps(2, 2), 2 * eps(0, 1), 2 * eps(1, 2), 2 * eps(2, 0);
    const Material m;
    const StressTensor s = recover_stress(x, m, ue);
    const Vector6 expected = elasticity_matrix(m) * voigt;
    EXPECT_LT((s - expected).norm(), 1e-12 * expected.norm());
    const auto r = oracle::stress(x, m.E, m.nu, ue.data());
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(s[i], r[static_cast<std::size_t>(i)], 1e-9 * expected.norm());
}

TEST(StressRecovery, RigidMotionIsStressFree) {
    std::mt19937_64 rng(15);
    const auto x = random_tet(rng);
    const Vec3 t(0.3, -0.2, 0.1), w(1e-3, -2e-3, 5e-4);
    Vector12 ue;
    for (int a = 0; a < 4; ++a) ue.segment<3>(3 * a) = t + w.cross(x[static_cast<std::size_t>(a)]);
    EXPECT_LT(recover_stress(x, Material{}, ue).norm(), 1e-12 * 210e9 * w.norm());
}

TEST(VonMises, ClosedForms) {
    StressTensor s = StressTensor::Zero();
    s << 5e6, 5e6, 5e6, 0, 0, 0;
    EXPECT_NEAR(von_mises(s), 0.0, 1e-10 * 5e6);
    s << 1.9e8, 0, 0, 0, 0, 0;
    EXPECT_NEAR(von_mises(s), 1.9e8, 1e-10 * 1.9e8);
    s << 0, 0, 0, 0, 7e7, 0;
    EXPECT_NEAR(von_mises(s), std::sqrt(3.0) * 7e7, 1e-10 * 7e7);
    s << 100, -50, 20, 30, -10, 40;
    const double expected = std::sqrt(0.5 * ((150.0 * 150) + (70.0 * 70) + (80.0 * 80)) + 3 * (900.0 + 100 + 1600));
    EXPECT_NEAR(von_mises(s), expected, 1e-12 * expected);
}
