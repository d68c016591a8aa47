#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "landau_bloch/special.hpp"

using namespace landau_bloch;

namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

/// Closed form via associated Laguerre polynomials, independent of the recursion.
cplx laguerre_displacement(int mp, int m, const Vec2& Y, double B) {
    const cplx alpha = displacement_alpha(Y, B);
    const double t = norm2(Y) / (2.0 * B);
    if (mp >= m) {
        const unsigned k = static_cast<unsigned>(mp - m);
        return std::sqrt(factorial(m) / factorial(mp)) * std::pow(alpha, static_cast<int>(k)) * std::exp(-t / 2.0) *
               std::assoc_laguerre(static_cast<unsigned>(m), k, t);
    }
    const unsigned k = static_cast<unsigned>(m - mp);
    return std::sqrt(factorial(mp) / factorial(m)) * std::pow(-std::conj(alpha), static_cast<int>(k)) *
           std::exp(-t / 2.0) * std::assoc_laguerre(static_cast<unsigned>(mp), k, t);
}

} // namespace

TEST(Hermite, LowOrdersMatchExplicitFormulas) {
    std::vector<double> phi(3);
    for (double u : {-1.3, 0.0, 0.4, 2.5}) {
        hermite_functions(u, phi);
        const double g = std::exp(-u * u / 2.0) / std::pow(kPi, 0.25);
        EXPECT_NEAR(phi[0], g, 1e-15);
        EXPECT_NEAR(phi[1], std::sqrt(2.0) * u * g, 1e-15);
        EXPECT_NEAR(phi[2], (2.0 * u * u - 1.0) / std::sqrt(2.0) * g, 1e-15);
    }
}

TEST(Hermite, OrthonormalOnFineGrid) {
    const int M = 8;
    const double h = 0.01;
    std::vector<double> phi(M + 1);
    std::vector<double> gram((M + 1) * (M + 1), 0.0);
    for (double u = -15.0; u <= 15.0; u += h) {
        hermite_functions(u, phi);
        for (int a = 0; a <= M; ++a) {
            for (int b = 0; b <= M; ++b) {
                gram[a * (M + 1) + b] += h * phi[a] * phi[b];
            }
        }
    }
    for (int a = 0; a <= M; ++a) {
        for (int b = 0; b <= M; ++b) {
            EXPECT_NEAR(gram[a * (M + 1) + b], a == b ? 1.0 : 0.0, 1e-10);
        }
    }
}

TEST(Hermite, DerivativeMatchesFiniteDifference) {
    const int M = 6;
    std::vector<double> phi(M + 1), dphi(M + 1), lo(M + 1), hi(M + 1);
    const double u = 0.77;
    const double h = 1e-5;
    hermite_functions_with_derivative(u, phi, dphi);
    hermite_functions(u - h, lo);
    hermite_functions(u + h, hi);
    for (int m = 0; m <= M; ++m) {
        EXPECT_NEAR(dphi[m], (hi[m] - lo[m]) / (2 * h), 1e-8);
        // Ladder identity, independent of the recurrence derivative.
        const double ladder = (m > 0 ? std::sqrt(m / 2.0) * phi[m - 1] : 0.0) - std::sqrt((m + 1) / 2.0) *
                              [&] { std::vector<double> p(M + 2); hermite_functions(u, p); return p[m + 1]; }();
        EXPECT_NEAR(dphi[m], ladder, 1e-13);
    }
}

TEST(Hermite, TailAndHalfWidth) {
    EXPECT_LT(hermite_tail(0, 8.0), 1e-12);
    EXPECT_GT(hermite_tail(0, 7.0), 1e-12);
    EXPECT_EQ(required_half_width(0), 8);
    const int L = required_half_width(10);
    EXPECT_LT(hermite_tail(10, L), 1e-12);
    EXPECT_GE(hermite_tail(10, L - 1), 1e-12);
}

TEST(Displacement, FactorizedElement) {
    const double B = kTwoPi;
    const Vec2 Y{kTwoPi, 0.0};
    EXPECT_NEAR(std::abs(displacement_coeff(0, 0, Y, B)), std::exp(-kPi / 2.0), 1e-15);
    EXPECT_NEAR(std::abs(displacement_coeff(0, 0, Y, B)), 0.207880, 1e-6);
    EXPECT_NEAR(std::abs(displacement_coeff(1, 1, Y, B)), std::exp(-kPi / 2.0) * std::abs(1.0 - kPi), 1e-14);
}

TEST(Displacement, IdentityAtZero) {
    const auto d = displacement_matrix({0.0, 0.0}, 3.0, 12);
    EXPECT_LT((d - Eigen::MatrixXcd::Identity(13, 13)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Displacement, RecursionMatchesLaguerreClosedForm) {
    const double B = 2.0 * kPi;
    for (const Vec2 Y : {Vec2{kTwoPi, 0.0}, Vec2{0.0, kTwoPi}, Vec2{-3.0, 5.5}, Vec2{12.0, -7.0}}) {
        const int M = 10;
        const auto d = displacement_matrix(Y, B, M);
        for (int mp = 0; mp <= M; ++mp) {
            for (int m = 0; m <= M; ++m) {
                const cplx ref = laguerre_displacement(mp, m, Y, B);
                EXPECT_NEAR(std::abs(d(mp, m) - ref), 0.0, 1e-12 * std::max(1.0, std::abs(ref)))
                    << "mp=" << mp << " m=" << m;
            }
        }
    }
}

TEST(Displacement, UnitaryInTheFullSpaceLimit) {
    // e^{i(Y,x)} is unitary; rows of low levels are exhausted well before M.
    const auto d = displacement_matrix({1.5, -0.7}, kTwoPi, 60);
    const Eigen::MatrixXcd g = d.adjoint() * d;
    for (int m = 0; m <= 10; ++m) {
        EXPECT_NEAR(std::abs(g(m, m)), 1.0, 1e-12);
    }
}

TEST(Displacement, AdjointReversesY) {
    const Vec2 Y{2.0, 3.0};
    const auto d = displacement_matrix(Y, 4.0, 8);
    const auto dm = displacement_matrix(-Y, 4.0, 8);
    EXPECT_LT((dm - d.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
}
