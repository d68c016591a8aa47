#include <gtest/gtest.h>

#include <cmath>

#include "landau_bloch/criterion.hpp"
#include "landau_bloch/perturber.hpp"

using namespace landau_bloch;

namespace {

const Lattice2& square() {
    static const Lattice2 lat = build_lattice({1, 0}, {0, 1});
    return lat;
}

FourierPotential cosine() {
    FourierPotential V(square());
    V.set({1, 0}, 1.0);
    V.set({-1, 0}, 1.0);
    return V;
}

// Unit mode pair at the lattice point nearest to |Y| = R_m along the first axis.
FourierPotential mode_in_shell(int m) {
    const auto s = shell_constants(square(), m);
    const auto p = nearest_lattice_point(square(), {s.Rm, 0.0});
    FourierPotential W(square());
    W.set(p.index, 1.0);
    W.set(-p.index, 1.0);
    return W;
}

} // namespace

TEST(Shell, ConstantsOnUnitSquare) {
    const auto s = shell_constants(square(), 2);
    EXPECT_NEAR(s.a, 4.0 * kPi * std::sqrt(2.0) * std::pow(std::log(2.0), -0.75), 1e-12);
    EXPECT_NEAR(s.a, 23.394, 1e-3);
    EXPECT_NEAR(s.rm, kPi * std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(s.Rm, 35.5431, 1e-4);
    EXPECT_NEAR(s.rpm, 2.0 * s.rm, 1e-15);
    EXPECT_THROW(shell_constants(square(), 1), ConfigError);
    EXPECT_THROW(shell_constants(square(), 0), ConfigError);
}

TEST(Shell, ConsecutiveShellsSeparated) {
    const auto lat = build_lattice({2, 0}, {1, 1});
    for (int m = 2; m <= 200; ++m) {
        EXPECT_NO_THROW(shell_constants(lat, m));
        EXPECT_NO_THROW(shell_constants(square(), m));
    }
}

TEST(Admissible, LowFrequencyPotentialIsEverywhereAdmissible) {
    const auto ms = admissible_m(cosine(), 0, 1.0, 2, 20);
    EXPECT_EQ(ms.size(), 19u);
    EXPECT_EQ(admissible_m(FourierPotential(square()), 1, 1.0, 2, 20).size(), 19u);
}

TEST(Admissible, ModeInShellExcluded) {
    const auto W = cosine() + mode_in_shell(5);
    const auto ms = admissible_m(W, 0, 1e-6, 2, 20);
    EXPECT_EQ(std::find(ms.begin(), ms.end(), 5), ms.end());
    EXPECT_EQ(ms.size(), 18u);
}

TEST(Admissible, MonotoneInDelta) {
    auto W = cosine();
    for (int m : {3, 6, 9}) {
        W += mode_in_shell(m);
    }
    std::size_t prev = 0;
    for (double delta : {1e-3, 1e-2, 0.1, 1.0, 2.0, 4.0, 100.0}) {
        const auto ms = admissible_m(W, 0, delta, 2, 12);
        EXPECT_GE(ms.size(), prev);
        prev = ms.size();
    }
    EXPECT_THROW(admissible_m(W, 0, 1.0, 1, 5), ConfigError);
}

TEST(Direction, EmptyShellReturnsFirstAngle) {
    const auto d = select_direction(cosine(), 0, 3, 64);
    const auto s = shell_constants(square(), 3);
    EXPECT_EQ(d.angleIndex, 0);
    EXPECT_EQ(d.x.x, s.Rm);
    EXPECT_EQ(d.x.y, 0.0);
    EXPECT_EQ(d.value, 0.0);
    EXPECT_TRUE(d.bound.pass);
}

TEST(Direction, AvoidsMass) {
    const int m = 4;
    const auto W = mode_in_shell(m);
    const auto d = select_direction(W, 0, m, 256);
    EXPECT_EQ(d.value, 0.0);
    const double angle = std::atan2(d.x.y, d.x.x);
    EXPECT_NEAR(std::abs(angle), kPi / 2.0, kTwoPi / 256.0);
    EXPECT_TRUE(d.bound.pass);
    EXPECT_THROW(select_direction(W, 0, m, 32), ConfigError);
}

TEST(Direction, AveragedFractionBelowOne) {
    for (int m = 2; m <= 200; ++m) {
        const double f = direction_fraction(shell_constants(square(), m));
        EXPECT_GT(f, 0.0);
        EXPECT_LT(f, 1.0);
    }
}

TEST(Direction, DenseShellStillMeetsAveragedBound) {
    const int m = 3;
    const auto s = shell_constants(square(), m);
    FourierPotential W(square());
    for (const auto& p : points_in_disk(square(), {0, 0}, s.Rm + s.rpm)) {
        if (norm(p.Y) >= s.Rm - s.rpm) {
            W.set(p.index, 1.0 / (1.0 + std::abs(p.index.n1) + 2.0 * std::abs(p.index.n2)));
        }
    }
    const auto d = select_direction(W, 0, m, 256);
    EXPECT_GT(d.value, 0.0);
    EXPECT_LE(d.bound.lhs, d.bound.rhs);
}

TEST(Ym, HandEnumeration) {
    const auto s = shell_constants(square(), 2);
    const auto y = select_Ym(square(), {s.Rm, 0.0}, s);
    EXPECT_EQ(y.Y.index, (LatticeIndex{6, 0}));
    EXPECT_NEAR(y.distance, 12.0 * kPi - s.Rm, 1e-12);
    EXPECT_NEAR(y.distance, 2.156, 1e-3);
    EXPECT_LE(y.distance, s.rm);
    EXPECT_TRUE(y.lower.pass);
    EXPECT_TRUE(y.upper.pass);
    EXPECT_NEAR(y.lower.lhs, 31.10, 0.01);
    EXPECT_NEAR(y.upper.rhs, 39.99, 0.01);
    EXPECT_THROW(select_Ym(square(), {s.Rm + 1.0, 0.0}, s), ConfigError);
}

TEST(Ym, ExactLatticePoint) {
    auto s = shell_constants(square(), 2);
    s.Rm = 12.0 * kPi;
    const auto y = select_Ym(square(), {0.0, -s.Rm}, s);
    EXPECT_EQ(y.Y.index, (LatticeIndex{0, -6}));
    EXPECT_EQ(y.distance, 0.0);
}

TEST(Perturb, CosineAtShellTwo) {
    const auto flux = make_flux(square(), 1, 1);
    const auto W = cosine();
    const auto r = perturb(W, flux, 0, 0.5, 2);
    EXPECT_NEAR(r.amplitude, std::pow(2.0, -0.75), 1e-15);
    EXPECT_NEAR(r.amplitude, 0.594604, 1e-6);
    EXPECT_EQ(r.Ym.Y.index, (LatticeIndex{6, 0}));
    EXPECT_EQ(r.output.coefficients().size(), 4u);
    EXPECT_EQ(r.output.coefficient({1, 0}), cplx(1.0));
    EXPECT_EQ(r.output.coefficient({6, 0}), cplx(r.amplitude));
    EXPECT_EQ(r.output.coefficient({-6, 0}), cplx(r.amplitude));
    // Direct summation: the only other coefficients sit at distance 5*2pi, 7*2pi and 12*2pi.
    const double oracle = r.amplitude - std::exp(-std::pow(10.0 * kPi, 2) / (8.0 * kPi)) -
                          std::exp(-std::pow(14.0 * kPi, 2) / (8.0 * kPi)) -
                          r.amplitude * std::exp(-std::pow(24.0 * kPi, 2) / (8.0 * kPi));
    EXPECT_NEAR(r.criterion, oracle, 1e-15);
    EXPECT_NEAR(r.weightedCriterion, 12.0 * kPi * oracle, 1e-12);
    EXPECT_NEAR(r.weightedCriterion, 22.42, 0.01);
    EXPECT_TRUE(r.shellBound.pass);
    EXPECT_TRUE(r.directionBound.pass);
    EXPECT_TRUE(r.bracketLower.pass);
    EXPECT_TRUE(r.bracketUpper.pass);
    EXPECT_TRUE(r.criterionBound.pass);
    EXPECT_TRUE(r.real);
    EXPECT_EQ(r.hermitianDefect, 0.0);
    EXPECT_TRUE(r.verified());
}

TEST(Perturb, ZeroPotentialDistanceFormula) {
    const auto flux = make_flux(square(), 1, 1);
    for (int m : {2, 3, 7}) {
        for (double theta : {0.0, 0.25, 0.9}) {
            const auto r = perturb(FourierPotential(square()), flux, 0, theta, m);
            const double expected =
                std::sqrt(2.0 * square().cellArea) * r.amplitude * std::pow(1.0 + norm(r.Ym.Y.Y), theta);
            EXPECT_NEAR(r.distance, expected, 1e-12 * expected);
            EXPECT_TRUE(r.verified());
        }
    }
}

TEST(Perturb, ScanReproducesRecord) {
    const auto flux = make_flux(square(), 1, 1);
    auto W = cosine();
    W.set({2, 1}, cplx(0.2, 0.1));
    W.set({-2, -1}, cplx(0.2, -0.1));
    const auto r = perturb(W, flux, 1, 0.3, 3);
    const auto rep = scan(r.output, flux, 1, norm(r.Ym.Y.Y) + 1.0);
    bool found = false;
    for (const auto& row : rep.rows) {
        if (row.index == r.Ym.Y.index) {
            EXPECT_EQ(row.C, r.criterion);
            EXPECT_EQ(row.weighted, r.weightedCriterion);
            found = true;
        }
    }
    EXPECT_TRUE(found);
    const auto reloaded = load_potential(write_potential(r.output), square());
    EXPECT_EQ(c_criterion(reloaded, flux.B, r.Ym.Y.index), r.criterion);
}

TEST(Perturb, StripsBothDisks) {
    const auto flux = make_flux(square(), 1, 1);
    const int m = 2;
    const auto s = shell_constants(square(), m);
    // Mass on most of the shell forces some disk to be non-empty after selection.
    FourierPotential W(square());
    for (const auto& p : points_in_disk(square(), {0, 0}, s.Rm + s.rpm)) {
        if (norm(p.Y) >= s.Rm - s.rpm && std::abs(p.Y.y) < 0.5 * s.Rm) {
            W.set(p.index, 1e-3);
        }
    }
    const auto r = perturb(W, flux, 0, 0.5, m, 256, 1e9);
    for (const auto& [idx, c] : r.output.coefficients()) {
        if (idx == r.Ym.Y.index || idx == -r.Ym.Y.index) {
            EXPECT_EQ(c, cplx(r.amplitude));
            continue;
        }
        const Vec2 Y = square().wavevector(idx);
        EXPECT_GT(norm(Y - r.Ym.Y.Y), s.rm);
        EXPECT_GT(norm(Y + r.Ym.Y.Y), s.rm);
    }
    EXPECT_TRUE(r.real);
    EXPECT_TRUE(r.criterionBound.pass);
}

TEST(Perturb, RejectsInadmissibleAndBadArguments) {
    const auto flux = make_flux(square(), 1, 1);
    const auto W = cosine() + mode_in_shell(5);
    EXPECT_THROW(perturb(W, flux, 0, 0.5, 5, 256, 1e-6), NumericalError);
    EXPECT_NO_THROW(perturb(W, flux, 0, 0.5, 4, 256, 1e-6));
    EXPECT_THROW(perturb(W, flux, 0, 1.0, 4), ConfigError);
    EXPECT_THROW(perturb(W, flux, 0, -0.1, 4), ConfigError);
    EXPECT_THROW(perturb(W, flux, -1, 0.5, 4), ConfigError);
    EXPECT_THROW(perturb(W, flux, 0, 0.5, 4, 256, 0.0), ConfigError);
}

TEST(Perturb, WeightedCriterionDivergesAlongAdmissibleShells) {
    const auto flux = make_flux(square(), 1, 1);
    const auto W = cosine();
    double prev = 0.0;
    for (int m : {2, 5, 10, 20, 100, 1000, 5000, 20000}) {
        const auto r = perturb(W, flux, 0, 0.5, m);
        EXPECT_TRUE(r.verified());
        EXPECT_GT(r.weightedCriterion, prev);
        prev = r.weightedCriterion;
    }
    EXPECT_GT(prev, 1e3);
}

TEST(Perturb, DistanceEventuallyDecreases) {
    const auto flux = make_flux(square(), 1, 1);
    const auto W = cosine();
    // The leading behaviour is m^{-1/4} (ln m)^{3/8}, which peaks near m = 4.5.
    double prev = std::numeric_limits<double>::infinity();
    double prevRhs = std::numeric_limits<double>::infinity();
    for (int m : {5, 10, 20, 100, 1000, 10000}) {
        const auto r = perturb(W, flux, 0, 0.5, m);
        EXPECT_LT(r.distance, prev);
        EXPECT_LT(r.distanceBound.rhs, prevRhs);
        EXPECT_TRUE(r.distanceBound.pass);
        prev = r.distance;
        prevRhs = r.distanceBound.rhs;
    }
}

TEST(Stripping, EmptyDisksPassTrivially) {
    const auto rep = stripping_diagnostic(cosine(), 0, 0.5, 3, 1.0);
    EXPECT_EQ(rep.strippedNorm.lhs, 0.0);
    EXPECT_EQ(rep.strippedSmoothNorm.lhs, 0.0);
    EXPECT_TRUE(rep.strippedNorm.pass);
    EXPECT_TRUE(rep.strippedSmoothNorm.pass);
    ASSERT_EQ(rep.smoothingChain.size(), 2u);
    for (const auto& q : rep.smoothingChain) {
        EXPECT_TRUE(q.pass);
    }
    EXPECT_TRUE(rep.distance.pass);
}

TEST(Stripping, ConcentratedShellFailsForSmallDelta) {
    const int m = 2;
    const auto s = shell_constants(square(), m);
    FourierPotential W(square());
    for (const auto& p : points_in_disk(square(), {0, 0}, s.Rm + s.rpm)) {
        if (norm(p.Y) >= s.Rm - s.rpm) {
            W.set(p.index, 1.0);
        }
    }
    const auto rep = stripping_diagnostic(W, 0, 0.5, m, 1e-3);
    EXPECT_GT(rep.strippedNorm.lhs, 0.0);
    EXPECT_FALSE(rep.strippedNorm.pass);
    EXPECT_FALSE(rep.strippedSmoothNorm.pass);
    for (const auto& q : rep.smoothingChain) {
        EXPECT_TRUE(q.pass);
    }
}
