#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "landau_fiber.hpp"
#include "potential.hpp"

namespace landau_bloch {

struct VerifyOptions {
    Lattice2 lattice = build_lattice({1, 0}, {0, 1});
    std::uint64_t seed = 0;
    int ladderMaxLevel = 6;
    int unitarityPoints = 5;
    int coercivitySamples = 1000;
    int coercivityM = 10;
    int shiftSamples = 3;
    int shiftM = 5;
    double shiftMaxZeta = 5.0;
    int gradedSamples = 200;
    int gradedM = 12;
    int continuityPairs = 100;
};

/// One checked property: a measured residual (or violation count) against a threshold.
struct PropertyResult {
    std::string suite;
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    int samples = 0;
    int violations = 0;
    bool pass = false;
};

inline const std::vector<std::string>& verify_suites() {
    static const std::vector<std::string> names{"ladder", "lemma2", "lemma3", "eq5", "graded", "lemma6"};
    return names;
}

namespace detail {

inline PropertyResult residual(std::string suite, std::string name, double measured, double threshold, int samples) {
    return {std::move(suite), std::move(name), measured, threshold, samples, measured < threshold ? 0 : 1,
            measured < threshold};
}

inline PropertyResult violations(std::string suite, std::string name, double worstRatio, int samples, int count) {
    return {std::move(suite), std::move(name), worstRatio, 1.0, samples, count, count == 0};
}

inline Vec2 random_k(const FluxSpec& flux, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double t1 = u(rng);
    const double t2 = u(rng);
    return kTwoPi * (t1 * flux.Etilde1s + t2 * flux.Etilde2s);
}

inline cplx random_normal(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    const double re = g(rng);
    const double im = g(rng);
    return {re, im};
}

/// Random Hermitian potential on indices |n1|, |n2| <= R.
inline FourierPotential random_potential(const Lattice2& lat, int R, std::mt19937_64& rng) {
    FourierPotential W(lat);
    for (int n1 = -R; n1 <= R; ++n1) {
        for (int n2 = -R; n2 <= R; ++n2) {
            const LatticeIndex idx{n1, n2};
            if (-idx < idx) {
                continue;
            }
            if (idx == -idx) {
                W.set(idx, random_normal(rng).real());
            } else {
                const cplx c = random_normal(rng);
                W.set(idx, c);
                W.set(-idx, std::conj(c));
            }
        }
    }
    return W;
}

} // namespace detail

/// Z_+ psi^(m) = sqrt(2B(m+1)) psi^(m+1) and Z_- psi^(m) = sqrt(2Bm) psi^(m-1)
/// in L^2 of the enlarged cell, plus the coefficient-space identities.
inline std::vector<PropertyResult> verify_ladder(const VerifyOptions& o) {
    std::vector<PropertyResult> out;
    std::mt19937_64 rng(o.seed);
    const int top = o.ladderMaxLevel;
    for (int P : {1, 3}) {
        const auto flux = make_flux(o.lattice, P, 1);
        const auto b = build_lll_basis(flux, detail::random_k(flux, rng), required_half_width(top + 1));
        double worst = 0.0;
        for (int m = 0; m <= top; ++m) {
            for (int j = 0; j < P; ++j) {
                std::vector<LevelValue> lv(static_cast<std::size_t>(top) + 2);
                // The integrand vanishes identically, so a fixed grid suffices.
                const cplx q = trapezoid_cell(
                    flux, 64,
                    [&](const Vec2& x) {
                        evaluate_levels(b, j, x, lv);
                        const auto& f = lv[static_cast<std::size_t>(m)];
                        const cplx up = apply_Zplus(f, b.k, flux.B, x) -
                                        std::sqrt(2.0 * flux.B * (m + 1)) * lv[static_cast<std::size_t>(m) + 1].value;
                        cplx dn = apply_Zminus(f, b.k, flux.B, x);
                        if (m > 0) {
                            dn -= std::sqrt(2.0 * flux.B * m) * lv[static_cast<std::size_t>(m) - 1].value;
                        }
                        return cplx(std::norm(up) + std::norm(dn));
                    });
                worst = std::max(worst, std::sqrt(q.real()));
            }
        }
        out.push_back(detail::residual("ladder", "quadrature residual P=" + std::to_string(P), worst, 1e-8,
                                       P * (top + 1)));

        const auto L = ladder_matrices(flux, top + 1);
        const int N = P * (top + 2);
        const Eigen::MatrixXd pm = L.Zp * L.Zm;
        double diag = 0.0;
        for (int r = 0; r < N; ++r) {
            for (int c = 0; c < N; ++c) {
                const double expect = r == c ? 2.0 * flux.B * (r / P) : 0.0;
                diag = std::max(diag, std::abs(pm(r, c) - expect));
            }
        }
        const int inner = P * (top + 1);
        const Eigen::MatrixXd id = (L.Zm * L.ZmInv).topLeftCorner(inner, inner);
        const double inv = (id - Eigen::MatrixXd::Identity(inner, inner)).cwiseAbs().maxCoeff();
        out.push_back(detail::residual("ladder", "Zp Zm = diag(2Bm) P=" + std::to_string(P), diag,
                                       1e-12 * 2.0 * flux.B * (top + 1), N * N));
        out.push_back(detail::residual("ladder", "Zm Zm^-1 = I P=" + std::to_string(P), inv, 1e-12, inner * inner));
    }
    return out;
}

/// Unitarity of the rescaled phase matrix for Y in {+-2pi E1s, +-2pi E2s,
/// 2pi(E1s + E2s)} at random k, and |T| = e^{-|Y|^2/(4B)} for P = 1.
inline std::vector<PropertyResult> verify_unitarity(const VerifyOptions& o) {
    std::vector<PropertyResult> out;
    std::mt19937_64 rng(o.seed + 1);
    const std::vector<LatticeIndex> ys{{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}};
    for (int P : {1, 3}) {
        const auto flux = make_flux(o.lattice, P, 1);
        double defect = 0.0;
        double modulus = 0.0;
        int count = 0;
        for (int t = 0; t < o.unitarityPoints; ++t) {
            const auto b = build_lll_basis(flux, detail::random_k(flux, rng), 8);
            for (const auto& idx : ys) {
                const Vec2 Y = o.lattice.wavevector(idx);
                const auto pmx = phase_matrix(b, Y);
                defect = std::max(defect, pmx.unitarityDefect);
                if (P == 1) {
                    const double T = std::abs(quad_inner(b, {0, 0, {}}, {0, 0, Y}, {1e-12, 32, 256}).value);
                    modulus = std::max(modulus, std::abs(T - std::exp(-norm2(Y) / (4.0 * flux.B))));
                }
                ++count;
            }
        }
        out.push_back(detail::residual("lemma2", "unitarity defect P=" + std::to_string(P), defect, 1e-6, count));
        if (P == 1) {
            out.push_back(detail::residual("lemma2", "|T| = exp(-|Y|^2/4B) P=1", modulus, 1e-7, count));
        }
    }
    return out;
}

/// ||(Zp Zm + zeta Zm) Phi|| >= sqrt(B/2) |zeta| ||Phi|| for Phi orthogonal to
/// the lowest level, in coefficient space.
inline std::vector<PropertyResult> verify_coercivity(const VerifyOptions& o) {
    std::vector<PropertyResult> out;
    std::mt19937_64 rng(o.seed + 2);
    std::uniform_real_distribution<double> logMag(-2.0, 2.0);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    std::uniform_int_distribution<int> support(1, o.coercivityM);
    for (int P : {1, 3}) {
        const auto flux = make_flux(o.lattice, P, 1);
        const auto L = ladder_matrices(flux, o.coercivityM);
        const Eigen::MatrixXcd ZpZm = (L.Zp * L.Zm).cast<cplx>();
        const Eigen::MatrixXcd Zm = L.Zm.cast<cplx>();
        const int N = P * (o.coercivityM + 1);
        int bad = 0;
        double worst = 0.0;
        for (int t = 0; t < o.coercivitySamples; ++t) {
            const cplx zeta = std::polar(std::pow(10.0, logMag(rng)), angle(rng));
            const int hi = support(rng);
            Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(N);
            for (int i = P; i < P * (hi + 1); ++i) {
                phi(i) = detail::random_normal(rng);
            }
            const double lhs = (ZpZm * phi + zeta * (Zm * phi)).norm();
            const double rhs = std::sqrt(flux.B / 2.0) * std::abs(zeta) * phi.norm();
            worst = std::max(worst, rhs / lhs);
            if (lhs < rhs * (1.0 - 1e-14)) {
                ++bad;
            }
        }
        out.push_back(detail::violations("lemma3", "lower bound B=" + std::to_string(flux.B), worst, o.coercivitySamples, bad));
    }
    return out;
}

/// Z_+Z_- + zeta Z_- + B + V equals the quadrature matrix of the fiber at
/// k + (zeta/2)(e1 + i e2) on interior blocks.
inline std::vector<PropertyResult> verify_complex_shift(const VerifyOptions& o) {
    std::vector<PropertyResult> out;
    std::mt19937_64 rng(o.seed + 3);
    std::uniform_real_distribution<double> mag(0.0, o.shiftMaxZeta);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    const auto flux = make_flux(o.lattice, 1, 1);
    FourierPotential V(o.lattice);
    V.set({1, 0}, 1.0);
    V.set({-1, 0}, 1.0);
    const int M = o.shiftM;
    double worst = 0.0;
    for (int t = 0; t < o.shiftSamples; ++t) {
        const cplx zeta = std::polar(mag(rng), angle(rng));
        const Vec2 k = detail::random_k(flux, rng);
        const auto b = build_lll_basis(flux, k, required_half_width(M));
        const auto H = complex_fiber(flux, V, k, zeta, M, b);
        const cplx kappa1 = k.x + zeta / 2.0;
        const cplx kappa2 = k.y + cplx(0.0, 1.0) * zeta / 2.0;
        const auto oracle = converge_matrix(
            b, M,
            [&](const SampledBasis& s) {
                return Eigen::MatrixXcd(s.kinetic_matrix(kappa1, kappa2) +
                                        s.multiplier_matrix([&](const Vec2& x) { return evaluate_complex(V, x); }));
            },
            {1e-9, 32, 256});
        const int inner = flux.P * (M - 1);
        worst = std::max(worst, (oracle.value - H).topLeftCorner(inner, inner).cwiseAbs().maxCoeff());
    }
    out.push_back(detail::residual("eq5", "complex quasimomentum identity", worst, 1e-6, o.shiftSamples));
    return out;
}

/// ||Z_- Phi||_{n-1} <= ||Z_+ Phi||_{n-1} = ||Phi||_n and
/// ||Z_-^{-1} Phi||_{n+1} <= sqrt((n+1)(n+2)) ||Phi||_n.
inline std::vector<PropertyResult> verify_graded(const VerifyOptions& o) {
    std::vector<PropertyResult> out;
    std::mt19937_64 rng(o.seed + 4);
    const auto flux = make_flux(o.lattice, 3, 1);
    const int M = o.gradedM;
    const int P = flux.P;
    const auto L = ladder_matrices(flux, M);
    const Eigen::MatrixXcd Zp = L.Zp.cast<cplx>();
    const Eigen::MatrixXcd Zm = L.Zm.cast<cplx>();
    const Eigen::MatrixXcd Zinv = L.ZmInv.cast<cplx>();
    int bad7 = 0;
    int bad8 = 0;
    double identity = 0.0;
    double worst7 = 0.0;
    double worst8 = 0.0;
    for (int t = 0; t < o.gradedSamples; ++t) {
        const int n = 1 + t % 4;
        Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(P * (M + 1));
        for (int i = 0; i < P * (M - n - 1); ++i) {
            phi(i) = detail::random_normal(rng);
        }
        const double normN = graded_norm(phi, n, flux);
        const double down = graded_norm(Zm * phi, n - 1, flux);
        const double up = graded_norm(Zp * phi, n - 1, flux);
        identity = std::max(identity, std::abs(up - normN) / normN);
        worst7 = std::max(worst7, down / up);
        if (down > up * (1.0 + 1e-14)) {
            ++bad7;
        }
        const double lhs8 = graded_norm(Zinv * phi, n + 1, flux);
        const double rhs8 = std::sqrt((n + 1.0) * (n + 2.0)) * normN;
        worst8 = std::max(worst8, lhs8 / rhs8);
        if (lhs8 > rhs8 * (1.0 + 1e-14)) {
            ++bad8;
        }
    }
    out.push_back(detail::residual("graded", "||Zp Phi||_{n-1} = ||Phi||_n", identity, 1e-13, o.gradedSamples));
    out.push_back(detail::violations("graded", "||Zm Phi||_{n-1} <= ||Zp Phi||_{n-1}", worst7, o.gradedSamples, bad7));
    out.push_back(detail::violations("graded", "right inverse bound", worst8, o.gradedSamples, bad8));
    return out;
}

/// |C_{B,W}(Y) - C_{B,W'}(Y)| <= v^{-1/2} (sum_Y' e^{-|Y'|^2/(2B)})^{1/2} ||W - W'||_{L^2}
/// over every scanned Y, for random pairs.
inline std::vector<PropertyResult> verify_continuity(const VerifyOptions& o) {
    std::vector<PropertyResult> out;
    std::mt19937_64 rng(o.seed + 5);
    std::uniform_real_distribution<double> scale(1e-3, 2.0);
    const auto flux = make_flux(o.lattice, 1, 1);
    const double constant =
        std::sqrt(lattice_gaussian_sum(o.lattice, 2.0 * flux.B)) / std::sqrt(o.lattice.cellArea);
    const auto ys = points_in_disk(o.lattice, {0.0, 0.0}, kTwoPi * 5.0);
    int bad = 0;
    double worst = 0.0;
    for (int t = 0; t < o.continuityPairs; ++t) {
        const auto W = detail::random_potential(o.lattice, 3, rng);
        auto Wp = W;
        const double s = scale(rng);
        const auto delta = detail::random_potential(o.lattice, 4, rng);
        for (const auto& [idx, c] : delta.coefficients()) {
            Wp.set(idx, Wp.coefficient(idx) + s * c);
        }
        const double rhs = constant * sobolev_norm(W - Wp, 0.0);
        for (const auto& p : ys) {
            const double lhs = std::abs(c_criterion(W, flux.B, p.index) - c_criterion(Wp, flux.B, p.index));
            worst = std::max(worst, lhs / rhs);
            if (lhs > rhs * (1.0 + 1e-12)) {
                ++bad;
            }
        }
    }
    out.push_back(detail::violations("lemma6", "continuity bound", worst, o.continuityPairs, bad));
    return out;
}

/// Runs one suite by name, or every suite for "all".
inline std::vector<PropertyResult> run_verify(std::string_view suite, const VerifyOptions& o) {
    std::vector<PropertyResult> out;
    const auto append = [&](std::vector<PropertyResult> r) { out.insert(out.end(), r.begin(), r.end()); };
    const bool all = suite == "all";
    if (all || suite == "ladder") append(verify_ladder(o));
    if (all || suite == "lemma2") append(verify_unitarity(o));
    if (all || suite == "lemma3") append(verify_coercivity(o));
    if (all || suite == "eq5") append(verify_complex_shift(o));
    if (all || suite == "graded") append(verify_graded(o));
    if (all || suite == "lemma6") append(verify_continuity(o));
    if (out.empty()) {
        throw ConfigError("unknown verify suite '" + std::string(suite) +
                          "' (expected ladder, lemma2, lemma3, eq5, graded, lemma6 or all)");
    }
    return out;
}

} // namespace landau_bloch
