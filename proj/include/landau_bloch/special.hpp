#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lattice.hpp"

namespace landau_bloch {

/// Normalized Hermite functions phi_0..phi_mMax at u,
/// phi_m(u) = (2^m m! sqrt(pi))^{-1/2} H_m(u) exp(-u^2/2), by the stable
/// three-term recurrence.
inline void hermite_functions(double u, std::span<double> phi) {
    if (phi.empty()) {
        return;
    }
    phi[0] = std::exp(-0.5 * u * u) / std::sqrt(std::sqrt(kPi));
    double prev = 0.0;
    for (std::size_t m = 0; m + 1 < phi.size(); ++m) {
        const double md = static_cast<double>(m);
        const double next = std::sqrt(2.0 / (md + 1.0)) * u * phi[m] - std::sqrt(md / (md + 1.0)) * prev;
        prev = phi[m];
        phi[m + 1] = next;
    }
}

/// Same recurrence carried with its derivative in u (forward-mode
/// differentiation of the recurrence, not the ladder identity).
inline void hermite_functions_with_derivative(double u, std::span<double> phi, std::span<double> dphi) {
    if (phi.empty()) {
        return;
    }
    phi[0] = std::exp(-0.5 * u * u) / std::sqrt(std::sqrt(kPi));
    dphi[0] = -u * phi[0];
    double prev = 0.0;
    double dprev = 0.0;
    for (std::size_t m = 0; m + 1 < phi.size(); ++m) {
        const double md = static_cast<double>(m);
        const double c1 = std::sqrt(2.0 / (md + 1.0));
        const double c2 = std::sqrt(md / (md + 1.0));
        const double next = c1 * u * phi[m] - c2 * prev;
        const double dnext = c1 * (phi[m] + u * dphi[m]) - c2 * dprev;
        prev = phi[m];
        dprev = dphi[m];
        phi[m + 1] = next;
        dphi[m + 1] = dnext;
    }
}

/// Largest |phi_m(u)| over |u| >= cutoff, relative to pi^{-1/4} (the sup of
/// phi_0). Past the turning point sqrt(2m+1) the Hermite function decays
/// monotonically, so the value at max(cutoff, turning point + 1) bounds it.
inline double hermite_tail(int m, double cutoff) {
    const double turning = std::sqrt(2.0 * m + 1.0) + 1.0;
    const double u = std::max(cutoff, turning);
    std::vector<double> phi(static_cast<std::size_t>(m) + 1);
    hermite_functions(u, phi);
    double tail = std::abs(phi[static_cast<std::size_t>(m)]) * std::sqrt(std::sqrt(kPi));
    if (cutoff < turning) {
        tail = std::max(tail, 1.0);  // cutoff inside the oscillatory region
    }
    return tail;
}

/// Smallest integer half-width (in magnetic lengths) whose dropped Hermite
/// tail is below `rel` for every level up to mMax.
inline int required_half_width(int mMax, double rel = 1e-12) {
    for (int L = 1;; ++L) {
        bool ok = true;
        for (int m = 0; m <= mMax && ok; ++m) {
            ok = hermite_tail(m, static_cast<double>(L)) < rel;
        }
        if (ok) {
            return L;
        }
    }
}

/// Displacement parameter alpha = (Y1 + i Y2) / sqrt(2B): with
/// a = Z_-/sqrt(2B), e^{-i(Y,x)} a e^{i(Y,x)} = a + alpha.
inline cplx displacement_alpha(const Vec2& Y, double B) { return cplx(Y.x, Y.y) / std::sqrt(2.0 * B); }

/// Matrix d_{m'm}(Y), m', m = 0..M, of e^{i(Y,x)} between Landau levels, with
/// d_00 = exp(-|Y|^2/(4B)). Filled by the two-term recursion
///   d_{m'0}   = alpha / sqrt(m') d_{m'-1,0}
///   sqrt(m) d_{m'm} = sqrt(m') d_{m'-1,m-1} - conj(alpha) d_{m',m-1}.
inline Eigen::MatrixXcd displacement_matrix(const Vec2& Y, double B, int M) {
    const cplx alpha = displacement_alpha(Y, B);
    const int n = M + 1;
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(n, n);
    d(0, 0) = std::exp(-norm2(Y) / (4.0 * B));
    for (int mp = 1; mp < n; ++mp) {
        d(mp, 0) = alpha / std::sqrt(static_cast<double>(mp)) * d(mp - 1, 0);
    }
    for (int m = 1; m < n; ++m) {
        const double sm = std::sqrt(static_cast<double>(m));
        for (int mp = 0; mp < n; ++mp) {
            cplx v = -std::conj(alpha) * d(mp, m - 1);
            if (mp > 0) {
                v += std::sqrt(static_cast<double>(mp)) * d(mp - 1, m - 1);
            }
            d(mp, m) = v / sm;
        }
    }
    return d;
}

/// Single coefficient d_{mp,m}(Y).
inline cplx displacement_coeff(int mp, int m, const Vec2& Y, double B) {
    if (mp < 0 || m < 0) {
        throw ConfigError("Landau indices must be non-negative");
    }
    return displacement_matrix(Y, B, std::max(mp, m))(mp, m);
}

} // namespace landau_bloch
