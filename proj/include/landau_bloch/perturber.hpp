#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "potential.hpp"

namespace landau_bloch {

/// a = 4 pi (ln 2)^{-3/4} diam K*, R_m = a m (ln m)^{3/4}, r'_m = (a/2)(ln m)^{3/4}, r_m = r'_m / 2.
inline ShellSpec shell_constants(const Lattice2& lat, int m) {
    if (m < 2) {
        throw ConfigError("shell index m must be at least 2");
    }
    const auto radii = [&](int mm) {
        ShellSpec s;
        s.m = mm;
        s.a = 4.0 * kPi * std::pow(std::log(2.0), -0.75) * lat.diamKstar;
        const double l = std::pow(std::log(static_cast<double>(mm)), 0.75);
        s.Rm = s.a * mm * l;
        s.rpm = 0.5 * s.a * l;
        s.rm = 0.5 * s.rpm;
        return s;
    };
    const ShellSpec s = radii(m);
    const ShellSpec next = radii(m + 1);
    if (!(next.Rm - s.Rm > next.rpm + s.rpm)) {
        throw NumericalError("shells " + std::to_string(m) + " and " + std::to_string(m + 1) + " overlap");
    }
    return s;
}

/// Sides of P_m(W) <= delta v(K)^{-1} (m ln m)^{-1} ||W||^2_{H^n}.
struct Inequality {
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
};

inline Inequality shell_inequality(const FourierPotential& W, int n, double delta, int m,
                                   ShellWeight weight = ShellWeight::SobolevIndex) {
    const auto spec = shell_constants(W.lattice(), m);
    const double hn = sobolev_norm(W, n);
    Inequality q;
    q.lhs = shell_energy(W, spec, n, weight);
    q.rhs = delta / W.lattice().cellArea / (m * std::log(static_cast<double>(m))) * hn * hn;
    q.pass = q.lhs <= q.rhs;
    return q;
}

inline std::vector<int> admissible_m(const FourierPotential& W, int n, double delta, int mLo, int mHi,
                                     ShellWeight weight = ShellWeight::SobolevIndex) {
    if (mLo < 2 || mHi < mLo) {
        throw ConfigError("admissibility range must satisfy 2 <= mLo <= mHi");
    }
    std::vector<int> out;
    for (int m = mLo; m <= mHi; ++m) {
        if (shell_inequality(W, n, delta, m, weight).pass) {
            out.push_back(m);
        }
    }
    return out;
}

/// 2 pi^{-1} arcsin(r'_m / (R_m + r'_m)): the averaged share of P_m(W)
/// captured by the two antipodal disks.
inline double direction_fraction(const ShellSpec& s) { return 2.0 / kPi * std::asin(s.rpm / (s.Rm + s.rpm)); }

struct DirectionChoice {
    Vec2 x;
    int angleIndex = 0;
    int nAngles = 0;
    double value = 0.0;  // P_m(W;x) + P_m(W;-x)
    Inequality bound;
};

namespace detail {

inline DirectionChoice select_on_grid(const FourierPotential& W, const ShellSpec& s, int n, int nAngles,
                                      ShellWeight weight) {
    std::vector<double> f(static_cast<std::size_t>(nAngles));
    for (int i = 0; i < nAngles; ++i) {
        const double phi = kTwoPi * i / nAngles;
        const Vec2 x{s.Rm * std::cos(phi), s.Rm * std::sin(phi)};
        f[static_cast<std::size_t>(i)] =
            directed_shell_energy(W, s, n, x, weight) + directed_shell_energy(W, s, n, -x, weight);
    }
    const double best = *std::min_element(f.begin(), f.end());
    const double slack = 1e-12 * std::max(1.0, *std::max_element(f.begin(), f.end()));
    std::vector<bool> isMin(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        isMin[i] = f[i] <= best + slack;
    }
    int chosen = 0;
    if (!std::all_of(isMin.begin(), isMin.end(), [](bool b) { return b; })) {
        // Middle of the longest circular run of minimizers: the direction
        // farthest (on the grid) from any mass.
        int bestStart = 0;
        int bestLen = 0;
        for (int start = 0; start < nAngles; ++start) {
            const int prev = (start + nAngles - 1) % nAngles;
            if (!isMin[static_cast<std::size_t>(start)] || isMin[static_cast<std::size_t>(prev)]) {
                continue;
            }
            int len = 0;
            while (len < nAngles && isMin[static_cast<std::size_t>((start + len) % nAngles)]) {
                ++len;
            }
            if (len > bestLen) {
                bestLen = len;
                bestStart = start;
            }
        }
        chosen = (bestStart + (bestLen - 1) / 2) % nAngles;
    }
    const double phi = kTwoPi * chosen / nAngles;
    DirectionChoice d;
    d.x = {s.Rm * std::cos(phi), s.Rm * std::sin(phi)};
    if (chosen == 0) {
        d.x = {s.Rm, 0.0};
    }
    d.angleIndex = chosen;
    d.nAngles = nAngles;
    d.value = f[static_cast<std::size_t>(chosen)];
    d.bound.lhs = d.value;
    d.bound.rhs = direction_fraction(s) * shell_energy(W, s, n, weight);
    d.bound.pass = d.bound.lhs <= d.bound.rhs * (1.0 + 1e-12);
    return d;
}

} // namespace detail

/// Direction x, |x| = R_m, minimizing P_m(W;x) + P_m(W;-x) on a uniform
/// angular grid. If the averaged bound fails the grid is refined 4x once.
inline DirectionChoice select_direction(const FourierPotential& W, int n, int m, int nAngles,
                                        ShellWeight weight = ShellWeight::SobolevIndex) {
    if (nAngles < 64) {
        throw ConfigError("direction search needs at least 64 angles");
    }
    const auto s = shell_constants(W.lattice(), m);
    auto d = detail::select_on_grid(W, s, n, nAngles, weight);
    if (!d.bound.pass) {
        d = detail::select_on_grid(W, s, n, 4 * nAngles, weight);
    }
    if (!d.bound.pass) {
        throw NumericalError("no grid direction satisfies the averaged shell bound at m = " + std::to_string(m));
    }
    return d;
}

struct YmChoice {
    LatticePoint Y;
    double distance = 0.0;
    Inequality lower;  // (7/8) a m (ln m)^{3/4} <= |Y|
    Inequality upper;  // |Y| <= (9/8) a m (ln m)^{3/4}
};

inline YmChoice select_Ym(const Lattice2& lat, const Vec2& x, const ShellSpec& s) {
    if (std::abs(norm(x) - s.Rm) >= 1e-9 * std::max(1.0, s.Rm)) {
        throw ConfigError("direction vector must lie on the circle |x| = R_m");
    }
    YmChoice c;
    c.Y = nearest_lattice_point(lat, x);
    c.distance = norm(c.Y.Y - x);
    if (!within_closed(c.distance, s.rm)) {
        throw NumericalError("nearest reciprocal-lattice vector is farther than r_m; lattice geometry is inconsistent");
    }
    const double absY = norm(c.Y.Y);
    c.lower = {0.875 * s.Rm, absY, 0.875 * s.Rm <= absY};
    c.upper = {absY, 1.125 * s.Rm, absY <= 1.125 * s.Rm};
    return c;
}

/// Perturbation amplitude A = m^{-n-(1+theta)/2}.
inline double perturbation_amplitude(int n, double theta, int m) {
    return std::pow(static_cast<double>(m), -n - 0.5 * (1.0 + theta));
}

/// W with both closed disks of radius r around +-Y removed and the pair A e^{+-i(Y,x)} added.
inline FourierPotential perturbed_potential(const FourierPotential& W, const LatticePoint& Y, double r, double A) {
    auto out = strip_disk(strip_disk(W, Y.Y, r).stripped, -Y.Y, r).stripped;
    out.set(Y.index, A);
    out.set(-Y.index, A);
    return out;
}

/// ||W - W^(m)||_{H^{n+theta}} against
/// m^{theta-1} (ln m)^{(1+3theta)/4} ||W||_{H^n} + 2 C' A (1 + (9/8) R_m)^{n+theta}.
inline Inequality distance_bound(const FourierPotential& W, const FourierPotential& Wm, int n, double theta,
                                 const ShellSpec& s) {
    const double m = s.m;
    const double cp = std::sqrt(W.lattice().cellArea);
    Inequality q;
    q.lhs = sobolev_norm(W - Wm, n + theta);
    q.rhs = std::pow(m, theta - 1.0) * std::pow(std::log(m), (1.0 + 3.0 * theta) / 4.0) * sobolev_norm(W, n) +
            2.0 * cp * perturbation_amplitude(n, theta, s.m) * std::pow(1.0 + 1.125 * s.Rm, n + theta);
    q.pass = q.lhs <= q.rhs;
    return q;
}

struct PerturbationRecord {
    int n = 0;
    double theta = 0.0;
    double delta = 1.0;
    int m = 2;
    ShellWeight weight = ShellWeight::SobolevIndex;
    ShellSpec shell;
    DirectionChoice direction;
    YmChoice Ym;
    double amplitude = 0.0;
    FourierPotential output;

    double shellEnergy = 0.0;
    Inequality shellBound;
    Inequality directionBound;
    Inequality bracketLower;     // (7/8) R_m <= |Y|
    Inequality bracketUpper;     // |Y| <= (9/8) R_m
    double distance = 0.0;       // ||W - W^(m)||_{H^{n+theta}}
    Inequality distanceBound;    // reported only
    double criterion = 0.0;      // C_{B,W^(m)}(Y^(m))
    double weightedCriterion = 0.0;
    double exactTail = 0.0;
    Inequality criterionBound;   // C >= A (1 - e^{-|Y|^2/B}) - tail
    double hermitianDefect = 0.0;
    bool real = false;

    bool verified() const {
        return shellBound.pass && directionBound.pass && bracketLower.pass && bracketUpper.pass && criterionBound.pass &&
               real;
    }
};

/// W^(m) = W - W^{(Y,r_m)} - W^{(-Y,r_m)} + A (e^{i(Y,x)} + e^{-i(Y,x)}),
/// A = m^{-n-(1+theta)/2}, with the full verification block.
inline PerturbationRecord perturb(const FourierPotential& W, const FluxSpec& flux, int n, double theta, int m,
                                  int nAngles = 256, double delta = 1.0,
                                  ShellWeight weight = ShellWeight::SobolevIndex) {
    if (n < 0) {
        throw ConfigError("smoothness index n must be non-negative");
    }
    if (!(theta >= 0.0 && theta < 1.0)) {
        throw ConfigError("theta must lie in [0, 1)");
    }
    if (!(delta > 0.0)) {
        throw ConfigError("delta must be positive");
    }
    PerturbationRecord r;
    r.n = n;
    r.theta = theta;
    r.delta = delta;
    r.m = m;
    r.weight = weight;
    r.shell = shell_constants(W.lattice(), m);
    r.shellBound = shell_inequality(W, n, delta, m, weight);
    r.shellEnergy = r.shellBound.lhs;
    if (!r.shellBound.pass) {
        throw NumericalError("m = " + std::to_string(m) + " is not admissible: P_m(W) = " +
                             std::to_string(r.shellBound.lhs) + " exceeds " + std::to_string(r.shellBound.rhs));
    }
    r.amplitude = perturbation_amplitude(n, theta, m);
    if (!(r.amplitude >= 1e-300)) {
        throw NumericalError("perturbation amplitude underflows for m = " + std::to_string(m));
    }
    r.direction = select_direction(W, n, m, nAngles, weight);
    r.directionBound = r.direction.bound;
    r.Ym = select_Ym(W.lattice(), r.direction.x, r.shell);
    r.bracketLower = r.Ym.lower;
    r.bracketUpper = r.Ym.upper;

    const Vec2 Y = r.Ym.Y.Y;
    r.output = perturbed_potential(W, r.Ym.Y, r.shell.rm, r.amplitude);

    double scale = 0.0;
    for (const auto& [idx, c] : r.output.coefficients()) {
        scale = std::max(scale, std::abs(c));
    }
    r.hermitianDefect = r.output.hermitian_defect();
    r.real = r.hermitianDefect <= 1e-15 * std::max(1.0, scale);

    r.distance = sobolev_norm(W - r.output, n + theta);
    r.distanceBound = distance_bound(W, r.output, n, theta, r.shell);

    r.criterion = c_criterion(r.output, flux.B, r.Ym.Y.index);
    const double absY = norm(Y);
    r.weightedCriterion = std::pow(absY, n + 1) * r.criterion;
    for (const auto& [idx, c] : W.coefficients()) {
        const double d = norm(W.wavevector(idx) - Y);
        if (!within_closed(d, r.shell.rm)) {
            r.exactTail += std::abs(c) * std::exp(-d * d / (4.0 * flux.B));
        }
    }
    r.criterionBound.lhs = r.criterion;
    r.criterionBound.rhs = r.amplitude * (1.0 - std::exp(-absY * absY / flux.B)) - r.exactTail;
    r.criterionBound.pass = r.criterionBound.lhs >= r.criterionBound.rhs - 1e-15 * std::max(1.0, r.amplitude);
    return r;
}

struct StrippingReport {
    int m = 2;
    double delta = 1.0;
    double theta = 0.0;
    Inequality strippedNorm;        // H^n norms of the stripped pieces
    Inequality strippedSmoothNorm;  // H^{n+theta} norms of the stripped pieces
    std::vector<Inequality> smoothingChain;   // one per disk (+Y, -Y)
    Inequality distance;
};

/// Evaluates the stripping inequalities and the distance
/// chain for this (m, delta). Pass/fail is for this m only.
inline StrippingReport stripping_diagnostic(const FourierPotential& W, int n, double theta, int m, double delta, int nAngles = 256,
                                        ShellWeight weight = ShellWeight::SobolevIndex) {
    const auto s = shell_constants(W.lattice(), m);
    const auto dir = select_direction(W, n, m, nAngles, weight);
    const auto ym = select_Ym(W.lattice(), dir.x, s);
    const Vec2 Y = ym.Y.Y;
    const auto plus = strip_disk(W, Y, s.rm).removed;
    const auto minus = strip_disk(W, -Y, s.rm).removed;
    const double hn = sobolev_norm(W, n);
    const double lm = std::log(static_cast<double>(m));
    StrippingReport r;
    r.m = m;
    r.delta = delta;
    r.theta = theta;
    r.strippedNorm.lhs = sobolev_norm(plus, n) + sobolev_norm(minus, n);
    r.strippedNorm.rhs = delta / m / std::sqrt(lm) * hn;
    r.strippedNorm.pass = r.strippedNorm.lhs <= r.strippedNorm.rhs;
    r.strippedSmoothNorm.lhs = sobolev_norm(plus, n + theta) + sobolev_norm(minus, n + theta);
    r.strippedSmoothNorm.rhs = delta * std::pow(m, theta - 1.0) * std::pow(lm, (1.0 + 3.0 * theta) / 4.0) * hn;
    r.strippedSmoothNorm.pass = r.strippedSmoothNorm.lhs <= r.strippedSmoothNorm.rhs;
    const double cp = std::sqrt(W.lattice().cellArea);
    for (const auto* piece : {&plus, &minus}) {
        Inequality q;
        q.lhs = sobolev_norm(*piece, n + theta);
        q.rhs = s.a / (4.0 * std::sqrt(kPi)) * std::pow(1.125, theta) * cp * std::pow(1.0 + norm(Y), theta) *
                std::pow(lm, 0.75) * sobolev_norm(*piece, n);
        q.pass = q.lhs <= q.rhs * (1.0 + 1e-12);
        r.smoothingChain.push_back(q);
    }
    r.distance = distance_bound(W, perturbed_potential(W, ym.Y, s.rm, perturbation_amplitude(n, theta, m)), n, theta, s);
    return r;
}

} // namespace landau_bloch
