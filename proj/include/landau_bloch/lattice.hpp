#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <complex>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"

namespace landau_bloch {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
    friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
    friend constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
    friend constexpr Vec2 operator*(double s, const Vec2& a) { return {s * a.x, s * a.y}; }
    friend constexpr Vec2 operator*(const Vec2& a, double s) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

inline constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
inline constexpr double norm2(const Vec2& a) { return dot(a, a); }

/// Closed-ball membership with a relative slack of a few ulps, so that points
/// constructed to lie exactly on the boundary are counted as inside.
inline bool within_closed(double distance, double radius) {
    return distance <= radius + 1e-12 * std::max(1.0, radius);
}

/// Integer coordinates (n1, n2) of a reciprocal-lattice vector
/// Y = 2*pi*(n1*E1s + n2*E2s). Ordered lexicographically.
struct LatticeIndex {
    int n1 = 0;
    int n2 = 0;

    friend constexpr auto operator<=>(const LatticeIndex&, const LatticeIndex&) = default;
    friend constexpr LatticeIndex operator-(const LatticeIndex& a) { return {-a.n1, -a.n2}; }
    friend constexpr LatticeIndex operator+(const LatticeIndex& a, const LatticeIndex& b) {
        return {a.n1 + b.n1, a.n2 + b.n2};
    }
};

/// Period lattice in canonical orientation (E1 along +x1, E2 in the upper
/// half-plane) together with its reciprocal basis.
struct Lattice2 {
    Vec2 E1;
    Vec2 E2;
    Vec2 E1s;  // (E^mu, E^nu_*) = delta_{mu nu}
    Vec2 E2s;
    double cellArea = 0.0;
    double reciprocalCellArea = 0.0;
    double diamKstar = 0.0;  // longest diagonal of the cell spanned by E1s, E2s

    /// Y = 2*pi*(n1*E1s + n2*E2s).
    Vec2 wavevector(LatticeIndex n) const {
        return kTwoPi * (static_cast<double>(n.n1) * E1s + static_cast<double>(n.n2) * E2s);
    }

    /// Real (generally non-integer) coordinates of an arbitrary vector in the
    /// basis 2*pi*E1s, 2*pi*E2s.
    Vec2 fractional_index(const Vec2& Y) const { return {dot(Y, E1) / kTwoPi, dot(Y, E2) / kTwoPi}; }
};

/// Builds the canonical lattice. The input basis is rotated (and reflected if
/// its orientation is negative) so that E1 = (|E1|, 0) and E2_2 > 0.
inline Lattice2 build_lattice(const Vec2& e1, const Vec2& e2) {
    const double det = cross(e1, e2);
    if (!std::isfinite(det) || std::abs(det) < 1e-12) {
        throw GeometryError("degenerate lattice basis: |det(E1,E2)| = " + std::to_string(std::abs(det)));
    }
    const double len1 = norm(e1);
    Lattice2 lat;
    lat.E1 = {len1, 0.0};
    lat.E2 = {dot(e1, e2) / len1, std::abs(det) / len1};
    const double a = lat.E1.x;
    const double b1 = lat.E2.x;
    const double b2 = lat.E2.y;
    lat.E1s = {1.0 / a, -b1 / (a * b2)};
    lat.E2s = {0.0, 1.0 / b2};
    lat.cellArea = std::abs(a * b2);
    lat.reciprocalCellArea = 1.0 / lat.cellArea;
    lat.diamKstar = std::max(norm(lat.E1s + lat.E2s), norm(lat.E1s - lat.E2s));
    return lat;
}

/// Rational flux eta = P/Q through the period cell, and the enlarged lattice
/// with basis Q*E1, E2 that carries integer flux P.
struct FluxSpec {
    Lattice2 lattice;
    int P = 1;
    int Q = 1;
    double B = kTwoPi;
    Vec2 Etilde1;
    Vec2 Etilde2;
    Vec2 Etilde1s;
    Vec2 Etilde2s;

    double eta() const { return static_cast<double>(P) / static_cast<double>(Q); }
    double enlarged_cell_area() const { return std::abs(cross(Etilde1, Etilde2)); }
};

inline FluxSpec make_flux(const Lattice2& lattice, int P, int Q) {
    if (P <= 0 || Q <= 0) {
        throw ConfigError("flux numerator and denominator must be positive (got P=" + std::to_string(P) +
                          ", Q=" + std::to_string(Q) + ")");
    }
    if (std::gcd(P, Q) != 1) {
        throw ConfigError("P and Q must be coprime (got P=" + std::to_string(P) + ", Q=" + std::to_string(Q) + ")");
    }
    FluxSpec f;
    f.lattice = lattice;
    f.P = P;
    f.Q = Q;
    f.B = kTwoPi * static_cast<double>(P) / (static_cast<double>(Q) * lattice.cellArea);
    f.Etilde1 = static_cast<double>(Q) * lattice.E1;
    f.Etilde2 = lattice.E2;
    f.Etilde1s = (1.0 / static_cast<double>(Q)) * lattice.E1s;
    f.Etilde2s = lattice.E2s;
    return f;
}

struct LatticePoint {
    LatticeIndex index;
    Vec2 Y;
};

/// All Y in 2*pi*Lambda* with |Y - center| <= radius, ordered by (n1, n2).
inline std::vector<LatticePoint> points_in_disk(const Lattice2& lat, const Vec2& center, double radius) {
    std::vector<LatticePoint> out;
    if (radius < 0.0) {
        return out;
    }
    // Y . E^mu = 2*pi*n_mu and |Y . E^mu - c . E^mu| <= radius * |E^mu|.
    const double r1 = radius * norm(lat.E1) / kTwoPi;
    const double r2 = radius * norm(lat.E2) / kTwoPi;
    const Vec2 c = lat.fractional_index(center);
    const int lo1 = static_cast<int>(std::floor(c.x - r1)) - 1;
    const int hi1 = static_cast<int>(std::ceil(c.x + r1)) + 1;
    const int lo2 = static_cast<int>(std::floor(c.y - r2)) - 1;
    const int hi2 = static_cast<int>(std::ceil(c.y + r2)) + 1;
    for (int n1 = lo1; n1 <= hi1; ++n1) {
        for (int n2 = lo2; n2 <= hi2; ++n2) {
            const LatticeIndex idx{n1, n2};
            const Vec2 Y = lat.wavevector(idx);
            if (within_closed(norm(Y - center), radius)) {
                out.push_back({idx, Y});
            }
        }
    }
    return out;
}

/// Nearest reciprocal-lattice vector; ties resolve to the lexicographically
/// smallest index.
inline LatticePoint nearest_lattice_point(const Lattice2& lat, const Vec2& x) {
    const Vec2 c = lat.fractional_index(x);
    const LatticeIndex guess{static_cast<int>(std::lround(c.x)), static_cast<int>(std::lround(c.y))};
    const double bound = norm(lat.wavevector(guess) - x);
    LatticePoint best{guess, lat.wavevector(guess)};
    double bestDist = bound;
    for (const auto& p : points_in_disk(lat, x, bound)) {
        const double d = norm(p.Y - x);
        if (d < bestDist - 1e-14 * std::max(1.0, bestDist) ||
            (std::abs(d - bestDist) <= 1e-14 * std::max(1.0, bestDist) && p.index < best.index)) {
            best = p;
            bestDist = d;
        }
    }
    return best;
}

/// Sum over Y in 2*pi*Lambda* of exp(-|Y|^2 / width). Radial shells are added
/// until a shell contributes less than 1e-16 of the running total and the
/// Gaussian is well past its bulk.
inline double lattice_gaussian_sum(const Lattice2& lat, double width) {
    const double step = kTwoPi * std::min(norm(lat.E1s), norm(lat.E2s));
    double total = 0.0;
    double inner = -1.0;
    for (int shell = 0;; ++shell) {
        const double outer = step * static_cast<double>(shell);
        double contribution = 0.0;
        for (const auto& p : points_in_disk(lat, {0.0, 0.0}, outer)) {
            const double r = norm(p.Y);
            if (inner < 0.0 || !within_closed(r, inner)) {
                contribution += std::exp(-r * r / width);
            }
        }
        total += contribution;
        if (outer * outer / width > 40.0 && contribution < 1e-16 * total) {
            break;
        }
        inner = outer;
    }
    return total;
}

} // namespace landau_bloch
