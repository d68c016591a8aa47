#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lattice.hpp"
#include "potential.hpp"
#include "special.hpp"

namespace landau_bloch {

/// Shear of the enlarged lattice, b1 / a = r / s in lowest terms, where
/// Etilde1 = (a, 0) and Etilde2 = (b1, b2).
struct ShearRatio {
    long long r = 0;
    long long s = 1;
};

inline ShearRatio find_shear(double ratio, int maxDenominator = 64) {
    for (long long s = 1; s <= maxDenominator; ++s) {
        const double rr = std::round(ratio * static_cast<double>(s));
        if (std::abs(ratio - rr / static_cast<double>(s)) < 1e-10 * std::max(1.0, std::abs(ratio))) {
            const auto r = static_cast<long long>(rr);
            if (std::gcd(r, s) == 1) {
                return {r, s};
            }
        }
    }
    throw ConfigError("lattice shear E2_1 / (Q E1_1) = " + std::to_string(ratio) +
                      " is not a rational with denominator <= " + std::to_string(maxDenominator));
}

namespace detail {
inline long long floor_div(long long a, long long b) {
    long long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) {
        --q;
    }
    return q;
}
inline long long floor_mod(long long a, long long b) { return a - b * floor_div(a, b); }
inline cplx expi(double phase) { return {std::cos(phase), std::sin(phase)}; }
} // namespace detail

/// Lowest-Landau-level magnetic Bloch basis at quasimomentum k:
///   psi_j(x) = N sum_n c^(j)_n exp(i q_n x2 - i k1 x1 - (B/2)(x1 - c_n)^2),
/// q_n = q0_j + n Delta, c_n = (q_n + k2) / B. Every term is annihilated by
/// Z_-(k); the coefficient recursion encodes the boundary conditions on both
/// enlarged periods. The functions are orthonormal by construction.
struct LLLBasis {
    FluxSpec flux;
    Vec2 k;
    int L = 8;  // evaluation half-width in magnetic lengths
    ShearRatio shear;
    double a = 0.0;   // Etilde1_1
    double b1 = 0.0;  // Etilde2_1
    double b2 = 0.0;  // Etilde2_2
    double delta = 0.0;
    double normalization = 0.0;
    std::vector<double> q0;                 // per j
    std::vector<std::vector<cplx>> base;    // per j, c_0..c_{s-1}

    int P() const { return flux.P; }
    double B() const { return flux.B; }

    double q(int j, long long n) const { return q0[static_cast<std::size_t>(j)] + static_cast<double>(n) * delta; }
    double center(int j, long long n) const { return (q(j, n) + k.y) / flux.B; }
    cplx coefficient(int j, long long n) const {
        const long long s = shear.s;
        const long long u = detail::floor_div(n, s);
        return base[static_cast<std::size_t>(j)][static_cast<std::size_t>(n - u * s)] *
               detail::expi(k.x * a * static_cast<double>(u));
    }
};

inline LLLBasis build_lll_basis(const FluxSpec& flux, const Vec2& k, int L) {
    if (L <= 0) {
        throw ConfigError("Gaussian truncation half-width must be positive");
    }
    if (hermite_tail(0, static_cast<double>(L)) >= 1e-12) {
        throw NumericalError("Gaussian truncation half-width " + std::to_string(L) +
                             " drops more than 1e-12 of the lowest-level mass; use a larger L (at least " +
                             std::to_string(required_half_width(0)) + ")");
    }
    LLLBasis b;
    b.flux = flux;
    b.k = k;
    b.L = L;
    b.a = flux.Etilde1.x;
    b.b1 = flux.Etilde2.x;
    b.b2 = flux.Etilde2.y;
    b.shear = find_shear(b.b1 / b.a);
    const long long r = b.shear.r;
    const long long s = b.shear.s;
    const double sd = static_cast<double>(s);
    const int P = flux.P;
    b.delta = kTwoPi * static_cast<double>(P) / (sd * b.b2);
    b.normalization = std::pow(sd * b.b2, -0.5) * std::pow(flux.B / kPi, 0.25);
    b.q0.resize(static_cast<std::size_t>(P));
    b.base.assign(static_cast<std::size_t>(P), std::vector<cplx>(static_cast<std::size_t>(s)));
    for (int j = 0; j < P; ++j) {
        // Consistency of the two recursions around the loop r*s = s*r fixes q0.
        b.q0[static_cast<std::size_t>(j)] =
            kTwoPi / (sd * b.b2) *
            (static_cast<double>(j) - 0.5 * static_cast<double>(P) * static_cast<double>(r) * (sd + 1.0));
        auto& base = b.base[static_cast<std::size_t>(j)];
        base[0] = 1.0;
        // c_{n+r} = c_n exp(-i q_{n+r} b2 + i k1 b1), c_{n+s} = exp(i k1 a) c_n.
        cplx running = 1.0;
        for (long long t = 1; t < s; ++t) {
            const long long n = t * r;
            running *= detail::expi(-b.q(j, n) * b.b2 + k.x * b.b1);
            const long long u = detail::floor_div(n, s);
            base[static_cast<std::size_t>(n - u * s)] = running * detail::expi(-k.x * b.a * static_cast<double>(u));
        }
    }
    return b;
}

/// Value and gradient of psi^(m)_j at a point.
struct LevelValue {
    cplx value;
    cplx d1;
    cplx d2;
};

/// Evaluates psi^(0..M)_j(x) and gradients into out[0..M], where
/// psi^(m) = (2B)^{-m/2} (m!)^{-1/2} Z_+^m psi. Terms whose centers lie more
/// than L magnetic lengths away are dropped.
inline void evaluate_levels(const LLLBasis& b, int j, const Vec2& x, std::span<LevelValue> out) {
    const int M = static_cast<int>(out.size()) - 1;
    for (auto& v : out) {
        v = {};
    }
    if (M < 0) {
        return;
    }
    const double B = b.flux.B;
    const double sqB = std::sqrt(B);
    const double reach = static_cast<double>(b.L) / sqB;
    const double c0 = b.center(j, 0);
    const double h = b.delta / B;
    const auto nLo = static_cast<long long>(std::ceil((x.x - reach - c0) / h));
    const auto nHi = static_cast<long long>(std::floor((x.x + reach - c0) / h));
    std::vector<double> phi(static_cast<std::size_t>(M) + 1);
    std::vector<double> dphi(static_cast<std::size_t>(M) + 1);
    for (long long n = nLo; n <= nHi; ++n) {
        const double u = sqB * (x.x - b.center(j, n));
        hermite_functions_with_derivative(u, phi, dphi);
        const double qn = b.q(j, n);
        const cplx pref = b.normalization * std::sqrt(std::sqrt(kPi)) * b.coefficient(j, n) *
                          detail::expi(qn * x.y - b.k.x * x.x);
        cplx im = 1.0;  // i^m
        for (int m = 0; m <= M; ++m) {
            const auto mi = static_cast<std::size_t>(m);
            const cplx t = pref * im;
            out[mi].value += t * phi[mi];
            out[mi].d1 += t * (cplx(0.0, -b.k.x) * phi[mi] + sqB * dphi[mi]);
            out[mi].d2 += cplx(0.0, qn) * t * phi[mi];
            im *= cplx(0.0, 1.0);
        }
    }
}

inline LevelValue evaluate_level(const LLLBasis& b, int m, int j, const Vec2& x) {
    std::vector<LevelValue> out(static_cast<std::size_t>(m) + 1);
    evaluate_levels(b, j, x, out);
    return out.back();
}

/// The level-m functions psi^(m)_j, j = 0..P-1, obtained by raising the basis.
struct LandauLevel {
    LLLBasis basis;
    int m = 0;
    LevelValue operator()(int j, const Vec2& x) const { return evaluate_level(basis, m, j, x); }
};

inline LandauLevel raise(const LLLBasis& basis, int m) {
    if (m < 0) {
        throw ConfigError("Landau level index must be non-negative");
    }
    return {basis, m};
}

/// Z_-(k) f = (k1 - i d1) f + i (k2 - i d2 - B x1) f, and Z_+(k) likewise with -i.
inline cplx apply_Zminus(const LevelValue& f, const Vec2& k, double B, const Vec2& x) {
    const cplx i(0.0, 1.0);
    return k.x * f.value - i * f.d1 + i * (k.y * f.value - i * f.d2 - B * x.x * f.value);
}
inline cplx apply_Zplus(const LevelValue& f, const Vec2& k, double B, const Vec2& x) {
    const cplx i(0.0, 1.0);
    return k.x * f.value - i * f.d1 - i * (k.y * f.value - i * f.d2 - B * x.x * f.value);
}

// ---------------------------------------------------------------------------
// Quadrature over the enlarged cell

struct QuadOptions {
    double tol = 1e-10;
    int n0 = 32;
    int nMax = 256;
};

struct QuadResult {
    cplx value;
    double estimate = 0.0;
    int resolution = 0;
};

/// Trapezoid rule on x = xi1 Etilde1 + xi2 Etilde2, xi in [0,1)^2, with n
/// points per direction. Exact for periodic trigonometric polynomials.
template <class F>
cplx trapezoid_cell(const FluxSpec& flux, int n, F&& integrand) {
    cplx acc{};
    const double h = 1.0 / static_cast<double>(n);
    for (int i1 = 0; i1 < n; ++i1) {
        for (int i2 = 0; i2 < n; ++i2) {
            const double xi1 = h * static_cast<double>(i1);
            const double xi2 = h * static_cast<double>(i2);
            acc += integrand(xi1 * flux.Etilde1 + xi2 * flux.Etilde2);
        }
    }
    return acc * (flux.enlarged_cell_area() * h * h);
}

/// Doubles the resolution until successive estimates agree to tol.
template <class F>
QuadResult integrate_cell(const FluxSpec& flux, F&& integrand, const QuadOptions& opt = {}) {
    cplx prev = trapezoid_cell(flux, opt.n0, integrand);
    double est = 0.0;
    for (int n = 2 * opt.n0; n <= opt.nMax; n *= 2) {
        const cplx cur = trapezoid_cell(flux, n, integrand);
        est = std::abs(cur - prev);
        if (est <= opt.tol) {
            return {cur, est, n};
        }
        prev = cur;
    }
    throw QuadratureError("cell quadrature did not converge: estimate " + std::to_string(est) + " > tol " +
                              std::to_string(opt.tol),
                          est);
}

/// A basis function psi^(m)_j, optionally multiplied by exp(i(Y,x)).
struct Ket {
    int m = 0;
    int j = 0;
    Vec2 Y{};
};

/// <f, g> over the enlarged cell.
inline QuadResult quad_inner(const LLLBasis& b, const Ket& f, const Ket& g, const QuadOptions& opt = {}) {
    const int M = std::max(f.m, g.m);
    if (hermite_tail(M, static_cast<double>(b.L)) >= 1e-12) {
        throw NumericalError("half-width L = " + std::to_string(b.L) + " too small for level " + std::to_string(M) +
                             "; need L >= " + std::to_string(required_half_width(M)));
    }
    return integrate_cell(
        b.flux,
        [&](const Vec2& x) {
            const cplx fv = evaluate_level(b, f.m, f.j, x).value * detail::expi(dot(f.Y, x));
            const cplx gv = evaluate_level(b, g.m, g.j, x).value * detail::expi(dot(g.Y, x));
            return std::conj(fv) * gv;
        },
        opt);
}

/// All levels 0..M of all P functions sampled on an n x n cell grid, for
/// bulk quadrature of many matrix elements at once.
class SampledBasis {
public:
    SampledBasis(const LLLBasis& b, int M, int n) : flux_(b.flux), k_(b.k), M_(M), P_(b.flux.P), n_(n) {
        if (hermite_tail(M, static_cast<double>(b.L)) >= 1e-12) {
            throw NumericalError("half-width L = " + std::to_string(b.L) + " too small for level " +
                                 std::to_string(M) + "; need L >= " + std::to_string(required_half_width(M)));
        }
        const std::size_t pts = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
        values_.assign(static_cast<std::size_t>((M + 1) * P_), std::vector<LevelValue>(pts));
        points_.resize(pts);
        const double h = 1.0 / static_cast<double>(n);
        std::vector<LevelValue> tmp(static_cast<std::size_t>(M) + 1);
        for (int i1 = 0; i1 < n; ++i1) {
            for (int i2 = 0; i2 < n; ++i2) {
                const std::size_t p = static_cast<std::size_t>(i1) * static_cast<std::size_t>(n) +
                                      static_cast<std::size_t>(i2);
                points_[p] = (h * i1) * flux_.Etilde1 + (h * i2) * flux_.Etilde2;
                for (int j = 0; j < P_; ++j) {
                    evaluate_levels(b, j, points_[p], tmp);
                    for (int m = 0; m <= M; ++m) {
                        values_[static_cast<std::size_t>(m * P_ + j)][p] = tmp[static_cast<std::size_t>(m)];
                    }
                }
            }
        }
        weight_ = flux_.enlarged_cell_area() * h * h;
    }

    int M() const { return M_; }
    int P() const { return P_; }
    int size() const { return P_ * (M_ + 1); }
    double weight() const { return weight_; }
    const std::vector<Vec2>& points() const { return points_; }
    /// Samples of the basis function with flattened index m*P + j.
    const std::vector<LevelValue>& samples(int idx) const { return values_[static_cast<std::size_t>(idx)]; }

    /// Matrix of <psi_a, w(x) psi_b> for a multiplier w.
    template <class W>
    Eigen::MatrixXcd multiplier_matrix(W&& w) const {
        const int N = size();
        std::vector<cplx> wv(points_.size());
        for (std::size_t p = 0; p < points_.size(); ++p) {
            wv[p] = w(points_[p]);
        }
        Eigen::MatrixXcd out(N, N);
        for (int r = 0; r < N; ++r) {
            for (int c = 0; c < N; ++c) {
                cplx acc{};
                const auto& fr = samples(r);
                const auto& fc = samples(c);
                for (std::size_t p = 0; p < points_.size(); ++p) {
                    acc += std::conj(fr[p].value) * wv[p] * fc[p].value;
                }
                out(r, c) = acc * weight_;
            }
        }
        return out;
    }

    /// sum_mu <Pi_mu(conj kappa) psi_a, Pi_mu(kappa) psi_b> with
    /// Pi_1 = kappa1 - i d1, Pi_2 = kappa2 - i d2 - B x1: the form of H_B(kappa).
    Eigen::MatrixXcd kinetic_matrix(cplx kappa1, cplx kappa2) const {
        const int N = size();
        const cplx i(0.0, 1.0);
        const double B = flux_.B;
        std::vector<std::vector<cplx>> p1(static_cast<std::size_t>(N));
        std::vector<std::vector<cplx>> p2(static_cast<std::size_t>(N));
        std::vector<std::vector<cplx>> p1c(static_cast<std::size_t>(N));
        std::vector<std::vector<cplx>> p2c(static_cast<std::size_t>(N));
        for (int a = 0; a < N; ++a) {
            const auto& f = samples(a);
            auto& A1 = p1[static_cast<std::size_t>(a)];
            auto& A2 = p2[static_cast<std::size_t>(a)];
            auto& C1 = p1c[static_cast<std::size_t>(a)];
            auto& C2 = p2c[static_cast<std::size_t>(a)];
            A1.resize(points_.size());
            A2.resize(points_.size());
            C1.resize(points_.size());
            C2.resize(points_.size());
            for (std::size_t p = 0; p < points_.size(); ++p) {
                const cplx mom1 = -i * f[p].d1;
                const cplx mom2 = -i * f[p].d2 - B * points_[p].x * f[p].value;
                A1[p] = kappa1 * f[p].value + mom1;
                A2[p] = kappa2 * f[p].value + mom2;
                C1[p] = std::conj(kappa1) * f[p].value + mom1;
                C2[p] = std::conj(kappa2) * f[p].value + mom2;
            }
        }
        Eigen::MatrixXcd out(N, N);
        for (int r = 0; r < N; ++r) {
            for (int c = 0; c < N; ++c) {
                cplx acc{};
                for (std::size_t p = 0; p < points_.size(); ++p) {
                    acc += std::conj(p1c[static_cast<std::size_t>(r)][p]) * p1[static_cast<std::size_t>(c)][p] +
                           std::conj(p2c[static_cast<std::size_t>(r)][p]) * p2[static_cast<std::size_t>(c)][p];
                }
                out(r, c) = acc * weight_;
            }
        }
        return out;
    }

private:
    FluxSpec flux_;
    Vec2 k_;
    int M_;
    int P_;
    int n_;
    double weight_ = 0.0;
    std::vector<Vec2> points_;
    std::vector<std::vector<LevelValue>> values_;
};

struct MatrixQuadResult {
    Eigen::MatrixXcd value;
    double estimate = 0.0;
    int resolution = 0;
};

/// Doubles the sampling grid until a matrix-valued quadrature stabilizes.
template <class F>
MatrixQuadResult converge_matrix(const LLLBasis& b, int M, F&& compute, const QuadOptions& opt = {}) {
    Eigen::MatrixXcd prev = compute(SampledBasis(b, M, opt.n0));
    double est = 0.0;
    for (int n = 2 * opt.n0; n <= opt.nMax; n *= 2) {
        Eigen::MatrixXcd cur = compute(SampledBasis(b, M, n));
        est = (cur - prev).cwiseAbs().maxCoeff();
        if (est <= opt.tol) {
            return {std::move(cur), est, n};
        }
        prev = std::move(cur);
    }
    throw QuadratureError("matrix quadrature did not converge: estimate " + std::to_string(est), est);
}

/// Quadrature oracle for <psi^(m')_{j'}, e^{i(Y,x)} psi^(m)_j>, all levels 0..M.
inline MatrixQuadResult oracle_multiplication_matrix(const LLLBasis& b, const Vec2& Y, int M,
                                                     const QuadOptions& opt = {}) {
    return converge_matrix(
        b, M, [&](const SampledBasis& s) { return s.multiplier_matrix([&](const Vec2& x) { return detail::expi(dot(Y, x)); }); },
        opt);
}

// ---------------------------------------------------------------------------
// Phase matrices

/// Exact U^(Y)(k): <psi_{j'}, e^{i(Y,x)} psi_j> = e^{-|Y|^2/(4B)} U_{j'j}.
/// The x2 integral is a Kronecker delta between shifted momentum lattices, so
/// U is a clock-and-shift matrix with entries given by finite phase sums.
inline Eigen::MatrixXcd phase_matrix_exact(const LLLBasis& b, const Vec2& Y) {
    const LatticeIndex idx = lattice_index_of(b.flux.lattice, Y);
    const int P = b.flux.P;
    const long long s = b.shear.s;
    const long long nu =
        s * static_cast<long long>(idx.n2) - static_cast<long long>(idx.n1) * b.flux.Q * b.shear.r;
    const double shift = Y.y / b.flux.B;
    Eigen::MatrixXcd U = Eigen::MatrixXcd::Zero(P, P);
    for (int j = 0; j < P; ++j) {
        const int jp = static_cast<int>(detail::floor_mod(j + nu, P));
        const long long offset = detail::floor_div(j + nu - jp, P);
        cplx acc{};
        for (long long n = 0; n < s; ++n) {
            const long long np = n + offset;
            const double mid = b.center(j, n) + 0.5 * shift;
            acc += b.coefficient(j, n) * std::conj(b.coefficient(jp, np)) * detail::expi(Y.x * mid);
        }
        U(jp, j) = acc / static_cast<double>(s);
    }
    return U;
}

struct PhaseMatrix {
    Eigen::MatrixXcd U;
    double unitarityDefect = 0.0;
};

inline double unitarity_defect(const Eigen::MatrixXcd& U) {
    return (U.adjoint() * U - Eigen::MatrixXcd::Identity(U.rows(), U.cols())).cwiseAbs().maxCoeff();
}

/// U^(Y)(k) from quadrature of the lowest-level matrix elements.
inline PhaseMatrix phase_matrix(const LLLBasis& b, const Vec2& Y, const QuadOptions& opt = {}) {
    lattice_index_of(b.flux.lattice, Y);
    // U is T rescaled by e^{|Y|^2/(4B)}, so T must be resolved relative to that factor.
    QuadOptions scaled = opt;
    scaled.tol = std::min(opt.tol, 1e-9 * std::exp(-norm2(Y) / (4.0 * b.flux.B)));
    const auto T = converge_matrix(
        b, 0, [&](const SampledBasis& s) { return s.multiplier_matrix([&](const Vec2& x) { return detail::expi(dot(Y, x)); }); },
        scaled);
    PhaseMatrix out;
    out.U = std::exp(norm2(Y) / (4.0 * b.flux.B)) * T.value;
    out.unitarityDefect = unitarity_defect(out.U);
    if (out.unitarityDefect > 1e-6) {
        throw NumericalError("phase matrix unitarity defect " + std::to_string(out.unitarityDefect) +
                             " exceeds 1e-6; refine quadrature or enlarge L");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Fiber matrices

/// Truncated fiber Hamiltonian on levels 0..M, index m*P + j.
struct FiberMatrix {
    FluxSpec flux;
    Vec2 k;
    int M = 0;
    Eigen::MatrixXcd H;
};

inline int block_index(int m, int j, int P) { return m * P + j; }

/// Adds coeff * (d kron U) into H.
inline void add_coupling(Eigen::MatrixXcd& H, cplx coeff, const Eigen::MatrixXcd& d, const Eigen::MatrixXcd& U) {
    const auto P = U.rows();
    const auto levels = d.rows();
    for (Eigen::Index mp = 0; mp < levels; ++mp) {
        for (Eigen::Index m = 0; m < levels; ++m) {
            const cplx f = coeff * d(mp, m);
            if (f == cplx{}) {
                continue;
            }
            H.block(mp * P, m * P, P, P) += f * U;
        }
    }
}

/// Assembles fibers of H_B + V at many k for fixed (flux, V, M). The
/// displacement matrices depend only on Y and are computed once.
class FiberAssembler {
public:
    FiberAssembler(FluxSpec flux, const FourierPotential& V, int M) : flux_(std::move(flux)), M_(M) {
        if (M < 0) {
            throw ConfigError("Landau cutoff M must be non-negative");
        }
        for (const auto& [idx, c] : V.coefficients()) {
            if (c == cplx{}) {
                continue;
            }
            const Vec2 Y = V.wavevector(idx);
            terms_.push_back({Y, c, displacement_matrix(Y, flux_.B, M)});
        }
    }

    const FluxSpec& flux() const { return flux_; }
    int M() const { return M_; }
    int dimension() const { return flux_.P * (M_ + 1); }

    /// V-coupling sum_Y V_Y d(Y) kron U^(Y)(k).
    Eigen::MatrixXcd coupling(const LLLBasis& b) const {
        Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(dimension(), dimension());
        for (const auto& t : terms_) {
            add_coupling(H, t.coeff, t.d, phase_matrix_exact(b, t.Y));
        }
        return H;
    }

    FiberMatrix assemble(const LLLBasis& b) const {
        FiberMatrix f{flux_, b.k, M_, coupling(b)};
        for (int m = 0; m <= M_; ++m) {
            for (int j = 0; j < flux_.P; ++j) {
                const int i = block_index(m, j, flux_.P);
                f.H(i, i) += (2.0 * m + 1.0) * flux_.B;
            }
        }
        const double scale = std::max(1.0, f.H.cwiseAbs().maxCoeff());
        const double defect = (f.H - f.H.adjoint()).cwiseAbs().maxCoeff();
        if (defect > 1e-9 * scale) {
            throw NumericalError("fiber matrix Hermiticity defect " + std::to_string(defect) +
                                 " exceeds 1e-9 relative; the potential or phase matrices are inconsistent");
        }
        f.H = 0.5 * (f.H + f.H.adjoint()).eval();
        return f;
    }

    FiberMatrix assemble(const Vec2& k, int L = 8) const { return assemble(build_lll_basis(flux_, k, L)); }

private:
    struct Term {
        Vec2 Y;
        cplx coeff;
        Eigen::MatrixXcd d;
    };
    FluxSpec flux_;
    int M_;
    std::vector<Term> terms_;
};

inline FiberMatrix assemble_fiber(const FluxSpec& flux, const FourierPotential& V, const Vec2& k, int M,
                                  const LLLBasis& basis) {
    if (std::abs(basis.flux.B - flux.B) > 0.0 || basis.flux.P != flux.P || norm(basis.k - k) > 0.0) {
        throw ConfigError("LLL basis was built for a different flux or quasimomentum");
    }
    return FiberAssembler(flux, V, M).assemble(basis);
}

/// Quadrature oracle of the full fiber matrix: kinetic form plus <psi, V psi>.
inline MatrixQuadResult oracle_fiber(const LLLBasis& b, const FourierPotential& V, int M, const QuadOptions& opt = {}) {
    return converge_matrix(
        b, M,
        [&](const SampledBasis& s) {
            Eigen::MatrixXcd H = s.kinetic_matrix(b.k.x, b.k.y);
            if (!V.empty()) {
                H += s.multiplier_matrix([&](const Vec2& x) { return evaluate_complex(V, x); });
            }
            return H;
        },
        opt);
}

// ---------------------------------------------------------------------------
// Ladder algebra in coefficient space

struct LadderMatrices {
    Eigen::MatrixXd Zp;
    Eigen::MatrixXd Zm;
    Eigen::MatrixXd ZmInv;
};

/// Z_+ : block m -> m+1 with sqrt(2B(m+1)); Z_- : m -> m-1 with sqrt(2Bm);
/// right inverse of Z_- : m -> m+1 with (2B(m+1))^{-1/2}. Images beyond
/// level M are dropped.
inline LadderMatrices ladder_matrices(const FluxSpec& flux, int M) {
    if (M < 1) {
        throw ConfigError("ladder matrices need M >= 1");
    }
    const int P = flux.P;
    const int N = P * (M + 1);
    LadderMatrices L{Eigen::MatrixXd::Zero(N, N), Eigen::MatrixXd::Zero(N, N), Eigen::MatrixXd::Zero(N, N)};
    for (int m = 0; m <= M; ++m) {
        for (int j = 0; j < P; ++j) {
            if (m < M) {
                const double up = std::sqrt(2.0 * flux.B * (m + 1));
                L.Zp(block_index(m + 1, j, P), block_index(m, j, P)) = up;
                L.ZmInv(block_index(m + 1, j, P), block_index(m, j, P)) = 1.0 / up;
            }
            if (m > 0) {
                L.Zm(block_index(m - 1, j, P), block_index(m, j, P)) = std::sqrt(2.0 * flux.B * m);
            }
        }
    }
    return L;
}

/// Z_+ Z_- + zeta Z_- + B + V-coupling: the fiber at the complex quasimomentum
/// k + (zeta/2)(e1 + i e2).
inline Eigen::MatrixXcd complex_fiber(const FluxSpec& flux, const FourierPotential& V, const Vec2& k, cplx zeta,
                                      int M, const LLLBasis& basis) {
    if (norm(basis.k - k) > 0.0) {
        throw ConfigError("LLL basis was built for a different quasimomentum");
    }
    const auto L = ladder_matrices(flux, std::max(M, 1));
    const int N = flux.P * (M + 1);
    Eigen::MatrixXcd H = (L.Zp * L.Zm).topLeftCorner(N, N).cast<cplx>();
    H += zeta * L.Zm.topLeftCorner(N, N).cast<cplx>();
    H += flux.B * Eigen::MatrixXcd::Identity(N, N);
    H += FiberAssembler(flux, V, M).coupling(basis);
    return H;
}

/// ||Phi||_{k,H^n} = ||Z_+^n Phi||, requiring Phi to vanish on blocks > M - n.
inline double graded_norm(const Eigen::VectorXcd& phi, int n, const FluxSpec& flux) {
    if (n < 0) {
        throw ConfigError("graded norm index must be non-negative");
    }
    const int P = flux.P;
    if (phi.size() % P != 0) {
        throw ConfigError("coefficient vector length is not a multiple of P");
    }
    const int M = static_cast<int>(phi.size() / P) - 1;
    for (Eigen::Index i = static_cast<Eigen::Index>(P) * std::max(0, M - n + 1); i < phi.size(); ++i) {
        if (phi(i) != cplx{}) {
            throw NumericalError("graded norm of order " + std::to_string(n) +
                                 " needs a vector supported on levels <= " + std::to_string(M - n));
        }
    }
    if (n == 0) {
        return phi.norm();
    }
    const auto L = ladder_matrices(flux, std::max(M, 1));
    Eigen::VectorXcd v = phi;
    for (int t = 0; t < n; ++t) {
        v = L.Zp.cast<cplx>() * v;
    }
    return v.norm();
}

// ---------------------------------------------------------------------------
// Diagnostics

/// sup |psi| / ||psi|| over the cell for psi_0 of the basis, sampled at n x n.
inline double sup_ratio(const LLLBasis& b, int n = 64) {
    const SampledBasis s(b, 0, n);
    double sup = 0.0;
    double mass = 0.0;
    for (const auto& v : s.samples(0)) {
        sup = std::max(sup, std::abs(v.value));
        mass += std::norm(v.value);
    }
    return sup / std::sqrt(mass * s.weight());
}

} // namespace landau_bloch
