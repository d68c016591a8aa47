#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>

#include "lattice.hpp"

namespace landau_bloch {

/// Lambda-periodic potential given by finitely many Fourier coefficients
/// W_Y, Y = 2*pi*(n1*E1s + n2*E2s). Complex potentials are allowed (partial
/// sums produced by disk stripping are not real in general); potentials read
/// from files are Hermitian-symmetric.
class FourierPotential {
public:
    using Coefficients = std::map<LatticeIndex, std::complex<double>>;

    FourierPotential() = default;
    explicit FourierPotential(Lattice2 lattice, Coefficients coeffs = {})
        : lattice_(std::move(lattice)), coeffs_(std::move(coeffs)) {}

    const Lattice2& lattice() const { return lattice_; }
    const Coefficients& coefficients() const { return coeffs_; }
    bool empty() const { return coeffs_.empty(); }

    std::complex<double> coefficient(LatticeIndex n) const {
        const auto it = coeffs_.find(n);
        return it == coeffs_.end() ? std::complex<double>{} : it->second;
    }
    Vec2 wavevector(LatticeIndex n) const { return lattice_.wavevector(n); }

    /// Mean value V_0.
    double mean() const { return coefficient({0, 0}).real(); }

    /// max |Y| over the support (0 for the zero potential).
    double support_radius() const {
        double r = 0.0;
        for (const auto& [idx, c] : coeffs_) {
            if (c != std::complex<double>{}) {
                r = std::max(r, norm(wavevector(idx)));
            }
        }
        return r;
    }

    /// max |W_{-Y} - conj(W_Y)|.
    double hermitian_defect() const {
        double worst = 0.0;
        for (const auto& [idx, c] : coeffs_) {
            worst = std::max(worst, std::abs(coefficient(-idx) - std::conj(c)));
        }
        return worst;
    }

    void set(LatticeIndex n, std::complex<double> value) { coeffs_[n] = value; }
    void erase(LatticeIndex n) { coeffs_.erase(n); }

    FourierPotential& operator+=(const FourierPotential& o) {
        for (const auto& [idx, c] : o.coeffs_) {
            coeffs_[idx] += c;
        }
        return *this;
    }
    FourierPotential& operator-=(const FourierPotential& o) {
        for (const auto& [idx, c] : o.coeffs_) {
            coeffs_[idx] -= c;
        }
        return *this;
    }
    friend FourierPotential operator+(FourierPotential a, const FourierPotential& b) { return a += b; }
    friend FourierPotential operator-(FourierPotential a, const FourierPotential& b) { return a -= b; }

private:
    Lattice2 lattice_;
    Coefficients coeffs_;
};

/// Parses "n1 n2 re im" lines ('#' starts a comment). Missing conjugate
/// partners are filled in; inconsistent partners and duplicates are errors.
inline FourierPotential load_potential(std::string_view text, const Lattice2& lattice) {
    FourierPotential::Coefficients raw;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream ls(line);
        std::string probe;
        if (!(ls >> probe)) {
            continue;
        }
        ls.clear();
        ls.str(line);
        long long n1 = 0;
        long long n2 = 0;
        double re = 0.0;
        double im = 0.0;
        if (!(ls >> n1 >> n2 >> re >> im)) {
            throw ParseError("line " + std::to_string(lineNo) + ": expected 'n1 n2 re im'");
        }
        std::string extra;
        if (ls >> extra) {
            throw ParseError("line " + std::to_string(lineNo) + ": trailing token '" + extra + "'");
        }
        if (!std::isfinite(re) || !std::isfinite(im)) {
            throw ParseError("line " + std::to_string(lineNo) + ": non-finite coefficient");
        }
        if (std::abs(n1) > 1'000'000'000LL || std::abs(n2) > 1'000'000'000LL) {
            throw ParseError("line " + std::to_string(lineNo) + ": index out of range");
        }
        const LatticeIndex idx{static_cast<int>(n1), static_cast<int>(n2)};
        if (!raw.emplace(idx, std::complex<double>(re, im)).second) {
            throw ParseError("line " + std::to_string(lineNo) + ": duplicate index (" + std::to_string(n1) + ", " +
                             std::to_string(n2) + ")");
        }
    }
    FourierPotential::Coefficients sym = raw;
    for (const auto& [idx, c] : raw) {
        const auto partner = raw.find(-idx);
        if (partner == raw.end()) {
            sym[-idx] = std::conj(c);
        } else if (std::abs(partner->second - std::conj(c)) > 1e-12) {
            throw ParseError("coefficient at (" + std::to_string(idx.n1) + ", " + std::to_string(idx.n2) +
                             ") is not the conjugate of its partner; the potential must be real");
        }
    }
    return FourierPotential(lattice, std::move(sym));
}

/// Writes coefficients sorted by (n1, n2) with 17 significant digits.
inline std::string write_potential(const FourierPotential& V) {
    std::string out;
    char buf[128];
    for (const auto& [idx, c] : V.coefficients()) {
        std::snprintf(buf, sizeof buf, "%d %d %.17g %.17g\n", idx.n1, idx.n2, c.real(), c.imag());
        out += buf;
    }
    return out;
}

/// ||W||_{H^s} = v(K)^{1/2} (sum (1+|Y|)^{2s} |W_Y|^2)^{1/2}.
inline double sobolev_norm(const FourierPotential& W, double s) {
    if (!(s >= 0.0)) {
        throw ConfigError("Sobolev index must be non-negative");
    }
    double acc = 0.0;
    for (const auto& [idx, c] : W.coefficients()) {
        acc += std::pow(1.0 + norm(W.wavevector(idx)), 2.0 * s) * std::norm(c);
    }
    return std::sqrt(W.lattice().cellArea * acc);
}

/// Fourier synthesis sum_Y W_Y e^{i(Y,x)}; the result must be real.
inline double evaluate(const FourierPotential& V, const Vec2& x) {
    std::complex<double> acc{};
    double scale = 0.0;
    for (const auto& [idx, c] : V.coefficients()) {
        const double phase = dot(V.wavevector(idx), x);
        acc += c * std::complex<double>(std::cos(phase), std::sin(phase));
        scale += std::abs(c);
    }
    if (std::abs(acc.imag()) >= 1e-10 * std::max(1.0, scale)) {
        throw NumericalError("potential evaluates to a non-real value; coefficients are not Hermitian-symmetric");
    }
    return acc.real();
}

/// Complex synthesis, for potentials that need not be real.
inline std::complex<double> evaluate_complex(const FourierPotential& V, const Vec2& x) {
    std::complex<double> acc{};
    for (const auto& [idx, c] : V.coefficients()) {
        const double phase = dot(V.wavevector(idx), x);
        acc += c * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    return acc;
}

/// Index of an on-lattice vector; off-lattice input (distance > 1e-9) is an error.
inline LatticeIndex lattice_index_of(const Lattice2& lat, const Vec2& Y) {
    const Vec2 f = lat.fractional_index(Y);
    const LatticeIndex idx{static_cast<int>(std::lround(f.x)), static_cast<int>(std::lround(f.y))};
    if (norm(lat.wavevector(idx) - Y) > 1e-9) {
        throw ConfigError("vector (" + std::to_string(Y.x) + ", " + std::to_string(Y.y) +
                          ") is not on the reciprocal lattice");
    }
    return idx;
}

/// C_{B,V}(Y) = |V_Y| - sum_{Y' != Y} |V_{Y'}| exp(-|Y' - Y|^2 / (4B)).
inline double c_criterion(const FourierPotential& V, double B, LatticeIndex target) {
    const Vec2 Y = V.wavevector(target);
    double value = 0.0;
    for (const auto& [idx, c] : V.coefficients()) {
        if (idx == target) {
            value += std::abs(c);
        } else {
            value -= std::abs(c) * std::exp(-norm2(V.wavevector(idx) - Y) / (4.0 * B));
        }
    }
    return value;
}

inline double c_criterion(const FourierPotential& V, double B, const Vec2& Y) {
    return c_criterion(V, B, lattice_index_of(V.lattice(), Y));
}

struct StripResult {
    FourierPotential stripped;
    FourierPotential removed;
};

/// Splits V into the coefficients with |Y' - center| <= r (removed) and the rest.
inline StripResult strip_disk(const FourierPotential& V, const Vec2& center, double r) {
    StripResult out{FourierPotential(V.lattice()), FourierPotential(V.lattice())};
    for (const auto& [idx, c] : V.coefficients()) {
        if (within_closed(norm(V.wavevector(idx) - center), r)) {
            out.removed.set(idx, c);
        } else {
            out.stripped.set(idx, c);
        }
    }
    return out;
}

/// Shell radii for index m >= 2: R_m = a m (ln m)^{3/4},
/// r'_m = (a/2)(ln m)^{3/4}, r_m = r'_m / 2, a = 4 pi (ln 2)^{-3/4} diam K*.
struct ShellSpec {
    int m = 2;
    double a = 0.0;
    double Rm = 0.0;
    double rpm = 0.0;
    double rm = 0.0;
};

/// Weight exponent of the shell energies: (1+|Y|)^{2n} (Sobolev index, the
/// default) or (1+|Y|)^{2m} (shell index).
enum class ShellWeight { SobolevIndex, ShellIndex };

inline double shell_weight_exponent(ShellWeight w, int n, int m) {
    return w == ShellWeight::SobolevIndex ? 2.0 * n : 2.0 * m;
}

/// P_m(W): weighted energy in the closed annulus R_m - r'_m <= |Y| <= R_m + r'_m.
inline double shell_energy(const FourierPotential& W, const ShellSpec& spec, int n,
                           ShellWeight weight = ShellWeight::SobolevIndex) {
    const double e = shell_weight_exponent(weight, n, spec.m);
    double acc = 0.0;
    for (const auto& [idx, c] : W.coefficients()) {
        const double r = norm(W.wavevector(idx));
        if (within_closed(spec.Rm - spec.rpm, r) && within_closed(r, spec.Rm + spec.rpm)) {
            acc += std::pow(1.0 + r, e) * std::norm(c);
        }
    }
    return acc;
}

/// P_m(W; x): weighted energy in the closed disk |Y - x| <= r'_m, |x| = R_m.
inline double directed_shell_energy(const FourierPotential& W, const ShellSpec& spec, int n, const Vec2& x,
                                    ShellWeight weight = ShellWeight::SobolevIndex) {
    if (std::abs(norm(x) - spec.Rm) >= 1e-9 * std::max(1.0, spec.Rm)) {
        throw ConfigError("direction vector must lie on the circle |x| = R_m");
    }
    const double e = shell_weight_exponent(weight, n, spec.m);
    double acc = 0.0;
    for (const auto& [idx, c] : W.coefficients()) {
        const Vec2 Y = W.wavevector(idx);
        if (within_closed(norm(Y - x), spec.rpm)) {
            acc += std::pow(1.0 + norm(Y), e) * std::norm(c);
        }
    }
    return acc;
}

} // namespace landau_bloch
