#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Eigenvalues>

#include "landau_fiber.hpp"

namespace landau_bloch {

/// Worker count: hardware concurrency, capped by LANDAU_BLOCH_THREADS.
inline unsigned worker_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("LANDAU_BLOCH_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) {
            n = std::min(n, static_cast<unsigned>(cap));
        }
    }
    return n;
}

/// Runs body(i) for i in [0, count) on up to `threads` workers. Results must
/// be written to slot i, so the outcome does not depend on scheduling. The
/// exception of the smallest failing index is rethrown.
template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& body) {
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n);
        for (unsigned t = 0; t < n; ++t) {
            pool.emplace_back(worker);
        }
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

struct KGrid {
    int N1 = 4;
    int N2 = 4;
};

/// k = 2 pi ((i1/N1) Etilde1s + (i2/N2) Etilde2s), row-major in (i1, i2).
inline Vec2 grid_point(const FluxSpec& flux, const KGrid& g, int i1, int i2) {
    return kTwoPi * ((static_cast<double>(i1) / g.N1) * flux.Etilde1s + (static_cast<double>(i2) / g.N2) * flux.Etilde2s);
}

/// Sorted fiber eigenvalues over a uniform grid of the magnetic Brillouin zone.
struct BandSurface {
    FluxSpec flux;
    int M = 0;
    KGrid grid;
    std::vector<Vec2> k;
    std::vector<std::vector<double>> eigenvalues;  // [grid point][band]

    int band_count() const { return flux.P * (M + 1); }
    /// Bands with sorted index below this are interior (levels m <= M - 2).
    int interior_count() const { return flux.P * std::max(0, M - 1); }
};

inline std::vector<double> fiber_eigenvalues(const FiberMatrix& f) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(f.H, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw NumericalError("Hermitian eigensolver failed");
    }
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(ev.begin(), ev.end());
    return ev;
}

inline BandSurface sweep(const FluxSpec& flux, const FourierPotential& V, int M, const KGrid& grid,
                         unsigned threads = worker_count()) {
    if (grid.N1 < 2 || grid.N2 < 2) {
        throw ConfigError("k-grid must be at least 2 x 2");
    }
    const FiberAssembler assembler(flux, V, M);
    BandSurface s{flux, M, grid, {}, {}};
    const std::size_t count = static_cast<std::size_t>(grid.N1) * static_cast<std::size_t>(grid.N2);
    s.k.resize(count);
    s.eigenvalues.resize(count);
    for (int i1 = 0; i1 < grid.N1; ++i1) {
        for (int i2 = 0; i2 < grid.N2; ++i2) {
            s.k[static_cast<std::size_t>(i1 * grid.N2 + i2)] = grid_point(flux, grid, i1, i2);
        }
    }
    const int L = required_half_width(0);
    parallel_for(count, threads, [&](std::size_t i) {
        const Vec2 k = s.k[i];
        try {
            s.eigenvalues[i] = fiber_eigenvalues(assembler.assemble(build_lll_basis(flux, k, L)));
        } catch (const ConfigError& e) {
            throw ConfigError(std::string(e.what()) + " (at k = (" + std::to_string(k.x) + ", " + std::to_string(k.y) + "))");
        } catch (const NumericalError& e) {
            throw NumericalError(std::string(e.what()) + " (at k = (" + std::to_string(k.x) + ", " + std::to_string(k.y) + "))");
        }
    });
    return s;
}

struct BandWidth {
    double min = 0.0;
    double max = 0.0;
    double width = 0.0;
};

inline std::vector<BandWidth> band_widths(const BandSurface& s) {
    std::vector<BandWidth> out(static_cast<std::size_t>(s.band_count()),
                               {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), 0.0});
    for (const auto& row : s.eigenvalues) {
        for (std::size_t b = 0; b < row.size(); ++b) {
            out[b].min = std::min(out[b].min, row[b]);
            out[b].max = std::max(out[b].max, row[b]);
        }
    }
    for (auto& w : out) {
        w.width = w.max - w.min;
    }
    return out;
}

struct FlatBandCandidate {
    double mean = 0.0;
    int band = 0;
    double width = 0.0;
    /// max over k of the distance from mean to the fiber spectrum.
    double levelSetDistance = 0.0;
    bool levelSetConfirmed = false;
    /// Mean lies within 10 tol of a truncation-affected band.
    bool nearTruncation = false;
};

/// Interior bands (levels m <= M - 2) whose width over the grid is at most tol.
inline std::vector<FlatBandCandidate> flat_band_candidates(const BandSurface& s, double tol) {
    if (!(tol > 0.0)) {
        throw ConfigError("flat-band tolerance must be positive");
    }
    const auto widths = band_widths(s);
    const int interior = s.interior_count();
    std::vector<FlatBandCandidate> out;
    for (int b = 0; b < interior; ++b) {
        const auto& w = widths[static_cast<std::size_t>(b)];
        if (!(w.width <= tol)) {
            continue;
        }
        FlatBandCandidate c;
        c.band = b;
        c.width = w.width;
        double sum = 0.0;
        for (const auto& row : s.eigenvalues) {
            sum += row[static_cast<std::size_t>(b)];
        }
        c.mean = sum / static_cast<double>(s.eigenvalues.size());
        for (const auto& row : s.eigenvalues) {
            double nearest = std::numeric_limits<double>::infinity();
            for (double lam : row) {
                nearest = std::min(nearest, std::abs(lam - c.mean));
            }
            c.levelSetDistance = std::max(c.levelSetDistance, nearest);
        }
        c.levelSetConfirmed = c.levelSetDistance <= tol;
        for (const auto& row : s.eigenvalues) {
            for (std::size_t t = static_cast<std::size_t>(interior); t < row.size(); ++t) {
                if (std::abs(row[t] - c.mean) <= 10.0 * tol) {
                    c.nearTruncation = true;
                }
            }
        }
        out.push_back(c);
    }
    return out;
}

struct TruncationCertificate {
    int M = 0;
    int Mref = 0;
    int bandsCompared = 0;
    double maxDeviation = 0.0;
    double threshold = 1e-4;
    bool pass() const { return maxDeviation < threshold; }
};

/// Compares interior bands of a surface against a reference sweep at M + 4.
inline TruncationCertificate truncation_certificate(const BandSurface& s, const BandSurface& ref) {
    if (ref.M < s.M || ref.k.size() != s.k.size()) {
        throw ConfigError("reference sweep must use the same grid and a larger cutoff");
    }
    TruncationCertificate c{s.M, ref.M, s.interior_count(), 0.0, 1e-4};
    for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
        for (int b = 0; b < c.bandsCompared; ++b) {
            c.maxDeviation = std::max(c.maxDeviation, std::abs(s.eigenvalues[i][static_cast<std::size_t>(b)] -
                                                               ref.eigenvalues[i][static_cast<std::size_t>(b)]));
        }
    }
    return c;
}

inline TruncationCertificate truncation_certificate(const FluxSpec& flux, const FourierPotential& V, int M,
                                                    const KGrid& grid, unsigned threads = worker_count()) {
    return truncation_certificate(sweep(flux, V, M, grid, threads), sweep(flux, V, M + 4, grid, threads));
}

/// "k1,k2,lam_1,...,lam_N" with 17 significant digits, one row per grid point.
inline std::string bands_csv(const BandSurface& s) {
    std::string out = "k1,k2";
    for (int b = 1; b <= s.band_count(); ++b) {
        out += ",lam_" + std::to_string(b);
    }
    out += '\n';
    char buf[40];
    for (std::size_t i = 0; i < s.k.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", s.k[i].x);
        out += buf;
        std::snprintf(buf, sizeof buf, ",%.17g", s.k[i].y);
        out += buf;
        for (double lam : s.eigenvalues[i]) {
            std::snprintf(buf, sizeof buf, ",%.17g", lam);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

} // namespace landau_bloch
