#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "band_structure.hpp"
#include "potential.hpp"

namespace landau_bloch {

struct CriterionRow {
    LatticeIndex index;
    double absY = 0.0;
    double C = 0.0;
    double weighted = 0.0;  // |Y|^{n+1} C
};

/// Scan of |Y|^{n+1} C_{B,V}(Y) over the disk |Y| <= Rmax. Shell s covers
/// s*w <= |Y| < (s+1)*w; empty shells have no envelope value.
struct CriterionReport {
    int n = 0;
    double B = 0.0;
    double Rmax = 0.0;
    double shellWidth = 0.0;
    double supportRadius = 0.0;
    std::vector<CriterionRow> rows;
    std::vector<std::optional<double>> envelope;
};

/// Reciprocal-lattice spacing used as the shell width.
inline double criterion_shell_width(const Lattice2& lat) { return kTwoPi * std::max(norm(lat.E1s), norm(lat.E2s)); }

inline CriterionReport scan(const FourierPotential& V, const FluxSpec& flux, int n, double Rmax,
                            unsigned threads = worker_count()) {
    if (!(Rmax > 0.0)) {
        throw ConfigError("scan radius must be positive");
    }
    if (n < 0) {
        throw ConfigError("smoothness index n must be non-negative");
    }
    CriterionReport r;
    r.n = n;
    r.B = flux.B;
    r.Rmax = Rmax;
    r.shellWidth = criterion_shell_width(V.lattice());
    r.supportRadius = V.support_radius();
    const auto pts = points_in_disk(V.lattice(), {0.0, 0.0}, Rmax);
    r.rows.resize(pts.size());
    parallel_for(pts.size(), threads, [&](std::size_t i) {
        auto& row = r.rows[i];
        row.index = pts[i].index;
        row.absY = norm(pts[i].Y);
        row.C = c_criterion(V, flux.B, pts[i].index);
        row.weighted = std::pow(row.absY, n + 1) * row.C;
    });
    r.envelope.assign(static_cast<std::size_t>(std::floor(Rmax / r.shellWidth)) + 1, std::nullopt);
    for (const auto& row : r.rows) {
        const auto s = std::min(r.envelope.size() - 1, static_cast<std::size_t>(std::floor(row.absY / r.shellWidth)));
        r.envelope[s] = std::max(r.envelope[s].value_or(-std::numeric_limits<double>::infinity()), row.weighted);
    }
    return r;
}

enum class Verdict { IncreasingEvidence, BoundedEvidence, Inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::IncreasingEvidence:
        return "increasing-evidence";
    case Verdict::BoundedEvidence:
        return "bounded-evidence";
    case Verdict::Inconclusive:
        break;
    }
    return "inconclusive";
}

struct GrowthVerdict {
    Verdict verdict = Verdict::Inconclusive;
    int windows = 0;
    double slope = std::numeric_limits<double>::quiet_NaN();
    std::vector<int> shells;  // shells used in the regression
};

/// Least-squares slope of log(envelope) against shell index over the last
/// `windows` shells with a positive envelope. A positive slope is evidence of
/// growth; a non-positive envelope everywhere beyond the support radius is
/// evidence of boundedness.
inline GrowthVerdict growth_verdict(const CriterionReport& r, int windows) {
    if (windows < 2) {
        throw ConfigError("growth verdict needs at least 2 windows");
    }
    if (static_cast<int>(r.envelope.size()) < windows) {
        throw ConfigError("scan has fewer shells than requested windows");
    }
    GrowthVerdict g;
    g.windows = windows;
    for (int s = static_cast<int>(r.envelope.size()) - 1; s >= 0 && static_cast<int>(g.shells.size()) < windows; --s) {
        const auto& e = r.envelope[static_cast<std::size_t>(s)];
        if (e && *e > 0.0) {
            g.shells.insert(g.shells.begin(), s);
        }
    }
    if (static_cast<int>(g.shells.size()) == windows) {
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (int s : g.shells) {
            const double x = s;
            const double y = std::log(*r.envelope[static_cast<std::size_t>(s)]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double w = windows;
        g.slope = (w * sxy - sx * sy) / (w * sxx - sx * sx);
        if (g.slope > 0.0) {
            g.verdict = Verdict::IncreasingEvidence;
            return g;
        }
    }
    bool bounded = true;
    for (std::size_t s = 0; s < r.envelope.size(); ++s) {
        const double inner = static_cast<double>(s) * r.shellWidth;
        const auto& e = r.envelope[s];
        if (inner > r.supportRadius && e && *e > 0.0) {
            bounded = false;
        }
    }
    // Rows in the shell straddling the support radius also count.
    for (const auto& row : r.rows) {
        if (row.absY > r.supportRadius && row.weighted > 0.0) {
            bounded = false;
        }
    }
    g.verdict = bounded ? Verdict::BoundedEvidence : Verdict::Inconclusive;
    return g;
}

/// Parameters of the set B_n(S1, S2, S3); Cn stands in for the unknown C(n).
struct BadSetSpec {
    double S1 = 1.0;
    double S2 = 1.0;
    double S3 = 1.0;
    double Cn = 1.0;

    /// C' = Cn (v(K)^{(n+2)/2} (1 + B + S2)^{n+2} + S1^{n+2}).
    double threshold(const FluxSpec& flux, int n) const {
        const double e = n + 2.0;
        return Cn * (std::pow(flux.lattice.cellArea, e / 2.0) * std::pow(1.0 + flux.B + S2, e) + std::pow(S1, e));
    }
};

struct BadSetDiagnosis {
    double normHn = 0.0;
    double threshold = 0.0;
    bool normBounded = false;        // ||V||_{H^n} <= S1
    bool eigenvalueInRange = false;  // flat-band candidate with |lambda| <= S2
    bool criterionBounded = false;   // |Y|^{n+1} C <= C' for all scanned |Y| >= S3
    double worstWeighted = -std::numeric_limits<double>::infinity();
    std::optional<LatticeIndex> worstIndex;
    std::vector<double> candidates;

    bool member() const { return normBounded && eigenvalueInRange && criterionBounded; }
};

inline BadSetDiagnosis badset_check(const FourierPotential& V, const FluxSpec& flux, int n, const BadSetSpec& spec,
                                    const CriterionReport& report, const std::vector<FlatBandCandidate>& flat) {
    if (report.Rmax < spec.S3 + report.shellWidth) {
        throw ConfigError("criterion scan radius must reach S3 plus one shell");
    }
    BadSetDiagnosis d;
    d.normHn = sobolev_norm(V, n);
    d.threshold = spec.threshold(flux, n);
    d.normBounded = d.normHn <= spec.S1;
    for (const auto& c : flat) {
        d.candidates.push_back(c.mean);
        if (std::abs(c.mean) <= spec.S2) {
            d.eigenvalueInRange = true;
        }
    }
    d.criterionBounded = true;
    for (const auto& row : report.rows) {
        if (row.absY >= spec.S3) {
            if (row.weighted > d.worstWeighted) {
                d.worstWeighted = row.weighted;
                d.worstIndex = row.index;
            }
            if (row.weighted > d.threshold) {
                d.criterionBounded = false;
            }
        }
    }
    return d;
}

/// Runs the flat-band proxy itself at the given (grid, M, tol).
inline BadSetDiagnosis badset_check(const FourierPotential& V, const FluxSpec& flux, int n, const BadSetSpec& spec,
                                    const CriterionReport& report, int M, const KGrid& grid, double tol) {
    return badset_check(V, flux, n, spec, report, flat_band_candidates(sweep(flux, V, M, grid), tol));
}

/// V_{Y_j} = |Y_j|^{-1/2} at Y_j = 2 pi (2^j, 0) in reciprocal-lattice
/// coordinates (index (2^j, 0)), j = 1..J, with conjugate partners.
inline FourierPotential lacunary_potential(const Lattice2& lat, int J) {
    if (J < 1 || J > 28) {
        throw ConfigError("lacunary generator needs 1 <= J <= 28");
    }
    FourierPotential V(lat);
    for (int j = 1; j <= J; ++j) {
        const LatticeIndex idx{1 << j, 0};
        const double amp = 1.0 / std::sqrt(norm(lat.wavevector(idx)));
        V.set(idx, amp);
        V.set(-idx, amp);
    }
    return V;
}

/// "n1,n2,absY,C,weightedC", rows in lexicographic index order.
inline std::string criterion_csv(const CriterionReport& r) {
    std::string out = "n1,n2,absY,C,weightedC\n";
    char buf[128];
    for (const auto& row : r.rows) {
        std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g\n", row.index.n1, row.index.n2, row.absY, row.C,
                      row.weighted);
        out += buf;
    }
    return out;
}

} // namespace landau_bloch
