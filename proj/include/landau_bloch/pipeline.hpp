#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "band_structure.hpp"
#include "criterion.hpp"
#include "perturber.hpp"
#include "verify.hpp"

namespace landau_bloch {

using json = nlohmann::json;

struct BandsConfig {
    int M = 8;
    KGrid grid{8, 8};
    double flatTol = 1e-6;
    bool certificate = true;
};

struct BadSetConfig {
    BadSetSpec spec;
    int M = 8;
    KGrid grid{4, 4};
    double tol = 1e-6;
};

struct CriterionConfig {
    int n = 0;
    double Rmax = 100.0;
    int windows = 3;
    std::optional<BadSetConfig> badset;
};

struct PerturbConfig {
    int n = 0;
    double theta = 0.5;
    double delta = 1.0;
    std::optional<int> m;  // smallest admissible m in [mMin, mMax] when absent
    int mMin = 2;
    int mMax = 200;
    int nAngles = 256;
    ShellWeight weight = ShellWeight::SobolevIndex;
};

struct RunConfig {
    Vec2 E1{1.0, 0.0};
    Vec2 E2{0.0, 1.0};
    int P = 1;
    int Q = 1;
    std::optional<std::string> potentialPath;
    std::optional<int> lacunaryJ;
    std::uint64_t seed = 0;
    bool oracle = false;
    BandsConfig bands;
    CriterionConfig criterion;
    PerturbConfig perturb;
    std::string suite = "all";
    VerifyOptions verify;
};

/// 64-bit FNV-1a, printed as 16 hex digits.
inline std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open '" + p.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out || !(out << content) || !out.flush()) {
        throw ConfigError("cannot write '" + p.string() + "'");
    }
}

namespace detail {

template <class T>
void read_opt(const json& j, const char* key, T& dst) {
    if (j.contains(key)) {
        dst = j.at(key).get<T>();
    }
}

inline Vec2 read_vec(const json& j) {
    if (!j.is_array() || j.size() != 2) {
        throw ConfigError("expected a two-component vector, got " + j.dump());
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

inline KGrid read_grid(const json& j) {
    if (!j.is_array() || j.size() != 2) {
        throw ConfigError("grid must be [N1, N2]");
    }
    return {j[0].get<int>(), j[1].get<int>()};
}

inline int parse_lacunary(const std::string& gen) {
    const std::string prefix = "lacunary:";
    if (gen.rfind(prefix, 0) != 0) {
        throw ConfigError("unknown generator '" + gen + "' (expected lacunary:J)");
    }
    try {
        std::size_t used = 0;
        const int J = std::stoi(gen.substr(prefix.size()), &used);
        if (used != gen.size() - prefix.size()) {
            throw ConfigError("bad generator '" + gen + "'");
        }
        return J;
    } catch (const std::logic_error&) {
        throw ConfigError("bad generator '" + gen + "'");
    }
}

} // namespace detail

/// Fills a RunConfig from JSON; absent keys keep their defaults.
inline RunConfig parse_config(const json& j) {
    RunConfig c;
    try {
        if (!j.is_object()) {
            throw ConfigError("config must be a JSON object");
        }
        if (j.contains("lattice")) {
            const auto& l = j.at("lattice");
            if (l.contains("E1")) c.E1 = detail::read_vec(l.at("E1"));
            if (l.contains("E2")) c.E2 = detail::read_vec(l.at("E2"));
            detail::read_opt(l, "P", c.P);
            detail::read_opt(l, "Q", c.Q);
        }
        if (j.contains("potential") && !j.at("potential").is_null()) {
            c.potentialPath = j.at("potential").get<std::string>();
        }
        if (j.contains("generator") && !j.at("generator").is_null()) {
            c.lacunaryJ = detail::parse_lacunary(j.at("generator").get<std::string>());
        }
        detail::read_opt(j, "seed", c.seed);
        detail::read_opt(j, "oracle", c.oracle);
        if (j.contains("bands")) {
            const auto& b = j.at("bands");
            detail::read_opt(b, "M", c.bands.M);
            if (b.contains("grid")) c.bands.grid = detail::read_grid(b.at("grid"));
            detail::read_opt(b, "flatTol", c.bands.flatTol);
            detail::read_opt(b, "certificate", c.bands.certificate);
        }
        if (j.contains("criterion")) {
            const auto& cr = j.at("criterion");
            detail::read_opt(cr, "n", c.criterion.n);
            detail::read_opt(cr, "Rmax", c.criterion.Rmax);
            detail::read_opt(cr, "windows", c.criterion.windows);
            if (cr.contains("badset") && !cr.at("badset").is_null()) {
                const auto& bs = cr.at("badset");
                BadSetConfig b;
                detail::read_opt(bs, "S1", b.spec.S1);
                detail::read_opt(bs, "S2", b.spec.S2);
                detail::read_opt(bs, "S3", b.spec.S3);
                detail::read_opt(bs, "Cn", b.spec.Cn);
                detail::read_opt(bs, "M", b.M);
                if (bs.contains("grid")) b.grid = detail::read_grid(bs.at("grid"));
                detail::read_opt(bs, "tol", b.tol);
                c.criterion.badset = b;
            }
        }
        if (j.contains("perturb")) {
            const auto& p = j.at("perturb");
            detail::read_opt(p, "n", c.perturb.n);
            detail::read_opt(p, "theta", c.perturb.theta);
            detail::read_opt(p, "delta", c.perturb.delta);
            if (p.contains("m") && !p.at("m").is_null()) {
                c.perturb.m = p.at("m").get<int>();
            }
            if (p.contains("mRange")) {
                const auto& r = p.at("mRange");
                if (!r.is_array() || r.size() != 2) {
                    throw ConfigError("mRange must be [mMin, mMax]");
                }
                c.perturb.mMin = r[0].get<int>();
                c.perturb.mMax = r[1].get<int>();
            }
            detail::read_opt(p, "nAngles", c.perturb.nAngles);
            if (p.contains("weight")) {
                const auto w = p.at("weight").get<std::string>();
                if (w == "sobolev") {
                    c.perturb.weight = ShellWeight::SobolevIndex;
                } else if (w == "shell") {
                    c.perturb.weight = ShellWeight::ShellIndex;
                } else {
                    throw ConfigError("perturb.weight must be 'sobolev' or 'shell'");
                }
            }
        }
        if (j.contains("verify")) {
            const auto& v = j.at("verify");
            detail::read_opt(v, "suite", c.suite);
            detail::read_opt(v, "ladderMaxLevel", c.verify.ladderMaxLevel);
            detail::read_opt(v, "unitarityPoints", c.verify.unitarityPoints);
            detail::read_opt(v, "coercivitySamples", c.verify.coercivitySamples);
            detail::read_opt(v, "shiftSamples", c.verify.shiftSamples);
            detail::read_opt(v, "gradedSamples", c.verify.gradedSamples);
            detail::read_opt(v, "continuityPairs", c.verify.continuityPairs);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
    return c;
}

inline RunConfig load_config(const std::filesystem::path& p) {
    try {
        return parse_config(json::parse(read_file(p)));
    } catch (const json::parse_error& e) {
        throw ParseError("cannot parse '" + p.string() + "': " + e.what());
    }
}

inline json to_json(const RunConfig& c) {
    const auto grid = [](const KGrid& g) { return json::array({g.N1, g.N2}); };
    json j;
    j["lattice"] = {{"E1", {c.E1.x, c.E1.y}}, {"E2", {c.E2.x, c.E2.y}}, {"P", c.P}, {"Q", c.Q}};
    j["potential"] = c.potentialPath ? json(*c.potentialPath) : json(nullptr);
    j["generator"] = c.lacunaryJ ? json("lacunary:" + std::to_string(*c.lacunaryJ)) : json(nullptr);
    j["seed"] = c.seed;
    j["oracle"] = c.oracle;
    j["bands"] = {{"M", c.bands.M}, {"grid", grid(c.bands.grid)}, {"flatTol", c.bands.flatTol},
                  {"certificate", c.bands.certificate}};
    json cr = {{"n", c.criterion.n}, {"Rmax", c.criterion.Rmax}, {"windows", c.criterion.windows}};
    if (c.criterion.badset) {
        const auto& b = *c.criterion.badset;
        cr["badset"] = {{"S1", b.spec.S1}, {"S2", b.spec.S2}, {"S3", b.spec.S3}, {"Cn", b.spec.Cn},
                        {"M", b.M},        {"grid", grid(b.grid)}, {"tol", b.tol}};
    } else {
        cr["badset"] = nullptr;
    }
    j["criterion"] = cr;
    j["perturb"] = {{"n", c.perturb.n},
                    {"theta", c.perturb.theta},
                    {"delta", c.perturb.delta},
                    {"m", c.perturb.m ? json(*c.perturb.m) : json(nullptr)},
                    {"mRange", {c.perturb.mMin, c.perturb.mMax}},
                    {"nAngles", c.perturb.nAngles},
                    {"weight", c.perturb.weight == ShellWeight::SobolevIndex ? "sobolev" : "shell"}};
    j["verify"] = {{"suite", c.suite},
                   {"ladderMaxLevel", c.verify.ladderMaxLevel},
                   {"unitarityPoints", c.verify.unitarityPoints},
                   {"coercivitySamples", c.verify.coercivitySamples},
                   {"shiftSamples", c.verify.shiftSamples},
                   {"gradedSamples", c.verify.gradedSamples},
                   {"continuityPairs", c.verify.continuityPairs}};
    return j;
}

/// Lattice, flux and potential resolved from a config, with the provenance
/// block (resolved config, potential digest, hash) shared by every output.
struct RunInputs {
    RunConfig config;
    Lattice2 lattice;
    FluxSpec flux;
    FourierPotential V;
    json resolved;
    std::string hash;
};

inline RunInputs resolve(const RunConfig& c) {
    RunInputs in;
    in.config = c;
    in.lattice = build_lattice(c.E1, c.E2);
    in.flux = make_flux(in.lattice, c.P, c.Q);
    in.resolved = to_json(c);
    if (c.potentialPath && c.lacunaryJ) {
        throw ConfigError("give either a potential file or a generator, not both");
    }
    if (c.potentialPath) {
        const auto text = read_file(*c.potentialPath);
        in.V = load_potential(text, in.lattice);
        in.resolved["potentialDigest"] = fnv1a_hex(text);
    } else if (c.lacunaryJ) {
        in.V = lacunary_potential(in.lattice, *c.lacunaryJ);
        in.resolved["potentialDigest"] = fnv1a_hex(write_potential(in.V));
    } else {
        in.V = FourierPotential(in.lattice);
        in.resolved["potentialDigest"] = nullptr;
    }
    in.hash = fnv1a_hex(in.resolved.dump());
    return in;
}

namespace detail {

inline json provenance(const RunInputs& in) { return {{"config_hash", in.hash}, {"config", in.resolved}}; }

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline json to_json(const Inequality& q) { return {{"lhs", q.lhs}, {"rhs", q.rhs}, {"pass", q.pass}}; }

inline json index_json(const LatticeIndex& i) { return json::array({i.n1, i.n2}); }

} // namespace detail

/// What a command wrote and whether its checks held (false maps to exit 3).
struct CommandResult {
    std::vector<std::filesystem::path> files;
    bool verified = true;
    std::string summary;
};

inline CommandResult cmd_bands(const RunInputs& in, const std::filesystem::path& out) {
    const auto& c = in.config.bands;
    CommandResult r;
    const auto surface = sweep(in.flux, in.V, c.M, c.grid);
    write_file(out / "bands.csv", "# config_hash=" + in.hash + "\n" + bands_csv(surface));
    r.files.push_back(out / "bands.csv");

    json report = detail::provenance(in);
    report["M"] = c.M;
    report["grid"] = {c.grid.N1, c.grid.N2};
    json widths = json::array();
    for (const auto& w : band_widths(surface)) {
        widths.push_back({{"min", w.min}, {"max", w.max}, {"width", w.width}});
    }
    report["bandWidths"] = widths;
    json flat = json::array();
    for (const auto& f : flat_band_candidates(surface, c.flatTol)) {
        flat.push_back({{"band", f.band + 1},
                        {"mean", f.mean},
                        {"width", f.width},
                        {"levelSetDistance", f.levelSetDistance},
                        {"levelSetConfirmed", f.levelSetConfirmed},
                        {"nearTruncation", f.nearTruncation}});
    }
    report["flatTol"] = c.flatTol;
    report["flatBands"] = flat;
    if (c.certificate) {
        const auto cert = truncation_certificate(surface, sweep(in.flux, in.V, c.M + 4, c.grid));
        report["truncation"] = {{"M", cert.M},
                                {"Mref", cert.Mref},
                                {"bandsCompared", cert.bandsCompared},
                                {"maxDeviation", cert.maxDeviation},
                                {"threshold", cert.threshold},
                                {"pass", cert.pass()}};
        r.summary = "truncation deviation " + std::to_string(cert.maxDeviation);
    }
    report["flatBandCount"] = flat.size();
    write_file(out / "certificate.json", detail::dump(report));
    r.files.push_back(out / "certificate.json");

    if (in.config.oracle) {
        json o = detail::provenance(in);
        json points = json::array();
        double worst = 0.0;
        const int L = required_half_width(c.M);
        const std::size_t mid = surface.k.size() / 2 + static_cast<std::size_t>(c.grid.N2) / 2;
        const FiberAssembler assembler(in.flux, in.V, c.M);
        for (std::size_t idx : {std::size_t{0}, std::min(mid, surface.k.size() - 1)}) {
            const auto b = build_lll_basis(in.flux, surface.k[idx], L);
            const auto quad = oracle_fiber(b, in.V, c.M, {1e-9, 32, 512});
            const double dev = (quad.value - assembler.assemble(b).H).cwiseAbs().maxCoeff();
            worst = std::max(worst, dev);
            points.push_back({{"k", {surface.k[idx].x, surface.k[idx].y}},
                              {"maxDeviation", dev},
                              {"quadratureEstimate", quad.estimate},
                              {"resolution", quad.resolution}});
        }
        o["points"] = points;
        o["maxDeviation"] = worst;
        write_file(out / "oracle.json", detail::dump(o));
        r.files.push_back(out / "oracle.json");
    }
    return r;
}

inline CommandResult cmd_criterion(const RunInputs& in, const std::filesystem::path& out) {
    const auto& c = in.config.criterion;
    CommandResult r;
    const auto report = scan(in.V, in.flux, c.n, c.Rmax);
    write_file(out / "criterion.csv", "# config_hash=" + in.hash + "\n" + criterion_csv(report));
    r.files.push_back(out / "criterion.csv");

    const auto v = growth_verdict(report, c.windows);
    json j = detail::provenance(in);
    j["n"] = c.n;
    j["B"] = in.flux.B;
    j["Rmax"] = c.Rmax;
    j["shellWidth"] = report.shellWidth;
    j["supportRadius"] = report.supportRadius;
    j["verdict"] = to_string(v.verdict);
    j["slope"] = std::isfinite(v.slope) ? json(v.slope) : json(nullptr);
    j["windows"] = v.windows;
    j["regressionShells"] = v.shells;
    json env = json::array();
    for (std::size_t s = 0; s < report.envelope.size(); ++s) {
        env.push_back({{"shell", s},
                       {"inner", static_cast<double>(s) * report.shellWidth},
                       {"value", report.envelope[s] ? json(*report.envelope[s]) : json(nullptr)}});
    }
    j["envelope"] = env;
    const CriterionRow* peak = nullptr;
    for (const auto& row : report.rows) {
        if (!peak || row.weighted > peak->weighted) {
            peak = &row;
        }
    }
    if (peak) {
        j["peak"] = {{"index", detail::index_json(peak->index)}, {"absY", peak->absY}, {"weightedC", peak->weighted}};
    }
    if (c.badset) {
        const auto& b = *c.badset;
        const auto d = badset_check(in.V, in.flux, c.n, b.spec, report, b.M, b.grid, b.tol);
        j["badset"] = {{"normHn", d.normHn},
                       {"threshold", d.threshold},
                       {"normBounded", d.normBounded},
                       {"eigenvalueInRange", d.eigenvalueInRange},
                       {"criterionBounded", d.criterionBounded},
                       {"worstWeighted", std::isfinite(d.worstWeighted) ? json(d.worstWeighted) : json(nullptr)},
                       {"worstIndex", d.worstIndex ? detail::index_json(*d.worstIndex) : json(nullptr)},
                       {"flatBandMeans", d.candidates},
                       {"member", d.member()}};
    }
    write_file(out / "verdict.json", detail::dump(j));
    r.files.push_back(out / "verdict.json");
    r.summary = std::string("verdict ") + to_string(v.verdict);
    return r;
}

inline json to_json(const PerturbationRecord& p) {
    return {{"n", p.n},
            {"theta", p.theta},
            {"delta", p.delta},
            {"m", p.m},
            {"weight", p.weight == ShellWeight::SobolevIndex ? "sobolev" : "shell"},
            {"constants", {{"a", p.shell.a}, {"Rm", p.shell.Rm}, {"rpm", p.shell.rpm}, {"rm", p.shell.rm}}},
            {"direction",
             {{"x", {p.direction.x.x, p.direction.x.y}},
              {"angleIndex", p.direction.angleIndex},
              {"nAngles", p.direction.nAngles},
              {"directedEnergy", p.direction.value}}},
            {"Ym",
             {{"index", detail::index_json(p.Ym.Y.index)},
              {"vector", {p.Ym.Y.Y.x, p.Ym.Y.Y.y}},
              {"absY", norm(p.Ym.Y.Y)},
              {"distanceToX", p.Ym.distance}}},
            {"amplitude", p.amplitude},
            {"shellEnergy", p.shellEnergy},
            {"checks",
             {{"shellEnergyBound", detail::to_json(p.shellBound)},
              {"directionBound", detail::to_json(p.directionBound)},
              {"radiusLowerBound", detail::to_json(p.bracketLower)},
              {"radiusUpperBound", detail::to_json(p.bracketUpper)},
              {"criterionBound", detail::to_json(p.criterionBound)},
              {"real", p.real}}},
            {"distance", p.distance},
            {"distanceBound", detail::to_json(p.distanceBound)},
            {"criterion", p.criterion},
            {"weightedCriterion", p.weightedCriterion},
            {"exactTail", p.exactTail},
            {"hermitianDefect", p.hermitianDefect},
            {"verified", p.verified()}};
}

inline CommandResult cmd_perturb(const RunInputs& in, const std::filesystem::path& out) {
    const auto& c = in.config.perturb;
    CommandResult r;
    int m = 0;
    if (c.m) {
        m = *c.m;
    } else {
        const auto ms = admissible_m(in.V, c.n, c.delta, c.mMin, c.mMax, c.weight);
        if (ms.empty()) {
            throw NumericalError("no admissible shell index in [" + std::to_string(c.mMin) + ", " +
                                 std::to_string(c.mMax) + "]");
        }
        m = ms.front();
    }
    const auto rec = perturb(in.V, in.flux, c.n, c.theta, m, c.nAngles, c.delta, c.weight);
    const auto diag = stripping_diagnostic(in.V, c.n, c.theta, m, c.delta, c.nAngles, c.weight);
    json j = detail::provenance(in);
    j["record"] = to_json(rec);
    json chain = json::array();
    for (const auto& q : diag.smoothingChain) {
        chain.push_back(detail::to_json(q));
    }
    j["diagnostic"] = {{"strippedNorm", detail::to_json(diag.strippedNorm)},
                       {"strippedSmoothNorm", detail::to_json(diag.strippedSmoothNorm)},
                       {"smoothingChain", chain},
                       {"distance", detail::to_json(diag.distance)}};
    write_file(out / "perturbation.json", detail::dump(j));
    write_file(out / "perturbed.txt", "# config_hash=" + in.hash + "\n" + write_potential(rec.output));
    r.files = {out / "perturbation.json", out / "perturbed.txt"};
    r.verified = rec.verified();
    r.summary = "m=" + std::to_string(m) + " weightedCriterion " + std::to_string(rec.weightedCriterion);
    return r;
}

inline CommandResult cmd_verify(const RunInputs& in, const std::filesystem::path& out) {
    auto opt = in.config.verify;
    opt.lattice = in.lattice;
    opt.seed = in.config.seed;
    const auto results = run_verify(in.config.suite, opt);
    CommandResult r;
    json j = detail::provenance(in);
    j["suite"] = in.config.suite;
    json arr = json::array();
    int failed = 0;
    for (const auto& p : results) {
        arr.push_back({{"suite", p.suite},
                       {"property", p.name},
                       {"measured", p.measured},
                       {"threshold", p.threshold},
                       {"samples", p.samples},
                       {"violations", p.violations},
                       {"pass", p.pass}});
        failed += p.pass ? 0 : 1;
    }
    j["results"] = arr;
    j["pass"] = failed == 0;
    write_file(out / "verify.json", detail::dump(j));
    r.files.push_back(out / "verify.json");
    r.verified = failed == 0;
    r.summary = std::to_string(results.size() - static_cast<std::size_t>(failed)) + "/" +
                std::to_string(results.size()) + " properties pass";
    return r;
}

} // namespace landau_bloch
