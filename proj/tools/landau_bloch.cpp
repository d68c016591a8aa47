#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "landau_bloch/pipeline.hpp"

namespace lb = landau_bloch;
namespace fs = std::filesystem;

int main(int argc, char** argv) {
    CLI::App app{"Landau Hamiltonian with a periodic potential at rational flux"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string configPath;
    std::string potentialPath;
    std::string generator;
    std::string outDir = ".";
    std::optional<std::uint64_t> seed;
    bool oracle = false;
    std::string suite;

    app.add_option("--config", configPath, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--potential", potentialPath, "coefficient file 'n1 n2 re im'");
    app.add_option("--gen", generator, "generated potential, e.g. lacunary:6");
    app.add_option("--out", outDir, "output directory");
    app.add_option("--seed", seed, "seed for random sampling");
    app.add_flag("--oracle", oracle, "also cross-check fiber matrices by quadrature");

    auto* bands = app.add_subcommand("bands", "band sweep, flat-band candidates and truncation certificate");
    auto* criterion = app.add_subcommand("criterion", "scan of |Y|^{n+1} C_{B,V}(Y) with growth verdict");
    auto* perturb = app.add_subcommand("perturb", "shell perturbation with verified inequalities");
    auto* verify = app.add_subcommand("verify", "operator identity and inequality suites");
    verify->add_option("suite", suite, "ladder, lemma2, lemma3, eq5, graded, lemma6 or all");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        auto config = configPath.empty() ? lb::RunConfig{} : lb::load_config(configPath);
        if (!potentialPath.empty()) {
            config.potentialPath = potentialPath;
            config.lacunaryJ.reset();
        }
        if (!generator.empty()) {
            config.lacunaryJ = lb::detail::parse_lacunary(generator);
            if (!potentialPath.empty()) {
                throw lb::ConfigError("--potential and --gen are mutually exclusive");
            }
            config.potentialPath.reset();
        }
        if (seed) {
            config.seed = *seed;
        }
        config.oracle = config.oracle || oracle;
        if (!suite.empty()) {
            config.suite = suite;
        }

        const auto inputs = lb::resolve(config);
        std::error_code ec;
        fs::create_directories(outDir, ec);
        if (ec) {
            throw lb::ConfigError("cannot create output directory '" + outDir + "': " + ec.message());
        }

        lb::CommandResult result;
        if (*bands) {
            result = lb::cmd_bands(inputs, outDir);
        } else if (*criterion) {
            result = lb::cmd_criterion(inputs, outDir);
        } else if (*perturb) {
            result = lb::cmd_perturb(inputs, outDir);
        } else if (*verify) {
            result = lb::cmd_verify(inputs, outDir);
        }
        for (const auto& f : result.files) {
            std::cout << "wrote " << f.string() << "\n";
        }
        if (!result.summary.empty()) {
            std::cout << result.summary << "\n";
        }
        if (!result.verified) {
            std::cerr << "error: verification failed; see the JSON report\n";
            return lb::VerificationError("").exit_code();
        }
        return 0;
    } catch (const lb::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
