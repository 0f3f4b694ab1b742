// cfslab <experiment> --config <file> [--out <dir>] [--seed N]
#include <chrono>
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "cfslab/errors.hpp"
#include "cfslab/experiments.hpp"

namespace {

std::string joined(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& e : v) s += (s.empty() ? "" : ", ") + e;
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace cfslab;
    CLI::App app{"Numerical experiments on regularized Dirac seas"};
    std::string experiment, config, out = ".";
    std::optional<std::uint64_t> seed;
    bool quiet = false;
    app.add_option("experiment", experiment, "one of: " + joined(experiment_names()))->required();
    app.add_option("--config", config, "JSON config file")->required();
    app.add_option("--out", out, "output directory (created if missing)");
    app.add_option("--seed", seed, "overrides the config seed");
    app.add_flag("-q,--quiet", quiet, "no summary on stderr");
    app.set_version_flag("--version", kVersion);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        const auto t0 = std::chrono::steady_clock::now();
        ExperimentConfig cfg = load_config(config);
        if (seed) {
            cfg.seed = *seed;
            cfg.raw["seed"] = *seed;
        }
        const Report r = run_experiment(experiment, cfg);
        const auto files = emit(r, out);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!quiet) {
            for (const auto& a : r.assertions)
                if (!a.pass)
                    std::cerr << "FAIL " << a.name << ": " << format_g(a.lhs, 12) << ' ' << a.relation << ' '
                              << format_g(a.rhs, 12) << "  [" << a.anchor << "]\n";
            std::cerr << experiment << ": " << r.assertions.size() - r.failures() << '/' << r.assertions.size()
                      << " assertions passed, " << format_g(secs, 3) << " s\n";
            for (const auto& f : files) std::cerr << "  wrote " << f << '\n';
        }
        return r.all_passed() ? 0 : static_cast<int>(ErrorClass::assertion);
    } catch (const Error& e) {
        std::cerr << "cfslab: " << e.what() << '\n';
        return e.exit_code();
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "cfslab: config: " << e.what() << '\n';
        return static_cast<int>(ErrorClass::invalid_input);
    } catch (const std::exception& e) {
        std::cerr << "cfslab: " << e.what() << '\n';
        return static_cast<int>(ErrorClass::numerical);
    }
}
