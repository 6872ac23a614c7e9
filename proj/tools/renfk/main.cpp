#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "config.hpp"
#include "experiment.hpp"

namespace {

void configure_logging() {
    auto logger = spdlog::stderr_color_mt("renfk");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* level = std::getenv("RENFK_LOG")) spdlog::set_level(spdlog::level::from_str(level));
}

}  // namespace

int main(int argc, char** argv) {
    using namespace renfk::cli;
    configure_logging();

    CLI::App app{"Solvers and verifiers for semilinear equations with measure data"};
    app.set_version_flag("--version", std::string(tool_version()));
    app.require_subcommand(1);

    std::string config_path;
    Overrides overrides;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::optional<std::string> out_dir;

    const std::pair<ExperimentKind, const char*> commands[] = {
        {ExperimentKind::solve_finite, "solve the finite-chain equation -Lu = f(u) + mu"},
        {ExperimentKind::verify_renorm, "build nu_k and check the truncated identity and TV decay"},
        {ExperimentKind::mc_elliptic, "Monte Carlo solution on a continuum domain"},
        {ExperimentKind::mc_parabolic, "grid solution of a parabolic problem, checked by Monte Carlo"},
        {ExperimentKind::revuz_check, "small-time Monte Carlo check of the Revuz correspondence"},
        {ExperimentKind::bsde_check, "martingale increment test of a candidate solution"},
    };
    for (const auto& [kind, help] : commands) {
        auto* sub = app.add_subcommand(std::string(to_string(kind)), help);
        sub->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--workers", workers, "Monte Carlo block count (part of the reproducibility key)")
            ->check(CLI::Range(1u, 1024u));
        sub->add_option("--out", out_dir, "output directory (overrides the config)");
        sub->add_option("--seed", seed, "random seed (overrides the config)");
        sub->callback([&overrides, kind = kind] { overrides.kind = kind; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    overrides.seed = seed;
    overrides.workers = workers;
    if (out_dir) overrides.out_dir = *out_dir;

    ExperimentConfig cfg;
    try {
        cfg = parse_config(config_path, overrides);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }

    try {
        const RunManifest manifest = run_experiment(cfg);
        std::cout << to_string(cfg.kind) << ": " << to_string(manifest.status);
        if (!manifest.message.empty()) std::cout << " (" << manifest.message << ")";
        std::cout << "\noutputs in " << cfg.out_dir.string() << "\n";
        if (manifest.status == RunStatus::error) spdlog::error("{}", manifest.message);
        return manifest.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
