// Experiment runner: dispatches the named experiment with a key=value config,
// writes CSV/binary artifacts and a machine-readable summary per run.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <string>

#include "landau/experiment.hpp"

using namespace landau;

int main(int argc, char** argv) {
    CLI::App app{"landaulab - self-similar Landau implosion laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "runs/default";
    std::uint64_t seed = 20240808ull;
    int threads = 1;
    app.add_option("--config", config_path, "key=value config file");
    app.add_option("--out", out_dir, "output directory (append-only per run id)");
    app.add_option("--seed", seed, "64-bit seed; all randomness derives from it");
    app.add_option("--threads", threads, "worker hint (outputs are deterministic)");

    struct Cmd {
        const char* name;
        const char* help;
        int (*fn)(const ExperimentConfig&);
    };
    static const Cmd cmds[] = {
        {"profile-solve", "solve the radial self-similar profile", run_profile_solve},
        {"profile-verify", "verify profile properties, errors and the weight", run_profile_verify},
        {"collision-suite", "conservation/equilibrium/scaling checks", run_collision_suite},
        {"gap-estimate", "spectral-gap Rayleigh quotients", run_gap_estimate},
        {"relax", "homogeneous relaxation experiment", run_relax},
        {"lineuler-decay", "far-field linearized Euler decay", run_lineuler_decay},
        {"limit-density", "limiting-density surface", run_limit_density},
        {"initial-data", "positivity-ready initial data", run_initial_data},
        {"report", "aggregate run summaries", run_report},
    };
    for (const auto& c : cmds) app.add_subcommand(c.name, c.help);

    CLI11_PARSE(app, argc, argv);

    ExperimentConfig cfg;
    cfg.out_dir = out_dir;
    cfg.seed = seed;
    cfg.threads = threads;
    try {
        if (!config_path.empty()) cfg.kv = KeyValueFile::load(config_path);
        std::filesystem::create_directories(out_dir);
        for (const auto& c : cmds)
            if (app.get_subcommand(c.name)->parsed()) return c.fn(cfg);
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
