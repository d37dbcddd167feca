// hallab — drive the transport laboratory from configuration files.
//
// Subcommands: build, kubo, evolve, sweep-tau, sweep-lambda, expansion,
// diagnostics, report. Each reads a JSON config, runs one pipeline, and
// writes CSV/JSON artifacts plus a manifest into the output directory.

#include "hallab/harness.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"hallab: quantized Hall transport on finite magnetic models"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int threads = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;

    const std::vector<std::string> names = {"build",      "kubo",         "evolve",
                                            "sweep-tau",  "sweep-lambda", "expansion",
                                            "diagnostics", "report"};
    std::vector<CLI::App*> subs;
    for (const auto& name : names) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON run configuration")
            ->required(name != "report");
        sub->add_option("--out", out_dir, "output directory (overrides config)");
        sub->add_option("--threads", threads, "worker count (overrides config)");
        sub->add_option("--seed", seed, "RNG seed (overrides config)")
            ->each([&seed_set](const std::string&) { seed_set = true; });
        subs.push_back(sub);
    }

    CLI11_PARSE(app, argc, argv);

    const std::string chosen = app.get_subcommands().front()->get_name();
    const auto pipeline = hallab::pipeline_from_name(chosen);
    if (!pipeline) {
        std::cerr << "error: unknown subcommand\n";
        return hallab::kExitConfig;
    }

    hallab::RunConfig cfg;
    try {
        if (!config_path.empty()) {
            cfg = hallab::RunConfig::from_json_file(config_path);
        } else if (chosen != "report") {
            std::cerr << "error: --config is required\n";
            return hallab::kExitConfig;
        }
    } catch (const hallab::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return hallab::kExitConfig;
    }
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (threads > 0) cfg.threads = threads;
    if (seed_set) cfg.seed = seed;

    return hallab::run_pipeline(*pipeline, cfg);
}
