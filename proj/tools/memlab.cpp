// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "memlab/config.hpp"
#include "memlab/error.hpp"
#include "memlab/experiments.hpp"

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
    std::optional<std::string> output;
};

void apply(memlab::ExperimentConfig& cfg, const Overrides& o) {
    if (o.seed) cfg.seed = *o.seed;
    if (o.workers) cfg.workers = *o.workers;
    if (o.output) cfg.output_dir = *o.output;
}

void print_report(const memlab::ValidationReport& rep) {
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& e : rep.errors) std::cerr << "error: " << e << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"memlab: simulations of stochastic approximation with memory"};
    app.set_version_flag("--version", std::string(MEMLAB_VERSION));
    app.require_subcommand(1);

    std::string path;
    Overrides o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", path, "Experiment config (YAML)")->required();
        sub->add_option("--seed", o.seed, "Root seed, overrides the config");
        sub->add_option("--workers", o.workers, "Worker threads, overrides the config")->check(CLI::PositiveNumber);
        sub->add_option("--output", o.output, "Output directory, overrides the config");
    };
    CLI::App* run = app.add_subcommand("run", "Run an experiment");
    CLI::App* validate = app.add_subcommand("validate", "Resolve and check a config without running");
    add_common(run);
    add_common(validate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? memlab::kExitOk : memlab::kExitConfig;
    }

    memlab::ExperimentConfig cfg;
    try {
        cfg = memlab::load_config(path);
    } catch (const memlab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return memlab::kExitConfig;
    }
    apply(cfg, o);

    if (validate->parsed()) {
        const memlab::ValidationReport rep = memlab::validate_experiment(cfg);
        print_report(rep);
        if (!rep.ok()) return memlab::kExitConfig;
        std::cout << path << ": ok\n";
        return memlab::kExitOk;
    }

    const memlab::ValidationReport rep = memlab::validate_experiment(cfg);
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
    const memlab::RunResult res = memlab::run_experiment(cfg);
    for (const auto& e : res.errors) std::cerr << "error: " << e << "\n";
    if (res.exit_code != memlab::kExitOk) return res.exit_code;
    for (const auto& [k, v] : res.summary) std::cout << k << ": " << v << "\n";
    std::cout << "output: " << res.output_dir.string() << "\n";
    return memlab::kExitOk;
}
