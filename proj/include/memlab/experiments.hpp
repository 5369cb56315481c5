// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0
//
// Named experiments driven by an ExperimentConfig. Each writes its CSV
// files, summary.txt and manifest.json into the output directory. Run
// units use sub-streams derived from the root seed by unit id, so outputs
// do not depend on the worker count.

#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "memlab/config.hpp"

namespace memlab {

const std::vector<std::string>& experiment_names();

struct ValidationReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    bool ok() const { return errors.empty(); }
};

/// Full resolution of the config without running anything.
ValidationReport validate_experiment(const ExperimentConfig& cfg);

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitDivergence = 2 };

struct RunResult {
    int exit_code = kExitOk;
    std::filesystem::path output_dir;
    std::vector<std::pair<std::string, std::string>> summary;
    std::vector<std::string> errors;
};

/// Validates, then runs and writes outputs. The output directory is only
/// created once validation has passed.
RunResult run_experiment(const ExperimentConfig& cfg);

std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg);

/// Calls fn(i) for i < n on up to `workers` threads.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace memlab
