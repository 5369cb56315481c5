// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration files (YAML). Field errors carry the line and
// column of the offending node. See docs/config.md for the schema.

#pragma once

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "memlab/landscape.hpp"
#include "memlab/noise.hpp"
#include "memlab/sgd.hpp"

namespace memlab {

struct ExperimentConfig {
    std::string experiment;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    std::string output_dir;  // empty: $MEMLAB_OUTPUT_ROOT/<experiment> or ./memlab-out/<experiment>
    YAML::Node params;
    std::filesystem::path source;
    std::vector<std::string> errors;  // top-level problems found while loading
};

/// Throws ConfigParse for unreadable files or YAML syntax errors; field
/// problems are collected in `errors`.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& source = "<string>");

/// Typed reader over a YAML mapping. Problems are appended to a shared error
/// list; every value read is mirrored into `resolved` for the manifest.
class ParamReader {
public:
    ParamReader(YAML::Node node, std::string path, std::vector<std::string>* errors, nlohmann::json* resolved);

    bool has(const std::string& key) const;
    double number(const std::string& key, std::optional<double> fallback = std::nullopt);
    std::uint64_t count(const std::string& key, std::optional<std::uint64_t> fallback = std::nullopt);
    std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt);
    bool flag(const std::string& key, std::optional<bool> fallback = std::nullopt);
    std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt);
    /// Nested mapping; missing is an error unless optional.
    ParamReader child(const std::string& key, bool optional = false);

    /// Reports keys that were never read.
    void finish();

    void error(const std::string& key, const std::string& message);
    bool ok() const { return errors_->empty(); }
    std::vector<std::string>& errors() { return *errors_; }

private:
    std::string where(const YAML::Node& n) const;
    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    YAML::Node get(const std::string& key);

    YAML::Node node_;
    std::string path_;
    std::vector<std::string>* errors_;
    nlohmann::json* resolved_;
    std::vector<std::string> used_;
};

/// Named constructors from a `{name: ..., ...}` mapping. Landscape, chain
/// and schedule parameters are all required.
LandscapePtr landscape_from(ParamReader r);
ChainPtr chain_from(ParamReader r);
StepSchedule schedule_from(ParamReader r);
SgdMode mode_from(const std::string& name, ParamReader& r, const std::string& key);

}  // namespace memlab
