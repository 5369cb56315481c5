// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "memlab/config.hpp"
#include "memlab/error.hpp"
#include "memlab/experiments.hpp"

using namespace memlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("memlab_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool has_message(const std::vector<std::string>& v, const std::string& needle) {
    for (const auto& s : v)
        if (s.find(needle) != std::string::npos) return true;
    return false;
}

const char* kTwoScale = R"(experiment: two-scale
seed: 5
params:
  landscape:
    name: QuadraticTracking
    c: 1.0
    epsilon: 0.1
    confinement: 0.0
    target: 0.0
  chain: {name: flip, alpha: 0.3, beta: 0.3}
  schedule: {kind: decreasing, c_a: 0.5, c_b: 0.025, q: 0.7, p: 0.9}
  mode: instantaneous
  x0: [0.5]
  y0: [1.0]
  n_steps: 2000
  thin: 50
  runs: 3
)";

// One small configuration per experiment.
const std::vector<std::string> kSmall{
    "experiment: collapse\nseed: 1\nparams: {runs: 20}\n",
    "experiment: barycenter-check\nseed: 2\nparams: {states: 2, replications: 2000}\n",
    kTwoScale,
    "experiment: hwang\nseed: 4\nparams:\n  landscape: {name: CurvatureAsymmetricWell, c1: 2, c2: 8, join_level: 0.01, "
    "join_width: 0.02}\n  n_steps: 20000\n  runs: 3\n",
    "experiment: memorize\nseed: 5\nparams:\n  landscape: {name: MemorizationDrift, strength: 3, kappa: 2, nu: 1, "
    "epsilon: 0.02}\n  chain: {name: memorization, stay: 0.5, beta: 5}\n  n_steps: 20000\n  seeds: 2\n"
    "  epsilon_sweep: [0.05]\n  step_sweep: [0.02]\n",
    "experiment: estimator-bias\nseed: 6\nparams:\n  landscape: {name: Power, power: 4, offset: 0, dim: 1}\n"
    "  chain: {name: iid, weights: [1]}\n  x: [1.0]\n  samples: 2000\n  replications: 50\n",
    "experiment: diffusion\nseed: 7\nparams: {iterations: 200, samples: 400, chunks: 4}\n",
};

}  // namespace

TEST_CASE("syntax errors carry a location", "[config]") {
    try {
        parse_config("experiment: collapse\nseed: [1\n");
        FAIL("expected ConfigParse");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::ConfigParse);
        CHECK(std::string(e.what()).find("line") != std::string::npos);
    }
}

TEST_CASE("missing landscape fields are named", "[config]") {
    std::string text = kTwoScale;
    text.replace(text.find("    confinement: 0.0\n"), 21, "");
    const auto rep = validate_experiment(parse_config(text));
    CHECK_FALSE(rep.ok());
    CHECK(has_message(rep.errors, "params.landscape.confinement"));
}

TEST_CASE("unknown fields are errors", "[config]") {
    const auto rep = validate_experiment(parse_config(std::string(kTwoScale) + "  colour: blue\n"));
    CHECK(has_message(rep.errors, "params.colour"));
}

TEST_CASE("a slowly decaying schedule is reported", "[config]") {
    std::string text = kTwoScale;
    text.replace(text.find("q: 0.7"), 6, "q: 0.4");
    const auto rep = validate_experiment(parse_config(text));
    CHECK(rep.ok());
    CHECK(has_message(rep.warnings, "exponent 0.4"));
}

TEST_CASE("valid configs have no errors", "[config]") {
    for (const auto& text : kSmall) {
        const auto rep = validate_experiment(parse_config(text));
        INFO(text);
        CHECK(rep.errors.empty());
    }
}

TEST_CASE("unknown experiment leaves no output", "[config]") {
    auto cfg = parse_config("experiment: nope\nseed: 1\n");
    const auto dir = scratch("unknown");
    cfg.output_dir = dir.string();
    const auto res = run_experiment(cfg);
    CHECK(res.exit_code == kExitConfig);
    CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("every experiment reruns byte for byte and ignores worker count", "[config]") {
    for (std::size_t i = 0; i < kSmall.size(); ++i) {
        auto cfg = parse_config(kSmall[i]);
        INFO(cfg.experiment);
        const auto d1 = scratch("det_a_" + std::to_string(i));
        const auto d2 = scratch("det_b_" + std::to_string(i));
        cfg.output_dir = d1.string();
        cfg.workers = 1;
        REQUIRE(run_experiment(cfg).exit_code == kExitOk);
        cfg.output_dir = d2.string();
        cfg.workers = 4;
        REQUIRE(run_experiment(cfg).exit_code == kExitOk);
        std::size_t files = 0;
        for (const auto& entry : fs::directory_iterator(d1)) {
            ++files;
            const auto name = entry.path().filename();
            CHECK(slurp(entry.path()) == slurp(d2 / name));
        }
        CHECK(files >= 3);
        CHECK(fs::exists(d1 / "manifest.json"));
        CHECK(fs::exists(d1 / "summary.txt"));
        fs::remove_all(d1);
        fs::remove_all(d2);
    }
}

TEST_CASE("divergence maps to exit code 2", "[config]") {
    std::string text = kTwoScale;
    text.replace(text.find("c_a: 0.5"), 8, "c_a: 50.");
    auto cfg = parse_config(text);
    cfg.output_dir = scratch("diverge").string();
    const auto res = run_experiment(cfg);
    CHECK(res.exit_code == kExitDivergence);
    fs::remove_all(cfg.output_dir);
}

TEST_CASE("manifest records the resolved parameters", "[config]") {
    auto cfg = parse_config("experiment: collapse\nseed: 9\nparams: {runs: 5}\n");
    cfg.output_dir = scratch("manifest").string();
    REQUIRE(run_experiment(cfg).exit_code == kExitOk);
    const auto m = slurp(fs::path(cfg.output_dir) / "manifest.json");
    CHECK(m.find("\"entropy_floor\"") != std::string::npos);
    CHECK(m.find("\"seed\": 9") != std::string::npos);
    fs::remove_all(cfg.output_dir);
}

TEST_CASE("parallel_for visits every index once", "[config]") {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
    for (int h : hits) CHECK(h == 1);
    CHECK_THROWS(parallel_for(10, 3, [](std::size_t i) {
        if (i == 7) throw std::runtime_error("boom");
    }));
}
