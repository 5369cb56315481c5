// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0

#include "memlab/experiments.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "experiment_plans.hpp"
#include "memlab/error.hpp"

namespace memlab {

namespace {

struct Entry {
    const char* name;
    detail::Planner planner;
};

const Entry kExperiments[] = {
    {"collapse", detail::plan_collapse},
    {"barycenter-check", detail::plan_barycenter},
    {"two-scale", detail::plan_two_scale},
    {"hwang", detail::plan_hwang},
    {"memorize", detail::plan_memorize},
    {"estimator-bias", detail::plan_estimator_bias},
    {"diffusion", detail::plan_diffusion},
};

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// FNV-1a, used only to fingerprint output files in the manifest.
std::uint64_t fingerprint(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

struct Resolved {
    detail::Plan plan;
    nlohmann::json params;
};

Resolved resolve(const ExperimentConfig& cfg, ValidationReport& report) {
    report.errors.insert(report.errors.end(), cfg.errors.begin(), cfg.errors.end());
    Resolved out;
    const Entry* entry = nullptr;
    for (const auto& e : kExperiments)
        if (cfg.experiment == e.name) entry = &e;
    if (!entry) {
        if (!cfg.experiment.empty()) {
            report.errors.push_back(cfg.source.string() + ": unknown experiment '" + cfg.experiment + "'");
        }
        return out;
    }
    std::vector<std::string> errors;
    ParamReader r(cfg.params, "params", &errors, &out.params);
    out.plan = entry->planner(r, report);
    r.finish();
    for (auto& e : errors) report.errors.push_back(cfg.source.string() + ": " + e);
    return out;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& e : kExperiments) v.emplace_back(e.name);
        return v;
    }();
    return names;
}

ValidationReport validate_experiment(const ExperimentConfig& cfg) {
    ValidationReport report;
    (void)resolve(cfg, report);
    return report;
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg) {
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    const char* root = std::getenv("MEMLAB_OUTPUT_ROOT");
    const std::filesystem::path base = root && *root ? std::filesystem::path(root) : "memlab-out";
    return base / cfg.experiment;
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t count = std::min(workers, n);
    for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

RunResult run_experiment(const ExperimentConfig& cfg) {
    RunResult result;
    ValidationReport report;
    Resolved resolved = resolve(cfg, report);
    if (!report.ok() || !resolved.plan.execute) {
        result.exit_code = kExitConfig;
        result.errors = report.errors;
        return result;
    }
    result.output_dir = resolve_output_dir(cfg);

    detail::Outputs outputs;
    try {
        outputs = resolved.plan.execute(cfg.seed, cfg.workers);
    } catch (const Error& e) {
        result.exit_code = e.code() == Errc::NonFiniteIterate ? kExitDivergence : kExitConfig;
        result.errors.push_back(std::string(errc_name(e.code())) + ": " + e.what());
        return result;
    }

    std::filesystem::create_directories(result.output_dir);
    nlohmann::json manifest;
    manifest["tool"] = "memlab";
    manifest["version"] = MEMLAB_VERSION;
    manifest["experiment"] = cfg.experiment;
    manifest["seed"] = cfg.seed;
    manifest["params"] = resolved.params;
    manifest["warnings"] = report.warnings;
    nlohmann::json files = nlohmann::json::object();
    auto write = [&](const std::string& name, const std::string& content) {
        std::ofstream out(result.output_dir / name, std::ios::binary);
        out << content;
        if (!out) throw Error(Errc::ConfigParse, "cannot write " + (result.output_dir / name).string());
    };
    for (const auto& [name, content] : outputs.files) {
        write(name, content);
        files[name] = hex64(fingerprint(content));
    }
    std::string summary = "experiment: " + cfg.experiment + "\nseed: " + std::to_string(cfg.seed) + "\n";
    for (const auto& [k, v] : outputs.summary) summary += k + ": " + v + "\n";
    write("summary.txt", summary);
    files["summary.txt"] = hex64(fingerprint(summary));
    manifest["outputs"] = files;
    write("manifest.json", manifest.dump(2) + "\n");
    result.summary = std::move(outputs.summary);
    return result;
}

}  // namespace memlab
