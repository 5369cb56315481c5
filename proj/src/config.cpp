// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0

#include "memlab/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "memlab/error.hpp"

namespace memlab {

namespace {

std::string mark_text(const YAML::Mark& m) {
    if (m.is_null()) return "";
    return "line " + std::to_string(m.line + 1) + ", column " + std::to_string(m.column + 1) + ": ";
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& source) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw Error(Errc::ConfigParse, source.string() + ": " + mark_text(e.mark) + e.msg);
    }
    ExperimentConfig cfg;
    cfg.source = source;
    if (!root.IsMap()) {
        throw Error(Errc::ConfigParse, source.string() + ": " + mark_text(root.Mark()) + "top level must be a mapping");
    }
    nlohmann::json scratch;
    ParamReader top(root, "", &cfg.errors, &scratch);
    cfg.experiment = top.text("experiment");
    cfg.seed = top.count("seed");
    cfg.workers = static_cast<std::size_t>(top.count("workers", 1));
    if (cfg.workers == 0) top.error("workers", "must be >= 1");
    cfg.output_dir = top.text("output_dir", std::string{});
    if (top.has("params")) {
        cfg.params = root["params"];
        if (!cfg.params.IsMap()) top.error("params", "must be a mapping");
        (void)top.child("params", true);
    } else {
        cfg.params = YAML::Node(YAML::NodeType::Map);
    }
    // `params` is consumed by the experiment; only report other unknown keys.
    top.finish();
    for (auto& e : cfg.errors) e = source.string() + ": " + e;
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::ConfigParse, path.string() + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

ParamReader::ParamReader(YAML::Node node, std::string path, std::vector<std::string>* errors,
                         nlohmann::json* resolved)
    : node_(std::move(node)), path_(std::move(path)), errors_(errors), resolved_(resolved) {
    if (resolved_ && !resolved_->is_object()) *resolved_ = nlohmann::json::object();
}

std::string ParamReader::where(const YAML::Node& n) const { return mark_text(n.Mark()); }

void ParamReader::error(const std::string& key, const std::string& message) {
    YAML::Node n = node_.IsMap() && node_[key] ? node_[key] : node_;
    errors_->push_back(where(n) + field(key) + ": " + message);
}

bool ParamReader::has(const std::string& key) const { return node_.IsMap() && node_[key].IsDefined(); }

YAML::Node ParamReader::get(const std::string& key) {
    if (std::find(used_.begin(), used_.end(), key) == used_.end()) used_.push_back(key);
    if (!node_.IsMap()) return YAML::Node();
    const YAML::Node& cnode = node_;
    return cnode[key];
}

double ParamReader::number(const std::string& key, std::optional<double> fallback) {
    YAML::Node n = get(key);
    double v = 0.0;
    if (!n) {
        if (!fallback) {
            error(key, "missing required field");
        } else {
            v = *fallback;
        }
    } else {
        try {
            v = n.as<double>();
        } catch (const YAML::Exception&) {
            error(key, "expected a number");
        }
    }
    if (resolved_) (*resolved_)[key] = v;
    return v;
}

std::uint64_t ParamReader::count(const std::string& key, std::optional<std::uint64_t> fallback) {
    YAML::Node n = get(key);
    std::uint64_t v = 0;
    if (!n) {
        if (!fallback) {
            error(key, "missing required field");
        } else {
            v = *fallback;
        }
    } else {
        try {
            // Accept 1e6 style counts as long as they are integral.
            const double d = n.as<double>();
            if (d < 0.0 || d != static_cast<double>(static_cast<std::uint64_t>(d))) {
                v = n.as<std::uint64_t>();
            } else {
                v = static_cast<std::uint64_t>(d);
                if (d >= 9007199254740992.0) v = n.as<std::uint64_t>();
            }
        } catch (const YAML::Exception&) {
            error(key, "expected a non-negative integer");
        }
    }
    if (resolved_) (*resolved_)[key] = v;
    return v;
}

std::string ParamReader::text(const std::string& key, std::optional<std::string> fallback) {
    YAML::Node n = get(key);
    std::string v;
    if (!n) {
        if (!fallback) {
            error(key, "missing required field");
        } else {
            v = *fallback;
        }
    } else if (!n.IsScalar()) {
        error(key, "expected a string");
    } else {
        v = n.as<std::string>();
    }
    if (resolved_) (*resolved_)[key] = v;
    return v;
}

bool ParamReader::flag(const std::string& key, std::optional<bool> fallback) {
    YAML::Node n = get(key);
    bool v = false;
    if (!n) {
        if (!fallback) {
            error(key, "missing required field");
        } else {
            v = *fallback;
        }
    } else {
        try {
            v = n.as<bool>();
        } catch (const YAML::Exception&) {
            error(key, "expected true or false");
        }
    }
    if (resolved_) (*resolved_)[key] = v;
    return v;
}

std::vector<double> ParamReader::numbers(const std::string& key, std::optional<std::vector<double>> fallback) {
    YAML::Node n = get(key);
    std::vector<double> v;
    if (!n) {
        if (!fallback) {
            error(key, "missing required field");
        } else {
            v = *fallback;
        }
    } else if (!n.IsSequence()) {
        error(key, "expected a list of numbers");
    } else {
        try {
            for (const auto& item : n) v.push_back(item.as<double>());
        } catch (const YAML::Exception&) {
            error(key, "expected a list of numbers");
            v.clear();
        }
        if (v.empty()) error(key, "list must not be empty");
    }
    if (resolved_) (*resolved_)[key] = v;
    return v;
}

ParamReader ParamReader::child(const std::string& key, bool optional) {
    YAML::Node n = get(key);
    nlohmann::json* sub = nullptr;
    if (resolved_) {
        (*resolved_)[key] = nlohmann::json::object();
        sub = &(*resolved_)[key];
    }
    if (!n) {
        if (!optional) error(key, "missing required section");
        return ParamReader(YAML::Node(YAML::NodeType::Map), field(key), errors_, sub);
    }
    if (!n.IsMap()) {
        error(key, "expected a mapping");
        return ParamReader(YAML::Node(YAML::NodeType::Map), field(key), errors_, sub);
    }
    return ParamReader(n, field(key), errors_, sub);
}

void ParamReader::finish() {
    if (!node_.IsMap()) return;
    for (const auto& kv : node_) {
        const auto key = kv.first.as<std::string>();
        if (std::find(used_.begin(), used_.end(), key) == used_.end()) {
            errors_->push_back(where(kv.first) + field(key) + ": unknown field");
        }
    }
}

LandscapePtr landscape_from(ParamReader r) {
    const std::string name = r.text("name");
    LandscapePtr out;
    const std::size_t before = r.errors().size();
    auto build = [&](auto make) {
        r.finish();
        if (r.errors().size() != before) return;
        try {
            out = make();
        } catch (const Error& e) {
            r.error("name", e.what());
        }
    };
    if (name == "QuadraticTracking") {
        QuadraticTrackingParams p;
        p.c = r.number("c");
        p.epsilon = r.number("epsilon");
        p.confinement = r.number("confinement");
        p.target = r.number("target");
        build([&] { return make_quadratic_tracking(p); });
    } else if (name == "SymmetricDoubleWell") {
        SymmetricDoubleWellParams p;
        p.height = r.number("height");
        p.half_distance = r.number("half_distance");
        build([&] { return make_symmetric_double_well(p); });
    } else if (name == "CurvatureAsymmetricWell") {
        CurvatureAsymmetricWellParams p;
        p.c1 = r.number("c1");
        p.c2 = r.number("c2");
        p.join_level = r.number("join_level");
        p.join_width = r.number("join_width");
        build([&] { return make_curvature_asymmetric_well(p); });
    } else if (name == "MemorizationDrift") {
        MemorizationDriftParams p;
        p.strength = r.number("strength");
        p.kappa = r.number("kappa");
        p.nu = r.number("nu");
        p.epsilon = r.number("epsilon");
        build([&] { return make_memorization_drift(p); });
    } else if (name == "Power") {
        const auto power = static_cast<int>(r.count("power"));
        const double offset = r.number("offset");
        const auto dim = static_cast<std::size_t>(r.count("dim"));
        build([&] { return make_power(power, offset, dim); });
    } else if (name == "SeparableQuadratic") {
        auto coeffs = r.numbers("coeffs");
        build([&] { return make_separable_quadratic(coeffs); });
    } else if (!name.empty()) {
        r.error("name", "unknown landscape '" + name + "'");
    }
    return out;
}

ChainPtr chain_from(ParamReader r) {
    const std::string name = r.text("name");
    ChainPtr out;
    const std::size_t before = r.errors().size();
    auto build = [&](auto make) {
        r.finish();
        if (r.errors().size() != before) return;
        try {
            out = make();
        } catch (const Error& e) {
            r.error("name", e.what());
        }
    };
    if (name == "flip") {
        const double alpha = r.number("alpha"), beta = r.number("beta");
        build([&] { return make_flip_chain(alpha, beta); });
    } else if (name == "iid") {
        auto w = r.numbers("weights");
        build([&] { return make_iid_chain(w); });
    } else if (name == "logistic") {
        LogisticChainParams p;
        p.stay = r.number("stay");
        p.beta_x = r.number("beta_x");
        p.beta_y = r.number("beta_y");
        p.bias = r.number("bias");
        build([&] { return make_logistic_chain(p); });
    } else if (name == "memorization") {
        const double stay = r.number("stay"), beta = r.number("beta");
        build([&] { return make_memorization_chain(stay, beta); });
    } else if (!name.empty()) {
        r.error("name", "unknown chain '" + name + "'");
    }
    return out;
}

StepSchedule schedule_from(ParamReader r) {
    const std::string kind = r.text("kind");
    StepSchedule s;
    if (kind == "constant") {
        s = StepSchedule::constant(r.number("a"), r.number("epsilon"));
        if (!(s.a > 0.0)) r.error("a", "must be positive");
    } else if (kind == "decreasing") {
        const double c_a = r.number("c_a"), c_b = r.number("c_b"), q = r.number("q"), p = r.number("p");
        s = StepSchedule::decreasing(c_a, c_b, q, p);
        if (!(c_a > 0.0)) r.error("c_a", "must be positive");
        if (!(c_b > 0.0)) r.error("c_b", "must be positive");
    } else if (!kind.empty()) {
        r.error("kind", "expected 'constant' or 'decreasing'");
    }
    r.finish();
    return s;
}

SgdMode mode_from(const std::string& name, ParamReader& r, const std::string& key) {
    if (name == "instantaneous") return SgdMode::Instantaneous;
    if (name == "averaged_full") return SgdMode::AveragedFull;
    if (name == "averaged_frozen") return SgdMode::AveragedFrozen;
    r.error(key, "expected instantaneous, averaged_full or averaged_frozen");
    return SgdMode::Instantaneous;
}

}  // namespace memlab
