// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "memlab/config.hpp"
#include "memlab/experiments.hpp"

namespace memlab::detail {

struct Outputs {
    std::vector<std::pair<std::string, std::string>> files;    // name, content
    std::vector<std::pair<std::string, std::string>> summary;  // key, value
};

struct Plan {
    std::function<Outputs(std::uint64_t seed, std::size_t workers)> execute;
};

using Planner = Plan (*)(ParamReader&, ValidationReport&);

Plan plan_collapse(ParamReader& r, ValidationReport& report);
Plan plan_barycenter(ParamReader& r, ValidationReport& report);
Plan plan_two_scale(ParamReader& r, ValidationReport& report);
Plan plan_hwang(ParamReader& r, ValidationReport& report);
Plan plan_memorize(ParamReader& r, ValidationReport& report);
Plan plan_estimator_bias(ParamReader& r, ValidationReport& report);
Plan plan_diffusion(ParamReader& r, ValidationReport& report);

}  // namespace memlab::detail
