// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0
//
// Error codes shared by every module.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace memlab {

enum class Errc {
    NegativeWeight,
    ZeroMass,
    IndexOutOfRange,
    SupportMismatch,
    ParamOutOfRange,
    DimensionMismatch,
    NotIrreducible,
    NotDifferentiable,
    NonFiniteIterate,
    NotImplementedForPositiveA,
    StateSpaceTooLarge,
    Mu0NotRepresentable,
    DegenerateVariance,
    NoBranchMetadata,
    OverlappingRegions,
    NonPositiveEigenvalue,
    ConfigParse,
    UnknownExperiment,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

inline std::string_view errc_name(Errc code) {
    switch (code) {
    case Errc::NegativeWeight: return "NegativeWeight";
    case Errc::ZeroMass: return "ZeroMass";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::SupportMismatch: return "SupportMismatch";
    case Errc::ParamOutOfRange: return "ParamOutOfRange";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NotIrreducible: return "NotIrreducible";
    case Errc::NotDifferentiable: return "NotDifferentiable";
    case Errc::NonFiniteIterate: return "NonFiniteIterate";
    case Errc::NotImplementedForPositiveA: return "NotImplementedForPositiveA";
    case Errc::StateSpaceTooLarge: return "StateSpaceTooLarge";
    case Errc::Mu0NotRepresentable: return "Mu0NotRepresentable";
    case Errc::DegenerateVariance: return "DegenerateVariance";
    case Errc::NoBranchMetadata: return "NoBranchMetadata";
    case Errc::OverlappingRegions: return "OverlappingRegions";
    case Errc::NonPositiveEigenvalue: return "NonPositiveEigenvalue";
    case Errc::ConfigParse: return "ConfigParse";
    case Errc::UnknownExperiment: return "UnknownExperiment";
    }
    return "Unknown";
}

}  // namespace memlab
