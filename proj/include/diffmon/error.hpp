// Copyright 2026 The diffmon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace diffmon {

enum class ErrorCode {
    // linalg
    NotHermitian,
    NotPSD,
    DimensionMismatch,
    // reps
    OffDiagonal,
    EfficiencyOutOfRange,
    ParameterOutOfRange,
    NotUnitary,
    NotOrthogonal,
    SumNotInH,
    OffBlockAsymmetric,
    InvalidEfficientPart,
    InternalInconsistency,
    NotL1,
    ZeroM,
    NoRoot,
    // dynamics / sme
    StateInvalid,
    WeightUnderflow,
    NonPositiveLag,
    NoCompatibleT,
    NotPure,
    InvalidArgument,
    // stats
    NoSnapshots,
    InsufficientData,
    // input files
    ParseError,
    SchemaError,
    ValidationError,
    IoError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NotHermitian: return "NotHermitian";
        case ErrorCode::NotPSD: return "NotPSD";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::OffDiagonal: return "OffDiagonal";
        case ErrorCode::EfficiencyOutOfRange: return "EfficiencyOutOfRange";
        case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
        case ErrorCode::NotUnitary: return "NotUnitary";
        case ErrorCode::NotOrthogonal: return "NotOrthogonal";
        case ErrorCode::SumNotInH: return "SumNotInH";
        case ErrorCode::OffBlockAsymmetric: return "OffBlockAsymmetric";
        case ErrorCode::InvalidEfficientPart: return "InvalidEfficientPart";
        case ErrorCode::InternalInconsistency: return "InternalInconsistency";
        case ErrorCode::NotL1: return "NotL1";
        case ErrorCode::ZeroM: return "ZeroM";
        case ErrorCode::NoRoot: return "NoRoot";
        case ErrorCode::StateInvalid: return "StateInvalid";
        case ErrorCode::WeightUnderflow: return "WeightUnderflow";
        case ErrorCode::NonPositiveLag: return "NonPositiveLag";
        case ErrorCode::NoCompatibleT: return "NoCompatibleT";
        case ErrorCode::NotPure: return "NotPure";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::NoSnapshots: return "NoSnapshots";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Domain error carrying a machine-readable code next to the message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace diffmon
