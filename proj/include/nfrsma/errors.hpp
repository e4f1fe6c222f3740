// SPDX-License-Identifier: Apache-2.0
//
// nfrsma - near-field rate-splitting ISAC simulation library
// Copyright (C) 2026 The nfrsma Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef NFRSMA_ERRORS_HPP
#define NFRSMA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nfrsma
{
    enum class ErrorCode
    {
        MissingKey,
        InvalidValue,
        ZeroDistance,
        RankDeficient,
        EmptyCommonGroup,
        NotInCommonGroup,
        IndexOutOfRange,
        DimensionMismatch,
        SingularFim,
        TooLarge,
        AllInfeasible,
        IoError
    };

    inline const char *to_string(ErrorCode code)
    {
        switch (code)
        {
        case ErrorCode::MissingKey: return "MissingKey";
        case ErrorCode::InvalidValue: return "InvalidValue";
        case ErrorCode::ZeroDistance: return "ZeroDistance";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::EmptyCommonGroup: return "EmptyCommonGroup";
        case ErrorCode::NotInCommonGroup: return "NotInCommonGroup";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::SingularFim: return "SingularFim";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::AllInfeasible: return "AllInfeasible";
        case ErrorCode::IoError: return "IoError";
        }
        return "Unknown";
    }

    // All library failures are reported through this type; code() identifies the failure class.
    class Error : public std::runtime_error
    {
    public:
        Error(ErrorCode code, const std::string &what)
            : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

        ErrorCode code() const noexcept { return code_; }

    private:
        ErrorCode code_;
    };
} // namespace nfrsma

#endif
