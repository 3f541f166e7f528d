// Copyright 2026 the qgate authors
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

namespace qgate {

/// Base class for all library errors. Subclasses carry a stable name()
/// used in machine-readable error reports.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& what)
        : std::runtime_error(what), name_(std::move(name)) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

#define QGATE_DEFINE_ERROR(NAME)                                     \
    class NAME : public Error {                                      \
    public:                                                          \
        explicit NAME(const std::string& what) : Error(#NAME, what) {} \
    }

QGATE_DEFINE_ERROR(DimensionMismatch);
QGATE_DEFINE_ERROR(NonUnitaryInput);
QGATE_DEFINE_ERROR(LeakageDominates);
QGATE_DEFINE_ERROR(InvariantViolation);
QGATE_DEFINE_ERROR(FluxOutOfRange);
QGATE_DEFINE_ERROR(TimeOutOfRange);
QGATE_DEFINE_ERROR(ResonantDenominator);
QGATE_DEFINE_ERROR(IntegrationFailure);
QGATE_DEFINE_ERROR(IllConditionedInversion);
QGATE_DEFINE_ERROR(InvalidNoise);
QGATE_DEFINE_ERROR(NoOscillationFound);
QGATE_DEFINE_ERROR(FitFailure);
QGATE_DEFINE_ERROR(InsufficientData);
QGATE_DEFINE_ERROR(BackendError);
QGATE_DEFINE_ERROR(ConfigError);
QGATE_DEFINE_ERROR(NegativeSigma);

#undef QGATE_DEFINE_ERROR

}  // namespace qgate
