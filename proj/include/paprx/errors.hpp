// SPDX-License-Identifier: Apache-2.0
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

#pragma once

#include <stdexcept>
#include <string>

namespace paprx {

/// Invalid argument value (negative variance, radius, unsupported alphabet, ...).
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// Array length or shape mismatch, including non-power-of-two transform sizes.
class SizingError : public std::length_error {
public:
    explicit SizingError(const std::string& what) : std::length_error(what) {}
};

/// Input fails a structural check (e.g. a matrix that should be Hermitian is not).
class ValidationError : public std::domain_error {
public:
    explicit ValidationError(const std::string& what) : std::domain_error(what) {}
};

/// A metric whose denominator is zero.
class UndefinedMetric : public std::domain_error {
public:
    explicit UndefinedMetric(const std::string& what) : std::domain_error(what) {}
};

/// Numerical failure inside a solver: singular system, divergence.
class SolverFailure : public std::runtime_error {
public:
    explicit SolverFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace paprx
