// Copyright 2026 The LQER Authors
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

namespace lqer {

/// Process exit codes shared by every CLI command.
enum class ExitCode : int {
    Success = 0,
    Usage = 1,
    Data = 2,
    Numerical = 3,
};

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
    [[nodiscard]] virtual ExitCode exit_code() const noexcept {
        return ExitCode::Usage;
    }
};

/// Invalid configuration value or out-of-range setting.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Shape, index or geometry mismatch between operands.
class StructuralError : public Error {
  public:
    using Error::Error;
};

/// API called in the wrong order or with the wrong kind of argument.
class UsageError : public Error {
  public:
    using Error::Error;
};

class DataError : public Error {
  public:
    using Error::Error;
    [[nodiscard]] ExitCode exit_code() const noexcept override {
        return ExitCode::Data;
    }
};

class IoError : public Error {
  public:
    using Error::Error;
    [[nodiscard]] ExitCode exit_code() const noexcept override {
        return ExitCode::Data;
    }
};

/// Non-finite loss or activations during training.
class NumericalError : public Error {
  public:
    using Error::Error;
    [[nodiscard]] ExitCode exit_code() const noexcept override {
        return ExitCode::Numerical;
    }
};

} // namespace lqer
