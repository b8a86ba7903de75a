// Copyright (C) 2026 The alvinlab Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace alvinlab {

class Error : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

// Caller violated a precondition (bad sizes, unknown ids, invalid shapes).
class UsageError : public Error {
 public:
    using Error::Error;
};

// Input is well-formed but geometrically degenerate (zero-norm vectors, ...).
class DegenerateInputError : public Error {
 public:
    using Error::Error;
};

class ParseError : public Error {
 public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

 private:
    std::size_t line_;
};

class ConfigError : public Error {
 public:
    using Error::Error;
};

// Numerical failure during training or an aborted experiment round.
class RuntimeFailure : public Error {
 public:
    using Error::Error;
};

}  // namespace alvinlab
