// Copyright 2026 The edgepress authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace edgepress {

// Exit-code mapping used by the CLI: usage errors -> 1, data errors -> 2,
// numeric errors -> 3.

class ShapeError : public std::invalid_argument {
 public:
  explicit ShapeError(const std::string& msg) : std::invalid_argument(msg) {}
};

class ParamError : public std::invalid_argument {
 public:
  explicit ParamError(const std::string& msg) : std::invalid_argument(msg) {}
};

class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public DataError {
 public:
  explicit ParseError(const std::string& msg) : DataError(msg) {}
  ParseError(const std::string& msg, size_t byte_offset)
      : DataError(msg + " (at byte " + std::to_string(byte_offset) + ")"),
        offset(byte_offset) {}
  size_t offset = 0;
};

class LeakageError : public DataError {
 public:
  explicit LeakageError(const std::string& msg) : DataError(msg) {}
};

class MetricError : public DataError {
 public:
  explicit MetricError(const std::string& msg) : DataError(msg) {}
};

class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace edgepress
