// Copyright 2026 The skyq Authors.
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

#ifndef SKYQ_ERROR_H_
#define SKYQ_ERROR_H_

#include <stdexcept>
#include <string>

namespace skyq {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An argument is outside the domain of the operation (latitude > 90, level > 24, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed query text or ingest record. Carries a 1-based position.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, int column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Query is syntactically valid but cannot be planned (unknown attribute, type
// mismatch). Carries the source position when one is known (line 0 if not).
class PlanError : public Error {
 public:
  explicit PlanError(const std::string& message) : Error(message) {}
  PlanError(const std::string& message, int line, int column)
      : Error(line > 0 ? std::to_string(line) + ":" + std::to_string(column) + ": " + message
                       : message),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_ = 0;
  int column_ = 0;
};

// Invalid engine configuration, e.g. a hash-join bucket level too fine for the radius.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Load conflicts with existing catalog content (duplicate obj_id).
class ConflictError : public Error {
 public:
  using Error::Error;
};

// On-disk data failed validation (bad magic, checksum, sizes).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace skyq

#endif  // SKYQ_ERROR_H_
