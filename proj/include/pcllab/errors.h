// Copyright 2026 The pcllab Authors.
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

#ifndef PCLLAB_ERRORS_H_
#define PCLLAB_ERRORS_H_

#include <stdexcept>
#include <string>

namespace pcllab {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes are incompatible.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation (log of <= 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Input too close to zero for a normalization to be meaningful.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Caller violated a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Checkpoint could not be restored. `reason()` distinguishes the failure.
class LoadError : public Error {
 public:
  enum class Reason { kParse, kSchemaVersion, kShapeMismatch, kMissingField };

  LoadError(Reason reason, const std::string& what)
      : Error(what), reason_(reason) {}

  Reason reason() const { return reason_; }

 private:
  Reason reason_;
};

}  // namespace pcllab

#endif  // PCLLAB_ERRORS_H_
