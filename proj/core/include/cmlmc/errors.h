// Copyright 2026 The cmlmc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CMLMC_ERRORS_H_
#define CMLMC_ERRORS_H_

#include <stdexcept>
#include <string>

namespace cmlmc {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller violated a documented precondition (sizes, counts, ranges).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Malformed input text: CSV cells, config values, schema lines.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that breaks a data contract (e.g. non-binary value in a
// binary column, missing cell).
class SchemaError : public Error {
 public:
  using Error::Error;
};

// An iterative solver hit its iteration cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_change)
      : Error(what), last_change_(last_change) {}
  double last_change() const { return last_change_; }

 private:
  double last_change_;
};

// An estimator cannot produce a result on the data it was given (empty
// treatment arm, unsupported learner, degenerate neighbourhood).
class EstimationError : public Error {
 public:
  using Error::Error;
};

}  // namespace cmlmc

#endif  // CMLMC_ERRORS_H_
