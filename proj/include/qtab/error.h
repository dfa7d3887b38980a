// Copyright 2026 The qtab Authors. All Rights Reserved.
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

#ifndef QTAB_ERROR_H_
#define QTAB_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qtab {

// Base class for every error the library reports.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed, truncated or unsupported JPEG stream.
class DecodeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Manifest or dataset problems. `line` is 1-based, 0 when not applicable.
class DatasetError : public Error {
 public:
  DatasetError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Raised when an evaluator stops answering. `completed` counts the images
// that were scored before the failure.
class EvaluatorError : public Error {
 public:
  EvaluatorError(const std::string& what, std::size_t completed, std::size_t total)
      : Error(what + " (" + std::to_string(completed) + "/" + std::to_string(total) +
              " images scored)"),
        completed_(completed),
        total_(total) {}
  std::size_t completed() const { return completed_; }
  std::size_t total() const { return total_; }

 private:
  std::size_t completed_;
  std::size_t total_;
};

// Numerical failure: rank-deficient fit, non-PD covariance, degenerate test.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace qtab

#endif  // QTAB_ERROR_H_
