// Copyright 2026 The AWE Toolkit Authors.
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

#ifndef AWE_ERROR_H_
#define AWE_ERROR_H_

#include <stdexcept>
#include <string>

namespace awe {

// Exception hierarchy. The CLI maps each class onto a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const { return 2; }
};

// Bad command line, unknown config key, missing mandatory input.
class UsageError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 1; }
};

// Malformed or inconsistent files, out-of-range references.
class DataError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 2; }
};

// Non-finite loss or gradient during training.
class NumericalError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 3; }
};

}  // namespace awe

#endif  // AWE_ERROR_H_
