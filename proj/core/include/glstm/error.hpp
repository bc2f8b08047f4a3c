// Copyright 2026 The gLSTM Captioner Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace glstm {

// Process exit codes double as error families so harnesses can assert the
// failure mode of a run.
enum class ErrorFamily : int {
  kBadInput = 2,
  kNumeric = 3,
  kIo = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorFamily family, const std::string& what)
      : std::runtime_error(what), family_(family) {}
  ErrorFamily family() const noexcept { return family_; }
  int exit_code() const noexcept { return static_cast<int>(family_); }

 private:
  ErrorFamily family_;
};

class BadInputError : public Error {
 public:
  explicit BadInputError(const std::string& what)
      : Error(ErrorFamily::kBadInput, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorFamily::kNumeric, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorFamily::kIo, what) {}
};

// Operand shapes do not conform.
class ShapeError : public BadInputError {
 public:
  using BadInputError::BadInputError;
};

// A data record disagrees with its declared dimension.
class DimensionMismatchError : public BadInputError {
 public:
  using BadInputError::BadInputError;
};

class MalformedInputError : public BadInputError {
 public:
  using BadInputError::BadInputError;
};

class MissingFileError : public IoError {
 public:
  using IoError::IoError;
};

// Wrong magic bytes or an unsupported container version.
class VersionError : public IoError {
 public:
  using IoError::IoError;
};

class ChecksumError : public IoError {
 public:
  using IoError::IoError;
};

class TruncatedFileError : public IoError {
 public:
  using IoError::IoError;
};

// Symmetric positive-definite factorization failed.
class DecompositionError : public NumericError {
 public:
  using NumericError::NumericError;
};

class DivergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace glstm
