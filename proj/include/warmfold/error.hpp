/*
 * Copyright 2026 The warmfold Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace warmfold {

// Error hierarchy. The three intermediate classes map onto CLI exit codes
// (data = 2, numeric = 3, fingerprint = 4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class FingerprintError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class EmptyInputError : public DataError {
 public:
  using DataError::DataError;
};

class DimensionError : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateSplitError : public DataError {
 public:
  using DataError::DataError;
};

// Raised whenever a degree-weighted formula is asked to handle a user with no
// interactions. Such users must go through the Zero or Mean strategy.
class ColdUserError : public DataError {
 public:
  using DataError::DataError;
};

class CorruptFileError : public DataError {
 public:
  using DataError::DataError;
};

class ChecksumMismatchError : public CorruptFileError {
 public:
  using CorruptFileError::CorruptFileError;
};

class TrainingDivergedError : public NumericError {
 public:
  TrainingDivergedError(int epoch, const std::string& what)
      : NumericError("training diverged at epoch " + std::to_string(epoch) +
                     ": " + what),
        epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

class FoldInDivergedError : public NumericError {
 public:
  FoldInDivergedError(int step, const std::string& what)
      : NumericError("fold-in diverged at step " + std::to_string(step) +
                     ": " + what),
        step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

class PlanBuildError : public NumericError {
 public:
  using NumericError::NumericError;
};

class StalePlanError : public FingerprintError {
 public:
  using FingerprintError::FingerprintError;
};

}  // namespace warmfold
