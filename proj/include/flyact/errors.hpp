/*
 * Copyright 2026 The FlyAct Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace flyact {

/// Base of every failure the library reports.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad or missing input: files, manifests, dimensions, violated preconditions.
/// The CLI maps these to exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numeric stage failed (factorization, residual check). Exit code 3.
class NumericError : public Error {
 public:
  using Error::Error;
};

// video-io
class EmptyDirectory : public DataError { public: using DataError::DataError; };
class DimensionMismatch : public DataError { public: using DataError::DataError; };
class UnsupportedFormat : public DataError { public: using DataError::DataError; };
class OutOfRange : public DataError { public: using DataError::DataError; };
class DuplicateClipId : public DataError { public: using DataError::DataError; };
class InsufficientSamples : public DataError { public: using DataError::DataError; };
class BadDimensions : public DataError { public: using DataError::DataError; };

/// CSV or config parse failure; carries the 1-based line number.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, int line)
      : DataError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// stip-detect
class FrameTooSmall : public DataError { public: using DataError::DataError; };
class TooFewFrames : public DataError { public: using DataError::DataError; };
class BadBlockSize : public DataError { public: using DataError::DataError; };

// sift3d
class VolumeTooSmall : public DataError { public: using DataError::DataError; };
class SupportOutOfBounds : public DataError { public: using DataError::DataError; };
class LowContrast : public DataError { public: using DataError::DataError; };
class DegenerateBin : public DataError { public: using DataError::DataError; };

// signature
class NoFeatures : public DataError { public: using DataError::DataError; };

// srkda
class NonFiniteInput : public DataError { public: using DataError::DataError; };
class DegenerateData : public DataError { public: using DataError::DataError; };
class MissingClass : public DataError { public: using DataError::DataError; };
class OracleTooLarge : public DataError { public: using DataError::DataError; };
class FactorizationFailure : public NumericError { public: using NumericError::NumericError; };

// classify
class EmptyTestSet : public DataError { public: using DataError::DataError; };
class UnknownLabel : public DataError { public: using DataError::DataError; };

// cli / persistence
class ConfigError : public DataError { public: using DataError::DataError; };
class VersionMismatch : public DataError { public: using DataError::DataError; };
class CorruptFile : public DataError { public: using DataError::DataError; };

}  // namespace flyact
