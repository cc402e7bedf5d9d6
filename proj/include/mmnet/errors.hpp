/**
 * Copyright 2026 The mmnet authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef MMNET_ERRORS_HPP_
#define MMNET_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace mmnet {

/// Base class of every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Extent/rank mismatches and invalid tensor geometry.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// An operation produced a non-finite value.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Invalid hyperparameters or inconsistent run settings.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed serialized data (weight container, CSV, config file).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Weight container: wrong magic bytes.
class BadMagicError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Weight container: unsupported format version.
class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Weight container: file ends before the declared payload.
class TruncationError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Weight container: the same entry name appears twice.
class DuplicateNameError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Filesystem failures (open/read/write).
class IoError : public Error {
 public:
  using Error::Error;
};

/// A requested key (species, genus, parameter name) does not exist.
class LookupError : public Error {
 public:
  using Error::Error;
};

}  // namespace mmnet

#endif  // MMNET_ERRORS_HPP_
