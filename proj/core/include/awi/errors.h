// Copyright 2026 The AWI Authors. All Rights Reserved.
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
// =============================================================================

#ifndef AWI_ERRORS_H_
#define AWI_ERRORS_H_

#include <stdexcept>
#include <string>

namespace awi {

// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Argument outside the domain of an operation (empty input, bad range).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Token id outside the vocabulary or embedding table.
class VocabularyError : public Error {
 public:
  using Error::Error;
};

// Inconsistent model or layer configuration.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

// Malformed corpus record or dialogue structure.
class FormatError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf encountered in a loss or numeric oracle.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Unreadable, truncated or inconsistent checkpoint.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace awi

#endif  // AWI_ERRORS_H_
