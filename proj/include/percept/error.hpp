/*
 * Copyright 2026 The Percept Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
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
#include <string_view>

namespace percept {

enum class ErrorKind {
  kIo,
  kFormat,
  kLengthMismatch,
  kValidation,
  kInsufficientData,
  kDimension,
  kComparison,
  kParameter,
  kConsistency,
  kDuplicate,
  kCorruption,
  kMetadata,
  kSpec,
};

std::string_view ErrorKindName(ErrorKind kind);

// All recoverable failures in the library are reported as percept::Error.
// The kind is stable and machine-readable; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace percept
