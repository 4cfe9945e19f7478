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

#include "percept/error.hpp"

namespace percept {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return "io";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kLengthMismatch: return "length_mismatch";
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kInsufficientData: return "insufficient_data";
    case ErrorKind::kDimension: return "dimension";
    case ErrorKind::kComparison: return "comparison";
    case ErrorKind::kParameter: return "parameter";
    case ErrorKind::kConsistency: return "consistency";
    case ErrorKind::kDuplicate: return "duplicate";
    case ErrorKind::kCorruption: return "corruption";
    case ErrorKind::kMetadata: return "metadata";
    case ErrorKind::kSpec: return "spec";
  }
  return "unknown";
}

}  // namespace percept
