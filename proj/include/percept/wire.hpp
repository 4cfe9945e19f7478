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

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace percept {

// K x M row-major matrix of float32 activations: one row per sample, one
// column per tracked neuron.
class ActivationMatrix {
 public:
  ActivationMatrix() = default;
  ActivationMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), values_(rows * cols, 0.0f) {}
  ActivationMatrix(std::size_t rows, std::size_t cols,
                   std::vector<float> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  float operator()(std::size_t r, std::size_t c) const {
    return values_[r * cols_ + c];
  }
  float& operator()(std::size_t r, std::size_t c) {
    return values_[r * cols_ + c];
  }

  std::span<const float> row(std::size_t r) const {
    return std::span<const float>(values_).subspan(r * cols_, cols_);
  }
  std::span<float> row(std::size_t r) {
    return std::span<float>(values_).subspan(r * cols_, cols_);
  }
  std::span<const float> values() const { return values_; }

  // Bitwise comparison, so that round-trip checks are bit-exact (and -0.0 is
  // distinguished from 0.0).
  friend bool operator==(const ActivationMatrix& a, const ActivationMatrix& b);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> values_;
};

struct ActivationDump {
  static constexpr std::uint32_t kFormatVersion = 1;

  std::uint32_t format_version = kFormatVersion;
  std::string class_label;
  std::vector<std::string> layer_names;
  std::vector<std::uint64_t> neurons_per_layer;
  std::vector<std::string> sample_ids;
  ActivationMatrix values;
  // Optional producer information (generator, seed, hook point...). Stored
  // under "provenance" in the metadata block.
  nlohmann::json provenance;

  std::size_t sample_count() const { return values.rows(); }
  std::size_t neuron_count() const { return values.cols(); }

  friend bool operator==(const ActivationDump&,
                         const ActivationDump&) = default;
};

// Checks every ActivationDump invariant; throws Error(kValidation) naming
// the offending field, row or column.
void ValidateDump(const ActivationDump& dump);

void WriteDump(const ActivationDump& dump, std::ostream& out);
ActivationDump ReadDump(std::istream& in);

void SaveDump(const ActivationDump& dump, const std::string& path);
ActivationDump LoadDump(const std::string& path);

}  // namespace percept
