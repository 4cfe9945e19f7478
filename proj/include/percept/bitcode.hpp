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

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace percept {

// Fixed-length packed bit vector. Bit i lives in word i / 64 at bit position
// i % 64. Pad bits past size() in the last word are always zero.
class BitCode {
 public:
  static constexpr std::size_t kWordBits = 64;

  BitCode() = default;
  explicit BitCode(std::size_t size)
      : size_(size), words_(WordCount(size), 0) {}

  static std::size_t WordCount(std::size_t bits) {
    return (bits + kWordBits - 1) / kWordBits;
  }
  static std::size_t ByteCount(std::size_t bits) { return (bits + 7) / 8; }

  static BitCode FromBools(std::span<const bool> bits);
  static BitCode FromBools(const std::vector<bool>& bits);

  std::size_t size() const { return size_; }
  std::span<const std::uint64_t> words() const { return words_; }

  bool test(std::size_t i) const {
    return (words_[i / kWordBits] >> (i % kWordBits)) & 1u;
  }
  void set(std::size_t i, bool value = true) {
    const std::uint64_t mask = std::uint64_t{1} << (i % kWordBits);
    if (value) {
      words_[i / kWordBits] |= mask;
    } else {
      words_[i / kWordBits] &= ~mask;
    }
  }

  std::size_t popcount() const {
    std::size_t total = 0;
    for (std::uint64_t w : words_) total += std::popcount(w);
    return total;
  }

  std::vector<bool> ToBools() const;

  // Little-endian byte image truncated to ByteCount(size()) bytes.
  std::vector<std::uint8_t> ToBytes() const;
  // Inverse of ToBytes. Returns false (leaving *out untouched) when any pad
  // bit past `bits` is set.
  static bool FromBytes(std::span<const std::uint8_t> bytes, std::size_t bits,
                        BitCode* out);

  friend bool operator==(const BitCode&, const BitCode&) = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace percept
