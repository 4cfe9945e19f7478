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

#include "percept/bitcode.hpp"

namespace percept {

BitCode BitCode::FromBools(std::span<const bool> bits) {
  BitCode code(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) code.set(i);
  }
  return code;
}

BitCode BitCode::FromBools(const std::vector<bool>& bits) {
  BitCode code(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) code.set(i);
  }
  return code;
}

std::vector<bool> BitCode::ToBools() const {
  std::vector<bool> out(size_);
  for (std::size_t i = 0; i < size_; ++i) out[i] = test(i);
  return out;
}

std::vector<std::uint8_t> BitCode::ToBytes() const {
  std::vector<std::uint8_t> out(ByteCount(size_));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(words_[i / 8] >> (8 * (i % 8)));
  }
  return out;
}

bool BitCode::FromBytes(std::span<const std::uint8_t> bytes, std::size_t bits,
                        BitCode* out) {
  if (bytes.size() != ByteCount(bits)) return false;
  BitCode code(bits);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    code.words_[i / 8] |= std::uint64_t{bytes[i]} << (8 * (i % 8));
  }
  if (const std::size_t tail = bits % kWordBits; tail != 0) {
    const std::uint64_t pad_mask = ~((std::uint64_t{1} << tail) - 1);
    if (code.words_.back() & pad_mask) return false;
  }
  *out = std::move(code);
  return true;
}

}  // namespace percept
