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

// Shared framing for every percept artifact file:
//
//   magic            8 bytes, e.g. "PCODEACT"
//   format_version   u32 little-endian
//   metadata_length  u64 little-endian
//   metadata         UTF-8 JSON text, metadata_length bytes
//   payload          raw little-endian binary, runs to end of file
//
// Each artifact type owns its magic and its payload layout.

#include <cstdint>
#include <cstring>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace percept::container {

using Json = nlohmann::json;

inline constexpr std::size_t kMagicSize = 8;
inline constexpr std::size_t kFixedHeaderSize = kMagicSize + 4 + 8;

inline constexpr std::string_view kDumpMagic = "PCODEACT";
inline constexpr std::string_view kHistogramMagic = "PCODEHST";
inline constexpr std::string_view kBankMagic = "PCODEBNK";
inline constexpr std::string_view kCodesMagic = "PCODECOD";
inline constexpr std::string_view kAtlasMagic = "PCODEATL";

struct Frame {
  std::string magic;
  std::uint32_t version = 0;
  Json metadata;
  std::vector<std::uint8_t> payload;
  // Offset of the payload's first byte within the source.
  std::uint64_t payload_offset = 0;
};

// Writes one frame. Throws Error(kIo) carrying the byte offset at which the
// sink failed.
void WriteFrame(std::ostream& out, std::string_view magic,
                std::uint32_t version, const Json& metadata,
                std::span<const std::uint8_t> payload);

// Reads one frame. `expected_magic` may be empty to accept any known magic.
// Throws Error(kFormat) on bad magic, unsupported version, or malformed
// metadata.
Frame ReadFrame(std::istream& in, std::string_view expected_magic,
                std::uint32_t supported_version);

// Reads only the fixed header and metadata; used by `percept info`.
Frame ReadHeader(std::istream& in);

class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) { PutLe(v); }
  void u64(std::uint64_t v) { PutLe(v); }
  void f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    PutLe(bits);
  }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    PutLe(bits);
  }
  void raw(std::span<const std::uint8_t> data) {
    bytes_.insert(bytes_.end(), data.begin(), data.end());
  }
  void reserve(std::size_t n) { bytes_.reserve(n); }

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

 private:
  template <typename U>
  void PutLe(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }

  std::vector<std::uint8_t> bytes_;
};

// Bounds-checked little-endian reader. Short reads throw
// Error(kLengthMismatch).
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(GetLe<std::uint8_t>()); }
  std::uint32_t u32() { return GetLe<std::uint32_t>(); }
  std::uint64_t u64() { return GetLe<std::uint64_t>(); }
  float f32() {
    const std::uint32_t bits = GetLe<std::uint32_t>();
    float v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  double f64() {
    const std::uint64_t bits = GetLe<std::uint64_t>();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  std::span<const std::uint8_t> raw(std::size_t n) {
    Require(n);
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t position() const { return pos_; }

 private:
  void Require(std::size_t n) const;

  template <typename U>
  U GetLe() {
    Require(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<U>(bytes_[pos_ + i]) << (8 * i));
    }
    pos_ += sizeof(U);
    return v;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

// Helpers for reading/writing whole files; both throw Error(kIo).
void WriteFile(const std::string& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> ReadFile(const std::string& path);

}  // namespace percept::container
