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

#include "percept/container.hpp"

#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "percept/error.hpp"

namespace percept::container {
namespace {

constexpr std::string_view kKnownMagics[] = {
    kDumpMagic, kHistogramMagic, kBankMagic, kCodesMagic, kAtlasMagic};

class CountingWriter {
 public:
  explicit CountingWriter(std::ostream& out) : out_(out) {}

  void Write(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    if (!out_) {
      throw Error(ErrorKind::kIo, "write failed at byte offset " +
                                      std::to_string(offset_));
    }
    offset_ += n;
  }

 private:
  std::ostream& out_;
  std::uint64_t offset_ = 0;
};

Frame ReadFixedHeader(std::istream& in) {
  char head[kFixedHeaderSize];
  in.read(head, kFixedHeaderSize);
  const auto got = static_cast<std::size_t>(in.gcount());
  if (got < kMagicSize) throw Error(ErrorKind::kFormat, "file too short for a percept header");
  Frame frame;
  frame.magic.assign(head, kMagicSize);
  bool known = false;
  for (auto m : kKnownMagics) known = known || frame.magic == m;
  if (!known) throw Error(ErrorKind::kFormat, "bad magic bytes");
  // A known magic followed by a cut header is a truncated file.
  if (got != kFixedHeaderSize) {
    throw Error(ErrorKind::kLengthMismatch, "header truncated after " + std::to_string(got) + " bytes");
  }

  ByteReader reader(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(head) + kMagicSize,
      kFixedHeaderSize - kMagicSize));
  frame.version = reader.u32();
  const std::uint64_t meta_len = reader.u64();
  if (meta_len > (std::uint64_t{1} << 32)) {
    throw Error(ErrorKind::kFormat, "implausible metadata length " +
                                        std::to_string(meta_len));
  }
  std::string meta(meta_len, '\0');
  in.read(meta.data(), static_cast<std::streamsize>(meta_len));
  if (in.gcount() != static_cast<std::streamsize>(meta_len)) {
    throw Error(ErrorKind::kLengthMismatch, "metadata block truncated");
  }
  frame.metadata = Json::parse(meta, nullptr, /*allow_exceptions=*/false);
  if (frame.metadata.is_discarded() || !frame.metadata.is_object()) {
    throw Error(ErrorKind::kFormat, "metadata block is not a JSON object");
  }
  frame.payload_offset = kFixedHeaderSize + meta_len;
  return frame;
}

}  // namespace

void ByteReader::Require(std::size_t n) const {
  if (bytes_.size() - pos_ < n) {
    throw Error(ErrorKind::kLengthMismatch,
                "payload truncated: need " + std::to_string(n) +
                    " bytes at offset " + std::to_string(pos_) + ", have " +
                    std::to_string(bytes_.size() - pos_));
  }
}

void WriteFrame(std::ostream& out, std::string_view magic,
                std::uint32_t version, const Json& metadata,
                std::span<const std::uint8_t> payload) {
  const std::string meta = metadata.dump();
  ByteWriter head;
  head.raw(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(magic.data()), kMagicSize));
  head.u32(version);
  head.u64(meta.size());

  CountingWriter writer(out);
  writer.Write(head.bytes().data(), head.bytes().size());
  writer.Write(meta.data(), meta.size());
  writer.Write(payload.data(), payload.size());
  out.flush();
  if (!out) throw Error(ErrorKind::kIo, "flush failed");
}

Frame ReadHeader(std::istream& in) { return ReadFixedHeader(in); }

Frame ReadFrame(std::istream& in, std::string_view expected_magic,
                std::uint32_t supported_version) {
  Frame frame = ReadFixedHeader(in);
  if (!expected_magic.empty() && frame.magic != expected_magic) {
    throw Error(ErrorKind::kFormat, "expected a " + std::string(expected_magic) +
                                        " file, found " + frame.magic);
  }
  if (frame.version != supported_version) {
    throw Error(ErrorKind::kFormat,
                "unsupported format version " + std::to_string(frame.version) +
                    " (expected " + std::to_string(supported_version) + ")");
  }
  frame.payload.assign(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
  return frame;
}

void WriteFile(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "write to " + path + " failed");
}

std::vector<std::uint8_t> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace percept::container
