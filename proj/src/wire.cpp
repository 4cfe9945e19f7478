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

#include "percept/wire.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "percept/container.hpp"
#include "percept/error.hpp"

namespace percept {

using container::ByteReader;
using container::ByteWriter;
using container::Json;

ActivationMatrix::ActivationMatrix(std::size_t rows, std::size_t cols,
                                   std::vector<float> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw Error(ErrorKind::kDimension,
                "activation matrix " + std::to_string(rows_) + "x" +
                    std::to_string(cols_) + " given " +
                    std::to_string(values_.size()) + " values");
  }
}

bool operator==(const ActivationMatrix& a, const ActivationMatrix& b) {
  return a.rows_ == b.rows_ && a.cols_ == b.cols_ &&
         (a.values_.empty() ||
          std::memcmp(a.values_.data(), b.values_.data(),
                      a.values_.size() * sizeof(float)) == 0);
}

void ValidateDump(const ActivationDump& dump) {
  std::uint64_t declared = 0;
  for (std::uint64_t n : dump.neurons_per_layer) {
    if (n == 0) {
      throw Error(ErrorKind::kValidation, "neurons_per_layer entries must be positive");
    }
    declared += n;
  }
  if (dump.layer_names.size() != dump.neurons_per_layer.size()) {
    throw Error(ErrorKind::kValidation,
                "layer_names has " + std::to_string(dump.layer_names.size()) +
                    " entries but neurons_per_layer has " +
                    std::to_string(dump.neurons_per_layer.size()));
  }
  if (declared != dump.neuron_count()) {
    throw Error(ErrorKind::kValidation,
                "neuron count M=" + std::to_string(dump.neuron_count()) +
                    " differs from sum of neurons_per_layer=" +
                    std::to_string(declared));
  }
  if (dump.sample_ids.size() != dump.sample_count()) {
    throw Error(ErrorKind::kValidation,
                "sample_ids has " + std::to_string(dump.sample_ids.size()) +
                    " entries for K=" + std::to_string(dump.sample_count()) +
                    " rows");
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : dump.sample_ids) {
    if (!seen.insert(id).second) {
      throw Error(ErrorKind::kValidation, "duplicate sample_id '" + id + "'");
    }
  }
  for (std::size_t r = 0; r < dump.values.rows(); ++r) {
    for (std::size_t c = 0; c < dump.values.cols(); ++c) {
      if (!std::isfinite(dump.values(r, c))) {
        throw Error(ErrorKind::kValidation,
                    "non-finite activation at row " + std::to_string(r) +
                        ", column " + std::to_string(c));
      }
    }
  }
}

void WriteDump(const ActivationDump& dump, std::ostream& out) {
  ValidateDump(dump);
  Json meta = {
      {"class_label", dump.class_label},
      {"layer_names", dump.layer_names},
      {"neurons_per_layer", dump.neurons_per_layer},
      {"sample_ids", dump.sample_ids},
      {"samples", dump.sample_count()},
      {"neurons", dump.neuron_count()},
  };
  if (!dump.provenance.is_null()) meta["provenance"] = dump.provenance;
  ByteWriter payload;
  payload.reserve(dump.values.values().size() * 4);
  for (float v : dump.values.values()) payload.f32(v);
  container::WriteFrame(out, container::kDumpMagic, dump.format_version, meta,
                        payload.bytes());
}

ActivationDump ReadDump(std::istream& in) {
  container::Frame frame = container::ReadFrame(
      in, container::kDumpMagic, ActivationDump::kFormatVersion);
  ActivationDump dump;
  std::size_t rows = 0;
  std::size_t cols = 0;
  try {
    const Json& meta = frame.metadata;
    dump.format_version = frame.version;
    dump.class_label = meta.at("class_label").get<std::string>();
    dump.layer_names = meta.at("layer_names").get<std::vector<std::string>>();
    dump.neurons_per_layer =
        meta.at("neurons_per_layer").get<std::vector<std::uint64_t>>();
    dump.sample_ids = meta.at("sample_ids").get<std::vector<std::string>>();
    rows = meta.at("samples").get<std::size_t>();
    cols = meta.at("neurons").get<std::size_t>();
    if (auto it = meta.find("provenance"); it != meta.end()) dump.provenance = *it;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("dump metadata: ") + e.what());
  }
  const std::uint64_t expected = std::uint64_t{rows} * cols * 4;
  if (frame.payload.size() != expected) {
    throw Error(ErrorKind::kLengthMismatch,
                "payload is " + std::to_string(frame.payload.size()) +
                    " bytes, expected K*M*4 = " + std::to_string(expected));
  }
  std::vector<float> values(rows * cols);
  ByteReader reader(frame.payload);
  for (float& v : values) v = reader.f32();
  dump.values = ActivationMatrix(rows, cols, std::move(values));
  ValidateDump(dump);
  return dump;
}

void SaveDump(const ActivationDump& dump, const std::string& path) {
  std::ostringstream buffer(std::ios::binary);
  WriteDump(dump, buffer);
  const std::string bytes = buffer.str();
  container::WriteFile(path, std::span<const std::uint8_t>(
                                 reinterpret_cast<const std::uint8_t*>(bytes.data()),
                                 bytes.size()));
}

ActivationDump LoadDump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  return ReadDump(in);
}

}  // namespace percept
