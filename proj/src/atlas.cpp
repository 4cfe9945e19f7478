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

#include "percept/atlas.hpp"

#include <bit>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "percept/container.hpp"
#include "percept/error.hpp"

namespace percept {

using container::ByteReader;
using container::ByteWriter;
using container::Json;

std::vector<std::uint64_t> CountBitWeights(const std::vector<AtlasEntry>& entries,
                                           std::size_t code_length) {
  std::vector<std::uint64_t> weights(code_length, 0);
  for (const auto& e : entries) {
    const auto words = e.code.bits.words();
    for (std::size_t w = 0; w < words.size(); ++w) {
      for (std::uint64_t bits = words[w]; bits != 0; bits &= bits - 1) {
        ++weights[w * BitCode::kWordBits + std::countr_zero(bits)];
      }
    }
  }
  return weights;
}

Atlas BuildAtlas(const std::vector<PerceptualCode>& codes, const MetadataTable& metadata) {
  if (codes.empty()) {
    throw Error(ErrorKind::kInsufficientData, "an atlas needs at least one code");
  }
  Atlas atlas;
  atlas.class_label = codes.front().class_label;
  atlas.code_length = codes.front().size();
  std::unordered_set<std::string> seen;
  atlas.entries.reserve(codes.size());
  for (const auto& code : codes) {
    if (code.class_label != atlas.class_label) {
      throw Error(ErrorKind::kConsistency, "atlas mixes class '" + atlas.class_label +
                                               "' with '" + code.class_label + "' (sample '" +
                                               code.sample_id + "')");
    }
    if (code.size() != atlas.code_length) {
      throw Error(ErrorKind::kConsistency,
                  "code '" + code.sample_id + "' has length " + std::to_string(code.size()) +
                      ", atlas uses " + std::to_string(atlas.code_length));
    }
    if (!seen.insert(code.sample_id).second) {
      throw Error(ErrorKind::kDuplicate, "duplicate sample_id '" + code.sample_id + "'");
    }
    AtlasEntry entry{code.sample_id, code, {}};
    if (auto it = metadata.find(code.sample_id); it != metadata.end()) {
      entry.metadata = it->second;
    }
    atlas.entries.push_back(std::move(entry));
  }
  atlas.weights = CountBitWeights(atlas.entries, atlas.code_length);
  return atlas;
}

void WriteAtlas(const Atlas& atlas, const Json& config, std::ostream& out) {
  if (atlas.entries.empty()) {
    throw Error(ErrorKind::kInsufficientData, "refusing to write an empty atlas");
  }
  Json entries = Json::array();
  ByteWriter payload;
  const std::size_t stride = BitCode::ByteCount(atlas.code_length);
  payload.reserve(atlas.code_length * 8 + stride * atlas.size());
  for (std::uint64_t w : atlas.weights) payload.u64(w);
  for (const auto& e : atlas.entries) {
    entries.push_back({{"sample_id", e.sample_id}, {"metadata", e.metadata}});
    payload.raw(e.code.bits.ToBytes());
  }
  Json meta = {{"class_label", atlas.class_label},
               {"code_length", atlas.code_length},
               {"count", atlas.size()},
               {"entries", entries},
               {"config", config}};
  container::WriteFrame(out, container::kAtlasMagic, Atlas::kFormatVersion, meta,
                        payload.bytes());
}

Atlas ReadAtlas(std::istream& in) {
  auto frame = container::ReadFrame(in, container::kAtlasMagic, Atlas::kFormatVersion);
  Atlas atlas;
  std::size_t count = 0;
  try {
    atlas.class_label = frame.metadata.at("class_label").get<std::string>();
    atlas.code_length = frame.metadata.at("code_length").get<std::size_t>();
    count = frame.metadata.at("count").get<std::size_t>();
    const Json& entries = frame.metadata.at("entries");
    if (entries.size() != count) {
      throw Error(ErrorKind::kFormat, "atlas entry list disagrees with count");
    }
    for (const auto& e : entries) {
      AtlasEntry entry;
      entry.sample_id = e.at("sample_id").get<std::string>();
      entry.metadata = e.at("metadata").get<SampleMetadata>();
      atlas.entries.push_back(std::move(entry));
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("atlas metadata: ") + e.what());
  }
  if (count == 0) {
    throw Error(ErrorKind::kInsufficientData, "atlas file has no entries");
  }
  const std::size_t stride = BitCode::ByteCount(atlas.code_length);
  const std::size_t expected = atlas.code_length * 8 + stride * count;
  if (frame.payload.size() != expected) {
    throw Error(ErrorKind::kLengthMismatch,
                "atlas payload is " + std::to_string(frame.payload.size()) +
                    " bytes, expected " + std::to_string(expected));
  }
  ByteReader reader(frame.payload);
  atlas.weights.resize(atlas.code_length);
  for (auto& w : atlas.weights) w = reader.u64();
  std::unordered_set<std::string> seen;
  for (auto& e : atlas.entries) {
    if (!seen.insert(e.sample_id).second) {
      throw Error(ErrorKind::kDuplicate, "duplicate sample_id '" + e.sample_id + "' in atlas");
    }
    e.code.class_label = atlas.class_label;
    e.code.sample_id = e.sample_id;
    if (!BitCode::FromBytes(reader.raw(stride), atlas.code_length, &e.code.bits)) {
      throw Error(ErrorKind::kCorruption, "pad bits set in atlas code '" + e.sample_id + "'");
    }
  }
  if (CountBitWeights(atlas.entries, atlas.code_length) != atlas.weights) {
    throw Error(ErrorKind::kCorruption,
                "stored atlas weights do not match a recount of the codes");
  }
  return atlas;
}

void SaveAtlas(const Atlas& atlas, const Json& config, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path + " for writing");
  WriteAtlas(atlas, config, out);
}

Atlas LoadAtlas(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  return ReadAtlas(in);
}

AtlasFootprint MeasureFootprint(const Atlas& atlas, std::size_t neuron_count,
                                std::size_t file_bytes) {
  AtlasFootprint fp;
  fp.code_bytes_per_sample = BitCode::ByteCount(atlas.code_length);
  fp.file_bytes_per_sample =
      atlas.size() == 0 ? 0.0
                        : static_cast<double>(file_bytes) / static_cast<double>(atlas.size());
  fp.raw_bytes_per_sample = neuron_count * sizeof(float);
  return fp;
}

MetadataTable ReadMetadataTsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  MetadataTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, '\t');) fields.push_back(f);
    const std::string where = path + ":" + std::to_string(line_no);
    if (fields.empty() || fields.front().empty()) {
      throw Error(ErrorKind::kMetadata, where + ": missing sample_id");
    }
    SampleMetadata row;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const auto eq = fields[i].find('=');
      if (eq == std::string::npos || eq == 0) {
        throw Error(ErrorKind::kMetadata, where + ": field '" + fields[i] +
                                              "' is not key=value");
      }
      row[fields[i].substr(0, eq)] = fields[i].substr(eq + 1);
    }
    if (!table.emplace(fields.front(), std::move(row)).second) {
      throw Error(ErrorKind::kDuplicate, where + ": duplicate sample_id '" + fields.front() + "'");
    }
  }
  return table;
}

void WriteMetadataTsv(const std::string& path,
                      const std::vector<std::pair<std::string, SampleMetadata>>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path + " for writing");
  out << "# sample_id\tkey=value...\n";
  for (const auto& [id, meta] : rows) {
    out << id;
    for (const auto& [k, v] : meta) out << '\t' << k << '=' << v;
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::kIo, "write to " + path + " failed");
}

}  // namespace percept
