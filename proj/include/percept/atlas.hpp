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

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "percept/encoder.hpp"

namespace percept {

using SampleMetadata = std::map<std::string, std::string>;
using MetadataTable = std::unordered_map<std::string, SampleMetadata>;

struct AtlasEntry {
  std::string sample_id;
  PerceptualCode code;
  SampleMetadata metadata;

  friend bool operator==(const AtlasEntry&, const AtlasEntry&) = default;
};

// Encoded reference set for one class. weights[i] counts the entries whose
// bit i is set.
struct Atlas {
  static constexpr std::uint32_t kFormatVersion = 1;

  std::string class_label;
  std::size_t code_length = 0;
  std::vector<AtlasEntry> entries;
  std::vector<std::uint64_t> weights;

  std::size_t size() const { return entries.size(); }

  friend bool operator==(const Atlas&, const Atlas&) = default;
};

// Column sums of the code matrix.
std::vector<std::uint64_t> CountBitWeights(const std::vector<AtlasEntry>& entries,
                                           std::size_t code_length);

// Entries keep the order of `codes`. Samples missing from `metadata` get an
// empty map.
Atlas BuildAtlas(const std::vector<PerceptualCode>& codes,
                 const MetadataTable& metadata = {});

void WriteAtlas(const Atlas& atlas, const nlohmann::json& config,
                std::ostream& out);
Atlas ReadAtlas(std::istream& in);

void SaveAtlas(const Atlas& atlas, const nlohmann::json& config,
               const std::string& path);
Atlas LoadAtlas(const std::string& path);

struct AtlasFootprint {
  std::size_t code_bytes_per_sample = 0;
  double file_bytes_per_sample = 0.0;
  std::size_t raw_bytes_per_sample = 0;  // M * 4
};

AtlasFootprint MeasureFootprint(const Atlas& atlas, std::size_t neuron_count,
                                std::size_t file_bytes);

// Metadata TSV: one sample per line, `sample_id<TAB>key=value<TAB>...`.
// Lines starting with '#' are comments.
MetadataTable ReadMetadataTsv(const std::string& path);
void WriteMetadataTsv(const std::string& path,
                      const std::vector<std::pair<std::string, SampleMetadata>>& rows);

}  // namespace percept
