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

#include "percept/encoder.hpp"

#include <cmath>
#include <fstream>
#include <unordered_set>

#include "parallel_for.hpp"
#include "percept/container.hpp"
#include "percept/error.hpp"

namespace percept {

using container::ByteReader;
using container::ByteWriter;
using container::Json;

double IntervalMode::HalfWidth(double variance) const {
  return kind == Kind::kVariance ? variance : k * std::sqrt(variance);
}

std::string IntervalMode::ToString() const {
  if (kind == Kind::kVariance) return "variance";
  Json k_json = k;
  return "k_sigma(" + k_json.dump() + ")";
}

IntervalMode IntervalMode::Parse(const std::string& text) {
  if (text == "variance") return Variance();
  const std::string prefix = "k_sigma(";
  if (text.rfind(prefix, 0) == 0 && text.size() > prefix.size() + 1 &&
      text.back() == ')') {
    const std::string number = text.substr(prefix.size(), text.size() - prefix.size() - 1);
    std::size_t used = 0;
    double k = 0.0;
    try {
      k = std::stod(number, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == number.size() && k > 0.0 && std::isfinite(k)) return KSigma(k);
  }
  throw Error(ErrorKind::kParameter,
              "interval mode must be 'variance' or 'k_sigma(<k>)', got '" + text + "'");
}

Encoder::Encoder(const ClassBank& bank, IntervalMode mode)
    : class_label_(bank.class_label),
      neurons_(bank.neuron_count()),
      components_(bank.components_per_neuron) {
  intervals_.reserve(neurons_ * components_);
  for (const auto& gmm : bank.neuron_gmms) {
    if (gmm.components.size() != components_) {
      throw Error(ErrorKind::kDimension,
                  "neuron " + std::to_string(gmm.neuron_index) + " has " +
                      std::to_string(gmm.components.size()) + " components, bank declares " +
                      std::to_string(components_));
    }
    for (const auto& c : gmm.components) {
      const double half = mode.HalfWidth(c.variance);
      intervals_.push_back({c.mean - half, c.mean + half, c.relevant});
    }
  }
}

template <typename T>
PerceptualCode Encoder::EncodeImpl(std::span<const T> activations,
                                   std::string sample_id) const {
  if (activations.size() != neurons_) {
    throw Error(ErrorKind::kDimension,
                "activation vector has " + std::to_string(activations.size()) +
                    " values, bank '" + class_label_ + "' expects " +
                    std::to_string(neurons_));
  }
  PerceptualCode code{BitCode(neurons_ * components_), class_label_, std::move(sample_id)};
  for (std::size_t j = 0; j < neurons_; ++j) {
    const double v = static_cast<double>(activations[j]);
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::kValidation,
                  "non-finite activation for neuron " + std::to_string(j) + " of sample '" +
                      code.sample_id + "'");
    }
    const std::size_t base = j * components_;
    for (std::size_t t = 0; t < components_; ++t) {
      const Interval& iv = intervals_[base + t];
      if (iv.relevant && iv.lo <= v && v <= iv.hi) code.bits.set(base + t);
    }
  }
  return code;
}

PerceptualCode Encoder::Encode(std::span<const double> activations,
                               std::string sample_id) const {
  return EncodeImpl(activations, std::move(sample_id));
}

PerceptualCode Encoder::Encode(std::span<const float> activations,
                               std::string sample_id) const {
  return EncodeImpl(activations, std::move(sample_id));
}

std::vector<PerceptualCode> Encoder::EncodeDump(const ActivationDump& dump) const {
  if (dump.neuron_count() != neurons_) {
    throw Error(ErrorKind::kDimension,
                "dump has M=" + std::to_string(dump.neuron_count()) + " neurons, bank '" +
                    class_label_ + "' has " + std::to_string(neurons_));
  }
  std::vector<PerceptualCode> out(dump.sample_count());
  internal::ParallelFor(dump.sample_count(), [&](std::size_t i) {
    out[i] = Encode(dump.values.row(i), dump.sample_ids[i]);
  });
  return out;
}

std::vector<PerceptualCode> EncodeDump(const ActivationDump& dump, const ClassBank& bank,
                                       IntervalMode mode) {
  if (dump.class_label != bank.class_label) {
    throw Error(ErrorKind::kComparison, "dump class '" + dump.class_label +
                                            "' does not match bank class '" +
                                            bank.class_label + "'");
  }
  return Encoder(bank, mode).EncodeDump(dump);
}

void SaveCodes(const CodeSet& codes, const Json& config, const std::string& path) {
  const std::size_t stride = BitCode::ByteCount(codes.code_length);
  Json ids = Json::array();
  ByteWriter payload;
  payload.reserve(stride * codes.codes.size());
  for (const auto& c : codes.codes) {
    if (c.class_label != codes.class_label || c.size() != codes.code_length) {
      throw Error(ErrorKind::kConsistency,
                  "code '" + c.sample_id + "' does not belong to code set of class '" +
                      codes.class_label + "'");
    }
    ids.push_back(c.sample_id);
    payload.raw(c.bits.ToBytes());
  }
  Json meta = {{"class_label", codes.class_label},
               {"code_length", codes.code_length},
               {"components", codes.components_per_neuron},
               {"count", codes.codes.size()},
               {"sample_ids", ids},
               {"config", config}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path + " for writing");
  container::WriteFrame(out, container::kCodesMagic, CodeSet::kFormatVersion, meta,
                        payload.bytes());
}

CodeSet LoadCodes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  auto frame = container::ReadFrame(in, container::kCodesMagic, CodeSet::kFormatVersion);
  CodeSet set;
  std::vector<std::string> ids;
  try {
    set.class_label = frame.metadata.at("class_label").get<std::string>();
    set.code_length = frame.metadata.at("code_length").get<std::size_t>();
    set.components_per_neuron = frame.metadata.value("components", std::size_t{0});
    ids = frame.metadata.at("sample_ids").get<std::vector<std::string>>();
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("code metadata: ") + e.what());
  }
  const std::size_t stride = BitCode::ByteCount(set.code_length);
  if (frame.payload.size() != stride * ids.size()) {
    throw Error(ErrorKind::kLengthMismatch,
                "code payload is " + std::to_string(frame.payload.size()) +
                    " bytes, expected " + std::to_string(stride * ids.size()));
  }
  ByteReader reader(frame.payload);
  set.codes.reserve(ids.size());
  for (auto& id : ids) {
    PerceptualCode code{BitCode(), set.class_label, std::move(id)};
    if (!BitCode::FromBytes(reader.raw(stride), set.code_length, &code.bits)) {
      throw Error(ErrorKind::kCorruption, "pad bits set in code '" + code.sample_id + "'");
    }
    set.codes.push_back(std::move(code));
  }
  return set;
}

}  // namespace percept
