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

#include "percept/synth.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <unordered_set>

#include "percept/error.hpp"

namespace percept::synth {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void Fail(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::kSpec, "spec line " + std::to_string(line) + ": " + what);
}

double ParseReal(const std::string& text, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    Fail(line, "expected a number, got '" + text + "'");
  }
  if (used != text.size() || !std::isfinite(v)) Fail(line, "expected a number, got '" + text + "'");
  return v;
}

std::uint64_t ParseCount(const std::string& text, std::size_t line) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    Fail(line, "expected a non-negative integer, got '" + text + "'");
  }
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    Fail(line, "integer out of range: '" + text + "'");
  }
}

std::set<std::size_t> ParseNeuronList(const std::string& text, std::size_t line) {
  std::set<std::size_t> out;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ',');) {
    part = Trim(part);
    const auto dash = part.find('-');
    if (dash == std::string::npos) {
      out.insert(ParseCount(part, line));
      continue;
    }
    const auto lo = ParseCount(part.substr(0, dash), line);
    const auto hi = ParseCount(part.substr(dash + 1), line);
    if (hi < lo) Fail(line, "descending neuron range '" + part + "'");
    for (auto n = lo; n <= hi; ++n) out.insert(n);
  }
  return out;
}

std::string FormatNeuronList(const std::set<std::size_t>& neurons) {
  std::string out;
  for (auto it = neurons.begin(); it != neurons.end();) {
    const std::size_t lo = *it;
    std::size_t hi = lo;
    for (++it; it != neurons.end() && *it == hi + 1; ++it) hi = *it;
    if (!out.empty()) out += ',';
    out += std::to_string(lo);
    if (hi != lo) out += '-' + std::to_string(hi);
  }
  return out;
}

std::string FormatReal(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ActivationDump MakeDump(const SynthSpec& spec, const ClassSpec& cls, const std::string& split,
                        std::size_t per_intra, NormalSampler& rng,
                        std::vector<std::pair<std::string, SampleMetadata>>& metadata) {
  const std::size_t rows = per_intra * cls.intra_classes.size();

  // Intra-class of each row, shuffled so row order carries no label signal.
  std::vector<std::size_t> assignment(rows);
  for (std::size_t r = 0; r < rows; ++r) assignment[r] = r / per_intra;
  for (std::size_t r = rows; r > 1; --r) {
    std::swap(assignment[r - 1], assignment[rng.Below(r)]);
  }

  std::vector<std::vector<bool>> is_signature(cls.intra_classes.size(),
                                              std::vector<bool>(spec.neurons, false));
  for (std::size_t g = 0; g < cls.intra_classes.size(); ++g) {
    for (auto n : cls.intra_classes[g].signature_neurons) is_signature[g][n] = true;
  }

  ActivationDump dump;
  dump.class_label = cls.label;
  dump.layer_names = {"synthetic"};
  dump.neurons_per_layer = {spec.neurons};
  dump.provenance = {{"generator", "percept synth"}, {"seed", spec.seed}, {"split", split}};
  dump.values = ActivationMatrix(rows, spec.neurons);
  for (std::size_t r = 0; r < rows; ++r) {
    char id[32];
    std::snprintf(id, sizeof id, "-%s-%05zu", split.c_str(), r);
    dump.sample_ids.push_back(cls.label + id);
    const auto& intra = cls.intra_classes[assignment[r]];
    for (std::size_t j = 0; j < spec.neurons; ++j) {
      double v;
      if (is_signature[assignment[r]][j]) {
        v = rng.Normal(spec.base_mean + intra.signature_shift, spec.base_variance);
      } else if (spec.background == Background::kBimodal && rng.Uniform() < 0.5) {
        v = rng.Normal(spec.base_mean + spec.bimodal_shift, spec.base_variance);
      } else {
        v = rng.Normal(spec.base_mean, spec.base_variance);
      }
      dump.values(r, j) = static_cast<float>(v);
    }
    metadata.push_back({dump.sample_ids.back(),
                        {{"class", cls.label}, {"intra", intra.tag}, {"split", split}}});
  }
  return dump;
}

}  // namespace

NormalSampler::NormalSampler(std::uint64_t seed) : engine_(seed) {}

double NormalSampler::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t NormalSampler::Below(std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double NormalSampler::Normal(double mean, double variance) {
  double z;
  if (has_spare_) {
    has_spare_ = false;
    z = spare_;
  } else {
    const double u1 = 1.0 - Uniform();
    const double u2 = Uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    z = r * std::cos(theta);
    spare_ = r * std::sin(theta);
    has_spare_ = true;
  }
  return mean + std::sqrt(variance) * z;
}

void ValidateSpec(const SynthSpec& spec) {
  if (spec.neurons == 0) throw Error(ErrorKind::kSpec, "neurons must be positive");
  if (spec.train_per_intra < 2) throw Error(ErrorKind::kSpec, "train_per_intra must be >= 2");
  if (!(spec.base_variance > 0.0)) throw Error(ErrorKind::kSpec, "base_variance must be positive");
  if (spec.classes.empty()) throw Error(ErrorKind::kSpec, "spec declares no classes");
  std::unordered_set<std::string> labels;
  for (const auto& cls : spec.classes) {
    if (cls.label.empty() || !labels.insert(cls.label).second) {
      throw Error(ErrorKind::kSpec, "class labels must be unique and non-empty");
    }
    if (cls.intra_classes.empty()) {
      throw Error(ErrorKind::kSpec, "class '" + cls.label + "' has no intra-classes");
    }
    std::unordered_set<std::string> tags;
    std::vector<const IntraClassSpec*> owner(spec.neurons, nullptr);
    for (const auto& intra : cls.intra_classes) {
      if (intra.tag.empty() || !tags.insert(intra.tag).second) {
        throw Error(ErrorKind::kSpec, "intra-class tags of '" + cls.label + "' must be unique");
      }
      for (auto n : intra.signature_neurons) {
        if (n >= spec.neurons) {
          throw Error(ErrorKind::kSpec, "signature neuron " + std::to_string(n) + " of '" +
                                            intra.tag + "' is out of range");
        }
        if (owner[n] != nullptr) {
          throw Error(ErrorKind::kSpec, "signature neuron " + std::to_string(n) +
                                            " is shared by '" + owner[n]->tag + "' and '" +
                                            intra.tag + "'");
        }
        owner[n] = &intra;
      }
    }
  }
}

SynthSpec ParseSpec(const std::string& text) {
  SynthSpec spec;
  std::stringstream in(text);
  std::string raw;
  std::size_t line = 0;
  ClassSpec* current = nullptr;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string s = Trim(raw);
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s.back() != ']' || s.rfind("[class ", 0) != 0) Fail(line, "expected '[class <label>]'");
      spec.classes.push_back({Trim(s.substr(7, s.size() - 8)), {}});
      current = &spec.classes.back();
      continue;
    }

    if (s.rfind("intra ", 0) == 0 || s.rfind("intra\t", 0) == 0) {
      if (current == nullptr) Fail(line, "'intra' outside a [class] section");
      std::stringstream fields(s.substr(6));
      IntraClassSpec intra;
      fields >> intra.tag;
      bool have_neurons = false;
      for (std::string field; fields >> field;) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) Fail(line, "expected key=value, got '" + field + "'");
        const std::string key = field.substr(0, eq);
        const std::string value = field.substr(eq + 1);
        if (key == "neurons") {
          intra.signature_neurons = ParseNeuronList(value, line);
          have_neurons = true;
        } else if (key == "shift") {
          intra.signature_shift = ParseReal(value, line);
        } else {
          Fail(line, "unknown intra field '" + key + "'");
        }
      }
      if (intra.tag.empty() || !have_neurons) Fail(line, "intra needs a tag and neurons=");
      current->intra_classes.push_back(std::move(intra));
      continue;
    }

    const auto eq = s.find('=');
    if (eq == std::string::npos) Fail(line, "expected 'key = value'");
    const std::string key = Trim(s.substr(0, eq));
    const std::string value = Trim(s.substr(eq + 1));
    if (current != nullptr) Fail(line, "global key '" + key + "' after a [class] section");
    if (key == "seed") {
      spec.seed = ParseCount(value, line);
    } else if (key == "neurons") {
      spec.neurons = ParseCount(value, line);
    } else if (key == "train_per_intra") {
      spec.train_per_intra = ParseCount(value, line);
    } else if (key == "test_per_intra") {
      spec.test_per_intra = ParseCount(value, line);
    } else if (key == "base_mean") {
      spec.base_mean = ParseReal(value, line);
    } else if (key == "base_variance") {
      spec.base_variance = ParseReal(value, line);
    } else if (key == "bimodal_shift") {
      spec.bimodal_shift = ParseReal(value, line);
    } else if (key == "background") {
      if (value == "normal") {
        spec.background = Background::kNormal;
      } else if (value == "bimodal") {
        spec.background = Background::kBimodal;
      } else {
        Fail(line, "background must be 'normal' or 'bimodal'");
      }
    } else {
      Fail(line, "unknown key '" + key + "'");
    }
  }
  ValidateSpec(spec);
  return spec;
}

SynthSpec LoadSpec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseSpec(buffer.str());
}

std::string FormatSpec(const SynthSpec& spec) {
  std::string out;
  out += "seed = " + std::to_string(spec.seed) + "\n";
  out += "neurons = " + std::to_string(spec.neurons) + "\n";
  out += "train_per_intra = " + std::to_string(spec.train_per_intra) + "\n";
  out += "test_per_intra = " + std::to_string(spec.test_per_intra) + "\n";
  out += "base_mean = " + FormatReal(spec.base_mean) + "\n";
  out += "base_variance = " + FormatReal(spec.base_variance) + "\n";
  out += std::string("background = ") +
         (spec.background == Background::kNormal ? "normal" : "bimodal") + "\n";
  out += "bimodal_shift = " + FormatReal(spec.bimodal_shift) + "\n";
  for (const auto& cls : spec.classes) {
    out += "\n[class " + cls.label + "]\n";
    for (const auto& intra : cls.intra_classes) {
      out += "intra " + intra.tag + " neurons=" + FormatNeuronList(intra.signature_neurons) +
             " shift=" + FormatReal(intra.signature_shift) + "\n";
    }
  }
  return out;
}

Generated Generate(const SynthSpec& spec) {
  ValidateSpec(spec);
  NormalSampler rng(spec.seed);
  Generated out;
  for (const auto& cls : spec.classes) {
    GeneratedClass gen;
    gen.train = MakeDump(spec, cls, "train", spec.train_per_intra, rng, out.metadata);
    gen.test = MakeDump(spec, cls, "test", spec.test_per_intra, rng, out.metadata);
    out.classes.push_back(std::move(gen));
  }
  return out;
}

void WriteGenerated(const Generated& generated, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + out_dir + ": " + ec.message());
  const std::filesystem::path dir(out_dir);
  for (const auto& cls : generated.classes) {
    SaveDump(cls.train, (dir / (cls.train.class_label + ".train.pcact")).string());
    SaveDump(cls.test, (dir / (cls.test.class_label + ".test.pcact")).string());
  }
  WriteMetadataTsv((dir / "meta.tsv").string(), generated.metadata);
}

}  // namespace percept::synth
