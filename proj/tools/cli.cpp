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

#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "percept/atlas.hpp"
#include "percept/config.hpp"
#include "percept/container.hpp"
#include "percept/encoder.hpp"
#include "percept/error.hpp"
#include "percept/gmm.hpp"
#include "percept/histogram.hpp"
#include "percept/metrics.hpp"
#include "percept/parallel.hpp"
#include "percept/projection.hpp"
#include "percept/retrieval.hpp"
#include "percept/synth.hpp"
#include "percept/wire.hpp"

namespace percept::cli {
namespace {

using Json = nlohmann::json;

std::string Basename(const std::string& path) {
  return std::filesystem::path(path).filename().string();
}

std::string Real(double v, const char* fmt = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

// Config block embedded in every artifact: the pipeline parameters plus the
// producing command and the basenames of its inputs (basenames only, so
// reruns from another directory stay byte-identical).
Json Provenance(const std::string& command, const PipelineConfig& config,
                const std::vector<std::string>& inputs) {
  Json j = config.ToJson();
  j["command"] = command;
  Json in = Json::array();
  for (const auto& i : inputs) in.push_back(Basename(i));
  j["inputs"] = in;
  return j;
}

container::Frame ReadArtifactHeader(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  return container::ReadHeader(in);
}

PipelineConfig UpstreamConfig(const std::string& path) {
  const auto frame = ReadArtifactHeader(path);
  if (auto it = frame.metadata.find("config"); it != frame.metadata.end()) {
    return PipelineConfig::FromJson(*it);
  }
  return {};
}

std::string FormatMetadata(const SampleMetadata& meta) {
  std::string out;
  for (const auto& [k, v] : meta) {
    if (!out.empty()) out += ',';
    out += k + "=" + v;
  }
  return out;
}

// Command-line values; `set` tells whether a flag was given explicitly.
struct FitFlags {
  int bins = kDefaultBins;
  int components = kDefaultComponents;
  double q = kDefaultRelevancyScale;
  double tolerance = 1e-6;
  int max_iters = 200;
};

struct QueryFlags {
  int k = kDefaultNeighbors;
  bool weighted = false;
  std::string transform = "identity";
};

void ApplyQueryFlags(const QueryFlags& flags, PipelineConfig& config) {
  if (flags.k <= 0) {
    throw Error(ErrorKind::kParameter, "k must be positive, got " + std::to_string(flags.k));
  }
  config.k = flags.k;
  config.weighted = flags.weighted;
  config.weight_transform = ParseWeightTransform(flags.transform);
}

void CmdValidate(const std::string& path, std::ostream& out) {
  const auto magic = ReadArtifactHeader(path).magic;
  if (magic == container::kDumpMagic) {
    const auto dump = LoadDump(path);
    out << "ok dump class=" << dump.class_label << " samples=" << dump.sample_count()
        << " neurons=" << dump.neuron_count() << " layers=" << dump.layer_names.size() << '\n';
  } else if (magic == container::kHistogramMagic) {
    const auto hists = LoadHistograms(path);
    out << "ok histograms neurons=" << hists.size()
        << " bins=" << (hists.empty() ? 0 : hists.front().bins()) << '\n';
  } else if (magic == container::kBankMagic) {
    const auto bank = LoadBank(path);
    out << "ok bank class=" << bank.class_label << " neurons=" << bank.neuron_count()
        << " components=" << bank.components_per_neuron << '\n';
  } else if (magic == container::kCodesMagic) {
    const auto codes = LoadCodes(path);
    out << "ok codes class=" << codes.class_label << " count=" << codes.codes.size()
        << " length=" << codes.code_length << '\n';
  } else {
    const auto atlas = LoadAtlas(path);
    out << "ok atlas class=" << atlas.class_label << " entries=" << atlas.size()
        << " length=" << atlas.code_length << '\n';
  }
}

void CmdInfo(const std::string& path, std::ostream& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  char magic[container::kMagicSize] = {};
  in.read(magic, sizeof magic);
  const bool binary = in.gcount() == sizeof magic &&
                      std::string(magic, sizeof magic).rfind("PCODE", 0) == 0;
  if (!binary) {
    // Text artifacts (reports, projections) carry their provenance in
    // leading '#' lines.
    in.clear();
    in.seekg(0);
    for (std::string line; std::getline(in, line);) {
      if (!line.empty() && line.front() == '#') out << line << '\n';
    }
    return;
  }
  const auto frame = ReadArtifactHeader(path);
  Json meta = frame.metadata;
  for (const char* bulky : {"sample_ids", "entries"}) {
    if (auto it = meta.find(bulky); it != meta.end()) *it = std::to_string(it->size()) + " items";
  }
  out << "magic: " << frame.magic << "\nformat_version: " << frame.version << '\n'
      << meta.dump(2) << '\n';
}

void CmdHist(const std::string& dump_path, int bins, const std::string& out_path,
             std::ostream& out) {
  const auto dump = LoadDump(dump_path);
  PipelineConfig config;
  config.bins = bins;
  config.seed = dump.provenance.is_object() ? dump.provenance.value("seed", std::uint64_t{0}) : 0;
  const auto hists = BuildHistograms(dump.values, bins);
  SaveHistograms(hists, dump.class_label, Provenance("hist", config, {dump_path}), out_path);
  std::size_t degenerate = 0;
  for (const auto& h : hists) degenerate += h.degenerate ? 1 : 0;
  out << "histograms: class=" << dump.class_label << " neurons=" << hists.size()
      << " bins=" << bins << " degenerate=" << degenerate << '\n';
}

void CmdFit(const std::string& dump_path, const FitFlags& flags, const std::string& out_path,
            std::ostream& out) {
  const auto dump = LoadDump(dump_path);
  PipelineConfig config;
  config.bins = flags.bins;
  config.components = flags.components;
  config.q = flags.q;
  config.tolerance = flags.tolerance;
  config.max_iters = flags.max_iters;
  config.seed = dump.provenance.is_object() ? dump.provenance.value("seed", std::uint64_t{0}) : 0;
  const ClassBank bank = FitClassBank(dump, config.fit_options());
  SaveBank(bank, Provenance("fit", config, {dump_path}), out_path);

  std::size_t relevant = 0;
  std::size_t unconverged = 0;
  for (const auto& g : bank.neuron_gmms) {
    for (const auto& c : g.components) relevant += c.relevant ? 1 : 0;
    unconverged += g.converged ? 0 : 1;
  }
  out << "bank: class=" << bank.class_label << " neurons=" << bank.neuron_count()
      << " components=" << bank.components_per_neuron << " relevant=" << relevant << "/"
      << bank.code_length() << " peak_mean=" << Real(bank.peak_mean)
      << " unconverged=" << unconverged << '\n';
}

void CmdEncode(const std::string& dump_path, const std::string& bank_path,
               const std::string& mode_text, const std::optional<std::string>& predicted,
               const std::string& out_path, std::ostream& out) {
  ActivationDump dump = LoadDump(dump_path);
  const ClassBank bank = LoadBank(bank_path);
  PipelineConfig config = UpstreamConfig(bank_path);
  config.interval_mode = IntervalMode::Parse(mode_text);
  if (predicted) dump.class_label = *predicted;

  CodeSet set;
  set.class_label = bank.class_label;
  set.code_length = bank.code_length();
  set.components_per_neuron = bank.components_per_neuron;
  set.codes = EncodeDump(dump, bank, config.interval_mode);
  SaveCodes(set, Provenance("encode", config, {dump_path, bank_path}), out_path);

  std::size_t ones = 0;
  for (const auto& c : set.codes) ones += c.bits.popcount();
  const double density =
      set.codes.empty() ? 0.0
                        : static_cast<double>(ones) /
                              static_cast<double>(set.codes.size() * set.code_length);
  out << "codes: class=" << set.class_label << " count=" << set.codes.size()
      << " length=" << set.code_length << " density=" << Real(density, "%.4f") << '\n';
}

void CmdAtlasBuild(const std::vector<std::string>& code_paths, const std::string& meta_path,
                   const std::string& out_path, std::ostream& out) {
  std::vector<PerceptualCode> codes;
  std::size_t components = 0;
  for (const auto& p : code_paths) {
    CodeSet set = LoadCodes(p);
    components = set.components_per_neuron;
    for (auto& c : set.codes) codes.push_back(std::move(c));
  }
  const MetadataTable meta = meta_path.empty() ? MetadataTable{} : ReadMetadataTsv(meta_path);
  const Atlas atlas = BuildAtlas(codes, meta);

  std::vector<std::string> inputs = code_paths;
  if (!meta_path.empty()) inputs.push_back(meta_path);
  SaveAtlas(atlas, Provenance("atlas build", UpstreamConfig(code_paths.front()), inputs),
            out_path);

  const auto file_bytes = static_cast<std::size_t>(std::filesystem::file_size(out_path));
  const std::size_t neurons = components == 0 ? 0 : atlas.code_length / components;
  const AtlasFootprint fp = MeasureFootprint(atlas, neurons, file_bytes);
  out << "atlas: class=" << atlas.class_label << " entries=" << atlas.size()
      << " length=" << atlas.code_length << '\n';
  out << "bytes/sample: code=" << fp.code_bytes_per_sample
      << " file=" << Real(fp.file_bytes_per_sample, "%.1f")
      << " raw_activations=" << fp.raw_bytes_per_sample;
  if (fp.code_bytes_per_sample > 0 && fp.raw_bytes_per_sample > 0) {
    out << " compression=" +
               Real(static_cast<double>(fp.raw_bytes_per_sample) /
                        static_cast<double>(fp.code_bytes_per_sample),
                    "%.2f") +
               "x";
  }
  out << '\n';
}

PerceptualCode FindCode(const std::string& spec) {
  const auto colon = spec.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == spec.size()) {
    throw Error(ErrorKind::kParameter, "--code expects <codes.pccode>:<sample_id>, got '" +
                                           spec + "'");
  }
  const std::string path = spec.substr(0, colon);
  const std::string id = spec.substr(colon + 1);
  CodeSet set = LoadCodes(path);
  for (auto& c : set.codes) {
    if (c.sample_id == id) return std::move(c);
  }
  throw Error(ErrorKind::kMetadata, "sample '" + id + "' not found in " + path);
}

void CmdQuery(const std::string& atlas_path, const std::string& code_spec,
              const QueryFlags& flags, bool exclude_self, std::ostream& out) {
  const Atlas atlas = LoadAtlas(atlas_path);
  const PerceptualCode code = FindCode(code_spec);
  PipelineConfig config = UpstreamConfig(atlas_path);
  ApplyQueryFlags(flags, config);
  QueryOptions options = config.query_options();
  options.exclude_self = exclude_self;
  const QueryResult result = Query(atlas, code, options);

  out << "# query\t" << result.query_id << '\n';
  out << "# config\t" << Provenance("query", config, {atlas_path}).dump() << '\n';
  out << "rank\tsample_id\tdistance\tmetadata\n";
  for (std::size_t i = 0; i < result.neighbors.size(); ++i) {
    const auto& nb = result.neighbors[i];
    out << i + 1 << '\t' << nb.sample_id << '\t' << Real(nb.distance, "%.9g") << '\t'
        << FormatMetadata(nb.metadata) << '\n';
  }
}

void CmdEval(const std::string& atlas_path, const std::string& test_path,
             const std::string& meta_path, const std::string& intra_key,
             const QueryFlags& flags, const std::string& report_path, std::ostream& out) {
  const Atlas atlas = LoadAtlas(atlas_path);
  const CodeSet test = LoadCodes(test_path);
  const MetadataTable meta = ReadMetadataTsv(meta_path);
  PipelineConfig config = UpstreamConfig(atlas_path);
  ApplyQueryFlags(flags, config);

  IntraLookup intra = IntraTags(meta, intra_key);
  for (const auto& e : atlas.entries) {
    if (auto it = e.metadata.find(intra_key); it != e.metadata.end()) {
      intra.emplace(e.sample_id, it->second);
    }
  }
  const EvalReport report = Evaluate(atlas, test.codes, intra, config.query_options());
  WriteReportTsv(report, Provenance("eval", config, {atlas_path, test_path, meta_path}),
                 report_path);
  out << "eval: class=" << atlas.class_label << " queries=" << report.per_query.size()
      << " k=" << report.k << " mean_p_acc=" << Real(report.mean, "%.4f")
      << " std=" << Real(report.std, "%.4f")
      << " max=" << Real(MaxPredictionBasisAccuracy(report.k), "%.4f") << '\n';
}

void CmdProject(const std::string& atlas_path, const std::string& meta_path,
                const std::string& intra_key, const std::string& out_path,
                const std::string& svg_path, std::ostream& out) {
  Atlas atlas = LoadAtlas(atlas_path);
  if (!meta_path.empty()) {
    const MetadataTable meta = ReadMetadataTsv(meta_path);
    for (auto& e : atlas.entries) {
      if (auto it = meta.find(e.sample_id); it != meta.end()) e.metadata = it->second;
    }
  }
  const Projection2D proj = Project(atlas, intra_key);
  WriteProjectionTsv(proj, out_path);
  if (!svg_path.empty()) WriteProjectionSvg(proj, svg_path);
  out << "projection: class=" << atlas.class_label << " points=" << proj.points.size()
      << " explained_variance=" << Real(proj.explained_variance[0], "%.4f") << ","
      << Real(proj.explained_variance[1], "%.4f") << '\n';
}

void CmdSynth(const std::string& spec_path, const std::string& out_dir, std::ostream& out) {
  const synth::SynthSpec spec = synth::LoadSpec(spec_path);
  const synth::Generated generated = synth::Generate(spec);
  synth::WriteGenerated(generated, out_dir);
  for (const auto& cls : generated.classes) {
    out << "synth: class=" << cls.train.class_label << " train=" << cls.train.sample_count()
        << " test=" << cls.test.sample_count() << " neurons=" << cls.train.neuron_count()
        << '\n';
  }
  out << "synth: wrote " << out_dir << '\n';
}

void AddQueryFlags(CLI::App* cmd, QueryFlags& flags) {
  cmd->add_option("-k,--neighbors", flags.k, "Prediction basis size")->capture_default_str();
  cmd->add_flag("--weighted", flags.weighted, "Weight Hamming distance by bit popularity");
  cmd->add_option("--weight-transform", flags.transform,
                  "identity | inverse | log-inverse")
      ->capture_default_str();
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"percept: perceptual codes, atlases and prediction bases from neuron activations",
               "percept"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  int threads = 0;
  app.add_option("--threads", threads, "Worker thread cap (default: machine parallelism)")
      ->envname("PERCEPT_THREADS");

  std::string file;
  auto* validate = app.add_subcommand("validate", "Check that an artifact file is well-formed");
  validate->add_option("file", file, "Artifact to check")->required();

  auto* info = app.add_subcommand("info", "Print the metadata and config embedded in a file");
  info->add_option("file", file, "Artifact or report")->required();

  std::string dump_path;
  std::string out_path;
  FitFlags fit_flags;
  auto* hist = app.add_subcommand("hist", "Build per-neuron activation histograms");
  hist->add_option("dump", dump_path, "Activation dump (.pcact)")->required();
  hist->add_option("--bins", fit_flags.bins, "Bins per histogram")->capture_default_str();
  hist->add_option("--out", out_path, "Output histogram file")->required();

  auto* fit = app.add_subcommand("fit", "Fit per-neuron GMMs and mark relevant components");
  fit->add_option("dump", dump_path, "Activation dump (.pcact)")->required();
  fit->add_option("--components", fit_flags.components, "Components per neuron (T)")
      ->capture_default_str();
  fit->add_option("--bins", fit_flags.bins, "Bins per histogram")->capture_default_str();
  fit->add_option("--q", fit_flags.q, "Relevancy scale")->capture_default_str();
  fit->add_option("--tolerance", fit_flags.tolerance, "EM relative log-likelihood tolerance")
      ->capture_default_str();
  fit->add_option("--max-iters", fit_flags.max_iters, "EM iteration cap")->capture_default_str();
  fit->add_option("--out", out_path, "Output bank (.pcbank)")->required();

  std::string bank_path;
  std::string interval_mode = "variance";
  std::optional<std::string> predicted;
  auto* encode = app.add_subcommand("encode", "Encode a dump into perceptual codes");
  encode->add_option("dump", dump_path, "Activation dump (.pcact)")->required();
  encode->add_option("--bank", bank_path, "Class bank (.pcbank)")->required();
  encode->add_option("--interval-mode", interval_mode, "variance | k_sigma(<k>)")
      ->capture_default_str();
  encode->add_option("--predicted", predicted,
                     "Predicted class of the samples (default: the dump's class label)");
  encode->add_option("--out", out_path, "Output codes (.pccode)")->required();

  std::vector<std::string> code_paths;
  std::string meta_path;
  auto* atlas = app.add_subcommand("atlas", "Atlas operations");
  atlas->require_subcommand(1);
  auto* atlas_build = atlas->add_subcommand("build", "Build an atlas from encoded samples");
  atlas_build->add_option("codes", code_paths, "Code files (.pccode)")->required();
  atlas_build->add_option("--meta", meta_path, "Metadata TSV");
  atlas_build->add_option("--out", out_path, "Output atlas (.pcatlas)")->required();

  std::string atlas_path;
  std::string code_spec;
  QueryFlags query_flags;
  bool exclude_self = false;
  auto* query = app.add_subcommand("query", "Retrieve the prediction basis for one code");
  query->add_option("atlas", atlas_path, "Atlas (.pcatlas)")->required();
  query->add_option("--code", code_spec, "<codes.pccode>:<sample_id>")->required();
  AddQueryFlags(query, query_flags);
  query->add_flag("--exclude-self", exclude_self, "Skip atlas entries with the query's id");

  std::string test_path;
  std::string report_path;
  std::string intra_key = "intra";
  auto* eval = app.add_subcommand("eval", "Score prediction bases of a test set");
  eval->add_option("atlas", atlas_path, "Atlas (.pcatlas)")->required();
  eval->add_option("--test", test_path, "Test codes (.pccode)")->required();
  eval->add_option("--meta", meta_path, "Metadata TSV with intra-class tags")->required();
  eval->add_option("--intra-key", intra_key, "Metadata key holding the intra-class")
      ->capture_default_str();
  AddQueryFlags(eval, query_flags);
  eval->add_option("--report", report_path, "Output report TSV")->required();

  std::string svg_path;
  auto* project = app.add_subcommand("project", "2-D PCA projection of an atlas");
  project->add_option("atlas", atlas_path, "Atlas (.pcatlas)")->required();
  project->add_option("--meta", meta_path, "Metadata TSV overriding the atlas' metadata");
  project->add_option("--intra-key", intra_key, "Metadata key used for point labels")
      ->capture_default_str();
  project->add_option("--out", out_path, "Output points TSV")->required();
  project->add_option("--svg", svg_path, "Optional scatter plot");

  std::string spec_path;
  std::string out_dir;
  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic activation dumps");
  synth_cmd->add_option("--spec", spec_path, "Spec file")->required();
  synth_cmd->add_option("--out-dir", out_dir, "Output directory")->required();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "percept: usage: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    SetThreadCount(threads);
    if (validate->parsed()) {
      CmdValidate(file, out);
    } else if (info->parsed()) {
      CmdInfo(file, out);
    } else if (hist->parsed()) {
      CmdHist(dump_path, fit_flags.bins, out_path, out);
    } else if (fit->parsed()) {
      CmdFit(dump_path, fit_flags, out_path, out);
    } else if (encode->parsed()) {
      CmdEncode(dump_path, bank_path, interval_mode, predicted, out_path, out);
    } else if (atlas_build->parsed()) {
      CmdAtlasBuild(code_paths, meta_path, out_path, out);
    } else if (query->parsed()) {
      CmdQuery(atlas_path, code_spec, query_flags, exclude_self, out);
    } else if (eval->parsed()) {
      CmdEval(atlas_path, test_path, meta_path, intra_key, query_flags, report_path, out);
    } else if (project->parsed()) {
      CmdProject(atlas_path, meta_path, intra_key, out_path, svg_path, out);
    } else if (synth_cmd->parsed()) {
      CmdSynth(spec_path, out_dir, out);
    }
  } catch (const Error& e) {
    err << "percept: error: " << ErrorKindName(e.kind()) << ": " << e.what() << '\n';
    return kExitDomainError;
  } catch (const std::exception& e) {
    err << "percept: error: internal: " << e.what() << '\n';
    return kExitDomainError;
  }
  return kExitOk;
}

}  // namespace percept::cli
