// src/pipeline.cc

// Copyright 2026  The kwsaug Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "kws/pipeline.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "kws/augment.h"
#include "kws/corpus.h"
#include "kws/error.h"
#include "kws/model.h"
#include "kws/rng.h"

#ifndef KWS_VERSION
#define KWS_VERSION "0.0.0"
#endif

namespace kws {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string Hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string Relative(const fs::path &path, const fs::path &root) {
  return fs::absolute(path)
      .lexically_normal()
      .lexically_relative(fs::absolute(root).lexically_normal())
      .generic_string();
}

// Digest over the sorted file names and contents of a directory tree.
std::string DirectoryDigest(const fs::path &dir) {
  std::vector<fs::path> files;
  for (const auto &e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string acc;
  for (const fs::path &f : files) {
    acc += f.lexically_relative(dir).generic_string() + "=" + FileDigest(f) + "\n";
  }
  return Hex(Fnv1a64(acc));
}

void WriteText(const fs::path &path, const std::string &text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  Require(static_cast<bool>(out), ErrorKind::kIo, "cannot write '" + path.string() + "'");
  out << text;
  Require(static_cast<bool>(out), ErrorKind::kIo, "write failed for '" + path.string() + "'");
}

// Paths inside `out` are recorded relative to it; directories get a
// combined digest.
json DigestMap(const std::vector<fs::path> &paths, const fs::path &root) {
  json m = json::object();
  for (const fs::path &p : paths) {
    if (fs::is_directory(p)) {
      m[Relative(p, root) + "/"] = DirectoryDigest(p);
    } else if (fs::exists(p)) {
      m[Relative(p, root)] = FileDigest(p);
    }
  }
  return m;
}

void WriteRunRecord(const fs::path &record, const fs::path &root, const std::string &command,
                    const json &args, const ExperimentConfig *config,
                    const std::vector<fs::path> &inputs, const std::vector<fs::path> &outputs) {
  json r;
  r["command"] = command;
  r["args"] = args;
  r["version"] = KWS_VERSION;
  if (config) {
    r["seed"] = config->seed;
    r["config_digest"] = Hex(Fnv1a64(CanonicalConfig(*config)));
  } else {
    r["seed"] = nullptr;
    r["config_digest"] = nullptr;
  }
  r["inputs"] = DigestMap(inputs, root);
  r["outputs"] = DigestMap(outputs, root);
  WriteText(record, r.dump(2) + "\n");
}

HmmTopology Topology(const ExperimentConfig &c) {
  return HmmTopology::FromSelfLoop(c.decoder.states_per_phone, c.decoder.self_loop);
}

std::string ProducerOfCorpus(const std::string &corpus) {
  return corpus == "clean" ? "kws gen-corpus" : "kws augment --spec " + corpus;
}

struct SplitData {
  fs::path manifest;
  std::vector<ManifestEntry> entries;
  std::vector<FeatureMatrix> features;
};

SplitData LoadSplit(const RunContext &ctx, const std::string &corpus, Split split) {
  SplitData d;
  d.manifest = CorpusManifestPath(ctx.out, corpus, split);
  RequireArtifact(d.manifest, ProducerOfCorpus(corpus));
  d.entries = ReadManifest(d.manifest);
  d.features = LoadFeatures(d.entries, d.manifest, ctx.config.features);
  return d;
}

using TargetMap = std::map<std::string, FrameTargets>;

TargetMap ConstructionTargetMap(const SplitData &d, const ExperimentConfig &c) {
  TargetMap out;
  for (std::size_t i = 0; i < d.entries.size(); ++i) {
    out[d.entries[i].id] =
        ConstructionTargets(d.entries[i], c.corpus.keyword, d.features[i].frames(), c.features,
                            c.corpus.phone_set, c.decoder.states_per_phone);
  }
  return out;
}

TargetMap AlignmentTargetMap(const AcousticModel &model, const SplitData &d,
                             const ExperimentConfig &c) {
  const HmmTopology topo = Topology(c);
  std::vector<FrameTargets> aligned(d.entries.size());
  std::vector<std::string> errors(d.entries.size());
  const auto n = static_cast<std::ptrdiff_t>(d.entries.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const Posteriors post = Forward(model, d.features[i]);
      aligned[i] = AlignTargets(d.entries[i], c.corpus.keyword, post, model.state_priors,
                                c.corpus.phone_set, topo);
    } catch (const std::exception &e) {
      errors[i] = d.entries[i].id + ": " + e.what();
    }
  }
  for (const std::string &e : errors) {
    if (!e.empty()) Fail(ErrorKind::kInfeasible, "forced alignment failed for " + e);
  }
  TargetMap out;
  for (std::size_t i = 0; i < d.entries.size(); ++i) out[d.entries[i].id] = std::move(aligned[i]);
  return out;
}

void WriteAlignments(const TargetMap &targets, const fs::path &path) {
  std::string text;
  for (const auto &[id, t] : targets) {
    text += json{{"id", id}, {"keyword", t.keyword}, {"aux", t.aux}}.dump() + "\n";
  }
  WriteText(path, text);
}

TargetMap ReadAlignments(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  Require(static_cast<bool>(in), ErrorKind::kIo, "cannot open '" + path.string() + "'");
  TargetMap out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      FrameTargets t;
      t.keyword = j.at("keyword").get<std::vector<int>>();
      t.aux = j.at("aux").get<std::vector<int>>();
      out[j.at("id").get<std::string>()] = std::move(t);
    } catch (const json::exception &e) {
      Fail(ErrorKind::kUnsupportedFormat,
           path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

TrainingData Assemble(const SplitData &d, const TargetMap &targets, const fs::path &source) {
  TrainingData data;
  std::size_t rows = 0;
  for (const FeatureMatrix &f : d.features) rows += f.frames();
  const std::size_t dim = d.features.empty() ? 0 : d.features.front().dims();
  data.features.Resize(rows, dim);
  std::size_t at = 0;
  for (std::size_t i = 0; i < d.entries.size(); ++i) {
    const auto it = targets.find(d.entries[i].id);
    if (it == targets.end()) {
      Fail(ErrorKind::kMissingArtifact, "no targets for '" + d.entries[i].id + "' in " +
                                            source.string() +
                                            "; produce them with `kws train --corpus clean`");
    }
    const FeatureMatrix &f = d.features[i];
    Require(it->second.keyword.size() == f.frames() && it->second.aux.size() == f.frames(),
            ErrorKind::kDimensionMismatch,
            "targets for '" + d.entries[i].id + "' cover " +
                std::to_string(it->second.keyword.size()) + " frames, features have " +
                std::to_string(f.frames()));
    for (std::size_t t = 0; t < f.frames(); ++t, ++at) {
      std::copy(f.values.Row(t).begin(), f.values.Row(t).end(), data.features.Row(at).begin());
    }
    data.kw_targets.insert(data.kw_targets.end(), it->second.keyword.begin(),
                           it->second.keyword.end());
    data.aux_targets.insert(data.aux_targets.end(), it->second.aux.begin(), it->second.aux.end());
  }
  return data;
}

// Dev-set operating points of a trained model, for the training history.
json DevOperatingPoints(const AcousticModel &model, const SplitData &dev,
                        const ExperimentConfig &c) {
  DecodingGraph graph =
      BuildKwsGraph(c.corpus.keyword, c.corpus.phone_set.Symbols(), Topology(c), 0.0);
  std::vector<TuningUtterance> utts(dev.entries.size());
  for (std::size_t i = 0; i < dev.entries.size(); ++i) {
    utts[i].posteriors = Forward(model, dev.features[i]).keyword;
    utts[i].keyword = dev.entries[i].keyword;
  }
  const TuningResult r = TuneOperatingPoints(graph, c.decoder.entry_penalties, c.decoder.thresholds,
                                             utts, model.state_priors);
  json env = json::array();
  for (const DetPoint &p : r.envelope) {
    env.push_back({{"far", p.far},
                   {"frr", p.frr},
                   {"entry_penalty", p.entry_penalty},
                   {"threshold", p.threshold}});
  }
  return env;
}

}  // namespace

fs::path CleanManifestPath(const fs::path &out, Split split) {
  return out / "corpus" / "clean" / (SplitName(split) + ".jsonl");
}

fs::path InterferenceManifestPath(const fs::path &out, const std::string &set) {
  return out / "corpus" / "interference" / set / "manifest.jsonl";
}

fs::path CorpusManifestPath(const fs::path &out, const std::string &corpus, Split split) {
  if (corpus == "clean") return CleanManifestPath(out, split);
  return out / "augmented" / corpus / SplitName(split) / "manifest.jsonl";
}

fs::path ConditionManifestPath(const fs::path &out, const std::string &condition) {
  return CorpusManifestPath(out, condition, Split::kTest);
}

fs::path AlignmentPath(const fs::path &out, Split split) {
  return out / "alignments" / (SplitName(split) + ".jsonl");
}

fs::path ModelPath(const fs::path &out, const std::string &corpus) {
  return out / "models" / (corpus + ".json");
}

fs::path DetectionsPath(const fs::path &out, const std::string &model,
                        const std::string &condition) {
  return out / "detections" / model / (condition + ".jsonl");
}

std::string FileDigest(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  Require(static_cast<bool>(in), ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return Hex(Fnv1a64(bytes));
}

std::vector<FeatureMatrix> LoadFeatures(std::span<const ManifestEntry> entries,
                                        const fs::path &manifest_path,
                                        const FeatureConfig &config) {
  std::vector<FeatureMatrix> out(entries.size());
  std::vector<std::string> errors(entries.size());
  const auto n = static_cast<std::ptrdiff_t>(entries.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = ComputeFeatures(LoadWav(ResolveWav(manifest_path, entries[i].wav)), config);
    } catch (const std::exception &e) {
      errors[i] = entries[i].id + ": " + e.what();
    }
  }
  for (const std::string &e : errors) {
    if (!e.empty()) Fail(ErrorKind::kIo, "feature extraction failed for " + e);
  }
  return out;
}

void WriteDetections(std::span<const DetectionRecord> records, const fs::path &path) {
  std::string text;
  for (const DetectionRecord &r : records) {
    json j;
    j["id"] = r.id;
    j["start_frame"] = r.detection.start_frame;
    j["end_frame"] = r.detection.end_frame;
    j["score"] = r.detection.score;
    j["entry_penalty"] = r.detection.entry_penalty;
    j["threshold"] = nullptr;
    text += j.dump() + "\n";
  }
  WriteText(path, text);
}

std::vector<DetectionRecord> ReadDetections(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  Require(static_cast<bool>(in), ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::vector<DetectionRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      DetectionRecord r;
      r.id = j.at("id").get<std::string>();
      r.detection.start_frame = j.at("start_frame").get<std::size_t>();
      r.detection.end_frame = j.at("end_frame").get<std::size_t>();
      r.detection.score = j.at("score").get<double>();
      r.detection.entry_penalty = j.at("entry_penalty").get<double>();
      if (j.contains("threshold") && !j["threshold"].is_null()) {
        r.detection.threshold = j["threshold"].get<double>();
      }
      Require(r.detection.start_frame <= r.detection.end_frame && std::isfinite(r.detection.score),
              ErrorKind::kUnsupportedFormat, "invalid detection");
      out.push_back(std::move(r));
    } catch (const json::exception &e) {
      Fail(ErrorKind::kUnsupportedFormat,
           path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const KwsError &e) {
      Fail(e.kind(), path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<std::pair<double, TrialSet>> BuildTrials(std::span<const DetectionRecord> detections,
                                                     std::span<const ManifestEntry> labels) {
  std::map<std::string, bool> label;
  for (const ManifestEntry &e : labels) label[e.id] = e.keyword;
  std::map<double, std::map<std::string, double>> best;  // penalty -> id -> score
  for (const DetectionRecord &r : detections) {
    Require(label.count(r.id) > 0, ErrorKind::kInvalidArgument,
            "detection for '" + r.id + "' has no label");
    auto &slot = best[r.detection.entry_penalty];
    auto it = slot.find(r.id);
    if (it == slot.end() || r.detection.score > it->second) slot[r.id] = r.detection.score;
  }
  if (best.empty()) best[std::numeric_limits<double>::quiet_NaN()];
  std::vector<std::pair<double, TrialSet>> out;
  for (const auto &[penalty, scores] : best) {
    TrialSet trials;
    for (const auto &[id, kw] : label) {
      Trial t{id, std::nullopt};
      if (auto it = scores.find(id); it != scores.end()) t.score = it->second;
      (kw ? trials.positives : trials.negatives).push_back(std::move(t));
    }
    out.emplace_back(penalty, std::move(trials));
  }
  return out;
}

void CmdGenCorpus(const RunContext &ctx) {
  const ExperimentConfig &c = ctx.config;
  const fs::path clean_dir = ctx.out / "corpus" / "clean";
  WriteCorpus(GenerateCorpus(c.corpus), clean_dir);
  std::vector<fs::path> outputs = {CleanManifestPath(ctx.out, Split::kTrain),
                                   CleanManifestPath(ctx.out, Split::kDev),
                                   CleanManifestPath(ctx.out, Split::kTest), clean_dir / "wav"};
  for (const InterferenceConfig &i : c.interference) {
    const fs::path dir = ctx.out / "corpus" / "interference" / i.name;
    WriteInterference(GenerateInterference(i, DeriveSeed(c.seed, "interference/" + i.name)), dir);
    outputs.push_back(dir / "manifest.jsonl");
    outputs.push_back(dir / "wav");
  }
  WriteRunRecord(ctx.out / "corpus" / "gen-corpus.run.json", ctx.out, "gen-corpus", json::object(),
                 &c, {}, outputs);
}

void CmdAugment(const RunContext &ctx, const std::string &name) {
  const ExperimentConfig &c = ctx.config;
  const AugmentConfig &a = c.Augment(name);
  const InterferenceConfig &icfg = c.Interference(a.interference);
  const RirSetConfig &rcfg = c.Rirs(a.rirs);

  const fs::path imanifest = InterferenceManifestPath(ctx.out, icfg.name);
  RequireArtifact(imanifest, "kws gen-corpus");
  AugmentationSpec spec;
  spec.name = a.name;
  spec.sir_range = a.sir;
  spec.master_seed = DeriveSeed(c.seed, "augment/" + a.name);
  for (const InterferenceEntry &e : ReadInterferenceManifest(imanifest)) {
    spec.interference.push_back({e.id, LoadWav(ResolveWav(imanifest, e.wav))});
  }
  for (double rt60 : rcfg.rt60_seconds) {
    for (int k = 0; k < rcfg.rooms_per_rt60; ++k) {
      char label[96];
      std::snprintf(label, sizeof(label), "%s-rt%.3f-%d", rcfg.name.c_str(), rt60, k);
      const auto length = static_cast<std::size_t>(std::ceil(rt60 * c.corpus.sample_rate));
      spec.rirs.push_back(SynthRir(rt60, length, DeriveSeed(c.seed, std::string("rir/") + label),
                                   label, c.corpus.sample_rate));
    }
  }

  const std::vector<Split> splits = a.for_training ? std::vector<Split>{Split::kTrain, Split::kDev}
                                                   : std::vector<Split>{Split::kTest};
  std::vector<fs::path> inputs = {imanifest}, outputs;
  for (Split s : splits) {
    const fs::path src = CleanManifestPath(ctx.out, s);
    RequireArtifact(src, "kws gen-corpus");
    const fs::path dir = ctx.out / "augmented" / a.name / SplitName(s);
    AugmentCorpus(ReadManifest(src), src, spec, dir);
    inputs.push_back(src);
    outputs.push_back(dir / "manifest.jsonl");
    outputs.push_back(dir / "wav");
  }
  WriteRunRecord(ctx.out / "augmented" / a.name / "augment.run.json", ctx.out, "augment",
                 {{"spec", a.name}}, &c, inputs, outputs);
}

void CmdTrain(const RunContext &ctx, const std::string &corpus) {
  const ExperimentConfig &c = ctx.config;
  if (corpus != "clean") {
    Require(c.Augment(corpus).for_training, ErrorKind::kInvalidArgument,
            "'" + corpus + "' is a test condition, not a training corpus");
  }
  const SplitData train = LoadSplit(ctx, corpus, Split::kTrain);
  const SplitData dev = LoadSplit(ctx, corpus, Split::kDev);
  const std::size_t dim = c.features.StackedDim();
  std::vector<fs::path> inputs = {train.manifest, dev.manifest};

  TargetMap train_targets, dev_targets;
  fs::path target_source = "construction";
  if (c.train.targets == "construction") {
    train_targets = ConstructionTargetMap(train, c);
    dev_targets = ConstructionTargetMap(dev, c);
  } else {
    const fs::path align_train = AlignmentPath(ctx.out, Split::kTrain);
    const fs::path align_dev = AlignmentPath(ctx.out, Split::kDev);
    if (corpus == "clean" && !(fs::exists(align_train) && fs::exists(align_dev))) {
      // Bootstrap on construction targets, then align the clean data.
      ModelConfig boot_cfg = c.model;
      boot_cfg.epochs = c.train.bootstrap_epochs;
      boot_cfg.init_seed = DeriveSeed(c.seed, "bootstrap");
      const TrainingData boot_train =
          Assemble(train, ConstructionTargetMap(train, c), "construction");
      const TrainingData boot_dev = Assemble(dev, ConstructionTargetMap(dev, c), "construction");
      const TrainResult boot = Train(InitModel(boot_cfg, dim), boot_train, &boot_dev);
      WriteAlignments(AlignmentTargetMap(boot.model, train, c), align_train);
      WriteAlignments(AlignmentTargetMap(boot.model, dev, c), align_dev);
      WriteRunRecord(ctx.out / "alignments" / "align.run.json", ctx.out, "train",
                     {{"corpus", "clean"}, {"stage", "bootstrap-align"}}, &c,
                     {train.manifest, dev.manifest}, {align_train, align_dev});
    }
    RequireArtifact(align_train, "kws train --corpus clean");
    RequireArtifact(align_dev, "kws train --corpus clean");
    train_targets = ReadAlignments(align_train);
    dev_targets = ReadAlignments(align_dev);
    inputs.push_back(align_train);
    inputs.push_back(align_dev);
    target_source = align_train;
  }

  const TrainingData train_data = Assemble(train, train_targets, target_source);
  const TrainingData dev_data = Assemble(dev, dev_targets, target_source);
  const TrainResult result = Train(InitModel(c.model, dim), train_data, &dev_data);

  const fs::path model_path = ModelPath(ctx.out, corpus);
  fs::create_directories(model_path.parent_path());
  SaveModel(result.model, model_path);
  json history;
  history["corpus"] = corpus;
  history["frames"] = {{"train", train_data.frames()}, {"dev", dev_data.frames()}};
  history["epochs"] = json::array();
  for (const EpochStats &e : result.history) {
    history["epochs"].push_back({{"epoch", e.epoch},
                                 {"loss", e.loss},
                                 {"learning_rate", e.learning_rate},
                                 {"dev_accuracy", e.dev_accuracy}});
  }
  history["dev_operating_points"] = DevOperatingPoints(result.model, dev, c);
  const fs::path history_path = ctx.out / "models" / (corpus + ".history.json");
  WriteText(history_path, history.dump(1) + "\n");
  WriteRunRecord(ctx.out / "models" / (corpus + ".run.json"), ctx.out, "train",
                 {{"corpus", corpus}}, &c, inputs, {model_path, history_path});
}

void CmdDecode(const RunContext &ctx, const std::string &model_name, const std::string &condition) {
  const ExperimentConfig &c = ctx.config;
  const fs::path model_path = ModelPath(ctx.out, model_name);
  RequireArtifact(model_path, "kws train --corpus " + model_name);
  if (condition != "clean") {
    Require(!c.Augment(condition).for_training, ErrorKind::kInvalidArgument,
            "'" + condition + "' is a training corpus, not a test condition");
  }
  const fs::path manifest = ConditionManifestPath(ctx.out, condition);
  RequireArtifact(manifest, ProducerOfCorpus(condition));

  const AcousticModel model = LoadModel(model_path);
  const std::vector<ManifestEntry> entries = ReadManifest(manifest);
  const std::vector<FeatureMatrix> features = LoadFeatures(entries, manifest, c.features);
  const DecodingGraph graph =
      BuildKwsGraph(c.corpus.keyword, c.corpus.phone_set.Symbols(), Topology(c), 0.0);
  Require(static_cast<std::size_t>(model.config.keyword_states) == graph.num_states() &&
              model.state_priors.size() == graph.num_states(),
          ErrorKind::kDimensionMismatch, "model outputs do not match the decoding graph");

  std::vector<std::vector<DetectionRecord>> per(entries.size());
  const auto n = static_cast<std::ptrdiff_t>(entries.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Posteriors post = Forward(model, features[i]);
    const Matrix loglik = ScaledLogLikelihoods(post.keyword, model.state_priors);
    DecodingGraph g = graph;
    for (double penalty : c.decoder.entry_penalties) {
      g.entry_penalty = penalty;
      for (const Detection &d : ViterbiDecode(g, loglik).detections) {
        per[i].push_back({entries[i].id, d});
      }
    }
  }
  std::vector<DetectionRecord> records;
  for (auto &v : per) records.insert(records.end(), v.begin(), v.end());
  const fs::path out = DetectionsPath(ctx.out, model_name, condition);
  WriteDetections(records, out);
  WriteRunRecord(out.parent_path() / (condition + ".run.json"), ctx.out, "decode",
                 {{"model", model_name}, {"condition", condition}}, &c, {model_path, manifest},
                 {out});
}

EvalResult CmdEval(const fs::path &detections, const fs::path &labels, double far_low,
                   double far_high, const fs::path &output_dir, const fs::path &record_root) {
  Require(far_low < far_high, ErrorKind::kInvalidArgument, "FAR range must satisfy lo < hi");
  Require(far_low >= 0.0 && far_high <= 1.0, ErrorKind::kInvalidArgument,
          "FAR range must lie within [0, 1]");
  RequireArtifact(detections, "kws decode");
  RequireArtifact(labels, "kws gen-corpus or kws augment");
  const std::vector<DetectionRecord> records = ReadDetections(detections);
  const std::vector<ManifestEntry> entries = ReadManifest(labels);
  std::vector<DetCurve> curves;
  for (const auto &[penalty, trials] : BuildTrials(records, entries)) {
    curves.push_back(ComputeDetCurve(trials, penalty));
  }
  EvalResult result;
  result.curve = CombineCurves(curves);
  result.auc = Auc(result.curve, far_low, far_high);

  fs::create_directories(output_dir);
  const std::string name = detections.parent_path().filename().string();
  const NamedCurve named{name.empty() ? "detections" : name, result.curve};
  EmitPlotData(std::span<const NamedCurve>(&named, 1), output_dir / "det");
  json auc = {{"auc", result.auc}, {"far_range", {far_low, far_high}}};
  WriteText(output_dir / "auc.json", auc.dump(1) + "\n");
  WriteRunRecord(output_dir / "eval.run.json", record_root, "eval",
                 {{"far_range", {far_low, far_high}}}, nullptr, {detections, labels},
                 {output_dir / "det.csv", output_dir / "det.svg", output_dir / "auc.json"});
  return result;
}

std::optional<double> Summary::Reduction(std::size_t model, std::size_t condition) const {
  const auto base = std::find(models.begin(), models.end(), "clean");
  if (base == models.end()) return std::nullopt;
  const double b = auc[base - models.begin()][condition];
  if (!(b > 0.0)) return std::nullopt;
  return RelativeReduction(b, auc[model][condition]);
}

std::string Summary::Text() const {
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "AUC over FAR [%g, %g]; %% reduction vs the clean model\n",
                far_low, far_high);
  out << buf;
  std::size_t width = 5;
  for (const std::string &m : models) width = std::max(width, m.size());
  std::snprintf(buf, sizeof(buf), "%-*s", static_cast<int>(width), "model");
  out << buf;
  for (const std::string &cnd : conditions) {
    const std::string h1 = cnd + " AUC", h2 = cnd + " %red";
    std::snprintf(buf, sizeof(buf), "  %*s  %*s",
                  static_cast<int>(std::max<std::size_t>(8, h1.size())), h1.c_str(),
                  static_cast<int>(std::max<std::size_t>(7, h2.size())), h2.c_str());
    out << buf;
  }
  out << "\n";
  for (std::size_t m = 0; m < models.size(); ++m) {
    std::snprintf(buf, sizeof(buf), "%-*s", static_cast<int>(width), models[m].c_str());
    out << buf;
    for (std::size_t k = 0; k < conditions.size(); ++k) {
      const std::string h1 = conditions[k] + " AUC", h2 = conditions[k] + " %red";
      char red[32] = "-";
      if (models[m] != "clean") {
        if (auto r = Reduction(m, k)) {
          std::snprintf(red, sizeof(red), "%.1f", *r);
        } else {
          std::snprintf(red, sizeof(red), "n/a");
        }
      }
      std::snprintf(buf, sizeof(buf), "  %*.4f  %*s",
                    static_cast<int>(std::max<std::size_t>(8, h1.size())), auc[m][k],
                    static_cast<int>(std::max<std::size_t>(7, h2.size())), red);
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

std::string Summary::Csv() const {
  std::ostringstream out;
  out << "model";
  for (const std::string &cnd : conditions) out << "," << cnd << "_auc," << cnd << "_reduction_pct";
  out << "\n";
  char buf[64];
  for (std::size_t m = 0; m < models.size(); ++m) {
    out << models[m];
    for (std::size_t k = 0; k < conditions.size(); ++k) {
      std::snprintf(buf, sizeof(buf), ",%.6f,", auc[m][k]);
      out << buf;
      if (models[m] != "clean") {
        if (auto r = Reduction(m, k)) {
          std::snprintf(buf, sizeof(buf), "%.3f", *r);
          out << buf;
        }
      }
    }
    out << "\n";
  }
  return out.str();
}

Summary CmdReproduce(const RunContext &ctx) {
  const ExperimentConfig &c = ctx.config;
  // Stale alignments from an earlier configuration must not leak in.
  fs::remove(AlignmentPath(ctx.out, Split::kTrain));
  fs::remove(AlignmentPath(ctx.out, Split::kDev));

  CmdGenCorpus(ctx);
  for (const AugmentConfig &a : c.augment) CmdAugment(ctx, a.name);
  Summary s;
  s.far_low = c.eval.far_low;
  s.far_high = c.eval.far_high;
  s.models = c.TrainingCorpora();
  s.conditions = c.TestConditions();
  for (const std::string &m : s.models) CmdTrain(ctx, m);

  s.auc.assign(s.models.size(), std::vector<double>(s.conditions.size(), 0.0));
  std::vector<fs::path> outputs;
  for (std::size_t k = 0; k < s.conditions.size(); ++k) {
    std::vector<NamedCurve> overlay;
    for (std::size_t m = 0; m < s.models.size(); ++m) {
      CmdDecode(ctx, s.models[m], s.conditions[k]);
      const EvalResult r =
          CmdEval(DetectionsPath(ctx.out, s.models[m], s.conditions[k]),
                  ConditionManifestPath(ctx.out, s.conditions[k]), c.eval.far_low, c.eval.far_high,
                  ctx.out / "eval" / s.models[m] / s.conditions[k], ctx.out);
      s.auc[m][k] = r.auc;
      overlay.emplace_back(s.models[m], r.curve);
    }
    const fs::path stem = ctx.out / "eval" / s.conditions[k] / "det";
    fs::create_directories(stem.parent_path());
    EmitPlotData(overlay, stem);
    outputs.push_back(stem.string() + ".csv");
    outputs.push_back(stem.string() + ".svg");
  }
  WriteText(ctx.out / "summary.txt", s.Text());
  WriteText(ctx.out / "summary.csv", s.Csv());
  outputs.push_back(ctx.out / "summary.txt");
  outputs.push_back(ctx.out / "summary.csv");
  WriteRunRecord(ctx.out / "reproduce.run.json", ctx.out, "reproduce", json::object(), &c, {},
                 outputs);
  return s;
}

}  // namespace kws
