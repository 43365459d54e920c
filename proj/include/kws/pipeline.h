// include/kws/pipeline.h

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

#ifndef KWS_PIPELINE_H_
#define KWS_PIPELINE_H_

// Experiment stages. Every stage reads its inputs from and writes its
// outputs under one output directory:
//
//   corpus/clean/{train,dev,test}.jsonl, wav/
//   corpus/interference/<set>/manifest.jsonl, wav/
//   augmented/<spec>/<split>/manifest.jsonl, wav/
//   alignments/{train,dev}.jsonl
//   models/<corpus>.json, models/<corpus>.history.json
//   detections/<model>/<condition>.jsonl
//   eval/<model>/<condition>/det.{csv,svg}, auc.json
//   eval/<condition>/det.{csv,svg}
//   summary.txt, summary.csv
//
// and leaves a run record (*.run.json) next to what it wrote.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kws/config.h"
#include "kws/decoder.h"
#include "kws/evaluation.h"
#include "kws/features.h"
#include "kws/manifest.h"

namespace kws {

struct RunContext {
  ExperimentConfig config;
  std::filesystem::path out;
};

std::filesystem::path CleanManifestPath(const std::filesystem::path &out, Split split);
std::filesystem::path InterferenceManifestPath(const std::filesystem::path &out,
                                               const std::string &set);
/// Manifest of `split` for a training corpus ("clean" or a training-side
/// augmentation).
std::filesystem::path CorpusManifestPath(const std::filesystem::path &out,
                                         const std::string &corpus, Split split);
/// Test manifest of a condition ("clean" or a test-side augmentation).
std::filesystem::path ConditionManifestPath(const std::filesystem::path &out,
                                            const std::string &condition);
std::filesystem::path AlignmentPath(const std::filesystem::path &out, Split split);
std::filesystem::path ModelPath(const std::filesystem::path &out, const std::string &corpus);
std::filesystem::path DetectionsPath(const std::filesystem::path &out, const std::string &model,
                                     const std::string &condition);

/// FNV-1a 64 of a file's bytes, as 16 hex digits.
std::string FileDigest(const std::filesystem::path &path);

/// Features of every manifest entry, computed in parallel.
std::vector<FeatureMatrix> LoadFeatures(std::span<const ManifestEntry> entries,
                                        const std::filesystem::path &manifest_path,
                                        const FeatureConfig &config);

struct DetectionRecord {
  std::string id;
  Detection detection;
  friend bool operator==(const DetectionRecord &a, const DetectionRecord &b) {
    return a.id == b.id && a.detection.start_frame == b.detection.start_frame &&
           a.detection.end_frame == b.detection.end_frame &&
           a.detection.score == b.detection.score &&
           a.detection.entry_penalty == b.detection.entry_penalty;
  }
};

/// JSON Lines with id, start_frame, end_frame, score, entry_penalty and
/// threshold (null: detections are thresholded at evaluation time).
void WriteDetections(std::span<const DetectionRecord> records, const std::filesystem::path &path);
std::vector<DetectionRecord> ReadDetections(const std::filesystem::path &path);

/// One trial set per entry penalty: each labelled utterance takes its best
/// detection score under that penalty, or none.
std::vector<std::pair<double, TrialSet>> BuildTrials(std::span<const DetectionRecord> detections,
                                                     std::span<const ManifestEntry> labels);

void CmdGenCorpus(const RunContext &ctx);
void CmdAugment(const RunContext &ctx, const std::string &spec);
void CmdTrain(const RunContext &ctx, const std::string &corpus);
void CmdDecode(const RunContext &ctx, const std::string &model, const std::string &condition);

struct EvalResult {
  DetCurve curve;
  double auc = 0.0;
};

/// Combined DET curve over all entry penalties and its AUC on
/// [far_low, far_high]. Writes det.csv, det.svg and auc.json to
/// `output_dir`.
EvalResult CmdEval(const std::filesystem::path &detections, const std::filesystem::path &labels,
                   double far_low, double far_high, const std::filesystem::path &output_dir,
                   const std::filesystem::path &record_root);

struct Summary {
  double far_low = 0.0;
  double far_high = 0.0;
  std::vector<std::string> conditions;
  std::vector<std::string> models;
  std::vector<std::vector<double>> auc;  // [model][condition]

  /// % reduction against the "clean" model on the same condition; empty
  /// when the baseline AUC is zero.
  std::optional<double> Reduction(std::size_t model, std::size_t condition) const;
  std::string Text() const;
  std::string Csv() const;
};

/// gen-corpus, augment (every spec), train (every corpus), decode and
/// evaluate (every model x condition), then the summary table.
Summary CmdReproduce(const RunContext &ctx);

}  // namespace kws

#endif  // KWS_PIPELINE_H_
