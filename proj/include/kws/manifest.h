// include/kws/manifest.h

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

#ifndef KWS_MANIFEST_H_
#define KWS_MANIFEST_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace kws {

enum class Split { kTrain, kDev, kTest };

std::string SplitName(Split split);
Split ParseSplit(const std::string &name);

inline const std::string kSilencePhone = "sil";

/// Provenance of one corrupted utterance.
struct CorruptionRecord {
  std::string utterance_id;
  std::string interference_id;
  std::string rir_label;
  double target_sir_db = 0.0;
  double alpha = 0.0;
  std::size_t crop_offset = 0;

  friend bool operator==(const CorruptionRecord &, const CorruptionRecord &) = default;
};

/// One utterance line of a JSON Lines manifest.
///
/// `phones` lists every rendered segment in order, with "sil" for silence;
/// `phone_ends[i]` is the sample index one past segment i. For keyword
/// utterances `keyword_start` is the index of the first keyword phone in
/// `phones`; it is -1 otherwise. Corrupted corpora carry these fields over
/// from the clean corpus unchanged, so frame targets always refer to the
/// clean rendering.
struct ManifestEntry {
  std::string id;
  std::string wav;  // relative to the manifest's directory
  bool keyword = false;
  std::vector<std::string> phones;
  std::vector<std::size_t> phone_ends;
  int keyword_start = -1;
  Split split = Split::kTrain;
  std::optional<CorruptionRecord> corruption;

  friend bool operator==(const ManifestEntry &, const ManifestEntry &) = default;
};

/// An interference clip listed in an interference manifest.
struct InterferenceEntry {
  std::string id;
  std::string wav;
  std::string kind;  // "music" | "movie"
  double seconds = 0.0;

  friend bool operator==(const InterferenceEntry &, const InterferenceEntry &) = default;
};

std::vector<ManifestEntry> ReadManifest(const std::filesystem::path &path);
/// Writes entries sorted by id, one compact JSON object per line.
void WriteManifest(std::vector<ManifestEntry> entries, const std::filesystem::path &path);

std::vector<InterferenceEntry> ReadInterferenceManifest(const std::filesystem::path &path);
void WriteInterferenceManifest(std::vector<InterferenceEntry> entries,
                               const std::filesystem::path &path);

/// Resolves an entry's relative wav path against the manifest location.
std::filesystem::path ResolveWav(const std::filesystem::path &manifest_path,
                                 const std::string &wav);

/// Throws kMissingArtifact, naming the command that produces `path`, when
/// the file does not exist.
void RequireArtifact(const std::filesystem::path &path, const std::string &producer);

}  // namespace kws

#endif  // KWS_MANIFEST_H_
