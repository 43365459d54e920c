// src/manifest.cc

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

#include "kws/manifest.h"

#include <algorithm>
#include <fstream>

#include "json.hpp"
#include "kws/error.h"

namespace kws {

using nlohmann::json;

std::string SplitName(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kDev:
      return "dev";
    case Split::kTest:
      return "test";
  }
  return "train";
}

Split ParseSplit(const std::string &name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "test") return Split::kTest;
  Fail(ErrorKind::kInvalidArgument, "unknown split '" + name + "'");
}

namespace {

json EntryToJson(const ManifestEntry &e) {
  json j;
  j["id"] = e.id;
  j["wav"] = e.wav;
  j["label"] = e.keyword ? "keyword" : "non-keyword";
  j["phones"] = e.phones;
  j["phone_ends"] = e.phone_ends;
  j["keyword_start"] = e.keyword_start;
  j["split"] = SplitName(e.split);
  if (e.corruption) {
    j["target_sir_db"] = e.corruption->target_sir_db;
    j["interference_id"] = e.corruption->interference_id;
    j["rir_label"] = e.corruption->rir_label;
    j["alpha"] = e.corruption->alpha;
    j["crop_offset"] = e.corruption->crop_offset;
  } else {
    for (const char *key :
         {"target_sir_db", "interference_id", "rir_label", "alpha", "crop_offset"})
      j[key] = nullptr;
  }
  return j;
}

ManifestEntry EntryFromJson(const json &j) {
  ManifestEntry e;
  e.id = j.at("id").get<std::string>();
  e.wav = j.at("wav").get<std::string>();
  const auto label = j.at("label").get<std::string>();
  if (label != "keyword" && label != "non-keyword")
    Fail(ErrorKind::kInvalidArgument, "manifest entry " + e.id + ": bad label '" + label + "'");
  e.keyword = label == "keyword";
  e.phones = j.at("phones").get<std::vector<std::string>>();
  e.phone_ends = j.at("phone_ends").get<std::vector<std::size_t>>();
  e.keyword_start = j.value("keyword_start", -1);
  e.split = ParseSplit(j.value("split", std::string("train")));
  if (j.contains("alpha") && !j["alpha"].is_null()) {
    CorruptionRecord c;
    c.utterance_id = e.id;
    c.target_sir_db = j.at("target_sir_db").get<double>();
    c.interference_id = j.at("interference_id").get<std::string>();
    c.rir_label = j.at("rir_label").get<std::string>();
    c.alpha = j.at("alpha").get<double>();
    c.crop_offset = j.at("crop_offset").get<std::size_t>();
    e.corruption = c;
  }
  if (e.phones.size() != e.phone_ends.size())
    Fail(ErrorKind::kInvalidArgument, "manifest entry " + e.id + ": phones/phone_ends differ");
  return e;
}

template <typename T, typename Parse>
std::vector<T> ReadJsonLines(const std::filesystem::path &path, Parse parse) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot open manifest: " + path.string());
  std::vector<T> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(parse(json::parse(line)));
    } catch (const json::exception &err) {
      Fail(ErrorKind::kInvalidArgument,
           path.string() + ":" + std::to_string(line_no) + ": " + err.what());
    }
  }
  return out;
}

void WriteLines(const std::vector<json> &rows, const std::filesystem::path &path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) Fail(ErrorKind::kIo, "cannot write manifest: " + path.string());
  for (const auto &row : rows) out << row.dump() << '\n';
}

}  // namespace

std::vector<ManifestEntry> ReadManifest(const std::filesystem::path &path) {
  return ReadJsonLines<ManifestEntry>(path, EntryFromJson);
}

void WriteManifest(std::vector<ManifestEntry> entries, const std::filesystem::path &path) {
  std::sort(entries.begin(), entries.end(),
            [](const ManifestEntry &a, const ManifestEntry &b) { return a.id < b.id; });
  for (std::size_t i = 1; i < entries.size(); ++i)
    if (entries[i].id == entries[i - 1].id)
      Fail(ErrorKind::kInvalidArgument, "duplicate manifest id " + entries[i].id);
  std::vector<json> rows;
  rows.reserve(entries.size());
  for (const auto &e : entries) rows.push_back(EntryToJson(e));
  WriteLines(rows, path);
}

std::vector<InterferenceEntry> ReadInterferenceManifest(const std::filesystem::path &path) {
  return ReadJsonLines<InterferenceEntry>(path, [](const json &j) {
    return InterferenceEntry{j.at("id").get<std::string>(), j.at("wav").get<std::string>(),
                             j.at("kind").get<std::string>(), j.at("seconds").get<double>()};
  });
}

void WriteInterferenceManifest(std::vector<InterferenceEntry> entries,
                               const std::filesystem::path &path) {
  std::sort(entries.begin(), entries.end(),
            [](const InterferenceEntry &a, const InterferenceEntry &b) { return a.id < b.id; });
  std::vector<json> rows;
  for (const auto &e : entries)
    rows.push_back({{"id", e.id}, {"wav", e.wav}, {"kind", e.kind}, {"seconds", e.seconds}});
  WriteLines(rows, path);
}

std::filesystem::path ResolveWav(const std::filesystem::path &manifest_path,
                                 const std::string &wav) {
  std::filesystem::path p(wav);
  if (p.is_absolute()) return p;
  return manifest_path.parent_path() / p;
}

void RequireArtifact(const std::filesystem::path &path, const std::string &producer) {
  if (!std::filesystem::exists(path))
    Fail(ErrorKind::kMissingArtifact,
         "missing " + path.string() + " (produced by `" + producer + "`)");
}

}  // namespace kws
