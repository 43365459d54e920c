// src/config.cc

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

#include "kws/config.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "toml.hpp"

#include "kws/decoder.h"
#include "kws/error.h"
#include "kws/rng.h"

namespace kws {

namespace {

using nlohmann::json;

[[noreturn]] void Bad(const std::string &where, const std::string &what) {
  Fail(ErrorKind::kInvalidArgument, "config " + where + ": " + what);
}

void CheckKeys(const toml::table &t, const std::string &where,
               std::initializer_list<std::string_view> allowed) {
  for (const auto &[key, node] : t) {
    if (std::find(allowed.begin(), allowed.end(), key.str()) == allowed.end()) {
      Bad(where, "unknown key '" + std::string(key.str()) + "'");
    }
  }
}

const toml::table *Table(const toml::table &t, std::string_view key, const std::string &where) {
  const toml::node *n = t.get(key);
  if (!n) return nullptr;
  if (!n->is_table()) Bad(where, "'" + std::string(key) + "' must be a table");
  return n->as_table();
}

double GetDouble(const toml::table &t, std::string_view key, double fallback,
                 const std::string &where) {
  const toml::node *n = t.get(key);
  if (!n) return fallback;
  if (auto v = n->value<double>()) return *v;
  Bad(where, "'" + std::string(key) + "' must be a number");
}

std::int64_t GetInt(const toml::table &t, std::string_view key, std::int64_t fallback,
                    const std::string &where) {
  const toml::node *n = t.get(key);
  if (!n) return fallback;
  if (n->is_integer()) return *n->value<std::int64_t>();
  Bad(where, "'" + std::string(key) + "' must be an integer");
}

std::string GetString(const toml::table &t, std::string_view key, const std::string &fallback,
                      const std::string &where) {
  const toml::node *n = t.get(key);
  if (!n) return fallback;
  if (auto v = n->value<std::string>()) return *v;
  Bad(where, "'" + std::string(key) + "' must be a string");
}

bool GetBool(const toml::table &t, std::string_view key, bool fallback, const std::string &where) {
  const toml::node *n = t.get(key);
  if (!n) return fallback;
  if (auto v = n->value<bool>()) return *v;
  Bad(where, "'" + std::string(key) + "' must be a boolean");
}

std::vector<double> GetDoubles(const toml::table &t, std::string_view key,
                               std::vector<double> fallback, const std::string &where) {
  const toml::node *n = t.get(key);
  if (!n) return fallback;
  const toml::array *a = n->as_array();
  if (!a) Bad(where, "'" + std::string(key) + "' must be an array of numbers");
  std::vector<double> out;
  for (const toml::node &e : *a) {
    auto v = e.value<double>();
    if (!v) Bad(where, "'" + std::string(key) + "' must be an array of numbers");
    out.push_back(*v);
  }
  return out;
}

std::vector<std::string> GetStrings(const toml::table &t, std::string_view key,
                                    std::vector<std::string> fallback, const std::string &where) {
  const toml::node *n = t.get(key);
  if (!n) return fallback;
  const toml::array *a = n->as_array();
  if (!a) Bad(where, "'" + std::string(key) + "' must be an array of strings");
  std::vector<std::string> out;
  for (const toml::node &e : *a) {
    auto v = e.value<std::string>();
    if (!v) Bad(where, "'" + std::string(key) + "' must be an array of strings");
    out.push_back(*v);
  }
  return out;
}

Range GetRange(const toml::table &t, std::string_view key, Range fallback,
               const std::string &where) {
  const std::vector<double> v = GetDoubles(t, key, {fallback.low, fallback.high}, where);
  if (v.size() != 2) Bad(where, "'" + std::string(key) + "' must be [low, high]");
  return {v[0], v[1]};
}

// Arrays of tables ([[name]]); missing means empty.
std::vector<const toml::table *> Tables(const toml::table &t, std::string_view key) {
  std::vector<const toml::table *> out;
  const toml::node *n = t.get(key);
  if (!n) return out;
  const toml::array *a = n->as_array();
  if (!a) Bad(std::string(key), "must be an array of tables");
  for (const toml::node &e : *a) {
    if (!e.is_table()) Bad(std::string(key), "must be an array of tables");
    out.push_back(e.as_table());
  }
  return out;
}

void ParseCorpus(const toml::table &t, CorpusConfig &c) {
  const std::string w = "[corpus]";
  CheckKeys(
      t, w,
      {"keyword", "train_positive", "train_negative", "dev_positive", "dev_negative",
       "test_positive", "test_negative", "phone_ms", "silence_ms", "max_fillers", "negative_phones",
       "tone_amplitude", "utterance_gain", "frequency_jitter", "noise_level", "phones"});
  c.keyword = GetStrings(t, "keyword", c.keyword, w);
  c.train_positive = static_cast<int>(GetInt(t, "train_positive", c.train_positive, w));
  c.train_negative = static_cast<int>(GetInt(t, "train_negative", c.train_negative, w));
  c.dev_positive = static_cast<int>(GetInt(t, "dev_positive", c.dev_positive, w));
  c.dev_negative = static_cast<int>(GetInt(t, "dev_negative", c.dev_negative, w));
  c.test_positive = static_cast<int>(GetInt(t, "test_positive", c.test_positive, w));
  c.test_negative = static_cast<int>(GetInt(t, "test_negative", c.test_negative, w));
  c.phone_ms = GetRange(t, "phone_ms", c.phone_ms, w);
  c.silence_ms = GetRange(t, "silence_ms", c.silence_ms, w);
  c.max_fillers = static_cast<int>(GetInt(t, "max_fillers", c.max_fillers, w));
  c.negative_phones = GetRange(t, "negative_phones", c.negative_phones, w);
  c.tone_amplitude = GetRange(t, "tone_amplitude", c.tone_amplitude, w);
  c.utterance_gain = GetRange(t, "utterance_gain", c.utterance_gain, w);
  c.frequency_jitter = GetDouble(t, "frequency_jitter", c.frequency_jitter, w);
  c.noise_level = GetDouble(t, "noise_level", c.noise_level, w);
  if (const toml::node *n = t.get("phones")) {
    // phones = [["ah", 666, 1186], ...]
    const toml::array *a = n->as_array();
    if (!a) Bad(w, "'phones' must be an array of [symbol, f1, f2]");
    c.phone_set.phones.clear();
    for (const toml::node &e : *a) {
      const toml::array *p = e.as_array();
      if (!p || p->size() != 3 || !(*p)[0].is_string()) {
        Bad(w, "'phones' entries must be [symbol, f1, f2]");
      }
      auto f1 = (*p)[1].value<double>(), f2 = (*p)[2].value<double>();
      if (!f1 || !f2) Bad(w, "'phones' frequencies must be numbers");
      c.phone_set.phones.push_back({*(*p)[0].value<std::string>(), *f1, *f2});
    }
  }
}

void ParseFeatures(const toml::table &t, FeatureConfig &f) {
  const std::string w = "[features]";
  CheckKeys(t, w,
            {"window_ms", "hop_ms", "num_mel_bins", "fft_size", "context_left", "context_right",
             "log_floor"});
  f.window_ms = GetDouble(t, "window_ms", f.window_ms, w);
  f.hop_ms = GetDouble(t, "hop_ms", f.hop_ms, w);
  f.num_mel_bins = static_cast<int>(GetInt(t, "num_mel_bins", f.num_mel_bins, w));
  f.fft_size = static_cast<int>(GetInt(t, "fft_size", f.fft_size, w));
  f.context_left = static_cast<int>(GetInt(t, "context_left", f.context_left, w));
  f.context_right = static_cast<int>(GetInt(t, "context_right", f.context_right, w));
  f.log_floor = GetDouble(t, "log_floor", f.log_floor, w);
}

void ParseModel(const toml::table &t, ModelConfig &m) {
  const std::string w = "[model]";
  CheckKeys(t, w,
            {"hidden_layers", "hidden_units", "loss_weight_keyword", "loss_weight_aux",
             "learning_rate", "batch_size", "epochs", "halve_on_plateau"});
  m.hidden_layers = static_cast<int>(GetInt(t, "hidden_layers", m.hidden_layers, w));
  m.hidden_units = static_cast<int>(GetInt(t, "hidden_units", m.hidden_units, w));
  m.loss_weight_keyword = GetDouble(t, "loss_weight_keyword", m.loss_weight_keyword, w);
  m.loss_weight_aux = GetDouble(t, "loss_weight_aux", m.loss_weight_aux, w);
  m.learning_rate = GetDouble(t, "learning_rate", m.learning_rate, w);
  m.batch_size = static_cast<int>(GetInt(t, "batch_size", m.batch_size, w));
  m.epochs = static_cast<int>(GetInt(t, "epochs", m.epochs, w));
  m.halve_on_plateau = GetBool(t, "halve_on_plateau", m.halve_on_plateau, w);
}

json RangeJson(const Range &r) { return json::array({r.low, r.high}); }

}  // namespace

int ExperimentConfig::KeywordStates() const {
  return kFirstKeywordState + static_cast<int>(corpus.keyword.size()) * decoder.states_per_phone;
}

void ExperimentConfig::Validate() const {
  corpus.Validate();
  features.Validate();
  Require(features.sample_rate == corpus.sample_rate, ErrorKind::kInvalidArgument,
          "config: feature and corpus sample rates differ");
  model.Validate();
  HmmTopology::FromSelfLoop(decoder.states_per_phone, decoder.self_loop);
  Require(model.keyword_states == KeywordStates() &&
              model.aux_phones == NumAuxClasses(corpus.phone_set),
          ErrorKind::kInvalidArgument, "config: model outputs do not match keyword and phone set");
  Require(train.targets == "forced_align" || train.targets == "construction",
          ErrorKind::kInvalidArgument,
          "config [train]: targets must be forced_align or construction");
  Require(train.bootstrap_epochs >= 1, ErrorKind::kInvalidArgument,
          "config [train]: bootstrap_epochs must be >= 1");
  Require(!decoder.entry_penalties.empty() && !decoder.thresholds.empty(),
          ErrorKind::kInvalidArgument, "config [decoder]: empty tuning grid");
  Require(eval.far_low < eval.far_high && eval.far_low >= 0.0 && eval.far_high <= 1.0,
          ErrorKind::kInvalidArgument, "config [eval]: far_range must satisfy 0 <= lo < hi <= 1");

  std::set<std::string> names;
  for (const InterferenceConfig &i : interference) {
    i.Validate();
    Require(names.insert("i/" + i.name).second, ErrorKind::kInvalidArgument,
            "config: duplicate interference set '" + i.name + "'");
  }
  for (const RirSetConfig &r : rir_sets) {
    Require(!r.name.empty() && !r.rt60_seconds.empty() && r.rooms_per_rt60 >= 1,
            ErrorKind::kInvalidArgument, "config: RIR set '" + r.name + "' is empty");
    for (double rt : r.rt60_seconds) {
      Require(rt > 0.0 && rt <= 2.0, ErrorKind::kInvalidArgument,
              "config: RIR set '" + r.name + "' rt60 must be in (0, 2] s");
    }
    Require(names.insert("r/" + r.name).second, ErrorKind::kInvalidArgument,
            "config: duplicate RIR set '" + r.name + "'");
  }
  for (const AugmentConfig &a : augment) {
    Require(!a.name.empty() && a.name != "clean", ErrorKind::kInvalidArgument,
            "config: augmentation names must be non-empty and not 'clean'");
    Require(names.insert("a/" + a.name).second, ErrorKind::kInvalidArgument,
            "config: duplicate augmentation '" + a.name + "'");
    Interference(a.interference);
    Rirs(a.rirs);
    a.sir.Validate();
  }
}

const AugmentConfig &ExperimentConfig::Augment(std::string_view name) const {
  for (const AugmentConfig &a : augment) {
    if (a.name == name) return a;
  }
  Fail(ErrorKind::kInvalidArgument, "unknown augmentation '" + std::string(name) + "'");
}

const InterferenceConfig &ExperimentConfig::Interference(std::string_view name) const {
  for (const InterferenceConfig &i : interference) {
    if (i.name == name) return i;
  }
  Fail(ErrorKind::kInvalidArgument, "unknown interference set '" + std::string(name) + "'");
}

const RirSetConfig &ExperimentConfig::Rirs(std::string_view name) const {
  for (const RirSetConfig &r : rir_sets) {
    if (r.name == name) return r;
  }
  Fail(ErrorKind::kInvalidArgument, "unknown RIR set '" + std::string(name) + "'");
}

std::vector<std::string> ExperimentConfig::TrainingCorpora() const {
  std::vector<std::string> out = {"clean"};
  for (const AugmentConfig &a : augment) {
    if (a.for_training) out.push_back(a.name);
  }
  return out;
}

std::vector<std::string> ExperimentConfig::TestConditions() const {
  std::vector<std::string> out = {"clean"};
  for (const AugmentConfig &a : augment) {
    if (!a.for_training) out.push_back(a.name);
  }
  return out;
}

ExperimentConfig ParseConfig(std::string_view text, const std::string &source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error &e) {
    std::ostringstream msg;
    msg << source << ":" << e.source().begin.line << ":" << e.source().begin.column << ": "
        << e.description();
    Fail(ErrorKind::kInvalidArgument, "config parse error: " + msg.str());
  }
  CheckKeys(root, "top level",
            {"seed", "corpus", "interference", "rir_set", "features", "model", "train", "augment",
             "decoder", "eval"});

  ExperimentConfig c;
  const std::int64_t seed = GetInt(root, "seed", 1, "top level");
  if (seed < 0) Bad("top level", "seed must be non-negative");
  if (const toml::table *t = Table(root, "corpus", "top level")) ParseCorpus(*t, c.corpus);
  if (const toml::table *t = Table(root, "features", "top level")) ParseFeatures(*t, c.features);
  if (const toml::table *t = Table(root, "model", "top level")) ParseModel(*t, c.model);
  if (const toml::table *t = Table(root, "train", "top level")) {
    CheckKeys(*t, "[train]", {"targets", "bootstrap_epochs"});
    c.train.targets = GetString(*t, "targets", c.train.targets, "[train]");
    c.train.bootstrap_epochs =
        static_cast<int>(GetInt(*t, "bootstrap_epochs", c.train.bootstrap_epochs, "[train]"));
  }
  if (const toml::table *t = Table(root, "decoder", "top level")) {
    const std::string w = "[decoder]";
    CheckKeys(*t, w, {"states_per_phone", "self_loop", "entry_penalties", "thresholds"});
    c.decoder.states_per_phone =
        static_cast<int>(GetInt(*t, "states_per_phone", c.decoder.states_per_phone, w));
    c.decoder.self_loop = GetDouble(*t, "self_loop", c.decoder.self_loop, w);
    c.decoder.entry_penalties = GetDoubles(*t, "entry_penalties", c.decoder.entry_penalties, w);
    c.decoder.thresholds = GetDoubles(*t, "thresholds", c.decoder.thresholds, w);
  }
  if (const toml::table *t = Table(root, "eval", "top level")) {
    CheckKeys(*t, "[eval]", {"far_range"});
    const std::vector<double> r =
        GetDoubles(*t, "far_range", {c.eval.far_low, c.eval.far_high}, "[eval]");
    if (r.size() != 2) Bad("[eval]", "far_range must be [lo, hi]");
    c.eval.far_low = r[0];
    c.eval.far_high = r[1];
  }
  for (const toml::table *t : Tables(root, "interference")) {
    const std::string w = "[[interference]]";
    CheckKeys(*t, w, {"name", "kind", "seconds", "clip_seconds"});
    InterferenceConfig i;
    i.name = GetString(*t, "name", "", w);
    i.kind = GetString(*t, "kind", "", w);
    i.total_seconds = GetDouble(*t, "seconds", i.total_seconds, w);
    i.clip_seconds = GetDouble(*t, "clip_seconds", i.clip_seconds, w);
    c.interference.push_back(i);
  }
  for (const toml::table *t : Tables(root, "rir_set")) {
    const std::string w = "[[rir_set]]";
    CheckKeys(*t, w, {"name", "rt60", "rooms_per_rt60"});
    RirSetConfig r;
    r.name = GetString(*t, "name", "", w);
    r.rt60_seconds = GetDoubles(*t, "rt60", {}, w);
    r.rooms_per_rt60 = static_cast<int>(GetInt(*t, "rooms_per_rt60", 1, w));
    c.rir_sets.push_back(r);
  }
  for (const toml::table *t : Tables(root, "augment")) {
    const std::string w = "[[augment]]";
    CheckKeys(*t, w, {"name", "split", "interference", "rirs", "sir"});
    AugmentConfig a;
    a.name = GetString(*t, "name", "", w);
    const std::string split = GetString(*t, "split", "train", w);
    if (split != "train" && split != "test") Bad(w, "split must be train or test");
    a.for_training = split == "train";
    a.interference = GetString(*t, "interference", "", w);
    a.rirs = GetString(*t, "rirs", "", w);
    const std::vector<double> sir = GetDoubles(*t, "sir", {0.0, 40.0}, w);
    if (sir.size() != 2) Bad(w, "sir must be [low_db, high_db]");
    a.sir = {sir[0], sir[1]};
    c.augment.push_back(a);
  }

  c.model.keyword_states = c.KeywordStates();
  c.model.aux_phones = NumAuxClasses(c.corpus.phone_set);
  c.features.sample_rate = c.corpus.sample_rate;
  ApplySeed(c, static_cast<std::uint64_t>(seed));
  c.Validate();
  return c;
}

ExperimentConfig LoadConfig(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  Require(static_cast<bool>(in), ErrorKind::kIo, "cannot open config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return ParseConfig(text.str(), path.filename().string());
}

void ApplySeed(ExperimentConfig &config, std::uint64_t seed) {
  config.seed = seed;
  config.corpus.seed = DeriveSeed(seed, "corpus");
  config.model.init_seed = DeriveSeed(seed, "model");
}

std::string CanonicalConfig(const ExperimentConfig &c) {
  json j;
  j["seed"] = c.seed;
  json phones = json::array();
  for (const Phone &p : c.corpus.phone_set.phones) phones.push_back({p.symbol, p.f1, p.f2});
  j["corpus"] = {{"phones", phones},
                 {"keyword", c.corpus.keyword},
                 {"counts",
                  {c.corpus.train_positive, c.corpus.train_negative, c.corpus.dev_positive,
                   c.corpus.dev_negative, c.corpus.test_positive, c.corpus.test_negative}},
                 {"phone_ms", RangeJson(c.corpus.phone_ms)},
                 {"silence_ms", RangeJson(c.corpus.silence_ms)},
                 {"max_fillers", c.corpus.max_fillers},
                 {"negative_phones", RangeJson(c.corpus.negative_phones)},
                 {"tone_amplitude", RangeJson(c.corpus.tone_amplitude)},
                 {"utterance_gain", RangeJson(c.corpus.utterance_gain)},
                 {"frequency_jitter", c.corpus.frequency_jitter},
                 {"noise_level", c.corpus.noise_level},
                 {"sample_rate", c.corpus.sample_rate},
                 {"seed", c.corpus.seed}};
  j["interference"] = json::array();
  for (const InterferenceConfig &i : c.interference) {
    j["interference"].push_back({{"name", i.name},
                                 {"kind", i.kind},
                                 {"seconds", i.total_seconds},
                                 {"clip_seconds", i.clip_seconds}});
  }
  j["rir_set"] = json::array();
  for (const RirSetConfig &r : c.rir_sets) {
    j["rir_set"].push_back(
        {{"name", r.name}, {"rt60", r.rt60_seconds}, {"rooms_per_rt60", r.rooms_per_rt60}});
  }
  const FeatureConfig &f = c.features;
  j["features"] = {{"window_ms", f.window_ms},       {"hop_ms", f.hop_ms},
                   {"num_mel_bins", f.num_mel_bins}, {"fft_size", f.fft_size},
                   {"context_left", f.context_left}, {"context_right", f.context_right},
                   {"log_floor", f.log_floor},       {"sample_rate", f.sample_rate}};
  const ModelConfig &m = c.model;
  j["model"] = {{"hidden_layers", m.hidden_layers},
                {"hidden_units", m.hidden_units},
                {"keyword_states", m.keyword_states},
                {"aux_phones", m.aux_phones},
                {"loss_weight_keyword", m.loss_weight_keyword},
                {"loss_weight_aux", m.loss_weight_aux},
                {"learning_rate", m.learning_rate},
                {"batch_size", m.batch_size},
                {"epochs", m.epochs},
                {"init_seed", m.init_seed},
                {"halve_on_plateau", m.halve_on_plateau}};
  j["train"] = {{"targets", c.train.targets}, {"bootstrap_epochs", c.train.bootstrap_epochs}};
  j["augment"] = json::array();
  for (const AugmentConfig &a : c.augment) {
    j["augment"].push_back({{"name", a.name},
                            {"split", a.for_training ? "train" : "test"},
                            {"interference", a.interference},
                            {"rirs", a.rirs},
                            {"sir", {a.sir.low_db, a.sir.high_db}}});
  }
  j["decoder"] = {{"states_per_phone", c.decoder.states_per_phone},
                  {"self_loop", c.decoder.self_loop},
                  {"entry_penalties", c.decoder.entry_penalties},
                  {"thresholds", c.decoder.thresholds}};
  j["eval"] = {{"far_range", {c.eval.far_low, c.eval.far_high}}};
  return j.dump();
}

}  // namespace kws
