// tools/kws.cc

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

// kws: synthetic keyword-spotting experiments with corrupted training data.
//
//   kws [--config F] [--seed N] [--jobs N] [--out DIR] <command> ...
//
//   gen-corpus                          synthetic corpus and interference
//   augment   --spec NAME               corrupted copy of the clean corpus
//   train     --corpus NAME             model for "clean" or an augmentation
//   decode    --model NAME --condition NAME
//   eval      --detections F --labels F [--far-range lo,hi]
//   reproduce                           everything, then the summary table
//
// Failures print {"error": {"kind", "message", "command"}} on stderr and
// exit nonzero (2 for usage errors).

#include <omp.h>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "kws/config.h"
#include "kws/error.h"
#include "kws/pipeline.h"

namespace {

int ReportError(const std::string &kind, const std::string &message, const std::string &command,
                int code) {
  nlohmann::json j;
  j["error"] = {{"kind", kind}, {"message", message}, {"command", command}};
  std::cerr << j.dump() << std::endl;
  return code;
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::pair<double, double> ParseFarRange(const std::string &text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw UsageError("--far-range must be lo,hi");
  double lo = 0.0, hi = 0.0;
  try {
    std::size_t used = 0;
    lo = std::stod(text.substr(0, comma), &used);
    if (used != comma) throw UsageError("bad number");
    const std::string rest = text.substr(comma + 1);
    hi = std::stod(rest, &used);
    if (used != rest.size()) throw UsageError("bad number");
  } catch (const std::exception &) {
    throw UsageError("--far-range must be two numbers, lo,hi; got '" + text + "'");
  }
  if (!(lo < hi)) throw UsageError("--far-range is reversed or empty: lo must be < hi");
  if (lo < 0.0 || hi > 1.0) throw UsageError("--far-range must lie within [0, 1]");
  return {lo, hi};
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Keyword spotting robustness experiments"};
  app.require_subcommand(1);

  std::string config_path = "configs/default.toml";
  std::optional<std::uint64_t> seed;
  int jobs = 0;
  std::string out = "out";
  app.add_option("--config", config_path, "Experiment config (TOML)");
  app.add_option("--seed", seed, "Override the config's global seed");
  app.add_option("--jobs", jobs, "Worker threads (0: OpenMP default)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--out", out, "Output directory");

  auto *gen = app.add_subcommand("gen-corpus", "Generate the clean corpus and interference");
  std::string spec;
  auto *augment = app.add_subcommand("augment", "Corrupt the clean corpus with one spec");
  augment->add_option("--spec", spec, "Augmentation name from the config")->required();
  std::string corpus;
  auto *train = app.add_subcommand("train", "Train a model on a corpus");
  train->add_option("--corpus", corpus, "\"clean\" or a training-side augmentation")->required();
  std::string model, condition;
  auto *decode = app.add_subcommand("decode", "Decode a test condition with a model");
  decode->add_option("--model", model, "Model name (its training corpus)")->required();
  decode->add_option("--condition", condition, "\"clean\" or a test-side augmentation")->required();
  std::string detections, labels, far_range, eval_out;
  auto *eval = app.add_subcommand("eval", "DET curve and AUC of a detections file");
  eval->add_option("--detections", detections, "Detections JSONL")->required();
  eval->add_option("--labels", labels, "Manifest with the utterance labels")->required();
  eval->add_option("--far-range", far_range, "AUC window lo,hi (default from config)");
  eval->add_option("--output-dir", eval_out, "Where to write det.csv/svg and auc.json");
  auto *reproduce = app.add_subcommand("reproduce", "Run the whole experiment");

  std::string command = "kws";
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    for (const auto *sub : app.get_subcommands()) command = sub->get_name();
    return ReportError("usage", e.what(), command, 2);
  }
  command = app.get_subcommands().front()->get_name();

  try {
    if (jobs > 0) omp_set_num_threads(jobs);

    if (eval->parsed()) {
      std::pair<double, double> range{0.01, 0.5};
      if (!far_range.empty()) {
        range = ParseFarRange(far_range);
      } else if (std::filesystem::exists(config_path)) {
        const kws::ExperimentConfig c = kws::LoadConfig(config_path);
        range = {c.eval.far_low, c.eval.far_high};
      }
      const std::filesystem::path det(detections);
      std::filesystem::path dir = eval_out;
      if (dir.empty()) {
        dir = std::filesystem::path(out) / "eval" / det.parent_path().filename() / det.stem();
      }
      const kws::EvalResult r = kws::CmdEval(det, labels, range.first, range.second, dir, out);
      std::printf("auc %.6f far_range %g,%g\n", r.auc, range.first, range.second);
      return 0;
    }

    kws::RunContext ctx{kws::LoadConfig(config_path), out};
    if (seed) kws::ApplySeed(ctx.config, *seed);

    if (gen->parsed()) {
      kws::CmdGenCorpus(ctx);
    } else if (augment->parsed()) {
      kws::CmdAugment(ctx, spec);
    } else if (train->parsed()) {
      kws::CmdTrain(ctx, corpus);
    } else if (decode->parsed()) {
      kws::CmdDecode(ctx, model, condition);
    } else if (reproduce->parsed()) {
      const kws::Summary s = kws::CmdReproduce(ctx);
      std::fputs(s.Text().c_str(), stdout);
    }
    return 0;
  } catch (const UsageError &e) {
    return ReportError("usage", e.what(), command, 2);
  } catch (const kws::KwsError &e) {
    return ReportError(std::string(kws::ErrorKindName(e.kind())), e.what(), command, 1);
  } catch (const std::exception &e) {
    return ReportError("internal", e.what(), command, 1);
  }
}
