// tests/acceptance.cc

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

// Acceptance run: prints one PASS/FAIL line per criterion and exits nonzero
// when any criterion fails.
//
//   kws-acceptance [--workdir DIR] [--only 1,4,6] [--seeds 1,2,3]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kws/augment.h"
#include "kws/config.h"
#include "kws/decoder.h"
#include "kws/error.h"
#include "kws/evaluation.h"
#include "kws/model.h"
#include "kws/pipeline.h"
#include "oracles.h"
#include "test_util.h"

namespace kws {
namespace {

namespace fs = std::filesystem;

const fs::path kConfigDir = KWS_CONFIG_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Format(const char *fmt, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, a, b, c);
  return buf;
}

Outcome SirRoundTrip() {
  Rng rng(DeriveSeed(1, "acceptance/sir"));
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + rng.UniformInt(16000);
    const AudioBuffer s = test::RandomAudio(rng, n, rng.Uniform(0.001, 1.0));
    const AudioBuffer v = test::RandomAudio(rng, n, rng.Uniform(0.001, 1.0));
    const double target = rng.Uniform(-20.0, 40.0);
    const AudioBuffer scaled = Scale(v, ComputeAlpha(s, v, target));
    // The mix is what gets stored; its interference part is mix - speech.
    const AudioBuffer mixed = Mix(s, scaled, 1.0);
    std::vector<double> part(n);
    for (std::size_t k = 0; k < n; ++k) part[k] = mixed[k] - s[k];
    worst = std::max(worst, std::abs(MeasureSir(s, scaled) - target));
    worst = std::max(worst, std::abs(MeasureSir(s, AudioBuffer(part, s.sample_rate())) - target));
  }
  return {worst < 1e-6, Format("max |error| %.3g dB over 1000 triples", worst)};
}

Outcome ConvolutionOracle() {
  Rng rng(DeriveSeed(1, "acceptance/convolve"));
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 1 + rng.UniformInt(4096), m = 1 + rng.UniformInt(4096);
    const AudioBuffer x = test::RandomAudio(rng, n);
    RoomImpulseResponse h;
    h.taps = test::RandomSamples(rng, m);
    const AudioBuffer y = Convolve(x, h);
    if (y.size() != n + m - 1) return {false, "wrong output length"};
    std::vector<double> ref(n + m - 1, 0.0);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < m; ++b) ref[a + b] += x[a] * h.taps[b];
    for (std::size_t k = 0; k < ref.size(); ++k) worst = std::max(worst, std::abs(y[k] - ref[k]));
  }
  return {worst <= 1e-9, Format("max |error| %.3g over 100 pairs", worst)};
}

Outcome ReductionArithmetic() {
  const double movie = RelativeReduction(0.170, 0.102);
  const double music = RelativeReduction(0.170, 0.089);
  return {std::abs(movie - 40.0) <= 0.05 && std::abs(music - 47.6) <= 0.05,
          Format("%.2f%% and %.2f%%", movie, music)};
}

const std::vector<std::string> kPhones{"sil", "ah", "l", "eh", "k", "s", "b", "d"};

Outcome DecoderOracle() {
  Rng rng(DeriveSeed(1, "acceptance/decoder"));
  int viterbi_bad = 0, align_bad = 0;
  for (int i = 0; i < 500; ++i) {
    DecodingGraph g;
    Matrix ll;
    if (i % 2 == 0) {
      // Dyadic weights: exact arithmetic, frequent ties.
      const int n = 3 + static_cast<int>(rng.UniformInt(4));
      g = oracle::RandomDyadicGraph(rng, n);
      ll = oracle::DyadicScores(rng, 1 + rng.UniformInt(8), n);
    } else {
      const int spp = i % 3 == 0 ? 3 : 1;
      const std::size_t phones = spp == 3 ? 1 : 1 + rng.UniformInt(4);
      std::vector<std::string> kw;
      for (std::size_t p = 0; p < phones; ++p) kw.push_back(kPhones[1 + rng.UniformInt(7)]);
      g = BuildKwsGraph(kw, kPhones, HmmTopology::FromSelfLoop(spp, rng.Uniform(0.3, 0.9)),
                        rng.Uniform(-2.0, 4.0));
      const Matrix post = test::RandomMatrix(rng, 1 + rng.UniformInt(8), g.num_states(), 0.01, 1);
      ll = ScaledLogLikelihoods(post, test::RandomSamples(rng, g.num_states(), 0.05, 1.0));
    }
    const oracle::Best want = oracle::BruteViterbi(g, ll);
    const DecodeResult got = ViterbiDecode(g, ll);
    bool ok = got.path == want.path;
    if (ok && !want.path.empty()) {
      const auto segs = oracle::OracleDetections(g, want.path);
      ok = got.detections.size() == segs.size();
      for (std::size_t d = 0; ok && d < segs.size(); ++d)
        ok = got.detections[d].start_frame == segs[d].start &&
             got.detections[d].end_frame == segs[d].end;
    }
    viterbi_bad += !ok;

    // Forced alignment; small chains with repeated columns force ties.
    const std::size_t k = 1 + rng.UniformInt(6);
    const std::size_t frames = k + rng.UniformInt(9 - std::min<std::size_t>(k, 8));
    std::vector<int> chain(k);
    for (int &c : chain) c = static_cast<int>(rng.UniformInt(i % 2 == 0 ? 2 : 6));
    Matrix scores(frames, 6);
    for (double &v : scores.values())
      v = i % 2 == 0 ? -static_cast<double>(rng.UniformInt(3)) : rng.Uniform(-5.0, 0.0);
    const HmmTopology topo = HmmTopology::FromSelfLoop(1, i % 2 == 0 ? 0.5 : rng.Uniform(0.2, 0.9));
    const Alignment a = ForcedAlign(chain, scores, topo);
    const Alignment b = oracle::BruteAlign(chain, scores, topo);
    align_bad += a.positions != b.positions;
  }
  return {viterbi_bad == 0 && align_bad == 0,
          Format("viterbi mismatches %.0f/500, forced_align mismatches %.0f/500", viterbi_bad,
                 align_bad)};
}

Outcome TrainingMath() {
  Rng rng(DeriveSeed(1, "acceptance/gradient"));
  double worst = 0.0, weakest = 1e300;
  for (int trial = 0; trial < 20; ++trial) {
    ModelConfig c;
    c.hidden_layers = 1 + trial % 3;
    c.hidden_units = 16;
    c.keyword_states = 4;
    c.aux_phones = 3;
    c.init_seed = 1000 + trial;
    c.loss_weight_keyword = 0.9;
    c.loss_weight_aux = 0.1;
    const AcousticModel m = InitModel(c, 8);
    const Matrix x = test::RandomMatrix(rng, 16, 8, -2, 2);
    std::vector<int> kw(16), aux(16);
    for (int &t : kw) t = static_cast<int>(rng.UniformInt(4));
    for (int &t : aux) t = static_cast<int>(rng.UniformInt(3));
    GradientCheckOptions opt;
    opt.seed = trial;
    const GradientCheckResult r = GradientCheck(m, x, kw, aux, opt);
    if (r.checked + r.skipped < 200) return {false, "fewer than 200 parameters checked"};
    worst = std::max(worst, r.max_relative_error);

    // Double one output-bias gradient (never skipped: no ReLU downstream).
    Parameters g;
    LossAndGradient(m, x, kw, aux, g);
    const std::size_t block = 2 * m.params.hidden.size() + 1;
    const auto blocks = g.Blocks();
    std::size_t start = 0, best = 0;
    for (std::size_t b = 0; b < block; ++b) start += blocks[b].size();
    for (std::size_t j = 1; j < blocks[block].size(); ++j)
      if (std::abs(blocks[block][j]) > std::abs(blocks[block][best])) best = j;
    opt.include = {start + best};
    opt.mutate_gradient = [&](Parameters &p) { p.Blocks()[block][best] *= 2.0; };
    weakest = std::min(weakest, GradientCheck(m, x, kw, aux, opt).max_relative_error);
  }
  return {worst < 1e-4 && weakest > 1e-2,
          Format("max relative error %.3g; weakest mutation signal %.3g", worst, weakest)};
}

struct SeedAuc {
  std::uint64_t seed = 0;
  std::map<std::string, std::map<std::string, double>> auc;  // [model][condition]
};

// Generates, augments, trains and decodes only what criteria 6 and 7 read.
SeedAuc RunSeed(const fs::path &root, std::uint64_t seed) {
  RunContext ctx{LoadConfig(kConfigDir / "default.toml"), root / ("seed" + std::to_string(seed))};
  ApplySeed(ctx.config, seed);
  fs::remove_all(ctx.out);
  CmdGenCorpus(ctx);
  for (const char *spec : {"music_0_40", "music_m20_40", "test_music"}) CmdAugment(ctx, spec);
  SeedAuc out;
  out.seed = seed;
  for (const char *model : {"clean", "music_0_40", "music_m20_40"}) {
    CmdTrain(ctx, model);
    for (const char *cond : {"clean", "test_music"}) {
      CmdDecode(ctx, model, cond);
      const EvalResult r =
          CmdEval(DetectionsPath(ctx.out, model, cond), ConditionManifestPath(ctx.out, cond),
                  ctx.config.eval.far_low, ctx.config.eval.far_high,
                  ctx.out / "eval" / model / cond, ctx.out);
      out.auc[model][cond] = r.auc;
    }
  }
  std::printf(
      "  seed %llu: clean model %.4f / %.4f, music_0_40 %.4f / %.4f, music_m20_40 %.4f "
      "/ %.4f (test_music / clean AUC)\n",
      static_cast<unsigned long long>(seed), out.auc["clean"]["test_music"],
      out.auc["clean"]["clean"], out.auc["music_0_40"]["test_music"],
      out.auc["music_0_40"]["clean"], out.auc["music_m20_40"]["test_music"],
      out.auc["music_m20_40"]["clean"]);
  std::fflush(stdout);
  return out;
}

Outcome HeadlineEffect(const std::vector<SeedAuc> &runs) {
  int wins = 0;
  std::string detail;
  for (const SeedAuc &r : runs) {
    const double base = r.auc.at("clean").at("test_music");
    const double aug = r.auc.at("music_0_40").at("test_music");
    const bool ok = base > 0.0 && RelativeReduction(base, aug) >= 20.0;
    wins += ok;
    detail += Format("%.1f%% ", base > 0.0 ? RelativeReduction(base, aug) : 0.0);
  }
  return {wins >= 2, "reduction per seed: " + detail + "(need >= 20% in 2 of 3)"};
}

Outcome SirTradeOff(const std::vector<SeedAuc> &runs) {
  int corrupted = 0, clean = 0;
  for (const SeedAuc &r : runs) {
    corrupted +=
        r.auc.at("music_m20_40").at("test_music") <= r.auc.at("music_0_40").at("test_music");
    clean += r.auc.at("music_0_40").at("clean") <= r.auc.at("music_m20_40").at("clean");
  }
  return {corrupted >= 2 && clean >= 2,
          Format("[-20,40] <= [0,40] on corrupted test in %.0f/3 seeds; [0,40] <= [-20,40] on "
                 "clean test in %.0f/3 seeds",
                 corrupted, clean)};
}

std::map<std::string, std::string> Snapshot(const fs::path &root) {
  std::map<std::string, std::string> files;
  for (const auto &e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file())
      files[fs::relative(e.path(), root).string()] = test::ReadFile(e.path());
  return files;
}

Outcome Determinism(const fs::path &root) {
  std::string summary[2];
  std::map<std::string, std::string> snap[2];
  for (int i = 0; i < 2; ++i) {
    RunContext ctx{LoadConfig(kConfigDir / "default.toml"), root / (i == 0 ? "det_a" : "det_b")};
    fs::remove_all(ctx.out);
    summary[i] = CmdReproduce(ctx).Text();
    snap[i] = Snapshot(ctx.out);
  }
  if (summary[0] != summary[1]) return {false, "summary tables differ"};
  if (snap[0].size() != snap[1].size()) return {false, "different file sets"};
  std::size_t manifests = 0, models = 0, detections = 0;
  for (const auto &[name, bytes] : snap[0]) {
    const auto it = snap[1].find(name);
    if (it == snap[1].end() || it->second != bytes) return {false, name + " differs"};
    manifests += name.ends_with(".jsonl") && !name.starts_with("detections/");
    models += name.starts_with("models/") && name.ends_with(".json");
    detections += name.starts_with("detections/") && name.ends_with(".jsonl");
  }
  std::ostringstream s;
  s << snap[0].size() << " files identical (" << manifests << " manifests, " << models
    << " model files, " << detections << " detection files, summary.txt/csv)";
  return {true, s.str()};
}

Outcome EvaluationProperties() {
  Rng rng(DeriveSeed(1, "acceptance/evaluation"));
  TrialSet perfect;
  for (int i = 0; i < 50; ++i) {
    perfect.positives.push_back({"p" + std::to_string(i), rng.Uniform(1.0, 2.0)});
    perfect.negatives.push_back({"n" + std::to_string(i), rng.Uniform(-2.0, 0.5)});
  }
  const double perfect_auc = Auc(ComputeDetCurve(perfect), 0.01, 0.5);
  if (perfect_auc != 0.0) return {false, Format("perfect detector AUC %.3g", perfect_auc)};

  auto random_trials = [&] {
    TrialSet t;
    const std::size_t np = 1 + rng.UniformInt(60), nn = 1 + rng.UniformInt(60);
    for (std::size_t i = 0; i < np; ++i)
      t.positives.push_back({"p" + std::to_string(i),
                             rng.UniformInt(6) == 0 ? std::optional<double>()
                                                    : std::optional<double>(rng.Uniform(-1, 3))});
    for (std::size_t i = 0; i < nn; ++i)
      t.negatives.push_back({"n" + std::to_string(i),
                             rng.UniformInt(3) == 0 ? std::optional<double>()
                                                    : std::optional<double>(rng.Uniform(-3, 1))});
    return t;
  };
  int monotone_bad = 0, envelope_bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const DetCurve a = ComputeDetCurve(random_trials());
    DetCurve b = a;
    for (DetPoint &p : b.points) p.frr = std::max(0.0, p.frr - rng.Uniform(0.0, 0.3));
    const double lo = rng.Uniform(0.0, 0.5), hi = lo + rng.Uniform(0.01, 0.5);
    monotone_bad += Auc(b, lo, hi) > Auc(a, lo, hi);
  }
  for (int i = 0; i < 1000; ++i) {
    const DetCurve c = ComputeDetCurve(random_trials());
    for (std::size_t k = 1; k < c.points.size(); ++k)
      if (c.points[k].far < c.points[k - 1].far || c.points[k].frr > c.points[k - 1].frr) {
        ++envelope_bad;
        break;
      }
  }
  return {monotone_bad == 0 && envelope_bad == 0,
          Format("perfect AUC 0; domination violations %.0f/1000; envelope violations %.0f/1000",
                 monotone_bad, envelope_bad)};
}

std::set<int> ParseList(const std::string &text) {
  std::set<int> out;
  std::stringstream s(text);
  std::string item;
  while (std::getline(s, item, ',')) out.insert(std::stoi(item));
  return out;
}

}  // namespace
}  // namespace kws

int main(int argc, char **argv) {
  using namespace kws;
  fs::path workdir = "acceptance_work";
  std::set<int> only;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (i + 1 >= argc) {
      std::fprintf(stderr, "usage: kws-acceptance [--workdir DIR] [--only N,..] [--seeds S,..]\n");
      return 2;
    }
    if (arg == "--workdir") {
      workdir = argv[++i];
    } else if (arg == "--only") {
      only = ParseList(argv[++i]);
    } else if (arg == "--seeds") {
      seeds.clear();
      for (int s : ParseList(argv[++i])) seeds.push_back(static_cast<std::uint64_t>(s));
    } else {
      std::fprintf(stderr, "unknown argument %s\n", arg.c_str());
      return 2;
    }
  }
  fs::create_directories(workdir);

  int failures = 0;
  auto run = [&](int id, const char *name, const std::function<Outcome()> &fn) {
    if (!only.empty() && !only.count(id)) return;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception &e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::printf("criterion %d: %s  %s: %s [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  };

  run(1, "SIR round trip", SirRoundTrip);
  run(2, "convolution oracle", ConvolutionOracle);
  run(3, "reduction arithmetic", ReductionArithmetic);
  run(4, "decoder vs enumeration", DecoderOracle);
  run(5, "gradient check", TrainingMath);

  std::vector<SeedAuc> runs;
  std::string seed_error;
  auto ensure_runs = [&] {
    if (!runs.empty() || !seed_error.empty()) return;
    for (std::uint64_t s : seeds) runs.push_back(RunSeed(workdir, s));
  };
  run(6, "music-corrupted training vs clean", [&] {
    ensure_runs();
    return HeadlineEffect(runs);
  });
  run(7, "SIR range trade-off", [&] {
    ensure_runs();
    return SirTradeOff(runs);
  });
  run(8, "reproduce determinism", [&] { return Determinism(workdir); });
  run(9, "evaluation properties", EvaluationProperties);

  std::printf("%s\n", failures == 0 ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL");
  return failures == 0 ? 0 : 1;
}
