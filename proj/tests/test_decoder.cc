// tests/test_decoder.cc

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

#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "doctest.h"
#include "kws/decoder.h"
#include "kws/error.h"
#include "oracles.h"
#include "test_util.h"

namespace kws {
namespace {

using namespace oracle;

const std::vector<std::string> kPhones{"sil", "ah", "l", "eh", "k", "s", "b", "d"};
const std::vector<std::string> kKeyword{"ah", "l", "eh", "k", "s", "ah"};

void CheckAgainstOracle(const DecodingGraph &g, const Matrix &ll) {
  const Best want = BruteViterbi(g, ll);
  const DecodeResult r = ViterbiDecode(g, ll);
  REQUIRE(r.path == want.path);
  if (want.path.empty()) return;
  CHECK(r.path_score == want.score);
  CHECK(PathScore(g, ll, r.path) == want.score);
  const auto segs = OracleDetections(g, want.path);
  REQUIRE(r.detections.size() == segs.size());
  for (std::size_t i = 0; i < segs.size(); ++i) {
    CHECK(r.detections[i].start_frame == segs[i].start);
    CHECK(r.detections[i].end_frame == segs[i].end);
    CHECK(r.detections[i].score == doctest::Approx(OracleDetectionScore(ll, want.path, segs[i])));
    CHECK(r.detections[i].entry_penalty == g.entry_penalty);
  }
}

std::size_t CountEntries(const std::vector<int> &path, int entry) {
  std::size_t n = 0;
  for (std::size_t t = 0; t < path.size(); ++t)
    if (path[t] == entry && (t == 0 || path[t - 1] < kFirstKeywordState)) ++n;
  return n;
}

}  // namespace

TEST_CASE("graph construction") {
  const HmmTopology one;
  const DecodingGraph g = BuildKwsGraph(kKeyword, kPhones, one, 0.0);
  CHECK(g.num_states() == 8);
  CHECK(g.keyword_entry == 2);
  CHECK(g.keyword_final == 7);
  CHECK_NOTHROW(g.Validate());
  int keyword_states = 0;
  for (std::size_t s = 0; s < g.num_states(); ++s)
    keyword_states += g.IsKeyword(static_cast<int>(s));
  CHECK(keyword_states == 6);

  const DecodingGraph g3 =
      BuildKwsGraph({"ah", "l"}, kPhones, HmmTopology::FromSelfLoop(3, 0.7), 0.0);
  CHECK(g3.num_states() == 8);
  CHECK(g3.states[4].keyword_position == 0);
  CHECK(g3.states[4].sub_state == 2);
  CHECK(g3.states[5].keyword_position == 1);

  CHECK_THROWS_AS(BuildKwsGraph({"ah", "zz"}, kPhones, one, 0.0), KwsError);
  CHECK_THROWS_AS(BuildKwsGraph({}, kPhones, one, 0.0), KwsError);
  CHECK_THROWS_AS(HmmTopology::FromSelfLoop(2, 0.5).Validate(), KwsError);
}

TEST_CASE("graph stochasticity excluding penalties") {
  for (int spp : {1, 3, 5}) {
    const DecodingGraph g =
        BuildKwsGraph(kKeyword, kPhones, HmmTopology::FromSelfLoop(spp, 0.6), 7.5);
    std::vector<double> mass(g.num_states(), 0.0);
    for (const Arc &a : g.arcs) mass[a.from] += std::exp(a.logp);
    for (double m : mass) CHECK(std::abs(m - 1.0) < 1e-9);
    double start = 0.0;
    for (double s : g.start_logp) start += std::exp(s);
    CHECK(std::abs(start - 1.0) < 1e-9);
    // Only background-to-entry arcs carry the penalty.
    for (const Arc &a : g.arcs) CHECK(a.penalized == (a.to == g.keyword_entry && a.from < 2));
  }
}

TEST_CASE("graph dump lists every state and arc") {
  const DecodingGraph g = BuildKwsGraph({"ah", "l"}, kPhones, HmmTopology{}, 1.0);
  const std::string d = g.Dump();
  CHECK(std::count(d.begin(), d.end(), '\n') >= static_cast<long>(g.num_states()));
  CHECK(d.find("bg-speech") != std::string::npos);
  CHECK(d == BuildKwsGraph({"ah", "l"}, kPhones, HmmTopology{}, 1.0).Dump());
}

TEST_CASE("single frame gives no detection") {
  const DecodingGraph g = BuildKwsGraph(kKeyword, kPhones, HmmTopology{}, 0.0);
  Matrix post(1, 8, 0.0);
  post(0, 7) = 1.0;  // final state is not a start state
  const DecodeResult r = Viterbi(g, post, std::vector<double>(8, 0.125));
  CHECK(r.path.size() == 1);
  CHECK(r.detections.empty());
}

TEST_CASE("forced keyword path gives one detection spanning all frames") {
  const DecodingGraph g = BuildKwsGraph(kKeyword, kPhones, HmmTopology{}, 2.0);
  for (std::size_t frames : {6u, 9u, 20u}) {
    Matrix post(frames, 8, 0.0);
    for (std::size_t t = 0; t < frames; ++t) post(t, 2 + t * 6 / frames) = 1.0;
    const DecodeResult r = Viterbi(g, post, std::vector<double>(8, 0.125));
    REQUIRE(r.detections.size() == 1);
    CHECK(r.detections[0].start_frame == 0);
    CHECK(r.detections[0].end_frame == frames - 1);
    CHECK(std::isfinite(r.detections[0].score));
  }
}

TEST_CASE("dimension mismatch") {
  const DecodingGraph g = BuildKwsGraph(kKeyword, kPhones, HmmTopology{}, 0.0);
  CHECK_THROWS_AS(ViterbiDecode(g, Matrix(3, 7)), KwsError);
  CHECK_THROWS_AS(Viterbi(g, Matrix(3, 8, 0.1), std::vector<double>(7, 0.1)), KwsError);
  CHECK(ViterbiDecode(g, Matrix(0, 8)).path.empty());
}

TEST_CASE("hand 4-state graph against enumeration") {
  const DecodingGraph g = BuildKwsGraph({"ah", "l"}, kPhones, HmmTopology{}, 0.5);
  REQUIRE(g.num_states() == 4);
  Matrix post(6, 4);
  const double rows[6][4] = {{.7, .1, .1, .1}, {.2, .1, .6, .1}, {.1, .1, .7, .1},
                             {.1, .1, .2, .6}, {.1, .5, .1, .3}, {.1, .8, .05, .05}};
  for (int t = 0; t < 6; ++t)
    for (int s = 0; s < 4; ++s) post(t, s) = rows[t][s];
  const std::vector<double> priors{0.4, 0.3, 0.15, 0.15};
  const Matrix ll = ScaledLogLikelihoods(post, priors);
  CheckAgainstOracle(g, ll);
  CHECK(ViterbiDecode(g, ll).detections.size() == 1);
}

TEST_CASE("Viterbi matches enumeration: random dyadic graphs with ties") {
  Rng rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 3 + static_cast<int>(rng.UniformInt(4));
    const DecodingGraph g = RandomDyadicGraph(rng, n);
    CheckAgainstOracle(g, DyadicScores(rng, 1 + rng.UniformInt(8), n));
  }
}

TEST_CASE("Viterbi matches enumeration: keyword graphs, random posteriors") {
  Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const int spp = trial % 3 == 0 ? 3 : 1;
    const std::size_t phones = spp == 3 ? 1 : 1 + rng.UniformInt(4);
    std::vector<std::string> kw;
    for (std::size_t p = 0; p < phones; ++p) kw.push_back(kPhones[1 + rng.UniformInt(7)]);
    const DecodingGraph g = BuildKwsGraph(
        kw, kPhones, HmmTopology::FromSelfLoop(spp, rng.Uniform(0.3, 0.9)), rng.Uniform(-2.0, 4.0));
    const std::size_t n = g.num_states();
    Matrix post = test::RandomMatrix(rng, 1 + rng.UniformInt(8), n, 0.01, 1.0);
    std::vector<double> priors = test::RandomSamples(rng, n, 0.05, 1.0);
    CheckAgainstOracle(g, ScaledLogLikelihoods(post, priors));
  }
}

TEST_CASE("Viterbi matches enumeration: all-equal scores resolve to the smallest path") {
  const DecodingGraph g =
      BuildKwsGraph({"ah", "l"}, kPhones, HmmTopology::FromSelfLoop(1, 0.5), 0.0);
  for (std::size_t frames = 1; frames <= 8; ++frames) CheckAgainstOracle(g, Matrix(frames, 4, 0.0));
}

TEST_CASE("detection score") {
  const DecodingGraph g = BuildKwsGraph({"ah", "l"}, kPhones, HmmTopology{}, 0.0);
  const std::vector<int> path{2, 2, 3, 3};
  Matrix equal(4, 4, -1.0);
  CHECK(DetectionScore(g, equal, path, 0, 3) == 0.0);
  // Keyword states e times as likely as the best background state.
  Matrix post(4, 4);
  for (std::size_t t = 0; t < 4; ++t) {
    post(t, 0) = 0.1;
    post(t, 1) = 0.05;
    post(t, 2) = 0.1 * std::exp(1.0);
    post(t, 3) = 0.1 * std::exp(1.0);
  }
  const std::vector<double> flat(4, 0.25);
  CHECK(DetectionScore(g, ScaledLogLikelihoods(post, flat), path, 0, 3) ==
        doctest::Approx(1.0).epsilon(1e-12));
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    Matrix p = test::RandomMatrix(rng, 4, 4, 0.01, 1.0);
    const double before = DetectionScore(g, ScaledLogLikelihoods(p, flat), path, 1, 3);
    Matrix q = p;
    const double c = rng.Uniform(0.1, 10.0);
    for (double &v : q.values()) v *= c;
    CHECK(DetectionScore(g, ScaledLogLikelihoods(q, flat), path, 1, 3) == doctest::Approx(before));
  }
}

TEST_CASE("penalty never increases keyword entries or detections") {
  Rng rng(43);
  const DecodingGraph base = BuildKwsGraph(kKeyword, kPhones, HmmTopology{}, 0.0);
  for (int trial = 0; trial < 300; ++trial) {
    Matrix post = test::RandomMatrix(rng, 5 + rng.UniformInt(60), 8, 0.01, 1.0);
    // Bias some stretches toward the chain so detections actually occur.
    for (std::size_t t = 0; t + 6 < post.rows(); t += 12)
      for (std::size_t k = 0; k < 6; ++k) post(t + k, 2 + k) += 3.0;
    const Matrix ll = ScaledLogLikelihoods(post, std::vector<double>(8, 0.125));
    DecodingGraph g = base;
    g.entry_penalty = rng.Uniform(-3.0, 3.0);
    const DecodeResult a = ViterbiDecode(g, ll);
    g.entry_penalty += rng.Uniform(0.0, 5.0);
    const DecodeResult b = ViterbiDecode(g, ll);
    CHECK(CountEntries(b.path, g.keyword_entry) <= CountEntries(a.path, g.keyword_entry));
    CHECK(b.detections.size() <= a.detections.size());
  }
}

TEST_CASE("forced alignment edge cases") {
  const HmmTopology topo;
  Rng rng(6);
  const Matrix s = test::RandomMatrix(rng, 5, 4, -3, 0);
  const std::vector<int> one{2};
  Alignment a = ForcedAlign(one, s, topo);
  CHECK(a.states == std::vector<int>(5, 2));
  CHECK(a.positions == std::vector<int>(5, 0));
  const std::vector<int> five{0, 1, 2, 3, 1};
  a = ForcedAlign(five, s, topo);
  CHECK(a.positions == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(a.states == five);
  const std::vector<int> six{0, 1, 2, 3, 1, 0};
  try {
    ForcedAlign(six, s, topo);
    FAIL("expected infeasible");
  } catch (const KwsError &e) {
    CHECK(e.kind() == ErrorKind::kInfeasible);
  }
  CHECK_THROWS_AS(ForcedAlign(std::vector<int>{9}, s, topo), KwsError);
}

TEST_CASE("forced alignment: 3-state chain, 5 frames, 6 candidates") {
  const HmmTopology topo;
  Matrix s(5, 3);
  const double rows[5][3] = {
      {-.1, -2, -3}, {-1, -.2, -3}, {-2, -.3, -1}, {-3, -1, -.1}, {-3, -2, -.2}};
  for (int t = 0; t < 5; ++t)
    for (int j = 0; j < 3; ++j) s(t, j) = rows[t][j];
  const std::vector<int> chain{0, 1, 2};
  const Alignment a = ForcedAlign(chain, s, topo);
  const Alignment b = BruteAlign(chain, s, topo);
  CHECK(a.positions == b.positions);
  CHECK(a.score == b.score);
  CHECK(a.positions == std::vector<int>{0, 1, 1, 2, 2});
}

TEST_CASE("forced alignment: equal scores tie to the smallest positions") {
  const HmmTopology topo = HmmTopology::FromSelfLoop(1, 0.5);
  const std::vector<int> chain{0, 1, 2};
  const Alignment a = ForcedAlign(chain, Matrix(6, 3, 0.0), topo);
  CHECK(a.positions == std::vector<int>{0, 0, 0, 0, 1, 2});
  CHECK(a.positions == BruteAlign(chain, Matrix(6, 3, 0.0), topo).positions);
}

TEST_CASE("forced alignment matches enumeration on random instances") {
  Rng rng(44);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t k = 1 + rng.UniformInt(5);
    const std::size_t frames = k + rng.UniformInt(9 - k);
    std::vector<int> chain(k);
    for (int &c : chain) c = static_cast<int>(rng.UniformInt(6));
    const Matrix s = test::RandomMatrix(rng, frames, 6, -5, 0);
    const HmmTopology topo = HmmTopology::FromSelfLoop(1, rng.Uniform(0.2, 0.9));
    const Alignment a = ForcedAlign(chain, s, topo);
    const Alignment b = BruteAlign(chain, s, topo);
    CHECK(a.positions == b.positions);
    CHECK(a.states == b.states);
    CHECK(a.score == b.score);
  }
}

TEST_CASE("forced alignment is idempotent") {
  Rng rng(45);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 2 + rng.UniformInt(5), frames = k + rng.UniformInt(30);
    std::vector<int> chain(k);
    for (std::size_t i = 0; i < k; ++i) chain[i] = static_cast<int>(i);
    const Matrix s = test::RandomMatrix(rng, frames, k, -5, 0);
    const Alignment a = ForcedAlign(chain, s, HmmTopology{});
    // Targets from the alignment as one-hot scores (log 1 vs log eps).
    Matrix onehot(frames, k, std::log(1e-6));
    for (std::size_t t = 0; t < frames; ++t) onehot(t, a.states[t]) = 0.0;
    const Alignment b = ForcedAlign(chain, onehot, HmmTopology{});
    CHECK(b.positions == a.positions);
    for (std::size_t t = 1; t < frames; ++t) {
      CHECK(a.positions[t] - a.positions[t - 1] >= 0);
      CHECK(a.positions[t] - a.positions[t - 1] <= 1);
    }
    CHECK(a.positions.front() == 0);
    CHECK(a.positions.back() == static_cast<int>(k) - 1);
  }
}

TEST_CASE("tuning: extremes and envelope") {
  const DecodingGraph g = BuildKwsGraph({"ah", "l"}, kPhones, HmmTopology{}, 0.0);
  Rng rng(46);
  std::vector<TuningUtterance> dev;
  for (int u = 0; u < 20; ++u) {
    // Every utterance decodes to one detection; positives score higher.
    TuningUtterance tu;
    tu.keyword = u % 2 == 0;
    tu.posteriors = Matrix(8, 4, 0.05);
    const double boost = tu.keyword ? rng.Uniform(0.65, 0.85) : rng.Uniform(0.5, 0.75);
    for (std::size_t t = 0; t < 8; ++t) {
      tu.posteriors(t, t < 4 ? 2 : 3) = boost;
      tu.posteriors(t, 0) = 1.0 - boost - 0.1;
    }
    dev.push_back(tu);
  }
  const std::vector<double> priors(4, 0.25);
  for (const TuningUtterance &u : dev)
    REQUIRE(Viterbi(g, u.posteriors, priors).detections.size() == 1);
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<double> penalties{0.0, 1.0};
  const std::vector<double> thresholds{-inf, -0.5, 0.0, 0.5, 1.0, inf};
  const TuningResult r = TuneOperatingPoints(g, penalties, thresholds, dev, priors);
  REQUIRE(r.points.size() == 12);
  for (const DetPoint &p : r.points) {
    if (p.threshold == -inf && p.entry_penalty == 0.0) {
      CHECK(p.far == 1.0);
      CHECK(p.frr == 0.0);
    }
    if (p.threshold == inf) {
      CHECK(p.far == 0.0);
      CHECK(p.frr == 1.0);
    }
  }
  for (std::size_t i = 1; i < r.envelope.size(); ++i) {
    CHECK(r.envelope[i].far > r.envelope[i - 1].far);
    CHECK(r.envelope[i].frr < r.envelope[i - 1].frr);
  }
  // Envelope = Pareto-optimal (far, frr) pairs.
  std::set<std::pair<double, double>> pareto;
  for (const DetPoint &p : r.points) {
    bool dominated = false;
    for (const DetPoint &q : r.points)
      dominated |= q.far <= p.far && q.frr <= p.frr && (q.far < p.far || q.frr < p.frr);
    if (!dominated) pareto.insert({p.far, p.frr});
  }
  std::set<std::pair<double, double>> got;
  for (const DetPoint &p : r.envelope) got.insert({p.far, p.frr});
  CHECK(got == pareto);

  CHECK_THROWS_AS(TuneOperatingPoints(g, {}, thresholds, dev, priors), KwsError);
  std::vector<TuningUtterance> only_pos(dev.begin(), dev.begin() + 1);
  CHECK_THROWS_AS(TuneOperatingPoints(g, penalties, thresholds, only_pos, priors), KwsError);
}

TEST_CASE("tuning: an utterance without a detection is never accepted") {
  const DecodingGraph g = BuildKwsGraph({"ah", "l"}, kPhones, HmmTopology{}, 0.0);
  std::vector<TuningUtterance> dev(2);
  dev[0].keyword = true;
  dev[0].posteriors = Matrix(6, 4, 0.01);
  for (std::size_t t = 0; t < 6; ++t) dev[0].posteriors(t, 1) = 0.97;  // pure background
  dev[1].keyword = false;
  dev[1].posteriors = dev[0].posteriors;
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<double> pen{0.0}, th{-inf};
  const TuningResult r = TuneOperatingPoints(g, pen, th, dev, std::vector<double>(4, 0.25));
  CHECK(r.points[0].frr == 1.0);
  CHECK(r.points[0].far == 0.0);
}

}  // namespace kws
