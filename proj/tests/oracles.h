// tests/oracles.h

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

#ifndef KWS_TESTS_ORACLES_H_
#define KWS_TESTS_ORACLES_H_

// Exhaustive reference implementations for the decoder, shared by the unit
// tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "kws/decoder.h"
#include "kws/matrix.h"
#include "kws/rng.h"

namespace kws::oracle {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double OracleArc(const DecodingGraph &g, int from, int to) {
  double w = kNegInf;
  for (const Arc &a : g.arcs)
    if (a.from == from && a.to == to)
      w = std::max(w, a.penalized ? a.logp - g.entry_penalty : a.logp);
  return w;
}

struct Best {
  std::vector<int> path;
  double score = kNegInf;
};

// Scores within this relative distance are ties.
inline bool Near(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b));
}

// First path in lexicographic order whose score ties the maximum.
inline Best FirstNearMax(const std::vector<Best> &all) {
  double top = kNegInf;
  for (const Best &b : all) top = std::max(top, b.score);
  for (const Best &b : all)
    if (b.score >= top || Near(b.score, top)) return b;
  return {};
}

// Enumerates every feasible state sequence in lexicographic order.
inline Best BruteViterbi(const DecodingGraph &g, const Matrix &ll) {
  const int n = static_cast<int>(g.num_states());
  const std::size_t frames = ll.rows();
  std::vector<Best> all;
  std::vector<int> path(frames);
  std::function<void(std::size_t, double)> rec = [&](std::size_t t, double s) {
    if (t == frames) {
      all.push_back({path, s});
      return;
    }
    for (int j = 0; j < n; ++j) {
      double next;
      if (t == 0) {
        const double s0 =
            g.start_penalized[j] ? g.start_logp[j] - g.entry_penalty : g.start_logp[j];
        if (s0 == kNegInf) continue;
        next = s0 + ll(0, j);
      } else {
        const double w = OracleArc(g, path[t - 1], j);
        if (w == kNegInf) continue;
        next = (s + w) + ll(t, j);
      }
      path[t] = j;
      rec(t + 1, next);
    }
  };
  rec(0, 0.0);
  return FirstNearMax(all);
}

struct Segment {
  std::size_t start, end;
};

inline std::vector<Segment> OracleDetections(const DecodingGraph &g, const std::vector<int> &path) {
  std::vector<Segment> out;
  std::size_t t = 0;
  while (t < path.size()) {
    if (path[t] < kFirstKeywordState) {
      ++t;
      continue;
    }
    const std::size_t s = t;
    bool fin = false;
    while (t < path.size() && path[t] >= kFirstKeywordState) fin |= path[t++] == g.keyword_final;
    if (path[s] == g.keyword_entry && fin) out.push_back({s, t - 1});
  }
  return out;
}

inline double OracleDetectionScore(const Matrix &ll, const std::vector<int> &path, Segment seg) {
  double total = 0.0;
  for (std::size_t t = seg.start; t <= seg.end; ++t)
    total += ll(t, path[t]) - std::max(ll(t, 0), ll(t, 1));
  return total / static_cast<double>(seg.end - seg.start + 1);
}

// Random graph with dyadic weights: every path score is exact, so ties are real.
inline DecodingGraph RandomDyadicGraph(Rng &rng, int n) {
  DecodingGraph g;
  g.states.push_back({StateTag::kBackgroundSpeech, -1, 0});
  g.states.push_back({StateTag::kBackgroundNonspeech, -1, 0});
  for (int s = 2; s < n; ++s) g.states.push_back({StateTag::kKeyword, s - 2, 0});
  g.keyword_entry = 2;
  g.keyword_final = n - 1;
  g.entry_penalty = static_cast<double>(rng.UniformInt(5)) / 4.0;
  g.start_logp.assign(n, kNegInf);
  g.start_penalized.assign(n, false);
  for (int j = 0; j < n; ++j) {
    if (rng.UniformInt(3) != 0) g.start_logp[j] = -static_cast<double>(rng.UniformInt(4)) / 2.0;
    g.start_penalized[j] = j == 2;
    for (int k = 0; k < n; ++k) {
      if (rng.UniformInt(2) == 0) {
        g.arcs.push_back({j, k, -static_cast<double>(rng.UniformInt(4)) / 4.0, j < 2 && k == 2});
      }
    }
  }
  g.start_logp[0] = 0.0;
  return g;
}

inline Matrix DyadicScores(Rng &rng, std::size_t frames, std::size_t n) {
  Matrix m(frames, n);
  for (double &v : m.values()) v = -static_cast<double>(rng.UniformInt(4)) / 2.0;
  return m;
}

// Lexicographically first best monotone assignment of frames to chain positions.
inline Alignment BruteAlign(std::span<const int> chain, const Matrix &s, const HmmTopology &topo) {
  const std::size_t k = chain.size(), frames = s.rows();
  std::vector<Best> all;
  std::vector<int> pos(frames);
  std::function<void(std::size_t, double)> rec = [&](std::size_t t, double acc) {
    if (t == frames) {
      if (pos.back() == static_cast<int>(k) - 1) all.push_back({pos, acc});
      return;
    }
    for (int step = 0; step <= 1; ++step) {
      const int p = pos[t - 1] + step;
      if (p >= static_cast<int>(k)) continue;
      pos[t] = p;
      rec(t + 1, (acc + (step ? topo.forward_logp : topo.self_loop_logp)) + s(t, chain[p]));
    }
  };
  pos[0] = 0;
  rec(1, s(0, chain[0]));
  const Best top = FirstNearMax(all);
  Alignment best;
  best.positions = top.path;
  best.score = top.score;
  for (int p : best.positions) best.states.push_back(chain[p]);
  return best;
}

}  // namespace kws::oracle

#endif  // KWS_TESTS_ORACLES_H_
