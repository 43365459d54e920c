// src/decoder.cc

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

#include "kws/decoder.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "kws/error.h"

namespace kws {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogHalf = -0.69314718055994530942;
constexpr double kPosteriorFloor = 1e-30;
constexpr double kTieTolerance = 1e-9;

std::string TagName(StateTag tag) {
  switch (tag) {
    case StateTag::kBackgroundSpeech:
      return "bg-speech";
    case StateTag::kBackgroundNonspeech:
      return "bg-nonspeech";
    case StateTag::kKeyword:
      return "keyword";
  }
  return "?";
}

// Dense transition weights including penalties; -inf where no arc.
Matrix TransitionWeights(const DecodingGraph &graph) {
  const std::size_t n = graph.num_states();
  Matrix w(n, n, kNegInf);
  for (const Arc &arc : graph.arcs) {
    double &cell = w(arc.from, arc.to);
    cell = std::max(cell, graph.Weight(arc));
  }
  return w;
}

// Reorders `order` so that states are ranked by (rank of their best
// predecessor, state id); unreachable states are ranked last.
void RankPrefixes(std::span<const int> pred_rank, std::span<const double> delta,
                  std::vector<int> &rank) {
  const int n = static_cast<int>(delta.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const bool ra = delta[a] != kNegInf, rb = delta[b] != kNegInf;
    if (ra != rb) return ra;
    if (pred_rank[a] != pred_rank[b]) return pred_rank[a] < pred_rank[b];
    return a < b;
  });
  rank.assign(n, 0);
  for (int r = 0; r < n; ++r) rank[order[r]] = r;
}

// Scores closer than this are ties; summation order must not decide a path.
bool Wins(double cand, int cand_rank, double best, int best_rank) {
  const double tol = kTieTolerance * std::max(1.0, std::abs(best));
  if (cand > best + tol) return true;
  if (cand < best - tol) return false;
  return cand_rank < best_rank;
}

}  // namespace

HmmTopology HmmTopology::FromSelfLoop(int states_per_phone, double self_loop_prob) {
  Require(self_loop_prob > 0.0 && self_loop_prob < 1.0, ErrorKind::kInvalidArgument,
          "self-loop probability must be in (0, 1)");
  HmmTopology t;
  t.states_per_phone = states_per_phone;
  t.self_loop_logp = std::log(self_loop_prob);
  t.forward_logp = std::log1p(-self_loop_prob);
  t.Validate();
  return t;
}

void HmmTopology::Validate() const {
  Require(states_per_phone == 1 || states_per_phone == 3 || states_per_phone == 5,
          ErrorKind::kInvalidArgument,
          "states_per_phone must be 1, 3 or 5, got " + std::to_string(states_per_phone));
  Require(std::isfinite(self_loop_logp) && std::isfinite(forward_logp), ErrorKind::kInvalidArgument,
          "topology log-probabilities must be finite");
  Require(std::abs(std::exp(self_loop_logp) + std::exp(forward_logp) - 1.0) <= 1e-9,
          ErrorKind::kInvalidArgument, "self-loop and forward probabilities must sum to 1");
}

void DecodingGraph::Validate() const {
  const int n = static_cast<int>(states.size());
  Require(n >= 3, ErrorKind::kInvalidArgument, "graph needs two background states and a chain");
  Require(start_logp.size() == states.size() && start_penalized.size() == states.size(),
          ErrorKind::kDimensionMismatch, "start vectors do not match the state count");
  Require(states[kBackgroundSpeech].tag == StateTag::kBackgroundSpeech &&
              states[kBackgroundNonspeech].tag == StateTag::kBackgroundNonspeech,
          ErrorKind::kInvalidArgument, "states 0 and 1 must be the background pair");
  for (int s = kFirstKeywordState; s < n; ++s) {
    Require(states[s].tag == StateTag::kKeyword, ErrorKind::kInvalidArgument,
            "state " + std::to_string(s) + " must be a keyword state");
  }
  Require(keyword_entry == kFirstKeywordState && keyword_final == n - 1,
          ErrorKind::kInvalidArgument, "keyword chain must run from state 2 to the last state");

  std::vector<double> mass(n, 0.0);
  Matrix seen(n, n, 0.0);
  for (const Arc &arc : arcs) {
    Require(arc.from >= 0 && arc.from < n && arc.to >= 0 && arc.to < n, ErrorKind::kInvalidArgument,
            "arc endpoint out of range");
    Require(seen(arc.from, arc.to) == 0.0, ErrorKind::kInvalidArgument, "duplicate arc");
    seen(arc.from, arc.to) = 1.0;
    mass[arc.from] += std::exp(arc.logp);
    const bool from_kw = states[arc.from].tag == StateTag::kKeyword;
    const bool to_kw = states[arc.to].tag == StateTag::kKeyword;
    if (from_kw && to_kw) {
      Require(arc.to == arc.from || arc.to == arc.from + 1, ErrorKind::kInvalidArgument,
              "keyword arcs must be self loops or advance by one");
    } else if (!from_kw && to_kw) {
      Require(arc.to == keyword_entry && arc.penalized, ErrorKind::kInvalidArgument,
              "background may only enter the chain at its start, through the penalty");
    } else if (from_kw && !to_kw) {
      Require(arc.from == keyword_final, ErrorKind::kInvalidArgument,
              "only the final keyword state returns to the background");
    }
  }
  for (int s = 0; s < n; ++s) {
    Require(std::abs(mass[s] - 1.0) <= 1e-9, ErrorKind::kNumerical,
            "outgoing probability of state " + std::to_string(s) + " is not 1");
  }
  Require(seen(0, 0) != 0.0 && seen(1, 1) != 0.0 && seen(0, 1) != 0.0 && seen(1, 0) != 0.0,
          ErrorKind::kInvalidArgument, "background states must loop and connect both ways");
}

std::string DecodingGraph::Dump() const {
  std::ostringstream out;
  out.precision(6);
  out << "# states " << states.size() << " entry " << keyword_entry << " final " << keyword_final
      << " entry_penalty " << entry_penalty << "\n";
  for (std::size_t s = 0; s < states.size(); ++s) {
    const GraphState &st = states[s];
    out << s << " " << TagName(st.tag);
    if (st.tag == StateTag::kKeyword) {
      out << " " << keyword_phones[st.keyword_position] << "." << st.sub_state;
    }
    if (start_logp[s] != kNegInf) out << " start=" << start_logp[s];
    for (const Arc &arc : arcs) {
      if (arc.from != static_cast<int>(s)) continue;
      out << " ->" << arc.to << ":" << arc.logp;
      if (arc.penalized) out << "-P";
    }
    out << "\n";
  }
  return out.str();
}

DecodingGraph BuildKwsGraph(const std::vector<std::string> &keyword_phones,
                            const std::vector<std::string> &phone_set, const HmmTopology &topology,
                            double entry_penalty) {
  Require(!keyword_phones.empty(), ErrorKind::kInvalidArgument, "keyword has no phones");
  topology.Validate();
  Require(std::isfinite(entry_penalty), ErrorKind::kInvalidArgument,
          "entry penalty must be finite");
  for (const std::string &p : keyword_phones) {
    Require(std::find(phone_set.begin(), phone_set.end(), p) != phone_set.end(),
            ErrorKind::kInvalidArgument, "unknown phone symbol '" + p + "'");
  }

  DecodingGraph g;
  g.keyword_phones = keyword_phones;
  g.entry_penalty = entry_penalty;
  g.states.push_back({StateTag::kBackgroundSpeech, -1, 0});
  g.states.push_back({StateTag::kBackgroundNonspeech, -1, 0});
  const int spp = topology.states_per_phone;
  for (std::size_t p = 0; p < keyword_phones.size(); ++p) {
    for (int k = 0; k < spp; ++k) g.states.push_back({StateTag::kKeyword, static_cast<int>(p), k});
  }
  const int n = static_cast<int>(g.states.size());
  g.keyword_entry = kFirstKeywordState;
  g.keyword_final = n - 1;

  const double split = topology.forward_logp + kLogHalf;
  for (int b : {kBackgroundSpeech, kBackgroundNonspeech}) {
    g.arcs.push_back({b, b, topology.self_loop_logp, false});
    g.arcs.push_back({b, 1 - b, split, false});
    g.arcs.push_back({b, g.keyword_entry, split, true});
  }
  for (int s = kFirstKeywordState; s < n; ++s) {
    g.arcs.push_back({s, s, topology.self_loop_logp, false});
    if (s < g.keyword_final) {
      g.arcs.push_back({s, s + 1, topology.forward_logp, false});
    } else {
      g.arcs.push_back({s, kBackgroundSpeech, split, false});
      g.arcs.push_back({s, kBackgroundNonspeech, split, false});
    }
  }

  const double third = -std::log(3.0);
  g.start_logp.assign(n, kNegInf);
  g.start_penalized.assign(n, false);
  g.start_logp[kBackgroundSpeech] = third;
  g.start_logp[kBackgroundNonspeech] = third;
  g.start_logp[g.keyword_entry] = third;
  g.start_penalized[g.keyword_entry] = true;
  return g;
}

Matrix ScaledLogLikelihoods(const Matrix &posteriors, std::span<const double> priors) {
  Require(posteriors.cols() == priors.size(), ErrorKind::kDimensionMismatch,
          "posterior columns (" + std::to_string(posteriors.cols()) + ") != priors (" +
              std::to_string(priors.size()) + ")");
  for (double p : priors) {
    Require(p > 0.0 && std::isfinite(p), ErrorKind::kInvalidArgument, "priors must be positive");
  }
  Matrix out(posteriors.rows(), posteriors.cols());
  for (std::size_t t = 0; t < posteriors.rows(); ++t) {
    for (std::size_t s = 0; s < posteriors.cols(); ++s) {
      const double p = posteriors(t, s);
      Require(std::isfinite(p) && p >= 0.0, ErrorKind::kNumerical, "invalid posterior value");
      out(t, s) = std::log(std::max(p, kPosteriorFloor)) - std::log(priors[s]);
    }
  }
  return out;
}

double PathScore(const DecodingGraph &graph, const Matrix &loglik, std::span<const int> path) {
  Require(path.size() == loglik.rows(), ErrorKind::kDimensionMismatch, "path length != frames");
  if (path.empty()) return kNegInf;
  const Matrix w = TransitionWeights(graph);
  double s = graph.StartWeight(path[0]) + loglik(0, path[0]);
  for (std::size_t t = 1; t < path.size(); ++t) {
    const double a = w(path[t - 1], path[t]);
    if (a == kNegInf) return kNegInf;
    s = s + a;
    s = s + loglik(t, path[t]);
  }
  return s;
}

double DetectionScore(const DecodingGraph &graph, const Matrix &loglik, std::span<const int> path,
                      std::size_t start_frame, std::size_t end_frame) {
  Require(start_frame <= end_frame && end_frame < loglik.rows() && path.size() == loglik.rows(),
          ErrorKind::kDimensionMismatch, "detection segment out of range");
  double keyword = 0.0, background = 0.0;
  for (std::size_t t = start_frame; t <= end_frame; ++t) {
    keyword += loglik(t, path[t]);
    background += std::max(loglik(t, kBackgroundSpeech), loglik(t, kBackgroundNonspeech));
  }
  (void)graph;
  return (keyword - background) / static_cast<double>(end_frame - start_frame + 1);
}

DecodeResult ViterbiDecode(const DecodingGraph &graph, const Matrix &loglik) {
  const std::size_t n = graph.num_states();
  Require(loglik.cols() == n, ErrorKind::kDimensionMismatch,
          "score columns (" + std::to_string(loglik.cols()) + ") != graph states (" +
              std::to_string(n) + ")");
  for (double v : loglik.values()) {
    Require(!std::isnan(v), ErrorKind::kNumerical, "NaN in state scores");
  }
  DecodeResult result;
  const std::size_t frames = loglik.rows();
  if (frames == 0) return result;

  const Matrix w = TransitionWeights(graph);
  std::vector<double> delta(n), next(n);
  std::vector<int> rank(n), pred_rank(n);
  std::vector<int> back(frames * n, -1);
  for (std::size_t j = 0; j < n; ++j) {
    const double s0 = graph.StartWeight(static_cast<int>(j));
    delta[j] = s0 == kNegInf ? kNegInf : s0 + loglik(0, j);
    pred_rank[j] = 0;
  }
  RankPrefixes(pred_rank, delta, rank);  // single-state prefixes order by id

  for (std::size_t t = 1; t < frames; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      double best = kNegInf;
      int arg = -1;
      for (std::size_t i = 0; i < n; ++i) {
        if (delta[i] == kNegInf || w(i, j) == kNegInf) continue;
        const double cand = delta[i] + w(i, j);
        if (arg < 0 || Wins(cand, rank[i], best, rank[arg])) {
          best = cand;
          arg = static_cast<int>(i);
        }
      }
      back[t * n + j] = arg;
      next[j] = arg < 0 || best == kNegInf ? kNegInf : best + loglik(t, j);
      pred_rank[j] = arg < 0 ? static_cast<int>(n) : rank[arg];
    }
    delta.swap(next);
    RankPrefixes(pred_rank, delta, rank);
  }

  int last = -1;
  for (std::size_t j = 0; j < n; ++j) {
    if (delta[j] == kNegInf) continue;
    if (last < 0 || Wins(delta[j], rank[j], delta[last], rank[last])) {
      last = static_cast<int>(j);
    }
  }
  if (last < 0) return result;  // nothing reachable
  result.path_score = delta[last];
  result.path.assign(frames, 0);
  result.path[frames - 1] = last;
  for (std::size_t t = frames - 1; t > 0; --t) {
    result.path[t - 1] = back[t * n + result.path[t]];
  }

  // Maximal runs of keyword states that start at the entry and reach the end.
  std::size_t t = 0;
  while (t < frames) {
    if (!graph.IsKeyword(result.path[t])) {
      ++t;
      continue;
    }
    const std::size_t start = t;
    bool final_seen = false;
    while (t < frames && graph.IsKeyword(result.path[t])) {
      final_seen = final_seen || result.path[t] == graph.keyword_final;
      ++t;
    }
    if (result.path[start] == graph.keyword_entry && final_seen) {
      Detection d;
      d.start_frame = start;
      d.end_frame = t - 1;
      d.score = DetectionScore(graph, loglik, result.path, start, t - 1);
      d.entry_penalty = graph.entry_penalty;
      result.detections.push_back(d);
    }
  }
  return result;
}

DecodeResult Viterbi(const DecodingGraph &graph, const Matrix &posteriors,
                     std::span<const double> priors) {
  Require(posteriors.cols() == graph.num_states(), ErrorKind::kDimensionMismatch,
          "posterior columns (" + std::to_string(posteriors.cols()) + ") != graph states (" +
              std::to_string(graph.num_states()) + ")");
  return ViterbiDecode(graph, ScaledLogLikelihoods(posteriors, priors));
}

Alignment ForcedAlign(std::span<const int> chain, const Matrix &log_scores,
                      const HmmTopology &topology) {
  topology.Validate();
  const std::size_t k = chain.size();
  const std::size_t frames = log_scores.rows();
  Require(k > 0, ErrorKind::kInvalidArgument, "empty alignment chain");
  for (int c : chain) {
    Require(c >= 0 && static_cast<std::size_t>(c) < log_scores.cols(),
            ErrorKind::kDimensionMismatch, "chain state outside the score columns");
  }
  Require(frames >= k, ErrorKind::kInfeasible,
          "cannot align " + std::to_string(k) + " chain states to " + std::to_string(frames) +
              " frames");
  for (double v : log_scores.values()) {
    Require(!std::isnan(v), ErrorKind::kNumerical, "NaN in alignment scores");
  }

  // Positions are prefix-ranked as in ViterbiDecode; only position p-1 and p
  // can precede p, and p is reachable at frame t only when t >= p.
  std::vector<double> delta(k, kNegInf), next(k, kNegInf);
  std::vector<int> rank(k), pred_rank(k);
  std::vector<int> back(frames * k, -1);
  delta[0] = log_scores(0, chain[0]);
  std::fill(pred_rank.begin(), pred_rank.end(), 0);
  RankPrefixes(pred_rank, delta, rank);
  for (std::size_t t = 1; t < frames; ++t) {
    for (std::size_t p = 0; p < k; ++p) {
      double best = kNegInf;
      int arg = -1;
      auto consider = [&](std::size_t i, double w) {
        if (delta[i] == kNegInf) return;
        const double cand = delta[i] + w;
        if (arg < 0 || Wins(cand, rank[i], best, rank[arg])) {
          best = cand;
          arg = static_cast<int>(i);
        }
      };
      if (p > 0) consider(p - 1, topology.forward_logp);
      consider(p, topology.self_loop_logp);
      back[t * k + p] = arg;
      next[p] = arg < 0 || best == kNegInf ? kNegInf : best + log_scores(t, chain[p]);
      pred_rank[p] = arg < 0 ? static_cast<int>(k) : rank[arg];
    }
    delta.swap(next);
    RankPrefixes(pred_rank, delta, rank);
  }
  Require(delta[k - 1] != kNegInf, ErrorKind::kInfeasible, "no path reaches the chain end");

  Alignment a;
  a.score = delta[k - 1];
  a.positions.assign(frames, 0);
  a.positions[frames - 1] = static_cast<int>(k - 1);
  for (std::size_t t = frames - 1; t > 0; --t) {
    a.positions[t - 1] = back[t * k + a.positions[t]];
  }
  a.states.resize(frames);
  for (std::size_t t = 0; t < frames; ++t) a.states[t] = chain[a.positions[t]];
  return a;
}

TuningResult TuneOperatingPoints(const DecodingGraph &graph_template,
                                 std::span<const double> penalties,
                                 std::span<const double> thresholds,
                                 std::span<const TuningUtterance> dev,
                                 std::span<const double> priors) {
  Require(!penalties.empty() && !thresholds.empty(), ErrorKind::kInvalidArgument,
          "empty tuning grid");
  std::size_t positives = 0;
  for (const TuningUtterance &u : dev) positives += u.keyword ? 1 : 0;
  const std::size_t negatives = dev.size() - positives;
  Require(positives > 0 && negatives > 0, ErrorKind::kInvalidArgument,
          "tuning set needs both keyword and non-keyword utterances");

  std::vector<Matrix> loglik(dev.size());
  for (std::size_t u = 0; u < dev.size(); ++u) {
    loglik[u] = ScaledLogLikelihoods(dev[u].posteriors, priors);
  }

  TuningResult result;
  std::vector<double> best(dev.size());
  for (double penalty : penalties) {
    DecodingGraph graph = graph_template;
    graph.entry_penalty = penalty;
    const long count = static_cast<long>(dev.size());
#pragma omp parallel for schedule(dynamic)
    for (long u = 0; u < count; ++u) {
      const DecodeResult r = ViterbiDecode(graph, loglik[u]);
      double top = kNegInf;
      for (const Detection &d : r.detections) top = std::max(top, d.score);
      best[u] = top;
    }
    for (double th : thresholds) {
      std::size_t accepted_pos = 0, accepted_neg = 0;
      for (std::size_t u = 0; u < dev.size(); ++u) {
        // No detection is never accepted, not even at threshold -inf.
        const bool accepted = best[u] != kNegInf && best[u] >= th;
        if (!accepted) continue;
        (dev[u].keyword ? accepted_pos : accepted_neg) += 1;
      }
      DetPoint pt;
      pt.far = static_cast<double>(accepted_neg) / static_cast<double>(negatives);
      pt.frr = 1.0 - static_cast<double>(accepted_pos) / static_cast<double>(positives);
      pt.threshold = th;
      pt.entry_penalty = penalty;
      result.points.push_back(pt);
    }
  }
  result.envelope = LowerEnvelope(result.points);
  return result;
}

}  // namespace kws
