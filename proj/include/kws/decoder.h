// include/kws/decoder.h

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

#ifndef KWS_DECODER_H_
#define KWS_DECODER_H_

// Keyword spotter decoding graph:
//
//   background:  [0] speech <-> [1] non-speech, each with a self loop
//   foreground:  [2] -> [3] -> ... -> [final], left to right with self loops
//
// Both background states may enter the keyword chain; that arc carries the
// tunable entry penalty. The final chain state returns to the background.
// Decoding may also start inside the chain (penalized the same way), so a
// keyword already under way at the first frame is still found. A keyword is
// hypothesized whenever the best path reaches the final state.

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "kws/evaluation.h"
#include "kws/matrix.h"

namespace kws {

inline constexpr int kBackgroundSpeech = 0;
inline constexpr int kBackgroundNonspeech = 1;
inline constexpr int kFirstKeywordState = 2;

struct HmmTopology {
  int states_per_phone = 1;
  double self_loop_logp = -0.2231435513142097;  // ln 0.8
  double forward_logp = -1.6094379124341003;    // ln 0.2

  static HmmTopology FromSelfLoop(int states_per_phone, double self_loop_prob);
  /// states_per_phone in {1, 3, 5}; exp(self) + exp(forward) = 1.
  void Validate() const;
};

enum class StateTag { kBackgroundSpeech, kBackgroundNonspeech, kKeyword };

struct GraphState {
  StateTag tag = StateTag::kKeyword;
  int keyword_position = -1;  // index into the keyword phones
  int sub_state = 0;
};

struct Arc {
  int from = 0;
  int to = 0;
  double logp = 0.0;
  bool penalized = false;  // keyword entry arc
};

struct DecodingGraph {
  std::vector<GraphState> states;
  std::vector<Arc> arcs;
  std::vector<double> start_logp;  // -inf for non-start states
  std::vector<bool> start_penalized;
  int keyword_entry = kFirstKeywordState;
  int keyword_final = kFirstKeywordState;
  double entry_penalty = 0.0;  // subtracted on penalized arcs
  std::vector<std::string> keyword_phones;

  std::size_t num_states() const { return states.size(); }
  double Weight(const Arc &arc) const {
    return arc.penalized ? arc.logp - entry_penalty : arc.logp;
  }
  double StartWeight(int state) const {
    return start_penalized[state] ? start_logp[state] - entry_penalty : start_logp[state];
  }
  bool IsKeyword(int state) const { return states[state].tag == StateTag::kKeyword; }
  /// Structural invariants: two background states, one chain, one final
  /// state, outgoing probability mass 1 per state (penalties excluded).
  void Validate() const;
  /// One line per state: id, tag, then its arcs with log-probabilities.
  std::string Dump() const;
};

/// Background loop plus a chain of len(phones) * states_per_phone states.
/// Every keyword phone must be in `phone_set`.
DecodingGraph BuildKwsGraph(const std::vector<std::string> &keyword_phones,
                            const std::vector<std::string> &phone_set, const HmmTopology &topology,
                            double entry_penalty);

struct Detection {
  std::size_t start_frame = 0;
  std::size_t end_frame = 0;  // inclusive
  double score = 0.0;         // per-frame log-likelihood ratio
  double entry_penalty = 0.0;
  double threshold = -std::numeric_limits<double>::infinity();
};

struct DecodeResult {
  std::vector<int> path;
  double path_score = -std::numeric_limits<double>::infinity();
  std::vector<Detection> detections;
};

/// log(posterior) - log(prior) per frame and state, posteriors floored at
/// 1e-30.
Matrix ScaledLogLikelihoods(const Matrix &posteriors, std::span<const double> priors);

/// Max-product Viterbi over per-frame state log-likelihoods. Among equally
/// scoring paths the lexicographically smallest state sequence wins. Emits a Detection for every
/// maximal run of keyword-chain states on the best path that enters at the chain start and reaches
/// the final state.
DecodeResult ViterbiDecode(const DecodingGraph &graph, const Matrix &loglik);

/// ViterbiDecode on ScaledLogLikelihoods(posteriors, priors).
DecodeResult Viterbi(const DecodingGraph &graph, const Matrix &posteriors,
                     std::span<const double> priors);

/// (acoustic log-likelihood of `path` over frames [start, end] - that of the
/// best background-only path over the same frames) / frame count.
/// Transition costs are left out so that the score is a pure acoustic
/// likelihood ratio and the entry penalty stays a separate knob.
double DetectionScore(const DecodingGraph &graph, const Matrix &loglik, std::span<const int> path,
                      std::size_t start_frame, std::size_t end_frame);

/// Score of a state sequence, accumulated frame by frame exactly as the
/// Viterbi recursion does. Returns -inf for paths using missing arcs.
/// Used to check decoders against enumeration.
double PathScore(const DecodingGraph &graph, const Matrix &loglik, std::span<const int> path);

struct Alignment {
  std::vector<int> positions;  // chain position per frame
  std::vector<int> states;     // chain[position] per frame
  double score = -std::numeric_limits<double>::infinity();
};

/// Viterbi restricted to a left-to-right chain with self loops: frame 0 is
/// at position 0, the last frame at the last position, and every position
/// is visited. `chain[k]` selects the column of `log_scores` scored at
/// position k. Ties go to the lexicographically smallest position
/// sequence. Throws kInfeasible when there are fewer frames than
/// chain positions.
Alignment ForcedAlign(std::span<const int> chain, const Matrix &log_scores,
                      const HmmTopology &topology);

/// An utterance of the tuning set.
struct TuningUtterance {
  Matrix posteriors;
  bool keyword = false;
};

struct TuningResult {
  std::vector<DetPoint> points;    // every (penalty, threshold) grid point
  std::vector<DetPoint> envelope;  // lower envelope of `points`
};

/// Decodes every utterance under each entry penalty, thresholds the best
/// detection score of each utterance at each threshold, and reports
/// (FAR, FRR) per grid point plus the lower envelope.
TuningResult TuneOperatingPoints(const DecodingGraph &graph_template,
                                 std::span<const double> penalties,
                                 std::span<const double> thresholds,
                                 std::span<const TuningUtterance> dev,
                                 std::span<const double> priors);

}  // namespace kws

#endif  // KWS_DECODER_H_
