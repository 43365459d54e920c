// include/kws/evaluation.h

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

#ifndef KWS_EVALUATION_H_
#define KWS_EVALUATION_H_

#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace kws {

/// One trial: the best detection score of an utterance, or none when the
/// decoder never reached the keyword final state.
struct Trial {
  std::string id;
  std::optional<double> score;
};

struct TrialSet {
  std::vector<Trial> positives;
  std::vector<Trial> negatives;

  /// Both classes non-empty, ids disjoint.
  void Validate() const;
};

/// An operating point and the decoder parameters that produced it.
struct DetPoint {
  double far = 0.0;
  double frr = 0.0;
  double threshold = std::numeric_limits<double>::quiet_NaN();
  double entry_penalty = std::numeric_limits<double>::quiet_NaN();
};

/// Points ordered by increasing FAR with strictly decreasing FRR.
struct DetCurve {
  std::vector<DetPoint> points;
};

/// Keeps, in order of increasing FAR, every point whose FRR is strictly
/// below that of all points with smaller or equal FAR.
std::vector<DetPoint> LowerEnvelope(std::vector<DetPoint> points);

/// All (FAR, FRR) points for thresholds at every distinct score and at
/// +/- infinity; a trial is accepted when its score is >= the threshold.
std::vector<DetPoint> SweepThresholds(
    const TrialSet &trials, double entry_penalty = std::numeric_limits<double>::quiet_NaN());

/// Lower envelope of SweepThresholds.
DetCurve ComputeDetCurve(const TrialSet &trials,
                         double entry_penalty = std::numeric_limits<double>::quiet_NaN());

/// Lower envelope of the union of several curves' points.
DetCurve CombineCurves(std::span<const DetCurve> curves);

/// FRR at `far`: linear between curve points, clamped to the first and last
/// FRR outside the observed FAR range.
double InterpolateFrr(const DetCurve &curve, double far);

/// Mean FRR over [far_low, far_high]: the trapezoid integral of
/// InterpolateFrr divided by the range width. Lower is better.
double Auc(const DetCurve &curve, double far_low, double far_high);

/// 100 * (baseline - value) / baseline.
double RelativeReduction(double baseline_auc, double new_auc);

using NamedCurve = std::pair<std::string, DetCurve>;

/// CSV with columns curve_name,far,frr.
std::string DetCsv(std::span<const NamedCurve> curves);
/// Standalone SVG chart: log FAR axis, one polyline per curve.
std::string DetSvg(std::span<const NamedCurve> curves);
/// Writes `<stem>.csv` and `<stem>.svg`.
void EmitPlotData(std::span<const NamedCurve> curves, const std::filesystem::path &stem);

}  // namespace kws

#endif  // KWS_EVALUATION_H_
