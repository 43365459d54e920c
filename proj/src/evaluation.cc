// src/evaluation.cc

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

#include "kws/evaluation.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "kws/error.h"

namespace kws {

void TrialSet::Validate() const {
  Require(!positives.empty(), ErrorKind::kInvalidArgument, "trial set has no positive trials");
  Require(!negatives.empty(), ErrorKind::kInvalidArgument, "trial set has no negative trials");
  std::set<std::string> ids;
  for (const auto &t : positives) ids.insert(t.id);
  for (const auto &t : negatives)
    Require(!ids.count(t.id), ErrorKind::kInvalidArgument,
            "trial id " + t.id + " is both positive and negative");
}

std::vector<DetPoint> LowerEnvelope(std::vector<DetPoint> points) {
  std::stable_sort(points.begin(), points.end(), [](const DetPoint &a, const DetPoint &b) {
    return a.far != b.far ? a.far < b.far : a.frr < b.frr;
  });
  std::vector<DetPoint> out;
  for (const auto &p : points)
    if (out.empty() || p.frr < out.back().frr) out.push_back(p);
  return out;
}

std::vector<DetPoint> SweepThresholds(const TrialSet &trials, double entry_penalty) {
  trials.Validate();
  std::vector<double> pos, neg;
  for (const auto &t : trials.positives)
    if (t.score) pos.push_back(*t.score);
  for (const auto &t : trials.negatives)
    if (t.score) neg.push_back(*t.score);
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());

  std::vector<double> thresholds{-std::numeric_limits<double>::infinity()};
  thresholds.insert(thresholds.end(), pos.begin(), pos.end());
  thresholds.insert(thresholds.end(), neg.begin(), neg.end());
  thresholds.push_back(std::numeric_limits<double>::infinity());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  const double n_pos = static_cast<double>(trials.positives.size());
  const double n_neg = static_cast<double>(trials.negatives.size());
  std::vector<DetPoint> points;
  points.reserve(thresholds.size());
  for (double th : thresholds) {
    // Accepted: score >= th. +inf accepts nothing finite.
    auto accepted = [th](const std::vector<double> &sorted) {
      if (std::isinf(th) && th > 0) return std::size_t{0};
      return static_cast<std::size_t>(sorted.end() -
                                      std::lower_bound(sorted.begin(), sorted.end(), th));
    };
    DetPoint p;
    p.far = static_cast<double>(accepted(neg)) / n_neg;
    p.frr = 1.0 - static_cast<double>(accepted(pos)) / n_pos;
    p.threshold = th;
    p.entry_penalty = entry_penalty;
    points.push_back(p);
  }
  return points;
}

DetCurve ComputeDetCurve(const TrialSet &trials, double entry_penalty) {
  return DetCurve{LowerEnvelope(SweepThresholds(trials, entry_penalty))};
}

DetCurve CombineCurves(std::span<const DetCurve> curves) {
  std::vector<DetPoint> all;
  for (const auto &c : curves) all.insert(all.end(), c.points.begin(), c.points.end());
  return DetCurve{LowerEnvelope(std::move(all))};
}

double InterpolateFrr(const DetCurve &curve, double far) {
  const auto &pts = curve.points;
  Require(!pts.empty(), ErrorKind::kInvalidArgument, "DET curve has no points");
  if (far <= pts.front().far) return pts.front().frr;
  if (far >= pts.back().far) return pts.back().frr;
  auto hi = std::upper_bound(pts.begin(), pts.end(), far,
                             [](double x, const DetPoint &p) { return x < p.far; });
  auto lo = hi - 1;
  if (hi->far == lo->far) return lo->frr;
  const double w = (far - lo->far) / (hi->far - lo->far);
  return lo->frr + w * (hi->frr - lo->frr);
}

double Auc(const DetCurve &curve, double far_low, double far_high) {
  Require(std::isfinite(far_low) && std::isfinite(far_high) && far_low < far_high,
          ErrorKind::kInvalidArgument,
          "AUC range must satisfy low < high, got [" + std::to_string(far_low) + ", " +
              std::to_string(far_high) + "]");
  Require(!curve.points.empty(), ErrorKind::kInvalidArgument, "DET curve has no points");
  std::vector<double> xs{far_low};
  for (const auto &p : curve.points)
    if (p.far > far_low && p.far < far_high) xs.push_back(p.far);
  xs.push_back(far_high);
  double area = 0.0;
  double prev_y = InterpolateFrr(curve, xs[0]);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double y = InterpolateFrr(curve, xs[i]);
    area += 0.5 * (prev_y + y) * (xs[i] - xs[i - 1]);
    prev_y = y;
  }
  return area / (far_high - far_low);
}

double RelativeReduction(double baseline_auc, double new_auc) {
  Require(baseline_auc > 0.0, ErrorKind::kInvalidArgument,
          "relative reduction needs a positive baseline AUC");
  return 100.0 * (baseline_auc - new_auc) / baseline_auc;
}

}  // namespace kws
