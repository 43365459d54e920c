// tests/test_evaluation.cc

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

#include "doctest.h"
#include "kws/error.h"
#include "kws/evaluation.h"
#include "test_util.h"

namespace kws {
namespace {

TrialSet Trials(std::vector<std::optional<double>> pos, std::vector<std::optional<double>> neg) {
  TrialSet t;
  for (std::size_t i = 0; i < pos.size(); ++i)
    t.positives.push_back({"p" + std::to_string(i), pos[i]});
  for (std::size_t i = 0; i < neg.size(); ++i)
    t.negatives.push_back({"n" + std::to_string(i), neg[i]});
  return t;
}

DetCurve Curve(std::vector<std::pair<double, double>> pts) {
  DetCurve c;
  for (auto [far, frr] : pts) c.points.push_back({far, frr});
  return c;
}

bool Contains(const DetCurve &c, double far, double frr) {
  for (const DetPoint &p : c.points)
    if (p.far == far && p.frr == frr) return true;
  return false;
}

// Rates at one threshold by direct counting.
std::pair<double, double> CountRates(const TrialSet &t, double th) {
  auto accepted = [th](const Trial &x) {
    return x.score.has_value() && *x.score >= th && th != std::numeric_limits<double>::infinity();
  };
  double fa = 0, fr = 0;
  for (const Trial &x : t.negatives) fa += accepted(x);
  for (const Trial &x : t.positives) fr += !accepted(x);
  return {fa / static_cast<double>(t.negatives.size()),
          fr / static_cast<double>(t.positives.size())};
}

TrialSet RandomTrials(Rng &rng) {
  std::vector<std::optional<double>> pos(1 + rng.UniformInt(30)), neg(1 + rng.UniformInt(30));
  for (auto &s : pos)
    if (rng.UniformInt(5) != 0) s = static_cast<double>(rng.UniformInt(12)) / 4.0 + 0.5;
  for (auto &s : neg)
    if (rng.UniformInt(3) != 0) s = static_cast<double>(rng.UniformInt(12)) / 4.0;
  return Trials(pos, neg);
}

}  // namespace

TEST_CASE("DET: hand examples") {
  const DetCurve sep = ComputeDetCurve(Trials({0.9, 0.8}, {0.1, 0.2}));
  CHECK(Contains(sep, 0.0, 0.0));

  const DetCurve same = ComputeDetCurve(Trials({0.5, 0.5}, {0.5, 0.5}));
  for (const DetPoint &p : same.points) CHECK(p.frr == 1.0 - p.far);

  const DetCurve none = ComputeDetCurve(Trials({std::nullopt, std::nullopt}, {0.3, std::nullopt}));
  for (const DetPoint &p : none.points) CHECK(p.frr == 1.0);

  CHECK_THROWS_AS(ComputeDetCurve(Trials({}, {0.1})), KwsError);
  CHECK_THROWS_AS(ComputeDetCurve(Trials({0.1}, {})), KwsError);
  TrialSet dup = Trials({0.1}, {0.2});
  dup.negatives[0].id = dup.positives[0].id;
  CHECK_THROWS_AS(ComputeDetCurve(dup), KwsError);
}

TEST_CASE("DET: envelope property and counted rates on random trial sets") {
  Rng rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    const TrialSet t = RandomTrials(rng);
    const DetCurve c = ComputeDetCurve(t);
    REQUIRE(!c.points.empty());
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      const DetPoint &p = c.points[i];
      CHECK((p.far >= 0.0 && p.far <= 1.0 && p.frr >= 0.0 && p.frr <= 1.0));
      const auto [far, frr] = CountRates(t, p.threshold);
      CHECK(p.far == doctest::Approx(far));
      CHECK(p.frr == doctest::Approx(frr));
      if (i > 0) {
        CHECK(p.far >= c.points[i - 1].far);
        CHECK(p.frr <= c.points[i - 1].frr);
      }
    }
    // Threshold +inf is always reachable: FAR 0.
    CHECK(c.points.front().far == 0.0);
    // Every swept point is dominated by (or on) the envelope.
    for (const DetPoint &p : SweepThresholds(t)) CHECK(InterpolateFrr(c, p.far) <= p.frr + 1e-12);
  }
}

TEST_CASE("AUC hand examples") {
  CHECK(Auc(Curve({{0.0, 0.0}, {1.0, 0.0}}), 0.01, 0.5) == 0.0);
  CHECK(Auc(Curve({{0.0, 0.17}, {1.0, 0.17}}), 0.001, 0.05) ==
        doctest::Approx(0.17).epsilon(1e-14));
  CHECK(Auc(Curve({{0.3, 0.17}}), 0.001, 0.05) == doctest::Approx(0.17).epsilon(1e-14));
  CHECK(Auc(Curve({{0.001, 0.2}, {0.05, 0.1}}), 0.001, 0.05) ==
        doctest::Approx(0.15).epsilon(1e-14));
  // Clamped outside the observed range: 0.2 on [0, 0.1], then linear to 0 at 0.3, then 0.
  CHECK(Auc(Curve({{0.1, 0.2}, {0.3, 0.0}}), 0.0, 0.5) ==
        doctest::Approx((0.2 * 0.1 + 0.5 * 0.2 * 0.2) / 0.5).epsilon(1e-14));
  CHECK_THROWS_AS(Auc(Curve({{0.1, 0.2}}), 0.5, 0.5), KwsError);
  CHECK_THROWS_AS(Auc(Curve({{0.1, 0.2}}), 0.5, 0.1), KwsError);
  CHECK_THROWS_AS(Auc(DetCurve{}, 0.1, 0.5), KwsError);
}

TEST_CASE("AUC: bounded, monotone under domination, collinear-point invariant") {
  Rng rng(2);
  for (int trial = 0; trial < 300; ++trial) {
    const DetCurve c = ComputeDetCurve(RandomTrials(rng));
    const double lo = rng.Uniform(0.0, 0.5), hi = lo + rng.Uniform(0.01, 0.5);
    const double a = Auc(c, lo, hi);
    CHECK((a >= 0.0 && a <= 1.0));

    DetCurve better = c;
    for (DetPoint &p : better.points) p.frr = std::max(0.0, p.frr - rng.Uniform(0.0, 0.2));
    CHECK(Auc(better, lo, hi) <= a + 1e-12);

    if (c.points.size() >= 2) {
      DetCurve dense;
      for (std::size_t i = 0; i + 1 < c.points.size(); ++i) {
        const DetPoint &p = c.points[i], &q = c.points[i + 1];
        dense.points.push_back(p);
        const double w = rng.Uniform(0.1, 0.9);
        if (q.far > p.far)
          dense.points.push_back({p.far + w * (q.far - p.far), p.frr + w * (q.frr - p.frr)});
      }
      dense.points.push_back(c.points.back());
      CHECK(std::abs(Auc(dense, lo, hi) - a) <= 1e-12);
    }
  }
}

TEST_CASE("relative reduction") {
  CHECK(RelativeReduction(0.170, 0.102) == doctest::Approx(40.0).epsilon(1e-12));
  CHECK(std::abs(RelativeReduction(0.170, 0.089) - 47.6) <= 0.05);
  CHECK(RelativeReduction(0.3, 0.3) == 0.0);
  CHECK(RelativeReduction(0.37, 0.0) == 100.0);
  CHECK(RelativeReduction(0.2, 0.3) < 0.0);
  CHECK(RelativeReduction(0.3, 0.2) > 0.0);
  CHECK_THROWS_AS(RelativeReduction(0.0, 0.1), KwsError);
  CHECK_THROWS_AS(RelativeReduction(-0.1, 0.1), KwsError);
}

TEST_CASE("combined curves take the lower envelope") {
  const DetCurve a = Curve({{0.0, 0.8}, {0.5, 0.2}}), b = Curve({{0.0, 0.6}, {0.5, 0.4}});
  const std::vector<DetCurve> both{a, b};
  const DetCurve c = CombineCurves(both);
  CHECK(Contains(c, 0.0, 0.6));
  CHECK(Contains(c, 0.5, 0.2));
  CHECK(c.points.size() == 2);
}

TEST_CASE("plot data: CSV rows, one polyline per curve, deterministic bytes") {
  test::TempDir dir("eval");
  const std::vector<NamedCurve> one{{"clean", Curve({{0.01, 0.4}, {0.2, 0.1}})}};
  const std::string csv = DetCsv(one);
  CHECK(csv == "curve_name,far,frr\nclean,0.01,0.4\nclean,0.2,0.1\n");

  const std::vector<NamedCurve> two{{"clean", Curve({{0.0, 0.5}, {0.2, 0.1}})},
                                    {"a&b", Curve({{0.05, 0.3}, {1.0, 0.0}})}};
  const std::string svg = DetSvg(two);
  std::size_t polylines = 0;
  for (std::size_t at = svg.find("<polyline"); at != std::string::npos;
       at = svg.find("<polyline", at + 1))
    ++polylines;
  CHECK(polylines == 2);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("a&amp;b") != std::string::npos);
  CHECK(svg.find("nan") == std::string::npos);
  CHECK(svg.find("inf") == std::string::npos);

  EmitPlotData(two, dir / "x/det");
  const std::string first_csv = test::ReadFile(dir / "x/det.csv");
  const std::string first_svg = test::ReadFile(dir / "x/det.svg");
  EmitPlotData(two, dir / "x/det");
  CHECK(test::ReadFile(dir / "x/det.csv") == first_csv);
  CHECK(test::ReadFile(dir / "x/det.svg") == first_svg);
  CHECK(first_svg == svg);
  CHECK_THROWS_AS(EmitPlotData(std::vector<NamedCurve>{}, dir / "y"), KwsError);
}

}  // namespace kws
