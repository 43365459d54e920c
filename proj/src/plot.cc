// src/plot.cc

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
#include <cstdio>
#include <fstream>

#include "kws/error.h"
#include "kws/evaluation.h"

namespace kws {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 70, kRight = 170, kTop = 30, kBottom = 60;
constexpr const char *kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string Fmt(const char *format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

std::string Escape(const std::string &s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace

std::string DetCsv(std::span<const NamedCurve> curves) {
  std::string out = "curve_name,far,frr\n";
  for (const auto &[name, curve] : curves)
    for (const auto &p : curve.points)
      out += name + "," + Fmt("%.10g", p.far) + "," + Fmt("%.10g", p.frr) + "\n";
  return out;
}

std::string DetSvg(std::span<const NamedCurve> curves) {
  // FAR axis spans whole decades from the smallest positive FAR up to 1.
  double min_far = 1e-3;
  for (const auto &nc : curves)
    for (const auto &p : nc.second.points)
      if (p.far > 0.0) min_far = std::min(min_far, p.far);
  const double lo_decade = std::max(-4.0, std::floor(std::log10(min_far)));
  const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
  auto px = [&](double far) {
    const double lf = far > 0.0 ? std::max(std::log10(far), lo_decade) : lo_decade;
    return kLeft + (lf - lo_decade) / -lo_decade * plot_w;
  };
  auto py = [&](double frr) { return kTop + (1.0 - frr) * plot_h; };

  std::string svg;
  svg +=
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
      "viewBox=\"0 0 640 480\">\n";
  svg += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  svg += "<g stroke=\"#cccccc\" stroke-width=\"1\">\n";
  for (double d = lo_decade; d <= 0.0; d += 1.0) {
    const double x = px(std::pow(10.0, d));
    svg += "<line x1=\"" + Fmt("%.2f", x) + "\" y1=\"" + Fmt("%.2f", kTop) + "\" x2=\"" +
           Fmt("%.2f", x) + "\" y2=\"" + Fmt("%.2f", kTop + plot_h) + "\"/>\n";
  }
  for (int i = 0; i <= 10; i += 2) {
    const double y = py(i / 10.0);
    svg += "<line x1=\"" + Fmt("%.2f", kLeft) + "\" y1=\"" + Fmt("%.2f", y) + "\" x2=\"" +
           Fmt("%.2f", kLeft + plot_w) + "\" y2=\"" + Fmt("%.2f", y) + "\"/>\n";
  }
  svg += "</g>\n<g font-family=\"sans-serif\" font-size=\"11\" fill=\"black\">\n";
  for (double d = lo_decade; d <= 0.0; d += 1.0)
    svg += "<text x=\"" + Fmt("%.2f", px(std::pow(10.0, d))) + "\" y=\"" +
           Fmt("%.2f", kTop + plot_h + 16) + "\" text-anchor=\"middle\">1e" + Fmt("%.0f", d) +
           "</text>\n";
  for (int i = 0; i <= 10; i += 2)
    svg += "<text x=\"" + Fmt("%.2f", kLeft - 6) + "\" y=\"" + Fmt("%.2f", py(i / 10.0) + 4) +
           "\" text-anchor=\"end\">" + Fmt("%.1f", i / 10.0) + "</text>\n";
  svg += "<text x=\"" + Fmt("%.2f", kLeft + plot_w / 2) + "\" y=\"" + Fmt("%.2f", kHeight - 20) +
         "\" text-anchor=\"middle\">False alarm rate</text>\n";
  svg += "<text x=\"16\" y=\"" + Fmt("%.2f", kTop + plot_h / 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " + Fmt("%.2f", kTop + plot_h / 2) +
         ")\">False reject rate</text>\n</g>\n";

  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto &[name, curve] = curves[i];
    const char *color = kPalette[i % std::size(kPalette)];
    std::string pts;
    for (const auto &p : curve.points) {
      if (!pts.empty()) pts += ' ';
      pts += Fmt("%.2f", px(p.far)) + "," + Fmt("%.2f", py(p.frr));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
    const double ly = kTop + 14.0 * static_cast<double>(i) + 10;
    svg += "<text x=\"" + Fmt("%.2f", kLeft + plot_w + 12) + "\" y=\"" + Fmt("%.2f", ly) +
           "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" + color + "\">" + Escape(name) +
           "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void EmitPlotData(std::span<const NamedCurve> curves, const std::filesystem::path &stem) {
  Require(!curves.empty(), ErrorKind::kInvalidArgument, "EmitPlotData: no curves");
  if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
  for (const auto &[suffix, text] :
       {std::pair<std::string, std::string>{".csv", DetCsv(curves)}, {".svg", DetSvg(curves)}}) {
    std::filesystem::path path = stem;
    path += suffix;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
    out << text;
  }
}

}  // namespace kws
