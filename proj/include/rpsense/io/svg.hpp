/* Copyright 2026 The rpsense Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

// Minimal static scatter plot. No scripts, fonts or external references.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace rpsense {

struct ScatterSeries {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

struct ScatterSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<ScatterSeries> series;
  /// Lines written into the file as an XML comment (provenance).
  std::string comment;
};

namespace detail {

inline std::string svg_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

inline std::string svg_tick(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Comments may not contain "--".
inline std::string comment_safe(std::string s) {
  for (std::size_t p = s.find("--"); p != std::string::npos; p = s.find("--")) s.replace(p, 2, "- ");
  return s;
}

}  // namespace detail

inline std::string scatter_svg(const ScatterSpec& spec) {
  constexpr double kW = 640, kH = 460, kLeft = 80, kRight = 170, kTop = 40, kBottom = 60;
  const double pw = kW - kLeft - kRight;
  const double ph = kH - kTop - kBottom;

  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : spec.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1;
  if (!(y0 <= y1)) y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-300) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-300) y0 -= 0.5, y1 += 0.5;
  const double xp = 0.05 * (x1 - x0), yp = 0.05 * (y1 - y0);
  x0 -= xp, x1 += xp, y0 -= yp, y1 += yp;
  auto sx = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return kTop + ph - (y - y0) / (y1 - y0) * ph; };

  using detail::svg_num;
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (!spec.comment.empty()) os << "<!--\n" << detail::comment_safe(spec.comment) << "-->\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" viewBox=\"0 0 "
     << kW << ' ' << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << svg_num(kLeft + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
     << detail::xml_escape(spec.title) << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << svg_num(pw) << "\" height=\"" << svg_num(ph)
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = x0 + (x1 - x0) * t / 4.0;
    const double yv = y0 + (y1 - y0) * t / 4.0;
    os << "<line x1=\"" << svg_num(sx(xv)) << "\" y1=\"" << svg_num(kTop + ph) << "\" x2=\"" << svg_num(sx(xv))
       << "\" y2=\"" << svg_num(kTop + ph + 5) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << svg_num(sx(xv)) << "\" y=\"" << svg_num(kTop + ph + 18) << "\" text-anchor=\"middle\">"
       << detail::svg_tick(xv) << "</text>\n";
    os << "<line x1=\"" << svg_num(kLeft - 5) << "\" y1=\"" << svg_num(sy(yv)) << "\" x2=\"" << kLeft << "\" y2=\""
       << svg_num(sy(yv)) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << svg_num(kLeft - 8) << "\" y=\"" << svg_num(sy(yv) + 4) << "\" text-anchor=\"end\">"
       << detail::svg_tick(yv) << "</text>\n";
  }
  os << "<text x=\"" << svg_num(kLeft + pw / 2) << "\" y=\"" << svg_num(kH - 18) << "\" text-anchor=\"middle\">"
     << detail::xml_escape(spec.x_label) << "</text>\n";
  os << "<text x=\"18\" y=\"" << svg_num(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << svg_num(kTop + ph / 2) << ")\">" << detail::xml_escape(spec.y_label) << "</text>\n";
  for (const auto& s : spec.series) {
    os << "<g fill=\"" << s.color << "\" fill-opacity=\"0.8\">\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      os << "<circle cx=\"" << svg_num(sx(s.x[i])) << "\" cy=\"" << svg_num(sy(s.y[i])) << "\" r=\"3\"/>\n";
    }
    os << "</g>\n";
  }
  double ly = kTop + 10;
  for (const auto& s : spec.series) {
    os << "<circle cx=\"" << svg_num(kW - kRight + 20) << "\" cy=\"" << svg_num(ly) << "\" r=\"4\" fill=\"" << s.color
       << "\"/>\n";
    os << "<text x=\"" << svg_num(kW - kRight + 30) << "\" y=\"" << svg_num(ly + 4) << "\">"
       << detail::xml_escape(s.label) << " (" << s.x.size() << ")</text>\n";
    ly += 20;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace rpsense
