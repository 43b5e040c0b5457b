// Copyright 2026 The dimmask Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dimmask/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dimmask/numerics.hpp"

namespace dimmask {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string escape(const std::string& s) {
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

// Round-number axis ticks covering [lo, hi].
std::vector<double> ticks(double lo, double hi, int target = 6) {
  const double span = hi - lo;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (span / step <= target) break;
  }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step)
    out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  return out;
}

}  // namespace

std::vector<FrontierPoint> read_frontier_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": empty file");
  const auto header = split_fields(line);
  auto col = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InputError(path.string() + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_id = col("run_id"), c_reg = col("regularizer"), c_w = col("weight"),
                    c_dims = col("total_dims"), c_rce = col("test_rce");
  std::vector<FrontierPoint> points;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != header.size()) throw InputError(path.string() + ": ragged row '" + line + "'");
    if (f[c_dims].empty() || f[c_rce].empty()) continue;
    FrontierPoint p;
    p.run_id = f[c_id];
    p.regularizer = f[c_reg];
    p.weight = f[c_w];
    try {
      p.total_dims = std::stod(f[c_dims]);
      p.rce = std::stod(f[c_rce]);
    } catch (const std::exception&) {
      throw InputError(path.string() + ": bad number in row '" + line + "'");
    }
    points.push_back(std::move(p));
  }
  return points;
}

std::string render_frontier_svg(const std::vector<FrontierPoint>& points) {
  constexpr double kW = 800, kH = 600, kLeft = 80, kRight = 40, kTop = 50, kBottom = 70;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;

  double xlo = 0, xhi = 1, ylo = 0, yhi = 1;
  if (!points.empty()) {
    xlo = xhi = points.front().total_dims;
    ylo = yhi = points.front().rce;
    for (const auto& p : points) {
      xlo = std::min(xlo, p.total_dims);
      xhi = std::max(xhi, p.total_dims);
      ylo = std::min(ylo, p.rce);
      yhi = std::max(yhi, p.rce);
    }
  }
  auto pad = [](double& lo, double& hi) {
    const double span = hi - lo;
    const double m = span > 0 ? 0.08 * span : std::max(1.0, std::abs(lo) * 0.1);
    lo -= m;
    hi += m;
  };
  pad(xlo, xhi);
  pad(ylo, yhi);
  auto sx = [&](double x) { return kLeft + (x - xlo) / (xhi - xlo) * pw; };
  auto sy = [&](double y) { return kTop + (1.0 - (y - ylo) / (yhi - ylo)) * ph; };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" width=\"800\" height=\"600\">\n";
  s << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
  s << "<text x=\"400\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"18\">"
       "Total embedding dims vs test RCE</text>\n";
  s << "<rect x=\"" << fmt("%.2f", kLeft) << "\" y=\"" << fmt("%.2f", kTop) << "\" width=\""
    << fmt("%.2f", pw) << "\" height=\"" << fmt("%.2f", ph)
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ticks(xlo, xhi)) {
    const double x = sx(t);
    s << "<line x1=\"" << fmt("%.2f", x) << "\" y1=\"" << fmt("%.2f", kTop + ph) << "\" x2=\""
      << fmt("%.2f", x) << "\" y2=\"" << fmt("%.2f", kTop + ph + 6) << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << fmt("%.2f", x) << "\" y=\"" << fmt("%.2f", kTop + ph + 22)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << fmt("%g", t)
      << "</text>\n";
  }
  for (double t : ticks(ylo, yhi)) {
    const double y = sy(t);
    s << "<line x1=\"" << fmt("%.2f", kLeft - 6) << "\" y1=\"" << fmt("%.2f", y) << "\" x2=\""
      << fmt("%.2f", kLeft) << "\" y2=\"" << fmt("%.2f", y) << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << fmt("%.2f", kLeft - 10) << "\" y=\"" << fmt("%.2f", y + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << fmt("%g", t)
      << "</text>\n";
  }
  s << "<text x=\"400\" y=\"585\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"14\">total embedding dims</text>\n";
  s << "<text x=\"20\" y=\"300\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
       "transform=\"rotate(-90 20 300)\">test RCE (%)</text>\n";

  for (const auto& p : points) {
    const double x = sx(p.total_dims), y = sy(p.rce);
    const bool baseline = p.regularizer.empty();
    if (baseline) {
      s << "<rect x=\"" << fmt("%.2f", x - 6) << "\" y=\"" << fmt("%.2f", y - 6)
        << "\" width=\"12\" height=\"12\" fill=\"black\"/>\n";
    } else {
      const char* color = p.regularizer == "l1" ? "#1f77b4" : "#d62728";
      s << "<circle cx=\"" << fmt("%.2f", x) << "\" cy=\"" << fmt("%.2f", y)
        << "\" r=\"6\" fill=\"" << color << "\"/>\n";
    }
    const std::string label = baseline ? "baseline" : p.regularizer + " " + p.weight;
    s << "<text x=\"" << fmt("%.2f", x + 9) << "\" y=\"" << fmt("%.2f", y - 8)
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(label) << "</text>\n";
  }
  // Legend.
  s << "<rect x=\"" << fmt("%.2f", kW - kRight - 120) << "\" y=\"" << fmt("%.2f", kTop + 10)
    << "\" width=\"10\" height=\"10\" fill=\"black\"/>\n";
  s << "<text x=\"" << fmt("%.2f", kW - kRight - 104) << "\" y=\"" << fmt("%.2f", kTop + 19)
    << "\" font-family=\"sans-serif\" font-size=\"12\">baseline</text>\n";
  s << "<circle cx=\"" << fmt("%.2f", kW - kRight - 115) << "\" cy=\"" << fmt("%.2f", kTop + 35)
    << "\" r=\"5\" fill=\"#1f77b4\"/>\n";
  s << "<text x=\"" << fmt("%.2f", kW - kRight - 104) << "\" y=\"" << fmt("%.2f", kTop + 39)
    << "\" font-family=\"sans-serif\" font-size=\"12\">L1</text>\n";
  s << "<circle cx=\"" << fmt("%.2f", kW - kRight - 115) << "\" cy=\"" << fmt("%.2f", kTop + 55)
    << "\" r=\"5\" fill=\"#d62728\"/>\n";
  s << "<text x=\"" << fmt("%.2f", kW - kRight - 104) << "\" y=\"" << fmt("%.2f", kTop + 59)
    << "\" font-family=\"sans-serif\" font-size=\"12\">L2</text>\n";
  s << "</svg>\n";
  return s.str();
}

}  // namespace dimmask
