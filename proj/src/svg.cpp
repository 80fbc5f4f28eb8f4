// Copyright 2026 The edgepress authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "edgepress/errors.hpp"
#include "edgepress/sweep.hpp"

namespace edgepress {

namespace {

struct Series {
  std::string label;
  std::string color;
  std::vector<double> x, y, ystd;
};

constexpr double kW = 640, kH = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::string render_chart(const std::string& title, const std::string& xlabel,
                         const std::string& ylabel, const std::vector<Series>& series) {
  double xmin = 0.0, xmax = 1.0, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i] - s.ystd[i]);
      ymax = std::max(ymax, s.y[i] + s.ystd[i]);
    }
  }
  if (ymin > ymax) {
    ymin = 0.0;
    ymax = 1.0;
  }
  if (ymax - ymin < 1e-12) {
    ymax += 1.0;
    ymin -= ymin > 0.5 ? 0.5 : 0.0;
  }
  const double pad_y = 0.05 * (ymax - ymin);
  ymin -= pad_y;
  ymax += pad_y;

  const double plot_w = kW - kLeft - kRight;
  const double plot_h = kH - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * plot_w; };
  auto py = [&](double y) { return kTop + (1.0 - (y - ymin) / (ymax - ymin)) * plot_h; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n"
      << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n"
      << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" "
         "font-family=\"sans-serif\">" << title << "</text>\n";

  // Axes and ticks.
  svg << "<g stroke=\"#444\" stroke-width=\"1\">\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w
      << "\" y2=\"" << kTop + plot_h << "\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kTop + plot_h << "\"/>\n</g>\n";
  for (int i = 0; i <= 5; ++i) {
    const double fx = xmin + (xmax - xmin) * i / 5.0;
    const double fy = ymin + (ymax - ymin) * i / 5.0;
    svg << "<line x1=\"" << px(fx) << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << px(fx)
        << "\" y2=\"" << kTop + plot_h + 5 << "\" stroke=\"#444\"/>\n"
        << "<text x=\"" << px(fx) << "\" y=\"" << kTop + plot_h + 20
        << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" << fmt(fx)
        << "</text>\n"
        << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << py(fy) << "\" x2=\"" << kLeft
        << "\" y2=\"" << py(fy) << "\" stroke=\"#444\"/>\n"
        << "<text x=\"" << kLeft - 8 << "\" y=\"" << py(fy) + 4
        << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" << fmt(fy)
        << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kH - 12
      << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">" << xlabel
      << "</text>\n"
      << "<text x=\"16\" y=\"" << kTop + plot_h / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" "
         "transform=\"rotate(-90 16 " << kTop + plot_h / 2 << ")\">" << ylabel << "</text>\n";

  // +-std bands then lines.
  for (const auto& s : series) {
    if (s.x.empty()) continue;
    svg << "<polygon class=\"band\" fill=\"" << s.color << "\" fill-opacity=\"0.15\" "
           "stroke=\"none\" points=\"";
    for (size_t i = 0; i < s.x.size(); ++i) {
      svg << px(s.x[i]) << "," << py(s.y[i] + s.ystd[i]) << " ";
    }
    for (size_t i = s.x.size(); i-- > 0;) {
      svg << px(s.x[i]) << "," << py(s.y[i] - s.ystd[i]) << " ";
    }
    svg << "\"/>\n";
  }
  for (const auto& s : series) {
    if (s.x.empty()) continue;
    svg << "<polyline class=\"series\" fill=\"none\" stroke=\"" << s.color
        << "\" stroke-width=\"2\" points=\"";
    for (size_t i = 0; i < s.x.size(); ++i) svg << px(s.x[i]) << "," << py(s.y[i]) << " ";
    svg << "\"/>\n";
    for (size_t i = 0; i < s.x.size(); ++i) {
      svg << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i])
          << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
    }
  }
  // Legend.
  double ly = kTop + 8;
  for (const auto& s : series) {
    svg << "<line x1=\"" << kLeft + plot_w - 110 << "\" y1=\"" << ly << "\" x2=\""
        << kLeft + plot_w - 90 << "\" y2=\"" << ly << "\" stroke=\"" << s.color
        << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << kLeft + plot_w - 84 << "\" y=\"" << ly + 4
        << "\" font-size=\"12\" font-family=\"sans-serif\">" << s.label << "</text>\n";
    ly += 16;
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
}

}  // namespace

void emit_plots(const std::vector<SweepRow>& rows, const std::string& dir) {
  if (rows.empty()) throw DataError("emit_plots: no rows");
  std::filesystem::create_directories(dir);

  // Pick one schedule for the figures; polynomial when available.
  bool has_poly = false;
  for (const auto& r : rows) has_poly |= r.schedule == "polynomial";
  const std::string schedule = has_poly ? "polynomial" : rows.front().schedule;

  std::vector<SweepRow> selected;
  for (const auto& r : rows) {
    if (r.ok() && (r.schedule == schedule || r.schedule == "none")) selected.push_back(r);
  }
  std::vector<AggregateRow> agg = aggregate_rows(selected);
  std::sort(agg.begin(), agg.end(),
            [](const AggregateRow& a, const AggregateRow& b) { return a.sparsity < b.sparsity; });

  struct Metric {
    std::string file, title, ylabel;
    std::function<double(const AggregateRow&, int)> mean;
    std::function<double(const AggregateRow&, int)> std;
  };
  const std::vector<Metric> metrics = {
      {"auc_vs_sparsity.svg", "Test AUC vs sparsity (" + schedule + ")", "AUC",
       [](const AggregateRow& a, int p) {
         return p == 0 ? a.auc_mean : p == 1 ? a.auc_q8_mean : a.auc_q16_mean;
       },
       [](const AggregateRow& a, int p) {
         return p == 0 ? a.auc_std : p == 1 ? a.auc_q8_std : a.auc_q16_std;
       }},
      {"size_vs_sparsity.svg", "Compressed size vs sparsity (" + schedule + ")",
       "compressed bytes",
       [](const AggregateRow& a, int p) {
         return p == 0 ? a.size_mean : p == 1 ? a.size_q8_mean : a.size_q16_mean;
       },
       [](const AggregateRow& a, int p) {
         return p == 0 ? a.size_std : p == 1 ? a.size_q8_std : a.size_q16_std;
       }},
      {"time_vs_sparsity.svg", "Single-input inference time vs sparsity (" + schedule + ")",
       "microseconds",
       [](const AggregateRow& a, int p) {
         return p == 0 ? a.t_mean : p == 1 ? a.t_q8_mean : a.t_q16_mean;
       },
       [](const AggregateRow& a, int p) {
         return p == 0 ? a.t_std : p == 1 ? a.t_q8_std : a.t_q16_std;
       }}};

  const char* labels[3] = {"float32", "int8", "int16"};
  const char* colors[3] = {"#1f77b4", "#d62728", "#2ca02c"};

  for (const auto& metric : metrics) {
    std::vector<Series> series;
    for (int p = 0; p < 3; ++p) {
      Series s;
      s.label = labels[p];
      s.color = colors[p];
      for (const auto& a : agg) {
        s.x.push_back(a.sparsity);
        s.y.push_back(metric.mean(a, p));
        s.ystd.push_back(metric.std(a, p));
      }
      series.push_back(std::move(s));
    }
    const std::string svg = render_chart(metric.title, "sparsity", metric.ylabel, series);
    write_text((std::filesystem::path(dir) / metric.file).string(), svg);
  }
}

}  // namespace edgepress
