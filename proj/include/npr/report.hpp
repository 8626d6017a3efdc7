// Copyright 2026 the npr-toolkit authors
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

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "npr/error.hpp"
#include "npr/retrieval.hpp"
#include "npr/router.hpp"

namespace npr {

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace detail

/// CSV is the authoritative report artifact: bucket,N,recall,count.
inline void write_report_csv(const EvalReport& report, std::ostream& out) {
  out << "bucket,N,recall,count\n";
  for (const auto& bucket : report.buckets) {
    for (const auto& [n, recall] : bucket.recall_at) {
      out << bucket.name << ',' << n << ',' << detail::format_double(recall) << ','
          << bucket.query_count << '\n';
    }
  }
}

inline void write_report_csv(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path.string());
  write_report_csv(report, out);
}

/// Parse a CSV produced by write_report_csv back into a report.
inline EvalReport read_report_csv(const std::filesystem::path& path, double threshold_m) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open report file: " + path.string());
  EvalReport report;
  report.threshold_m = threshold_m;
  std::string line;
  if (!std::getline(in, line) || line != "bucket,N,recall,count") {
    throw ParseError("bad report header in " + path.string());
  }
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    char bucket[128];
    int n = 0;
    double recall = 0.0;
    unsigned long long count = 0;
    if (std::sscanf(line.c_str(), "%127[^,],%d,%lf,%llu", bucket, &n, &recall, &count) != 4) {
      throw ParseError("bad report row at line " + std::to_string(line_no));
    }
    EvalBucket* b = nullptr;
    for (auto& existing : report.buckets) {
      if (existing.name == bucket) b = &existing;
    }
    if (!b) {
      report.buckets.push_back(EvalBucket{bucket, static_cast<std::size_t>(count), {}});
      b = &report.buckets.back();
    }
    b->recall_at.emplace_back(n, recall);
    bool known = false;
    for (int existing : report.n_values) known = known || existing == n;
    if (!known) report.n_values.push_back(n);
  }
  std::sort(report.n_values.begin(), report.n_values.end());
  return report;
}

/// Recall-vs-N curves, one polyline per bucket. Cosmetic companion to the
/// CSV; written by hand so reports need no plotting dependency.
inline void write_recall_curve_svg(const EvalReport& report, const std::filesystem::path& path) {
  if (report.buckets.empty()) throw Error("cannot plot an empty report");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path.string());

  constexpr int kW = 640, kH = 420, kMargin = 56;
  const int plot_w = kW - 2 * kMargin;
  const int plot_h = kH - 2 * kMargin;
  const auto& ns = report.n_values;
  const int n_min = ns.front(), n_max = ns.back();

  auto x_of = [&](int n) {
    if (n_max == n_min) return kMargin + plot_w / 2;
    return kMargin + static_cast<int>(plot_w * (static_cast<double>(n - n_min) / (n_max - n_min)));
  };
  auto y_of = [&](double recall) { return kMargin + static_cast<int>(plot_h * (1.0 - recall)); };

  static constexpr const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                            "#9467bd", "#8c564b", "#e377c2"};
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin + plot_h << "\" x2=\""
      << kMargin + plot_w << "\" y2=\"" << kMargin + plot_h << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin << "\" y2=\""
      << kMargin + plot_h << "\" stroke=\"black\"/>\n";
  for (double g = 0.0; g <= 1.0001; g += 0.25) {
    out << "<text x=\"" << kMargin - 8 << "\" y=\"" << y_of(g) + 4
        << "\" font-size=\"11\" text-anchor=\"end\">" << detail::format_double(g) << "</text>\n";
  }
  for (int n : ns) {
    out << "<text x=\"" << x_of(n) << "\" y=\"" << kMargin + plot_h + 16
        << "\" font-size=\"11\" text-anchor=\"middle\">" << n << "</text>\n";
  }
  out << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 12
      << "\" font-size=\"12\" text-anchor=\"middle\">N</text>\n";
  out << "<text x=\"16\" y=\"" << kH / 2
      << "\" font-size=\"12\" transform=\"rotate(-90 16 " << kH / 2 << ")\">recall@N</text>\n";

  int color = 0;
  int legend_y = kMargin;
  for (const auto& bucket : report.buckets) {
    const char* stroke = kColors[color % 7];
    out << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"2\" points=\"";
    for (const auto& [n, recall] : bucket.recall_at) out << x_of(n) << ',' << y_of(recall) << ' ';
    out << "\"/>\n";
    out << "<text x=\"" << kMargin + plot_w + 2 << "\" y=\"" << legend_y
        << "\" font-size=\"11\" fill=\"" << stroke << "\">" << bucket.name << "</text>\n";
    legend_y += 14;
    ++color;
  }
  out << "</svg>\n";
}

/// Route tags: query_id,route,rule,metric.
inline void write_route_tags_csv(const std::vector<RouteTag>& tags,
                                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path.string());
  out << "query_id,route,rule,metric\n";
  for (const auto& t : tags) {
    out << t.query_id << ',' << to_string(t.route) << ',' << to_string(t.rule) << ','
        << detail::format_double(t.metric) << '\n';
  }
}

}  // namespace npr
