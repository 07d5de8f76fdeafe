// Copyright 2026 The fairrank Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fairrank/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <tuple>

#include "fairrank/dataio.hpp"
#include "fairrank/desiderata.hpp"
#include "fairrank/experiment.hpp"
#include "fairrank/metrics.hpp"
#include "fairrank/stats.hpp"

namespace fairrank {

namespace fs = std::filesystem;

namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 80, kRight = 20, kTop = 40, kBottom = 60;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
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

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Maps data ranges onto the plotting area.
struct Frame {
  double x0, x1, y0, y1;

  double px(double x) const {
    return kLeft + (x1 > x0 ? (x - x0) / (x1 - x0) : 0.5) * (kWidth - kLeft - kRight);
  }
  double py(double y) const {
    return kHeight - kBottom - (y1 > y0 ? (y - y0) / (y1 - y0) : 0.5) * (kHeight - kTop - kBottom);
  }
};

void pad_range(double& lo, double& hi) {
  if (!(hi > lo)) {
    const double d = std::abs(lo) > 0 ? std::abs(lo) * 0.1 : 1.0;
    lo -= d;
    hi += d;
    return;
  }
  const double d = (hi - lo) * 0.05;
  lo -= d;
  hi += d;
}

std::ostringstream open_svg(const std::string& title) {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
    << "</text>\n";
  return s;
}

void y_axis(std::ostringstream& s, const Frame& f, const std::string& label) {
  s << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kHeight - kBottom
    << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = f.y0 + (f.y1 - f.y0) * t / 4.0;
    const double y = f.py(v);
    s << "<line x1=\"" << kLeft - 4 << "\" y1=\"" << num(y) << "\" x2=\"" << kLeft << "\" y2=\"" << num(y)
      << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << format_real(v)
      << "</text>\n";
  }
  s << "<text transform=\"translate(16," << (kTop + kHeight - kBottom) / 2
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape(label) << "</text>\n";
}

void x_axis_numeric(std::ostringstream& s, const Frame& f, const std::string& label) {
  const double base = kHeight - kBottom;
  s << "<line x1=\"" << kLeft << "\" y1=\"" << base << "\" x2=\"" << kWidth - kRight << "\" y2=\"" << base
    << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = f.x0 + (f.x1 - f.x0) * t / 4.0;
    const double x = f.px(v);
    s << "<line x1=\"" << num(x) << "\" y1=\"" << base << "\" x2=\"" << num(x) << "\" y2=\"" << base + 4
      << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << num(x) << "\" y=\"" << base + 18 << "\" text-anchor=\"middle\">" << format_real(v)
      << "</text>\n";
  }
  s << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 16
    << "\" text-anchor=\"middle\">" << escape(label) << "</text>\n";
}

void legend(std::ostringstream& s, const std::vector<std::string>& labels) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double y = kTop + 8 + 16.0 * static_cast<double>(i);
    s << "<rect x=\"" << kWidth - kRight - 150 << "\" y=\"" << y - 9 << "\" width=\"10\" height=\"10\" fill=\""
      << kPalette[i % 10] << "\"/>\n";
    s << "<text x=\"" << kWidth - kRight - 135 << "\" y=\"" << y << "\">" << escape(labels[i]) << "</text>\n";
  }
}

void write_text(const fs::path& file, const std::string& text, std::vector<fs::path>& written) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  out << text;
  written.push_back(file);
}

std::string aligned(const std::vector<std::vector<std::string>>& table) {
  std::vector<std::size_t> width(table.front().size(), 0);
  for (const auto& row : table)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::ostringstream out;
  for (const auto& row : table)
    for (std::size_t c = 0; c < row.size(); ++c)
      out << std::left << std::setw(static_cast<int>(width[c])) << row[c] << (c + 1 < row.size() ? "  " : "\n");
  return out.str();
}

void require_files(const fs::path& dir) {
  std::vector<std::string> missing;
  for (const char* f : {"manifest.json", "fairness.csv"})
    if (!fs::exists(dir / f)) missing.push_back(f);
  if (missing.empty()) return;
  std::string msg = "run directory " + dir.string() + " is incomplete; missing:";
  for (const auto& m : missing) msg += " " + m;
  msg += " (expected manifest.json, fairness.csv, seed_<s>/summary.json, seed_<s>/predictions_test.csv, "
         "seed_<s>/predictions_<iteration>.csv)";
  throw Error(msg);
}

}  // namespace

BoxStats box_stats(std::vector<double> values) {
  if (values.empty()) throw ValidationError("box statistics of an empty sample");
  std::sort(values.begin(), values.end());
  BoxStats b;
  b.n = values.size();
  b.q1 = quantile(values, 0.25);
  b.median = quantile(values, 0.5);
  b.q3 = quantile(values, 0.75);
  const double reach = 1.5 * (b.q3 - b.q1);
  b.whisker_lo = *std::lower_bound(values.begin(), values.end(), b.q1 - reach);
  b.whisker_hi = *(std::upper_bound(values.begin(), values.end(), b.q3 + reach) - 1);
  return b;
}

std::vector<std::size_t> histogram_counts(std::span<const double> values, double lo, double hi, int bins) {
  if (bins < 1) throw ValidationError("histogram needs at least one bin");
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  const double width = hi > lo ? (hi - lo) / bins : 1.0;
  for (const double v : values) {
    if (!std::isfinite(v)) continue;
    const auto b = static_cast<long long>(std::floor((v - lo) / width));
    ++counts[static_cast<std::size_t>(std::clamp<long long>(b, 0, bins - 1))];
  }
  return counts;
}

std::string boxplot_svg(const std::string& title, const std::string& y_label,
                        const std::vector<std::string>& labels, const std::vector<BoxStats>& boxes) {
  if (labels.size() != boxes.size()) throw ValidationError("one label per box is required");
  double lo = 0.0, hi = 1.0;
  if (!boxes.empty()) {
    lo = boxes.front().whisker_lo;
    hi = boxes.front().whisker_hi;
    for (const auto& b : boxes) {
      lo = std::min(lo, b.whisker_lo);
      hi = std::max(hi, b.whisker_hi);
    }
  }
  pad_range(lo, hi);
  const Frame f{-0.5, static_cast<double>(boxes.size()) - 0.5, lo, hi};
  auto s = open_svg(title);
  y_axis(s, f, y_label);
  const double base = kHeight - kBottom;
  s << "<line x1=\"" << kLeft << "\" y1=\"" << base << "\" x2=\"" << kWidth - kRight << "\" y2=\"" << base
    << "\" stroke=\"black\"/>\n";
  const double half = 0.3 * (f.px(1.0) - f.px(0.0));
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& b = boxes[i];
    const double x = f.px(static_cast<double>(i));
    s << "<g class=\"box\" data-label=\"" << escape(labels[i]) << "\">\n";
    s << "<line x1=\"" << num(x) << "\" y1=\"" << num(f.py(b.whisker_lo)) << "\" x2=\"" << num(x) << "\" y2=\""
      << num(f.py(b.whisker_hi)) << "\" stroke=\"black\"/>\n";
    s << "<rect x=\"" << num(x - half) << "\" y=\"" << num(f.py(b.q3)) << "\" width=\"" << num(2 * half)
      << "\" height=\"" << num(std::max(f.py(b.q1) - f.py(b.q3), 0.5)) << "\" fill=\"" << kPalette[0]
      << "\" fill-opacity=\"0.4\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << num(x - half) << "\" y1=\"" << num(f.py(b.median)) << "\" x2=\"" << num(x + half)
      << "\" y2=\"" << num(f.py(b.median)) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    s << "</g>\n";
    s << "<text x=\"" << num(x) << "\" y=\"" << base + 18 << "\" text-anchor=\"middle\">" << escape(labels[i])
      << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series, double reference_y) {
  double x0 = 0, x1 = 1, y0 = std::min(0.0, reference_y), y1 = reference_y;
  bool first = true;
  for (const auto& sr : series) {
    for (std::size_t i = 0; i < sr.x.size(); ++i) {
      if (!std::isfinite(sr.y[i])) continue;
      if (first) {
        x0 = x1 = sr.x[i];
        first = false;
      }
      x0 = std::min(x0, sr.x[i]);
      x1 = std::max(x1, sr.x[i]);
      y0 = std::min(y0, sr.y[i]);
      y1 = std::max(y1, sr.y[i]);
    }
  }
  pad_range(y0, y1);
  if (!(x1 > x0)) pad_range(x0, x1);
  const Frame f{x0, x1, y0, y1};
  auto s = open_svg(title);
  y_axis(s, f, y_label);
  x_axis_numeric(s, f, x_label);
  if (std::isfinite(reference_y)) {
    s << "<line x1=\"" << kLeft << "\" y1=\"" << num(f.py(reference_y)) << "\" x2=\"" << kWidth - kRight
      << "\" y2=\"" << num(f.py(reference_y)) << "\" stroke=\"gray\" stroke-dasharray=\"5,4\"/>\n";
  }
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& sr = series[k];
    labels.push_back(sr.label);
    s << "<polyline fill=\"none\" stroke=\"" << kPalette[k % 10] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < sr.x.size(); ++i)
      if (std::isfinite(sr.y[i])) s << num(f.px(sr.x[i])) << ',' << num(f.py(sr.y[i])) << ' ';
    s << "\"/>\n";
  }
  legend(s, labels);
  s << "</svg>\n";
  return s.str();
}

std::string histogram_svg(const std::string& title, const std::vector<std::string>& labels,
                          const std::vector<std::vector<double>>& samples, int bins) {
  if (labels.size() != samples.size()) throw ValidationError("one label per sample is required");
  double lo = 0.0, hi = 1.0;
  bool first = true;
  for (const auto& v : samples)
    for (const double x : v) {
      if (!std::isfinite(x)) continue;
      if (first) {
        lo = hi = x;
        first = false;
      }
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  if (!(hi > lo)) hi = lo + 1.0;
  std::vector<std::vector<double>> density;
  double top = 0.0;
  for (const auto& v : samples) {
    const auto counts = histogram_counts(v, lo, hi, bins);
    std::vector<double> d;
    for (const auto c : counts) d.push_back(v.empty() ? 0.0 : static_cast<double>(c) / static_cast<double>(v.size()));
    top = std::max(top, *std::max_element(d.begin(), d.end()));
    density.push_back(std::move(d));
  }
  const Frame f{lo, hi, 0.0, top > 0 ? top * 1.05 : 1.0};
  auto s = open_svg(title);
  y_axis(s, f, "share of items");
  x_axis_numeric(s, f, "normalized score");
  const double w = (hi - lo) / bins;
  for (std::size_t k = 0; k < density.size(); ++k) {
    s << "<g class=\"histogram\" data-label=\"" << escape(labels[k]) << "\" data-bins=\"" << bins << "\">\n";
    for (int b = 0; b < bins; ++b) {
      const double x = lo + w * b;
      const double h = density[k][static_cast<std::size_t>(b)];
      s << "<rect x=\"" << num(f.px(x)) << "\" y=\"" << num(f.py(h)) << "\" width=\""
        << num(std::max(f.px(x + w) - f.px(x), 0.5)) << "\" height=\"" << num(f.py(0) - f.py(h)) << "\" fill=\""
        << kPalette[k % 10] << "\" fill-opacity=\"0.45\"/>\n";
    }
    s << "</g>\n";
  }
  legend(s, labels);
  s << "</svg>\n";
  return s.str();
}

std::vector<fs::path> render_run(const fs::path& dir, const RenderOptions& options) {
  require_files(dir);
  const RunDump run = load_run(dir);
  if (run.seeds.empty()) throw Error("run " + dir.string() + " has no successful seed to render");
  const auto inputs = audit_inputs(run);
  const std::string name = run.config.dataset.name;
  fs::create_directories(dir / "plots");
  fs::create_directories(dir / "tables");
  std::vector<fs::path> written;

  // Predicted score by true grade, pooled over seeds.
  std::map<int, std::vector<double>> by_grade;
  for (const auto& s : inputs.seeds) {
    const Vector& v = s.score(inputs.score);
    for (std::size_t i = 0; i < inputs.grades.size(); ++i)
      if (std::isfinite(v[static_cast<Index>(i)])) by_grade[inputs.grades[i]].push_back(v[static_cast<Index>(i)]);
  }
  std::vector<std::string> labels;
  std::vector<BoxStats> boxes;
  for (auto& [g, values] : by_grade) {
    labels.push_back("grade " + std::to_string(g));
    boxes.push_back(box_stats(std::move(values)));
  }
  const std::string score_name = inputs.score == AuditScore::kSoftmax ? "softmax score" : "logit";
  write_text(dir / "plots" / "credibility_boxplot.svg",
             boxplot_svg(name + ": predicted relevance by grade", score_name, labels, boxes), written);

  const auto consistency = audit_consistency(inputs);
  std::vector<Series> curves;
  for (const auto& c : consistency.curves) {
    Series sr;
    sr.label = "seed " + std::to_string(c.seed);
    sr.x.assign(c.iterations.begin(), c.iterations.end());
    sr.y = c.mse;
    curves.push_back(std::move(sr));
  }
  write_text(dir / "plots" / "consistency.svg",
             line_plot_svg(name + ": validation logit MSE to final checkpoint", "iteration", "S_n", curves,
                           consistency.epsilon),
             written);

  const Vector truth = normalize01(to_vector(inputs.grades));
  std::vector<double> true_norm(truth.data(), truth.data() + truth.size());
  std::vector<double> pred_norm;
  for (const auto& s : inputs.seeds) {
    const Vector p = normalize01(s.score(inputs.score));
    pred_norm.insert(pred_norm.end(), p.data(), p.data() + p.size());
  }
  write_text(dir / "plots" / "availability_histogram.svg",
             histogram_svg(name + ": true vs predicted relevance", {"true", "predicted"}, {true_norm, pred_norm},
                           options.histogram_bins),
             written);

  // Aggregates of fairness.csv over seeds.
  std::map<std::tuple<std::string, std::string, std::string>, std::vector<double>> cells;
  std::vector<std::tuple<std::string, std::string, std::string>> order;
  for (const auto& r : read_fairness_csv(dir / "fairness.csv")) {
    const auto key = std::make_tuple(r.ranking, r.relevance, r.metric);
    if (!cells.count(key)) order.push_back(key);
    if (std::isfinite(r.value)) cells[key].push_back(r.value);
    else cells[key];
  }
  std::vector<std::vector<std::string>> table = {{"ranking", "relevance", "metric", "mean", "sd", "n"}};
  std::ostringstream csv;
  csv << "ranking,relevance,metric,mean,sd,n\n";
  for (const auto& key : order) {
    const auto& v = cells[key];
    const std::string m = v.empty() ? "nan" : format_real(stats::mean(v));
    const std::string sd = v.empty() ? "nan" : format_real(stats::stddev(v));
    const auto& [ranking, relevance, metric] = key;
    table.push_back({ranking, relevance, metric, m, sd, std::to_string(v.size())});
    csv << ranking << ',' << relevance << ',' << metric << ',' << m << ',' << sd << ',' << v.size() << '\n';
  }
  write_text(dir / "tables" / "fairness_summary.csv", csv.str(), written);
  write_text(dir / "tables" / "fairness_summary.txt", aligned(table), written);
  write_text(dir / "tables" / "desiderata.txt", format_verdict_table({{name, audit_all(inputs)}}), written);
  return written;
}

}  // namespace fairrank
