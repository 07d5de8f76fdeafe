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


#ifndef FAIRRANK_RENDER_HPP_
#define FAIRRANK_RENDER_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fairrank {

struct BoxStats {
  double whisker_lo = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double whisker_hi = 0.0;
  std::size_t n = 0;
};

/// Quartiles with whiskers at the most extreme points within 1.5 IQR.
BoxStats box_stats(std::vector<double> values);

/// Equal-width counts over [lo, hi]; values outside are clamped to the edge bins.
std::vector<std::size_t> histogram_counts(std::span<const double> values, double lo, double hi, int bins);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

std::string boxplot_svg(const std::string& title, const std::string& y_label,
                        const std::vector<std::string>& labels, const std::vector<BoxStats>& boxes);
std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series, double reference_y);
std::string histogram_svg(const std::string& title, const std::vector<std::string>& labels,
                          const std::vector<std::vector<double>>& samples, int bins);

struct RenderOptions {
  int histogram_bins = 50;
};

/// Writes plots/*.svg and tables/*.{csv,txt} for a run directory and returns
/// the files written.
std::vector<std::filesystem::path> render_run(const std::filesystem::path& dir,
                                              const RenderOptions& options = {});

}  // namespace fairrank

#endif  // FAIRRANK_RENDER_HPP_
