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

#ifndef FAIRRANK_STATS_HPP_
#define FAIRRANK_STATS_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace fairrank::stats {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::vector<std::size_t> n;
  std::string method;
  /// p_value came from the exact permutation distribution.
  bool exact = false;
  /// Inputs did not meet the test's preconditions; p_value is 1 or advisory.
  bool degenerate = false;
};

nlohmann::ordered_json to_json(const TestResult& r);

/// 1-based ranks with ties sharing their average rank.
std::vector<double> midranks(std::span<const double> values);

/// Rank correlation. Empty when either input is constant.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

/// Tie-corrected H with df = groups - 1. Small samples (at most
/// kExactAssignmentLimit distinct group assignments) use the exact
/// permutation distribution, larger ones the chi-square tail.
TestResult kruskal_wallis(const std::vector<std::vector<double>>& samples);
inline constexpr double kExactAssignmentLimit = 20000.0;

/// Two-sided two-sample Kolmogorov-Smirnov. Exact (tie-aware) p when
/// n_a * n_b <= kExactKsLimit, else the asymptotic Kolmogorov tail at
/// sqrt(n_a n_b / (n_a + n_b)) * D.
TestResult ks_two_sample(std::span<const double> a, std::span<const double> b);
inline constexpr std::size_t kExactKsLimit = 10000;

/// Paired signed-rank test, W = min(W+, W-), normal approximation with tie
/// and continuity corrections. Zero differences are dropped.
TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

/// Unpaired rank-sum test on U of the first sample. Exact over all splits
/// when there are at most kExactAssignmentLimit of them, otherwise the normal
/// approximation with tie and continuity corrections.
TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

double normal_sf(double z);
double chi_square_sf(double x, double df);
/// P(K > lambda) for the limiting Kolmogorov distribution.
double kolmogorov_sf(double lambda);

double median(std::vector<double> values);
double mean(std::span<const double> values);
/// Population standard deviation.
double stddev(std::span<const double> values);

}  // namespace fairrank::stats

#endif  // FAIRRANK_STATS_HPP_
