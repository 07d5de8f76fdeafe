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

// Independent reference implementations used as test oracles. Nothing here
// shares code with the library routines it checks.

#ifndef FAIRRANK_TESTS_ORACLES_HPP_
#define FAIRRANK_TESTS_ORACLES_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairrank/interventions.hpp"
#include "fairrank/types.hpp"

namespace fairrank::oracle {

/// Midranks by counting: 1 + #smaller + (#equal - 1) / 2.
std::vector<double> midranks_by_counting(const std::vector<double>& v);

/// 1 - 6 sum d^2 / (n (n^2 - 1)); valid only without ties.
double spearman_rank_difference(const std::vector<double>& x, const std::vector<double>& y);

/// Permutation p of Kruskal-Wallis: enumerates every distinct relabelling of
/// the pooled sample and compares sum R_g^2 / n_g.
double kruskal_wallis_permutation_p(const std::vector<std::vector<double>>& samples);

/// sup |F_a - F_b| evaluated at every pooled point.
double ks_statistic_direct(const std::vector<double>& a, const std::vector<double>& b);

/// Exact KS p by enumerating every split of the pooled sample.
double ks_exhaustive_p(const std::vector<double>& a, const std::vector<double>& b);

/// Exact two-sided signed-rank p over all 2^n sign patterns.
double wilcoxon_exact_p(const std::vector<double>& a, const std::vector<double>& b);

/// Exact two-sided rank-sum p over all label assignments.
double mann_whitney_exact_p(const std::vector<double>& a, const std::vector<double>& b);

/// Returns a description of the first violated re-ranking invariant.
std::optional<std::string> rerank_violation(const std::vector<ScoredItem>& input,
                                            const TargetDistribution& target, int k,
                                            const std::vector<ScoredItem>& output);

/// True when some prefix floor up to k exceeds a group's pool size.
bool rerank_infeasible(const std::vector<ScoredItem>& input, const TargetDistribution& target, int k);

}  // namespace fairrank::oracle

#endif  // FAIRRANK_TESTS_ORACLES_HPP_
