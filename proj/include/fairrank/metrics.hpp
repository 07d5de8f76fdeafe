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

#ifndef FAIRRANK_METRICS_HPP_
#define FAIRRANK_METRICS_HPP_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairrank/types.hpp"

namespace fairrank {

enum class ScoreSource { kTrueGrade, kPredicted };
std::string_view to_string(ScoreSource source);

/// Display order over the rows of an evaluated list, best first.
struct Ranking {
  std::vector<Index> order;
  ScoreSource source = ScoreSource::kPredicted;

  std::size_t size() const { return order.size(); }
};

/// Sorts rows by descending score; equal scores keep row order.
Ranking rank_by_scores(std::span<const double> scores,
                       ScoreSource source = ScoreSource::kPredicted);
Ranking rank_by_scores(const Vector& scores,
                       ScoreSource source = ScoreSource::kPredicted);

/// Log-decaying attention: 1/log2(rank+1) inside the top k, 0 beyond.
double attention_weight(int rank, int k = 10);

/// Min-max rescaling to [0, 1]; a constant vector maps to zeros.
Vector normalize01(const Vector& values);

/// Attention received by every row under `ranking` (indexed by row).
Vector item_exposure(const Ranking& ranking, int k = 10);

/// A ratio whose denominator may vanish. `defined` is false when it did and
/// `value` is then NaN.
struct GuardedRatio {
  double value = 0.0;
  bool defined = true;

  static GuardedRatio of(double numerator, double denominator);
};

struct GroupPair {
  double g0 = 0.0;
  double g1 = 0.0;
};

/// Mean (optionally [0,1]-normalised) exposure per group.
GroupPair group_exposure(const Ranking& ranking, std::span<const int> groups,
                         int k = 10, bool normalize = true);
/// Mean (optionally [0,1]-normalised) relevance per group.
GroupPair group_relevance(const Vector& relevance, std::span<const int> groups,
                          bool normalize = true);

/// |Exposure(G0) / Exposure(G1)|.
GuardedRatio demographic_parity(GroupPair exposure);
/// (Exposure(G0)/Relevance(G0)) / (Exposure(G1)/Relevance(G1)).
GuardedRatio exposure_fairness(GroupPair exposure, GroupPair relevance);
/// Sum over items of |exposure - relevance| for a single ranking.
double individual_fairness(const Vector& exposure, const Vector& relevance,
                           bool normalize = true);
/// Per-item terms of individual_fairness, before summation.
Vector individual_fairness_terms(const Vector& exposure, const Vector& relevance,
                                 bool normalize = true);

/// Exponential-gain NDCG over the top k of `ranking`. Lists without any
/// positive grade score 0.
double ndcg_at_k(const Ranking& ranking, std::span<const int> grades, int k = 10);

struct FairnessReport {
  ScoreSource relevance_source = ScoreSource::kPredicted;
  int k = 10;
  bool normalized = true;
  double ndcg_at_k = 0.0;
  GroupPair exposure;
  GroupPair relevance;
  GuardedRatio demographic_parity;
  GuardedRatio exposure_fairness;
  double individual_fairness = 0.0;
};

/// Computes every metric for one ranking. `relevance` is the relevance
/// vector the fairness terms use (true grades or model predictions);
/// utility is always measured against `grades`.
FairnessReport fairness_report(const Ranking& ranking, const Vector& relevance,
                               std::span<const int> grades,
                               std::span<const int> groups, int k,
                               ScoreSource relevance_source,
                               bool normalize = true);

nlohmann::ordered_json to_json(const FairnessReport& report);

Vector to_vector(std::span<const int> values);

}  // namespace fairrank

#endif  // FAIRRANK_METRICS_HPP_
