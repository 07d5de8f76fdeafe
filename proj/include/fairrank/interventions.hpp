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


#ifndef FAIRRANK_INTERVENTIONS_HPP_
#define FAIRRANK_INTERVENTIONS_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fairrank/metrics.hpp"
#include "fairrank/types.hpp"

namespace fairrank {

/// Desired share of each group among the top k. Index = group label.
struct TargetDistribution {
  std::vector<double> p;

  void validate() const;
};

TargetDistribution target_from_relevance(std::span<const double> group_relevance);
TargetDistribution target_from_relevance(GroupPair group_relevance);

struct ScoredItem {
  Index row = 0;  // position in the evaluated list
  int group = 0;
  double score = 0.0;

  bool operator==(const ScoredItem&) const = default;
};

/// How a group is chosen once prefix floors are satisfied.
///  kProportional: among groups below their ceiling, the one with the lowest
///    count/p, ties to the better next candidate; floors are resolved the same
///    way among the groups that are short.
///  kGeyik: short groups resolved by best next candidate, otherwise the group
///    minimising ceil(j p)/p; DetConstSort keeps extending the virtual prefix
///    past k until the list is full.
enum class SelectionRule { kProportional, kGeyik };

enum class Algorithm { kNone, kDetCons, kDetConstSort };
std::string_view to_string(Algorithm a);
Algorithm algorithm_from_string(std::string_view name);

/// Prefix bounds used by both re-rankers.
int prefix_floor(int j, double p);
int prefix_ceil(int j, double p);

/// Re-ranks into at most k items. Throws InfeasibleError when a group that
/// must appear has run out of candidates.
std::vector<ScoredItem> detcons(std::span<const ScoredItem> items, const TargetDistribution& target,
                                int k = 10, SelectionRule rule = SelectionRule::kProportional);
std::vector<ScoredItem> detconstsort(std::span<const ScoredItem> items,
                                     const TargetDistribution& target, int k = 10,
                                     SelectionRule rule = SelectionRule::kProportional);
std::vector<ScoredItem> rerank(Algorithm algorithm, std::span<const ScoredItem> items,
                               const TargetDistribution& target, int k = 10,
                               SelectionRule rule = SelectionRule::kProportional);

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

struct InterventionResult {
  Algorithm algorithm = Algorithm::kNone;
  int k = 10;
  TargetDistribution target;
  std::vector<ScoredItem> top;  // re-ranked prefix
  Ranking ranking;              // prefix followed by the remaining rows in score order
  FairnessReport pre;
  FairnessReport post;
};

/// Ranks rows by `scores`, re-ranks the top k towards targets derived from
/// `relevance` group means, and reports fairness under the same relevance
/// before and after.
InterventionResult evaluate_intervention(const Vector& scores, const Vector& relevance,
                                         std::span<const int> grades, std::span<const int> groups,
                                         Algorithm algorithm, int k, ScoreSource relevance_source,
                                         SelectionRule rule = SelectionRule::kProportional,
                                         bool normalize = true);

/// CSV with header `position,item_id,group,score`, 1-based positions.
void write_reranked_csv(std::ostream& out, std::span<const ScoredItem> top,
                        std::span<const std::int64_t> item_ids);

}  // namespace fairrank

#endif  // FAIRRANK_INTERVENTIONS_HPP_
