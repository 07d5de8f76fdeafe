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


#ifndef FAIRRANK_DESIDERATA_HPP_
#define FAIRRANK_DESIDERATA_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairrank/stats.hpp"
#include "fairrank/types.hpp"

namespace fairrank {

struct Thresholds {
  double alpha = 0.05;
  double consistency_epsilon = 0.1;
  double stability_epsilon = 1.0;
  double rho_min = 0.3;
  double ratio_tol = 0.05;

  void validate() const;
};

/// Which per-item prediction the credibility, stability, comparability and
/// availability audits read. Consistency always uses validation logits.
enum class AuditScore { kSoftmax, kLogit };

/// One training run's predictions.
struct SeedPredictions {
  std::uint64_t seed = 0;
  Vector test_logits;   // best checkpoint, test items
  Vector test_softmax;  // NaN marks an undefined prediction
  std::vector<int> checkpoint_iterations;
  std::vector<Vector> checkpoint_validation_logits;  // aligned with iterations

  const Vector& score(AuditScore which) const {
    return which == AuditScore::kSoftmax ? test_softmax : test_logits;
  }
};

struct AuditInputs {
  std::vector<SeedPredictions> seeds;
  std::vector<int> grades;  // test items
  std::vector<int> groups;  // test items
  Thresholds thresholds;
  AuditScore score = AuditScore::kSoftmax;

  void validate() const;
};

/// Fields shared by every criterion's result.
struct Verdict {
  bool evaluated = true;  // false when preconditions failed; see note
  bool pass = false;
  std::string note;
  std::vector<std::uint64_t> seeds;
};

struct CredibilityResult : Verdict {
  stats::TestResult kruskal_wallis;
  std::vector<int> grade_levels;  // grades with at least one item
  std::vector<double> medians;    // aligned with grade_levels
  std::vector<int> skipped_grades;
  bool medians_monotone = false;
};

struct ConsistencyCurve {
  std::uint64_t seed = 0;
  std::vector<int> iterations;
  std::vector<double> mse;  // S_n against the final checkpoint
  std::optional<int> converged_at;
};

struct ConsistencyResult : Verdict {
  double epsilon = 0.1;
  std::vector<ConsistencyCurve> curves;
  double max_penultimate_mse = 0.0;
};

struct StabilityResult : Verdict {
  double epsilon = 1.0;
  double mean_item_std = 0.0;
};

struct ComparabilityResult : Verdict {
  double rho_min = 0.3;
  double ratio_tol = 0.05;
  std::optional<double> rho;  // mean over seeds
  std::optional<double> rho_g0;
  std::optional<double> rho_g1;
  std::vector<double> rho_per_seed;
  double true_ratio = 0.0;
  double predicted_ratio = 0.0;  // mean over seeds
  double ratio_difference = 0.0;
  bool individual_pass = false;
  bool group_pass = false;
};

struct AvailabilityResult : Verdict {
  double alpha = 0.05;
  bool all_defined = true;
  std::size_t undefined_count = 0;
  std::vector<stats::TestResult> ks_per_seed;
  double max_statistic = 0.0;
  double min_p_value = 1.0;
};

CredibilityResult audit_credibility(const AuditInputs& inputs);
/// Same test run separately on each seed's predictions.
std::vector<CredibilityResult> audit_credibility_per_seed(const AuditInputs& inputs);
ConsistencyResult audit_consistency(const AuditInputs& inputs);
StabilityResult audit_stability(const AuditInputs& inputs);
ComparabilityResult audit_comparability(const AuditInputs& inputs);
AvailabilityResult audit_availability(const AuditInputs& inputs);

struct DesiderataReport {
  Thresholds thresholds;
  CredibilityResult credibility;
  ConsistencyResult consistency;
  StabilityResult stability;
  ComparabilityResult comparability;
  AvailabilityResult availability;
};

/// Runs all five audits. An audit whose preconditions fail is reported as
/// not evaluated rather than aborting the others.
DesiderataReport audit_all(const AuditInputs& inputs);

nlohmann::ordered_json to_json(const Thresholds& t);
Thresholds thresholds_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const DesiderataReport& report);

/// One row per dataset with a pass / fail / partial / n/a cell per criterion.
std::string format_verdict_table(const std::vector<std::pair<std::string, DesiderataReport>>& rows);

}  // namespace fairrank

#endif  // FAIRRANK_DESIDERATA_HPP_
