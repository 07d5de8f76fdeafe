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


#ifndef FAIRRANK_EXPERIMENT_HPP_
#define FAIRRANK_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairrank/clickmodel.hpp"
#include "fairrank/datagen.hpp"
#include "fairrank/dataio.hpp"
#include "fairrank/desiderata.hpp"
#include "fairrank/interventions.hpp"
#include "fairrank/ranker.hpp"
#include "fairrank/stats.hpp"

namespace fairrank {

struct DatasetSpec {
  enum class Source { kSynthetic, kLibsvm };
  std::string name = "synth-normal";
  Source source = Source::kSynthetic;
  DagConfig dag;
  std::filesystem::path path;  // libsvm input
  int grade_max = 4;           // libsvm input
  std::uint64_t data_seed = 0;
  /// When set, the data is subsampled to `subsample_n` items with this share
  /// in group 0.
  std::optional<double> majority_fraction;
  std::size_t subsample_n = 25000;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  SplitFractions splits;
  PbmConfig pbm;
  TrainConfig train;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  int k = 10;
  /// Min-max normalise exposure and relevance before the fairness metrics.
  bool normalize = true;
  std::vector<Algorithm> interventions;
  SelectionRule selection_rule = SelectionRule::kProportional;
  Thresholds thresholds;
  AuditScore audit_score = AuditScore::kSoftmax;
  /// Training iterations whose sessions are written to clicks.csv.
  int click_log_iterations = 0;
  int jobs = 1;
  std::filesystem::path output_dir = "runs/default";

  void validate() const;
};

enum class Preset { kDesk, kFull };
Preset preset_from_string(std::string_view name);

/// Named datasets: synth-normal, synth-pareto, fairtrec-like.
DatasetSpec dataset_preset(std::string_view name, Preset preset);
ExperimentConfig preset_config(Preset preset, std::string_view dataset_name);

nlohmann::ordered_json to_json(const ExperimentConfig& cfg);
/// Fields present in `j` override `base`.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
/// 64-bit FNV-1a of the canonical (sorted-key) config JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);
std::string fnv1a_hex(std::string_view bytes);

/// Generates or loads the dataset and applies the optional subsample.
Dataset load_dataset(const DatasetSpec& spec);
/// load_dataset, split, then robust scaling fitted on the training split.
DatasetSplit prepare_data(const ExperimentConfig& cfg);

struct SeedOutcome {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  int best_iteration = 0;
  std::string digest;
};

struct RunSummary {
  std::filesystem::path dir;
  std::string config_hash;
  std::vector<SeedOutcome> seeds;
  DesiderataReport desiderata;

  bool ok() const;
};

/// Runs every seed, writes the run directory and audits the successful
/// seeds. Seed failures are recorded, not thrown.
/// True when cfg.output_dir holds a finished, error-free run of this config.
bool run_is_current(const ExperimentConfig& cfg);

/// With reuse_current, a directory that already holds this run is audited
/// again instead of retrained.
RunSummary run_experiment(const ExperimentConfig& cfg, bool reuse_current = false);

struct FairnessRow {
  std::uint64_t seed = 0;
  std::string ranking;    // model, detcons, detconstsort
  std::string relevance;  // true, predicted
  std::string metric;
  double value = 0.0;
};

std::vector<FairnessRow> read_fairness_csv(const std::filesystem::path& file);

struct SeedDump {
  std::uint64_t seed = 0;
  int best_iteration = 0;
  std::vector<int> iterations;
  std::vector<Vector> validation_logits;
  std::vector<std::int64_t> test_ids;
  Vector test_logits;
  Vector test_softmax;
  std::vector<int> test_grades;
  std::vector<int> test_groups;
};

struct RunDump {
  std::filesystem::path dir;
  nlohmann::json manifest;
  ExperimentConfig config;
  std::vector<SeedDump> seeds;  // successful seeds, manifest order
};

/// Reads a run directory. Missing files raise an Error naming them.
RunDump load_run(const std::filesystem::path& dir);
AuditInputs audit_inputs(const RunDump& run);
/// Re-audits a run directory and rewrites desiderata.json / desiderata.txt.
DesiderataReport audit_run(const std::filesystem::path& dir);

struct ComparisonRow {
  std::string metric;
  std::string ranking;
  std::string deviation;  // what the ± columns measure
  double true_mean = 0.0;
  double true_sd = 0.0;
  double predicted_mean = 0.0;
  double predicted_sd = 0.0;
  stats::TestResult paired;
  stats::TestResult unpaired;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
};

/// True vs predicted relevance for the same rankings: per-seed exposure
/// fairness and demographic parity, and per-item individual fairness terms.
/// Writes comparison.json and comparison.txt.
ComparisonReport compare_fairness(const std::filesystem::path& dir);
nlohmann::ordered_json to_json(const ComparisonReport& report);
std::string format_comparison_table(const ComparisonReport& report);

struct SweepPoint {
  double fraction = 0.0;
  std::uint64_t seed = 0;
  double exposure_fairness_true = 0.0;
  double exposure_fairness_predicted = 0.0;
  double delta = 0.0;  // predicted - true
};

struct SweepReport {
  std::vector<double> fractions;
  std::vector<SweepPoint> points;
  std::vector<double> mean_delta;  // aligned with fractions
  std::vector<std::string> errors;
};

/// One run per fraction under `<output_dir>/f<fraction>`; writes sweep.csv
/// (per seed) and sweep_summary.csv into output_dir.
SweepReport sweep_imbalance(const ExperimentConfig& base, const std::vector<double>& fractions,
                            bool reuse_current = false);
std::vector<double> default_sweep_fractions();

/// Rounds every float in `j` to six significant digits and sorts keys.
nlohmann::json canonical_json(const nlohmann::ordered_json& j);
void write_json_file(const std::filesystem::path& file, const nlohmann::ordered_json& j);
nlohmann::json read_json_file(const std::filesystem::path& file);

}  // namespace fairrank

#endif  // FAIRRANK_EXPERIMENT_HPP_
