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

#include "fairrank/desiderata.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "fairrank/metrics.hpp"

namespace fairrank {

void Thresholds::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  if (!(consistency_epsilon >= 0.0)) throw ValidationError("consistency epsilon must be >= 0");
  if (!(stability_epsilon >= 0.0)) throw ValidationError("stability epsilon must be >= 0");
  if (!(rho_min >= -1.0 && rho_min <= 1.0)) throw ValidationError("rho_min must lie in [-1, 1]");
  if (!(ratio_tol >= 0.0)) throw ValidationError("ratio tolerance must be >= 0");
}

void AuditInputs::validate() const {
  thresholds.validate();
  if (seeds.empty()) throw ValidationError("audit needs at least one seed");
  if (grades.size() != groups.size()) throw ValidationError("grades and groups differ in length");
  const auto n = static_cast<Index>(grades.size());
  for (const auto& s : seeds) {
    if (s.test_logits.size() != n || s.test_softmax.size() != n)
      throw ValidationError("seed " + std::to_string(s.seed) + " predicts " +
                            std::to_string(s.test_softmax.size()) + " items, expected " +
                            std::to_string(n));
    if (s.checkpoint_iterations.size() != s.checkpoint_validation_logits.size())
      throw ValidationError("seed " + std::to_string(s.seed) + " has misaligned checkpoints");
  }
}

namespace {

std::vector<std::uint64_t> seed_ids(const AuditInputs& in) {
  std::vector<std::uint64_t> out;
  for (const auto& s : in.seeds) out.push_back(s.seed);
  return out;
}

// Rows where the prediction is defined.
std::vector<Index> defined_rows(const Vector& v) {
  std::vector<Index> rows;
  for (Index i = 0; i < v.size(); ++i)
    if (std::isfinite(v[i])) rows.push_back(i);
  return rows;
}

CredibilityResult credibility_on(const AuditInputs& in, const std::vector<const SeedPredictions*>& runs) {
  CredibilityResult res;
  for (const auto* run : runs) res.seeds.push_back(run->seed);
  std::map<int, std::vector<double>> by_grade;
  for (const auto* run : runs) {
    const Vector& s = run->score(in.score);
    for (std::size_t i = 0; i < in.grades.size(); ++i) {
      const double v = s[static_cast<Index>(i)];
      if (std::isfinite(v)) by_grade[in.grades[i]].push_back(v);
    }
  }
  const int top = in.grades.empty() ? -1 : *std::max_element(in.grades.begin(), in.grades.end());
  std::vector<std::vector<double>> samples;
  for (int g = 0; g <= top; ++g) {
    auto it = by_grade.find(g);
    if (it == by_grade.end()) {
      res.skipped_grades.push_back(g);
      continue;
    }
    res.grade_levels.push_back(g);
    res.medians.push_back(stats::median(it->second));
    samples.push_back(std::move(it->second));
  }
  if (!res.skipped_grades.empty()) {
    res.note = "grades without items skipped:";
    for (const int g : res.skipped_grades) res.note += " " + std::to_string(g);
  }
  if (samples.size() < 2) {
    res.evaluated = false;
    res.note = "fewer than two grade levels present";
    return res;
  }
  res.kruskal_wallis = stats::kruskal_wallis(samples);
  res.medians_monotone = std::is_sorted(res.medians.begin(), res.medians.end());
  res.pass = res.kruskal_wallis.p_value < in.thresholds.alpha && res.medians_monotone;
  return res;
}

// Mean and population std of the finite entries.
std::pair<double, double> moments(const Vector& v) {
  double sum = 0.0, sq = 0.0;
  Index n = 0;
  for (Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) continue;
    sum += v[i];
    ++n;
  }
  const double m = n > 0 ? sum / static_cast<double>(n) : 0.0;
  for (Index i = 0; i < v.size(); ++i)
    if (std::isfinite(v[i])) sq += (v[i] - m) * (v[i] - m);
  return {m, n > 0 ? std::sqrt(sq / static_cast<double>(n)) : 0.0};
}

}  // namespace

CredibilityResult audit_credibility(const AuditInputs& inputs) {
  inputs.validate();
  std::vector<const SeedPredictions*> runs;
  for (const auto& s : inputs.seeds) runs.push_back(&s);
  return credibility_on(inputs, runs);
}

std::vector<CredibilityResult> audit_credibility_per_seed(const AuditInputs& inputs) {
  inputs.validate();
  std::vector<CredibilityResult> out;
  for (const auto& s : inputs.seeds) out.push_back(credibility_on(inputs, {&s}));
  return out;
}

ConsistencyResult audit_consistency(const AuditInputs& inputs) {
  inputs.validate();
  ConsistencyResult res;
  res.epsilon = inputs.thresholds.consistency_epsilon;
  res.seeds = seed_ids(inputs);
  res.pass = true;
  for (const auto& s : inputs.seeds) {
    const auto& snaps = s.checkpoint_validation_logits;
    if (snaps.size() < 2)
      throw ValidationError("seed " + std::to_string(s.seed) + " has fewer than two checkpoints");
    ConsistencyCurve curve;
    curve.seed = s.seed;
    curve.iterations = s.checkpoint_iterations;
    const Vector& last = snaps.back();
    for (const auto& snap : snaps) {
      if (snap.size() != last.size())
        throw ValidationError("checkpoint logits differ in length for seed " + std::to_string(s.seed));
      curve.mse.push_back(last.size() == 0 ? 0.0 : (snap - last).squaredNorm() / static_cast<double>(last.size()));
    }
    // The final snapshot matches itself trivially, so convergence must be
    // reached no later than the penultimate checkpoint.
    std::size_t start = curve.mse.size() - 1;
    while (start > 0 && curve.mse[start - 1] <= res.epsilon) --start;
    if (start + 1 < curve.mse.size()) curve.converged_at = curve.iterations[start];
    else res.pass = false;
    res.max_penultimate_mse = std::max(res.max_penultimate_mse, curve.mse[curve.mse.size() - 2]);
    res.curves.push_back(std::move(curve));
  }
  return res;
}

StabilityResult audit_stability(const AuditInputs& inputs) {
  inputs.validate();
  if (inputs.seeds.size() < 2) throw ValidationError("stability needs at least two seeds");
  StabilityResult res;
  res.epsilon = inputs.thresholds.stability_epsilon;
  res.seeds = seed_ids(inputs);
  const auto n = static_cast<Index>(inputs.grades.size());
  Matrix z(n, static_cast<Index>(inputs.seeds.size()));
  for (std::size_t c = 0; c < inputs.seeds.size(); ++c) {
    const Vector& s = inputs.seeds[c].score(inputs.score);
    const auto [m, sd] = moments(s);
    for (Index i = 0; i < n; ++i) z(i, static_cast<Index>(c)) = sd > 0.0 ? (s[i] - m) / sd : 0.0;
  }
  double total = 0.0;
  Index counted = 0;
  for (Index i = 0; i < n; ++i) {
    const auto row = z.row(i);
    if (!row.allFinite()) continue;
    const double mu = row.mean();
    total += std::sqrt((row.array() - mu).square().mean());
    ++counted;
  }
  if (counted == 0) {
    res.evaluated = false;
    res.note = "no item has a defined prediction in every seed";
    return res;
  }
  if (counted < n) res.note = std::to_string(n - counted) + " items with undefined predictions skipped";
  res.mean_item_std = total / static_cast<double>(counted);
  res.pass = res.mean_item_std <= res.epsilon;
  return res;
}

ComparabilityResult audit_comparability(const AuditInputs& inputs) {
  inputs.validate();
  ComparabilityResult res;
  res.rho_min = inputs.thresholds.rho_min;
  res.ratio_tol = inputs.thresholds.ratio_tol;
  res.seeds = seed_ids(inputs);

  const auto true_rel = group_relevance(to_vector(inputs.grades), inputs.groups);
  const auto true_ratio = GuardedRatio::of(true_rel.g0, true_rel.g1);
  res.true_ratio = true_ratio.value;

  std::vector<double> rho_all, rho0, rho1, pred_ratios, diffs;
  bool rho_undefined = false, ratio_undefined = !true_ratio.defined;
  for (const auto& s : inputs.seeds) {
    const Vector& score = s.score(inputs.score);
    std::vector<double> x[3], y[3];
    std::vector<int> groups;
    std::vector<double> defined_scores;
    for (const Index i : defined_rows(score)) {
      const auto u = static_cast<std::size_t>(i);
      const int g = inputs.groups[u];
      for (const int slot : {0, g + 1}) {
        x[slot].push_back(score[i]);
        y[slot].push_back(inputs.grades[u]);
      }
      groups.push_back(g);
      defined_scores.push_back(score[i]);
    }
    const auto corr = [&](int slot, std::vector<double>& sink) {
      std::optional<double> r;
      if (x[slot].size() >= 2) r = stats::spearman(x[slot], y[slot]);
      if (r) sink.push_back(*r);
      else rho_undefined = true;
      return r;
    };
    const auto r = corr(0, rho_all);
    corr(1, rho0);
    corr(2, rho1);
    res.rho_per_seed.push_back(r ? *r : std::numeric_limits<double>::quiet_NaN());

    const Vector pred = Eigen::Map<const Vector>(defined_scores.data(), static_cast<Index>(defined_scores.size()));
    GuardedRatio pred_ratio{std::numeric_limits<double>::quiet_NaN(), false};
    try {
      const auto rel = group_relevance(pred, groups);
      pred_ratio = GuardedRatio::of(rel.g0, rel.g1);
    } catch (const ValidationError&) {
    }
    if (!pred_ratio.defined) {
      ratio_undefined = true;
      continue;
    }
    pred_ratios.push_back(pred_ratio.value);
    if (true_ratio.defined) diffs.push_back(std::abs(true_ratio.value - pred_ratio.value));
  }
  const auto avg = [](const std::vector<double>& v) -> std::optional<double> {
    if (v.empty()) return std::nullopt;
    return stats::mean(v);
  };
  res.rho = avg(rho_all);
  res.rho_g0 = avg(rho0);
  res.rho_g1 = avg(rho1);
  res.predicted_ratio = avg(pred_ratios).value_or(std::numeric_limits<double>::quiet_NaN());
  res.ratio_difference = avg(diffs).value_or(std::numeric_limits<double>::quiet_NaN());

  res.individual_pass = !rho_undefined && res.rho && *res.rho >= res.rho_min;
  res.group_pass = !ratio_undefined && !diffs.empty() && res.ratio_difference <= res.ratio_tol;
  res.pass = res.individual_pass && res.group_pass;
  if (rho_undefined) res.note = "rank correlation undefined for a constant score vector";
  if (ratio_undefined) {
    if (!res.note.empty()) res.note += "; ";
    res.note += "group relevance ratio undefined";
  }
  return res;
}

AvailabilityResult audit_availability(const AuditInputs& inputs) {
  inputs.validate();
  AvailabilityResult res;
  res.alpha = inputs.thresholds.alpha;
  res.seeds = seed_ids(inputs);
  const Vector truth = normalize01(to_vector(inputs.grades));
  bool ks_pass = true;
  for (const auto& s : inputs.seeds) {
    const Vector& score = s.score(inputs.score);
    const auto rows = defined_rows(score);
    res.undefined_count += static_cast<std::size_t>(score.size()) - rows.size();
    if (rows.empty()) {
      ks_pass = false;
      continue;
    }
    Vector pred(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) pred[static_cast<Index>(i)] = score[rows[i]];
    pred = normalize01(pred);
    const auto ks = stats::ks_two_sample(std::span<const double>(truth.data(), static_cast<std::size_t>(truth.size())),
                                         std::span<const double>(pred.data(), static_cast<std::size_t>(pred.size())));
    ks_pass = ks_pass && ks.p_value >= res.alpha;
    res.max_statistic = std::max(res.max_statistic, ks.statistic);
    res.min_p_value = std::min(res.min_p_value, ks.p_value);
    res.ks_per_seed.push_back(ks);
  }
  res.all_defined = res.undefined_count == 0;
  if (!res.all_defined) res.note = std::to_string(res.undefined_count) + " undefined predictions";
  res.pass = res.all_defined && ks_pass;
  return res;
}

DesiderataReport audit_all(const AuditInputs& inputs) {
  inputs.validate();
  DesiderataReport rep;
  rep.thresholds = inputs.thresholds;
  const auto guarded = [&](auto audit, auto& slot) {
    try {
      slot = audit(inputs);
    } catch (const ValidationError& e) {
      slot.evaluated = false;
      slot.pass = false;
      slot.note = e.what();
      slot.seeds = seed_ids(inputs);
    }
  };
  guarded(audit_credibility, rep.credibility);
  guarded(audit_consistency, rep.consistency);
  guarded(audit_stability, rep.stability);
  guarded(audit_comparability, rep.comparability);
  guarded(audit_availability, rep.availability);
  if (!rep.stability.evaluated && inputs.seeds.size() < 2) rep.stability.note = "insufficient seeds";
  return rep;
}

nlohmann::ordered_json to_json(const Thresholds& t) {
  nlohmann::ordered_json j;
  j["alpha"] = t.alpha;
  j["consistency_epsilon"] = t.consistency_epsilon;
  j["stability_epsilon"] = t.stability_epsilon;
  j["rho_min"] = t.rho_min;
  j["ratio_tol"] = t.ratio_tol;
  return j;
}

Thresholds thresholds_from_json(const nlohmann::json& j) {
  Thresholds t;
  t.alpha = j.value("alpha", t.alpha);
  t.consistency_epsilon = j.value("consistency_epsilon", t.consistency_epsilon);
  t.stability_epsilon = j.value("stability_epsilon", t.stability_epsilon);
  t.rho_min = j.value("rho_min", t.rho_min);
  t.ratio_tol = j.value("ratio_tol", t.ratio_tol);
  t.validate();
  return t;
}

namespace {

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? number_or_null(*v) : nlohmann::json(nullptr);
}

nlohmann::ordered_json verdict_json(const Verdict& v) {
  nlohmann::ordered_json j;
  j["evaluated"] = v.evaluated;
  j["pass"] = v.pass;
  j["note"] = v.note;
  j["seeds"] = v.seeds;
  return j;
}

}  // namespace

nlohmann::ordered_json to_json(const DesiderataReport& r) {
  nlohmann::ordered_json j;
  j["thresholds"] = to_json(r.thresholds);

  auto cred = verdict_json(r.credibility);
  cred["kruskal_wallis"] = stats::to_json(r.credibility.kruskal_wallis);
  cred["grade_levels"] = r.credibility.grade_levels;
  cred["medians"] = r.credibility.medians;
  cred["skipped_grades"] = r.credibility.skipped_grades;
  cred["medians_monotone"] = r.credibility.medians_monotone;
  j["credibility"] = cred;

  auto cons = verdict_json(r.consistency);
  cons["epsilon"] = r.consistency.epsilon;
  cons["max_penultimate_mse"] = r.consistency.max_penultimate_mse;
  cons["curves"] = nlohmann::ordered_json::array();
  for (const auto& c : r.consistency.curves) {
    nlohmann::ordered_json cj;
    cj["seed"] = c.seed;
    cj["iterations"] = c.iterations;
    cj["mse"] = c.mse;
    cj["converged_at"] = c.converged_at ? nlohmann::json(*c.converged_at) : nlohmann::json(nullptr);
    cons["curves"].push_back(cj);
  }
  j["consistency"] = cons;

  auto stab = verdict_json(r.stability);
  stab["epsilon"] = r.stability.epsilon;
  stab["mean_item_std"] = r.stability.mean_item_std;
  j["stability"] = stab;

  const auto& c = r.comparability;
  auto comp = verdict_json(c);
  comp["rho_min"] = c.rho_min;
  comp["ratio_tol"] = c.ratio_tol;
  comp["rho"] = optional_json(c.rho);
  comp["rho_group0"] = optional_json(c.rho_g0);
  comp["rho_group1"] = optional_json(c.rho_g1);
  nlohmann::json per_seed = nlohmann::json::array();
  for (const double v : c.rho_per_seed) per_seed.push_back(number_or_null(v));
  comp["rho_per_seed"] = per_seed;
  comp["true_ratio"] = number_or_null(c.true_ratio);
  comp["predicted_ratio"] = number_or_null(c.predicted_ratio);
  comp["ratio_difference"] = number_or_null(c.ratio_difference);
  comp["individual_pass"] = c.individual_pass;
  comp["group_pass"] = c.group_pass;
  j["comparability"] = comp;

  auto avail = verdict_json(r.availability);
  avail["alpha"] = r.availability.alpha;
  avail["all_defined"] = r.availability.all_defined;
  avail["undefined_count"] = r.availability.undefined_count;
  avail["max_statistic"] = r.availability.max_statistic;
  avail["min_p_value"] = r.availability.min_p_value;
  avail["ks_per_seed"] = nlohmann::ordered_json::array();
  for (const auto& ks : r.availability.ks_per_seed) avail["ks_per_seed"].push_back(stats::to_json(ks));
  j["availability"] = avail;
  return j;
}

std::string format_verdict_table(const std::vector<std::pair<std::string, DesiderataReport>>& rows) {
  const auto cell = [](const Verdict& v) -> std::string {
    if (!v.evaluated) return "n/a";
    return v.pass ? "pass" : "fail";
  };
  const std::vector<std::string> header = {"Dataset",   "Credibility",   "Consistency",
                                           "Stability", "Comparability", "Availability"};
  std::vector<std::vector<std::string>> table = {header};
  for (const auto& [name, r] : rows) {
    std::string comp = cell(r.comparability);
    if (r.comparability.evaluated && !r.comparability.pass &&
        (r.comparability.individual_pass || r.comparability.group_pass))
      comp = "partial";
    table.push_back({name, cell(r.credibility), cell(r.consistency), cell(r.stability), comp,
                     cell(r.availability)});
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : table)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::ostringstream out;
  for (const auto& row : table) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << std::left << std::setw(static_cast<int>(width[c])) << row[c];
      out << (c + 1 < row.size() ? "  " : "\n");
    }
  }
  return out.str();
}

}  // namespace fairrank
