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

#include "fairrank/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fairrank {

std::string_view to_string(ScoreSource source) {
  return source == ScoreSource::kTrueGrade ? "true" : "predicted";
}

Ranking rank_by_scores(std::span<const double> scores, ScoreSource source) {
  Ranking r;
  r.source = source;
  r.order.resize(scores.size());
  std::iota(r.order.begin(), r.order.end(), Index{0});
  std::stable_sort(r.order.begin(), r.order.end(), [&](Index a, Index b) {
    return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
  });
  return r;
}

Ranking rank_by_scores(const Vector& scores, ScoreSource source) {
  return rank_by_scores(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())), source);
}

double attention_weight(int rank, int k) {
  if (rank < 1) throw ValidationError("ranks are 1-based");
  if (rank > k) return 0.0;
  return 1.0 / std::log2(rank + 1.0);
}

Vector normalize01(const Vector& values) {
  if (values.size() == 0) return values;
  const double lo = values.minCoeff();
  const double range = values.maxCoeff() - lo;
  if (!(range > 0.0)) return Vector::Zero(values.size());
  return (values.array() - lo) / range;
}

Vector item_exposure(const Ranking& ranking, int k) {
  Vector out = Vector::Zero(static_cast<Index>(ranking.size()));
  const auto top = std::min<std::size_t>(ranking.size(), static_cast<std::size_t>(std::max(k, 0)));
  for (std::size_t r = 0; r < top; ++r)
    out[ranking.order[r]] = attention_weight(static_cast<int>(r + 1), k);
  return out;
}

GuardedRatio GuardedRatio::of(double numerator, double denominator) {
  if (denominator == 0.0 || !std::isfinite(denominator) || !std::isfinite(numerator))
    return {std::numeric_limits<double>::quiet_NaN(), false};
  return {numerator / denominator, true};
}

namespace {

GroupPair group_means(const Vector& values, std::span<const int> groups) {
  if (static_cast<std::size_t>(values.size()) != groups.size())
    throw ValidationError("values and group labels differ in length");
  double sum[2] = {0.0, 0.0};
  std::size_t count[2] = {0, 0};
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const int g = groups[i];
    if (g != 0 && g != 1) throw ValidationError("groups must be binary");
    sum[g] += values[static_cast<Index>(i)];
    ++count[g];
  }
  for (int g = 0; g < 2; ++g)
    if (count[g] == 0) throw ValidationError("group " + std::to_string(g) + " is empty");
  return {sum[0] / static_cast<double>(count[0]), sum[1] / static_cast<double>(count[1])};
}

}  // namespace

GroupPair group_exposure(const Ranking& ranking, std::span<const int> groups,
                         int k, bool normalize) {
  const Vector exposure = item_exposure(ranking, k);
  return group_means(normalize ? normalize01(exposure) : exposure, groups);
}

GroupPair group_relevance(const Vector& relevance, std::span<const int> groups,
                          bool normalize) {
  return group_means(normalize ? normalize01(relevance) : relevance, groups);
}

GuardedRatio demographic_parity(GroupPair exposure) {
  auto r = GuardedRatio::of(exposure.g0, exposure.g1);
  if (r.defined) r.value = std::abs(r.value);
  return r;
}

GuardedRatio exposure_fairness(GroupPair exposure, GroupPair relevance) {
  const auto lhs = GuardedRatio::of(exposure.g0, relevance.g0);
  const auto rhs = GuardedRatio::of(exposure.g1, relevance.g1);
  if (!lhs.defined || !rhs.defined) return {std::numeric_limits<double>::quiet_NaN(), false};
  return GuardedRatio::of(lhs.value, rhs.value);
}

Vector individual_fairness_terms(const Vector& exposure, const Vector& relevance,
                                 bool normalize) {
  if (exposure.size() != relevance.size())
    throw ValidationError("exposure and relevance differ in length");
  if (normalize) return (normalize01(exposure) - normalize01(relevance)).cwiseAbs();
  return (exposure - relevance).cwiseAbs();
}

double individual_fairness(const Vector& exposure, const Vector& relevance,
                           bool normalize) {
  return individual_fairness_terms(exposure, relevance, normalize).sum();
}

double ndcg_at_k(const Ranking& ranking, std::span<const int> grades, int k) {
  if (ranking.size() != grades.size())
    throw ValidationError("ranking and grades differ in length");
  const auto top = std::min<std::size_t>(grades.size(), static_cast<std::size_t>(std::max(k, 0)));
  const auto gain = [](int g) { return std::exp2(g) - 1.0; };
  double dcg = 0.0;
  for (std::size_t r = 0; r < top; ++r)
    dcg += gain(grades[static_cast<std::size_t>(ranking.order[r])]) / std::log2(r + 2.0);

  std::vector<int> ideal(grades.begin(), grades.end());
  std::partial_sort(ideal.begin(), ideal.begin() + static_cast<std::ptrdiff_t>(top), ideal.end(),
                    std::greater<>());
  double idcg = 0.0;
  for (std::size_t r = 0; r < top; ++r) idcg += gain(ideal[r]) / std::log2(r + 2.0);
  return idcg > 0.0 ? dcg / idcg : 0.0;
}

FairnessReport fairness_report(const Ranking& ranking, const Vector& relevance,
                               std::span<const int> grades,
                               std::span<const int> groups, int k,
                               ScoreSource relevance_source, bool normalize) {
  FairnessReport rep;
  rep.relevance_source = relevance_source;
  rep.k = k;
  rep.normalized = normalize;
  rep.ndcg_at_k = ndcg_at_k(ranking, grades, k);
  rep.exposure = group_exposure(ranking, groups, k, normalize);
  rep.relevance = group_relevance(relevance, groups, normalize);
  rep.demographic_parity = demographic_parity(rep.exposure);
  rep.exposure_fairness = exposure_fairness(rep.exposure, rep.relevance);
  rep.individual_fairness = individual_fairness(item_exposure(ranking, k), relevance, normalize);
  return rep;
}

namespace {

nlohmann::ordered_json guarded_json(const GuardedRatio& r) {
  nlohmann::ordered_json j;
  j["value"] = r.defined ? nlohmann::json(r.value) : nlohmann::json(nullptr);
  j["defined"] = r.defined;
  return j;
}

}  // namespace

nlohmann::ordered_json to_json(const FairnessReport& report) {
  nlohmann::ordered_json j;
  j["relevance_source"] = std::string(to_string(report.relevance_source));
  j["k"] = report.k;
  j["normalized"] = report.normalized;
  j["ndcg_at_k"] = report.ndcg_at_k;
  j["exposure"] = {{"g0", report.exposure.g0}, {"g1", report.exposure.g1}};
  j["relevance"] = {{"g0", report.relevance.g0}, {"g1", report.relevance.g1}};
  j["demographic_parity"] = guarded_json(report.demographic_parity);
  j["exposure_fairness"] = guarded_json(report.exposure_fairness);
  j["individual_fairness"] = report.individual_fairness;
  return j;
}

Vector to_vector(std::span<const int> values) {
  Vector out(static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) out[static_cast<Index>(i)] = values[i];
  return out;
}

}  // namespace fairrank
