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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairrank/metrics.hpp"

using namespace fairrank;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (const double x : v) out[i++] = x;
  return out;
}

Ranking identity(std::size_t n) {
  Ranking r;
  r.order.resize(n);
  std::iota(r.order.begin(), r.order.end(), 0);
  return r;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("attention weights") {
  CHECK(attention_weight(1) == 1.0);
  CHECK(attention_weight(3) == doctest::Approx(0.5));
  CHECK(attention_weight(11, 10) == 0.0);
  CHECK(attention_weight(10, 10) > 0.0);
}

TEST_CASE("normalize01") {
  CHECK(normalize01(vec({2, 4, 6})) == vec({0, 0.5, 1}));
  CHECK(normalize01(vec({5, 5})) == vec({0, 0}));
  const auto unit = vec({0, 0.25, 1, 0.5});
  CHECK(normalize01(unit) == unit);
}

TEST_CASE("rank_by_scores sorts descending with stable ties") {
  const auto r = rank_by_scores(vec({0.2, 0.9, 0.2, 0.5}));
  CHECK(r.order == std::vector<Index>{1, 3, 0, 2});
}

TEST_CASE("group exposure and relevance") {
  // Twelve items; all of group 0 sits below rank 10.
  std::vector<int> groups(12, 1);
  groups[10] = groups[11] = 0;
  const auto e = group_exposure(identity(12), groups, 10);
  CHECK(e.g0 == 0.0);
  CHECK(e.g1 > 0.0);

  // Single-item groups at ranks 1 and 3: raw exposure (1.0, 0.5).
  const std::vector<int> two{0, 1};
  Ranking r;
  r.order = {0, 2, 1};
  const std::vector<int> three{0, 1, 1};
  const auto raw = group_exposure(r, three, 10, false);
  CHECK(raw.g0 == doctest::Approx(1.0));
  CHECK(raw.g1 == doctest::Approx((0.5 + 1.0 / std::log2(3.0)) / 2.0));

  const auto rel = group_relevance(vec({0.3, 0.3, 0.9, 0.9}), std::vector<int>{0, 1, 0, 1});
  CHECK(rel.g0 == doctest::Approx(rel.g1));
  CHECK_THROWS(group_relevance(vec({1, 2}), std::vector<int>{0, 0}));
}

TEST_CASE("demographic parity and exposure fairness") {
  CHECK(demographic_parity({0.4, 0.4}).value == doctest::Approx(1.0));
  CHECK_FALSE(demographic_parity({0.4, 0.0}).defined);
  CHECK(exposure_fairness({0.6, 0.3}, {0.4, 0.2}).value == doctest::Approx(1.0));
  CHECK_FALSE(exposure_fairness({0.6, 0.0}, {0.4, 0.2}).defined);
  CHECK_FALSE(exposure_fairness({0.6, 0.3}, {0.4, 0.0}).defined);

  // Two items at ranks 1 and 3 normalise to exposures 1 and 0, so the ratio is undefined.
  Ranking r;
  r.order = {0, 1};
  const std::vector<int> two{0, 1};
  const auto norm = group_exposure(r, two, 10, true);
  CHECK(norm.g0 == 1.0);
  CHECK(norm.g1 == 0.0);
  CHECK_FALSE(demographic_parity(norm).defined);
}

TEST_CASE("individual fairness") {
  CHECK(individual_fairness(vec({0.1, 0.5, 0.9}), vec({0.1, 0.5, 0.9})) == 0.0);
  CHECK(individual_fairness(vec({1, 0}), vec({0, 1})) == doctest::Approx(2.0));
  const auto terms = individual_fairness_terms(vec({1, 0}), vec({0, 1}));
  CHECK(terms.sum() == doctest::Approx(2.0));
}

TEST_CASE("individual fairness grows by at most the perturbation") {
  auto rng = make_rng(1);
  std::uniform_real_distribution<double> unit;
  for (int t = 0; t < 200; ++t) {
    Vector e(8), r(8);
    for (Index i = 0; i < 8; ++i) {
      e[i] = unit(rng);
      r[i] = unit(rng);
    }
    const double base = individual_fairness(e, r, false);
    Vector bumped = e;
    const double eps = 0.01;
    bumped[static_cast<Index>(t % 8)] += eps;
    CHECK(individual_fairness(bumped, r, false) <= base + eps + 1e-12);
  }
}

TEST_CASE("ndcg examples") {
  const std::vector<int> sorted{4, 3, 2, 1, 0};
  CHECK(ndcg_at_k(identity(5), sorted) == doctest::Approx(1.0));
  const std::vector<int> inverted{0, 4};
  CHECK(ndcg_at_k(identity(2), inverted, 2) == doctest::Approx(0.631).epsilon(1e-3));
  const std::vector<int> zeros{0, 0, 0};
  CHECK(ndcg_at_k(identity(3), zeros) == 0.0);
}

TEST_CASE("ndcg is at most 1 and reaches it only for an ideal prefix") {
  auto rng = make_rng(2);
  std::uniform_int_distribution<int> grade(0, 4);
  for (int t = 0; t < 300; ++t) {
    std::vector<int> g(15);
    for (auto& x : g) x = grade(rng);
    auto r = identity(g.size());
    std::shuffle(r.order.begin(), r.order.end(), rng);
    const double v = ndcg_at_k(r, g);
    CHECK(v <= 1.0 + 1e-12);
    std::vector<int> top, ideal(g);
    for (std::size_t i = 0; i < 10; ++i) top.push_back(g[static_cast<std::size_t>(r.order[i])]);
    std::sort(ideal.rbegin(), ideal.rend());
    ideal.resize(10);
    const bool is_ideal = top == ideal;
    if (std::any_of(g.begin(), g.end(), [](int x) { return x > 0; })) CHECK((std::abs(v - 1.0) < 1e-12) == is_ideal);
  }
}

TEST_CASE("metric invariants") {
  auto rng = make_rng(3);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  std::bernoulli_distribution coin(0.5);
  for (int t = 0; t < 200; ++t) {
    const Index n = 20;
    Vector rel(n);
    std::vector<int> groups(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      rel[i] = unit(rng);
      groups[static_cast<std::size_t>(i)] = static_cast<int>(i % 2);
    }
    std::shuffle(groups.begin(), groups.end(), rng);
    const auto ranking = rank_by_scores(rel);

    // Permuting items within a group keeps the group relevance.
    Vector permuted = rel;
    std::vector<Index> g0;
    for (Index i = 0; i < n; ++i)
      if (groups[static_cast<std::size_t>(i)] == 0) g0.push_back(i);
    std::vector<Index> shuffled = g0;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (std::size_t i = 0; i < g0.size(); ++i) permuted[g0[i]] = rel[shuffled[i]];
    CHECK(group_relevance(permuted, groups).g0 == doctest::Approx(group_relevance(rel, groups).g0));

    const auto exposure = group_exposure(ranking, groups);
    const double ef = exposure_fairness(group_exposure(ranking, groups, 10, false),
                                        group_relevance(rel, groups, false)).value;
    const double ef_scaled = exposure_fairness(group_exposure(ranking, groups, 10, false),
                                               group_relevance(3.7 * rel, groups, false)).value;
    CHECK(ef_scaled == doctest::Approx(ef));
    const double ef_norm = exposure_fairness(exposure, group_relevance(rel, groups)).value;
    const Vector affine = (2.0 * rel.array() + 5.0).matrix();
    CHECK(exposure_fairness(exposure, group_relevance(affine, groups)).value == doctest::Approx(ef_norm));

    const auto dp = demographic_parity(exposure);
    std::vector<int> swapped(groups);
    for (auto& g : swapped) g = 1 - g;
    const auto dp_swapped = demographic_parity(group_exposure(ranking, swapped));
    if (dp.defined && dp_swapped.defined && dp.value > 0) CHECK(dp_swapped.value == doctest::Approx(1.0 / dp.value));
  }
}

TEST_CASE("fairness report bundles the metrics") {
  const Vector rel = vec({0.9, 0.1, 0.8, 0.3, 0.5, 0.2});
  const std::vector<int> grades{4, 0, 3, 1, 2, 0}, groups{0, 1, 0, 1, 0, 1};
  const auto r = fairness_report(rank_by_scores(rel), rel, grades, groups, 10, ScoreSource::kPredicted);
  CHECK(r.ndcg_at_k == doctest::Approx(1.0));
  CHECK(r.exposure_fairness.defined);
  CHECK(r.exposure_fairness.value ==
        doctest::Approx(exposure_fairness(r.exposure, r.relevance).value));
}

}  // TEST_SUITE
