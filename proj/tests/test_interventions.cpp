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
#include <sstream>

#include "fairrank/interventions.hpp"
#include "oracles.hpp"
#include "properties.hpp"

using namespace fairrank;

namespace {

std::vector<double> scores_of(const std::vector<ScoredItem>& items) {
  std::vector<double> s;
  for (const auto& i : items) s.push_back(i.score);
  return s;
}

}  // namespace

TEST_SUITE("interventions") {

TEST_CASE("targets from relevance") {
  const std::vector<double> equal{0.4, 0.4}, skewed{0.6, 0.2}, one{0.5, 0.0}, none{0.0, 0.0};
  CHECK(target_from_relevance(equal).p == std::vector<double>{0.5, 0.5});
  const auto t = target_from_relevance(skewed);
  CHECK(t.p[0] == doctest::Approx(0.75));
  CHECK(t.p[1] == doctest::Approx(0.25));
  CHECK(target_from_relevance(one).p == std::vector<double>{1.0, 0.0});
  CHECK_THROWS(target_from_relevance(none));
  CHECK_THROWS(TargetDistribution{{0.7, 0.7}}.validate());
}

TEST_CASE("prefix bounds") {
  CHECK(prefix_floor(3, 0.5) == 1);
  CHECK(prefix_ceil(3, 0.5) == 2);
  CHECK(prefix_floor(10, 0.3) == 3);
  CHECK(prefix_ceil(10, 0.3) == 3);
}

TEST_CASE("four-item fixture") {
  const std::vector<ScoredItem> items{{0, 0, 0.9}, {1, 0, 0.7}, {2, 1, 0.8}, {3, 1, 0.6}};
  const TargetDistribution half{{0.5, 0.5}};
  for (const auto rule : {SelectionRule::kProportional, SelectionRule::kGeyik})
    for (const auto alg : {Algorithm::kDetCons, Algorithm::kDetConstSort}) {
      const auto out = rerank(alg, items, half, 4, rule);
      CHECK_FALSE(oracle::rerank_violation(items, half, 4, out).has_value());
      CHECK(scores_of(out) == std::vector<double>{0.9, 0.8, 0.7, 0.6});
    }
}

TEST_CASE("degenerate target takes the best of one group") {
  std::vector<ScoredItem> items;
  for (int i = 0; i < 12; ++i) items.push_back({i, i % 3 == 0 ? 1 : 0, 100.0 - i});
  const auto out = detcons(items, {{1.0, 0.0}}, 5);
  REQUIRE(out.size() == 5);
  for (const auto& o : out) CHECK(o.group == 0);
  CHECK(scores_of(out) == std::vector<double>{99, 98, 96, 95, 93});
}

TEST_CASE("a single group is a pure score sort") {
  const std::vector<ScoredItem> items{{0, 0, 0.2}, {1, 0, 0.9}, {2, 0, 0.5}, {3, 0, 0.7}};
  const auto out = detconstsort(items, {{1.0, 0.0}}, 4);
  CHECK(scores_of(out) == std::vector<double>{0.9, 0.7, 0.5, 0.2});
}

TEST_CASE("inactive constraints leave the ranking unchanged") {
  // Alternating groups already meet every prefix floor and ceiling at p = 0.5.
  std::vector<ScoredItem> items;
  for (int i = 0; i < 20; ++i) items.push_back({i, i % 2, 100.0 - i});
  for (const auto alg : {Algorithm::kDetCons, Algorithm::kDetConstSort}) {
    const auto out = rerank(alg, items, {{0.5, 0.5}}, 10);
    CHECK(std::equal(out.begin(), out.end(), items.begin()));
  }

  // Scores paired with kNone: pre and post reports coincide.
  Vector scores(6), rel(6);
  scores << 0.9, 0.8, 0.7, 0.6, 0.5, 0.4;
  rel << 1, 0.5, 0.7, 0.2, 0.4, 0.1;
  const std::vector<int> grades{4, 2, 3, 1, 2, 0}, groups{0, 1, 0, 1, 0, 1};
  const auto r = evaluate_intervention(scores, rel, grades, groups, Algorithm::kNone, 4, ScoreSource::kTrueGrade);
  CHECK(r.pre.exposure_fairness.value == r.post.exposure_fairness.value);
  CHECK(r.pre.individual_fairness == r.post.individual_fairness);
}

TEST_CASE("random fixtures satisfy the re-ranking invariants") {
  for (const auto rule : {SelectionRule::kProportional, SelectionRule::kGeyik}) {
    const auto report = property::intervention_fixtures(1000, 31, rule);
    INFO(report.first_failure);
    CHECK(report.failures == 0);
    CHECK(report.infeasible < report.fixtures / 2);
  }
}

TEST_CASE("infeasible floors raise an error") {
  const std::vector<ScoredItem> items{{0, 0, 0.9}, {1, 0, 0.8}, {2, 0, 0.7}, {3, 1, 0.6}};
  CHECK_THROWS_AS(detcons(items, {{0.5, 0.5}}, 4), InfeasibleError);
  CHECK_THROWS_AS(detconstsort(items, {{0.5, 0.5}}, 4), InfeasibleError);
}

TEST_CASE("balanced fixture moves exposure fairness toward 1") {
  auto rng = make_rng(12);
  std::uniform_int_distribution<int> grade(0, 4);
  std::normal_distribution<double> noise(0.0, 0.5);
  constexpr Index n = 60;
  Vector scores(n), rel(n);
  std::vector<int> grades(n), groups(n);
  for (Index i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    groups[u] = static_cast<int>(i % 2);
    grades[u] = grade(rng);
    rel[i] = grades[u];
    // The scorer favours group 0 regardless of relevance.
    scores[i] = grades[u] + noise(rng) + (groups[u] == 0 ? 0.8 : 0.0);
  }
  for (const auto alg : {Algorithm::kDetCons, Algorithm::kDetConstSort}) {
    const auto r = evaluate_intervention(scores, rel, grades, groups, alg, 10, ScoreSource::kTrueGrade);
    REQUIRE(r.pre.exposure_fairness.defined);
    REQUIRE(r.post.exposure_fairness.defined);
    CHECK(std::abs(r.post.exposure_fairness.value - 1.0) <= std::abs(r.pre.exposure_fairness.value - 1.0));
    CHECK(r.ranking.size() == static_cast<std::size_t>(n));
  }
}

TEST_CASE("algorithm names") {
  for (const auto a : {Algorithm::kNone, Algorithm::kDetCons, Algorithm::kDetConstSort})
    CHECK(algorithm_from_string(to_string(a)) == a);
  CHECK_THROWS(algorithm_from_string("bogus"));
}

TEST_CASE("re-ranked csv layout") {
  const std::vector<ScoredItem> top{{1, 1, 0.5}, {0, 0, 0.25}};
  const std::vector<std::int64_t> ids{70, 71};
  std::ostringstream out;
  write_reranked_csv(out, top, ids);
  CHECK(out.str() == "position,item_id,group,score\n1,71,1,0.5\n2,70,0,0.25\n");
}

}  // TEST_SUITE
