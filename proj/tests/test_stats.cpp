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

#include <cmath>
#include <random>

#include "fairrank/stats.hpp"
#include "oracles.hpp"
#include "properties.hpp"

using namespace fairrank;

namespace {

std::vector<double> normal_sample(Rng& rng, std::size_t n, double shift = 0.0) {
  std::normal_distribution<double> d(shift, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST_SUITE("stats") {

TEST_CASE("midranks average ties") {
  const std::vector<double> v{3, 1, 3, 2};
  CHECK(stats::midranks(v) == std::vector<double>{3.5, 1, 3.5, 2});
  CHECK(stats::midranks(v) == oracle::midranks_by_counting(v));
}

TEST_CASE("spearman examples") {
  const std::vector<double> x{1, 2, 3, 4, 5}, y{1, 3, 2, 5, 4}, neg{-1, -2, -3, -4, -5};
  CHECK(*stats::spearman(x, x) == doctest::Approx(1.0));
  CHECK(*stats::spearman(x, neg) == doctest::Approx(-1.0));
  CHECK(*stats::spearman(x, y) == doctest::Approx(0.8));
  const std::vector<double> flat{2, 2, 2, 2, 2};
  CHECK_FALSE(stats::spearman(x, flat).has_value());
}

TEST_CASE("kruskal-wallis examples") {
  const auto same = stats::kruskal_wallis({{1, 2, 3}, {1, 2, 3}});
  CHECK(same.statistic == doctest::Approx(0.0));
  CHECK(same.p_value == doctest::Approx(1.0));
  const auto apart = stats::kruskal_wallis({{1, 2, 3}, {4, 5, 6}});
  CHECK(apart.statistic == doctest::Approx(3.857).epsilon(1e-3));
  const auto flat = stats::kruskal_wallis({{2, 2}, {2, 2, 2}});
  CHECK(flat.statistic == 0.0);
  CHECK(flat.p_value == 1.0);
}

TEST_CASE("ks examples") {
  const std::vector<double> a{1, 2, 3, 4}, b{1.5, 2.5, 3.5, 4.5}, z{0, 0, 0, 0}, o{1, 1, 1, 1};
  const auto eq = stats::ks_two_sample(a, a);
  CHECK(eq.statistic == 0.0);
  CHECK(eq.p_value == doctest::Approx(1.0));
  CHECK(stats::ks_two_sample(z, o).statistic == 1.0);
  CHECK(stats::ks_two_sample(a, b).statistic == doctest::Approx(0.25));
  CHECK(stats::ks_two_sample(a, b).statistic == doctest::Approx(oracle::ks_statistic_direct(a, b)));
  CHECK_THROWS(stats::ks_two_sample(std::vector<double>{}, a));
}

TEST_CASE("wilcoxon examples") {
  const std::vector<double> a{1, 4, 2, 8, 5, 7};
  const auto same = stats::wilcoxon_signed_rank(a, a);
  CHECK(same.degenerate);
  CHECK(same.p_value == 1.0);
  std::vector<double> b(a);
  for (auto& v : b) v += 3.0;
  CHECK(stats::wilcoxon_signed_rank(a, b).statistic == 0.0);
}

TEST_CASE("p values agree with brute-force oracles for n <= 10") {
  const auto agreement = property::stats_oracle_agreement(200, 17);
  CHECK(agreement.kruskal_wallis <= 0.05);
  CHECK(agreement.ks <= 0.05);
  CHECK(agreement.wilcoxon <= 0.05);
  CHECK(agreement.mann_whitney <= 0.05);
  CHECK(agreement.spearman <= 1e-12);
}

TEST_CASE("rejection rate under the null is close to alpha") {
  auto rng = make_rng(23);
  constexpr int kTrials = 2000;
  int kw = 0, ks = 0, wx = 0, mw = 0;
  for (int t = 0; t < kTrials; ++t) {
    kw += stats::kruskal_wallis({normal_sample(rng, 20), normal_sample(rng, 20), normal_sample(rng, 20)}).p_value < 0.05;
    ks += stats::ks_two_sample(normal_sample(rng, 150), normal_sample(rng, 150)).p_value < 0.05;
    wx += stats::wilcoxon_signed_rank(normal_sample(rng, 30), normal_sample(rng, 30)).p_value < 0.05;
    mw += stats::mann_whitney_u(normal_sample(rng, 30), normal_sample(rng, 30)).p_value < 0.05;
  }
  for (const int hits : {kw, ks, wx, mw}) CHECK(std::abs(hits / double(kTrials) - 0.05) <= 0.02);
}

TEST_CASE("tests are invariant under strictly monotone transforms") {
  auto rng = make_rng(29);
  const auto f = [](double v) { return std::exp(2.0 * v) + 3.0; };
  for (int t = 0; t < 50; ++t) {
    auto a = normal_sample(rng, 12), b = normal_sample(rng, 9, 0.5), c = normal_sample(rng, 7, -0.3);
    auto fa = a, fb = b, fc = c;
    for (auto* v : {&fa, &fb, &fc})
      for (auto& x : *v) x = f(x);
    CHECK(*stats::spearman(std::span(a).first(9), b) == doctest::Approx(*stats::spearman(std::span(fa).first(9), fb)));
    CHECK(stats::kruskal_wallis({a, b, c}).p_value == doctest::Approx(stats::kruskal_wallis({fa, fb, fc}).p_value));
    CHECK(stats::ks_two_sample(a, b).p_value == doctest::Approx(stats::ks_two_sample(fa, fb).p_value));

    // Signed-rank: transform the magnitudes of the differences, keep the signs.
    const auto d = normal_sample(rng, 15);
    std::vector<double> zero(d.size(), 0.0), fd(d);
    for (auto& x : fd) x = std::copysign(std::pow(std::abs(x), 3.0) + 0.1, x);
    CHECK(stats::wilcoxon_signed_rank(zero, d).p_value == doctest::Approx(stats::wilcoxon_signed_rank(zero, fd).p_value));
  }
}

TEST_CASE("distribution tails") {
  CHECK(stats::normal_sf(0.0) == doctest::Approx(0.5));
  CHECK(stats::normal_sf(1.959964) == doctest::Approx(0.025).epsilon(1e-4));
  CHECK(stats::chi_square_sf(3.841459, 1) == doctest::Approx(0.05).epsilon(1e-4));
  CHECK(stats::kolmogorov_sf(1.358) == doctest::Approx(0.05).epsilon(1e-2));
  CHECK(stats::kolmogorov_sf(0.5) == doctest::Approx(0.9639).epsilon(1e-3));
}

TEST_CASE("descriptive helpers") {
  CHECK(stats::median({3, 1, 2}) == 2.0);
  CHECK(stats::median({4, 1, 2, 3}) == 2.5);
  const std::vector<double> v{1, 2, 3, 4};
  CHECK(stats::mean(v) == 2.5);
  CHECK(stats::stddev(v) == doctest::Approx(std::sqrt(1.25)));
}

}  // TEST_SUITE
