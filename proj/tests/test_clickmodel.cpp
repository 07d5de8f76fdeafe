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
#include <set>
#include <sstream>

#include "fairrank/clickmodel.hpp"

using namespace fairrank;

namespace {

Dataset pool_of(const std::vector<int>& grades) {
  Dataset ds;
  ds.dim = 1;
  for (std::size_t i = 0; i < grades.size(); ++i)
    ds.items.push_back({static_cast<std::int64_t>(i), Vector::Zero(1), grades[i], 0});
  return ds;
}

}  // namespace

TEST_SUITE("clickmodel") {

TEST_CASE("examination propensity") {
  const PbmConfig cfg;
  CHECK(examination_propensity(1, cfg) == 1.0);
  CHECK(examination_propensity(2, cfg) == doctest::Approx(0.5));
  CHECK(examination_propensity(10, cfg) == doctest::Approx(0.1));
  CHECK(examination_propensity(11, cfg) == 0.0);
  PbmConfig steep;
  steep.eta = 2.0;
  CHECK(examination_propensity(3, steep) == doctest::Approx(1.0 / 9.0));
}

TEST_CASE("click probability") {
  const PbmConfig cfg;
  CHECK(click_probability(0, cfg) == doctest::Approx(0.1));
  CHECK(click_probability(4, cfg) == doctest::Approx(1.0));
  CHECK(click_probability(2, cfg) == doctest::Approx(0.28));
  CHECK_THROWS(click_probability(5, cfg));
  CHECK_THROWS(click_probability(-1, cfg));
}

TEST_CASE("invalid configs are rejected") {
  PbmConfig cfg;
  cfg.eps_neg = 0.5;
  cfg.eps_pos = 0.4;
  CHECK_THROWS(cfg.validate());
  cfg = PbmConfig{};
  cfg.cutoff = 0;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("sessions show a permutation and respect the cutoff") {
  const PbmConfig cfg;
  auto rng = make_rng(1);
  const auto pool = pool_of({4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4});
  for (int s = 0; s < 200; ++s) {
    const auto session = simulate_session(pool, cfg, rng);
    REQUIRE(session.rows.size() == pool.size());
    CHECK(std::set<Index>(session.rows.begin(), session.rows.end()).size() == pool.size());
    for (std::size_t r = 0; r < session.rows.size(); ++r) {
      CHECK(session.propensities[r] == examination_propensity(static_cast<int>(r) + 1, cfg));
      if (session.clicks[r]) CHECK(static_cast<int>(r) < cfg.cutoff);
    }
  }
}

TEST_CASE("impossible and certain clicks") {
  auto rng = make_rng(2);
  PbmConfig none;
  none.eps_neg = 0.0;
  const auto zeros = pool_of(std::vector<int>(20, 0));
  for (int s = 0; s < 100; ++s) CHECK(simulate_session(zeros, none, rng).click_count() == 0);

  PbmConfig all;
  all.eta = 0.0;
  all.eps_neg = 1.0;
  all.eps_pos = 1.0;
  for (int s = 0; s < 100; ++s) CHECK(simulate_session(zeros, all, rng).click_count() == 10);
}

TEST_CASE("grade 4 at rank 1 is always clicked") {
  const PbmConfig cfg;
  auto rng = make_rng(3);
  const auto pool = pool_of({4, 0, 0, 0, 0});
  std::size_t shown = 0, clicked = 0;
  for (int s = 0; s < 100000; ++s) {
    const auto session = simulate_session(pool, cfg, rng);
    if (session.rows[0] != 0) continue;
    ++shown;
    clicked += session.clicks[0];
  }
  CHECK(shown > 15000);
  CHECK(clicked == shown);
}

TEST_CASE("click rate at a rank is propensity times click probability") {
  const PbmConfig cfg;
  auto rng = make_rng(4);
  const auto pool = pool_of({0, 1, 2, 3, 4, 0, 1, 2, 3, 4, 0, 1, 2, 3, 4});
  constexpr int kSessions = 100000;
  std::vector<std::vector<double>> shown(cfg.cutoff, std::vector<double>(5, 0.0));
  auto clicks = shown;
  for (int s = 0; s < kSessions; ++s) {
    const auto session = simulate_session(pool, cfg, rng);
    for (int r = 0; r < cfg.cutoff; ++r) {
      const int g = pool.items[static_cast<std::size_t>(session.rows[r])].grade;
      shown[r][g] += 1;
      clicks[r][g] += session.clicks[r];
    }
  }
  // Checked at 4 sigma so that 50 simultaneous comparisons rarely trip by chance.
  for (int r = 0; r < cfg.cutoff; ++r)
    for (int g = 0; g < 5; ++g) {
      const double p = examination_propensity(r + 1, cfg) * click_probability(g, cfg);
      const double sigma = std::sqrt(p * (1 - p) / shown[r][g]);
      CHECK(std::abs(clicks[r][g] / shown[r][g] - p) <= 4 * sigma + 1e-12);
    }
}

TEST_CASE("fixed display keeps the stored order") {
  PbmConfig cfg;
  cfg.display = PbmConfig::Display::kFixed;
  auto rng = make_rng(5);
  const auto session = simulate_session(pool_of({1, 2, 3}), cfg, rng);
  CHECK(session.rows == std::vector<Index>{0, 1, 2});
}

TEST_CASE("click log format") {
  ClickSession s;
  s.displayed = {7, 9};
  s.rows = {0, 1};
  s.clicks = {1, 0};
  s.propensities = {1.0, 0.5};
  std::ostringstream out;
  write_click_log_header(out);
  write_click_log(out, 3, s);
  CHECK(out.str() == "session_id,position,item_id,clicked,propensity\n3,1,7,1,1\n3,2,9,0,0.5\n");
}

}  // TEST_SUITE
