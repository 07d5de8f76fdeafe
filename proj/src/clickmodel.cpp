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

#include "fairrank/clickmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace fairrank {

namespace {

// First `shown` entries of a uniformly random permutation of [0, n).
std::vector<Index> random_prefix(std::size_t n, std::size_t shown, Rng& rng) {
  std::vector<Index> out;
  out.reserve(shown);
  if (shown * 4 < n) {
    // Sequential draws with duplicate rejection: exact and O(shown^2), which
    // beats materialising a pool-sized permutation per session.
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    while (out.size() < shown) {
      const auto r = static_cast<Index>(pick(rng));
      if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
    }
    return out;
  }
  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), Index{0});
  for (std::size_t i = 0; i < shown; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(perm[i], perm[pick(rng)]);
  }
  perm.resize(shown);
  return perm;
}

}  // namespace

void PbmConfig::validate() const {
  if (!(eta >= 0.0)) throw ValidationError("eta must be non-negative");
  if (cutoff < 1) throw ValidationError("cutoff must be at least 1");
  if (!(0.0 <= eps_neg && eps_neg <= eps_pos && eps_pos <= 1.0))
    throw ValidationError("click probabilities need 0 <= eps_neg <= eps_pos <= 1");
  if (grade_max < 1) throw ValidationError("grade_max must be at least 1");
}

std::size_t ClickSession::click_count() const {
  return static_cast<std::size_t>(std::count(clicks.begin(), clicks.end(), 1));
}

double examination_propensity(int rank, const PbmConfig& cfg) {
  if (rank < 1) throw ValidationError("ranks are 1-based");
  if (rank > cfg.cutoff) return 0.0;
  return std::pow(1.0 / rank, cfg.eta);
}

double click_probability(int grade, const PbmConfig& cfg) {
  if (grade < 0 || grade > cfg.grade_max)
    throw ValidationError("grade " + std::to_string(grade) + " outside [0, " +
                          std::to_string(cfg.grade_max) + "]");
  const double gain = (std::exp2(grade) - 1.0) / (std::exp2(cfg.grade_max) - 1.0);
  return cfg.eps_neg + (cfg.eps_pos - cfg.eps_neg) * gain;
}

ClickSession simulate_session(const Dataset& pool, const PbmConfig& cfg,
                              Rng& rng, std::size_t list_size) {
  const std::size_t n = pool.size();
  const std::size_t shown = list_size == 0 ? n : std::min(list_size, n);

  std::vector<Index> rows;
  if (cfg.display == PbmConfig::Display::kFixed) {
    rows.resize(shown);
    std::iota(rows.begin(), rows.end(), Index{0});
  } else {
    rows = random_prefix(n, shown, rng);
  }

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  ClickSession s;
  s.rows = std::move(rows);
  s.displayed.reserve(shown);
  s.clicks.assign(shown, 0);
  s.propensities.resize(shown);
  for (std::size_t r = 0; r < shown; ++r) {
    const auto& item = pool.items[static_cast<std::size_t>(s.rows[r])];
    s.displayed.push_back(item.id);
    const double p = examination_propensity(static_cast<int>(r + 1), cfg);
    s.propensities[r] = p;
    if (p == 0.0) continue;
    const bool examined = coin(rng) < p;
    const bool attracted = coin(rng) < click_probability(item.grade, cfg);
    s.clicks[r] = (examined && attracted) ? 1 : 0;
  }
  return s;
}

void write_click_log_header(std::ostream& out) {
  out << "session_id,position,item_id,clicked,propensity\n";
}

void write_click_log(std::ostream& out, std::size_t session_id,
                     const ClickSession& session) {
  for (std::size_t r = 0; r < session.displayed.size(); ++r)
    out << session_id << ',' << (r + 1) << ',' << session.displayed[r] << ','
        << static_cast<int>(session.clicks[r]) << ','
        << format_real(session.propensities[r]) << '\n';
}

nlohmann::ordered_json to_json(const PbmConfig& cfg) {
  return {{"eta", cfg.eta},
          {"cutoff", cfg.cutoff},
          {"eps_pos", cfg.eps_pos},
          {"eps_neg", cfg.eps_neg},
          {"grade_max", cfg.grade_max},
          {"display", cfg.display == PbmConfig::Display::kFixed ? "fixed" : "randomized"}};
}

PbmConfig pbm_config_from_json(const nlohmann::json& j) {
  PbmConfig cfg;
  cfg.eta = j.value("eta", cfg.eta);
  cfg.cutoff = j.value("cutoff", cfg.cutoff);
  cfg.eps_pos = j.value("eps_pos", cfg.eps_pos);
  cfg.eps_neg = j.value("eps_neg", cfg.eps_neg);
  cfg.grade_max = j.value("grade_max", cfg.grade_max);
  const auto display = j.value("display", std::string("randomized"));
  if (display == "fixed") {
    cfg.display = PbmConfig::Display::kFixed;
  } else if (display != "randomized") {
    throw ValidationError("unknown display policy '" + display + "'");
  }
  cfg.validate();
  return cfg;
}

}  // namespace fairrank
