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

#ifndef FAIRRANK_CLICKMODEL_HPP_
#define FAIRRANK_CLICKMODEL_HPP_

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairrank/dataio.hpp"
#include "fairrank/types.hpp"

namespace fairrank {

/// Position-based browsing model. Examination depends only on rank, clicking
/// on an examined item depends only on its grade.
struct PbmConfig {
  /// How a session orders the pool before the user browses it. kRandomized
  /// shuffles every session; kFixed always shows the pool in its stored
  /// order, the single initial list a logging ranker would produce.
  enum class Display { kRandomized, kFixed };

  double eta = 1.0;  // position-bias severity
  int cutoff = 10;   // nothing below this rank is examined
  double eps_pos = 1.0;
  double eps_neg = 0.1;
  int grade_max = 4;
  Display display = Display::kRandomized;

  void validate() const;
};

/// One simulated impression. `rows` index the pool the session was drawn
/// from; `displayed` holds the matching item ids.
struct ClickSession {
  std::vector<std::int64_t> displayed;
  std::vector<Index> rows;
  std::vector<std::uint8_t> clicks;
  std::vector<double> propensities;

  std::size_t click_count() const;
};

/// (1/rank)^eta for rank <= cutoff, 0 below the cutoff.
double examination_propensity(int rank, const PbmConfig& cfg);

/// eps_neg + (eps_pos - eps_neg) (2^grade - 1) / (2^grade_max - 1).
double click_probability(int grade, const PbmConfig& cfg);

/// Shows a uniformly random ordering of the pool (result randomisation) and
/// samples examination then click per position. `list_size` truncates the
/// displayed list; 0 shows the whole pool.
ClickSession simulate_session(const Dataset& pool, const PbmConfig& cfg,
                              Rng& rng, std::size_t list_size = 0);

/// CSV `session_id,position,item_id,clicked,propensity`, positions 1-based.
void write_click_log_header(std::ostream& out);
void write_click_log(std::ostream& out, std::size_t session_id,
                     const ClickSession& session);

nlohmann::ordered_json to_json(const PbmConfig& cfg);
PbmConfig pbm_config_from_json(const nlohmann::json& j);

}  // namespace fairrank

#endif  // FAIRRANK_CLICKMODEL_HPP_
