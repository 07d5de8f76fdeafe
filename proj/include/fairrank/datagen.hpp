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

#ifndef FAIRRANK_DATAGEN_HPP_
#define FAIRRANK_DATAGEN_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairrank/dataio.hpp"
#include "fairrank/types.hpp"

namespace fairrank {

/// Marginal law of the latent utility U.
struct Distribution {
  enum class Kind { kPareto, kNormal };

  Kind kind = Kind::kNormal;
  double shape = 2.0;  // pareto
  double scale = 1.0;  // pareto, support [scale, inf)
  double mean = 2.0;   // normal
  double stddev = 1.0; // normal

  static Distribution pareto(double shape = 2.0, double scale = 1.0);
  static Distribution normal(double mean = 2.0, double stddev = 1.0);

  /// Population mean (infinite for pareto with shape <= 1).
  double expected_value() const;
  double sample(Rng& rng) const;
  void validate() const;
  std::string name() const;
};

/// Domain in which relevance bins are equally wide. kAuto picks kLog for
/// pareto utility and kLinear otherwise.
enum class BinScale { kAuto, kLinear, kLog };

/// Causal graph G -> X <- U, (G, X) -> Y with linear mixing weights.
struct DagConfig {
  Distribution dist = Distribution::normal();
  std::size_t n = 50000;
  double p_group = 0.5;
  double w_xg = 0.2;
  double w_xu = 0.8;
  double w_yg = 0.4;
  double w_yx = 0.6;
  int n_grades = 5;
  BinScale bin_scale = BinScale::kAuto;

  BinScale resolved_bin_scale() const;
  void validate() const;
};

struct SyntheticData {
  Dataset dataset;
  /// Continuous utility before discretisation, aligned with dataset.items.
  Vector utility;
};

SyntheticData sample_synthetic(const DagConfig& cfg, std::uint64_t seed);

/// Equal-width binning over [min, max] of the input, or of its logarithm
/// for BinScale::kLog (values must then be positive).
std::vector<int> discretize(std::span<const double> values, int n_grades = 5,
                            BinScale scale = BinScale::kLinear);

/// Draws round(n_out * majority_fraction) group-0 items and the rest from
/// group 1, without replacement.
Dataset subsample_imbalanced(const Dataset& ds, double majority_fraction,
                             std::size_t n_out, std::uint64_t seed);

nlohmann::ordered_json to_json(const Distribution& d);
nlohmann::ordered_json to_json(const DagConfig& cfg);
Distribution distribution_from_json(const nlohmann::json& j);
DagConfig dag_config_from_json(const nlohmann::json& j);

}  // namespace fairrank

#endif  // FAIRRANK_DATAGEN_HPP_
