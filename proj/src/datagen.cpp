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

#include "fairrank/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fairrank {

Distribution Distribution::pareto(double shape, double scale) {
  Distribution d;
  d.kind = Kind::kPareto;
  d.shape = shape;
  d.scale = scale;
  return d;
}

Distribution Distribution::normal(double mean, double stddev) {
  Distribution d;
  d.kind = Kind::kNormal;
  d.mean = mean;
  d.stddev = stddev;
  return d;
}

double Distribution::expected_value() const {
  if (kind == Kind::kNormal) return mean;
  if (shape <= 1.0) return std::numeric_limits<double>::infinity();
  return shape * scale / (shape - 1.0);
}

double Distribution::sample(Rng& rng) const {
  if (kind == Kind::kNormal) {
    std::normal_distribution<double> draw(mean, stddev);
    return draw(rng);
  }
  // Inverse CDF on (0, 1]: F^-1(u) = scale * (1 - u)^(-1/shape).
  const double u = std::generate_canonical<double, 53>(rng);
  return scale * std::pow(1.0 - u, -1.0 / shape);
}

void Distribution::validate() const {
  if (kind == Kind::kPareto && (!(shape > 0.0) || !(scale > 0.0)))
    throw ValidationError("pareto distribution needs shape > 0 and scale > 0");
  if (kind == Kind::kNormal && !(stddev > 0.0))
    throw ValidationError("normal distribution needs sigma > 0");
}

std::string Distribution::name() const {
  return kind == Kind::kPareto ? "pareto" : "normal";
}

BinScale DagConfig::resolved_bin_scale() const {
  if (bin_scale != BinScale::kAuto) return bin_scale;
  return dist.kind == Distribution::Kind::kPareto ? BinScale::kLog : BinScale::kLinear;
}

void DagConfig::validate() const {
  dist.validate();
  if (n == 0) throw ValidationError("synthetic dataset size must be positive");
  if (!(p_group > 0.0 && p_group < 1.0))
    throw ValidationError("p_group must lie in (0, 1)");
  if (std::abs(w_xg + w_xu - 1.0) > 1e-12 || std::abs(w_yg + w_yx - 1.0) > 1e-12)
    throw ValidationError("mixing weights of each node must sum to 1");
  if (n_grades < 2) throw ValidationError("need at least two relevance grades");
  if (resolved_bin_scale() == BinScale::kLog && dist.kind != Distribution::Kind::kPareto)
    throw ValidationError("log-scale binning needs a positive (pareto) utility");
}

SyntheticData sample_synthetic(const DagConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  auto rng = make_rng(seed, 0xda6u);
  std::bernoulli_distribution group_draw(cfg.p_group);

  SyntheticData out;
  out.utility.resize(static_cast<Index>(cfg.n));
  std::vector<int> groups(cfg.n);
  Matrix features(static_cast<Index>(cfg.n), 2);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const int g = group_draw(rng) ? 1 : 0;
    const double u = cfg.dist.sample(rng);
    const double x = cfg.w_xg * g + cfg.w_xu * u;
    const double y = cfg.w_yg * g + cfg.w_yx * x;
    groups[i] = g;
    out.utility[static_cast<Index>(i)] = u;
    features.row(static_cast<Index>(i)) << x, y;
  }

  const auto grades = discretize(
      std::span<const double>(out.utility.data(), cfg.n), cfg.n_grades,
      cfg.resolved_bin_scale());
  auto& ds = out.dataset;
  ds.dim = 2;
  ds.grade_max = cfg.n_grades - 1;
  ds.items.reserve(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    Item item;
    item.id = static_cast<std::int64_t>(i);
    item.features = features.row(static_cast<Index>(i)).transpose();
    item.grade = grades[i];
    item.group = groups[i];
    ds.items.push_back(std::move(item));
  }
  return out;
}

std::vector<int> discretize(std::span<const double> values, int n_grades,
                            BinScale scale) {
  if (scale == BinScale::kLog) {
    std::vector<double> logs(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] > 0.0))
        throw ValidationError("log-scale binning needs positive values");
      logs[i] = std::log(values[i]);
    }
    return discretize(logs, n_grades, BinScale::kLinear);
  }
  std::vector<int> out(values.size(), 0);
  if (values.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double bin = std::floor(n_grades * (values[i] - lo) / range);
    out[i] = static_cast<int>(std::clamp(bin, 0.0, static_cast<double>(n_grades - 1)));
  }
  return out;
}

Dataset subsample_imbalanced(const Dataset& ds, double majority_fraction,
                             std::size_t n_out, std::uint64_t seed) {
  if (!(majority_fraction >= 0.0 && majority_fraction <= 1.0))
    throw ValidationError("majority fraction must lie in [0, 1]");
  std::vector<std::size_t> pools[2];
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const int g = ds.items[i].group;
    if (g != 0 && g != 1) throw ValidationError("groups must be binary");
    pools[g].push_back(i);
  }
  const auto n0 = static_cast<std::size_t>(std::llround(static_cast<double>(n_out) * majority_fraction));
  const std::size_t want[2] = {n0, n_out - n0};
  for (int g = 0; g < 2; ++g)
    if (pools[g].size() < want[g])
      throw ValidationError("group " + std::to_string(g) + " has " +
                            std::to_string(pools[g].size()) + " items, " +
                            std::to_string(want[g]) + " requested");

  auto rng = make_rng(seed, 0x1b4u);
  std::vector<std::size_t> rows;
  rows.reserve(n_out);
  for (int g = 0; g < 2; ++g) {
    auto& pool = pools[g];
    // Partial Fisher-Yates: the first want[g] slots become a uniform sample.
    for (std::size_t i = 0; i < want[g]; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
      rows.push_back(pool[i]);
    }
  }
  std::sort(rows.begin(), rows.end());

  Dataset out;
  out.dim = ds.dim;
  out.grade_max = ds.grade_max;
  out.split = ds.split;
  out.items.reserve(rows.size());
  for (const auto r : rows) out.items.push_back(ds.items[r]);
  return out;
}

nlohmann::ordered_json to_json(const Distribution& d) {
  nlohmann::ordered_json j;
  j["kind"] = d.name();
  if (d.kind == Distribution::Kind::kPareto) {
    j["shape"] = d.shape;
    j["scale"] = d.scale;
  } else {
    j["mean"] = d.mean;
    j["stddev"] = d.stddev;
  }
  return j;
}

nlohmann::ordered_json to_json(const DagConfig& cfg) {
  nlohmann::ordered_json j;
  j["distribution"] = to_json(cfg.dist);
  j["n"] = cfg.n;
  j["p_group"] = cfg.p_group;
  j["w_xg"] = cfg.w_xg;
  j["w_xu"] = cfg.w_xu;
  j["w_yg"] = cfg.w_yg;
  j["w_yx"] = cfg.w_yx;
  j["n_grades"] = cfg.n_grades;
  j["bin_scale"] = cfg.bin_scale == BinScale::kLog      ? "log"
                   : cfg.bin_scale == BinScale::kLinear ? "linear"
                                                        : "auto";
  return j;
}

Distribution distribution_from_json(const nlohmann::json& j) {
  const auto kind = j.value("kind", std::string("normal"));
  if (kind == "pareto")
    return Distribution::pareto(j.value("shape", 2.0), j.value("scale", 1.0));
  if (kind == "normal")
    return Distribution::normal(j.value("mean", 2.0), j.value("stddev", 1.0));
  throw ValidationError("unknown distribution '" + kind + "'");
}

DagConfig dag_config_from_json(const nlohmann::json& j) {
  DagConfig cfg;
  if (j.contains("distribution")) cfg.dist = distribution_from_json(j["distribution"]);
  cfg.n = j.value("n", cfg.n);
  cfg.p_group = j.value("p_group", cfg.p_group);
  cfg.w_xg = j.value("w_xg", cfg.w_xg);
  cfg.w_xu = j.value("w_xu", cfg.w_xu);
  cfg.w_yg = j.value("w_yg", cfg.w_yg);
  cfg.w_yx = j.value("w_yx", cfg.w_yx);
  cfg.n_grades = j.value("n_grades", cfg.n_grades);
  const auto scale = j.value("bin_scale", std::string("auto"));
  if (scale == "log") {
    cfg.bin_scale = BinScale::kLog;
  } else if (scale == "linear") {
    cfg.bin_scale = BinScale::kLinear;
  } else if (scale != "auto") {
    throw ValidationError("unknown bin scale '" + scale + "'");
  }
  cfg.validate();
  return cfg;
}

}  // namespace fairrank
