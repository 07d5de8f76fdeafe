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

#include "fairrank/stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "fairrank/types.hpp"

namespace fairrank::stats {

nlohmann::ordered_json to_json(const TestResult& r) {
  nlohmann::ordered_json j;
  j["method"] = r.method;
  j["statistic"] = r.statistic;
  j["p_value"] = r.p_value;
  j["n"] = r.n;
  j["exact"] = r.exact;
  j["degenerate"] = r.degenerate;
  return j;
}

std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = avg;
    i = j;
  }
  return ranks;
}

namespace {

// Sum over tie blocks of t^3 - t.
double tie_term(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double acc = 0.0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i + 1;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const auto t = static_cast<double>(j - i);
    acc += t * t * t - t;
    i = j;
  }
  return acc;
}

double log_choose(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("spearman inputs differ in length");
  if (x.size() < 2) throw ValidationError("spearman needs at least two pairs");
  const auto rx = midranks(x);
  const auto ry = midranks(y);
  const double mx = mean(rx);
  const double my = mean(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

TestResult kruskal_wallis(const std::vector<std::vector<double>>& samples) {
  if (samples.size() < 2) throw ValidationError("kruskal-wallis needs at least two groups");
  TestResult res;
  res.method = "kruskal_wallis";
  std::vector<double> pooled;
  for (const auto& s : samples) {
    if (s.empty()) throw ValidationError("kruskal-wallis group is empty");
    res.n.push_back(s.size());
    pooled.insert(pooled.end(), s.begin(), s.end());
  }
  const auto total = static_cast<double>(pooled.size());
  if (pooled.size() < 3) throw ValidationError("kruskal-wallis needs at least three observations");

  const auto ranks = midranks(pooled);
  const double correction = 1.0 - tie_term(pooled) / (total * total * total - total);
  if (correction <= 0.0) {  // every value identical
    res.statistic = 0.0;
    res.p_value = 1.0;
    res.degenerate = true;
    return res;
  }

  // H = (12 / (N (N+1)) * sum R_g^2 / n_g - 3 (N+1)) / correction.
  const auto spread = [&](const std::vector<std::size_t>& owner) {
    std::vector<double> rank_sum(samples.size(), 0.0);
    for (std::size_t i = 0; i < ranks.size(); ++i) rank_sum[owner[i]] += ranks[i];
    double s = 0.0;
    for (std::size_t g = 0; g < samples.size(); ++g)
      s += rank_sum[g] * rank_sum[g] / static_cast<double>(samples[g].size());
    return s;
  };
  std::vector<std::size_t> owner;
  for (std::size_t g = 0; g < samples.size(); ++g) owner.insert(owner.end(), samples[g].size(), g);
  const double observed = spread(owner);
  res.statistic = (12.0 / (total * (total + 1.0)) * observed - 3.0 * (total + 1.0)) / correction;
  res.statistic = std::max(res.statistic, 0.0);

  double log_assignments = std::lgamma(total + 1.0);
  for (const auto& s : samples) log_assignments -= std::lgamma(static_cast<double>(s.size()) + 1.0);
  if (log_assignments <= std::log(kExactAssignmentLimit)) {
    // Enumerate every distinct assignment of observations to groups of the
    // observed sizes; sum R_g^2/n_g orders assignments exactly as H does.
    const double tol = 1e-9 * std::max(1.0, std::abs(observed));
    std::size_t hits = 0, count = 0;
    std::vector<std::size_t> assign(pooled.size(), 0);
    std::function<void(std::size_t, std::vector<std::size_t>&)> place =
        [&](std::size_t g, std::vector<std::size_t>& free) {
          if (g + 1 == samples.size()) {
            for (const auto i : free) assign[i] = g;
            ++count;
            if (spread(assign) >= observed - tol) ++hits;
            return;
          }
          const std::size_t k = samples[g].size();
          std::vector<bool> pick(free.size(), false);
          std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(k), true);
          do {
            std::vector<std::size_t> rest;
            rest.reserve(free.size() - k);
            for (std::size_t t = 0; t < free.size(); ++t) {
              if (pick[t]) assign[free[t]] = g;
              else rest.push_back(free[t]);
            }
            place(g + 1, rest);
          } while (std::prev_permutation(pick.begin(), pick.end()));
        };
    std::vector<std::size_t> all(pooled.size());
    std::iota(all.begin(), all.end(), 0);
    place(0, all);
    res.p_value = static_cast<double>(hits) / static_cast<double>(count);
    res.exact = true;
  } else {
    res.p_value = chi_square_sf(res.statistic, static_cast<double>(samples.size() - 1));
  }
  return res;
}

TestResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ValidationError("kolmogorov-smirnov needs non-empty samples");
  TestResult res;
  res.method = "ks_two_sample";
  res.n = {a.size(), b.size()};
  const auto na = static_cast<long long>(a.size());
  const auto nb = static_cast<long long>(b.size());

  // Walk the pooled sample block by block of equal values; the ECDF gap is
  // |i/na - j/nb|, kept in integer units |i*nb - j*na|.
  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(a.size() + b.size());
  for (const double v : a) pooled.emplace_back(v, 0);
  for (const double v : b) pooled.emplace_back(v, 1);
  std::sort(pooled.begin(), pooled.end());
  std::vector<std::size_t> block_sizes;
  long long i = 0, j = 0, gap = 0;
  for (std::size_t s = 0; s < pooled.size();) {
    std::size_t e = s;
    while (e < pooled.size() && pooled[e].first == pooled[s].first) {
      (pooled[e].second == 0 ? i : j) += 1;
      ++e;
    }
    block_sizes.push_back(e - s);
    gap = std::max(gap, std::llabs(i * nb - j * na));
    s = e;
  }
  res.statistic = static_cast<double>(gap) / static_cast<double>(na * nb);

  if (static_cast<std::size_t>(na * nb) <= kExactKsLimit) {
    // Count label assignments (weighted by within-block choices) whose gap
    // stays strictly below the observed one at every block boundary.
    std::vector<double> ways(static_cast<std::size_t>(na + 1), 0.0), next;
    ways[0] = 1.0;
    long long seen = 0;
    for (const auto t_size : block_sizes) {
      const auto t = static_cast<long long>(t_size);
      next.assign(ways.size(), 0.0);
      for (long long ia = 0; ia <= na; ++ia) {
        if (ways[static_cast<std::size_t>(ia)] == 0.0) continue;
        const long long jb = seen - ia;
        for (long long c = 0; c <= t; ++c) {
          const long long ni = ia + c, nj = jb + (t - c);
          if (ni > na || nj > nb) continue;
          if (std::llabs(ni * nb - nj * na) >= gap) continue;
          next[static_cast<std::size_t>(ni)] +=
              ways[static_cast<std::size_t>(ia)] *
              std::exp(log_choose(static_cast<double>(t), static_cast<double>(c)));
        }
      }
      ways.swap(next);
      seen += t;
    }
    const double total = std::exp(log_choose(static_cast<double>(na + nb), static_cast<double>(na)));
    res.p_value = std::clamp(1.0 - ways[static_cast<std::size_t>(na)] / total, 0.0, 1.0);
    res.exact = true;
  } else {
    const double n_eff = static_cast<double>(na) * static_cast<double>(nb) /
                         static_cast<double>(na + nb);
    res.p_value = kolmogorov_sf(std::sqrt(n_eff) * res.statistic);
  }
  return res;
}

TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("wilcoxon inputs must be paired");
  TestResult res;
  res.method = "wilcoxon_signed_rank";
  std::vector<double> magnitude;
  std::vector<int> sign;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = b[i] - a[i];
    if (d == 0.0) continue;
    magnitude.push_back(std::abs(d));
    sign.push_back(d > 0.0 ? 1 : -1);
  }
  const auto n = static_cast<double>(magnitude.size());
  res.n = {magnitude.size()};
  if (magnitude.empty()) {
    res.statistic = 0.0;
    res.p_value = 1.0;
    res.degenerate = true;
    return res;
  }
  const auto ranks = midranks(magnitude);
  double w_plus = 0.0, w_minus = 0.0;
  for (std::size_t i = 0; i < ranks.size(); ++i) (sign[i] > 0 ? w_plus : w_minus) += ranks[i];
  res.statistic = std::min(w_plus, w_minus);
  res.degenerate = magnitude.size() < 5;

  const double mu = n * (n + 1.0) / 4.0;
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term(magnitude) / 48.0;
  if (var <= 0.0) {
    res.p_value = 1.0;
    return res;
  }
  const double z = std::max(std::abs(res.statistic - mu) - 0.5, 0.0) / std::sqrt(var);
  res.p_value = std::min(1.0, 2.0 * normal_sf(z));
  return res;
}

TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ValidationError("mann-whitney needs non-empty samples");
  TestResult res;
  res.method = "mann_whitney_u";
  res.n = {a.size(), b.size()};
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = midranks(pooled);
  const auto n1 = static_cast<double>(a.size());
  const auto n2 = static_cast<double>(b.size());
  const double total = n1 + n2;
  double r1 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r1 += ranks[i];
  res.statistic = r1 - n1 * (n1 + 1.0) / 2.0;
  const double mu = n1 * n2 / 2.0;
  const double var = n1 * n2 / 12.0 *
                     ((total + 1.0) - tie_term(pooled) / (total * (total - 1.0)));
  if (!(var > 0.0)) {
    res.p_value = 1.0;
    res.degenerate = true;
    return res;
  }
  if (log_choose(total, n1) <= std::log(kExactAssignmentLimit)) {
    // Every split of the pooled ranks into samples of the observed sizes.
    const double dev = std::abs(res.statistic - mu);
    std::vector<bool> pick(pooled.size(), false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(a.size()), true);
    std::size_t hits = 0, count = 0;
    do {
      double s = 0.0;
      for (std::size_t i = 0; i < pick.size(); ++i)
        if (pick[i]) s += ranks[i];
      ++count;
      if (std::abs(s - n1 * (n1 + 1.0) / 2.0 - mu) >= dev - 1e-9) ++hits;
    } while (std::prev_permutation(pick.begin(), pick.end()));
    res.p_value = static_cast<double>(hits) / static_cast<double>(count);
    res.exact = true;
    return res;
  }
  if (log_choose(total, n1) <= std::log(kExactAssignmentLimit)) {
    // Every split of the pooled ranks into samples of the observed sizes.
    const double dev = std::abs(res.statistic - mu);
    std::vector<bool> pick(pooled.size(), false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(a.size()), true);
    std::size_t hits = 0, count = 0;
    do {
      double s = 0.0;
      for (std::size_t i = 0; i < pick.size(); ++i)
        if (pick[i]) s += ranks[i];
      ++count;
      if (std::abs(s - n1 * (n1 + 1.0) / 2.0 - mu) >= dev - 1e-9) ++hits;
    } while (std::prev_permutation(pick.begin(), pick.end()));
    res.p_value = static_cast<double>(hits) / static_cast<double>(count);
    res.exact = true;
    return res;
  }
  const double z = std::max(std::abs(res.statistic - mu) - 0.5, 0.0) / std::sqrt(var);
  res.p_value = std::min(1.0, 2.0 * normal_sf(z));
  return res;
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double chi_square_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(df / 2.0, x / 2.0);
}

double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  constexpr double pi = std::numbers::pi;
  if (lambda < 1.18) {
    // Jacobi theta form converges fast for small lambda.
    const double y = std::exp(-pi * pi / (8.0 * lambda * lambda));
    double cdf = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double term = std::pow(y, (2.0 * k - 1.0) * (2.0 * k - 1.0));
      cdf += term;
      if (term < 1e-17) break;
    }
    cdf *= std::sqrt(2.0 * pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sf = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sf += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(sf, 0.0, 1.0);
}

double median(std::vector<double> values) {
  if (values.empty()) throw ValidationError("median of an empty sample");
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (values.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

double mean(std::span<const double> values) {
  if (values.empty()) throw ValidationError("mean of an empty sample");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double stddev(std::span<const double> values) {
  const double m = mean(values);
  double acc = 0.0;
  for (const double v : values) acc += (v - m) * (v - m);
  return std::sqrt(acc / static_cast<double>(values.size()));
}

}  // namespace fairrank::stats
