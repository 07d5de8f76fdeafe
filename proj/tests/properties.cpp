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

#include "properties.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairrank/clickmodel.hpp"
#include "fairrank/desiderata.hpp"
#include "fairrank/ranker.hpp"
#include "fairrank/stats.hpp"
#include "oracles.hpp"

namespace fairrank::property {

namespace {

double relative_error(const Vector& analytic, const Vector& numeric) {
  const double scale = std::max({analytic.norm(), numeric.norm(), 1e-12});
  return (analytic - numeric).norm() / scale;
}

std::vector<double> draw_values(Rng& rng, std::size_t n, bool ties) {
  std::vector<double> v(n);
  if (ties) {
    std::uniform_int_distribution<int> d(0, 3);
    for (auto& x : v) x = d(rng);
  } else {
    std::normal_distribution<double> d;
    for (auto& x : v) x = d(rng);
  }
  return v;
}

}  // namespace

double max_gradient_relative_error(int trials, std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution coin(0.5);
  constexpr int kItems = 5;
  constexpr double kStep = 1e-6;
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Matrix x(kItems, 2);
    for (Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
    std::vector<std::uint8_t> clicks(kItems);
    std::vector<double> prop(kItems);
    for (int r = 0; r < kItems; ++r) {
      clicks[r] = coin(rng);
      prop[r] = 1.0 / (r + 1);
    }
    clicks[0] = 1;

    // With respect to the logits.
    std::vector<double> logits(kItems);
    for (auto& l : logits) l = normal(rng);
    const auto g = ips_listwise_loss_grad(logits, clicks, prop, kItems);
    Vector numeric(kItems);
    for (int i = 0; i < kItems; ++i) {
      auto up = logits, down = logits;
      up[i] += kStep;
      down[i] -= kStep;
      numeric[i] = (ips_listwise_loss(up, clicks, prop, kItems) -
                    ips_listwise_loss(down, clicks, prop, kItems)) / (2 * kStep);
    }
    worst = std::max(worst, relative_error(g.grad, numeric));

    // With respect to the network parameters, through backpropagation.
    Rng init = make_rng(seed, static_cast<std::uint64_t>(t) + 1);
    Scorer net(2, {8, 4}, init);
    const auto loss_at = [&](const Scorer& m) {
      const Vector s = m.forward(x);
      return ips_listwise_loss(std::span<const double>(s.data(), kItems), clicks, prop, kItems);
    };
    Scorer::Trace trace;
    const Vector s = net.forward(x, trace);
    const auto lg = ips_listwise_loss_grad(std::span<const double>(s.data(), kItems), clicks, prop, kItems);
    Scorer grads = net;
    const auto layers = net.backward(trace, lg.grad);
    grads.unflatten(Vector::Zero(net.parameter_count()));
    grads.apply_gradient(layers, -1.0);
    const Vector analytic = grads.flatten();
    const Vector theta = net.flatten();
    Vector fd(theta.size());
    for (Index p = 0; p < theta.size(); ++p) {
      Vector up = theta, down = theta;
      up[p] += kStep;
      down[p] -= kStep;
      Scorer a = net, b = net;
      a.unflatten(up);
      b.unflatten(down);
      fd[p] = (loss_at(a) - loss_at(b)) / (2 * kStep);
    }
    worst = std::max(worst, relative_error(analytic, fd));
  }
  return worst;
}

bool IpsIdentity::within(double n_sigma) const {
  for (std::size_t g = 0; g < estimate.size(); ++g)
    if (std::abs(estimate[g] - expected[g]) > n_sigma * sigma[g]) return false;
  return true;
}

IpsIdentity ips_identity(int sessions, std::uint64_t seed) {
  const PbmConfig cfg;
  Dataset pool;
  pool.dim = 1;
  for (int i = 0; i < 15; ++i) pool.items.push_back({i, Vector::Zero(1), i % 5, 0});
  auto rng = make_rng(seed);
  const auto grades = static_cast<std::size_t>(cfg.grade_max + 1);
  std::vector<double> sum(grades, 0.0), sum_sq(grades, 0.0), count(grades, 0.0);
  for (int s = 0; s < sessions; ++s) {
    const auto session = simulate_session(pool, cfg, rng);
    for (int r = 0; r < cfg.cutoff; ++r) {
      const auto g = static_cast<std::size_t>(pool.items[static_cast<std::size_t>(session.rows[r])].grade);
      const double w = session.clicks[r] ? 1.0 / examination_propensity(r + 1, cfg) : 0.0;
      sum[g] += w;
      sum_sq[g] += w * w;
      count[g] += 1;
    }
  }
  IpsIdentity out;
  for (std::size_t g = 0; g < grades; ++g) {
    const double m = sum[g] / count[g];
    const double var = sum_sq[g] / count[g] - m * m;
    out.estimate.push_back(m);
    out.expected.push_back(click_probability(static_cast<int>(g), cfg));
    out.sigma.push_back(std::sqrt(var / count[g]));
  }
  return out;
}

double OracleAgreement::max_p() const {
  return std::max({kruskal_wallis, ks, wilcoxon, mann_whitney});
}

OracleAgreement stats_oracle_agreement(int trials, std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::uniform_int_distribution<int> size(2, 4);
  std::uniform_int_distribution<int> paired(5, 10);
  OracleAgreement out;
  for (int t = 0; t < trials; ++t) {
    const bool ties = t % 2 == 1;

    std::vector<std::vector<double>> groups(3);
    std::size_t total = 11;
    while (total > 10) {
      total = 0;
      for (auto& g : groups) {
        g = draw_values(rng, static_cast<std::size_t>(size(rng)), ties);
        total += g.size();
      }
    }
    const double kw = stats::kruskal_wallis(groups).p_value;
    out.kruskal_wallis = std::max(out.kruskal_wallis, std::abs(kw - oracle::kruskal_wallis_permutation_p(groups)));

    const auto a = draw_values(rng, static_cast<std::size_t>(size(rng)) + 1, ties);
    const auto b = draw_values(rng, static_cast<std::size_t>(size(rng)) + 1, ties);
    const double ks = stats::ks_two_sample(a, b).p_value;
    out.ks = std::max(out.ks, std::abs(ks - oracle::ks_exhaustive_p(a, b)));
    const double mw = stats::mann_whitney_u(a, b).p_value;
    out.mann_whitney = std::max(out.mann_whitney, std::abs(mw - oracle::mann_whitney_exact_p(a, b)));

    const auto n = static_cast<std::size_t>(paired(rng));
    const auto x = draw_values(rng, n, false);
    auto y = draw_values(rng, n, false);
    // Shift a random share of pairs so both balanced and lopsided sign patterns occur.
    std::uniform_real_distribution<double> shift(-1.0, 2.0);
    const double delta = shift(rng);
    for (auto& v : y) v += delta;
    const auto w = stats::wilcoxon_signed_rank(x, y);
    if (!w.degenerate)
      out.wilcoxon = std::max(out.wilcoxon, std::abs(w.p_value - oracle::wilcoxon_exact_p(x, y)));

    const auto rho = stats::spearman(x, y);
    if (rho) out.spearman = std::max(out.spearman, std::abs(*rho - oracle::spearman_rank_difference(x, y)));
  }
  return out;
}

FixtureReport intervention_fixtures(int count, std::uint64_t seed, SelectionRule rule) {
  auto rng = make_rng(seed);
  std::uniform_int_distribution<int> n_items(1, 30), k_draw(1, 15), target_kind(0, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  FixtureReport out;
  for (int f = 0; f < count; ++f) {
    const int n = n_items(rng);
    const double share = unit(rng);
    std::vector<ScoredItem> items;
    for (int i = 0; i < n; ++i) items.push_back({i, unit(rng) < share ? 0 : 1, unit(rng)});
    double p0 = unit(rng);
    switch (target_kind(rng)) {
      case 0: p0 = 0.0; break;
      case 1: p0 = 1.0; break;
      case 2: p0 = 0.5; break;
      default: break;
    }
    const TargetDistribution target{{p0, 1.0 - p0}};
    const int k = k_draw(rng);
    for (const auto alg : {Algorithm::kDetCons, Algorithm::kDetConstSort}) {
      ++out.fixtures;
      const bool infeasible = oracle::rerank_infeasible(items, target, k);
      std::string failure;
      try {
        const auto top = rerank(alg, items, target, k, rule);
        if (infeasible)
          failure = "infeasible input accepted";
        else if (const auto v = oracle::rerank_violation(items, target, k, top))
          failure = *v;
      } catch (const InfeasibleError& e) {
        if (infeasible)
          ++out.infeasible;
        else
          failure = std::string("feasible input rejected: ") + e.what();
      }
      if (!failure.empty()) {
        ++out.failures;
        if (out.first_failure.empty())
          out.first_failure = std::string(to_string(alg)) + " fixture " + std::to_string(f) + ": " + failure;
      }
    }
  }
  return out;
}

namespace {

AuditInputs proxy_inputs(std::uint64_t seed, bool shuffled) {
  auto rng = make_rng(seed);
  constexpr std::size_t kItems = 500;
  std::discrete_distribution<int> grade({1, 11, 62, 27, 1});
  std::bernoulli_distribution group(0.5);
  AuditInputs in;
  for (std::size_t i = 0; i < kItems; ++i) {
    in.grades.push_back(grade(rng));
    in.groups.push_back(group(rng));
  }
  for (std::uint64_t s = 0; s < 3; ++s) {
    SeedPredictions p;
    p.seed = s;
    std::vector<double> pred(in.grades.begin(), in.grades.end());
    if (shuffled) std::shuffle(pred.begin(), pred.end(), rng);
    p.test_softmax = Eigen::Map<const Vector>(pred.data(), static_cast<Index>(pred.size()));
    p.test_logits = p.test_softmax;
    p.checkpoint_iterations = {50, 100, 150};
    p.checkpoint_validation_logits.assign(3, p.test_logits.head(100));
    in.seeds.push_back(std::move(p));
  }
  return in;
}

}  // namespace

ProxyReport perfect_proxy(std::uint64_t seed) {
  const auto report = audit_all(proxy_inputs(seed, false));
  ProxyReport out;
  out.credibility = report.credibility.pass;
  out.consistency = report.consistency.pass;
  out.stability = report.stability.pass;
  out.comparability = report.comparability.individual_pass && report.comparability.group_pass;
  out.availability = report.availability.pass;
  return out;
}

int shuffled_credibility_failures(int trials, std::uint64_t seed) {
  int failures = 0;
  for (int t = 0; t < trials; ++t)
    failures += !audit_credibility(proxy_inputs(seed + static_cast<std::uint64_t>(t), true)).pass;
  return failures;
}

}  // namespace fairrank::property
