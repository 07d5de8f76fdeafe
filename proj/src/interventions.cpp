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

#include "fairrank/interventions.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>

#include "fairrank/dataio.hpp"

namespace fairrank {

namespace {

constexpr double kSlack = 1e-9;

struct Pools {
  std::vector<std::vector<ScoredItem>> by_group;
  std::vector<std::size_t> next;

  Pools(std::span<const ScoredItem> items, std::size_t groups) : by_group(groups), next(groups, 0) {
    for (const auto& it : items) {
      if (it.group < 0 || static_cast<std::size_t>(it.group) >= groups)
        throw ValidationError("item group " + std::to_string(it.group) + " has no target share");
      by_group[static_cast<std::size_t>(it.group)].push_back(it);
    }
    for (auto& pool : by_group)
      std::stable_sort(pool.begin(), pool.end(),
                       [](const ScoredItem& a, const ScoredItem& b) { return a.score > b.score; });
  }

  bool has(std::size_t g) const { return next[g] < by_group[g].size(); }
  double peek(std::size_t g) const { return by_group[g][next[g]].score; }
  ScoredItem take(std::size_t g) { return by_group[g][next[g]++]; }
  bool any() const {
    for (std::size_t g = 0; g < by_group.size(); ++g)
      if (has(g)) return true;
    return false;
  }
};

// Lower key wins; ties go to the better next candidate, then the lower label.
std::size_t pick(const std::vector<std::size_t>& eligible, const Pools& pools,
                 const std::function<double(std::size_t)>& key) {
  std::size_t best = eligible.front();
  for (const auto g : eligible) {
    const double kg = key(g), kb = key(best);
    if (kg < kb - kSlack || (std::abs(kg - kb) <= kSlack && pools.peek(g) > pools.peek(best))) best = g;
  }
  return best;
}

[[noreturn]] void exhausted(int position, std::size_t group) {
  throw InfeasibleError("position " + std::to_string(position) + ": group " +
                        std::to_string(group) + " has no candidates left for its minimum");
}

// One DetCons placement at 1-based position j.
std::size_t detcons_choice(int j, const std::vector<int>& counts, const TargetDistribution& target,
                           const Pools& pools, SelectionRule rule) {
  const std::size_t groups = target.p.size();
  std::vector<std::size_t> short_groups;
  for (std::size_t g = 0; g < groups; ++g)
    if (counts[g] < prefix_floor(j, target.p[g])) short_groups.push_back(g);
  const auto share_key = [&](std::size_t g) {
    return target.p[g] > 0.0 ? counts[g] / target.p[g] : std::numeric_limits<double>::infinity();
  };
  const auto score_key = [&](std::size_t g) { return -pools.peek(g); };
  if (!short_groups.empty()) {
    for (const auto g : short_groups)
      if (!pools.has(g)) exhausted(j, g);
    return pick(short_groups, pools, rule == SelectionRule::kGeyik
                                         ? std::function<double(std::size_t)>(score_key)
                                         : std::function<double(std::size_t)>(share_key));
  }
  std::vector<std::size_t> open;
  for (std::size_t g = 0; g < groups; ++g)
    if (pools.has(g) && counts[g] < prefix_ceil(j, target.p[g])) open.push_back(g);
  if (open.empty()) {
    for (std::size_t g = 0; g < groups; ++g)
      if (pools.has(g)) open.push_back(g);
    return pick(open, pools, score_key);
  }
  if (rule == SelectionRule::kGeyik) {
    return pick(open, pools, [&](std::size_t g) {
      return target.p[g] > 0.0 ? prefix_ceil(j, target.p[g]) / target.p[g]
                               : std::numeric_limits<double>::infinity();
    });
  }
  return pick(open, pools, share_key);
}

std::size_t output_size(std::span<const ScoredItem> items, int k) {
  if (k < 0) throw ValidationError("k must be non-negative");
  return std::min(items.size(), static_cast<std::size_t>(k));
}

std::vector<std::size_t> by_next_score(std::vector<std::size_t> groups, const Pools& pools) {
  std::stable_sort(groups.begin(), groups.end(), [&](std::size_t a, std::size_t b) {
    const bool ha = pools.has(a), hb = pools.has(b);
    if (ha != hb) return ha;
    return ha && pools.peek(a) > pools.peek(b);
  });
  return groups;
}

}  // namespace

void TargetDistribution::validate() const {
  if (p.empty()) throw ValidationError("target distribution is empty");
  double total = 0.0;
  for (const double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("target shares must be finite and >= 0");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("target shares must sum to 1");
}

TargetDistribution target_from_relevance(std::span<const double> group_relevance) {
  double total = 0.0;
  for (const double r : group_relevance) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw ValidationError("group relevance must be finite and >= 0");
    total += r;
  }
  if (!(total > 0.0)) throw ValidationError("group relevance is zero for every group");
  TargetDistribution t;
  for (const double r : group_relevance) t.p.push_back(r / total);
  return t;
}

TargetDistribution target_from_relevance(GroupPair rel) {
  const double values[] = {rel.g0, rel.g1};
  return target_from_relevance(values);
}

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kNone: return "none";
    case Algorithm::kDetCons: return "detcons";
    case Algorithm::kDetConstSort: return "detconstsort";
  }
  return "none";
}

Algorithm algorithm_from_string(std::string_view name) {
  if (name == "none") return Algorithm::kNone;
  if (name == "detcons") return Algorithm::kDetCons;
  if (name == "detconstsort") return Algorithm::kDetConstSort;
  throw ValidationError("unknown intervention '" + std::string(name) + "'");
}

int prefix_floor(int j, double p) { return static_cast<int>(std::floor(j * p + kSlack)); }
int prefix_ceil(int j, double p) { return static_cast<int>(std::ceil(j * p - kSlack)); }

std::vector<ScoredItem> detcons(std::span<const ScoredItem> items, const TargetDistribution& target,
                                int k, SelectionRule rule) {
  target.validate();
  const std::size_t want = output_size(items, k);
  Pools pools(items, target.p.size());
  std::vector<int> counts(target.p.size(), 0);
  std::vector<ScoredItem> out;
  out.reserve(want);
  while (out.size() < want) {
    const int j = static_cast<int>(out.size()) + 1;
    const std::size_t g = detcons_choice(j, counts, target, pools, rule);
    out.push_back(pools.take(g));
    ++counts[g];
  }
  return out;
}

std::vector<ScoredItem> detconstsort(std::span<const ScoredItem> items,
                                     const TargetDistribution& target, int k, SelectionRule rule) {
  target.validate();
  const std::size_t want = output_size(items, k);
  const std::size_t groups = target.p.size();
  Pools pools(items, groups);
  std::vector<int> counts(groups, 0);
  std::vector<ScoredItem> out;
  out.reserve(want);

  if (rule == SelectionRule::kGeyik) {
    // Each placed item remembers the virtual prefix that required it and may
    // only be pushed down as far as that position.
    std::vector<int> max_index;
    std::vector<int> floors(groups, 0);
    // The virtual prefix stops at k; the last slots, which floors alone may
    // leave open, are filled by the DetCons choice.
    for (int kv = 1; out.size() < want && kv <= static_cast<int>(want); ++kv) {
      std::vector<std::size_t> changed;
      for (std::size_t g = 0; g < groups; ++g)
        if (prefix_floor(kv, target.p[g]) > floors[g]) changed.push_back(g);
      for (const auto g : by_next_score(changed, pools)) {
        if (out.size() == want) break;
        if (!pools.has(g)) exhausted(static_cast<int>(out.size()) + 1, g);
        out.push_back(pools.take(g));
        max_index.push_back(kv);
        ++counts[g];
        for (std::size_t s = out.size() - 1;
             s > 0 && max_index[s - 1] >= static_cast<int>(s) + 1 && out[s - 1].score < out[s].score; --s) {
          std::swap(out[s - 1], out[s]);
          std::swap(max_index[s - 1], max_index[s]);
        }
      }
      for (std::size_t g = 0; g < groups; ++g) floors[g] = prefix_floor(kv, target.p[g]);
    }
    while (out.size() < want) {
      const int j = static_cast<int>(out.size()) + 1;
      const std::size_t g = detcons_choice(j, counts, target, pools, rule);
      out.push_back(pools.take(g));
      ++counts[g];
    }
    return out;
  }

  const auto count_in_prefix = [&](std::size_t len, int g) {
    int c = 0;
    for (std::size_t i = 0; i < len; ++i) c += out[i].group == g;
    return c;
  };
  for (int j = 1; j <= static_cast<int>(want) && out.size() < want; ++j) {
    std::vector<std::size_t> changed;
    for (std::size_t g = 0; g < groups; ++g)
      if (counts[g] < prefix_floor(j, target.p[g])) changed.push_back(g);
    for (const auto g : by_next_score(changed, pools)) {
      if (out.size() == want) break;
      if (!pools.has(g)) exhausted(j, g);
      out.push_back(pools.take(g));
      ++counts[g];
      // Move the new item up while it outscores its predecessor and the
      // predecessor's group keeps its floor on the shortened prefix.
      for (std::size_t s = out.size() - 1; s > 0 && out[s].score > out[s - 1].score; --s) {
        const int displaced = out[s - 1].group;
        if (displaced != out[s].group &&
            count_in_prefix(s, displaced) - 1 <
                prefix_floor(static_cast<int>(s), target.p[static_cast<std::size_t>(displaced)]))
          break;
        std::swap(out[s - 1], out[s]);
      }
    }
  }
  while (out.size() < want) {
    const int j = static_cast<int>(out.size()) + 1;
    const std::size_t g = detcons_choice(j, counts, target, pools, rule);
    out.push_back(pools.take(g));
    ++counts[g];
  }
  return out;
}

std::vector<ScoredItem> rerank(Algorithm algorithm, std::span<const ScoredItem> items,
                               const TargetDistribution& target, int k, SelectionRule rule) {
  switch (algorithm) {
    case Algorithm::kDetCons: return detcons(items, target, k, rule);
    case Algorithm::kDetConstSort: return detconstsort(items, target, k, rule);
    case Algorithm::kNone: break;
  }
  std::vector<ScoredItem> sorted(items.begin(), items.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ScoredItem& a, const ScoredItem& b) { return a.score > b.score; });
  sorted.resize(output_size(items, k));
  return sorted;
}

InterventionResult evaluate_intervention(const Vector& scores, const Vector& relevance,
                                         std::span<const int> grades, std::span<const int> groups,
                                         Algorithm algorithm, int k, ScoreSource relevance_source,
                                         SelectionRule rule, bool normalize) {
  const auto n = static_cast<std::size_t>(scores.size());
  if (static_cast<std::size_t>(relevance.size()) != n || grades.size() != n || groups.size() != n)
    throw ValidationError("scores, relevance, grades and groups differ in length");
  InterventionResult res;
  res.algorithm = algorithm;
  res.k = k;
  res.target = target_from_relevance(group_relevance(relevance, groups, normalize));

  const Ranking before = rank_by_scores(scores);
  std::vector<ScoredItem> items;
  items.reserve(n);
  for (const Index row : before.order)
    items.push_back({row, groups[static_cast<std::size_t>(row)], scores[row]});
  res.top = rerank(algorithm, items, res.target, k, rule);

  res.ranking.source = ScoreSource::kPredicted;
  std::vector<bool> placed(n, false);
  for (const auto& it : res.top) {
    res.ranking.order.push_back(it.row);
    placed[static_cast<std::size_t>(it.row)] = true;
  }
  for (const Index row : before.order)
    if (!placed[static_cast<std::size_t>(row)]) res.ranking.order.push_back(row);

  res.pre = fairness_report(before, relevance, grades, groups, k, relevance_source, normalize);
  res.post = fairness_report(res.ranking, relevance, grades, groups, k, relevance_source, normalize);
  return res;
}

void write_reranked_csv(std::ostream& out, std::span<const ScoredItem> top,
                        std::span<const std::int64_t> item_ids) {
  out << "position,item_id,group,score\n";
  for (std::size_t i = 0; i < top.size(); ++i) {
    const auto row = static_cast<std::size_t>(top[i].row);
    if (row >= item_ids.size()) throw ValidationError("re-ranked row has no item id");
    out << i + 1 << ',' << item_ids[row] << ',' << top[i].group << ',' << format_real(top[i].score)
        << '\n';
  }
}

}  // namespace fairrank
