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

#include "fairrank/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <unordered_set>
#include <utility>

namespace fairrank {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
std::optional<T> parse_number(std::string_view token) {
  T value{};
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    std::size_t end = pos;
    while (end < s.size() && s[end] != ' ' && s[end] != '\t') ++end;
    if (end > pos) out.push_back(s.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

struct ParsedLine {
  int grade = 0;
  std::string qid;
  std::vector<std::pair<Index, double>> features;
  std::optional<int> group;
  std::optional<std::int64_t> id;
};

ParsedLine parse_line(std::string_view line, std::size_t lineno) {
  ParsedLine out;
  std::string_view body = line;
  std::string_view comment;
  if (const auto hash = line.find('#'); hash != std::string_view::npos) {
    body = line.substr(0, hash);
    comment = line.substr(hash + 1);
  }
  const auto tokens = split_ws(trim(body));
  if (tokens.empty()) throw ParseError(lineno, "missing grade");

  // Grades are integers, but "2.0" style labels are accepted when integral.
  if (auto g = parse_number<int>(tokens[0])) {
    out.grade = *g;
  } else if (auto gd = parse_number<double>(tokens[0]);
             gd && std::isfinite(*gd) && std::floor(*gd) == *gd) {
    out.grade = static_cast<int>(*gd);
  } else {
    throw ParseError(lineno, "malformed grade '" + std::string(tokens[0]) + "'");
  }

  Index last_index = 0;
  for (std::size_t t = 1; t < tokens.size(); ++t) {
    const auto tok = tokens[t];
    const auto colon = tok.find(':');
    if (colon == std::string_view::npos)
      throw ParseError(lineno, "malformed token '" + std::string(tok) + "'");
    const auto key = tok.substr(0, colon);
    const auto val = tok.substr(colon + 1);
    if (key == "qid") {
      out.qid = std::string(val);
      continue;
    }
    const auto idx = parse_number<long long>(key);
    const auto v = parse_number<double>(val);
    if (!idx || *idx < 1 || !v || !std::isfinite(*v))
      throw ParseError(lineno, "malformed feature '" + std::string(tok) + "'");
    if (*idx <= last_index)
      throw ParseError(lineno, "feature indices must be strictly ascending");
    last_index = static_cast<Index>(*idx);
    out.features.emplace_back(last_index, *v);
  }

  for (const auto tag : split_ws(trim(comment))) {
    const auto eq = tag.find('=');
    if (eq == std::string_view::npos) continue;
    const auto key = tag.substr(0, eq);
    const auto val = tag.substr(eq + 1);
    if (key == "group") {
      const auto g = parse_number<int>(val);
      if (!g) throw ParseError(lineno, "malformed group '" + std::string(val) + "'");
      out.group = *g;
    } else if (key == "id") {
      const auto id = parse_number<std::int64_t>(val);
      if (!id) throw ParseError(lineno, "malformed id '" + std::string(val) + "'");
      out.id = *id;
    }
  }
  return out;
}

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& rows,
               SplitLabel label) {
  Dataset out;
  out.dim = ds.dim;
  out.grade_max = ds.grade_max;
  out.split = label;
  out.items.reserve(rows.size());
  for (const auto r : rows) out.items.push_back(ds.items[r]);
  return out;
}

}  // namespace

std::string_view to_string(SplitLabel label) {
  switch (label) {
    case SplitLabel::kTrain: return "train";
    case SplitLabel::kValidation: return "validation";
    case SplitLabel::kTest: return "test";
    case SplitLabel::kAll: return "all";
  }
  return "all";
}

Matrix Dataset::feature_matrix() const {
  Matrix out(static_cast<Index>(items.size()), dim);
  for (std::size_t i = 0; i < items.size(); ++i)
    out.row(static_cast<Index>(i)) = items[i].features.transpose();
  return out;
}

std::vector<int> Dataset::grades() const {
  std::vector<int> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(it.grade);
  return out;
}

std::vector<int> Dataset::groups() const {
  std::vector<int> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(it.group);
  return out;
}

std::vector<std::int64_t> Dataset::ids() const {
  std::vector<std::int64_t> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(it.id);
  return out;
}

void Dataset::validate() const {
  std::unordered_set<std::int64_t> seen;
  seen.reserve(items.size());
  for (const auto& it : items) {
    if (it.features.size() != dim)
      throw ValidationError("item " + std::to_string(it.id) + " has " +
                            std::to_string(it.features.size()) +
                            " features, dataset declares " + std::to_string(dim));
    if (it.grade < 0 || it.grade > grade_max)
      throw ValidationError("item " + std::to_string(it.id) + " grade " +
                            std::to_string(it.grade) + " outside [0, " +
                            std::to_string(grade_max) + "]");
    if (it.group != 0 && it.group != 1)
      throw ValidationError("item " + std::to_string(it.id) + " group " +
                            std::to_string(it.group) + " is not binary");
    if (it.id < 0 || !seen.insert(it.id).second)
      throw ValidationError("duplicate or negative item id " + std::to_string(it.id));
  }
}

Dataset parse_libsvm(std::istream& in, int grade_max) {
  std::vector<ParsedLine> lines;
  std::string line;
  std::size_t lineno = 0;
  std::optional<std::string> qid;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto parsed = parse_line(t, lineno);
    if (parsed.grade < 0 || parsed.grade > grade_max)
      throw ValidationError("line " + std::to_string(lineno) + ": grade " +
                            std::to_string(parsed.grade) + " outside [0, " +
                            std::to_string(grade_max) + "]");
    if (!parsed.group)
      throw ValidationError("line " + std::to_string(lineno) +
                            ": missing '# group=<g>' label");
    if (!qid) {
      qid = parsed.qid;
    } else if (parsed.qid != *qid) {
      throw ValidationError("line " + std::to_string(lineno) +
                            ": multi-query files are not supported (qid " +
                            parsed.qid + " after " + *qid + ")");
    }
    lines.push_back(std::move(parsed));
  }

  Dataset ds;
  ds.grade_max = grade_max;
  for (const auto& p : lines)
    if (!p.features.empty()) ds.dim = std::max(ds.dim, p.features.back().first);

  ds.items.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& p = lines[i];
    Item item;
    item.id = p.id.value_or(static_cast<std::int64_t>(i));
    item.grade = p.grade;
    item.group = *p.group;
    item.features = Vector::Zero(ds.dim);
    for (const auto& [idx, v] : p.features) item.features[idx - 1] = v;
    ds.items.push_back(std::move(item));
  }
  ds.validate();
  return ds;
}

Dataset parse_libsvm(std::string_view text, int grade_max) {
  std::istringstream in{std::string(text)};
  return parse_libsvm(in, grade_max);
}

std::string format_real(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

void write_libsvm(std::ostream& out, const Dataset& ds) {
  for (const auto& it : ds.items) {
    out << it.grade << " qid:1";
    for (Index j = 0; j < it.features.size(); ++j)
      out << ' ' << (j + 1) << ':' << format_real(it.features[j]);
    out << " # group=" << it.group << " id=" << it.id << '\n';
  }
}

std::string to_libsvm(const Dataset& ds) {
  std::ostringstream out;
  write_libsvm(out, ds);
  return out.str();
}

DatasetSplit split(const Dataset& ds, SplitFractions fractions,
                   std::uint64_t seed) {
  if (ds.empty()) throw ValidationError("cannot split an empty dataset");
  const double total = fractions.train + fractions.validation + fractions.test;
  if (std::abs(total - 1.0) > 1e-9 || fractions.train < 0 ||
      fractions.validation < 0 || fractions.test < 0)
    throw ValidationError("split fractions must be non-negative and sum to 1");

  const std::size_t n = ds.size();
  // The epsilon absorbs representation error such as 10 * 0.1.
  const auto take = [n](double f) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * f + 1e-9));
  };
  const std::size_t n_val = take(fractions.validation);
  const std::size_t n_test = take(fractions.test);
  const std::size_t n_train = n - n_val - n_test;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto rng = make_rng(seed, 0x5b1u);
  std::shuffle(order.begin(), order.end(), rng);

  const auto first = order.begin();
  std::vector<std::size_t> train(first, first + n_train);
  std::vector<std::size_t> val(first + n_train, first + n_train + n_val);
  std::vector<std::size_t> test(first + n_train + n_val, order.end());
  // Keep the on-disk order stable: items appear in their original order.
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
  std::sort(test.begin(), test.end());
  return {subset(ds, train, SplitLabel::kTrain),
          subset(ds, val, SplitLabel::kValidation),
          subset(ds, test, SplitLabel::kTest)};
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ValidationError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

RobustScaler robust_scale_fit(const Dataset& train) {
  if (train.empty()) throw ValidationError("cannot fit a scaler on an empty dataset");
  RobustScaler scaler;
  scaler.center.resize(train.dim);
  scaler.scale.resize(train.dim);
  std::vector<double> column(train.size());
  for (Index j = 0; j < train.dim; ++j) {
    for (std::size_t i = 0; i < train.size(); ++i)
      column[i] = train.items[i].features[j];
    const double q25 = quantile(column, 0.25);
    const double q75 = quantile(column, 0.75);
    scaler.center[j] = quantile(column, 0.5);
    const double iqr = q75 - q25;
    scaler.scale[j] = iqr > 0.0 ? iqr : 1.0;
  }
  return scaler;
}

Dataset robust_scale_apply(const RobustScaler& scaler, const Dataset& ds) {
  if (scaler.center.size() != ds.dim)
    throw ValidationError("scaler fitted on " + std::to_string(scaler.center.size()) +
                          " features, dataset has " + std::to_string(ds.dim));
  Dataset out = ds;
  for (auto& it : out.items)
    it.features = (it.features - scaler.center).cwiseQuotient(scaler.scale);
  return out;
}

}  // namespace fairrank
