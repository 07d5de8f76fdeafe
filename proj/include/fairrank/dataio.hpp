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

#ifndef FAIRRANK_DATAIO_HPP_
#define FAIRRANK_DATAIO_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "fairrank/types.hpp"

namespace fairrank {

/// One ranked subject.
struct Item {
  std::int64_t id = 0;
  Vector features;
  int grade = 0;
  int group = 0;

  friend bool operator==(const Item& a, const Item& b) {
    return a.id == b.id && a.grade == b.grade && a.group == b.group &&
           a.features.size() == b.features.size() && a.features == b.features;
  }
};

enum class SplitLabel { kTrain, kValidation, kTest, kAll };

std::string_view to_string(SplitLabel label);

/// A single-query list of items sharing one feature dimension.
struct Dataset {
  std::vector<Item> items;
  Index dim = 0;
  int grade_max = 4;
  SplitLabel split = SplitLabel::kAll;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }

  /// Row-per-item feature matrix (size() x dim).
  Matrix feature_matrix() const;
  std::vector<int> grades() const;
  std::vector<int> groups() const;
  std::vector<std::int64_t> ids() const;

  /// Throws ValidationError when an invariant is broken.
  void validate() const;

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.dim == b.dim && a.grade_max == b.grade_max &&
           a.split == b.split && a.items == b.items;
  }
};

/// Reads `<grade> qid:<q> <idx>:<val> ... # group=<g> [id=<id>]`, one item
/// per line. Missing feature indices read as 0 and the dimension is the
/// largest index seen. Items without an `id=` tag are numbered by line order.
Dataset parse_libsvm(std::istream& in, int grade_max = 4);
Dataset parse_libsvm(std::string_view text, int grade_max = 4);

/// Canonical writer: every feature in ascending index order, 6 significant
/// digits, group and id in the trailing comment.
void write_libsvm(std::ostream& out, const Dataset& ds);
std::string to_libsvm(const Dataset& ds);

struct SplitFractions {
  double train = 0.7;
  double validation = 0.1;
  double test = 0.2;
};

struct DatasetSplit {
  Dataset train;
  Dataset validation;
  Dataset test;
};

/// Shuffled disjoint partition. Validation and test get floor(n*f) items and
/// the remainder goes to train.
DatasetSplit split(const Dataset& ds, SplitFractions fractions,
                   std::uint64_t seed);

/// Per-feature median / interquartile-range standardisation.
struct RobustScaler {
  Vector center;
  Vector scale;
};

RobustScaler robust_scale_fit(const Dataset& train);
Dataset robust_scale_apply(const RobustScaler& scaler, const Dataset& ds);

/// Quantile with linear interpolation between order statistics (the
/// "inclusive" definition, h = (n-1)q).
double quantile(std::vector<double> values, double q);

/// Formats with 6 significant digits, the precision of every text artifact.
std::string format_real(double value);

}  // namespace fairrank

#endif  // FAIRRANK_DATAIO_HPP_
