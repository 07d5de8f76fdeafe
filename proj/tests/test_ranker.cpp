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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "fairrank/datagen.hpp"
#include "fairrank/metrics.hpp"
#include "fairrank/ranker.hpp"
#include "properties.hpp"

using namespace fairrank;

namespace {

DatasetSplit small_data(std::size_t n, std::uint64_t seed) {
  auto s = split(sample_synthetic(DagConfig{.n = n}, seed).dataset, {}, seed);
  const auto scaler = robust_scale_fit(s.train);
  return {robust_scale_apply(scaler, s.train), robust_scale_apply(scaler, s.validation),
          robust_scale_apply(scaler, s.test)};
}

}  // namespace

TEST_SUITE("ranker") {

TEST_CASE("listwise loss examples") {
  const std::vector<double> equal{0.0, 0.0};
  const std::vector<std::uint8_t> first{1, 0}, none{0, 0};
  CHECK(ips_listwise_loss(equal, none, std::vector<double>{1.0, 0.5}, 10) == 0.0);
  CHECK(ips_listwise_loss(equal, first, std::vector<double>{1.0, 0.5}, 10) == doctest::Approx(0.693147).epsilon(1e-5));
  CHECK(ips_listwise_loss(equal, first, std::vector<double>{0.5, 0.5}, 10) == doctest::Approx(1.386294).epsilon(1e-5));
  CHECK_THROWS(ips_listwise_loss(equal, first, std::vector<double>{0.0, 0.5}, 10));
}

TEST_CASE("loss only sees the first loss_cutoff positions") {
  const std::vector<double> logits{0.0, 0.0, 5.0};
  const std::vector<std::uint8_t> clicks{1, 0, 1};
  const std::vector<double> prop{1.0, 1.0, 1.0};
  CHECK(ips_listwise_loss(logits, clicks, prop, 2) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("analytic gradient matches finite differences") {
  CHECK(property::max_gradient_relative_error(20, 1) <= 1e-4);
}

TEST_CASE("zero weights give zero logits") {
  const auto net = Scorer::zeros(3, {4, 2});
  Matrix x = Matrix::Random(6, 3);
  CHECK(net.forward(x).isZero());
  CHECK_THROWS(net.forward(Matrix::Random(2, 4)));
}

TEST_CASE("scaling the output layer scales logits and keeps the order") {
  auto rng = make_rng(3);
  Scorer net(2, {8, 8}, rng);
  const Matrix x = Matrix::Random(20, 2);
  const Vector before = net.forward(x);
  net.scale_output(2.5);
  const Vector after = net.forward(x);
  CHECK((after - 2.5 * before).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(rank_by_scores(before).order == rank_by_scores(after).order);
}

TEST_CASE("initialisation is deterministic per seed") {
  auto r1 = make_rng(9), r2 = make_rng(9), r3 = make_rng(10);
  const Scorer a(2, {16}, r1), b(2, {16}, r2), c(2, {16}, r3);
  CHECK(a.flatten() == b.flatten());
  CHECK_FALSE(a.flatten() == c.flatten());
}

TEST_CASE("predict returns a softmax consistent with the logits") {
  auto rng = make_rng(4);
  Scorer net(2, {8}, rng);
  Dataset ds;
  ds.dim = 2;
  for (int i = 0; i < 30; ++i) ds.items.push_back({i, Vector::Random(2), 0, 0});
  ds.items.push_back({30, ds.items[3].features, 0, 0});
  const auto p = predict(net, ds);
  CHECK(p.softmax.sum() == doctest::Approx(1.0));
  CHECK(rank_by_scores(p.logits).order == rank_by_scores(p.softmax).order);
  CHECK(p.logits[30] == p.logits[3]);
}

TEST_CASE("checkpoints save and load exactly") {
  auto rng = make_rng(5);
  const Scorer net(2, {8, 4}, rng);
  const auto stem = std::filesystem::temp_directory_path() / "fairrank_ckpt_test";
  save_checkpoint(net, stem);
  const auto back = load_checkpoint(stem);
  CHECK(back.flatten() == net.flatten());
  CHECK(back.hidden_sizes() == net.hidden_sizes());
}

TEST_CASE("training is reproducible") {
  const auto data = small_data(2000, 2);
  TrainConfig cfg;
  cfg.iterations = 30;
  cfg.checkpoint_every = 10;
  cfg.hidden = {32, 16};
  cfg.batch_sessions = 32;
  cfg.seed = 7;
  const auto a = train(data.train, data.validation, PbmConfig{}, cfg);
  const auto b = train(data.train, data.validation, PbmConfig{}, cfg);
  REQUIRE(a.checkpoints.size() == 3);
  CHECK(a.checkpoints.back().iteration == 30);
  for (std::size_t i = 0; i < a.checkpoints.size(); ++i)
    CHECK(a.checkpoints[i].validation_logits == b.checkpoints[i].validation_logits);
  const auto& best = a.best_checkpoint();
  for (const auto& c : a.checkpoints) CHECK(best.validation_ndcg >= c.validation_ndcg);
}

TEST_CASE("loss trends down with default hyperparameters") {
  const auto data = small_data(5000, 4);
  TrainConfig cfg;
  cfg.iterations = 200;
  cfg.seed = 3;
  const auto model = train(data.train, data.validation, PbmConfig{}, cfg);
  const auto window = [&](std::size_t from) {
    return std::accumulate(model.loss_history.begin() + static_cast<std::ptrdiff_t>(from),
                           model.loss_history.begin() + static_cast<std::ptrdiff_t>(from + 50), 0.0) / 50.0;
  };
  CHECK(window(model.loss_history.size() - 50) < window(0));
}

TEST_CASE("clicks without relevance signal do no better than untrained networks") {
  const auto data = small_data(3000, 3);
  PbmConfig pbm;
  pbm.eps_neg = 0.5;
  pbm.eps_pos = 0.5;
  TrainConfig cfg;
  cfg.iterations = 100;
  cfg.hidden = {32, 16};
  cfg.batch_sessions = 64;
  cfg.seed = 1;
  const auto model = train(data.train, data.validation, pbm, cfg);
  const auto grades = data.test.grades();
  const double learned = ndcg_at_k(rank_by_scores(predict(model.best_checkpoint().scorer, data.test).logits), grades);

  // An untrained network is already a smooth function of features that carry
  // grade information, so the baseline is a population of random initialisations.
  std::vector<double> baseline;
  for (std::uint64_t s = 0; s < 200; ++s) {
    auto rng = make_rng(1000 + s);
    const Scorer net(data.test.dim, cfg.hidden, rng);
    baseline.push_back(ndcg_at_k(rank_by_scores(predict(net, data.test).logits), grades));
  }
  std::sort(baseline.begin(), baseline.end());
  CHECK(learned <= baseline[197]);
}

TEST_CASE("invalid training configs are rejected") {
  TrainConfig cfg;
  cfg.learning_rate = 0;
  CHECK_THROWS(cfg.validate());
  cfg = TrainConfig{};
  cfg.checkpoint_every = 0;
  CHECK_THROWS(cfg.validate());
}

}  // TEST_SUITE
