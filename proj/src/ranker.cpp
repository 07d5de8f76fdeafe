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

#include "fairrank/ranker.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>

#include "fairrank/metrics.hpp"

namespace fairrank {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || batch_sessions < 1 || iterations < 1 ||
      checkpoint_every < 1 || loss_cutoff < 1 || eval_k < 1)
    throw ValidationError("training hyperparameters must be positive");
  for (const auto h : hidden)
    if (h < 1) throw ValidationError("hidden layer sizes must be positive");
}

namespace {

void check_aligned(std::size_t n_logits, std::size_t n_clicks, std::size_t n_props) {
  if (n_logits != n_clicks || n_logits != n_props)
    throw ValidationError("logits, clicks and propensities must be aligned");
}

}  // namespace

ListwiseLoss ips_listwise_loss_grad(std::span<const double> logits,
                                    std::span<const std::uint8_t> clicks,
                                    std::span<const double> propensities,
                                    int loss_cutoff) {
  check_aligned(logits.size(), clicks.size(), propensities.size());
  const auto n = std::min<std::size_t>(logits.size(), static_cast<std::size_t>(std::max(loss_cutoff, 0)));
  ListwiseLoss out;
  out.grad = Vector::Zero(static_cast<Index>(logits.size()));

  double total_weight = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    if (!clicks[r]) continue;
    if (!(propensities[r] > 0.0))
      throw ValidationError("click at position " + std::to_string(r + 1) +
                            " has zero propensity");
    total_weight += 1.0 / propensities[r];
  }
  if (total_weight == 0.0) return out;

  const double top = *std::max_element(logits.begin(), logits.begin() + static_cast<std::ptrdiff_t>(n));
  double z = 0.0;
  for (std::size_t r = 0; r < n; ++r) z += std::exp(logits[r] - top);
  const double log_z = top + std::log(z);

  for (std::size_t r = 0; r < n; ++r) {
    const double p = std::exp(logits[r] - log_z);
    double g = total_weight * p;
    if (clicks[r]) {
      const double w = 1.0 / propensities[r];
      out.value -= w * (logits[r] - log_z);
      g -= w;
    }
    out.grad[static_cast<Index>(r)] = g;
  }
  return out;
}

double ips_listwise_loss(std::span<const double> logits,
                         std::span<const std::uint8_t> clicks,
                         std::span<const double> propensities, int loss_cutoff) {
  return ips_listwise_loss_grad(logits, clicks, propensities, loss_cutoff).value;
}

Vector softmax(const Vector& logits) {
  if (logits.size() == 0) return logits;
  const Vector e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

Prediction predict(const Scorer& scorer, const Dataset& ds) {
  Prediction p;
  p.logits = scorer.forward(ds.feature_matrix());
  p.softmax = softmax(p.logits);
  return p;
}

TrainedModel train(const Dataset& train_ds, const Dataset& val_ds,
                   const PbmConfig& pbm, const TrainConfig& cfg,
                   const SessionObserver& observe) {
  cfg.validate();
  pbm.validate();
  if (train_ds.empty() || val_ds.empty())
    throw ValidationError("training and validation sets must be non-empty");
  if (train_ds.dim != val_ds.dim)
    throw ValidationError("training and validation feature dimensions differ");

  auto init_rng = make_rng(cfg.seed, 0x1417u);
  auto click_rng = make_rng(cfg.seed, 0xc11cu);

  TrainedModel model;
  model.scorer = Scorer(train_ds.dim, cfg.hidden, init_rng);
  model.loss_history.reserve(static_cast<std::size_t>(cfg.iterations));

  const Matrix train_x = train_ds.feature_matrix();
  const Matrix val_x = val_ds.feature_matrix();
  const auto val_grades = val_ds.grades();
  const auto list_size = static_cast<std::size_t>(cfg.loss_cutoff);

  std::vector<ClickSession> sessions(static_cast<std::size_t>(cfg.batch_sessions));
  Scorer::Trace trace;
  for (int it = 1; it <= cfg.iterations; ++it) {
    Index rows = 0;
    for (auto& s : sessions) {
      s = simulate_session(train_ds, pbm, click_rng, list_size);
      if (observe) observe(it, s);
      rows += static_cast<Index>(s.rows.size());
    }
    Matrix batch(rows, train_ds.dim);
    Index pos = 0;
    for (const auto& s : sessions)
      for (const auto r : s.rows) batch.row(pos++) = train_x.row(r);

    const Vector logits = model.scorer.forward(batch, trace);
    Vector grad(rows);
    double loss = 0.0;
    pos = 0;
    for (const auto& s : sessions) {
      const auto len = s.rows.size();
      const auto res = ips_listwise_loss_grad(
          std::span<const double>(logits.data() + pos, len), s.clicks,
          s.propensities, cfg.loss_cutoff);
      loss += res.value;
      grad.segment(pos, static_cast<Index>(len)) = res.grad;
      pos += static_cast<Index>(len);
    }
    const double inv_batch = 1.0 / static_cast<double>(sessions.size());
    loss *= inv_batch;
    grad *= inv_batch;
    if (!std::isfinite(loss))
      throw TrainingError("non-finite training loss at iteration " + std::to_string(it) +
                          " (seed " + std::to_string(cfg.seed) + ")");
    model.loss_history.push_back(loss);

    model.scorer.apply_gradient(model.scorer.backward(trace, grad), cfg.learning_rate);
    if (!model.scorer.all_finite())
      throw TrainingError("non-finite parameters after iteration " + std::to_string(it) +
                          " (seed " + std::to_string(cfg.seed) + ")");

    if (it % cfg.checkpoint_every == 0 || it == cfg.iterations) {
      Checkpoint ck;
      ck.iteration = it;
      ck.validation_logits = model.scorer.forward(val_x);
      ck.validation_ndcg = ndcg_at_k(rank_by_scores(ck.validation_logits), val_grades, cfg.eval_k);
      ck.scorer = model.scorer;
      if (model.checkpoints.empty() ||
          ck.validation_ndcg > model.checkpoints[model.best].validation_ndcg)
        model.best = model.checkpoints.size();
      model.checkpoints.push_back(std::move(ck));
    }
  }
  return model;
}

namespace {

void put_le(std::ostream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  char bytes[8];
  for (int i = 0; i < 8; ++i) {
    bytes[i] = static_cast<char>(bits & 0xffu);
    bits >>= 8;
  }
  out.write(bytes, 8);
}

double get_le(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) throw Error("truncated checkpoint payload");
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | bytes[i];
  return std::bit_cast<double>(bits);
}

}  // namespace

void save_checkpoint(const Scorer& scorer, const std::filesystem::path& stem,
                     const nlohmann::json& extra) {
  auto bin_path = stem;
  bin_path += ".bin";
  auto json_path = stem;
  json_path += ".json";

  nlohmann::ordered_json manifest;
  manifest["format"] = "fairrank-mlp-v1";
  manifest["dtype"] = "float64";
  manifest["byte_order"] = "little";
  manifest["input_dim"] = scorer.input_dim();
  manifest["hidden"] = scorer.hidden_sizes();
  manifest["parameter_count"] = scorer.parameter_count();
  manifest["layout"] = "per layer: weight (fan_out x fan_in, row-major), then bias";
  manifest["payload"] = bin_path.filename().string();
  for (const auto& [key, value] : extra.items()) manifest[key] = value;

  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw Error("cannot write " + bin_path.string());
  const Vector params = scorer.flatten();
  for (Index i = 0; i < params.size(); ++i) put_le(bin, params[i]);

  std::ofstream js(json_path);
  if (!js) throw Error("cannot write " + json_path.string());
  js << manifest.dump(2) << '\n';
}

Scorer load_checkpoint(const std::filesystem::path& stem) {
  auto json_path = stem;
  json_path += ".json";
  std::ifstream js(json_path);
  if (!js) throw Error("cannot read " + json_path.string());
  const auto manifest = nlohmann::json::parse(js);
  if (manifest.value("format", "") != "fairrank-mlp-v1")
    throw Error(json_path.string() + ": unknown checkpoint format");

  auto scorer = Scorer::zeros(manifest.at("input_dim").get<Index>(),
                              manifest.at("hidden").get<std::vector<Index>>());
  auto bin_path = stem.parent_path() / manifest.at("payload").get<std::string>();
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw Error("cannot read " + bin_path.string());
  Vector params(scorer.parameter_count());
  for (Index i = 0; i < params.size(); ++i) params[i] = get_le(bin);
  scorer.unflatten(params);
  return scorer;
}

nlohmann::ordered_json to_json(const TrainConfig& cfg) {
  return {{"learning_rate", cfg.learning_rate},
          {"batch_sessions", cfg.batch_sessions},
          {"iterations", cfg.iterations},
          {"checkpoint_every", cfg.checkpoint_every},
          {"loss_cutoff", cfg.loss_cutoff},
          {"eval_k", cfg.eval_k},
          {"hidden", cfg.hidden}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig cfg;
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.batch_sessions = j.value("batch_sessions", cfg.batch_sessions);
  cfg.iterations = j.value("iterations", cfg.iterations);
  cfg.checkpoint_every = j.value("checkpoint_every", cfg.checkpoint_every);
  cfg.loss_cutoff = j.value("loss_cutoff", cfg.loss_cutoff);
  cfg.eval_k = j.value("eval_k", cfg.eval_k);
  if (j.contains("hidden")) cfg.hidden = j["hidden"].get<std::vector<Index>>();
  cfg.seed = j.value("seed", cfg.seed);
  cfg.validate();
  return cfg;
}

}  // namespace fairrank
