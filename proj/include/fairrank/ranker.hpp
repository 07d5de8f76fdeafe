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

#ifndef FAIRRANK_RANKER_HPP_
#define FAIRRANK_RANKER_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairrank/clickmodel.hpp"
#include "fairrank/dataio.hpp"
#include "fairrank/types.hpp"

namespace fairrank {

/// Fully connected scorer: rectified hidden layers and one linear output.
/// Activations are laid out one column per item.
template <typename Scalar>
class MlpScorer {
 public:
  using MatrixS = MatrixX<Scalar>;
  using VectorS = VectorX<Scalar>;

  struct Layer {
    MatrixS weight;  // fan_out x fan_in
    VectorS bias;
  };

  /// Intermediate activations kept by a forward pass for backpropagation.
  struct Trace {
    std::vector<MatrixS> activations;
  };

  MlpScorer() = default;

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases.
  MlpScorer(Index input_dim, const std::vector<Index>& hidden, Rng& rng) {
    Index fan_in = input_dim;
    auto sizes = hidden;
    sizes.push_back(1);
    for (const Index fan_out : sizes) {
      const Scalar bound = Scalar(1) / std::sqrt(static_cast<Scalar>(fan_in));
      std::uniform_real_distribution<double> draw(-bound, bound);
      Layer layer{MatrixS(fan_out, fan_in), VectorS(fan_out)};
      for (Index c = 0; c < fan_in; ++c)
        for (Index r = 0; r < fan_out; ++r) layer.weight(r, c) = static_cast<Scalar>(draw(rng));
      for (Index r = 0; r < fan_out; ++r) layer.bias[r] = static_cast<Scalar>(draw(rng));
      layers_.push_back(std::move(layer));
      fan_in = fan_out;
    }
  }

  static MlpScorer zeros(Index input_dim, const std::vector<Index>& hidden) {
    MlpScorer m;
    Index fan_in = input_dim;
    auto sizes = hidden;
    sizes.push_back(1);
    for (const Index fan_out : sizes) {
      m.layers_.push_back({MatrixS::Zero(fan_out, fan_in), VectorS::Zero(fan_out)});
      fan_in = fan_out;
    }
    return m;
  }

  Index input_dim() const { return layers_.empty() ? 0 : layers_.front().weight.cols(); }
  std::vector<Index> hidden_sizes() const {
    std::vector<Index> out;
    for (std::size_t l = 0; l + 1 < layers_.size(); ++l) out.push_back(layers_[l].weight.rows());
    return out;
  }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  /// Logits for a row-per-item feature matrix.
  VectorS forward(const MatrixS& features) const {
    Trace unused;
    return forward(features, unused);
  }

  VectorS forward(const MatrixS& features, Trace& trace) const {
    if (features.cols() != input_dim())
      throw ValidationError("scorer expects " + std::to_string(input_dim()) +
                            " features, got " + std::to_string(features.cols()));
    trace.activations.clear();
    trace.activations.reserve(layers_.size());
    trace.activations.push_back(features.transpose());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const auto& layer = layers_[l];
      MatrixS z = layer.weight * trace.activations.back();
      z.colwise() += layer.bias;
      if (l + 1 < layers_.size()) z = z.cwiseMax(Scalar(0));
      trace.activations.push_back(std::move(z));
    }
    VectorS logits = trace.activations.back().row(0).transpose();
    trace.activations.pop_back();
    return logits;
  }

  Scalar score(const VectorS& features) const {
    if (features.size() != input_dim())
      throw ValidationError("scorer expects " + std::to_string(input_dim()) +
                            " features, got " + std::to_string(features.size()));
    return forward(MatrixS(features.transpose()))[0];
  }

  /// Parameter gradients given d(loss)/d(logit) for the traced batch.
  std::vector<Layer> backward(const Trace& trace, const VectorS& grad_logits) const {
    std::vector<Layer> grads(layers_.size());
    MatrixS delta = grad_logits.transpose();
    for (std::size_t l = layers_.size(); l-- > 0;) {
      const MatrixS& input = trace.activations[l];
      grads[l].weight.noalias() = delta * input.transpose();
      grads[l].bias = delta.rowwise().sum();
      if (l == 0) break;
      MatrixS upstream = layers_[l].weight.transpose() * delta;
      // ReLU derivative: the stored activation is positive iff the unit fired.
      delta = (input.array() > Scalar(0)).select(upstream, Scalar(0));
    }
    return grads;
  }

  void apply_gradient(const std::vector<Layer>& grads, Scalar learning_rate) {
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      layers_[l].weight -= learning_rate * grads[l].weight;
      layers_[l].bias -= learning_rate * grads[l].bias;
    }
  }

  void scale_output(Scalar c) {
    layers_.back().weight *= c;
    layers_.back().bias *= c;
  }

  Index parameter_count() const {
    Index n = 0;
    for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
    return n;
  }

  /// Layer by layer: weight (row-major), then bias.
  VectorS flatten() const {
    VectorS out(parameter_count());
    Index pos = 0;
    for (const auto& l : layers_) {
      for (Index r = 0; r < l.weight.rows(); ++r)
        for (Index c = 0; c < l.weight.cols(); ++c) out[pos++] = l.weight(r, c);
      out.segment(pos, l.bias.size()) = l.bias;
      pos += l.bias.size();
    }
    return out;
  }

  void unflatten(const VectorS& params) {
    if (params.size() != parameter_count())
      throw ValidationError("parameter vector has wrong length");
    Index pos = 0;
    for (auto& l : layers_) {
      for (Index r = 0; r < l.weight.rows(); ++r)
        for (Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = params[pos++];
      l.bias = params.segment(pos, l.bias.size());
      pos += l.bias.size();
    }
  }

  bool all_finite() const {
    for (const auto& l : layers_)
      if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
    return true;
  }

 private:
  std::vector<Layer> layers_;
};

using Scorer = MlpScorer<double>;

struct TrainConfig {
  double learning_rate = 0.01;
  int batch_sessions = 256;
  int iterations = 500;
  int checkpoint_every = 50;
  int loss_cutoff = 10;
  int eval_k = 10;
  std::vector<Index> hidden = {256, 128};
  std::uint64_t seed = 0;

  void validate() const;
};

struct Checkpoint {
  int iteration = 0;
  Vector validation_logits;
  double validation_ndcg = 0.0;
  Scorer scorer;
};

struct TrainedModel {
  Scorer scorer;  // parameters after the last iteration
  std::vector<Checkpoint> checkpoints;
  std::size_t best = 0;  // checkpoint with the highest validation NDCG
  std::vector<double> loss_history;

  const Checkpoint& best_checkpoint() const { return checkpoints.at(best); }
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

struct ListwiseLoss {
  double value = 0.0;
  Vector grad;  // d(value)/d(logit), aligned with the input logits
};

/// IPS-weighted softmax cross-entropy over the first `loss_cutoff`
/// displayed items: -sum_{clicked r} log softmax(z)_r / propensity_r.
double ips_listwise_loss(std::span<const double> logits,
                         std::span<const std::uint8_t> clicks,
                         std::span<const double> propensities, int loss_cutoff);
ListwiseLoss ips_listwise_loss_grad(std::span<const double> logits,
                                    std::span<const std::uint8_t> clicks,
                                    std::span<const double> propensities,
                                    int loss_cutoff);

/// Stochastic-gradient training on simulated click sessions.
/// Called with every simulated training session, in simulation order.
using SessionObserver = std::function<void(int iteration, const ClickSession&)>;

TrainedModel train(const Dataset& train_ds, const Dataset& val_ds,
                   const PbmConfig& pbm, const TrainConfig& cfg,
                   const SessionObserver& observe = {});

struct Prediction {
  Vector logits;
  Vector softmax;  // over the whole list
};

Prediction predict(const Scorer& scorer, const Dataset& ds);
Vector softmax(const Vector& logits);

/// Writes `<stem>.json` (layout manifest) and `<stem>.bin` (little-endian
/// float64 parameters in flatten() order).
void save_checkpoint(const Scorer& scorer, const std::filesystem::path& stem,
                     const nlohmann::json& extra = nlohmann::json::object());
Scorer load_checkpoint(const std::filesystem::path& stem);

nlohmann::ordered_json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

}  // namespace fairrank

#endif  // FAIRRANK_RANKER_HPP_
