#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "zsuc/metric.h"
#include "zsuc/random.h"
#include "zsuc/text.h"

namespace zsuc {

// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
  friend bool operator==(const Matrix&, const Matrix&) = default;
};

struct LayerParams {
  Matrix weights;  // out_dim x in_dim
  std::vector<double> bias;
  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

// Layers 0..n-1 are rectified hidden layers; the last layer feeds the softmax.
// layer_sizes = {V, h1, ..., hn, U}. n == 0 is multinomial logistic
// regression.
struct NetworkParams {
  std::vector<std::size_t> layer_sizes;
  std::vector<LayerParams> layers;

  std::size_t input_dim() const { return layer_sizes.front(); }
  std::size_t output_dim() const { return layer_sizes.back(); }
  std::size_t hidden_count() const { return layers.size() - 1; }
  // Width of the last hidden layer; 0 when there is none.
  std::size_t embedding_dim() const {
    return hidden_count() == 0 ? 0 : layer_sizes[layer_sizes.size() - 2];
  }
  std::size_t parameter_count() const;

  // Flat views in model-file order: per layer, W row-major then b.
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);

  friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

// Gradients share the parameter layout.
using Gradients = NetworkParams;

// Throws std::invalid_argument unless sizes has >= 2 positive entries.
void validate_layer_sizes(std::span<const std::size_t> layer_sizes);

// Uniform(-s, s) weights with s = sqrt(6 / (fan_in + fan_out)), zero biases.
NetworkParams init_params(std::span<const std::size_t> layer_sizes,
                          std::uint64_t seed);
NetworkParams zeros_like(const NetworkParams& params);
bool all_finite(const NetworkParams& params);

// Sparse real-valued network input.
struct SparseInput {
  std::size_t dim = 0;
  std::vector<std::pair<std::size_t, double>> entries;
};

SparseInput to_input(const BowVector& bow, bool binary = false);
SparseInput dense_to_input(std::span<const double> values);

// Per-hidden-layer unit scales: 0 for dropped units, 1/(1-rate) for kept.
struct DropoutMask {
  std::vector<std::vector<double>> scales;
};

DropoutMask sample_dropout_mask(const NetworkParams& params, double rate,
                                Rng& rng);

struct ForwardTrace {
  std::vector<std::vector<double>> pre;     // hidden pre-activations
  std::vector<std::vector<double>> hidden;  // rectified (and masked) outputs
  std::vector<double> logits;
  std::vector<double> output;  // softmax
  std::vector<std::vector<double>> dropout_scales;  // empty without dropout

  // Hn; empty when the network has no hidden layer.
  const std::vector<double>& last_hidden() const { return hidden.back(); }
};

ForwardTrace forward(const NetworkParams& params, const SparseInput& x,
                     const DropoutMask* dropout = nullptr);

// Hn(x) without dropout. Throws std::invalid_argument when n == 0.
std::vector<double> last_hidden(const NetworkParams& params,
                                const SparseInput& x);

struct Example {
  SparseInput input;
  std::size_t label = 0;
};

// Mean of -log P(label | input), evaluated with log-sum-exp.
double nll_loss(const NetworkParams& params, std::span<const Example> batch);
double example_nll(const ForwardTrace& trace, std::size_t label);

// Backpropagates one example. `logit_grad` is dL/dlogits (size U, may be
// empty for none); `hidden_grad` is an extra dL/dHn (may be empty).
void accumulate_gradient(const NetworkParams& params, const SparseInput& x,
                         const ForwardTrace& trace,
                         std::span<const double> logit_grad,
                         std::span<const double> hidden_grad, Gradients& grads);

// Gradient of nll_loss. `masks` is empty or holds one mask per example; the
// same masks must be used for any loss this gradient is compared against.
Gradients backward(const NetworkParams& params, std::span<const Example> batch,
                   std::span<const DropoutMask> masks = {});

// theta <- theta - learning_rate * grads.
void sgd_step(NetworkParams& params, const Gradients& grads,
              double learning_rate);

struct TrainConfig {
  std::vector<std::size_t> hidden_layers{64};
  double learning_rate = 0.1;
  std::size_t batch_size = 32;
  std::size_t epochs = 30;
  double dropout_rate = 0.0;
  std::uint64_t seed = 1;
  double lambda = 0.0;  // entropy weight; 0 trains plain NLL
  bool binary_bow = false;
  Metric metric = Metric::kEuclidean;

  // Throws std::invalid_argument when a field is out of range.
  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

}  // namespace zsuc
