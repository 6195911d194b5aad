#include "zsuc/net.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace zsuc {

std::size_t NetworkParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.weights.data.size() + layer.bias.size();
  return n;
}

std::vector<double> NetworkParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& layer : layers) {
    flat.insert(flat.end(), layer.weights.data.begin(), layer.weights.data.end());
    flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
  }
  return flat;
}

void NetworkParams::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw std::invalid_argument("parameter vector has wrong length");
  }
  auto it = flat.begin();
  for (auto& layer : layers) {
    std::copy_n(it, layer.weights.data.size(), layer.weights.data.begin());
    it += static_cast<std::ptrdiff_t>(layer.weights.data.size());
    std::copy_n(it, layer.bias.size(), layer.bias.begin());
    it += static_cast<std::ptrdiff_t>(layer.bias.size());
  }
}

void validate_layer_sizes(std::span<const std::size_t> layer_sizes) {
  if (layer_sizes.size() < 2) {
    throw std::invalid_argument("layer_sizes needs input and output sizes");
  }
  for (auto s : layer_sizes) {
    if (s == 0) throw std::invalid_argument("layer sizes must be positive");
  }
}

NetworkParams init_params(std::span<const std::size_t> layer_sizes,
                          std::uint64_t seed) {
  validate_layer_sizes(layer_sizes);
  NetworkParams params;
  params.layer_sizes.assign(layer_sizes.begin(), layer_sizes.end());
  Rng rng(seed);
  for (std::size_t k = 0; k + 1 < layer_sizes.size(); ++k) {
    const std::size_t fan_in = layer_sizes[k];
    const std::size_t fan_out = layer_sizes[k + 1];
    const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    LayerParams layer{Matrix(fan_out, fan_in), std::vector<double>(fan_out, 0.0)};
    for (auto& w : layer.weights.data) w = rng.uniform(-s, s);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

NetworkParams zeros_like(const NetworkParams& params) {
  NetworkParams z;
  z.layer_sizes = params.layer_sizes;
  for (const auto& layer : params.layers) {
    z.layers.push_back({Matrix(layer.weights.rows, layer.weights.cols),
                        std::vector<double>(layer.bias.size(), 0.0)});
  }
  return z;
}

bool all_finite(const NetworkParams& params) {
  for (const auto& layer : params.layers) {
    for (double w : layer.weights.data) {
      if (!std::isfinite(w)) return false;
    }
    for (double b : layer.bias) {
      if (!std::isfinite(b)) return false;
    }
  }
  return true;
}

SparseInput to_input(const BowVector& bow, bool binary) {
  SparseInput x;
  x.dim = bow.dimension;
  x.entries.reserve(bow.counts.size());
  for (const auto& [index, count] : bow.counts) {
    x.entries.emplace_back(index, binary ? 1.0 : static_cast<double>(count));
  }
  return x;
}

SparseInput dense_to_input(std::span<const double> values) {
  SparseInput x;
  x.dim = values.size();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] != 0.0) x.entries.emplace_back(i, values[i]);
  }
  return x;
}

DropoutMask sample_dropout_mask(const NetworkParams& params, double rate,
                                Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw std::invalid_argument("dropout rate must be in [0, 1)");
  }
  DropoutMask mask;
  const double keep_scale = 1.0 / (1.0 - rate);
  for (std::size_t k = 0; k < params.hidden_count(); ++k) {
    std::vector<double> scales(params.layer_sizes[k + 1]);
    for (auto& s : scales) s = rng.bernoulli(rate) ? 0.0 : keep_scale;
    mask.scales.push_back(std::move(scales));
  }
  return mask;
}

namespace {

// out = W x + b for a sparse x.
std::vector<double> affine(const LayerParams& layer, const SparseInput& x) {
  std::vector<double> out = layer.bias;
  const auto& w = layer.weights;
  for (const auto& [j, v] : x.entries) {
    for (std::size_t o = 0; o < w.rows; ++o) out[o] += w(o, j) * v;
  }
  return out;
}

std::vector<double> affine(const LayerParams& layer, std::span<const double> x) {
  std::vector<double> out = layer.bias;
  const auto& w = layer.weights;
  for (std::size_t o = 0; o < w.rows; ++o) {
    const auto row = w.row(o);
    double acc = 0.0;
    for (std::size_t j = 0; j < w.cols; ++j) acc += row[j] * x[j];
    out[o] += acc;
  }
  return out;
}

void check_input(const NetworkParams& params, const SparseInput& x) {
  if (x.dim != params.input_dim()) {
    throw std::invalid_argument("input dimension " + std::to_string(x.dim) +
                                " does not match network input " +
                                std::to_string(params.input_dim()));
  }
  for (const auto& entry : x.entries) {
    if (entry.first >= x.dim) throw std::invalid_argument("input index out of range");
  }
}

// grads += outer(delta, in) for sparse or dense `in`.
void add_outer(Matrix& g, std::span<const double> delta, const SparseInput& in) {
  for (std::size_t o = 0; o < g.rows; ++o) {
    if (delta[o] == 0.0) continue;
    for (const auto& [j, v] : in.entries) g(o, j) += delta[o] * v;
  }
}

void add_outer(Matrix& g, std::span<const double> delta,
               std::span<const double> in) {
  for (std::size_t o = 0; o < g.rows; ++o) {
    if (delta[o] == 0.0) continue;
    auto row = g.row(o);
    for (std::size_t j = 0; j < g.cols; ++j) row[j] += delta[o] * in[j];
  }
}

// W^T delta.
std::vector<double> transpose_times(const Matrix& w, std::span<const double> delta) {
  std::vector<double> out(w.cols, 0.0);
  for (std::size_t o = 0; o < w.rows; ++o) {
    if (delta[o] == 0.0) continue;
    const auto row = w.row(o);
    for (std::size_t j = 0; j < w.cols; ++j) out[j] += row[j] * delta[o];
  }
  return out;
}

}  // namespace

ForwardTrace forward(const NetworkParams& params, const SparseInput& x,
                     const DropoutMask* dropout) {
  check_input(params, x);
  const std::size_t n = params.hidden_count();
  if (dropout != nullptr && dropout->scales.size() != n) {
    throw std::invalid_argument("dropout mask does not match network depth");
  }
  ForwardTrace trace;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> pre = k == 0 ? affine(params.layers[k], x)
                                     : affine(params.layers[k], trace.hidden.back());
    std::vector<double> h(pre.size());
    for (std::size_t o = 0; o < pre.size(); ++o) {
      h[o] = pre[o] > 0.0 ? pre[o] : 0.0;
      if (dropout != nullptr) h[o] *= dropout->scales[k][o];
    }
    trace.pre.push_back(std::move(pre));
    trace.hidden.push_back(std::move(h));
  }
  if (dropout != nullptr) trace.dropout_scales = dropout->scales;
  trace.logits = n == 0 ? affine(params.layers.back(), x)
                        : affine(params.layers.back(), trace.hidden.back());
  const double m = *std::max_element(trace.logits.begin(), trace.logits.end());
  trace.output.resize(trace.logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < trace.logits.size(); ++i) {
    trace.output[i] = std::exp(trace.logits[i] - m);
    z += trace.output[i];
  }
  for (auto& p : trace.output) p /= z;
  return trace;
}

std::vector<double> last_hidden(const NetworkParams& params,
                                const SparseInput& x) {
  if (params.hidden_count() == 0) {
    throw std::invalid_argument("no embedding layer");
  }
  return forward(params, x).last_hidden();
}

double example_nll(const ForwardTrace& trace, std::size_t label) {
  if (label >= trace.logits.size()) {
    throw std::invalid_argument("label index " + std::to_string(label) +
                                " out of range");
  }
  const double m = *std::max_element(trace.logits.begin(), trace.logits.end());
  double z = 0.0;
  for (double l : trace.logits) z += std::exp(l - m);
  return m + std::log(z) - trace.logits[label];
}

double nll_loss(const NetworkParams& params, std::span<const Example> batch) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  double total = 0.0;
  for (const auto& ex : batch) {
    total += example_nll(forward(params, ex.input), ex.label);
  }
  return total / static_cast<double>(batch.size());
}

void accumulate_gradient(const NetworkParams& params, const SparseInput& x,
                         const ForwardTrace& trace,
                         std::span<const double> logit_grad,
                         std::span<const double> hidden_grad, Gradients& grads) {
  const std::size_t n = params.hidden_count();
  const std::size_t out = params.layers.size() - 1;
  if (n == 0) {
    if (!hidden_grad.empty()) {
      throw std::invalid_argument("no embedding layer");
    }
    if (logit_grad.empty()) return;
    add_outer(grads.layers[out].weights, logit_grad, x);
    for (std::size_t o = 0; o < logit_grad.size(); ++o) {
      grads.layers[out].bias[o] += logit_grad[o];
    }
    return;
  }

  std::vector<double> g_h(params.embedding_dim(), 0.0);
  if (!logit_grad.empty()) {
    add_outer(grads.layers[out].weights, logit_grad, trace.hidden.back());
    for (std::size_t o = 0; o < logit_grad.size(); ++o) {
      grads.layers[out].bias[o] += logit_grad[o];
    }
    g_h = transpose_times(params.layers[out].weights, logit_grad);
  }
  if (!hidden_grad.empty()) {
    for (std::size_t i = 0; i < g_h.size(); ++i) g_h[i] += hidden_grad[i];
  }

  for (std::size_t k = n; k-- > 0;) {
    std::vector<double> g_pre(g_h.size());
    for (std::size_t o = 0; o < g_pre.size(); ++o) {
      // ReLU derivative at exactly 0 is taken as 0.
      double d = trace.pre[k][o] > 0.0 ? g_h[o] : 0.0;
      if (!trace.dropout_scales.empty()) d *= trace.dropout_scales[k][o];
      g_pre[o] = d;
    }
    auto& g = grads.layers[k];
    if (k == 0) {
      add_outer(g.weights, g_pre, x);
    } else {
      add_outer(g.weights, g_pre, trace.hidden[k - 1]);
    }
    for (std::size_t o = 0; o < g_pre.size(); ++o) g.bias[o] += g_pre[o];
    if (k > 0) g_h = transpose_times(params.layers[k].weights, g_pre);
  }
}

Gradients backward(const NetworkParams& params, std::span<const Example> batch,
                   std::span<const DropoutMask> masks) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  if (!masks.empty() && masks.size() != batch.size()) {
    throw std::invalid_argument("need one dropout mask per example");
  }
  Gradients grads = zeros_like(params);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  std::vector<double> delta(params.output_dim());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& ex = batch[b];
    if (ex.label >= params.output_dim()) {
      throw std::invalid_argument("label index " + std::to_string(ex.label) +
                                  " out of range");
    }
    const auto trace = forward(params, ex.input, masks.empty() ? nullptr : &masks[b]);
    for (std::size_t i = 0; i < delta.size(); ++i) {
      delta[i] = (trace.output[i] - (i == ex.label ? 1.0 : 0.0)) * inv_b;
    }
    accumulate_gradient(params, ex.input, trace, delta, {}, grads);
  }
  return grads;
}

void sgd_step(NetworkParams& params, const Gradients& grads,
              double learning_rate) {
  if (params.layer_sizes != grads.layer_sizes) {
    throw std::invalid_argument("gradient shape does not match parameters");
  }
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    auto& p = params.layers[k];
    const auto& g = grads.layers[k];
    for (std::size_t i = 0; i < p.weights.data.size(); ++i) {
      p.weights.data[i] -= learning_rate * g.weights.data[i];
    }
    for (std::size_t i = 0; i < p.bias.size(); ++i) {
      p.bias[i] -= learning_rate * g.bias[i];
    }
  }
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning rate must be positive");
  }
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  if (epochs == 0) throw std::invalid_argument("epochs must be positive");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw std::invalid_argument("dropout rate must be in [0, 1)");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("lambda must be non-negative");
  }
  for (auto h : hidden_layers) {
    if (h == 0) throw std::invalid_argument("hidden widths must be positive");
  }
}

}  // namespace zsuc
