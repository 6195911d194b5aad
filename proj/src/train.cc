#include "zsuc/train.h"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "zsuc/error.h"
#include "zsuc/io.h"

namespace zsuc {
namespace {

EpochMetrics measure(const NetworkParams& params, std::span<const Example> data,
                     const TrainConfig& config, const ClassBags* classes,
                     std::size_t epoch) {
  EpochMetrics m;
  m.epoch = epoch;
  m.nll = nll_loss(params, data);
  if (!std::isfinite(m.nll)) {
    throw NumericError("non-finite loss at epoch " + std::to_string(epoch));
  }
  if (config.lambda > 0.0) {
    m.entropy = batch_entropy(params, data, *classes, config.metric);
    if (!std::isfinite(*m.entropy)) {
      throw NumericError("non-finite entropy at epoch " + std::to_string(epoch));
    }
  }
  return m;
}

}  // namespace

TrainResult train(std::span<const Example> data, std::size_t input_dim,
                  std::size_t output_dim, const TrainConfig& config,
                  const ClassBags* classes) {
  config.validate();
  if (data.empty()) throw std::invalid_argument("empty training corpus");
  if (config.lambda > 0.0) {
    if (classes == nullptr) {
      throw std::invalid_argument("lambda > 0 requires a class set");
    }
    if (config.hidden_layers.empty()) {
      throw std::invalid_argument("lambda > 0 requires a hidden layer");
    }
  }
  std::vector<std::size_t> sizes{input_dim};
  sizes.insert(sizes.end(), config.hidden_layers.begin(), config.hidden_layers.end());
  sizes.push_back(output_dim);
  for (const auto& ex : data) {
    if (ex.label >= output_dim) throw std::invalid_argument("label out of range");
  }

  TrainResult result;
  result.params = init_params(sizes, mix_seed(config.seed, 1));
  Rng order_rng(mix_seed(config.seed, 2));
  Rng dropout_rng(mix_seed(config.seed, 3));

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Example> batch;
  std::vector<DropoutMask> masks;

  result.log.push_back(measure(result.params, data, config, classes, 0));
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    order_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      masks.clear();
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(data[order[i]]);
        if (config.dropout_rate > 0.0) {
          masks.push_back(
              sample_dropout_mask(result.params, config.dropout_rate, dropout_rng));
        }
      }
      const Gradients grads =
          config.lambda > 0.0
              ? zde_gradient(result.params, batch, *classes, config.lambda,
                             config.metric, masks)
              : backward(result.params, batch, masks);
      sgd_step(result.params, grads, config.learning_rate);
    }
    if (!all_finite(result.params)) {
      throw NumericError("non-finite parameters at epoch " + std::to_string(epoch));
    }
    result.log.push_back(measure(result.params, data, config, classes, epoch));
  }
  return result;
}

std::string format_train_log(std::span<const EpochMetrics> log) {
  const bool with_entropy = !log.empty() && log.front().entropy.has_value();
  std::string out = with_entropy ? "epoch,nll,entropy\n" : "epoch,nll\n";
  for (const auto& m : log) {
    out += std::to_string(m.epoch) + "," + format_double(m.nll);
    if (with_entropy) out += "," + format_double(m.entropy.value_or(0.0));
    out += "\n";
  }
  return out;
}

}  // namespace zsuc
