#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zsuc/net.h"
#include "zsuc/zsl.h"

namespace zsuc {

struct EpochMetrics {
  std::size_t epoch = 0;  // 0 is the initial network
  double nll = 0.0;
  std::optional<double> entropy;  // logged when training with lambda > 0
  friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

struct TrainResult {
  NetworkParams params;
  std::vector<EpochMetrics> log;
};

// Minibatch SGD on the mean NLL (plus lambda times the zero-shot entropy of
// `classes` when config.lambda > 0). Every random choice (initialization,
// shuffling, dropout) derives from config.seed. Throws NumericError when the
// loss or the parameters stop being finite.
TrainResult train(std::span<const Example> data, std::size_t input_dim,
                  std::size_t output_dim, const TrainConfig& config,
                  const ClassBags* classes = nullptr);

// `epoch,nll` or `epoch,nll,entropy` CSV.
std::string format_train_log(std::span<const EpochMetrics> log);

}  // namespace zsuc
