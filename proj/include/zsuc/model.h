#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "zsuc/net.h"

namespace zsuc {

// A trained network plus everything needed to reuse it: the configuration it
// was trained with, the hash of its vocabulary file and the URL label names
// (index order).
struct Model {
  NetworkParams params;
  TrainConfig config;
  std::string vocab_hash;
  std::vector<std::string> url_labels;

  friend bool operator==(const Model&, const Model&) = default;
};

// Versioned container: a text header of key=value lines and URL names,
// followed by every weight and bias (per layer, W row-major then b) as
// little-endian IEEE-754 doubles.
std::string serialize_model(const Model& model);
Model parse_model(std::string_view bytes);

}  // namespace zsuc
