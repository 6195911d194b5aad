#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace zsuc {

// Distance used to match an input against class names in the semantic space.
enum class Metric { kEuclidean, kCosine };

inline std::string_view metric_name(Metric m) {
  return m == Metric::kEuclidean ? "euclidean" : "cosine";
}

inline Metric parse_metric(std::string_view name) {
  if (name == "euclidean") return Metric::kEuclidean;
  if (name == "cosine") return Metric::kCosine;
  throw std::invalid_argument("unknown metric: " + std::string(name));
}

}  // namespace zsuc
