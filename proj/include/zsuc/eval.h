#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "zsuc/data.h"
#include "zsuc/net.h"
#include "zsuc/zsl.h"

namespace zsuc {

// Area under the precision-recall curve: thresholds at every distinct score
// (tied scores form a single step), summing precision * delta-recall.
// `labels` are 0/1. Throws std::invalid_argument without at least one
// positive and one negative, or on mismatched lengths / NaN scores.
double auc_pr(std::span<const double> scores, std::span<const int> labels);

// One-vs-rest AUC-PR per class, scoring each example by its posterior for
// that class. `posteriors[r]` has one entry per class.
std::vector<double> per_class_auc(std::span<const std::vector<double>> posteriors,
                                  std::span<const std::size_t> truth,
                                  std::size_t num_classes);

double mean(std::span<const double> values);

double error_rate(std::span<const std::size_t> predictions,
                  std::span<const std::size_t> truth);

// Positions of each utterance's class in `classes`. Unknown names throw
// DataError.
std::vector<std::size_t> class_indices(std::span<const LabeledUtterance> data,
                                       std::span<const std::string> classes);

struct Neighbor {
  std::size_t index = 0;  // position in the candidate list
  std::string text;
  double distance = 0.0;
};

// The k candidates closest to `probe`; ties keep candidate order.
std::vector<Neighbor> nearest_neighbors(const FeatureMap& features,
                                        std::string_view probe,
                                        std::span<const std::string> candidates,
                                        std::size_t k, Metric metric);

struct EmbeddingRow {
  std::string text;
  std::string label;
  bool is_class = false;
  std::vector<double> coords;
  friend bool operator==(const EmbeddingRow&, const EmbeddingRow&) = default;
};

// One row per text (in order, labels optional), then one flagged row per
// class name so plots can mark where each class sits.
std::vector<EmbeddingRow> export_embedding(const FeatureMap& features,
                                           std::span<const std::string> texts,
                                           std::span<const std::string> labels,
                                           std::span<const std::string> class_names);

// `text,label,is_class,e0,...` with 17-significant-digit coordinates.
std::string embedding_csv(std::span<const EmbeddingRow> rows);
std::vector<EmbeddingRow> parse_embedding_csv(std::string_view bytes);

// Dense bag of words followed by h.
std::vector<double> augment_features(const BowVector& bow, std::span<const double> h);

// Multinomial logistic regression: the zero-hidden-layer network.
struct LinearClassifier {
  NetworkParams params;

  std::vector<double> probabilities(std::span<const double> features) const;
  std::size_t predict(std::span<const double> features) const;
};

// Trains with config's optimizer settings; hidden layers and lambda are
// ignored.
LinearClassifier train_linear_classifier(
    std::span<const std::vector<double>> features,
    std::span<const std::size_t> labels, std::size_t num_classes,
    const TrainConfig& config);

struct LearningCurvePoint {
  std::size_t size = 0;
  double supervised_auc = 0.0;
};

struct LearningCurve {
  std::vector<LearningCurvePoint> points;
  double zsl_auc = 0.0;  // label-free, identical at every size
};

// For every size: a seeded nested subsample of `train`, a bag-of-words linear
// classifier trained on it and its mean per-class AUC on `test`. The
// zero-shot AUC of `zsl_features` on `test` is computed once.
LearningCurve learning_curve(std::span<const LabeledUtterance> train,
                             std::span<const LabeledUtterance> test,
                             const Vocabulary& vocab, const FeatureMap& zsl_features,
                             const ClassSet& classes,
                             std::span<const std::size_t> sizes,
                             const TrainConfig& config, Metric metric);

std::string learning_curve_csv(const LearningCurve& curve);

// Zero-shot posteriors of every utterance under `features`.
std::vector<std::vector<double>> zsl_posteriors(
    const FeatureMap& features, std::span<const LabeledUtterance> data,
    const ClassSet& classes, Metric metric);

struct EvalReport {
  std::string mode;
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::pair<std::string, double>> per_class_auc;
  std::optional<double> mean_auc;
  std::optional<double> error_rate;
};

// Indented JSON with keys in insertion order.
std::string serialize_report(const EvalReport& report);

}  // namespace zsuc
