#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zsuc/metric.h"
#include "zsuc/net.h"
#include "zsuc/text.h"

namespace zsuc {

double distance(std::span<const double> a, std::span<const double> b,
                Metric metric);

// P(C = i | x) = exp(-d(x, c_i)) / sum_j exp(-d(x, c_j)) over the rows of
// `class_points`. Throws std::invalid_argument for an empty class matrix.
std::vector<double> distance_posterior(std::span<const double> point,
                                       const Matrix& class_points,
                                       Metric metric);

// Shannon entropy in nats.
double entropy(std::span<const double> probabilities);

// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

// The semantic knowledge base K(.): the last hidden layer of a network
// trained on query-click data, applied to the bag of words of any text.
class KnowledgeBase {
 public:
  // Throws std::invalid_argument when the network has no hidden layer and
  // DataError when the vocabulary does not match the input dimension.
  KnowledgeBase(NetworkParams params, Vocabulary vocab, bool binary_bow = false);

  std::vector<double> embed(std::string_view text) const;
  SparseInput input(std::string_view text) const;

  std::size_t dim() const { return params_.embedding_dim(); }
  const NetworkParams& params() const { return params_; }
  const Vocabulary& vocab() const { return vocab_; }
  bool binary_bow() const { return binary_bow_; }

 private:
  NetworkParams params_;
  Vocabulary vocab_;
  bool binary_bow_;
};

// Any text -> semantic vector map usable with the zero-shot classifier
// (bag of words, URL posterior, hidden-layer embedding).
using FeatureMap = std::function<std::vector<double>(std::string_view)>;

FeatureMap embedding_map(const KnowledgeBase& kb);
FeatureMap bow_map(const Vocabulary& vocab, bool binary = false);
FeatureMap posterior_map(const NetworkParams& params, const Vocabulary& vocab,
                         bool binary = false);

// Class names featurized as network inputs; what the entropy term of the
// training objective differentiates through.
struct ClassBags {
  std::vector<std::string> names;
  std::vector<SparseInput> inputs;
};

// Throws DataError when a name has no in-vocabulary token.
ClassBags make_class_bags(std::span<const std::string> names,
                          const Vocabulary& vocab, bool binary = false);

// Ordered class names with their semantic vectors K(C_i) as rows.
struct ClassSet {
  std::vector<std::string> names;
  Matrix embeddings;

  std::size_t size() const { return names.size(); }
};

// Throws std::invalid_argument for fewer than two classes.
ClassSet make_class_set(std::span<const std::string> names,
                        const FeatureMap& features);
// Additionally rejects out-of-vocabulary class names with DataError.
ClassSet make_class_set(std::span<const std::string> names,
                        const KnowledgeBase& kb);

std::vector<std::string> parse_class_names(std::string_view bytes);

std::vector<double> zsl_posterior(const FeatureMap& features,
                                  std::string_view text,
                                  const ClassSet& classes, Metric metric);
std::vector<double> zsl_posterior(const KnowledgeBase& kb, std::string_view text,
                                  const ClassSet& classes, Metric metric);

std::size_t classify_zero_shot(const KnowledgeBase& kb, std::string_view text,
                               const ClassSet& classes, Metric metric);

// Mean posterior entropy over `texts`.
double conditional_entropy(const FeatureMap& features,
                           std::span<const std::string> texts,
                           const ClassSet& classes, Metric metric);
double conditional_entropy(const KnowledgeBase& kb,
                           std::span<const std::string> texts,
                           const ClassSet& classes, Metric metric);

// Mean zero-shot entropy of a batch of network inputs, with class
// embeddings recomputed from `classes` under `params`.
double batch_entropy(const NetworkParams& params, std::span<const Example> batch,
                     const ClassBags& classes, Metric metric);

// nll_loss + lambda * batch_entropy over the same batch.
double zde_loss(const NetworkParams& params, std::span<const Example> batch,
                const ClassBags& classes, double lambda, Metric metric);

// Gradient of batch_entropy. The entropy depends on the parameters through
// both the input embeddings and the class-name embeddings; both paths are
// differentiated. Dropout masks (if any) apply to the inputs only.
Gradients entropy_gradient(const NetworkParams& params,
                           std::span<const Example> batch,
                           const ClassBags& classes, Metric metric,
                           std::span<const DropoutMask> masks = {});

// Gradient of zde_loss. With lambda == 0 this is exactly backward().
Gradients zde_gradient(const NetworkParams& params,
                       std::span<const Example> batch, const ClassBags& classes,
                       double lambda, Metric metric,
                       std::span<const DropoutMask> masks = {});

// P(Y | x) over URL labels, used directly as a semantic feature vector.
std::vector<double> posterior_features(const NetworkParams& params,
                                       const SparseInput& x);

// P(C = i | x) = P(Y = url_i | x), renormalized over the representative URLs.
std::vector<double> representative_url_posterior(
    const NetworkParams& params, const SparseInput& x,
    std::span<const std::size_t> class_to_url);

}  // namespace zsuc
