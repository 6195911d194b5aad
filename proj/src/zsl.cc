#include "zsuc/zsl.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "zsuc/error.h"
#include "zsuc/io.h"

namespace zsuc {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

void check_same_dim(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("semantic vectors differ in dimension");
  }
}

// Adds scale * d(dist)/d(a) to grad_a and scale * d(dist)/d(b) to grad_b.
// Non-differentiable points (zero distance, zero-norm cosine operands) get a
// zero subgradient.
void distance_gradient(std::span<const double> a, std::span<const double> b,
                       Metric metric, double scale, std::span<double> grad_a,
                       std::span<double> grad_b) {
  if (metric == Metric::kEuclidean) {
    const double d = distance(a, b, metric);
    if (d == 0.0) return;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double g = scale * (a[k] - b[k]) / d;
      grad_a[k] += g;
      grad_b[k] -= g;
    }
    return;
  }
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return;
  const double cos = dot(a, b) / (na * nb);
  for (std::size_t k = 0; k < a.size(); ++k) {
    // d = 1 - cos
    grad_a[k] -= scale * (b[k] / (na * nb) - cos * a[k] / (na * na));
    grad_b[k] -= scale * (a[k] / (na * nb) - cos * b[k] / (nb * nb));
  }
}

// Entropy of the distance posterior of `point`; accumulates scale * dH/dpoint
// into point_grad and scale * dH/dclass_i into row i of class_grad.
double entropy_with_gradient(std::span<const double> point,
                             const Matrix& class_points, Metric metric,
                             double scale, std::span<double> point_grad,
                             Matrix& class_grad) {
  const auto p = distance_posterior(point, class_points, metric);
  const double h = entropy(p);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    // dH/dd_i = p_i (log p_i + H)
    const double g = p[i] * (std::log(p[i]) + h);
    distance_gradient(point, class_points.row(i), metric, scale * g,
                      point_grad, class_grad.row(i));
  }
  return h;
}

Matrix class_embeddings(const NetworkParams& params, const ClassBags& classes,
                        std::vector<ForwardTrace>* traces = nullptr) {
  Matrix points(classes.inputs.size(), params.embedding_dim());
  for (std::size_t i = 0; i < classes.inputs.size(); ++i) {
    auto trace = forward(params, classes.inputs[i]);
    std::copy(trace.last_hidden().begin(), trace.last_hidden().end(),
              points.row(i).begin());
    if (traces != nullptr) traces->push_back(std::move(trace));
  }
  return points;
}

void require_embedding(const NetworkParams& params) {
  if (params.hidden_count() == 0) throw std::invalid_argument("no embedding layer");
}

void add_scaled(Gradients& into, const Gradients& g, double scale) {
  for (std::size_t k = 0; k < into.layers.size(); ++k) {
    auto& a = into.layers[k];
    const auto& b = g.layers[k];
    for (std::size_t i = 0; i < a.weights.data.size(); ++i) {
      a.weights.data[i] += scale * b.weights.data[i];
    }
    for (std::size_t i = 0; i < a.bias.size(); ++i) a.bias[i] += scale * b.bias[i];
  }
}

}  // namespace

double distance(std::span<const double> a, std::span<const double> b,
                Metric metric) {
  check_same_dim(a, b);
  if (metric == Metric::kEuclidean) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[i];
      acc += d * d;
    }
    return std::sqrt(acc);
  }
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return 1.0;
  return 1.0 - dot(a, b) / (na * nb);
}

std::vector<double> distance_posterior(std::span<const double> point,
                                       const Matrix& class_points,
                                       Metric metric) {
  if (class_points.rows == 0) throw std::invalid_argument("empty class set");
  std::vector<double> p(class_points.rows);
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = -distance(point, class_points.row(i), metric);
  }
  const double m = *std::max_element(p.begin(), p.end());
  double z = 0.0;
  for (auto& v : p) {
    v = std::exp(v - m);
    z += v;
  }
  for (auto& v : p) v /= z;
  return p;
}

double entropy(std::span<const double> probabilities) {
  double h = 0.0;
  for (double p : probabilities) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax of empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

KnowledgeBase::KnowledgeBase(NetworkParams params, Vocabulary vocab,
                             bool binary_bow)
    : params_(std::move(params)), vocab_(std::move(vocab)), binary_bow_(binary_bow) {
  require_embedding(params_);
  if (vocab_.size() != params_.input_dim()) {
    throw DataError("vocabulary size " + std::to_string(vocab_.size()) +
                    " does not match network input " +
                    std::to_string(params_.input_dim()));
  }
}

SparseInput KnowledgeBase::input(std::string_view text) const {
  return to_input(featurize(text, vocab_), binary_bow_);
}

std::vector<double> KnowledgeBase::embed(std::string_view text) const {
  return last_hidden(params_, input(text));
}

FeatureMap embedding_map(const KnowledgeBase& kb) {
  return [&kb](std::string_view text) { return kb.embed(text); };
}

FeatureMap bow_map(const Vocabulary& vocab, bool binary) {
  return [&vocab, binary](std::string_view text) {
    auto bow = featurize(text, vocab);
    if (binary) {
      for (auto& [index, count] : bow.counts) count = 1;
    }
    return bow.dense();
  };
}

FeatureMap posterior_map(const NetworkParams& params, const Vocabulary& vocab,
                         bool binary) {
  return [&params, &vocab, binary](std::string_view text) {
    return posterior_features(params, to_input(featurize(text, vocab), binary));
  };
}

ClassBags make_class_bags(std::span<const std::string> names,
                          const Vocabulary& vocab, bool binary) {
  ClassBags bags;
  for (const auto& name : names) {
    const auto bow = featurize(name, vocab);
    if (bow.empty()) throw DataError("class name out of vocabulary: " + name);
    bags.names.push_back(name);
    bags.inputs.push_back(to_input(bow, binary));
  }
  return bags;
}

ClassSet make_class_set(std::span<const std::string> names,
                        const FeatureMap& features) {
  if (names.size() < 2) {
    throw std::invalid_argument("a class set needs at least two classes");
  }
  ClassSet set;
  set.names.assign(names.begin(), names.end());
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto v = features(names[i]);
    if (i == 0) set.embeddings = Matrix(names.size(), v.size());
    if (v.size() != set.embeddings.cols) {
      throw std::invalid_argument("feature map changed dimension");
    }
    std::copy(v.begin(), v.end(), set.embeddings.row(i).begin());
  }
  return set;
}

ClassSet make_class_set(std::span<const std::string> names,
                        const KnowledgeBase& kb) {
  make_class_bags(names, kb.vocab());  // vocabulary check only
  return make_class_set(names, embedding_map(kb));
}

std::vector<std::string> parse_class_names(std::string_view bytes) {
  std::vector<std::string> names;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  for (auto line : split_lines(bytes)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    line = line.substr(first, line.find_last_not_of(" \t") - first + 1);
    if (!seen.insert(line).second) {
      throw DataError("class file line " + std::to_string(line_no) +
                      ": duplicate class '" + line + "'");
    }
    names.push_back(line);
  }
  return names;
}

std::vector<double> zsl_posterior(const FeatureMap& features,
                                  std::string_view text,
                                  const ClassSet& classes, Metric metric) {
  return distance_posterior(features(text), classes.embeddings, metric);
}

std::vector<double> zsl_posterior(const KnowledgeBase& kb, std::string_view text,
                                  const ClassSet& classes, Metric metric) {
  return distance_posterior(kb.embed(text), classes.embeddings, metric);
}

std::size_t classify_zero_shot(const KnowledgeBase& kb, std::string_view text,
                               const ClassSet& classes, Metric metric) {
  return argmax(zsl_posterior(kb, text, classes, metric));
}

double conditional_entropy(const FeatureMap& features,
                           std::span<const std::string> texts,
                           const ClassSet& classes, Metric metric) {
  if (texts.empty()) throw std::invalid_argument("empty batch");
  double total = 0.0;
  for (const auto& text : texts) {
    total += entropy(zsl_posterior(features, text, classes, metric));
  }
  return total / static_cast<double>(texts.size());
}

double conditional_entropy(const KnowledgeBase& kb,
                           std::span<const std::string> texts,
                           const ClassSet& classes, Metric metric) {
  return conditional_entropy(embedding_map(kb), texts, classes, metric);
}

double batch_entropy(const NetworkParams& params, std::span<const Example> batch,
                     const ClassBags& classes, Metric metric) {
  require_embedding(params);
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const Matrix points = class_embeddings(params, classes);
  double total = 0.0;
  for (const auto& ex : batch) {
    total += entropy(distance_posterior(last_hidden(params, ex.input), points, metric));
  }
  return total / static_cast<double>(batch.size());
}

double zde_loss(const NetworkParams& params, std::span<const Example> batch,
                const ClassBags& classes, double lambda, Metric metric) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
  const double nll = nll_loss(params, batch);
  if (lambda == 0.0) return nll;
  return nll + lambda * batch_entropy(params, batch, classes, metric);
}

Gradients entropy_gradient(const NetworkParams& params,
                           std::span<const Example> batch,
                           const ClassBags& classes, Metric metric,
                           std::span<const DropoutMask> masks) {
  require_embedding(params);
  if (batch.empty()) throw std::invalid_argument("empty batch");
  if (!masks.empty() && masks.size() != batch.size()) {
    throw std::invalid_argument("need one dropout mask per example");
  }
  std::vector<ForwardTrace> class_traces;
  const Matrix points = class_embeddings(params, classes, &class_traces);
  Matrix class_grad(points.rows, points.cols);
  Gradients grads = zeros_like(params);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  std::vector<double> point_grad(points.cols);

  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto trace =
        forward(params, batch[b].input, masks.empty() ? nullptr : &masks[b]);
    std::fill(point_grad.begin(), point_grad.end(), 0.0);
    entropy_with_gradient(trace.last_hidden(), points, metric, inv_b, point_grad,
                          class_grad);
    accumulate_gradient(params, batch[b].input, trace, {}, point_grad, grads);
  }
  for (std::size_t i = 0; i < points.rows; ++i) {
    accumulate_gradient(params, classes.inputs[i], class_traces[i], {},
                        class_grad.row(i), grads);
  }
  return grads;
}

Gradients zde_gradient(const NetworkParams& params,
                       std::span<const Example> batch, const ClassBags& classes,
                       double lambda, Metric metric,
                       std::span<const DropoutMask> masks) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
  Gradients grads = backward(params, batch, masks);
  if (lambda == 0.0) return grads;
  add_scaled(grads, entropy_gradient(params, batch, classes, metric, masks), lambda);
  return grads;
}

std::vector<double> posterior_features(const NetworkParams& params,
                                       const SparseInput& x) {
  return forward(params, x).output;
}

std::vector<double> representative_url_posterior(
    const NetworkParams& params, const SparseInput& x,
    std::span<const std::size_t> class_to_url) {
  if (class_to_url.empty()) throw std::invalid_argument("empty class set");
  std::set<std::size_t> seen;
  for (auto url : class_to_url) {
    if (url >= params.output_dim()) {
      throw std::invalid_argument("unknown URL index " + std::to_string(url));
    }
    if (!seen.insert(url).second) {
      throw std::invalid_argument("class-to-URL map is not injective");
    }
  }
  const auto p = posterior_features(params, x);
  std::vector<double> out(class_to_url.size());
  double z = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = p[class_to_url[i]];
    z += out[i];
  }
  if (z == 0.0) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
    return out;
  }
  for (auto& v : out) v /= z;
  return out;
}

}  // namespace zsuc
