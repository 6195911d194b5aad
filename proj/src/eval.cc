#include "zsuc/eval.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "zsuc/error.h"
#include "zsuc/io.h"
#include "zsuc/train.h"

namespace zsuc {

double auc_pr(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("scores and labels differ in length");
  }
  std::size_t positives = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw std::invalid_argument("NaN score");
    if (labels[i] != 0 && labels[i] != 1) throw std::invalid_argument("labels must be 0/1");
    positives += static_cast<std::size_t>(labels[i]);
  }
  if (positives == 0 || positives == scores.size()) {
    throw std::invalid_argument("auc_pr needs at least one positive and one negative");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  std::size_t tp = 0;
  std::size_t fp = 0;
  double area = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    const std::size_t tp_before = tp;
    for (; i < order.size() && scores[order[i]] == threshold; ++i) {
      if (labels[order[i]] == 1) {
        ++tp;
      } else {
        ++fp;
      }
    }
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall_step =
        static_cast<double>(tp - tp_before) / static_cast<double>(positives);
    area += precision * recall_step;
  }
  return area;
}

std::vector<double> per_class_auc(std::span<const std::vector<double>> posteriors,
                                  std::span<const std::size_t> truth,
                                  std::size_t num_classes) {
  if (posteriors.size() != truth.size()) {
    throw std::invalid_argument("posteriors and truth differ in length");
  }
  std::vector<double> out(num_classes);
  std::vector<double> scores(truth.size());
  std::vector<int> labels(truth.size());
  for (std::size_t c = 0; c < num_classes; ++c) {
    for (std::size_t r = 0; r < truth.size(); ++r) {
      scores[r] = posteriors[r].at(c);
      labels[r] = truth[r] == c ? 1 : 0;
    }
    out[c] = auc_pr(scores, labels);
  }
  return out;
}

double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean of empty range");
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double error_rate(std::span<const std::size_t> predictions,
                  std::span<const std::size_t> truth) {
  if (predictions.size() != truth.size()) {
    throw std::invalid_argument("predictions and truth differ in length");
  }
  if (truth.empty()) throw std::invalid_argument("error_rate of empty set");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) wrong += predictions[i] != truth[i];
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

std::vector<std::size_t> class_indices(std::span<const LabeledUtterance> data,
                                       std::span<const std::string> classes) {
  std::vector<std::size_t> out;
  out.reserve(data.size());
  for (const auto& u : data) {
    auto it = std::find(classes.begin(), classes.end(), u.class_name);
    if (it == classes.end()) throw DataError("unknown class: " + u.class_name);
    out.push_back(static_cast<std::size_t>(it - classes.begin()));
  }
  return out;
}

std::vector<Neighbor> nearest_neighbors(const FeatureMap& features,
                                        std::string_view probe,
                                        std::span<const std::string> candidates,
                                        std::size_t k, Metric metric) {
  if (k > candidates.size()) {
    throw std::invalid_argument("k exceeds the number of candidates");
  }
  const auto p = features(probe);
  std::vector<Neighbor> all;
  all.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    all.push_back({i, candidates[i], distance(p, features(candidates[i]), metric)});
  }
  std::stable_sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance;
  });
  all.resize(k);
  return all;
}

std::vector<EmbeddingRow> export_embedding(const FeatureMap& features,
                                           std::span<const std::string> texts,
                                           std::span<const std::string> labels,
                                           std::span<const std::string> class_names) {
  if (!labels.empty() && labels.size() != texts.size()) {
    throw std::invalid_argument("labels and texts differ in length");
  }
  std::vector<EmbeddingRow> rows;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    rows.push_back({texts[i], labels.empty() ? std::string() : labels[i], false,
                    features(texts[i])});
  }
  for (const auto& name : class_names) {
    rows.push_back({name, name, true, features(name)});
  }
  return rows;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> parse_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (quoted) throw DataError("csv: unterminated quote");
  fields.push_back(std::move(current));
  return fields;
}

}  // namespace

std::string embedding_csv(std::span<const EmbeddingRow> rows) {
  const std::size_t dim = rows.empty() ? 0 : rows.front().coords.size();
  std::string out = "text,label,is_class";
  for (std::size_t k = 0; k < dim; ++k) out += ",e" + std::to_string(k);
  out += "\n";
  for (const auto& row : rows) {
    if (row.coords.size() != dim) throw std::invalid_argument("ragged embedding rows");
    out += csv_field(row.text) + "," + csv_field(row.label) + "," +
           (row.is_class ? "1" : "0");
    for (double v : row.coords) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

std::vector<EmbeddingRow> parse_embedding_csv(std::string_view bytes) {
  const auto lines = split_lines(bytes);
  if (lines.empty()) throw DataError("csv: missing header");
  const auto header = parse_csv_line(lines[0]);
  if (header.size() < 3) throw DataError("csv: bad header");
  const std::size_t dim = header.size() - 3;
  std::vector<EmbeddingRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = parse_csv_line(lines[i]);
    if (f.size() != header.size()) {
      throw DataError("csv line " + std::to_string(i + 1) + ": wrong field count");
    }
    EmbeddingRow row{f[0], f[1], f[2] == "1", {}};
    for (std::size_t k = 0; k < dim; ++k) row.coords.push_back(parse_double(f[3 + k]));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> augment_features(const BowVector& bow, std::span<const double> h) {
  auto out = bow.dense();
  out.insert(out.end(), h.begin(), h.end());
  return out;
}

std::vector<double> LinearClassifier::probabilities(
    std::span<const double> features) const {
  return forward(params, dense_to_input(features)).output;
}

std::size_t LinearClassifier::predict(std::span<const double> features) const {
  return argmax(probabilities(features));
}

LinearClassifier train_linear_classifier(
    std::span<const std::vector<double>> features,
    std::span<const std::size_t> labels, std::size_t num_classes,
    const TrainConfig& config) {
  if (features.size() != labels.size()) {
    throw std::invalid_argument("features and labels differ in length");
  }
  if (features.empty()) throw std::invalid_argument("empty training set");
  const std::size_t dim = features.front().size();
  std::vector<Example> data;
  data.reserve(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].size() != dim) {
      throw std::invalid_argument("inconsistent feature dimensions");
    }
    data.push_back({dense_to_input(features[i]), labels[i]});
  }
  TrainConfig linear = config;
  linear.hidden_layers.clear();
  linear.lambda = 0.0;
  linear.dropout_rate = 0.0;
  return {train(data, dim, num_classes, linear).params};
}

std::vector<std::vector<double>> zsl_posteriors(
    const FeatureMap& features, std::span<const LabeledUtterance> data,
    const ClassSet& classes, Metric metric) {
  std::vector<std::vector<double>> out;
  out.reserve(data.size());
  for (const auto& u : data) {
    out.push_back(zsl_posterior(features, u.utterance, classes, metric));
  }
  return out;
}

LearningCurve learning_curve(std::span<const LabeledUtterance> train_set,
                             std::span<const LabeledUtterance> test,
                             const Vocabulary& vocab, const FeatureMap& zsl_features,
                             const ClassSet& classes,
                             std::span<const std::size_t> sizes,
                             const TrainConfig& config, Metric metric) {
  const std::size_t m = classes.size();
  const auto test_truth = class_indices(test, classes.names);
  const auto train_truth = class_indices(train_set, classes.names);

  LearningCurve curve;
  curve.zsl_auc = mean(per_class_auc(zsl_posteriors(zsl_features, test, classes, metric),
                                     test_truth, m));

  std::vector<std::vector<double>> test_features;
  for (const auto& u : test) test_features.push_back(featurize(u.utterance, vocab).dense());

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix_seed(config.seed, 21));
  rng.shuffle(order);

  for (std::size_t size : sizes) {
    if (size == 0 || size > train_set.size()) {
      throw std::invalid_argument("learning-curve size out of range");
    }
    std::vector<std::vector<double>> features;
    std::vector<std::size_t> labels;
    for (std::size_t i = 0; i < size; ++i) {
      features.push_back(featurize(train_set[order[i]].utterance, vocab).dense());
      labels.push_back(train_truth[order[i]]);
    }
    const auto model = train_linear_classifier(features, labels, m, config);
    std::vector<std::vector<double>> posteriors;
    for (const auto& f : test_features) posteriors.push_back(model.probabilities(f));
    curve.points.push_back({size, mean(per_class_auc(posteriors, test_truth, m))});
  }
  return curve;
}

std::string learning_curve_csv(const LearningCurve& curve) {
  std::string out = "series,size,auc\n";
  for (const auto& p : curve.points) {
    out += "supervised," + std::to_string(p.size) + "," + format_double(p.supervised_auc) + "\n";
  }
  for (const auto& p : curve.points) {
    out += "zsl," + std::to_string(p.size) + "," + format_double(curve.zsl_auc) + "\n";
  }
  return out;
}

std::string serialize_report(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["mode"] = report.mode;
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.metadata) meta[k] = v;
  j["metadata"] = meta;
  if (!report.per_class_auc.empty()) {
    nlohmann::ordered_json auc = nlohmann::ordered_json::object();
    for (const auto& [k, v] : report.per_class_auc) auc[k] = v;
    j["per_class_auc"] = auc;
  }
  if (report.mean_auc) j["mean_auc"] = *report.mean_auc;
  if (report.error_rate) j["error_rate"] = *report.error_rate;
  return j.dump(2) + "\n";
}

}  // namespace zsuc
