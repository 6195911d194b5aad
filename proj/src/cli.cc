#include "zsuc/cli.h"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "zsuc/data.h"
#include "zsuc/error.h"
#include "zsuc/eval.h"
#include "zsuc/io.h"
#include "zsuc/model.h"
#include "zsuc/train.h"
#include "zsuc/zsl.h"

namespace zsuc {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// Echo of one command invocation: resolved configuration plus the hash of
// every input file. Written next to the command's primary output.
class Manifest {
 public:
  explicit Manifest(std::string command) { json_["command"] = std::move(command); }

  template <typename T>
  void config(const std::string& key, const T& value) {
    json_["config"][key] = value;
  }
  void input(const std::string& role, const std::string& path) {
    json_["inputs"][role] = {{"path", path}, {"hash", file_hash(path)}};
  }
  void output(const std::string& path) { json_["outputs"].push_back(path); }

  void write(const std::string& path) const { write_file(path, json_.dump(2) + "\n"); }

 private:
  ordered_json json_;
};

std::string manifest_path(const std::string& output) {
  return output + ".manifest.json";
}

std::vector<std::size_t> parse_size_list(const std::string& text,
                                         const std::string& flag) {
  std::vector<std::size_t> out;
  if (text.empty() || text == "none") return out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(part, &used);
      if (used != part.size() || v <= 0) throw std::invalid_argument(part);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw UsageError(flag + ": expected comma-separated positive integers, got '" +
                       text + "'");
    }
  }
  return out;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

// Text before the first TAB, so TSV corpora and plain line files both work.
std::string text_field(const std::string& line) { return line.substr(0, line.find('\t')); }

Vocabulary load_vocab(const std::string& path) { return Vocabulary::parse(read_file(path)); }

std::vector<std::string> load_class_names(const std::string& path) {
  auto names = parse_class_names(read_file(path));
  if (names.size() < 2) throw DataError(path + ": need at least two classes");
  return names;
}

Model load_model_checked(const std::string& path, const Vocabulary& vocab) {
  Model model = parse_model(read_file(path));
  if (model.vocab_hash != vocab.hash()) {
    throw DataError("vocabulary hash mismatch: model was trained with " +
                    model.vocab_hash + ", vocabulary file is " + vocab.hash());
  }
  if (model.params.input_dim() != vocab.size()) {
    throw DataError("model input dimension does not match vocabulary");
  }
  return model;
}

KnowledgeBase make_kb(const Model& model, const Vocabulary& vocab) {
  if (model.params.hidden_count() == 0) throw DataError("no embedding layer");
  return KnowledgeBase(model.params, vocab, model.config.binary_bow);
}

Metric resolve_metric(const std::string& flag, const Model& model) {
  if (flag.empty()) return model.config.metric;
  try {
    return parse_metric(flag);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

// Training flags shared by `train` and the linear-classifier modes of `eval`.
struct TrainFlags {
  std::string layers = "64";
  double lr = 0.1;
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double dropout = 0.0;
  double lambda = 0.0;
  std::uint64_t seed = 1;
  bool binary_bow = false;
  std::string metric = "euclidean";

  void add_to(CLI::App* cmd, bool network_flags) {
    cmd->add_option("--lr", lr, "learning rate")->capture_default_str();
    cmd->add_option("--epochs", epochs, "training epochs")->capture_default_str();
    cmd->add_option("--batch-size", batch_size, "minibatch size")->capture_default_str();
    cmd->add_option("--seed", seed, "random seed")->capture_default_str();
    if (!network_flags) return;
    cmd->add_option("--layers", layers,
                    "hidden widths, comma-separated ('none' for logistic regression)")
        ->capture_default_str();
    cmd->add_option("--dropout", dropout, "dropout rate in [0, 1)")->capture_default_str();
    cmd->add_option("--lambda", lambda, "entropy weight (0 disables)")->capture_default_str();
    cmd->add_flag("--binary-bow", binary_bow, "binary word indicators instead of counts");
    cmd->add_option("--metric", metric, "euclidean|cosine")->capture_default_str();
  }

  TrainConfig resolve() const {
    TrainConfig c;
    c.hidden_layers = parse_size_list(layers, "--layers");
    c.learning_rate = lr;
    c.batch_size = batch_size;
    c.epochs = epochs;
    c.dropout_rate = dropout;
    c.seed = seed;
    c.lambda = lambda;
    c.binary_bow = binary_bow;
    try {
      c.metric = parse_metric(metric);
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return c;
  }
};

void echo_config(Manifest& m, const TrainConfig& c) {
  m.config("layers", join(c.hidden_layers));
  m.config("lr", c.learning_rate);
  m.config("epochs", c.epochs);
  m.config("batch_size", c.batch_size);
  m.config("dropout", c.dropout_rate);
  m.config("lambda", c.lambda);
  m.config("seed", c.seed);
  m.config("binary_bow", c.binary_bow);
  m.config("metric", std::string(metric_name(c.metric)));
}

// ---- build-vocab ----------------------------------------------------------

struct BuildVocabCmd {
  std::vector<std::string> corpora;
  std::string stopwords;
  std::size_t max_size = 10000;
  std::string out;

  void add(CLI::App& app, std::function<void()>& run) {
    auto* cmd = app.add_subcommand("build-vocab", "build a vocabulary file from text corpora");
    cmd->add_option("--corpus", corpora, "corpus file(s); text before the first TAB is used")
        ->required();
    cmd->add_option("--stopwords", stopwords, "stop-word file, one word per line");
    cmd->add_option("--max-size", max_size, "maximum vocabulary size")->capture_default_str();
    cmd->add_option("--out", out, "vocabulary output file")->required();
    cmd->callback([this, &run] { run = [this] { exec(); }; });
  }

  void exec() {
    if (max_size == 0) throw UsageError("--max-size must be positive");
    std::vector<std::string> texts;
    Manifest manifest("build-vocab");
    for (const auto& path : corpora) {
      for (const auto& line : split_lines(read_file(path))) texts.push_back(text_field(line));
      manifest.input("corpus", path);
    }
    if (texts.empty()) throw DataError("empty corpus");
    std::set<std::string> stops;
    if (!stopwords.empty()) {
      stops = parse_stop_words(read_file(stopwords));
      manifest.input("stopwords", stopwords);
    }
    const auto vocab = build_vocabulary(texts, stops, max_size);
    write_file(out, vocab.serialize());
    manifest.config("max_size", max_size);
    manifest.output(out);
    manifest.write(manifest_path(out));
  }
};

// ---- train ----------------------------------------------------------------

struct TrainCmd {
  std::string qcl;
  std::string vocab_path;
  std::string classes;
  std::size_t top_urls = 0;
  std::string out;
  std::string log;
  TrainFlags flags;

  void add(CLI::App& app, std::function<void()>& run) {
    auto* cmd = app.add_subcommand("train", "train a network on a query-click log");
    cmd->add_option("--qcl", qcl, "query<TAB>url training file")->required();
    cmd->add_option("--vocab", vocab_path, "vocabulary file")->required();
    cmd->add_option("--classes", classes, "class-name file (required when --lambda > 0)");
    cmd->add_option("--top-urls", top_urls, "keep only the k most frequent URLs (0 = all)");
    cmd->add_option("--out", out, "model output file")->required();
    cmd->add_option("--log", log, "per-epoch metric log (default <out>.log.csv)");
    flags.add_to(cmd, true);
    cmd->callback([this, &run] { run = [this] { exec(); }; });
  }

  void exec() {
    const TrainConfig config = flags.resolve();
    if (config.lambda > 0.0 && classes.empty()) {
      throw UsageError("--lambda > 0 requires --classes");
    }
    if (config.lambda > 0.0 && config.hidden_layers.empty()) {
      throw UsageError("--lambda > 0 requires at least one hidden layer");
    }
    Manifest manifest("train");
    const Vocabulary vocab = load_vocab(vocab_path);
    manifest.input("vocab", vocab_path);
    QclCorpus corpus = load_qcl(qcl);
    manifest.input("qcl", qcl);
    auto records = top_urls > 0 ? restrict_top_urls(corpus.records, top_urls)
                                : std::move(corpus.records);
    records = filter_unknown_queries(records, vocab);
    if (records.empty()) throw DataError("no training records left after filtering");
    const UrlIndex urls = index_urls(records);
    const auto examples = make_examples(records, urls, vocab, config.binary_bow);

    std::optional<ClassBags> bags;
    if (!classes.empty()) {
      bags = make_class_bags(load_class_names(classes), vocab, config.binary_bow);
      manifest.input("classes", classes);
    }
    const auto result = train(examples, vocab.size(), urls.size(), config,
                              bags ? &*bags : nullptr);

    Model model{result.params, config, vocab.hash(), urls.names};
    write_file(out, serialize_model(model));
    const std::string log_path = log.empty() ? out + ".log.csv" : log;
    write_file(log_path, format_train_log(result.log));

    echo_config(manifest, config);
    manifest.config("top_urls", top_urls);
    manifest.config("records", records.size());
    manifest.output(out);
    manifest.output(log_path);
    manifest.write(manifest_path(out));
  }
};

// ---- classify -------------------------------------------------------------

struct ClassifyCmd {
  std::string model_path;
  std::string vocab_path;
  std::string classes;
  std::string input;
  std::string out;
  std::string manifest_out;
  std::string metric;

  void add(CLI::App& app, std::function<void()>& run, std::istream& in,
           std::ostream& os) {
    auto* cmd = app.add_subcommand("classify", "zero-shot classify utterances");
    cmd->add_option("--model", model_path, "model file")->required();
    cmd->add_option("--vocab", vocab_path, "vocabulary file")->required();
    cmd->add_option("--classes", classes, "class-name file")->required();
    cmd->add_option("--input", input, "utterance lines (default stdin)");
    cmd->add_option("--out", out, "output file (default stdout)");
    cmd->add_option("--manifest", manifest_out, "manifest path");
    cmd->add_option("--metric", metric, "euclidean|cosine (default: the model's)");
    cmd->callback([this, &run, &in, &os] { run = [this, &in, &os] { exec(in, os); }; });
  }

  void exec(std::istream& in, std::ostream& os) {
    const Vocabulary vocab = load_vocab(vocab_path);
    const Model model = load_model_checked(model_path, vocab);
    const Metric m = resolve_metric(metric, model);
    const KnowledgeBase kb = make_kb(model, vocab);
    const ClassSet set = make_class_set(load_class_names(classes), kb);

    std::string text;
    if (input.empty()) {
      std::ostringstream buffer;
      buffer << in.rdbuf();
      text = buffer.str();
    } else {
      text = read_file(input);
    }
    std::string result;
    char buf[32];
    for (const auto& line : split_lines(text)) {
      const auto p = zsl_posterior(kb, text_field(line), set, m);
      result += set.names[argmax(p)];
      for (double v : p) {
        std::snprintf(buf, sizeof(buf), "\t%.9f", v);
        result += buf;
      }
      result += '\n';
    }
    if (out.empty()) {
      os << result;
    } else {
      write_file(out, result);
    }

    const std::string mpath = !manifest_out.empty() ? manifest_out
                              : !out.empty()        ? manifest_path(out)
                                                    : std::string();
    if (!mpath.empty()) {
      Manifest manifest("classify");
      manifest.input("model", model_path);
      manifest.input("vocab", vocab_path);
      manifest.input("classes", classes);
      if (!input.empty()) manifest.input("input", input);
      manifest.config("metric", std::string(metric_name(m)));
      if (!out.empty()) manifest.output(out);
      manifest.write(mpath);
    }
  }
};

// ---- eval -----------------------------------------------------------------

struct EvalCmd {
  std::string model_path;
  std::string vocab_path;
  std::string classes;
  std::string suc;
  std::string train_suc;
  std::string url_map;
  std::string mode = "auc";
  std::string feature = "embedding";
  std::string sizes = "5,10,20,50,100,200,400,800";
  std::string metric;
  std::string out;
  std::string plot_out;
  TrainFlags flags;

  void add(CLI::App& app, std::function<void()>& run) {
    auto* cmd = app.add_subcommand("eval", "evaluate feature pipelines on labeled utterances");
    cmd->add_option("--model", model_path, "model file")->required();
    cmd->add_option("--vocab", vocab_path, "vocabulary file")->required();
    cmd->add_option("--classes", classes, "class-name file")->required();
    cmd->add_option("--suc", suc, "utterance<TAB>class test file")->required();
    cmd->add_option("--train-suc", train_suc, "labeled training file (error/curve modes)");
    cmd->add_option("--url-map", url_map, "class<TAB>url file (feature=representative)");
    cmd->add_option("--mode", mode, "auc|error|curve")
        ->check(CLI::IsMember({"auc", "error", "curve"}))
        ->capture_default_str();
    cmd->add_option("--feature", feature, "bow|posterior|embedding|augmented|representative")
        ->check(CLI::IsMember({"bow", "posterior", "embedding", "augmented", "representative"}))
        ->capture_default_str();
    cmd->add_option("--sizes", sizes, "training-set sizes for mode=curve")->capture_default_str();
    cmd->add_option("--metric", metric, "euclidean|cosine (default: the model's)");
    cmd->add_option("--out", out, "report output file")->required();
    cmd->add_option("--plot-out", plot_out, "plot-data CSV for mode=curve (default <out>.curve.csv)");
    flags.add_to(cmd, false);
    cmd->callback([this, &run] { run = [this] { exec(); }; });
  }

  std::vector<std::size_t> load_url_map(const Model& model,
                                        const std::vector<std::string>& names) const {
    std::map<std::string, std::string> map;
    for (auto& u : parse_suc(read_file(url_map))) map[u.utterance] = u.class_name;
    UrlIndex urls;
    for (std::size_t i = 0; i < model.url_labels.size(); ++i) {
      urls.names.push_back(model.url_labels[i]);
      urls.index[model.url_labels[i]] = i;
    }
    std::vector<std::size_t> out;
    for (const auto& name : names) {
      auto it = map.find(name);
      if (it == map.end()) throw DataError(url_map + ": no URL for class " + name);
      out.push_back(urls.at(it->second));
    }
    return out;
  }

  void exec() {
    const Vocabulary vocab = load_vocab(vocab_path);
    const Model model = load_model_checked(model_path, vocab);
    const Metric m = resolve_metric(metric, model);
    const auto names = load_class_names(classes);
    const auto test = load_suc(suc);
    const auto truth = class_indices(test, names);
    const bool binary = model.config.binary_bow;

    Manifest manifest("eval");
    manifest.input("model", model_path);
    manifest.input("vocab", vocab_path);
    manifest.input("classes", classes);
    manifest.input("suc", suc);

    EvalReport report;
    report.mode = mode;
    report.metadata = {{"feature", feature},
                       {"metric", std::string(metric_name(m))},
                       {"model_hash", file_hash(model_path)},
                       {"vocab_hash", vocab.hash()},
                       {"dataset_hash", file_hash(suc)},
                       {"seed", std::to_string(flags.seed)}};
    if (feature == "posterior") {
      report.metadata.emplace_back("posterior_space", "euclidean distance over P(Y|X)");
    }

    std::optional<KnowledgeBase> kb;
    auto need_kb = [&]() -> const KnowledgeBase& {
      if (!kb) kb.emplace(make_kb(model, vocab));
      return *kb;
    };
    auto zsl_map = [&]() -> FeatureMap {
      if (feature == "bow") return bow_map(vocab, binary);
      if (feature == "posterior") return posterior_map(model.params, vocab, binary);
      return embedding_map(need_kb());
    };

    if (mode == "auc") {
      std::vector<std::vector<double>> posteriors;
      if (feature == "representative") {
        if (url_map.empty()) throw UsageError("--feature representative requires --url-map");
        manifest.input("url_map", url_map);
        const auto c2u = load_url_map(model, names);
        for (const auto& u : test) {
          posteriors.push_back(representative_url_posterior(
              model.params, to_input(featurize(u.utterance, vocab), binary), c2u));
        }
      } else {
        if (feature == "augmented") throw UsageError("mode=auc does not take feature=augmented");
        if (feature == "embedding") {
          (void)make_class_set(names, need_kb());  // vocabulary check on class names
        }
        const auto features = zsl_map();
        posteriors = zsl_posteriors(features, test, make_class_set(names, features), m);
      }
      const auto auc = per_class_auc(posteriors, truth, names.size());
      for (std::size_t c = 0; c < names.size(); ++c) {
        report.per_class_auc.emplace_back(names[c], auc[c]);
      }
      report.mean_auc = mean(auc);
    } else {
      if (train_suc.empty()) throw UsageError("mode=" + mode + " requires --train-suc");
      manifest.input("train_suc", train_suc);
      const auto train_set = load_suc(train_suc);
      TrainConfig config = flags.resolve();

      if (mode == "error") {
        auto features_of = [&](const std::string& text) {
          const auto bow = featurize(text, vocab);
          if (feature == "bow") return bow.dense();
          if (feature == "posterior") {
            return augment_features(bow, posterior_features(model.params, to_input(bow, binary)));
          }
          if (feature == "embedding") return need_kb().embed(text);
          if (feature == "augmented") return augment_features(bow, need_kb().embed(text));
          throw UsageError("mode=error does not take feature=" + feature);
        };
        std::vector<std::vector<double>> train_x, test_x;
        for (const auto& u : train_set) train_x.push_back(features_of(u.utterance));
        for (const auto& u : test) test_x.push_back(features_of(u.utterance));
        const auto clf = train_linear_classifier(train_x, class_indices(train_set, names),
                                                 names.size(), config);
        std::vector<std::size_t> predictions;
        for (const auto& x : test_x) predictions.push_back(clf.predict(x));
        report.error_rate = error_rate(predictions, truth);
      } else {
        if (feature == "augmented" || feature == "representative") {
          throw UsageError("mode=curve takes feature bow|posterior|embedding");
        }
        const auto size_list = parse_size_list(sizes, "--sizes");
        const auto features = zsl_map();
        const auto curve = learning_curve(train_set, test, vocab, features,
                                          make_class_set(names, features), size_list,
                                          config, m);
        const std::string plot = plot_out.empty() ? out + ".curve.csv" : plot_out;
        write_file(plot, learning_curve_csv(curve));
        manifest.output(plot);
        for (const auto& p : curve.points) {
          report.per_class_auc.emplace_back("supervised@" + std::to_string(p.size),
                                            p.supervised_auc);
        }
        report.per_class_auc.emplace_back("zsl", curve.zsl_auc);
        report.metadata.emplace_back("sizes", join(size_list));
      }
      manifest.config("lr", config.learning_rate);
      manifest.config("epochs", config.epochs);
      manifest.config("batch_size", config.batch_size);
      manifest.config("seed", config.seed);
    }

    write_file(out, serialize_report(report));
    manifest.config("mode", mode);
    manifest.config("feature", feature);
    manifest.config("metric", std::string(metric_name(m)));
    manifest.output(out);
    manifest.write(manifest_path(out));
  }
};

// ---- nn -------------------------------------------------------------------

struct NnCmd {
  std::string model_path;
  std::string vocab_path;
  std::vector<std::string> probes;
  std::string candidates;
  std::size_t k = 5;
  std::string metric;
  std::string out;
  std::string manifest_out;

  void add(CLI::App& app, std::function<void()>& run, std::ostream& os) {
    auto* cmd = app.add_subcommand("nn", "nearest neighbours in the embedding space");
    cmd->add_option("--model", model_path, "model file")->required();
    cmd->add_option("--vocab", vocab_path, "vocabulary file")->required();
    cmd->add_option("--probe", probes, "probe text (repeatable)")->required();
    cmd->add_option("--candidates", candidates,
                    "candidate lines (default: every vocabulary word)");
    cmd->add_option("--k", k, "neighbours per probe")->capture_default_str();
    cmd->add_option("--metric", metric, "euclidean|cosine (default: the model's)");
    cmd->add_option("--out", out, "output file (default stdout)");
    cmd->add_option("--manifest", manifest_out, "manifest path");
    cmd->callback([this, &run, &os] { run = [this, &os] { exec(os); }; });
  }

  void exec(std::ostream& os) {
    const Vocabulary vocab = load_vocab(vocab_path);
    const Model model = load_model_checked(model_path, vocab);
    const Metric m = resolve_metric(metric, model);
    const KnowledgeBase kb = make_kb(model, vocab);
    std::vector<std::string> pool;
    if (candidates.empty()) {
      pool = vocab.words();
    } else {
      for (const auto& line : split_lines(read_file(candidates))) {
        if (!line.empty()) pool.push_back(text_field(line));
      }
    }
    const auto features = embedding_map(kb);
    std::string result;
    char buf[64];
    for (const auto& probe : probes) {
      // The probe itself is not its own neighbour.
      std::vector<std::string> others;
      for (const auto& c : pool) {
        if (c != probe) others.push_back(c);
      }
      if (k > others.size()) throw UsageError("--k exceeds the number of candidates");
      const auto neighbors = nearest_neighbors(features, probe, others, k, m);
      for (std::size_t r = 0; r < neighbors.size(); ++r) {
        std::snprintf(buf, sizeof(buf), "\t%.9g", neighbors[r].distance);
        result += probe + "\t" + std::to_string(r + 1) + "\t" + neighbors[r].text + buf + "\n";
      }
    }
    if (out.empty()) {
      os << result;
    } else {
      write_file(out, result);
    }
    const std::string mpath = !manifest_out.empty() ? manifest_out
                              : !out.empty()        ? manifest_path(out)
                                                    : std::string();
    if (!mpath.empty()) {
      Manifest manifest("nn");
      manifest.input("model", model_path);
      manifest.input("vocab", vocab_path);
      if (!candidates.empty()) manifest.input("candidates", candidates);
      manifest.config("probes", probes);
      manifest.config("k", k);
      manifest.config("metric", std::string(metric_name(m)));
      if (!out.empty()) manifest.output(out);
      manifest.write(mpath);
    }
  }
};

// ---- export ---------------------------------------------------------------

struct ExportCmd {
  std::string model_path;
  std::string vocab_path;
  std::string input;
  std::string classes;
  std::string out;

  void add(CLI::App& app, std::function<void()>& run) {
    auto* cmd = app.add_subcommand("export", "export embeddings as plot-data CSV");
    cmd->add_option("--model", model_path, "model file")->required();
    cmd->add_option("--vocab", vocab_path, "vocabulary file")->required();
    cmd->add_option("--input", input, "text[<TAB>label] lines")->required();
    cmd->add_option("--classes", classes, "class-name file; appended as flagged rows");
    cmd->add_option("--out", out, "CSV output file")->required();
    cmd->callback([this, &run] { run = [this] { exec(); }; });
  }

  void exec() {
    const Vocabulary vocab = load_vocab(vocab_path);
    const Model model = load_model_checked(model_path, vocab);
    const KnowledgeBase kb = make_kb(model, vocab);
    Manifest manifest("export");
    manifest.input("model", model_path);
    manifest.input("vocab", vocab_path);
    manifest.input("input", input);

    std::vector<std::string> texts, labels;
    bool any_label = false;
    for (const auto& line : split_lines(read_file(input))) {
      if (line.empty()) continue;
      const auto tab = line.find('\t');
      texts.push_back(line.substr(0, tab));
      labels.push_back(tab == std::string::npos ? std::string() : line.substr(tab + 1));
      any_label = any_label || tab != std::string::npos;
    }
    if (!any_label) labels.clear();
    std::vector<std::string> names;
    if (!classes.empty()) {
      names = load_class_names(classes);
      make_class_bags(names, vocab);
      manifest.input("classes", classes);
    }
    write_file(out, embedding_csv(export_embedding(embedding_map(kb), texts, labels, names)));
    manifest.output(out);
    manifest.write(manifest_path(out));
  }
};

// ---- synth ----------------------------------------------------------------

struct SynthCmd {
  SyntheticSpec spec;
  std::string out_dir;

  void add(CLI::App& app, std::function<void()>& run) {
    auto* cmd = app.add_subcommand("synth", "generate a synthetic benchmark corpus");
    cmd->add_option("--out-dir", out_dir, "output directory")->required();
    cmd->add_option("--num-classes", spec.num_classes)->capture_default_str();
    cmd->add_option("--words-per-class", spec.words_per_class)->capture_default_str();
    cmd->add_option("--shared-words", spec.shared_words)->capture_default_str();
    cmd->add_option("--urls-per-class", spec.urls_per_class)->capture_default_str();
    cmd->add_option("--queries-per-class", spec.queries_per_class)->capture_default_str();
    cmd->add_option("--utterances-per-class", spec.utterances_per_class)->capture_default_str();
    cmd->add_option("--class-name-tokens", spec.class_name_tokens)->capture_default_str();
    cmd->add_option("--noise-rate", spec.noise_rate)->capture_default_str();
    cmd->add_option("--portal-click-rate", spec.portal_click_rate)->capture_default_str();
    cmd->add_option("--cross-click-rate", spec.cross_click_rate)->capture_default_str();
    cmd->add_option("--stopword-rate", spec.stopword_rate)->capture_default_str();
    cmd->add_option("--seed", spec.seed)->capture_default_str();
    cmd->callback([this, &run] { run = [this] { exec(); }; });
  }

  void exec() {
    try {
      spec.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    const auto corpus = generate_synthetic(spec);
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    const auto& meta = corpus.meta;

    std::string classes, url_map, stops;
    for (std::size_t c = 0; c < meta.class_names.size(); ++c) {
      classes += meta.class_names[c] + "\n";
      url_map += meta.class_names[c] + "\t" + meta.class_urls[c].front() + "\n";
    }
    for (const auto& w : meta.stop_words) stops += w + "\n";

    Manifest manifest("synth");
    const std::vector<std::pair<std::string, std::string>> files = {
        {"qcl.tsv", serialize_qcl(corpus.qcl)},
        {"suc.tsv", serialize_suc(corpus.suc)},
        {"classes.txt", classes},
        {"url_map.tsv", url_map},
        {"stopwords.txt", stops},
        {"meta.json", serialize_metadata(meta)}};
    for (const auto& [name, bytes] : files) {
      write_file(dir / name, bytes);
      manifest.output((dir / name).string());
    }
    manifest.config("seed", spec.seed);
    manifest.write((dir / "manifest.json").string());
  }
};

// ---- split ----------------------------------------------------------------

struct SplitCmd {
  std::string input;
  std::string fractions = "0.8,0.1,0.1";
  std::uint64_t seed = 1;
  std::string prefix;

  void add(CLI::App& app, std::function<void()>& run) {
    auto* cmd = app.add_subcommand("split", "seeded train/valid/test split of a line file");
    cmd->add_option("--input", input, "input file")->required();
    cmd->add_option("--fractions", fractions, "train,valid,test fractions")->capture_default_str();
    cmd->add_option("--seed", seed, "shuffle seed")->capture_default_str();
    cmd->add_option("--out-prefix", prefix, "writes <prefix>.{train,valid,test}.tsv")->required();
    cmd->callback([this, &run] { run = [this] { exec(); }; });
  }

  void exec() {
    std::array<double, 3> f{};
    std::stringstream ss(fractions);
    std::string part;
    std::size_t n = 0;
    while (std::getline(ss, part, ',')) {
      if (n == 3) throw UsageError("--fractions takes three values");
      try {
        f[n++] = parse_double(part);
      } catch (const DataError& e) {
        throw UsageError(std::string("--fractions: ") + e.what());
      }
    }
    if (n != 3) throw UsageError("--fractions takes three values");
    std::vector<std::string> lines;
    for (auto& line : split_lines(read_file(input))) {
      if (!line.empty()) lines.push_back(std::move(line));
    }
    Partition<std::string> parts;
    try {
      parts = split<std::string>(lines, f, seed);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    Manifest manifest("split");
    manifest.input("input", input);
    manifest.config("fractions", fractions);
    manifest.config("seed", seed);
    const std::vector<std::pair<std::string, const std::vector<std::string>*>> outs = {
        {".train.tsv", &parts.train}, {".valid.tsv", &parts.valid}, {".test.tsv", &parts.test}};
    for (const auto& [suffix, rows] : outs) {
      std::string bytes;
      for (const auto& r : *rows) bytes += r + "\n";
      write_file(prefix + suffix, bytes);
      manifest.output(prefix + suffix);
    }
    manifest.write(prefix + ".manifest.json");
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in,
            std::ostream& out, std::ostream& err) {
  CLI::App app{"Zero-shot semantic utterance classification"};
  app.name("zsuc");
  app.require_subcommand(1);
  std::function<void()> run;

  BuildVocabCmd build_vocab;
  TrainCmd train_cmd;
  ClassifyCmd classify;
  EvalCmd eval;
  NnCmd nn;
  ExportCmd export_cmd;
  SynthCmd synth;
  SplitCmd split_cmd;
  build_vocab.add(app, run);
  train_cmd.add(app, run);
  classify.add(app, run, in, out);
  eval.add(app, run);
  nn.add(app, run, out);
  export_cmd.add(app, run);
  synth.add(app, run);
  split_cmd.add(app, run);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    run();
    return 0;
  } catch (const UsageError& e) {
    err << "zsuc: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    err << "zsuc: numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "zsuc: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace zsuc
