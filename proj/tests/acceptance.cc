// End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit
// if any criterion fails. Tolerances are fixed below.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.h"
#include "zsuc/cli.h"
#include "zsuc/data.h"
#include "zsuc/eval.h"
#include "zsuc/io.h"
#include "zsuc/train.h"
#include "zsuc/zsl.h"

using namespace zsuc;
namespace fs = std::filesystem;

namespace {

constexpr double kGradTol = 1e-4;
constexpr double kFdStep = 1e-5;
constexpr double kKinkMargin = 1e-3;
constexpr double kPosteriorTol = 1e-9;
constexpr double kEntropyTol = 1e-9;
constexpr double kOneHotEntropy = 1e-6;
constexpr double kZdeMinAuc = 0.90;
constexpr double kBowGap = 0.05;
constexpr double kNllDegradation = 0.20;

int failures = 0;

void report(int id, bool pass, const std::string& title, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

FeatureMap table_map(const std::vector<std::vector<double>>& points) {
  return [&points](std::string_view t) { return points.at(std::stoul(std::string(t))); };
}

// ---- 1 --------------------------------------------------------------------

void gradient_check() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1001);
  const std::vector<std::vector<std::size_t>> shapes{
      {3, 3, 2}, {3, 4, 3}, {4, 3, 3}, {3, 2, 2, 3}, {3, 3, 2, 2}, {2, 2, 2, 2, 2}, {3, 2, 3, 2, 2}};
  double worst = 0.0;
  int nets = 0, checks = 0;
  std::size_t max_params = 0;
  for (int trial = 0; trial < 28; ++trial) {
    const auto& sizes = shapes[trial % shapes.size()];
    oracle::GradProblem prob;
    do {
      prob = oracle::random_problem(sizes, 3, 3, rng);
    } while (!oracle::smooth_at(prob, kKinkMargin));
    max_params = std::max(max_params, prob.params.parameter_count());
    ++nets;
    const Metric metric = trial % 2 ? Metric::kCosine : Metric::kEuclidean;
    for (double lambda : {0.0, 0.01}) {
      const auto analytic =
          zde_gradient(prob.params, prob.batch, prob.classes, lambda, metric).flatten();
      const auto numeric = oracle::numeric_gradient(
          prob.params,
          [&](const NetworkParams& p) { return zde_loss(p, prob.batch, prob.classes, lambda, metric); },
          kFdStep);
      worst = std::max(worst, oracle::max_relative_error(analytic, numeric));
      ++checks;
    }
  }
  const double dt = seconds_since(t0);
  report(1, worst < kGradTol && nets >= 20 && max_params <= 50 && dt < 60.0, "gradient correctness",
         fmt("%d nets (<= %zu params, 1-3 hidden), %d checks with lambda in {0, 0.01}, "
             "max rel err %.3g (tol %.0e), %.2fs (limit 60s)",
             nets, max_params, checks, worst, kGradTol, dt));
}

// ---- 2 --------------------------------------------------------------------

void posterior_oracle() {
  Rng rng(1002);
  double worst = 0.0, worst_norm = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = 1 + rng.below(5), m = 2 + rng.below(6);
    const bool cosine = trial % 2;
    std::vector<std::vector<double>> points(m + 1, std::vector<double>(d));
    for (auto& p : points) {
      for (auto& v : p) v = rng.uniform(-3, 3);
    }
    const auto features = table_map(points);
    std::vector<std::string> names;
    for (std::size_t i = 1; i <= m; ++i) names.push_back(std::to_string(i));
    const auto classes = make_class_set(names, features);
    const auto got = zsl_posterior(features, "0", classes, cosine ? Metric::kCosine : Metric::kEuclidean);
    const auto want = oracle::posterior(points[0], {points.begin() + 1, points.end()}, cosine);
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      worst = std::max(worst, std::abs(got[i] - want[i]));
      sum += got[i];
    }
    worst_norm = std::max(worst_norm, std::abs(sum - 1.0));
  }
  report(2, worst <= kPosteriorTol && worst_norm <= kPosteriorTol, "zero-shot posterior oracle",
         fmt("1000 configurations, max |p - oracle| %.3g, max |sum - 1| %.3g (tol %.0e)", worst,
             worst_norm, kPosteriorTol));
}

// ---- 3 --------------------------------------------------------------------

void entropy_invariants() {
  Rng rng(1003);
  bool in_range = true;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t d = 1 + rng.below(4), m = 2 + rng.below(8), n = 1 + rng.below(5);
    std::vector<std::vector<double>> points(n + m, std::vector<double>(d));
    for (auto& p : points) {
      for (auto& v : p) v = rng.uniform(-3, 3);
    }
    const auto features = table_map(points);
    std::vector<std::string> texts, names;
    for (std::size_t i = 0; i < n; ++i) texts.push_back(std::to_string(i));
    for (std::size_t i = 0; i < m; ++i) names.push_back(std::to_string(n + i));
    const double h = conditional_entropy(features, texts, make_class_set(names, features),
                                         trial % 2 ? Metric::kCosine : Metric::kEuclidean);
    in_range = in_range && h >= 0.0 && h <= std::log(static_cast<double>(m)) + kEntropyTol;
  }

  // 25 classes at the unit basis vectors, probe at the origin: uniform
  std::vector<std::vector<double>> basis(26, std::vector<double>(25, 0.0));
  for (std::size_t i = 0; i < 25; ++i) basis[i + 1][i] = 1.0;
  const auto bf = table_map(basis);
  std::vector<std::string> names25;
  for (std::size_t i = 1; i <= 25; ++i) names25.push_back(std::to_string(i));
  const std::vector<std::string> probe{"0"};
  const double uniform =
      conditional_entropy(bf, probe, make_class_set(names25, bf), Metric::kEuclidean);

  // probe on top of class 1 with the others 100 units away: one-hot
  std::vector<std::vector<double>> far{{0, 0}, {0, 0}, {100, 0}, {0, 100}};
  const auto ff = table_map(far);
  const std::vector<std::string> names3{"1", "2", "3"};
  const double one_hot = conditional_entropy(ff, probe, make_class_set(names3, ff), Metric::kEuclidean);

  const double err = std::abs(uniform - std::log(25.0));
  report(3, in_range && err <= kEntropyTol && one_hot < kOneHotEntropy, "entropy invariants",
         fmt("500 random batches within [0, ln M]: %s; uniform M=25 gives %.10f (ln 25 = %.10f, "
             "tol %.0e); one-hot gives %.3g (< %.0e)",
             in_range ? "yes" : "no", uniform, std::log(25.0), kEntropyTol, one_hot, kOneHotEntropy));
}

// ---- 4 --------------------------------------------------------------------

void auc_oracle() {
  Rng rng(1004);
  int cases = 0, mismatches = 0;
  while (cases < 1000) {
    const std::size_t n = 2 + rng.below(9);
    const std::size_t levels = 1 + rng.below(n);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    int pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(rng.below(levels)) / static_cast<double>(levels) +
                  (rng.bernoulli(0.3) ? rng.uniform() : 0.0);
      labels[i] = rng.bernoulli(0.5);
      pos += labels[i];
    }
    if (pos == 0 || pos == static_cast<int>(n)) continue;
    ++cases;
    mismatches += auc_pr(scores, labels) != oracle::auc_pr(scores, labels);
  }
  report(4, mismatches == 0, "AUC-PR oracle", fmt("%d cases of <= 10 points, %d not bit-identical", cases,
                                                   mismatches));
}

// ---- 5-8: synthetic task --------------------------------------------------

struct Pipeline {
  std::string name;
  std::vector<double> auc;
  double mean_auc = 0.0;
};

std::string auc_row(const Pipeline& p) {
  std::string s = fmt("%-22s", p.name.c_str());
  for (double a : p.auc) s += fmt(" %.4f", a);
  return s + fmt("  mean %.4f", p.mean_auc);
}

void synthetic_task() {
  const auto t0 = std::chrono::steady_clock::now();
  SyntheticSpec spec;  // M=5, noise 0.2, 10,000 QCL records, 2,000 utterances
  const auto corpus = generate_synthetic(spec);
  const auto& names = corpus.meta.class_names;
  const std::size_t m = names.size();

  std::vector<std::string> texts;
  for (const auto& r : corpus.qcl) texts.push_back(r.query);
  for (const auto& u : corpus.suc) texts.push_back(u.utterance);
  const std::set<std::string> stops(corpus.meta.stop_words.begin(), corpus.meta.stop_words.end());
  const auto vocab = build_vocabulary(texts, stops, 10000);
  const auto qcl = filter_unknown_queries(corpus.qcl, vocab);
  const auto urls = index_urls(qcl);
  const auto examples = make_examples(qcl, urls, vocab);
  const auto bags = make_class_bags(names, vocab);
  const auto parts = split<LabeledUtterance>(corpus.suc, {0.4, 0.1, 0.5}, 7);
  const auto test_truth = class_indices(parts.test, names);
  const auto valid_truth = class_indices(parts.valid, names);
  std::printf("    synthetic task: %zu QCL records, %zu URLs, vocabulary %zu, "
              "%zu/%zu/%zu labeled train/valid/test\n",
              qcl.size(), urls.size(), vocab.size(), parts.train.size(), parts.valid.size(),
              parts.test.size());

  auto evaluate = [&](const std::string& name, const FeatureMap& f,
                      std::span<const LabeledUtterance> data, std::span<const std::size_t> truth) {
    const auto classes = make_class_set(names, f);
    Pipeline p{name, per_class_auc(zsl_posteriors(f, data, classes, Metric::kEuclidean), truth, m)};
    p.mean_auc = mean(p.auc);
    return p;
  };

  TrainConfig cfg;  // 64 hidden units, 30 epochs, lr 0.1, batch 32
  TrainConfig lr_cfg = cfg;
  lr_cfg.hidden_layers = {};
  const auto lr_model = train(examples, vocab.size(), urls.size(), lr_cfg);
  const auto dnn = train(examples, vocab.size(), urls.size(), cfg);
  const KnowledgeBase dnn_kb(dnn.params, vocab);

  // lambda chosen on the validation split
  double best_lambda = 0.0, best_valid = -1.0;
  TrainResult zde;
  for (double lambda : {0.1, 0.01, 0.001}) {
    TrainConfig z = cfg;
    z.lambda = lambda;
    auto run = train(examples, vocab.size(), urls.size(), z, &bags);
    const KnowledgeBase kb(run.params, vocab);
    const double v = evaluate("", embedding_map(kb), parts.valid, valid_truth).mean_auc;
    std::printf("    ZDE lambda=%g: validation mean AUC %.4f\n", lambda, v);
    if (v > best_valid) {
      best_valid = v;
      best_lambda = lambda;
      zde = std::move(run);
    }
  }
  const KnowledgeBase zde_kb(zde.params, vocab);

  std::vector<std::size_t> class_to_url;
  for (const auto& u : corpus.meta.class_urls) class_to_url.push_back(urls.at(u.front()));
  Pipeline rep{"representative URL", {}, 0.0};
  {
    std::vector<std::vector<double>> post;
    for (const auto& u : parts.test) {
      post.push_back(representative_url_posterior(dnn.params, dnn_kb.input(u.utterance), class_to_url));
    }
    rep.auc = per_class_auc(post, test_truth, m);
    rep.mean_auc = mean(rep.auc);
  }

  const auto bow = evaluate("bag of words", bow_map(vocab), parts.test, test_truth);
  const auto lr_post = evaluate("posterior P(Y|X) (LR)", posterior_map(lr_model.params, vocab),
                                parts.test, test_truth);
  const auto dnn_post = evaluate("posterior P(Y|X) (DNN)", posterior_map(dnn.params, vocab),
                                 parts.test, test_truth);
  const auto dnn_emb = evaluate("DNN embedding", embedding_map(dnn_kb), parts.test, test_truth);
  const auto zde_emb = evaluate(fmt("ZDE embedding (l=%g)", best_lambda), embedding_map(zde_kb),
                                parts.test, test_truth);
  std::string header = fmt("%-22s", "per-class AUC");
  for (const auto& n : names) header += fmt(" %6s", n.c_str());
  std::printf("    %s\n", header.c_str());
  for (const Pipeline* p : std::vector<const Pipeline*>{&bow, &rep, &lr_post, &dnn_post, &dnn_emb, &zde_emb}) {
    std::printf("    %s\n", auc_row(*p).c_str());
  }

  const double post_hi = std::max(lr_post.mean_auc, dnn_post.mean_auc);
  const double post_lo = std::min(lr_post.mean_auc, dnn_post.mean_auc);
  const double dt5 = seconds_since(t0);
  const bool ordering = zde_emb.mean_auc >= dnn_emb.mean_auc && dnn_emb.mean_auc > post_hi &&
                        post_lo > bow.mean_auc;
  report(5,
         ordering && zde_emb.mean_auc >= kZdeMinAuc && bow.mean_auc <= zde_emb.mean_auc - kBowGap &&
             dt5 < 300.0,
         "synthetic zero-shot ordering",
         fmt("mean AUC ZDE %.4f >= DNN emb %.4f > posterior %.4f/%.4f > bow %.4f: %s; "
             "ZDE >= %.2f; bow <= ZDE - %.2f; %.1fs (limit 300s)",
             zde_emb.mean_auc, dnn_emb.mean_auc, lr_post.mean_auc, dnn_post.mean_auc, bow.mean_auc,
             ordering ? "yes" : "no", kZdeMinAuc, kBowGap, dt5));

  // 6: same seed, lambda > 0 versus lambda = 0, over the full QCL data
  const double h_dnn = batch_entropy(dnn.params, examples, bags, Metric::kEuclidean);
  const double h_zde = batch_entropy(zde.params, examples, bags, Metric::kEuclidean);
  const double nll_dnn = dnn.log.back().nll, nll_zde = zde.log.back().nll;
  const double degradation = (nll_zde - nll_dnn) / nll_dnn;
  report(6, h_zde < h_dnn && degradation < kNllDegradation, "entropy regularization",
         fmt("conditional entropy %.4f (lambda=%g) < %.4f (lambda=0); QCL NLL %.4f vs %.4f, "
             "relative change %+.2f%% (limit %.0f%%)",
             h_zde, best_lambda, h_dnn, nll_zde, nll_dnn, 100.0 * degradation,
             100.0 * kNllDegradation));

  // 7: linear classifier on bow versus bow + embedding
  TrainConfig linear = cfg;
  linear.epochs = 50;
  const auto train_truth = class_indices(parts.train, names);
  std::vector<std::vector<double>> bow_train, aug_train, bow_test, aug_test;
  for (const auto& u : parts.train) {
    const auto b = featurize(u.utterance, vocab);
    bow_train.push_back(b.dense());
    aug_train.push_back(augment_features(b, dnn_kb.embed(u.utterance)));
  }
  for (const auto& u : parts.test) {
    const auto b = featurize(u.utterance, vocab);
    bow_test.push_back(b.dense());
    aug_test.push_back(augment_features(b, dnn_kb.embed(u.utterance)));
  }
  const auto bow_clf = train_linear_classifier(bow_train, train_truth, m, linear);
  const auto aug_clf = train_linear_classifier(aug_train, train_truth, m, linear);
  std::vector<std::size_t> bow_pred, aug_pred, bayes_pred;
  for (std::size_t i = 0; i < bow_test.size(); ++i) {
    bow_pred.push_back(bow_clf.predict(bow_test[i]));
    aug_pred.push_back(aug_clf.predict(aug_test[i]));
    bayes_pred.push_back(bayes_classify(corpus.meta, parts.test[i].utterance));
  }
  const double bow_err = error_rate(bow_pred, test_truth);
  const double aug_err = error_rate(aug_pred, test_truth);
  report(7, aug_err <= bow_err, "feature augmentation",
         fmt("test error bow+embedding %.4f <= bow %.4f (Bayes-optimal %.4f)", aug_err, bow_err,
             error_rate(bayes_pred, test_truth)));

  // 8: supervised learning curve against the label-free zero-shot line
  const std::vector<std::size_t> sizes{5, 10, 20, 50, 100, 200, 400, parts.train.size()};
  const auto curve = learning_curve(parts.train, parts.test, vocab, embedding_map(dnn_kb),
                                    make_class_set(names, dnn_kb), sizes, linear,
                                    Metric::kEuclidean);
  std::string points;
  for (const auto& p : curve.points) points += fmt(" %zu:%.4f", p.size, p.supervised_auc);
  std::printf("    learning curve (supervised mean AUC):%s; zero-shot %.4f\n", points.c_str(),
              curve.zsl_auc);
  const bool crossover = curve.points.front().supervised_auc < curve.zsl_auc &&
                         curve.points.back().supervised_auc > curve.zsl_auc;
  report(8, crossover, "learning-curve crossover",
         fmt("supervised %.4f at %zu labels < zero-shot %.4f < supervised %.4f at %zu labels",
             curve.points.front().supervised_auc, curve.points.front().size, curve.zsl_auc,
             curve.points.back().supervised_auc, curve.points.back().size));
}

// ---- 9 --------------------------------------------------------------------

int cli(const std::vector<std::string>& args) {
  std::istringstream in;
  std::ostringstream out, err;
  const int code = run_cli(args, in, out, err);
  if (code != 0) std::printf("    command failed (%d): %s\n", code, err.str().c_str());
  return code;
}

void determinism() {
  const fs::path root = fs::temp_directory_path() / ("zsuc_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  bool ok = true;
  for (const char* run : {"a", "b"}) {
    const auto d = [&](const std::string& f) { return (root / run / f).string(); };
    fs::create_directories(root / run);
    ok = ok &&
         cli({"synth", "--out-dir", d("syn"), "--queries-per-class", "400",
              "--utterances-per-class", "100", "--seed", "9"}) == 0 &&
         cli({"build-vocab", "--corpus", d("syn/qcl.tsv"), "--corpus", d("syn/suc.tsv"),
              "--stopwords", d("syn/stopwords.txt"), "--out", d("vocab.txt")}) == 0 &&
         cli({"split", "--input", d("syn/suc.tsv"), "--fractions", "0.5,0,0.5", "--seed", "3",
              "--out-prefix", d("suc")}) == 0 &&
         cli({"train", "--qcl", d("syn/qcl.tsv"), "--vocab", d("vocab.txt"), "--layers", "16",
              "--epochs", "4", "--dropout", "0.1", "--lambda", "0.01", "--classes",
              d("syn/classes.txt"), "--seed", "5", "--out", d("model.bin")}) == 0 &&
         cli({"eval", "--model", d("model.bin"), "--vocab", d("vocab.txt"), "--classes",
              d("syn/classes.txt"), "--suc", d("suc.test.tsv"), "--out", d("auc.json")}) == 0 &&
         cli({"eval", "--model", d("model.bin"), "--vocab", d("vocab.txt"), "--classes",
              d("syn/classes.txt"), "--suc", d("suc.test.tsv"), "--mode", "curve",
              "--train-suc", d("suc.train.tsv"), "--sizes", "5,50", "--epochs", "5", "--out",
              d("curve.json")}) == 0;
  }
  const std::vector<std::string> files{
      "syn/qcl.tsv",      "syn/suc.tsv",       "syn/meta.json", "vocab.txt",
      "suc.train.tsv",    "suc.test.tsv",      "model.bin",     "model.bin.log.csv",
      "auc.json",         "curve.json",        "curve.json.curve.csv"};
  std::size_t identical = 0;
  if (ok) {
    for (const auto& f : files) {
      const bool same = read_file(root / "a" / f) == read_file(root / "b" / f);
      if (!same) std::printf("    differs: %s\n", f.c_str());
      identical += same;
    }
  }
  fs::remove_all(root);
  report(9, ok && identical == files.size(), "determinism",
         fmt("two full command-line runs, %zu/%zu artifacts byte-identical "
             "(corpora, vocabulary, splits, model, training log, reports)",
             identical, files.size()));
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void()>>> steps{
      {"gradient correctness", gradient_check}, {"posterior oracle", posterior_oracle},
      {"entropy invariants", entropy_invariants}, {"AUC oracle", auc_oracle},
      {"synthetic task", synthetic_task},        {"determinism", determinism}};
  for (const auto& [name, step] : steps) {
    try {
      step();
    } catch (const std::exception& e) {
      std::printf("[FAIL] %s: exception: %s\n", name, e.what());
      ++failures;
    }
  }
  std::printf("%s: %d failing criteria\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures == 0 ? 0 : 1;
}
