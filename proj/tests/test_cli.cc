#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "zsuc/cli.h"
#include "zsuc/io.h"
#include "zsuc/model.h"
#include "zsuc/text.h"
#include "zsuc/zsl.h"

using namespace zsuc;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = run_cli(args, in, out, err);
  return {code, out.str(), err.str()};
}

// Scratch directory holding a small synthetic corpus, its vocabulary and a
// trained model, shared by the tests below.
struct Fixture {
  fs::path dir;
  std::string s(const std::string& name) const { return (dir / name).string(); }

  Fixture() {
    dir = fs::temp_directory_path() / ("zsuc_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    REQUIRE(run({"synth", "--out-dir", s("syn"), "--queries-per-class", "120",
                 "--utterances-per-class", "40", "--seed", "4"})
                .code == 0);
    REQUIRE(run({"build-vocab", "--corpus", s("syn/qcl.tsv"), "--corpus", s("syn/suc.tsv"),
                 "--stopwords", s("syn/stopwords.txt"), "--out", s("vocab.txt")})
                .code == 0);
    REQUIRE(run({"train", "--qcl", s("syn/qcl.tsv"), "--vocab", s("vocab.txt"), "--layers", "8",
                 "--epochs", "3", "--out", s("model.bin")})
                .code == 0);
  }
  ~Fixture() { fs::remove_all(dir); }
};

std::vector<std::string> lines_of(const std::string& text) { return split_lines(text); }

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, '\t')) out.push_back(f);
  return out;
}

}  // namespace

TEST_CASE("usage errors exit 1, help exits 0") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"train"}).code == 1);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"train", "--help"}).code == 0);
}

TEST_CASE_FIXTURE(Fixture, "synth writes the corpus files deterministically") {
  for (const char* f : {"qcl.tsv", "suc.tsv", "classes.txt", "url_map.tsv", "stopwords.txt",
                        "meta.json", "manifest.json"}) {
    CHECK(fs::exists(dir / "syn" / f));
  }
  REQUIRE(run({"synth", "--out-dir", s("syn2"), "--queries-per-class", "120",
               "--utterances-per-class", "40", "--seed", "4"})
              .code == 0);
  for (const char* f : {"qcl.tsv", "suc.tsv", "classes.txt", "meta.json"}) {
    CHECK(read_file(dir / "syn" / f) == read_file(dir / "syn2" / f));
  }
  CHECK(run({"synth", "--out-dir", s("bad"), "--num-classes", "1"}).code == 1);
}

TEST_CASE_FIXTURE(Fixture, "build-vocab output, determinism and errors") {
  const auto bytes = read_file(s("vocab.txt"));
  CHECK(bytes.rfind("V=", 0) == 0);
  REQUIRE(run({"build-vocab", "--corpus", s("syn/qcl.tsv"), "--corpus", s("syn/suc.tsv"),
               "--stopwords", s("syn/stopwords.txt"), "--out", s("vocab2.txt")})
              .code == 0);
  CHECK(read_file(s("vocab2.txt")) == bytes);

  const auto manifest = nlohmann::json::parse(read_file(s("vocab.txt.manifest.json")));
  CHECK(manifest["command"] == "build-vocab");
  CHECK(manifest["inputs"]["stopwords"]["hash"] == file_hash(s("syn/stopwords.txt")));

  write_file(s("stops_only.txt"), "the of\nof the the\n");
  const auto r = run({"build-vocab", "--corpus", s("stops_only.txt"), "--stopwords",
                      s("syn/stopwords.txt"), "--out", s("v3.txt")});
  CHECK(r.code == 2);
  CHECK(r.err.find("empty vocabulary") != std::string::npos);
  CHECK(run({"build-vocab", "--corpus", s("missing.txt"), "--out", s("v4.txt")}).code == 2);
}

TEST_CASE_FIXTURE(Fixture, "train writes a model, a log and a manifest") {
  const auto log = read_file(s("model.bin.log.csv"));
  CHECK(log.rfind("epoch,nll\n", 0) == 0);
  CHECK(lines_of(log).size() == 5);
  const auto model = parse_model(read_file(s("model.bin")));
  CHECK(model.vocab_hash == Vocabulary::parse(read_file(s("vocab.txt"))).hash());
  CHECK(model.params.layer_sizes[1] == 8);
  const auto manifest = nlohmann::json::parse(read_file(s("model.bin.manifest.json")));
  CHECK(manifest["config"]["epochs"] == 3);
  CHECK(manifest["inputs"]["qcl"]["hash"] == file_hash(s("syn/qcl.tsv")));

  REQUIRE(run({"train", "--qcl", s("syn/qcl.tsv"), "--vocab", s("vocab.txt"), "--layers", "8",
               "--epochs", "3", "--out", s("model2.bin")})
              .code == 0);
  CHECK(read_file(s("model2.bin")) == read_file(s("model.bin")));
}

TEST_CASE_FIXTURE(Fixture, "entropy-regularized training via the command line") {
  CHECK(run({"train", "--qcl", s("syn/qcl.tsv"), "--vocab", s("vocab.txt"), "--lambda", "0.01",
             "--out", s("z.bin")})
            .code == 1);
  REQUIRE(run({"train", "--qcl", s("syn/qcl.tsv"), "--vocab", s("vocab.txt"), "--layers", "8",
               "--lambda", "0.01", "--classes", s("syn/classes.txt"), "--epochs", "5",
               "--out", s("z.bin")})
              .code == 0);
  const auto rows = lines_of(read_file(s("z.bin.log.csv")));
  CHECK(rows.front() == "epoch,nll,entropy");
  std::vector<std::string> a, b;
  std::stringstream sa(rows[1]), sb(rows.back());
  std::string f;
  while (std::getline(sa, f, ',')) a.push_back(f);
  while (std::getline(sb, f, ',')) b.push_back(f);
  REQUIRE(a.size() == 3);
  CHECK(parse_double(b[2]) < parse_double(a[2]));
}

TEST_CASE_FIXTURE(Fixture, "train rejects bad flags and data") {
  CHECK(run({"train", "--qcl", s("syn/qcl.tsv"), "--vocab", s("vocab.txt"), "--layers", "8,x",
             "--out", s("m.bin")})
            .code == 1);
  CHECK(run({"train", "--qcl", s("syn/qcl.tsv"), "--vocab", s("vocab.txt"), "--metric", "manhattan",
             "--out", s("m.bin")})
            .code == 1);
  CHECK(run({"train", "--qcl", s("syn/qcl.tsv"), "--vocab", s("vocab.txt"), "--dropout", "1.5",
             "--out", s("m.bin")})
            .code == 1);
  write_file(s("bad.tsv"), "query without tab\n");
  const auto r = run({"train", "--qcl", s("bad.tsv"), "--vocab", s("vocab.txt"), "--out", s("m.bin")});
  CHECK(r.code == 2);
  CHECK(r.err.find("line 1") != std::string::npos);
  // a huge step size drives the parameters to infinity
  CHECK(run({"train", "--qcl", s("syn/qcl.tsv"), "--vocab", s("vocab.txt"), "--layers", "none",
             "--lr", "1e308", "--epochs", "2", "--out", s("m.bin")})
            .code == 3);
}

TEST_CASE_FIXTURE(Fixture, "classify prints a class and a normalized posterior per line") {
  const auto classes = parse_class_names(read_file(s("syn/classes.txt")));
  const auto r = run({"classify", "--model", s("model.bin"), "--vocab", s("vocab.txt"),
                      "--classes", s("syn/classes.txt")},
                     "first utterance\n" + classes[2] + "\n");
  REQUIRE(r.code == 0);
  const auto rows = lines_of(r.out);
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) {
    const auto f = fields(row);
    REQUIRE(f.size() == classes.size() + 1);
    CHECK(std::find(classes.begin(), classes.end(), f[0]) != classes.end());
    double sum = 0.0;
    for (std::size_t i = 1; i < f.size(); ++i) sum += parse_double(f[i]);
    CHECK(std::abs(sum - 1.0) <= 1e-6);
  }
  // a class name is closest to itself
  CHECK(fields(rows[1])[0] == classes[2]);
}

TEST_CASE_FIXTURE(Fixture, "classify on an equidistant case prints one half each") {
  const Vocabulary vocab({"alpha", "beta", "gamma"}, {});
  write_file(s("tiny_vocab.txt"), vocab.serialize());
  Model m;
  m.params = zeros_like(init_params(std::vector<std::size_t>{3, 3, 2}, 1));
  for (std::size_t i = 0; i < 3; ++i) m.params.layers[0].weights(i, i) = 1.0;
  m.config.hidden_layers = {3};
  m.vocab_hash = vocab.hash();
  m.url_labels = {"u0", "u1"};
  write_file(s("tiny.bin"), serialize_model(m));
  write_file(s("tiny_classes.txt"), "alpha\nbeta\n");
  const auto r = run({"classify", "--model", s("tiny.bin"), "--vocab", s("tiny_vocab.txt"),
                      "--classes", s("tiny_classes.txt")},
                     "gamma\n");
  REQUIRE(r.code == 0);
  CHECK(r.out == "alpha\t0.500000000\t0.500000000\n");
}

TEST_CASE_FIXTURE(Fixture, "classify errors") {
  REQUIRE(run({"train", "--qcl", s("syn/qcl.tsv"), "--vocab", s("vocab.txt"), "--layers", "none",
               "--epochs", "1", "--out", s("lr.bin")})
              .code == 0);
  const auto r = run({"classify", "--model", s("lr.bin"), "--vocab", s("vocab.txt"), "--classes",
                      s("syn/classes.txt")},
                     "x\n");
  CHECK(r.code == 2);
  CHECK(r.err.find("no embedding layer") != std::string::npos);

  write_file(s("other_vocab.txt"), Vocabulary({"a", "b"}, {}).serialize());
  const auto m = run({"classify", "--model", s("model.bin"), "--vocab", s("other_vocab.txt"),
                      "--classes", s("syn/classes.txt")},
                     "x\n");
  CHECK(m.code == 2);
  CHECK(m.err.find("hash mismatch") != std::string::npos);

  write_file(s("oov_classes.txt"), "zzzzqq\nyyyyqq\n");
  CHECK(run({"classify", "--model", s("model.bin"), "--vocab", s("vocab.txt"), "--classes",
             s("oov_classes.txt")},
            "x\n")
            .code == 2);
}

TEST_CASE_FIXTURE(Fixture, "eval modes write reports") {
  const std::vector<std::string> base{"eval", "--model", s("model.bin"), "--vocab", s("vocab.txt"),
                                      "--classes", s("syn/classes.txt"), "--suc", s("syn/suc.tsv")};
  auto with = [&](std::vector<std::string> extra) {
    auto args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    return run(args);
  };
  REQUIRE(with({"--mode", "auc", "--out", s("auc.json")}).code == 0);
  const auto auc = nlohmann::json::parse(read_file(s("auc.json")));
  CHECK(auc["per_class_auc"].size() == 5);
  CHECK(auc["metadata"]["model_hash"] == file_hash(s("model.bin")));
  CHECK(auc["metadata"]["dataset_hash"] == file_hash(s("syn/suc.tsv")));
  CHECK(auc["mean_auc"].get<double>() >= 0.0);

  for (const char* f : {"bow", "posterior"}) {
    CHECK(with({"--feature", f, "--out", s(std::string(f) + ".json")}).code == 0);
  }
  CHECK(with({"--feature", "representative", "--url-map", s("syn/url_map.tsv"), "--out",
              s("rep.json")})
            .code == 0);
  CHECK(with({"--feature", "representative", "--out", s("rep.json")}).code == 1);

  REQUIRE(with({"--mode", "error", "--feature", "augmented", "--train-suc", s("syn/suc.tsv"),
                "--epochs", "2", "--out", s("err.json")})
              .code == 0);
  const auto err = nlohmann::json::parse(read_file(s("err.json")));
  CHECK(err["error_rate"].get<double>() <= 1.0);
  CHECK_FALSE(err.contains("per_class_auc"));
  CHECK(with({"--mode", "error", "--out", s("err.json")}).code == 1);

  REQUIRE(with({"--mode", "curve", "--feature", "embedding", "--train-suc", s("syn/suc.tsv"),
                "--sizes", "5,50", "--epochs", "2", "--out", s("curve.json")})
              .code == 0);
  const auto curve = read_file(s("curve.json.curve.csv"));
  CHECK(curve.find("supervised,5,") != std::string::npos);
  CHECK(curve.find("zsl,50,") != std::string::npos);

  CHECK(with({"--mode", "bogus", "--out", s("x.json")}).code == 1);
}

TEST_CASE_FIXTURE(Fixture, "nn prints k lines per probe") {
  const auto classes = parse_class_names(read_file(s("syn/classes.txt")));
  const auto r = run({"nn", "--model", s("model.bin"), "--vocab", s("vocab.txt"), "--probe",
                      classes[0], "--probe", classes[1], "--k", "5"});
  REQUIRE(r.code == 0);
  const auto rows = lines_of(r.out);
  REQUIRE(rows.size() == 10);
  for (std::size_t i = 0; i < 5; ++i) {
    const auto f = fields(rows[i]);
    REQUIRE(f.size() == 4);
    CHECK(f[0] == classes[0]);
    CHECK(f[1] == std::to_string(i + 1));
    CHECK(f[2] != classes[0]);
  }
  CHECK(run({"nn", "--model", s("model.bin"), "--vocab", s("vocab.txt"), "--probe", "x", "--k",
             "100000"})
            .code == 1);
}

TEST_CASE_FIXTURE(Fixture, "export writes one row per text plus class rows") {
  REQUIRE(run({"train", "--qcl", s("syn/qcl.tsv"), "--vocab", s("vocab.txt"), "--layers", "6,2",
               "--epochs", "1", "--out", s("d2.bin")})
              .code == 0);
  write_file(s("texts.tsv"), "first text\tl1\nsecond\tl2\nthird\tl1\n");
  REQUIRE(run({"export", "--model", s("d2.bin"), "--vocab", s("vocab.txt"), "--input",
               s("texts.tsv"), "--classes", s("syn/classes.txt"), "--out", s("emb.csv")})
              .code == 0);
  const auto rows = lines_of(read_file(s("emb.csv")));
  REQUIRE(rows.size() == 1 + 3 + 5);
  CHECK(rows[0] == "text,label,is_class,e0,e1");
  CHECK(rows[1].rfind("first text,l1,0,", 0) == 0);
}

TEST_CASE_FIXTURE(Fixture, "split writes three partitions") {
  REQUIRE(run({"split", "--input", s("syn/suc.tsv"), "--fractions", "0.8,0.1,0.1", "--seed", "3",
               "--out-prefix", s("part")})
              .code == 0);
  const auto train = lines_of(read_file(s("part.train.tsv")));
  const auto valid = lines_of(read_file(s("part.valid.tsv")));
  const auto test = lines_of(read_file(s("part.test.tsv")));
  CHECK(train.size() == 160);
  CHECK(valid.size() == 20);
  CHECK(test.size() == 20);
  CHECK(run({"split", "--input", s("syn/suc.tsv"), "--fractions", "0.8,0.3,0.1", "--out-prefix",
             s("p2")})
            .code == 1);
  CHECK(run({"split", "--input", s("syn/suc.tsv"), "--fractions", "0.5,0.5", "--out-prefix",
             s("p2")})
            .code == 1);
}
