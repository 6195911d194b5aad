#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "zsuc/net.h"
#include "zsuc/random.h"
#include "zsuc/text.h"

namespace zsuc {

// One query-click log entry.
struct QclRecord {
  std::string query;
  std::string url;
  friend bool operator==(const QclRecord&, const QclRecord&) = default;
};

struct LabeledUtterance {
  std::string utterance;
  std::string class_name;
  friend bool operator==(const LabeledUtterance&, const LabeledUtterance&) = default;
};

// URL labels densely indexed by first appearance.
struct UrlIndex {
  std::vector<std::string> names;
  std::unordered_map<std::string, std::size_t> index;

  std::size_t size() const { return names.size(); }
  // Throws DataError for an unknown URL.
  std::size_t at(const std::string& url) const;
};

UrlIndex index_urls(std::span<const QclRecord> records);

struct QclCorpus {
  std::vector<QclRecord> records;
  UrlIndex urls;
};

// `query<TAB>url` lines; blank lines skipped. Malformed lines (no TAB, more
// than one TAB, empty field) throw DataError naming the line number.
QclCorpus parse_qcl(std::string_view bytes);
QclCorpus load_qcl(const std::filesystem::path& path);
std::string serialize_qcl(std::span<const QclRecord> records);

// `utterance<TAB>class_name` lines, same rules as the QCL format.
std::vector<LabeledUtterance> parse_suc(std::string_view bytes);
std::vector<LabeledUtterance> load_suc(const std::filesystem::path& path);
std::string serialize_suc(std::span<const LabeledUtterance> records);

// Keeps records whose URL is among the k most frequent (ties lexicographic).
std::vector<QclRecord> restrict_top_urls(std::span<const QclRecord> records,
                                         std::size_t k);

// Drops records whose query has no in-vocabulary token.
std::vector<QclRecord> filter_unknown_queries(std::span<const QclRecord> records,
                                              const Vocabulary& vocab);

// Network examples with labels taken from `urls`.
std::vector<Example> make_examples(std::span<const QclRecord> records,
                                   const UrlIndex& urls, const Vocabulary& vocab,
                                   bool binary = false);

template <typename T>
struct Partition {
  std::vector<T> train;
  std::vector<T> valid;
  std::vector<T> test;
};

// Seeded shuffle followed by contiguous train/valid/test slices.
template <typename T>
Partition<T> split(std::span<const T> records, std::array<double, 3> fractions,
                   std::uint64_t seed) {
  double sum = 0.0;
  for (double f : fractions) {
    if (!(f >= 0.0)) throw std::invalid_argument("fractions must be non-negative");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("fractions must sum to 1");
  }
  std::vector<T> shuffled(records.begin(), records.end());
  Rng rng(seed);
  rng.shuffle(shuffled);
  const auto n = static_cast<double>(shuffled.size());
  const auto n_train = std::min(shuffled.size(),
                                static_cast<std::size_t>(std::llround(n * fractions[0])));
  const auto n_valid = std::min(shuffled.size() - n_train,
                                static_cast<std::size_t>(std::llround(n * fractions[1])));
  Partition<T> out;
  auto it = shuffled.begin();
  out.train.assign(it, it + static_cast<std::ptrdiff_t>(n_train));
  it += static_cast<std::ptrdiff_t>(n_train);
  out.valid.assign(it, it + static_cast<std::ptrdiff_t>(n_valid));
  it += static_cast<std::ptrdiff_t>(n_valid);
  out.test.assign(it, shuffled.end());
  return out;
}

// Generative model of a desk-scale query-click log and labeled utterance
// set. Every class owns a disjoint word pool and URL set; class names are
// words from the class's own pool. URL 0 of a class is its portal; the others
// are topic sites, each tied to a subset of the pool words.
struct SyntheticSpec {
  std::size_t num_classes = 5;
  std::size_t words_per_class = 40;
  std::size_t shared_words = 30;
  std::size_t urls_per_class = 8;
  std::size_t queries_per_class = 2000;
  std::size_t utterances_per_class = 400;
  std::size_t class_name_tokens = 1;
  // Probability that a content word comes from the shared pool.
  double noise_rate = 0.2;
  // Probability that a click goes to the class portal rather than the topic
  // site of one of the query's words.
  double portal_click_rate = 0.3;
  // Probability that a click goes to the portal of the paired class (0<->1, 2<->3,
  // ...); such pairs are hard to tell apart from click data alone.
  double cross_click_rate = 0.15;
  // Probability that a token is a stop word.
  double stopword_rate = 0.1;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SyntheticMetadata {
  SyntheticSpec spec;
  std::vector<std::string> class_names;
  std::vector<std::vector<std::string>> word_pools;
  std::vector<std::string> shared_pool;
  std::vector<std::string> stop_words;
  std::vector<std::vector<std::string>> class_urls;  // portal first
};

struct SyntheticCorpus {
  std::vector<QclRecord> qcl;
  std::vector<LabeledUtterance> suc;
  SyntheticMetadata meta;
};

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);

// Structured (JSON) description of pools, URLs and the echoed spec.
std::string serialize_metadata(const SyntheticMetadata& meta);

// Topic site (URL position within its class) of the pool word at
// `pool_position`.
std::size_t topic_site(std::size_t pool_position, std::size_t urls_per_class);

// Index of the paired class, or the class itself when it has no partner.
std::size_t sibling_class(std::size_t cls, std::size_t num_classes);

// Exact maximum-posterior class under the generative model (uniform prior,
// ties to the lowest index). This is the Bayes-optimal classifier.
std::size_t bayes_classify(const SyntheticMetadata& meta, std::string_view text);

}  // namespace zsuc
