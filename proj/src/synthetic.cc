#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

#include "json.hpp"
#include "zsuc/data.h"

namespace zsuc {
namespace {

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";

const std::vector<std::string>& synthetic_stop_words() {
  static const std::vector<std::string> words = {
      "a", "and", "at", "for", "in", "of", "on", "the", "to", "with"};
  return words;
}

// Pronounceable pseudo-words, unique across every pool of one corpus.
class WordFactory {
 public:
  explicit WordFactory(Rng& rng) : rng_(rng) {}

  std::string next(std::size_t syllables) {
    while (true) {
      std::string w;
      for (std::size_t s = 0; s < syllables; ++s) {
        w += kConsonants[rng_.below(kConsonants.size())];
        w += kVowels[rng_.below(kVowels.size())];
      }
      if (used_.insert(w).second) return w;
    }
  }

 private:
  Rng& rng_;
  std::set<std::string> used_;
};

struct Generator {
  const SyntheticMetadata& meta;
  Rng& rng;

  // A query plus the class-pool words it contains (by pool position).
  std::string text(std::size_t cls, std::vector<std::size_t>* pool_words = nullptr) {
    const auto& spec = meta.spec;
    const auto& pool = meta.word_pools[cls];
    const auto& stops = meta.stop_words;
    while (true) {
      const std::size_t length = rng.between(3, 8);
      std::string out;
      bool has_content = false;
      if (pool_words != nullptr) pool_words->clear();
      for (std::size_t i = 0; i < length; ++i) {
        const std::string* word;
        if (rng.bernoulli(spec.stopword_rate)) {
          word = &stops[rng.below(stops.size())];
        } else if (!meta.shared_pool.empty() && rng.bernoulli(spec.noise_rate)) {
          word = &meta.shared_pool[rng.below(meta.shared_pool.size())];
          has_content = true;
        } else {
          const std::size_t j = rng.below(pool.size());
          word = &pool[j];
          if (pool_words != nullptr) pool_words->push_back(j);
          has_content = true;
        }
        if (!out.empty()) out += ' ';
        out += *word;
      }
      if (has_content) return out;
    }
  }

  // The clicked site: the class portal, or the topic site of one of the
  // query's pool words; with cross_click_rate the paired class's portal.
  std::string url(std::size_t cls, const std::vector<std::size_t>& pool_words) {
    const auto& spec = meta.spec;
    if (spec.cross_click_rate > 0.0 && rng.bernoulli(spec.cross_click_rate)) {
      return meta.class_urls[sibling_class(cls, spec.num_classes)].front();
    }
    const auto& urls = meta.class_urls[cls];
    if (urls.size() == 1 || pool_words.empty() ||
        rng.bernoulli(spec.portal_click_rate)) {
      return urls.front();
    }
    const std::size_t word = pool_words[rng.below(pool_words.size())];
    return urls[topic_site(word, urls.size())];
  }
};

}  // namespace

void SyntheticSpec::validate() const {
  if (num_classes < 2) throw std::invalid_argument("num_classes must be >= 2");
  if (words_per_class == 0) throw std::invalid_argument("words_per_class must be positive");
  if (urls_per_class == 0) throw std::invalid_argument("urls_per_class must be positive");
  if (queries_per_class == 0) throw std::invalid_argument("queries_per_class must be positive");
  if (class_name_tokens < 1 || class_name_tokens > 2 ||
      class_name_tokens > words_per_class) {
    throw std::invalid_argument("class_name_tokens must be 1 or 2");
  }
  auto unit = [](double v) { return v >= 0.0 && v < 1.0; };
  if (!unit(noise_rate)) throw std::invalid_argument("noise_rate must be in [0, 1)");
  if (!unit(cross_click_rate)) {
    throw std::invalid_argument("cross_click_rate must be in [0, 1)");
  }
  if (!(portal_click_rate >= 0.0 && portal_click_rate <= 1.0)) {
    throw std::invalid_argument("portal_click_rate must be in [0, 1]");
  }
  if (!unit(stopword_rate)) throw std::invalid_argument("stopword_rate must be in [0, 1)");
  if (noise_rate > 0.0 && shared_words == 0) {
    throw std::invalid_argument("noise_rate > 0 needs shared words");
  }
}

std::size_t topic_site(std::size_t pool_position, std::size_t urls_per_class) {
  return urls_per_class == 1 ? 0 : 1 + pool_position % (urls_per_class - 1);
}

std::size_t sibling_class(std::size_t cls, std::size_t num_classes) {
  const std::size_t partner = cls ^ 1U;
  return partner < num_classes ? partner : cls;
}

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  SyntheticCorpus corpus;
  auto& meta = corpus.meta;
  meta.spec = spec;
  meta.stop_words = synthetic_stop_words();

  Rng vocab_rng(mix_seed(spec.seed, 11));
  WordFactory words(vocab_rng);
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    std::vector<std::string> pool;
    for (std::size_t j = 0; j < spec.words_per_class; ++j) pool.push_back(words.next(2));
    meta.word_pools.push_back(std::move(pool));
  }
  for (std::size_t j = 0; j < spec.shared_words; ++j) {
    meta.shared_pool.push_back(words.next(2));
  }
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    std::string name;
    for (std::size_t t = 0; t < spec.class_name_tokens; ++t) {
      if (t) name += ' ';
      name += meta.word_pools[c][t];
    }
    meta.class_names.push_back(std::move(name));
    std::vector<std::string> urls;
    for (std::size_t u = 0; u < spec.urls_per_class; ++u) {
      urls.push_back("www." + words.next(3) + ".com");
    }
    meta.class_urls.push_back(std::move(urls));
  }

  Rng qcl_rng(mix_seed(spec.seed, 12));
  Generator qcl_gen{meta, qcl_rng};
  std::vector<std::size_t> pool_words;
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    for (std::size_t q = 0; q < spec.queries_per_class; ++q) {
      auto query = qcl_gen.text(c, &pool_words);
      corpus.qcl.push_back({std::move(query), qcl_gen.url(c, pool_words)});
    }
  }
  qcl_rng.shuffle(corpus.qcl);

  Rng suc_rng(mix_seed(spec.seed, 13));
  Generator suc_gen{meta, suc_rng};
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    for (std::size_t q = 0; q < spec.utterances_per_class; ++q) {
      corpus.suc.push_back({suc_gen.text(c), meta.class_names[c]});
    }
  }
  suc_rng.shuffle(corpus.suc);
  return corpus;
}

std::string serialize_metadata(const SyntheticMetadata& meta) {
  using nlohmann::ordered_json;
  const auto& s = meta.spec;
  ordered_json j;
  j["spec"] = {{"num_classes", s.num_classes},
               {"words_per_class", s.words_per_class},
               {"shared_words", s.shared_words},
               {"urls_per_class", s.urls_per_class},
               {"queries_per_class", s.queries_per_class},
               {"utterances_per_class", s.utterances_per_class},
               {"class_name_tokens", s.class_name_tokens},
               {"noise_rate", s.noise_rate},
               {"portal_click_rate", s.portal_click_rate},
               {"cross_click_rate", s.cross_click_rate},
               {"stopword_rate", s.stopword_rate},
               {"seed", s.seed}};
  ordered_json classes = ordered_json::array();
  for (std::size_t c = 0; c < meta.class_names.size(); ++c) {
    classes.push_back({{"name", meta.class_names[c]},
                       {"sibling", meta.class_names[sibling_class(c, s.num_classes)]},
                       {"representative_url", meta.class_urls[c].front()},
                       {"urls", meta.class_urls[c]},
                       {"words", meta.word_pools[c]}});
  }
  j["classes"] = classes;
  j["shared_words"] = meta.shared_pool;
  j["stop_words"] = meta.stop_words;
  return j.dump(2) + "\n";
}

std::size_t bayes_classify(const SyntheticMetadata& meta, std::string_view text) {
  const auto& s = meta.spec;
  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::unordered_map<std::string, std::ptrdiff_t> owner;  // -1 shared, -2 stop
  for (std::size_t c = 0; c < meta.word_pools.size(); ++c) {
    for (const auto& w : meta.word_pools[c]) owner[w] = static_cast<std::ptrdiff_t>(c);
  }
  for (const auto& w : meta.shared_pool) owner[w] = -1;
  for (const auto& w : meta.stop_words) owner[w] = -2;

  const double content = 1.0 - s.stopword_rate;
  const double log_pool = std::log(content * (1.0 - s.noise_rate) /
                                   static_cast<double>(s.words_per_class));
  std::vector<double> ll(s.num_classes, 0.0);
  for (const auto& token : tokenize(text)) {
    auto it = owner.find(token);
    // Stop words, shared words and foreign tokens have class-independent
    // likelihood and do not move the argmax.
    if (it == owner.end() || it->second < 0) continue;
    for (std::size_t c = 0; c < ll.size(); ++c) {
      ll[c] += static_cast<std::size_t>(it->second) == c ? log_pool : neg_inf;
    }
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < ll.size(); ++c) {
    if (ll[c] > ll[best]) best = c;
  }
  return best;
}

}  // namespace zsuc
