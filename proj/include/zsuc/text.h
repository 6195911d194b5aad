#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace zsuc {

// Lowercased tokens split on every non-alphanumeric ASCII byte. Bytes >= 0x80
// are kept inside tokens so UTF-8 words survive intact.
std::vector<std::string> tokenize(std::string_view text);

class Vocabulary {
 public:
  Vocabulary() = default;

  // `words` in index order. Throws DataError on duplicates or on a word that
  // is also a stop word.
  Vocabulary(std::vector<std::string> words, std::set<std::string> stop_words);

  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

  // -1 when the word is unknown or a stop word.
  std::ptrdiff_t index_of(std::string_view word) const;
  const std::string& word(std::size_t index) const { return words_.at(index); }
  const std::vector<std::string>& words() const { return words_; }
  const std::set<std::string>& stop_words() const { return stop_words_; }

  // `V=<size>` header then one `word<TAB>index` line per entry.
  std::string serialize() const;
  static Vocabulary parse(std::string_view bytes,
                          std::set<std::string> stop_words = {});

  // Hash of serialize(); the reference stored in model files.
  std::string hash() const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.words_ == b.words_ && a.stop_words_ == b.stop_words_;
  }

 private:
  std::vector<std::string> words_;
  std::set<std::string> stop_words_;
  std::unordered_map<std::string, std::size_t> index_;
};

// The `max_size` most frequent non-stop-word tokens; ties lexicographic.
// Throws std::invalid_argument("empty corpus") for an empty corpus and
// DataError("empty vocabulary") when every token is a stop word.
Vocabulary build_vocabulary(std::span<const std::string> corpus,
                            const std::set<std::string>& stop_words,
                            std::size_t max_size);

std::set<std::string> parse_stop_words(std::string_view bytes);

// Sparse token counts over a vocabulary.
struct BowVector {
  std::size_t dimension = 0;
  std::map<std::size_t, std::uint32_t> counts;

  bool empty() const { return counts.empty(); }
  std::vector<double> dense() const;
  friend bool operator==(const BowVector&, const BowVector&) = default;
};

BowVector featurize(std::string_view text, const Vocabulary& vocab);

}  // namespace zsuc
