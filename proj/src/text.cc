#include "zsuc/text.h"

#include <algorithm>
#include <stdexcept>

#include "zsuc/error.h"
#include "zsuc/io.h"

namespace zsuc {
namespace {

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c >= 0x80;
}

char lower(unsigned char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                : static_cast<char>(c);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (is_word_byte(c)) {
      current.push_back(lower(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Vocabulary::Vocabulary(std::vector<std::string> words,
                       std::set<std::string> stop_words)
    : words_(std::move(words)), stop_words_(std::move(stop_words)) {
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words_[i].empty()) throw DataError("empty vocabulary word");
    if (stop_words_.contains(words_[i])) {
      throw DataError("stop word in vocabulary: " + words_[i]);
    }
    if (!index_.emplace(words_[i], i).second) {
      throw DataError("duplicate vocabulary word: " + words_[i]);
    }
  }
}

std::ptrdiff_t Vocabulary::index_of(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

std::string Vocabulary::serialize() const {
  std::string out = "V=" + std::to_string(words_.size()) + "\n";
  for (std::size_t i = 0; i < words_.size(); ++i) {
    out += words_[i];
    out += '\t';
    out += std::to_string(i);
    out += '\n';
  }
  return out;
}

Vocabulary Vocabulary::parse(std::string_view bytes,
                             std::set<std::string> stop_words) {
  const auto lines = split_lines(bytes);
  if (lines.empty() || !lines[0].starts_with("V=")) {
    throw DataError("vocabulary: missing V=<size> header");
  }
  std::size_t size = 0;
  try {
    size = std::stoul(lines[0].substr(2));
  } catch (const std::exception&) {
    throw DataError("vocabulary: bad header '" + lines[0] + "'");
  }
  if (lines.size() != size + 1) {
    throw DataError("vocabulary: header says " + std::to_string(size) +
                    " entries, found " + std::to_string(lines.size() - 1));
  }
  std::vector<std::string> words(size);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& line = lines[i];
    const auto tab = line.find('\t');
    if (tab == std::string::npos ||
        line.substr(tab + 1) != std::to_string(i - 1)) {
      throw DataError("vocabulary: line " + std::to_string(i + 1) +
                      ": expected word<TAB>" + std::to_string(i - 1));
    }
    words[i - 1] = line.substr(0, tab);
  }
  return Vocabulary(std::move(words), std::move(stop_words));
}

std::string Vocabulary::hash() const { return hash_hex(serialize()); }

Vocabulary build_vocabulary(std::span<const std::string> corpus,
                            const std::set<std::string>& stop_words,
                            std::size_t max_size) {
  if (corpus.empty()) throw std::invalid_argument("empty corpus");
  if (max_size == 0) throw std::invalid_argument("max_size must be positive");
  std::unordered_map<std::string, std::size_t> freq;
  for (const auto& text : corpus) {
    for (auto& token : tokenize(text)) {
      if (!stop_words.contains(token)) ++freq[token];
    }
  }
  if (freq.empty()) throw DataError("empty vocabulary");
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(),
                                                          freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > max_size) ranked.resize(max_size);
  std::vector<std::string> words;
  words.reserve(ranked.size());
  for (auto& [word, count] : ranked) words.push_back(std::move(word));
  return Vocabulary(std::move(words), stop_words);
}

std::set<std::string> parse_stop_words(std::string_view bytes) {
  std::set<std::string> words;
  for (const auto& line : split_lines(bytes)) {
    for (auto& token : tokenize(line)) words.insert(std::move(token));
  }
  return words;
}

std::vector<double> BowVector::dense() const {
  std::vector<double> out(dimension, 0.0);
  for (const auto& [index, count] : counts) out[index] = count;
  return out;
}

BowVector featurize(std::string_view text, const Vocabulary& vocab) {
  BowVector bow;
  bow.dimension = vocab.size();
  for (const auto& token : tokenize(text)) {
    const auto index = vocab.index_of(token);
    if (index >= 0) ++bow.counts[static_cast<std::size_t>(index)];
  }
  return bow;
}

}  // namespace zsuc
