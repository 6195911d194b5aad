#include "zsuc/data.h"

#include <algorithm>
#include <set>

#include "zsuc/error.h"
#include "zsuc/io.h"

namespace zsuc {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

// Parses `text<TAB>label` lines into pairs.
std::vector<std::pair<std::string, std::string>> parse_pairs(
    std::string_view bytes, std::string_view what) {
  std::vector<std::pair<std::string, std::string>> out;
  const auto lines = split_lines(bytes);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (trim(line).empty()) continue;
    const auto where = std::string(what) + " line " + std::to_string(i + 1);
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError(where + ": missing TAB");
    if (line.find('\t', tab + 1) != std::string::npos) {
      throw DataError(where + ": more than one TAB");
    }
    auto text = trim(std::string_view(line).substr(0, tab));
    auto label = trim(std::string_view(line).substr(tab + 1));
    if (text.empty() || label.empty()) throw DataError(where + ": empty field");
    out.emplace_back(std::move(text), std::move(label));
  }
  return out;
}

}  // namespace

std::size_t UrlIndex::at(const std::string& url) const {
  auto it = index.find(url);
  if (it == index.end()) throw DataError("unknown URL: " + url);
  return it->second;
}

UrlIndex index_urls(std::span<const QclRecord> records) {
  UrlIndex urls;
  for (const auto& r : records) {
    if (urls.index.emplace(r.url, urls.names.size()).second) {
      urls.names.push_back(r.url);
    }
  }
  return urls;
}

QclCorpus parse_qcl(std::string_view bytes) {
  QclCorpus corpus;
  for (auto& [query, url] : parse_pairs(bytes, "qcl")) {
    corpus.records.push_back({std::move(query), std::move(url)});
  }
  corpus.urls = index_urls(corpus.records);
  return corpus;
}

QclCorpus load_qcl(const std::filesystem::path& path) {
  return parse_qcl(read_file(path));
}

std::string serialize_qcl(std::span<const QclRecord> records) {
  std::string out;
  for (const auto& r : records) out += r.query + "\t" + r.url + "\n";
  return out;
}

std::vector<LabeledUtterance> parse_suc(std::string_view bytes) {
  std::vector<LabeledUtterance> out;
  for (auto& [text, label] : parse_pairs(bytes, "suc")) {
    out.push_back({std::move(text), std::move(label)});
  }
  return out;
}

std::vector<LabeledUtterance> load_suc(const std::filesystem::path& path) {
  return parse_suc(read_file(path));
}

std::string serialize_suc(std::span<const LabeledUtterance> records) {
  std::string out;
  for (const auto& r : records) out += r.utterance + "\t" + r.class_name + "\n";
  return out;
}

std::vector<QclRecord> restrict_top_urls(std::span<const QclRecord> records,
                                         std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  std::unordered_map<std::string, std::size_t> freq;
  for (const auto& r : records) ++freq[r.url];
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::set<std::string> keep;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
    keep.insert(ranked[i].first);
  }
  std::vector<QclRecord> out;
  for (const auto& r : records) {
    if (keep.contains(r.url)) out.push_back(r);
  }
  return out;
}

std::vector<QclRecord> filter_unknown_queries(std::span<const QclRecord> records,
                                              const Vocabulary& vocab) {
  std::vector<QclRecord> out;
  for (const auto& r : records) {
    if (!featurize(r.query, vocab).empty()) out.push_back(r);
  }
  return out;
}

std::vector<Example> make_examples(std::span<const QclRecord> records,
                                   const UrlIndex& urls, const Vocabulary& vocab,
                                   bool binary) {
  std::vector<Example> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    out.push_back({to_input(featurize(r.query, vocab), binary), urls.at(r.url)});
  }
  return out;
}

}  // namespace zsuc
