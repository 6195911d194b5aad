#include "zsuc/model.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <map>

#include "zsuc/error.h"
#include "zsuc/io.h"

namespace zsuc {
namespace {

constexpr std::string_view kMagic = "ZSUC-MODEL 1";

std::string join_sizes(const std::vector<std::size_t>& sizes) {
  std::string out;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(sizes[i]);
  }
  return out;
}

std::vector<std::size_t> parse_sizes(std::string_view text) {
  std::vector<std::size_t> sizes;
  if (text.empty()) return sizes;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    const auto part = text.substr(start, comma - start);
    try {
      sizes.push_back(std::stoul(std::string(part)));
    } catch (const std::exception&) {
      throw DataError("model: bad size list '" + std::string(text) + "'");
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return sizes;
}

void put_double(std::string& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>(bits & 0xff));
    bits >>= 8;
  }
}

double get_double(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | p[i];
  return std::bit_cast<double>(bits);
}

// Reads one '\n'-terminated header line starting at `pos`.
std::string_view next_line(std::string_view bytes, std::size_t& pos) {
  const auto end = bytes.find('\n', pos);
  if (end == std::string_view::npos) throw DataError("model: truncated header");
  auto line = bytes.substr(pos, end - pos);
  pos = end + 1;
  return line;
}

std::uint64_t parse_count(std::string_view text, std::string_view key) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(std::string(text), &used);
    if (used != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw DataError("model: bad value for " + std::string(key));
  }
}

}  // namespace

std::string serialize_model(const Model& model) {
  const auto& c = model.config;
  std::string out(kMagic);
  out += '\n';
  out += "layer_sizes=" + join_sizes(model.params.layer_sizes) + "\n";
  out += "vocab_hash=" + model.vocab_hash + "\n";
  out += "hidden_layers=" + join_sizes(c.hidden_layers) + "\n";
  out += "learning_rate=" + format_double(c.learning_rate) + "\n";
  out += "batch_size=" + std::to_string(c.batch_size) + "\n";
  out += "epochs=" + std::to_string(c.epochs) + "\n";
  out += "dropout_rate=" + format_double(c.dropout_rate) + "\n";
  out += "seed=" + std::to_string(c.seed) + "\n";
  out += "lambda=" + format_double(c.lambda) + "\n";
  out += "binary_bow=" + std::string(c.binary_bow ? "1" : "0") + "\n";
  out += "metric=" + std::string(metric_name(c.metric)) + "\n";
  out += "urls=" + std::to_string(model.url_labels.size()) + "\n";
  for (const auto& url : model.url_labels) out += url + "\n";
  const auto flat = model.params.flatten();
  out += "params=" + std::to_string(flat.size()) + "\n";
  out.reserve(out.size() + flat.size() * 8);
  for (double v : flat) put_double(out, v);
  return out;
}

Model parse_model(std::string_view bytes) {
  std::size_t pos = 0;
  if (next_line(bytes, pos) != kMagic) throw DataError("model: bad magic/version");

  std::map<std::string, std::string, std::less<>> fields;
  const std::vector<std::string> keys = {
      "layer_sizes", "vocab_hash", "hidden_layers", "learning_rate",
      "batch_size",  "epochs",     "dropout_rate",  "seed",
      "lambda",      "binary_bow", "metric",        "urls"};
  for (const auto& key : keys) {
    const auto line = next_line(bytes, pos);
    if (!line.starts_with(key + "=")) {
      throw DataError("model: expected field '" + key + "'");
    }
    fields[key] = std::string(line.substr(key.size() + 1));
  }

  Model model;
  auto& c = model.config;
  try {
    c.hidden_layers = parse_sizes(fields["hidden_layers"]);
    c.learning_rate = parse_double(fields["learning_rate"]);
    c.batch_size = parse_count(fields["batch_size"], "batch_size");
    c.epochs = parse_count(fields["epochs"], "epochs");
    c.dropout_rate = parse_double(fields["dropout_rate"]);
    c.seed = parse_count(fields["seed"], "seed");
    c.lambda = parse_double(fields["lambda"]);
    c.binary_bow = fields["binary_bow"] == "1";
    c.metric = parse_metric(fields["metric"]);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("model: ") + e.what());
  }
  model.vocab_hash = fields["vocab_hash"];

  const auto url_count = parse_count(fields["urls"], "urls");
  for (std::uint64_t i = 0; i < url_count; ++i) {
    model.url_labels.emplace_back(next_line(bytes, pos));
  }

  const auto sizes = parse_sizes(fields["layer_sizes"]);
  try {
    validate_layer_sizes(sizes);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("model: ") + e.what());
  }
  model.params = zeros_like(init_params(sizes, 0));

  const auto params_line = next_line(bytes, pos);
  if (!params_line.starts_with("params=")) throw DataError("model: missing params");
  const auto count = parse_count(params_line.substr(7), "params");
  if (count != model.params.parameter_count()) {
    throw DataError("model: parameter count does not match layer sizes");
  }
  if (bytes.size() - pos != count * 8) {
    throw DataError("model: weight block has wrong length");
  }
  std::vector<double> flat(count);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  for (std::size_t i = 0; i < count; ++i) flat[i] = get_double(p + 8 * i);
  model.params.assign(flat);
  if (!all_finite(model.params)) throw DataError("model: non-finite parameter");
  return model;
}

}  // namespace zsuc
