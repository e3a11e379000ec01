#include "ucorrect/ngram_scorer.hpp"

#include <cmath>
#include <map>

#include "ucorrect/error.hpp"

namespace ucorrect {

namespace {

constexpr std::string_view kLeftPadText = "<s>";
constexpr std::string_view kRightPadText = "</s>";

ContextKey left_key(std::span<const Token> seq, std::size_t i, std::size_t order) {
  ContextKey key(order, NgramScorer::kPad);
  for (std::size_t k = 0; k < order; ++k) {
    // key[k] holds position i - order + k
    std::size_t back = order - k;
    if (back <= i) key[k] = seq[i - back].id;
  }
  return key;
}

ContextKey right_key(std::span<const Token> seq, std::size_t i, std::size_t order) {
  ContextKey key(order, NgramScorer::kPad);
  for (std::size_t k = 0; k < order; ++k) {
    std::size_t j = i + 1 + k;
    if (j < seq.size()) key[k] = seq[j].id;
  }
  return key;
}

const ContextRow* seen_row(const CountTable& table, const ContextKey& key) {
  auto it = table.find(key);
  if (it == table.end() || it->second.total <= 0.0) return nullptr;
  return &it->second;
}

nlohmann::json count_value(double c) {
  if (c == std::floor(c) && std::fabs(c) < 9.0e15) return static_cast<std::int64_t>(c);
  return c;
}

}  // namespace

void NgramConfig::validate() const {
  if (window < 1) throw Error(ErrorCode::kInvalidConfig, "window must be >= 1");
  if (!(add_k > 0.0) || !std::isfinite(add_k)) {
    throw Error(ErrorCode::kInvalidConfig, "add_k must be > 0");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "lambda must lie in [0, 1]");
  }
}

NgramScorer::NgramScorer(Vocab vocab, NgramConfig config)
    : vocab_(std::move(vocab)), config_(config) {
  config_.validate();
  if (vocab_.size() == 0) throw Error(ErrorCode::kInvalidConfig, "n-gram scorer needs a vocabulary");
}

void NgramScorer::accumulate(std::span<const TokenSeq> corpus, double weight) {
  const std::size_t w = config_.window;
  for (const auto& seq : corpus) {
    auto tokens = seq.tokens();
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const TokenId t = tokens[i].id;
      if (!vocab_.is_regular(t)) continue;
      for (std::size_t order = 1; order <= w; ++order) {
        auto& l = left_[left_key(tokens, i, order)];
        l.total += weight;
        l.next[t] += weight;
        auto& r = right_[right_key(tokens, i, order)];
        r.total += weight;
        r.next[t] += weight;
      }
    }
  }
}

std::vector<const ContextRow*> NgramScorer::left_rows(const MaskedSeq& m) const {
  std::vector<const ContextRow*> rows(config_.window, nullptr);
  for (std::size_t order = 1; order <= config_.window; ++order) {
    rows[order - 1] = seen_row(left_, left_key(m.base(), m.mask_index(), order));
  }
  return rows;
}

std::vector<const ContextRow*> NgramScorer::right_rows(const MaskedSeq& m) const {
  std::vector<const ContextRow*> rows(config_.window, nullptr);
  for (std::size_t order = 1; order <= config_.window; ++order) {
    rows[order - 1] = seen_row(right_, right_key(m.base(), m.mask_index(), order));
  }
  return rows;
}

// prob() and distribution() must perform the same floating-point operations
// in the same order so top_candidates agrees with prob exactly.
double NgramScorer::side_prob(const std::vector<const ContextRow*>& rows, TokenId t) const {
  const double vocab_size = static_cast<double>(vocab_.size());
  const double k = config_.add_k;
  auto smooth = [&](const ContextRow& row) {
    auto it = row.next.find(t);
    double c = it == row.next.end() ? 0.0 : it->second;
    return (c + k) / (row.total + k * vocab_size);
  };
  if (rows.back()) return smooth(*rows.back());
  double acc = 0.0;
  std::size_t used = 0;
  for (std::size_t o = 0; o + 1 < rows.size(); ++o) {
    if (!rows[o]) continue;
    acc += smooth(*rows[o]);
    ++used;
  }
  if (used == 0) return 1.0 / vocab_size;
  return acc / static_cast<double>(used);
}

void NgramScorer::side_distribution(const std::vector<const ContextRow*>& rows,
                                    std::vector<double>& out) const {
  const std::size_t v = vocab_.size();
  const double vocab_size = static_cast<double>(v);
  const double k = config_.add_k;
  auto smooth_into = [&](const ContextRow& row, std::vector<double>& dst) {
    const double denom = row.total + k * vocab_size;
    const double floor = (0.0 + k) / denom;
    for (std::size_t t = 0; t < v; ++t) dst[t] = floor;
    for (const auto& [t, c] : row.next) dst[t] = (c + k) / denom;
  };

  out.assign(v, 0.0);
  if (rows.back()) {
    smooth_into(*rows.back(), out);
    return;
  }
  std::vector<double> tmp(v);
  std::size_t used = 0;
  for (std::size_t o = 0; o + 1 < rows.size(); ++o) {
    if (!rows[o]) continue;
    smooth_into(*rows[o], tmp);
    for (std::size_t t = 0; t < v; ++t) out[t] += tmp[t];
    ++used;
  }
  if (used == 0) {
    for (auto& p : out) p = 1.0 / vocab_size;
    return;
  }
  for (auto& p : out) p /= static_cast<double>(used);
}

double NgramScorer::prob(const MaskedSeq& m, TokenId t) const {
  require_regular(vocab_, t);
  const double left = side_prob(left_rows(m), t);
  const double right = side_prob(right_rows(m), t);
  return config_.lambda * left + (1.0 - config_.lambda) * right;
}

std::vector<double> NgramScorer::distribution(const MaskedSeq& m) const {
  std::vector<double> left, right;
  side_distribution(left_rows(m), left);
  side_distribution(right_rows(m), right);
  for (std::size_t t = 0; t < left.size(); ++t) {
    left[t] = config_.lambda * left[t] + (1.0 - config_.lambda) * right[t];
  }
  return left;
}

std::vector<TokenProb> NgramScorer::top_candidates(const MaskedSeq& m, std::size_t l) const {
  auto dist = distribution(m);
  std::vector<TokenProb> items;
  items.reserve(dist.size());
  for (std::size_t t = 0; t < dist.size(); ++t) {
    items.push_back({vocab_.token(static_cast<TokenId>(t)), dist[t]});
  }
  rank_candidates(items, l);
  return items;
}

ContextKey NgramScorer::key_from_texts(std::span<const std::string> context, bool left) const {
  ContextKey key;
  for (const auto& text : context) {
    if (text == (left ? kLeftPadText : kRightPadText)) {
      key.push_back(kPad);
    } else if (text == Vocab::kUnkText) {
      key.push_back(vocab_.unk_id());
    } else {
      auto id = vocab_.find(text);
      if (!id) throw Error(ErrorCode::kInvalidInput, "context token not in vocabulary: " + text);
      key.push_back(*id);
    }
  }
  return key;
}

namespace {

double lookup(const CountTable& table, const ContextKey& key, std::optional<TokenId> t) {
  if (!t) return 0.0;
  auto it = table.find(key);
  if (it == table.end()) return 0.0;
  auto jt = it->second.next.find(*t);
  return jt == it->second.next.end() ? 0.0 : jt->second;
}

}  // namespace

double NgramScorer::left_count(std::span<const std::string> context,
                               std::string_view token) const {
  return lookup(left_, key_from_texts(context, true), vocab_.find(token));
}

double NgramScorer::right_count(std::span<const std::string> context,
                                std::string_view token) const {
  return lookup(right_, key_from_texts(context, false), vocab_.find(token));
}

nlohmann::json NgramScorer::to_json() const {
  auto key_text = [this](const ContextKey& key, bool left) {
    std::string out;
    for (std::size_t i = 0; i < key.size(); ++i) {
      if (i) out += ' ';
      if (key[i] == kPad) {
        out += left ? kLeftPadText : kRightPadText;
      } else {
        out += vocab_.text_of(key[i]);
      }
    }
    return out;
  };
  auto table_json = [&](const CountTable& table, bool left) {
    // std::map keeps the document byte-stable across runs.
    std::map<std::string, nlohmann::json> rows;
    for (const auto& [key, row] : table) {
      std::map<std::string, nlohmann::json> next;
      for (const auto& [t, c] : row.next) next[std::string(vocab_.text_of(t))] = count_value(c);
      rows[key_text(key, left)] = next;
    }
    return nlohmann::json(rows);
  };

  nlohmann::json doc;
  doc["version"] = kFormatVersion;
  doc["window"] = config_.window;
  doc["lambda"] = config_.lambda;
  doc["add_k"] = config_.add_k;
  doc["vocab"] = std::vector<std::string>(vocab_.texts().begin(), vocab_.texts().end());
  doc["left_counts"] = table_json(left_, true);
  doc["right_counts"] = table_json(right_, false);
  return doc;
}

NgramScorer NgramScorer::from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("version").get<int>() != kFormatVersion) {
      throw Error(ErrorCode::kInvalidInput, "unsupported model version");
    }
    NgramConfig config;
    config.window = doc.at("window").get<std::size_t>();
    config.lambda = doc.at("lambda").get<double>();
    config.add_k = doc.at("add_k").get<double>();
    NgramScorer scorer(Vocab(doc.at("vocab").get<std::vector<std::string>>()), config);

    auto read_table = [&](const nlohmann::json& j, bool left, CountTable& table) {
      for (const auto& [ctx_text, next] : j.items()) {
        std::vector<std::string> parts;
        std::size_t pos = 0;
        while (true) {
          std::size_t sp = ctx_text.find(' ', pos);
          parts.push_back(ctx_text.substr(pos, sp - pos));
          if (sp == std::string::npos) break;
          pos = sp + 1;
        }
        ContextKey key = scorer.key_from_texts(parts, left);
        if (key.empty() || key.size() > config.window) {
          throw Error(ErrorCode::kInvalidInput, "bad context length in model: " + ctx_text);
        }
        ContextRow& row = table[key];
        for (const auto& [tok, count] : next.items()) {
          auto id = scorer.vocab_.find(tok);
          if (!id) throw Error(ErrorCode::kInvalidInput, "count target not in vocabulary: " + tok);
          double c = count.get<double>();
          if (!(c >= 0.0)) throw Error(ErrorCode::kInvalidInput, "negative count in model");
          row.next[*id] = c;
          row.total += c;
        }
      }
    };
    read_table(doc.at("left_counts"), true, scorer.left_);
    read_table(doc.at("right_counts"), false, scorer.right_);
    return scorer;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidInput, std::string("malformed model file: ") + e.what());
  }
}

void NgramScorer::save(const std::filesystem::path& path) const {
  write_file(path, to_json().dump() + "\n");
}

NgramScorer NgramScorer::load(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kInvalidInput, "model file is not JSON: " + std::string(e.what()));
  }
  return from_json(doc);
}

NgramScorer train_ngram(std::span<const TokenSeq> corpus, const NgramConfig& config,
                        const Vocab& vocab) {
  config.validate();
  if (corpus.empty()) throw Error(ErrorCode::kEmptyInput, "training corpus is empty");
  NgramScorer scorer(vocab, config);
  scorer.accumulate(corpus, 1.0);
  return scorer;
}

NgramScorer fine_tune(const NgramScorer& scorer, std::span<const TokenSeq> domain_corpus,
                      double weight) {
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw Error(ErrorCode::kInvalidConfig, "fine-tune weight must be > 0");
  }
  if (domain_corpus.empty()) throw Error(ErrorCode::kEmptyInput, "domain corpus is empty");
  NgramScorer out = scorer;
  out.accumulate(domain_corpus, weight);
  return out;
}

}  // namespace ucorrect
