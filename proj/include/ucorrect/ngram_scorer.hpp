#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "ucorrect/scorer.hpp"

namespace ucorrect {

struct NgramConfig {
  std::size_t window = 2;  // context tokens per side
  double lambda = 0.5;     // weight of the left model
  double add_k = 0.1;      // additive smoothing

  // Throws InvalidConfig.
  void validate() const;
};

// Context keys are token id strings; positions outside the sentence hold kPad.
using ContextKey = std::u32string;

struct ContextRow {
  double total = 0.0;
  std::unordered_map<TokenId, double> next;
};

using CountTable = std::unordered_map<ContextKey, ContextRow>;

// Bidirectional interpolated n-gram masked-token model.
//
// left_counts[c][t] counts how often t follows the left context c, for every
// context length 1..window, padding before the sentence start. right_counts
// is the mirror image: c is the run of tokens after t, in reading order.
//
// For a masked position each side uses the full-width context when it was
// seen in training; otherwise it averages the add-k estimates of all seen
// shorter contexts, and falls back to uniform when none was seen. The two
// sides are mixed as lambda * left + (1 - lambda) * right.
class NgramScorer final : public Scorer {
 public:
  static constexpr int kFormatVersion = 1;
  static constexpr char32_t kPad = 0xFFFFFFFFu;

  NgramScorer(Vocab vocab, NgramConfig config);

  const Vocab& vocab() const override { return vocab_; }
  double prob(const MaskedSeq& m, TokenId t) const override;
  std::vector<TokenProb> top_candidates(const MaskedSeq& m, std::size_t l) const override;
  std::optional<std::size_t> context_radius() const override { return config_.window; }

  // Probability of every regular token, indexed by id.
  std::vector<double> distribution(const MaskedSeq& m) const;

  const NgramConfig& config() const noexcept { return config_; }
  const CountTable& left_counts() const noexcept { return left_; }
  const CountTable& right_counts() const noexcept { return right_; }

  // Count lookups by token text; "<s>" / "</s>" stand for padding.
  double left_count(std::span<const std::string> context, std::string_view token) const;
  double right_count(std::span<const std::string> context, std::string_view token) const;

  // Adds weight * counts of every sentence to both tables.
  void accumulate(std::span<const TokenSeq> corpus, double weight);

  nlohmann::json to_json() const;
  static NgramScorer from_json(const nlohmann::json& doc);
  void save(const std::filesystem::path& path) const;
  static NgramScorer load(const std::filesystem::path& path);

 private:
  double side_prob(const std::vector<const ContextRow*>& rows, TokenId t) const;
  void side_distribution(const std::vector<const ContextRow*>& rows,
                         std::vector<double>& out) const;
  std::vector<const ContextRow*> left_rows(const MaskedSeq& m) const;
  std::vector<const ContextRow*> right_rows(const MaskedSeq& m) const;
  ContextKey key_from_texts(std::span<const std::string> context, bool left) const;

  Vocab vocab_;
  NgramConfig config_;
  CountTable left_;
  CountTable right_;
};

NgramScorer train_ngram(std::span<const TokenSeq> corpus, const NgramConfig& config,
                        const Vocab& vocab);

// Copy of scorer with weight * domain counts added. weight must be > 0.
NgramScorer fine_tune(const NgramScorer& scorer, std::span<const TokenSeq> domain_corpus,
                      double weight);

}  // namespace ucorrect
