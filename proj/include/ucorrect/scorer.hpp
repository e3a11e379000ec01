#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ucorrect/corpus.hpp"

namespace ucorrect {

// A sentence with one position hidden behind the mask sentinel. The view does
// not own the tokens; the base sequence must outlive it.
class MaskedSeq {
 public:
  MaskedSeq(const TokenSeq& base, std::size_t mask_index);

  std::span<const Token> base() const noexcept { return base_; }
  std::size_t mask_index() const noexcept { return mask_index_; }
  std::size_t size() const noexcept { return base_.size(); }
  const Token& masked_token() const { return base_[mask_index_]; }

 private:
  std::span<const Token> base_;
  std::size_t mask_index_;
};

struct TokenProb {
  Token token;
  double prob = 0.0;
};

// Masked-token scorer: p(t | sentence with position i masked). Implementations
// are immutable after construction and safe to query from many threads.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual const Vocab& vocab() const = 0;

  // Probability of regular token t at the masked position.
  // Throws MaskIsSentinel when t is the mask or unk id.
  virtual double prob(const MaskedSeq& m, TokenId t) const = 0;

  // The min(l, |vocab|) most probable regular tokens, descending, ties by
  // code-point order of the token text.
  virtual std::vector<TokenProb> top_candidates(const MaskedSeq& m, std::size_t l) const = 0;

  // How far (in tokens) the scorer looks on each side of the mask, when that
  // is bounded. Enables incremental rescoring of single-token edits.
  virtual std::optional<std::size_t> context_radius() const { return std::nullopt; }
};

// Every regular token equally likely.
class UniformScorer final : public Scorer {
 public:
  explicit UniformScorer(Vocab vocab);

  const Vocab& vocab() const override { return vocab_; }
  double prob(const MaskedSeq& m, TokenId t) const override;
  std::vector<TokenProb> top_candidates(const MaskedSeq& m, std::size_t l) const override;
  std::optional<std::size_t> context_radius() const override { return 0; }

 private:
  Vocab vocab_;
  std::vector<TokenId> by_text_;
};

// Sorts descending by probability, ties by token text, and truncates to l.
void rank_candidates(std::vector<TokenProb>& items, std::size_t l);

void require_regular(const Vocab& vocab, TokenId t);

}  // namespace ucorrect
