#include "ucorrect/scorer.hpp"

#include <algorithm>
#include <numeric>

#include "ucorrect/error.hpp"

namespace ucorrect {

MaskedSeq::MaskedSeq(const TokenSeq& base, std::size_t mask_index)
    : base_(base.tokens()), mask_index_(mask_index) {
  if (mask_index >= base.size()) {
    throw Error(ErrorCode::kInvalidInput, "mask index " + std::to_string(mask_index) +
                                              " out of range for length " +
                                              std::to_string(base.size()));
  }
}

void require_regular(const Vocab& vocab, TokenId t) {
  if (t == vocab.mask_id() || t == vocab.unk_id()) {
    throw Error(ErrorCode::kMaskIsSentinel, "cannot score a sentinel token");
  }
  if (!vocab.is_regular(t)) {
    throw Error(ErrorCode::kInvalidInput, "token id out of range: " + std::to_string(t));
  }
}

void rank_candidates(std::vector<TokenProb>& items, std::size_t l) {
  auto better = [](const TokenProb& a, const TokenProb& b) {
    if (a.prob != b.prob) return a.prob > b.prob;
    return a.token.text < b.token.text;
  };
  if (l < items.size()) {
    std::partial_sort(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(l),
                      items.end(), better);
    items.resize(l);
  } else {
    std::sort(items.begin(), items.end(), better);
  }
}

UniformScorer::UniformScorer(Vocab vocab) : vocab_(std::move(vocab)) {
  if (vocab_.size() == 0) throw Error(ErrorCode::kInvalidConfig, "uniform scorer needs a vocabulary");
  by_text_.resize(vocab_.size());
  std::iota(by_text_.begin(), by_text_.end(), TokenId{0});
  std::sort(by_text_.begin(), by_text_.end(), [this](TokenId a, TokenId b) {
    return vocab_.text_of(a) < vocab_.text_of(b);
  });
}

double UniformScorer::prob(const MaskedSeq&, TokenId t) const {
  require_regular(vocab_, t);
  return 1.0 / static_cast<double>(vocab_.size());
}

std::vector<TokenProb> UniformScorer::top_candidates(const MaskedSeq&, std::size_t l) const {
  const double p = 1.0 / static_cast<double>(vocab_.size());
  std::size_t k = std::min(l, by_text_.size());
  std::vector<TokenProb> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back({vocab_.token(by_text_[i]), p});
  return out;
}

}  // namespace ucorrect
