#include "ucorrect/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ucorrect/error.hpp"
#include "ucorrect/parallel.hpp"

namespace ucorrect::kernels {

namespace {

// Below this length a parallel region costs more than the queries it spreads.
constexpr std::size_t kMinParallelPositions = 8;

}  // namespace

double position_surprisal(const Scorer& scorer, const TokenSeq& seq, std::size_t i) {
  const TokenId id = seq[i].id;
  if (!scorer.vocab().is_regular(id)) return std::numeric_limits<double>::infinity();
  return -std::log(scorer.prob(MaskedSeq(seq, i), id));
}

std::vector<double> surprisals_serial(const Scorer& scorer, const TokenSeq& seq) {
  std::vector<double> out(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) out[i] = position_surprisal(scorer, seq, i);
  return out;
}

std::vector<double> surprisals(const Scorer& scorer, const TokenSeq& seq) {
  if (seq.size() < kMinParallelPositions) return surprisals_serial(scorer, seq);
  std::vector<double> out(seq.size());
  parallel_for(seq.size(), 0, [&](std::size_t i) { out[i] = position_surprisal(scorer, seq, i); });
  return out;
}

std::vector<double> surprisals_after_edit(const Scorer& scorer, std::span<const double> base,
                                          const TokenSeq& edited, std::size_t edited_index) {
  if (base.size() != edited.size()) {
    throw Error(ErrorCode::kLengthMismatch, "base surprisals do not match the edited sentence");
  }
  auto radius = scorer.context_radius();
  if (!radius) return surprisals(scorer, edited);

  std::vector<double> out(base.begin(), base.end());
  const std::size_t lo = edited_index > *radius ? edited_index - *radius : 0;
  const std::size_t hi = std::min(edited.size() - 1, edited_index + *radius);
  for (std::size_t i = lo; i <= hi; ++i) out[i] = position_surprisal(scorer, edited, i);
  return out;
}

double mean(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace ucorrect::kernels
