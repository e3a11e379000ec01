#include "ucorrect/correction.hpp"

#include <algorithm>
#include <numeric>

#include "ucorrect/error.hpp"
#include "ucorrect/kernels.hpp"
#include "ucorrect/parallel.hpp"

namespace ucorrect {

void PipelineConfig::validate() const {
  if (m < 1) throw Error(ErrorCode::kInvalidConfig, "m must be >= 1");
  if (m > l) throw Error(ErrorCode::kInvalidConfig, "m must not exceed l");
  if (max_iters < 1) throw Error(ErrorCode::kInvalidConfig, "max_iters must be >= 1");
}

namespace {

std::vector<std::size_t> rank_positions(const std::vector<double>& surprisals) {
  std::vector<std::size_t> ranked(surprisals.size());
  std::iota(ranked.begin(), ranked.end(), std::size_t{0});
  std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
    return surprisals[a] > surprisals[b];
  });
  return ranked;
}

ScoredSentence make_scored(TokenSeq sentence, std::vector<double> surprisals) {
  double score = kernels::mean(surprisals);
  return ScoredSentence{std::move(sentence), std::move(surprisals), score};
}

std::size_t argmin_score(const std::vector<ScoredSentence>& scored) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < scored.size(); ++k) {
    if (scored[k].score < scored[best].score) best = k;
  }
  return best;
}

void check_position(const TokenSeq& x, std::size_t position) {
  if (position >= x.size()) {
    throw Error(ErrorCode::kInvalidInput, "position " + std::to_string(position) +
                                              " out of range for length " +
                                              std::to_string(x.size()));
  }
}

}  // namespace

DetectionResult detect(const Scorer& scorer, const TokenSeq& x) {
  DetectionResult out;
  out.surprisals = kernels::surprisals(scorer, x);
  out.ranked = rank_positions(out.surprisals);
  return out;
}

FilteredCandidates generate(const Scorer& scorer, const PhonemeTable& table, const TokenSeq& x,
                            std::size_t position, std::size_t l, std::size_t m) {
  if (m < 1) throw Error(ErrorCode::kInvalidConfig, "m must be >= 1");
  if (m > l) throw Error(ErrorCode::kInvalidConfig, "m must not exceed l");
  check_position(x, position);

  const Token& original = x[position];
  const std::string original_phonemes = to_phonemes(table, original);
  const TokenId unk = scorer.vocab().unk_id();

  FilteredCandidates out;
  out.position = position;
  for (auto& tp : scorer.top_candidates(MaskedSeq(x, position), l)) {
    if (tp.token.id == unk || tp.token == original) continue;
    double sim = similarity(to_phonemes(table, tp.token), original_phonemes);
    out.items.push_back(Candidate{std::move(tp.token), tp.prob, sim});
  }
  std::sort(out.items.begin(), out.items.end(), [](const Candidate& a, const Candidate& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    if (a.scorer_prob != b.scorer_prob) return a.scorer_prob > b.scorer_prob;
    return a.token.text < b.token.text;
  });
  if (out.items.size() > m) out.items.resize(m);
  return out;
}

ScoredSentence score_sentence(const Scorer& scorer, const TokenSeq& y) {
  return make_scored(y, kernels::surprisals(scorer, y));
}

ScoredSentence rescore_sentence(const Scorer& scorer, const ScoredSentence& base,
                                const TokenSeq& edited, std::size_t edited_index) {
  check_position(edited, edited_index);
  return make_scored(edited,
                     kernels::surprisals_after_edit(scorer, base.surprisals, edited, edited_index));
}

Selection select(const Scorer& scorer, const ScoredSentence& x, const FilteredCandidates& cands) {
  check_position(x.sentence, cands.position);
  const std::size_t k = cands.items.size();

  std::vector<std::optional<ScoredSentence>> slots(k);
  parallel_for(k, 0, [&](std::size_t c) {
    TokenSeq y = x.sentence.with_token(cands.position, cands.items[c].token);
    slots[c] = rescore_sentence(scorer, x, y, cands.position);
  });

  Selection out{x.sentence, {}, 0};
  out.scored.reserve(k + 1);
  out.scored.push_back(x);
  for (auto& s : slots) out.scored.push_back(std::move(*s));
  out.chosen_index = argmin_score(out.scored);
  out.chosen = out.scored[out.chosen_index].sentence;
  return out;
}

Selection select(const Scorer& scorer, const TokenSeq& x, const FilteredCandidates& cands) {
  return select(scorer, score_sentence(scorer, x), cands);
}

Selection select_serial(const Scorer& scorer, const TokenSeq& x, const FilteredCandidates& cands) {
  check_position(x, cands.position);
  Selection out{x, {}, 0};
  out.scored.push_back(make_scored(x, kernels::surprisals_serial(scorer, x)));
  for (const auto& c : cands.items) {
    TokenSeq y = x.with_token(cands.position, c.token);
    auto s = kernels::surprisals_serial(scorer, y);
    out.scored.push_back(make_scored(std::move(y), std::move(s)));
  }
  out.chosen_index = argmin_score(out.scored);
  out.chosen = out.scored[out.chosen_index].sentence;
  return out;
}

CorrectionTrace correct(const Scorer& scorer, const PhonemeTable& table, const TokenSeq& x,
                        const PipelineConfig& config) {
  config.validate();
  CorrectionTrace trace{x, {}, x};
  ScoredSentence current = score_sentence(scorer, x);

  for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
    auto ranked = rank_positions(current.surprisals);
    const std::size_t position = ranked.front();
    if (config.detection_threshold &&
        current.surprisals[position] < *config.detection_threshold) {
      break;
    }
    auto cands = generate(scorer, table, current.sentence, position, config.l, config.m);
    Selection sel = select(scorer, current, cands);
    const std::size_t chosen = sel.chosen_index;
    trace.iterations.push_back(
        CorrectionIteration{position, std::move(cands), sel.scored, chosen});
    if (chosen == 0) break;
    current = std::move(sel.scored[chosen]);
  }
  trace.output = current.sentence;
  return trace;
}

std::vector<CorrectionTrace> correct_corpus(const Scorer& scorer, const PhonemeTable& table,
                                            std::span<const TokenSeq> corpus,
                                            const PipelineConfig& config, int workers) {
  config.validate();
  std::vector<std::optional<CorrectionTrace>> slots(corpus.size());
  parallel_for(corpus.size(), workers,
               [&](std::size_t i) { slots[i] = correct(scorer, table, corpus[i], config); });
  std::vector<CorrectionTrace> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::vector<CorrectionTrace> correct_corpus_serial(const Scorer& scorer,
                                                   const PhonemeTable& table,
                                                   std::span<const TokenSeq> corpus,
                                                   const PipelineConfig& config) {
  std::vector<CorrectionTrace> out;
  out.reserve(corpus.size());
  for (const auto& x : corpus) out.push_back(correct(scorer, table, x, config));
  return out;
}

namespace {

nlohmann::json seq_json(const TokenSeq& seq) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : seq) arr.push_back(t.text);
  return arr;
}

}  // namespace

nlohmann::json to_json(const CorrectionTrace& trace) {
  nlohmann::json iterations = nlohmann::json::array();
  for (const auto& it : trace.iterations) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& c : it.candidates.items) {
      items.push_back({{"token", c.token.text},
                       {"scorer_prob", c.scorer_prob},
                       {"similarity", c.similarity}});
    }
    nlohmann::json scored = nlohmann::json::array();
    for (const auto& s : it.scored) {
      scored.push_back({{"sentence", seq_json(s.sentence)}, {"score", s.score}});
    }
    iterations.push_back({{"detected_position", it.detected_position},
                          {"candidates", {{"position", it.candidates.position}, {"items", items}}},
                          {"scored", scored},
                          {"chosen_index", it.chosen_index}});
  }
  return {{"input", seq_json(trace.input)},
          {"iterations", iterations},
          {"output", seq_json(trace.output)}};
}

}  // namespace ucorrect
