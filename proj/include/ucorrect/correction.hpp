#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "ucorrect/corpus.hpp"
#include "ucorrect/phonetics.hpp"
#include "ucorrect/scorer.hpp"

namespace ucorrect {

// Token score is surprisal -ln p(t_i | M_i): the detector flags the highest,
// the selector keeps the sentence with the lowest mean.

struct PipelineConfig {
  std::size_t l = 10;          // scorer candidates per masked position
  std::size_t m = 4;           // kept after phonetic filtering
  std::size_t max_iters = 1;   // detect/generate/select rounds
  // Skip correction when the highest surprisal is below this value.
  std::optional<double> detection_threshold;

  void validate() const;
};

struct DetectionResult {
  std::vector<double> surprisals;
  std::vector<std::size_t> ranked;  // descending surprisal, ties by index
};

struct Candidate {
  Token token;
  double scorer_prob = 0.0;
  double similarity = 0.0;
};

struct FilteredCandidates {
  std::size_t position = 0;
  std::vector<Candidate> items;
};

struct ScoredSentence {
  TokenSeq sentence;
  std::vector<double> surprisals;
  double score = 0.0;  // mean surprisal
};

struct Selection {
  TokenSeq chosen;
  std::vector<ScoredSentence> scored;  // [0] is the input sentence
  std::size_t chosen_index = 0;
};

struct CorrectionIteration {
  std::size_t detected_position = 0;
  FilteredCandidates candidates;
  std::vector<ScoredSentence> scored;
  std::size_t chosen_index = 0;
};

struct CorrectionTrace {
  TokenSeq input;
  std::vector<CorrectionIteration> iterations;
  TokenSeq output;
};

DetectionResult detect(const Scorer& scorer, const TokenSeq& x);

FilteredCandidates generate(const Scorer& scorer, const PhonemeTable& table, const TokenSeq& x,
                            std::size_t position, std::size_t l, std::size_t m);

ScoredSentence score_sentence(const Scorer& scorer, const TokenSeq& y);

// Incremental rescoring of `edited`, which differs from base.sentence only at
// edited_index. Bitwise identical to score_sentence(scorer, edited).
ScoredSentence rescore_sentence(const Scorer& scorer, const ScoredSentence& base,
                                const TokenSeq& edited, std::size_t edited_index);

// Chooses among x and every single-position substitution in cands. Ties go
// to x, then to the earliest candidate.
Selection select(const Scorer& scorer, const TokenSeq& x, const FilteredCandidates& cands);
// Same, reusing an existing score of x (detect already computed it).
Selection select(const Scorer& scorer, const ScoredSentence& x, const FilteredCandidates& cands);
// Reference: full rescoring of every sentence, one after another.
Selection select_serial(const Scorer& scorer, const TokenSeq& x, const FilteredCandidates& cands);

CorrectionTrace correct(const Scorer& scorer, const PhonemeTable& table, const TokenSeq& x,
                        const PipelineConfig& config);

// One trace per input sentence, in input order. workers <= 0 uses every core.
std::vector<CorrectionTrace> correct_corpus(const Scorer& scorer, const PhonemeTable& table,
                                            std::span<const TokenSeq> corpus,
                                            const PipelineConfig& config, int workers = 0);
std::vector<CorrectionTrace> correct_corpus_serial(const Scorer& scorer,
                                                   const PhonemeTable& table,
                                                   std::span<const TokenSeq> corpus,
                                                   const PipelineConfig& config);

nlohmann::json to_json(const CorrectionTrace& trace);

}  // namespace ucorrect
