#pragma once

// Brute-force reference computations used to derive and check expected
// values. Everything here works on plain strings and scans raw data; none of
// it calls into the library code paths it is used to check.

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace ucorrect::oracle {

using Sentence = std::vector<std::string>;

// Splits ASCII / pre-split text into one-character tokens.
Sentence chars(const std::string& ascii);

struct NgramSpec {
  std::vector<Sentence> corpus;
  std::set<std::string> vocab;  // regular tokens
  std::size_t window = 2;
  double lambda = 0.5;
  double add_k = 0.1;
};

// p(target | sentence masked at index) by rescanning the training corpus for
// every context order. Out-of-vocabulary tokens all read as one unknown
// symbol; positions outside a sentence read as padding.
double ngram_prob(const NgramSpec& spec, const Sentence& sentence, std::size_t index,
                  const std::string& target);

// Count of (position, target) pairs whose `order` left context matches.
double left_count(const NgramSpec& spec, const Sentence& context, const std::string& target);

// Mean of -ln p over positions; unknown tokens count as +infinity.
double sentence_score(const NgramSpec& spec, const Sentence& sentence);

struct OneShotCorrection {
  std::size_t detected = 0;
  Sentence output;
};

// One detect / generate / select round recomputed from raw counts. Phoneme
// strings come from `phonemes` (token text when absent); similarity is one
// minus the recursive edit distance over the longer length.
OneShotCorrection correct_once(const NgramSpec& spec, const Sentence& sentence,
                               const std::map<std::string, std::string>& phonemes, std::size_t l,
                               std::size_t m);

// Plain recursive edit distance (exponential; keep inputs short).
std::size_t edit_distance_recursive(const std::u32string& a, const std::u32string& b);

struct WerCounts {
  std::size_t substitutions = 0, insertions = 0, deletions = 0;
  bool operator==(const WerCounts&) const = default;
};

// Top-down memoized alignment that walks from the end of both strings and
// takes the first optimal move in the order match, substitution, deletion,
// insertion.
WerCounts wer_counts(const Sentence& reference, const Sentence& hypothesis);

}  // namespace ucorrect::oracle
