#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ucorrect/corpus.hpp"
#include "ucorrect/phonetics.hpp"

namespace ucorrect {

struct NoiseConfig {
  double p_sub = 0.0;
  double p_ins = 0.0;
  double p_del = 0.0;
  // Restrict substitutions to tokens phonetically similar to the original.
  bool confusable_only = false;
  double confusable_threshold = 0.5;
  std::uint64_t seed = 0;
  // When set, every sentence gets exactly this many substitutions at distinct
  // positions (fewer if not enough positions have an eligible replacement),
  // and the per-token probabilities are ignored.
  std::optional<std::size_t> exact_substitutions;

  void validate() const;
};

enum class EditKind { kSubstitution, kInsertion, kDeletion };

// Positions index the clean reference. An insertion goes right after its
// position; substitutions and deletions act on the token at it.
struct Edit {
  EditKind kind;
  std::size_t position = 0;
  std::optional<Token> original;     // absent for insertions
  std::optional<Token> replacement;  // absent for deletions
};

struct NoisyPair {
  TokenSeq source;     // corrupted
  TokenSeq reference;  // clean
  std::vector<Edit> edits;
};

// Generator for sentence `index`: std::mt19937_64 seeded with
// splitmix64(splitmix64(seed) + index). Distributions are derived by hand
// from raw 64-bit outputs so results do not depend on the standard library.
std::mt19937_64 sentence_rng(std::uint64_t seed, std::uint64_t index);
double uniform01(std::mt19937_64& rng);
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n);

std::vector<NoisyPair> inject(std::span<const TokenSeq> corpus, const NoiseConfig& config,
                              const PhonemeTable& table, const Vocab& vocab, int workers = 0);

TokenSeq apply_edits(const TokenSeq& reference, std::span<const Edit> edits);

std::string_view to_string(EditKind kind);
// source<TAB>reference lines.
std::string to_tsv(std::span<const NoisyPair> pairs);
nlohmann::json edits_json(std::span<const NoisyPair> pairs);

}  // namespace ucorrect
