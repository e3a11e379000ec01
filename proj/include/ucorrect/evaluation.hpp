#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ucorrect/corpus.hpp"

namespace ucorrect {

struct WerStats {
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  std::size_t ref_len = 0;

  std::size_t errors() const noexcept { return substitutions + insertions + deletions; }
  // Percentage; 0 for an empty reference.
  double wer() const noexcept;

  WerStats& operator+=(const WerStats& other) noexcept;
};

enum class EditOp { kMatch, kSubstitution, kDeletion, kInsertion };

struct AlignmentStep {
  EditOp op;
  std::optional<std::size_t> ref_index;  // absent for insertions
  std::optional<std::size_t> hyp_index;  // absent for deletions
};

// Unit-cost alignment in reference order. Equal-cost paths are resolved while
// backtracing from the end, preferring match > substitution > deletion > insertion.
std::vector<AlignmentStep> align(const TokenSeq& reference, const TokenSeq& hypothesis);

WerStats wer(const TokenSeq& reference, const TokenSeq& hypothesis);

// 100 * (base - sys) / base. Throws InvalidInput when base_wer <= 0.
double werr(double base_wer, double sys_wer);

struct FarStats {
  std::size_t corrections = 0;
  std::size_t false_alarms = 0;

  // Percentage of corrections that touched an already-correct token; absent
  // when nothing was corrected.
  std::optional<double> far() const noexcept;

  FarStats& operator+=(const FarStats& other) noexcept;
};

// Throws LengthMismatch when corrected and source lengths differ.
FarStats far(const TokenSeq& source, const TokenSeq& reference, const TokenSeq& corrected);

struct LatencyStats {
  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  std::size_t total_sentences = 0;
  std::optional<double> baseline_ms;
  std::optional<double> speedup;
};

using Clock = std::function<std::chrono::nanoseconds()>;

// Times fn per sentence on the calling thread: `warmup` untimed passes over
// the corpus, then `repeats` timed passes. Each sentence's latency is its
// mean over the timed passes; mean/p50/p95 are taken over sentences
// (nearest-rank percentiles).
LatencyStats bench(const std::function<void(const TokenSeq&)>& fn,
                   std::span<const TokenSeq> corpus, std::size_t warmup, std::size_t repeats,
                   const Clock& clock = {});

double speedup(double baseline_ms, double mean_ms);

struct EvalReport {
  WerStats baseline;
  WerStats system;
  std::optional<double> werr;  // absent when baseline WER is 0
  FarStats far;
  std::optional<LatencyStats> latency;
};

// Corpus metrics aggregate counts over sentences before dividing.
EvalReport evaluate(std::span<const ParallelPair> pairs, std::span<const TokenSeq> corrected,
                    int workers = 0);

nlohmann::json to_json(const WerStats& stats);
nlohmann::json to_json(const LatencyStats& stats);
nlohmann::json to_json(const EvalReport& report);

// Fixed-width table with Model, FAR, wer and werr columns.
std::string render_table(const EvalReport& report, const std::string& system_name = "UCorrect");

}  // namespace ucorrect
