#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "ucorrect/correction.hpp"
#include "ucorrect/ngram_scorer.hpp"
#include "ucorrect/synth.hpp"

namespace ucorrect {

enum class ScorerKind { kNgram, kExternal, kUniform };

ScorerKind parse_scorer_kind(std::string_view text);
std::string_view to_string(ScorerKind kind);

struct ScorerSettings {
  ScorerKind kind = ScorerKind::kNgram;
  std::string model_path;  // n-gram model JSON
  std::string command;     // external adapter command line
  std::string tcp;         // external adapter address, host:port
  std::string vocab_path;  // plain vocabulary for uniform / external
  NgramConfig ngram;
  std::chrono::milliseconds timeout{10000};
};

// Experiment configuration. Read from a JSON document shaped like
//
//   {"scorer": {"kind": "ngram", "model_path": "m.json", "window": 2, ...},
//    "pipeline": {"l": 10, "m": 4, "max_iters": 1, "detection_threshold": null},
//    "phoneme_table": "pinyin.tsv", "workers": 4,
//    "noise": {"p_sub": 0.1, "seed": 7, ...}}
//
// Every field is optional; command-line flags override the file.
struct RunConfig {
  ScorerSettings scorer;
  PipelineConfig pipeline;
  std::string phoneme_table;
  int workers = 0;  // 0: one per logical CPU
  NoiseConfig noise;
  std::size_t max_vocab = 100000;

  // Throws InvalidConfig for bad values or referenced paths that do not exist.
  void validate() const;
};

RunConfig run_config_from_json(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

// Vocabulary for uniform and external scorers: vocab_path, else the model's
// vocabulary, else fallback. Throws InvalidConfig when none is available.
Vocab resolve_vocab(const ScorerSettings& settings, const std::optional<Vocab>& fallback);

std::unique_ptr<Scorer> make_scorer(const ScorerSettings& settings,
                                    const std::optional<Vocab>& fallback_vocab = std::nullopt);

}  // namespace ucorrect
