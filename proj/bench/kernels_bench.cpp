// Serial reference kernels against their OpenMP counterparts.
//
//   ./build/bench/kernels_bench --benchmark_counters_tabular=true

#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "ucorrect/correction.hpp"
#include "ucorrect/kernels.hpp"
#include "ucorrect/ngram_scorer.hpp"

namespace {

using namespace ucorrect;

struct Setup {
  Vocab vocab;
  NgramScorer scorer;
  PhonemeTable table;
  std::vector<TokenSeq> corpus;

  static Setup make(std::size_t sentences, std::size_t length) {
    std::vector<std::string> texts;
    for (char c = 'a'; c <= 'z'; ++c) texts.emplace_back(1, c);
    Vocab vocab(texts);
    std::mt19937 rng(17);
    std::vector<TokenSeq> corpus;
    for (std::size_t s = 0; s < sentences; ++s) {
      std::string line;
      for (std::size_t i = 0; i < length; ++i) line += static_cast<char>('a' + rng() % 26);
      corpus.push_back(tokenize(line, vocab));
    }
    NgramScorer scorer = train_ngram(corpus, {}, vocab);
    return {vocab, std::move(scorer), PhonemeTable{}, std::move(corpus)};
  }
};

const Setup& setup() {
  static const Setup s = Setup::make(256, 64);
  return s;
}

void BM_SurprisalsSerial(benchmark::State& state) {
  const auto& s = setup();
  for (auto _ : state) {
    for (const auto& seq : s.corpus) benchmark::DoNotOptimize(kernels::surprisals_serial(s.scorer, seq));
  }
  state.SetItemsProcessed(state.iterations() * s.corpus.size());
}
BENCHMARK(BM_SurprisalsSerial)->Unit(benchmark::kMillisecond);

void BM_SurprisalsOpenMP(benchmark::State& state) {
  const auto& s = setup();
  for (auto _ : state) {
    for (const auto& seq : s.corpus) benchmark::DoNotOptimize(kernels::surprisals(s.scorer, seq));
  }
  state.SetItemsProcessed(state.iterations() * s.corpus.size());
}
BENCHMARK(BM_SurprisalsOpenMP)->Unit(benchmark::kMillisecond);

void BM_SelectSerial(benchmark::State& state) {
  const auto& s = setup();
  const TokenSeq& x = s.corpus.front();
  FilteredCandidates cands = generate(s.scorer, s.table, x, 10, 20, 8);
  for (auto _ : state) benchmark::DoNotOptimize(select_serial(s.scorer, x, cands));
}
BENCHMARK(BM_SelectSerial)->Unit(benchmark::kMicrosecond);

void BM_SelectIncremental(benchmark::State& state) {
  const auto& s = setup();
  const TokenSeq& x = s.corpus.front();
  FilteredCandidates cands = generate(s.scorer, s.table, x, 10, 20, 8);
  for (auto _ : state) benchmark::DoNotOptimize(select(s.scorer, x, cands));
}
BENCHMARK(BM_SelectIncremental)->Unit(benchmark::kMicrosecond);

void BM_CorrectCorpusSerial(benchmark::State& state) {
  const auto& s = setup();
  PipelineConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(correct_corpus_serial(s.scorer, s.table, s.corpus, config));
}
BENCHMARK(BM_CorrectCorpusSerial)->Unit(benchmark::kMillisecond);

void BM_CorrectCorpusOpenMP(benchmark::State& state) {
  const auto& s = setup();
  PipelineConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(correct_corpus(s.scorer, s.table, s.corpus, config, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_CorrectCorpusOpenMP)->Arg(0)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
