// Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
// exits non-zero when any fails or overruns its time budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "test_support.hpp"
#include "ucorrect/cli.hpp"
#include "ucorrect/correction.hpp"
#include "ucorrect/evaluation.hpp"
#include "ucorrect/kernels.hpp"
#include "ucorrect/ngram_scorer.hpp"
#include "ucorrect/synth.hpp"

namespace ucorrect {
namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// Stable ranking by descending surprisal, ties by index.
std::vector<std::size_t> rank_desc(const std::vector<double>& s) {
  std::vector<std::size_t> idx(s.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  return idx;
}

Outcome werr_cells() {
  struct Cell {
    double base, sys, werr;
  };
  const Cell cells[] = {{4.83, 4.50, 6.83},  {4.83, 5.28, -9.32}, {4.83, 5.19, -7.45},
                        {4.83, 4.16, 13.87}, {4.83, 4.14, 14.29}, {4.94, 4.58, 7.29},
                        {4.94, 4.59, 7.09},  {5.21, 4.96, 4.80},  {4.62, 4.31, 6.71},
                        {9.68, 9.41, 2.79},  {4.94, 4.20, 14.98}, {9.68, 9.24, 4.55}};
  double worst = 0.0;
  for (const auto& c : cells) worst = std::max(worst, std::abs(werr(c.base, c.sys) - c.werr));
  return {worst <= 0.01, "12 cells, max deviation " + fmt("%.4f", worst)};
}

Outcome speedups() {
  double a = speedup(149.5, 35.12), b = speedup(149.5, 21.2);
  return {std::abs(a - 4.26) <= 0.01 && std::abs(b - 7.05) <= 0.01,
          fmt("%.4fx", a) + " and " + fmt("%.4fx", b)};
}

Outcome wer_oracle() {
  const Vocab none;
  std::mt19937 rng(1);
  auto word = [&] {
    std::string w;
    for (std::size_t n = 1 + rng() % 8; n > 0; --n) w += "abcd"[rng() % 4];
    return w;
  };
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::string r = word(), h = word();
    auto got = wer(tokenize(r, none), tokenize(h, none));
    auto want = oracle::wer_counts(oracle::chars(r), oracle::chars(h));
    if (got.substitutions != want.substitutions || got.insertions != want.insertions ||
        got.deletions != want.deletions) {
      ++mismatches;
    }
  }
  return {mismatches == 0, "1000 pairs, " + std::to_string(mismatches) + " mismatches"};
}

std::vector<std::string> all_words(std::size_t max_len) {
  std::vector<std::string> out, frontier{""};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<std::string> next;
    for (const auto& w : frontier) {
      for (char c : std::string("abcd")) next.push_back(w + c);
    }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

struct FixtureModel {
  Vocab vocab = testing::abcd_vocab();
  std::vector<std::string> lines = read_lines(testing::fixture("abcd_20.txt"));
  NgramScorer scorer = train_ngram(testing::tokenize_all(lines, vocab), NgramConfig{}, vocab);
  oracle::NgramSpec spec = testing::oracle_spec(lines, vocab, NgramConfig{});
};

Outcome detector_oracle() {
  FixtureModel f;
  auto words = all_words(6);
  int mismatches = 0;
  for (const auto& w : words) {
    auto sentence = oracle::chars(w);
    std::vector<double> want(sentence.size());
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      want[i] = -std::log(oracle::ngram_prob(f.spec, sentence, i, sentence[i]));
    }
    if (detect(f.scorer, tokenize(w, f.vocab)).ranked != rank_desc(want)) ++mismatches;
  }
  return {mismatches == 0,
          std::to_string(words.size()) + " sentences, " + std::to_string(mismatches) + " mismatches"};
}

Outcome selector_oracle() {
  FixtureModel f;
  UniformScorer uniform(f.vocab);
  std::mt19937 rng(5);
  int cases = 0, mismatches = 0, ties_kept = 0;
  for (const auto& w : all_words(6)) {
    // Every sentence up to length 4; a random sample of the longer ones.
    if (w.size() > 4 && rng() % 8 != 0) continue;
    TokenSeq x = tokenize(w, f.vocab);
    std::size_t pos = rng() % x.size();
    std::size_t m = 1 + rng() % 3;
    auto cands = generate(f.scorer, {}, x, pos, 3, m);
    if (rng() % 5 == 0) cands.items.clear();

    std::vector<double> scores{oracle::sentence_score(f.spec, oracle::chars(w))};
    for (const auto& c : cands.items) {
      std::string y = w;
      y[pos] = c.token.text[0];
      scores.push_back(oracle::sentence_score(f.spec, oracle::chars(y)));
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < scores.size(); ++k) {
      if (scores[k] < scores[best]) best = k;
    }
    auto sel = select(f.scorer, x, cands);
    ++cases;
    if (sel.chosen_index != best) ++mismatches;

    // All scores tie under the uniform scorer: X must win.
    auto tie = select(uniform, x, cands);
    if (tie.chosen_index == 0) ++ties_kept;
  }
  return {mismatches == 0 && ties_kept == cases,
          std::to_string(cases) + " cases, " + std::to_string(mismatches) + " mismatches, " +
              std::to_string(ties_kept) + " ties kept X"};
}

// 200 distinct length-8 sentences over 20 tokens from 5 homophone groups.
struct RecoveryCorpus {
  Vocab vocab{{"妈", "麻", "马", "骂", "吗", "诗", "十", "使", "是", "事", "鸡", "级", "几", "记",
               "包", "薄", "宝", "报", "鱼", "雨"}};
  PhonemeTable table = load_phoneme_table(testing::data_file("phonemes/mandarin_sample.tsv"));
  std::vector<TokenSeq> distinct;
  std::vector<TokenSeq> training;  // every sentence 5 times
  NgramScorer scorer{vocab, NgramConfig{}};

  RecoveryCorpus() {
    std::mt19937 rng(2024);
    std::set<std::string> seen;
    while (distinct.size() < 200) {
      std::string line;
      for (int i = 0; i < 8; ++i) line += vocab.texts()[rng() % vocab.size()];
      if (seen.insert(line).second) distinct.push_back(tokenize(line, vocab));
    }
    for (int r = 0; r < 5; ++r) training.insert(training.end(), distinct.begin(), distinct.end());
    scorer = train_ngram(training, NgramConfig{2, 0.5, 0.1}, vocab);
  }
};

const RecoveryCorpus& recovery() {
  static const RecoveryCorpus c;
  return c;
}

std::map<std::string, std::string> phoneme_map() {
  std::map<std::string, std::string> out;
  for (const auto& line : read_lines(testing::data_file("phonemes/mandarin_sample.tsv"))) {
    auto tab = line.find('\t');
    if (line.empty() || line[0] == '#' || tab == std::string::npos) continue;
    out[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return out;
}

oracle::NgramSpec recovery_spec() {
  const auto& c = recovery();
  std::vector<std::string> lines;
  for (const auto& s : c.training) lines.push_back(s.text());
  return testing::oracle_spec(lines, c.vocab, c.scorer.config());
}

// One confusable substitution per distinct sentence.
std::vector<NoisyPair> recovery_pairs() {
  const auto& c = recovery();
  NoiseConfig noise;
  noise.confusable_only = true;
  noise.confusable_threshold = 0.5;
  noise.seed = 7;
  noise.exact_substitutions = 1;
  return inject(c.distinct, noise, c.table, c.vocab);
}

// Counting-oracle results over all 200 corrupted sentences, frozen from
// `acceptance --derive`.
constexpr std::size_t kOracleDetected = 162;
constexpr std::size_t kOracleRestored = 145;

int derive() {
  auto spec = recovery_spec();
  auto phonemes = phoneme_map();
  std::size_t detected = 0, restored = 0;
  for (const auto& p : recovery_pairs()) {
    auto r = oracle::correct_once(spec, testing::texts(p.source), phonemes, 10, 4);
    detected += r.detected == p.edits.at(0).position;
    restored += r.output == testing::texts(p.reference);
  }
  std::printf("oracle: detected %zu / 200, restored %zu / 200\n", detected, restored);
  return 0;
}

Outcome end_to_end() {
  const auto& c = recovery();
  auto pairs = recovery_pairs();
  std::vector<TokenSeq> sources;
  std::vector<ParallelPair> parallel;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].edits.size() != 1) return {false, "sentence without a confusable substitution"};
    sources.push_back(pairs[i].source);
    parallel.push_back({pairs[i].source, pairs[i].reference, i + 1});
  }
  auto traces = correct_corpus(c.scorer, c.table, sources, PipelineConfig{10, 4, 1, {}});

  std::size_t detected = 0, restored = 0;
  std::vector<TokenSeq> corrected;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& t = traces[i];
    if (!t.iterations.empty() && t.iterations[0].detected_position == pairs[i].edits[0].position) {
      ++detected;
    }
    if (t.output == pairs[i].reference) ++restored;
    corrected.push_back(t.output);
  }

  // Sentence-level agreement with the counting oracle on a sample.
  auto spec = recovery_spec();
  auto phonemes = phoneme_map();
  std::size_t disagreements = 0;
  for (std::size_t i = 0; i < 12; ++i) {
    auto r = oracle::correct_once(spec, testing::texts(sources[i]), phonemes, 10, 4);
    if (r.detected != traces[i].iterations.at(0).detected_position ||
        r.output != testing::texts(traces[i].output)) {
      ++disagreements;
    }
  }

  auto report = evaluate(parallel, corrected);
  const bool ok = detected == kOracleDetected && restored == kOracleRestored &&
                  disagreements == 0 && report.werr && *report.werr > 0.0;
  return {ok, "detected " + std::to_string(detected) + "/200 (oracle " +
                  std::to_string(kOracleDetected) + "), restored " + std::to_string(restored) +
                  "/200 (oracle " + std::to_string(kOracleRestored) + "), WERR " +
                  (report.werr ? fmt("%.2f", *report.werr) : std::string("n/a")) + ", FAR " +
                  (report.far.far() ? fmt("%.1f", *report.far.far()) : "null") +
                  ", sample disagreements " + std::to_string(disagreements)};
}

Outcome no_false_alarms() {
  const auto& c = recovery();
  auto traces = correct_corpus(c.scorer, c.table, c.distinct, PipelineConfig{10, 4, 1, {}});
  auto spec = recovery_spec();
  std::vector<ParallelPair> parallel;
  std::vector<TokenSeq> corrected;
  std::size_t changed = 0, changed_sentences = 0, oracle_lower = 0;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    parallel.push_back({c.distinct[i], c.distinct[i], i + 1});
    corrected.push_back(traces[i].output);
    if (traces[i].output == c.distinct[i]) continue;
    ++changed_sentences;
    for (std::size_t p = 0; p < c.distinct[i].size(); ++p) {
      changed += !(traces[i].output[p] == c.distinct[i][p]);
    }
    // Does the counting oracle agree that the change lowers the mean surprisal?
    if (changed_sentences <= 20 &&
        oracle::sentence_score(spec, testing::texts(traces[i].output)) <
            oracle::sentence_score(spec, testing::texts(c.distinct[i]))) {
      ++oracle_lower;
    }
  }
  auto report = evaluate(parallel, corrected);
  return {changed == 0 && !report.far.far().has_value(),
          std::to_string(changed) + " tokens changed in " + std::to_string(changed_sentences) +
              " sentences (oracle confirms a lower score for " + std::to_string(oracle_lower) +
              " of the first " + std::to_string(std::min<std::size_t>(changed_sentences, 20)) +
              "), FAR " + (report.far.far() ? fmt("%.1f", *report.far.far()) : "null")};
}

Outcome normalization() {
  const auto& c = recovery();
  std::mt19937 rng(8);
  double worst_sum = 0.0;
  std::vector<std::pair<TokenSeq, std::size_t>> queries;
  for (int q = 0; q < 1000; ++q) {
    std::string line;
    for (std::size_t n = 1 + rng() % 10; n > 0; --n) line += c.vocab.texts()[rng() % c.vocab.size()];
    TokenSeq x = tokenize(line, c.vocab);
    std::size_t i = rng() % x.size();
    double sum = 0.0;
    for (TokenId t = 0; t < c.vocab.size(); ++t) sum += c.scorer.prob(MaskedSeq(x, i), t);
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    queries.emplace_back(std::move(x), i);
  }

  testing::TempDir dir;
  c.scorer.save(dir / "model.json");
  auto loaded = NgramScorer::load(dir / "model.json");
  double worst_roundtrip = 0.0;
  for (const auto& [x, i] : queries) {
    TokenId t = static_cast<TokenId>(rng() % c.vocab.size());
    worst_roundtrip = std::max(worst_roundtrip, std::abs(loaded.prob(MaskedSeq(x, i), t) -
                                                         c.scorer.prob(MaskedSeq(x, i), t)));
  }
  return {worst_sum <= 1e-9 && worst_roundtrip <= 1e-12,
          "max |sum-1| " + fmt("%.2e", worst_sum) + ", max round-trip diff " +
              fmt("%.2e", worst_roundtrip)};
}

Outcome selector_safety() {
  const auto& c = recovery();
  std::vector<TokenSeq> clean(c.distinct.begin(), c.distinct.end());
  clean.insert(clean.end(), c.distinct.begin(), c.distinct.end());
  clean.insert(clean.end(), c.distinct.begin(), c.distinct.begin() + 100);
  NoiseConfig noise{0.15, 0.05, 0.05, false, 0.5, 99, std::nullopt};
  auto pairs = inject(clean, noise, c.table, c.vocab);
  std::size_t violations = 0;
  for (const auto& p : pairs) {
    auto trace = correct(c.scorer, c.table, p.source, PipelineConfig{10, 4, 2, {}});
    if (score_sentence(c.scorer, trace.output).score >
        score_sentence(c.scorer, p.source).score + 1e-12) {
      ++violations;
    }
  }
  return {violations == 0 && pairs.size() == 500,
          std::to_string(pairs.size()) + " sentences, " + std::to_string(violations) +
              " score increases"};
}

int cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"ucorrect"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

Outcome determinism() {
  const auto& c = recovery();
  testing::TempDir dir;
  std::string clean;
  for (const auto& s : c.distinct) clean += s.text() + "\n";
  write_file(dir / "clean.txt", clean);
  if (cli({"train", "--corpus", (dir / "clean.txt").string(), "--output",
           (dir / "model.json").string()}) != 0) {
    return {false, "train failed"};
  }
  const std::string table = testing::data_file("phonemes/mandarin_sample.tsv").string();

  std::vector<std::string> outputs;
  for (int run = 0; run < 2; ++run) {
    const std::string tag = std::to_string(run);
    const std::string noisy = (dir / ("noisy" + tag + ".tsv")).string();
    if (cli({"inject", "--input", (dir / "clean.txt").string(), "--output", noisy, "--edits",
             (dir / ("edits" + tag + ".json")).string(), "--phoneme-table", table, "--p-sub", "0.1",
             "--p-ins", "0.02", "--p-del", "0.02", "--confusable-only", "--seed", "42"}) != 0) {
      return {false, "inject failed"};
    }
    std::string sources;
    for (const auto& line : read_lines(noisy)) sources += line.substr(0, line.find('\t')) + "\n";
    write_file(dir / ("src" + tag + ".txt"), sources);
    if (cli({"correct", "--input", (dir / ("src" + tag + ".txt")).string(), "--model",
             (dir / "model.json").string(), "--phoneme-table", table, "--output",
             (dir / ("out" + tag + ".txt")).string(), "--trace",
             (dir / ("trace" + tag + ".jsonl")).string()}) != 0) {
      return {false, "correct failed"};
    }
    outputs.push_back(read_file(noisy) + read_file(dir / ("edits" + tag + ".json")) +
                      read_file(dir / ("out" + tag + ".txt")) +
                      read_file(dir / ("trace" + tag + ".jsonl")));
  }
  return {outputs[0] == outputs[1] && !outputs[0].empty(),
          std::to_string(outputs[0].size()) + " bytes compared"};
}

}  // namespace
}  // namespace ucorrect

int main(int argc, char** argv) {
  using namespace ucorrect;
  if (argc > 1 && std::string(argv[1]) == "--derive") return derive();
  const std::vector<Criterion> criteria{
      {1, "WERR arithmetic", 1, werr_cells},
      {2, "speedup arithmetic", 1, speedups},
      {3, "edit-distance oracle", 5, wer_oracle},
      {4, "detector oracle", 10, detector_oracle},
      {5, "selector oracle", 10, selector_oracle},
      {6, "end-to-end recovery", 60, end_to_end},
      {7, "no-false-alarm floor", 30, no_false_alarms},
      {8, "scorer normalization", 10, normalization},
      {9, "selector safety", 30, selector_safety},
      {10, "determinism", 30, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool ok = o.ok && secs < c.budget_s;
    if (!ok) ++failed;
    std::printf("criterion %2d %-22s %s  %s  [%.2f s, budget %.0f s]\n", c.id, c.name.c_str(),
                ok ? "PASS" : "FAIL", o.detail.c_str(), secs, c.budget_s);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
