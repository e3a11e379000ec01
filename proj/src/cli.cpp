#include "ucorrect/cli.hpp"

#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <omp.h>

#include "ucorrect/config.hpp"
#include "ucorrect/correction.hpp"
#include "ucorrect/error.hpp"
#include "ucorrect/evaluation.hpp"
#include "ucorrect/ngram_scorer.hpp"
#include "ucorrect/phonetics.hpp"
#include "ucorrect/synth.hpp"

namespace ucorrect {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

// Flags shared by every subcommand; each one overrides the config file.
struct CommonFlags {
  std::string config_path;
  std::optional<std::string> scorer_kind, model, scorer_command, scorer_tcp, vocab,
      phoneme_table;
  std::optional<std::size_t> window, l, m, max_iters, max_vocab;
  std::optional<double> lambda, add_k, detection_threshold;
  std::optional<std::int64_t> timeout_ms;
  std::optional<int> workers;

  void attach(CLI::App& app) {
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--scorer", scorer_kind, "scorer kind: ngram, external or uniform")
        ->check(CLI::IsMember({"ngram", "external", "uniform"}));
    app.add_option("--model", model, "n-gram model file");
    app.add_option("--scorer-command", scorer_command, "external scorer command line");
    app.add_option("--scorer-tcp", scorer_tcp, "external scorer address host:port");
    app.add_option("--vocab", vocab, "vocabulary file (one token per line)");
    app.add_option("--window", window, "n-gram context tokens per side");
    app.add_option("--lambda", lambda, "n-gram left/right interpolation weight");
    app.add_option("--add-k", add_k, "n-gram additive smoothing");
    app.add_option("--timeout-ms", timeout_ms, "external scorer timeout");
    app.add_option("--l", l, "scorer candidates per detected position");
    app.add_option("--m", m, "candidates kept after phonetic filtering");
    app.add_option("--max-iters", max_iters, "detect/generate/select rounds");
    app.add_option("--detection-threshold", detection_threshold,
                   "skip sentences whose top surprisal is below this");
    app.add_option("--phoneme-table", phoneme_table, "token<TAB>phonemes table");
    app.add_option("--workers", workers, "worker threads (0 = all cores)");
    app.add_option("--max-vocab", max_vocab, "vocabulary size when building one");
  }

  RunConfig resolve() const {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    if (scorer_kind) cfg.scorer.kind = parse_scorer_kind(*scorer_kind);
    if (model) cfg.scorer.model_path = *model;
    if (scorer_command) cfg.scorer.command = *scorer_command;
    if (scorer_tcp) cfg.scorer.tcp = *scorer_tcp;
    if (vocab) cfg.scorer.vocab_path = *vocab;
    if (window) cfg.scorer.ngram.window = *window;
    if (lambda) cfg.scorer.ngram.lambda = *lambda;
    if (add_k) cfg.scorer.ngram.add_k = *add_k;
    if (timeout_ms) cfg.scorer.timeout = std::chrono::milliseconds(*timeout_ms);
    if (l) cfg.pipeline.l = *l;
    if (m) cfg.pipeline.m = *m;
    if (max_iters) cfg.pipeline.max_iters = *max_iters;
    if (detection_threshold) cfg.pipeline.detection_threshold = *detection_threshold;
    if (phoneme_table) cfg.phoneme_table = *phoneme_table;
    if (workers) cfg.workers = *workers;
    if (max_vocab) cfg.max_vocab = *max_vocab;
    return cfg;
  }
};

struct NoiseFlags {
  std::optional<double> p_sub, p_ins, p_del, threshold;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> exact_subs;
  bool confusable_only = false;

  void attach(CLI::App& app) {
    app.add_option("--p-sub", p_sub, "per-token substitution probability");
    app.add_option("--p-ins", p_ins, "per-token insertion probability");
    app.add_option("--p-del", p_del, "per-token deletion probability");
    app.add_flag("--confusable-only", confusable_only,
                 "draw substitutions from phonetically similar tokens");
    app.add_option("--confusable-threshold", threshold, "minimum phonetic similarity");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--exact-subs", exact_subs, "exact substitutions per sentence");
  }

  void apply(NoiseConfig& noise) const {
    if (p_sub) noise.p_sub = *p_sub;
    if (p_ins) noise.p_ins = *p_ins;
    if (p_del) noise.p_del = *p_del;
    if (confusable_only) noise.confusable_only = true;
    if (threshold) noise.confusable_threshold = *threshold;
    if (seed) noise.seed = *seed;
    if (exact_subs) noise.exact_substitutions = *exact_subs;
  }
};

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : path_(path), fallback_(fallback) {}
  void write(const std::string& content) {
    if (path_.empty()) {
      fallback_ << content;
      fallback_.flush();
    } else {
      write_file(path_, content);
    }
  }

 private:
  std::string path_;
  std::ostream& fallback_;
};

PhonemeTable phoneme_table_for(const RunConfig& cfg, std::ostream& err) {
  if (cfg.phoneme_table.empty()) return {};
  return load_phoneme_table(cfg.phoneme_table,
                            [&err](const std::string& msg) { err << "warning: " << msg << '\n'; });
}

std::vector<std::string> non_blank(const std::vector<std::string>& lines) {
  std::vector<std::string> out;
  for (const auto& l : lines) {
    if (!is_blank(l)) out.push_back(l);
  }
  return out;
}

std::vector<TokenSeq> tokenize_lines(const std::vector<std::string>& lines, const Vocab& vocab) {
  std::vector<TokenSeq> out;
  out.reserve(lines.size());
  for (const auto& l : lines) out.push_back(tokenize(l, vocab));
  return out;
}

// Scorer for commands that read a plain corpus: uniform and external scorers
// without an explicit vocabulary use one built from that corpus.
std::unique_ptr<Scorer> scorer_for_corpus(const RunConfig& cfg,
                                          const std::vector<std::string>& lines) {
  std::optional<Vocab> fallback;
  if (cfg.scorer.kind != ScorerKind::kNgram && cfg.scorer.vocab_path.empty() &&
      cfg.scorer.model_path.empty()) {
    fallback = build_vocab(lines, cfg.max_vocab);
  }
  return make_scorer(cfg.scorer, fallback);
}

int cmd_train(const RunConfig& cfg, const std::string& corpus_path, const std::string& output,
              std::ostream& out) {
  auto lines = non_blank(read_lines(corpus_path));
  Vocab vocab = cfg.scorer.vocab_path.empty() ? build_vocab(lines, cfg.max_vocab)
                                              : load_vocab(cfg.scorer.vocab_path);
  auto corpus = tokenize_lines(lines, vocab);
  auto scorer = train_ngram(corpus, cfg.scorer.ngram, vocab);
  scorer.save(output);
  out << "trained n-gram scorer on " << corpus.size() << " sentences, vocabulary "
      << vocab.size() << ", window " << cfg.scorer.ngram.window << " -> " << output << '\n';
  return kExitOk;
}

int cmd_finetune(const RunConfig& cfg, const std::string& corpus_path, double weight,
                 const std::string& output, std::ostream& out) {
  if (cfg.scorer.model_path.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "finetune needs --model");
  }
  auto base = NgramScorer::load(cfg.scorer.model_path);
  auto corpus = tokenize_lines(non_blank(read_lines(corpus_path)), base.vocab());
  auto tuned = fine_tune(base, corpus, weight);
  tuned.save(output);
  out << "fine-tuned on " << corpus.size() << " sentences with weight " << weight << " -> "
      << output << '\n';
  return kExitOk;
}

int cmd_correct(const RunConfig& cfg, const std::string& input, const std::string& output,
                const std::string& trace_path, std::ostream& out, std::ostream& err) {
  auto lines = read_lines(input);
  auto scorer = scorer_for_corpus(cfg, non_blank(lines));
  PhonemeTable table = phoneme_table_for(cfg, err);

  std::vector<TokenSeq> sentences;
  for (const auto& l : lines) {
    if (!is_blank(l)) sentences.push_back(tokenize(l, scorer->vocab()));
  }
  auto traces = correct_corpus(*scorer, table, sentences, cfg.pipeline, cfg.workers);

  std::string corrected, trace_lines;
  std::size_t next = 0;
  for (const auto& l : lines) {
    if (!is_blank(l)) {
      corrected += traces[next].output.text();
      trace_lines += to_json(traces[next]).dump() + "\n";
      ++next;
    }
    corrected += '\n';
  }
  Output(output, out).write(corrected);
  if (!trace_path.empty()) write_file(trace_path, trace_lines);
  return kExitOk;
}

int cmd_inject(const RunConfig& cfg, const std::string& input, const std::string& output,
               const std::string& edits_path, std::ostream& out, std::ostream& err) {
  auto lines = non_blank(read_lines(input));
  if (lines.empty()) throw Error(ErrorCode::kEmptyInput, "input corpus is empty");
  std::optional<Vocab> fallback;
  if (cfg.scorer.vocab_path.empty() && cfg.scorer.model_path.empty()) {
    fallback = build_vocab(lines, cfg.max_vocab);
  }
  Vocab vocab = resolve_vocab(cfg.scorer, fallback);
  PhonemeTable table = phoneme_table_for(cfg, err);
  auto corpus = tokenize_lines(lines, vocab);
  auto pairs = inject(corpus, cfg.noise, table, vocab, cfg.workers);
  Output(output, out).write(to_tsv(pairs));
  if (!edits_path.empty()) write_file(edits_path, edits_json(pairs).dump() + "\n");
  return kExitOk;
}

int cmd_eval(const RunConfig& cfg, const std::string& pairs_path,
             const std::string& corrected_path, const std::string& report_path, bool json,
             const std::string& system_name, std::ostream& out) {
  const Vocab surface;  // token identity is the surface text
  auto pairs = load_parallel(pairs_path, surface);
  auto corrected = tokenize_lines(non_blank(read_lines(corrected_path)), surface);
  EvalReport report = evaluate(pairs, corrected, cfg.workers);
  if (!report_path.empty()) write_file(report_path, to_json(report).dump(2) + "\n");
  if (json) {
    out << to_json(report).dump(2) << '\n';
  } else {
    out << render_table(report, system_name);
  }
  return kExitOk;
}

int cmd_bench(const RunConfig& cfg, const std::string& input, std::size_t warmup,
              std::size_t repeats, std::optional<double> baseline_ms, bool json, std::ostream& out,
              std::ostream& err) {
  auto lines = non_blank(read_lines(input));
  if (lines.empty()) throw Error(ErrorCode::kEmptyInput, "benchmark corpus is empty");
  auto scorer = scorer_for_corpus(cfg, lines);
  PhonemeTable table = phoneme_table_for(cfg, err);
  auto corpus = tokenize_lines(lines, scorer->vocab());
  cfg.pipeline.validate();

  // Latency is reported per sentence on one thread.
  const int saved_threads = omp_get_max_threads();
  omp_set_num_threads(1);
  LatencyStats stats;
  try {
    stats = bench([&](const TokenSeq& s) { (void)correct(*scorer, table, s, cfg.pipeline); },
                  corpus, warmup, repeats);
  } catch (...) {
    omp_set_num_threads(saved_threads);
    throw;
  }
  omp_set_num_threads(saved_threads);
  if (baseline_ms) {
    stats.baseline_ms = *baseline_ms;
    stats.speedup = speedup(*baseline_ms, stats.mean_ms);
  }

  if (json) {
    out << to_json(stats).dump(2) << '\n';
    return kExitOk;
  }
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(3);
  ss << "sentences         " << stats.total_sentences << '\n'
     << "mean ms/sent      " << stats.mean_ms << '\n'
     << "p50 ms            " << stats.p50_ms << '\n'
     << "p95 ms            " << stats.p95_ms << '\n';
  if (stats.speedup) {
    ss.precision(2);
    ss << "speedup           " << *stats.speedup << "x (baseline " << *stats.baseline_ms
       << " ms)\n";
  }
  out << ss.str();
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const argv[], std::ostream& out, std::ostream& err) {
  CLI::App app{"Unsupervised detector-generator-selector correction of ASR transcripts",
               "ucorrect"};
  app.require_subcommand(1);

  CommonFlags common;
  std::string corpus_path, output, input, trace_path, edits_path, pairs_path, corrected_path,
      report_path, system_name = "UCorrect";
  double weight = 1.0;
  std::size_t warmup = 1, repeats = 3;
  std::optional<double> baseline_ms;
  bool json = false;
  NoiseFlags noise;

  auto* train = app.add_subcommand("train", "train an n-gram scorer on a plain corpus");
  common.attach(*train);
  train->add_option("--corpus", corpus_path, "training text, one sentence per line")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--output,-o", output, "model file to write")->required();

  auto* finetune = app.add_subcommand("finetune", "continue training on domain text");
  common.attach(*finetune);
  finetune->add_option("--corpus", corpus_path, "domain text")->required()->check(CLI::ExistingFile);
  finetune->add_option("--weight", weight, "weight of the domain counts");
  finetune->add_option("--output,-o", output, "model file to write")->required();

  auto* correct_cmd = app.add_subcommand("correct", "correct a plain corpus");
  common.attach(*correct_cmd);
  correct_cmd->add_option("--input,-i", input, "sentences to correct")->required()->check(CLI::ExistingFile);
  correct_cmd->add_option("--output,-o", output, "corrected sentences (stdout when absent)");
  correct_cmd->add_option("--trace", trace_path, "correction traces, one JSON per line");

  auto* inject_cmd = app.add_subcommand("inject", "write a noisy parallel corpus");
  common.attach(*inject_cmd);
  noise.attach(*inject_cmd);
  inject_cmd->add_option("--input,-i", input, "clean sentences")->required()->check(CLI::ExistingFile);
  inject_cmd->add_option("--output,-o", output, "noisy source<TAB>reference TSV");
  inject_cmd->add_option("--edits", edits_path, "edit lists as JSON");

  auto* eval_cmd = app.add_subcommand("eval", "score corrections against references");
  common.attach(*eval_cmd);
  eval_cmd->add_option("--pairs", pairs_path, "source<TAB>reference TSV")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--corrected", corrected_path, "corrected sentences, aligned with pairs")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--report", report_path, "write the report as JSON");
  eval_cmd->add_option("--system-name", system_name, "row label of the corrected system");
  eval_cmd->add_flag("--json", json, "print JSON instead of the table");

  auto* bench_cmd = app.add_subcommand("bench", "measure per-sentence correction latency");
  common.attach(*bench_cmd);
  bench_cmd->add_option("--input,-i", input, "sentences to time")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("--warmup", warmup, "untimed passes");
  bench_cmd->add_option("--repeats", repeats, "timed passes")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--baseline-ms", baseline_ms, "reference latency for the speedup ratio");
  bench_cmd->add_flag("--json", json, "print JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  RunConfig cfg;
  try {
    cfg = common.resolve();
    noise.apply(cfg.noise);
    cfg.validate();
  } catch (const Error& e) {
    err << "ucorrect: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*train) return cmd_train(cfg, corpus_path, output, out);
    if (*finetune) return cmd_finetune(cfg, corpus_path, weight, output, out);
    if (*correct_cmd) return cmd_correct(cfg, input, output, trace_path, out, err);
    if (*inject_cmd) return cmd_inject(cfg, input, output, edits_path, out, err);
    if (*eval_cmd) {
      return cmd_eval(cfg, pairs_path, corrected_path, report_path, json, system_name, out);
    }
    if (*bench_cmd) return cmd_bench(cfg, input, warmup, repeats, baseline_ms, json, out, err);
  } catch (const Error& e) {
    err << "ucorrect: " << e.what() << '\n';
    return e.code() == ErrorCode::kInvalidConfig ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    err << "ucorrect: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace ucorrect
