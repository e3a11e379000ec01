#include "ucorrect/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ucorrect/error.hpp"
#include "ucorrect/parallel.hpp"

namespace ucorrect {

double WerStats::wer() const noexcept {
  if (ref_len == 0) return 0.0;
  return 100.0 * static_cast<double>(errors()) / static_cast<double>(ref_len);
}

WerStats& WerStats::operator+=(const WerStats& other) noexcept {
  substitutions += other.substitutions;
  insertions += other.insertions;
  deletions += other.deletions;
  ref_len += other.ref_len;
  return *this;
}

std::vector<AlignmentStep> align(const TokenSeq& reference, const TokenSeq& hypothesis) {
  const std::size_t rn = reference.size();
  const std::size_t hn = hypothesis.size();
  const std::size_t cols = hn + 1;
  std::vector<std::size_t> d((rn + 1) * cols);
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return d[i * cols + j]; };

  for (std::size_t i = 0; i <= rn; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= hn; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= rn; ++i) {
    for (std::size_t j = 1; j <= hn; ++j) {
      std::size_t diag = at(i - 1, j - 1) + (reference[i - 1] == hypothesis[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }

  std::vector<AlignmentStep> steps;
  steps.reserve(std::max(rn, hn));
  std::size_t i = rn, j = hn;
  while (i > 0 || j > 0) {
    const std::size_t here = at(i, j);
    if (i > 0 && j > 0) {
      const bool same = reference[i - 1] == hypothesis[j - 1];
      if (same && at(i - 1, j - 1) == here) {
        steps.push_back({EditOp::kMatch, i - 1, j - 1});
        --i, --j;
        continue;
      }
      if (!same && at(i - 1, j - 1) + 1 == here) {
        steps.push_back({EditOp::kSubstitution, i - 1, j - 1});
        --i, --j;
        continue;
      }
    }
    if (i > 0 && at(i - 1, j) + 1 == here) {
      steps.push_back({EditOp::kDeletion, i - 1, std::nullopt});
      --i;
      continue;
    }
    steps.push_back({EditOp::kInsertion, std::nullopt, j - 1});
    --j;
  }
  std::reverse(steps.begin(), steps.end());
  return steps;
}

WerStats wer(const TokenSeq& reference, const TokenSeq& hypothesis) {
  WerStats out;
  out.ref_len = reference.size();
  for (const auto& step : align(reference, hypothesis)) {
    switch (step.op) {
      case EditOp::kMatch: break;
      case EditOp::kSubstitution: ++out.substitutions; break;
      case EditOp::kDeletion: ++out.deletions; break;
      case EditOp::kInsertion: ++out.insertions; break;
    }
  }
  return out;
}

double werr(double base_wer, double sys_wer) {
  if (!(base_wer > 0.0)) throw Error(ErrorCode::kInvalidInput, "baseline WER must be > 0");
  return 100.0 * (base_wer - sys_wer) / base_wer;
}

std::optional<double> FarStats::far() const noexcept {
  if (corrections == 0) return std::nullopt;
  return 100.0 * static_cast<double>(false_alarms) / static_cast<double>(corrections);
}

FarStats& FarStats::operator+=(const FarStats& other) noexcept {
  corrections += other.corrections;
  false_alarms += other.false_alarms;
  return *this;
}

FarStats far(const TokenSeq& source, const TokenSeq& reference, const TokenSeq& corrected) {
  if (corrected.size() != source.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "corrected length " + std::to_string(corrected.size()) +
                    " differs from source length " + std::to_string(source.size()));
  }
  std::vector<bool> already_correct(source.size(), false);
  for (const auto& step : align(reference, source)) {
    if (step.op == EditOp::kMatch) already_correct[*step.hyp_index] = true;
  }
  FarStats out;
  for (std::size_t p = 0; p < source.size(); ++p) {
    if (corrected[p] == source[p]) continue;
    ++out.corrections;
    if (already_correct[p]) ++out.false_alarms;
  }
  return out;
}

double speedup(double baseline_ms, double mean_ms) {
  if (!(mean_ms > 0.0)) throw Error(ErrorCode::kInvalidInput, "mean latency must be > 0");
  return baseline_ms / mean_ms;
}

LatencyStats bench(const std::function<void(const TokenSeq&)>& fn,
                   std::span<const TokenSeq> corpus, std::size_t warmup, std::size_t repeats,
                   const Clock& clock) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyInput, "benchmark corpus is empty");
  if (repeats < 1) throw Error(ErrorCode::kInvalidConfig, "repeats must be >= 1");
  auto now = [&]() -> std::chrono::nanoseconds {
    if (clock) return clock();
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
        std::chrono::steady_clock::now().time_since_epoch());
  };

  for (std::size_t w = 0; w < warmup; ++w) {
    for (const auto& s : corpus) fn(s);
  }
  std::vector<double> total_ms(corpus.size(), 0.0);
  for (std::size_t r = 0; r < repeats; ++r) {
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      auto start = now();
      fn(corpus[i]);
      auto stop = now();
      total_ms[i] += std::chrono::duration<double, std::milli>(stop - start).count();
    }
  }

  std::vector<double> per_sentence(total_ms.size());
  for (std::size_t i = 0; i < total_ms.size(); ++i) {
    per_sentence[i] = total_ms[i] / static_cast<double>(repeats);
  }
  LatencyStats out;
  out.total_sentences = corpus.size();
  double sum = 0.0;
  for (double v : per_sentence) sum += v;
  out.mean_ms = sum / static_cast<double>(per_sentence.size());
  std::sort(per_sentence.begin(), per_sentence.end());
  auto nearest_rank = [&](double q) {
    auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(per_sentence.size())));
    return per_sentence[std::max<std::size_t>(rank, 1) - 1];
  };
  out.p50_ms = nearest_rank(0.50);
  out.p95_ms = nearest_rank(0.95);
  return out;
}

EvalReport evaluate(std::span<const ParallelPair> pairs, std::span<const TokenSeq> corrected,
                    int workers) {
  if (pairs.empty()) throw Error(ErrorCode::kEmptyInput, "no sentence pairs to evaluate");
  if (pairs.size() != corrected.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(corrected.size()) + " corrected sentences for " +
                    std::to_string(pairs.size()) + " pairs");
  }
  struct Row {
    WerStats baseline, system;
    FarStats far;
  };
  std::vector<Row> rows(pairs.size());
  parallel_for(pairs.size(), workers, [&](std::size_t i) {
    const auto& p = pairs[i];
    rows[i].baseline = wer(p.reference, p.source);
    rows[i].system = wer(p.reference, corrected[i]);
    try {
      rows[i].far = far(p.source, p.reference, corrected[i]);
    } catch (const Error& e) {
      throw Error(e.code(), "pair on line " + std::to_string(p.line_no) + ": " + e.what());
    }
  });

  EvalReport report;
  for (const auto& r : rows) {
    report.baseline += r.baseline;
    report.system += r.system;
    report.far += r.far;
  }
  if (report.baseline.wer() > 0.0) report.werr = werr(report.baseline.wer(), report.system.wer());
  return report;
}

namespace {

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json to_json(const WerStats& stats) {
  return {{"substitutions", stats.substitutions},
          {"insertions", stats.insertions},
          {"deletions", stats.deletions},
          {"ref_len", stats.ref_len},
          {"wer", stats.wer()}};
}

nlohmann::json to_json(const LatencyStats& stats) {
  nlohmann::json j = {{"mean_ms_per_sent", stats.mean_ms},
                      {"p50", stats.p50_ms},
                      {"p95", stats.p95_ms},
                      {"total_sentences", stats.total_sentences}};
  if (stats.baseline_ms) j["baseline_ms"] = *stats.baseline_ms;
  if (stats.speedup) j["speedup"] = *stats.speedup;
  return j;
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json j = {{"baseline", to_json(report.baseline)},
                      {"system", to_json(report.system)},
                      {"werr", optional_number(report.werr)},
                      {"far",
                       {{"corrections", report.far.corrections},
                        {"false_alarms", report.far.false_alarms},
                        {"far", optional_number(report.far.far())}}}};
  j["latency"] = report.latency ? to_json(*report.latency) : nlohmann::json(nullptr);
  return j;
}

std::string render_table(const EvalReport& report, const std::string& system_name) {
  auto fmt = [](const char* spec, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, spec, v);
    return std::string(buf);
  };
  auto row = [](const std::string& model, const std::string& far, const std::string& w,
                const std::string& wr) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-16s| %7s | %7s | %7s\n", model.c_str(), far.c_str(),
                  w.c_str(), wr.c_str());
    return std::string(buf);
  };
  std::string out = row("Model", "FAR", "wer", "werr");
  out += std::string(16, '-') + "+---------+---------+--------\n";
  out += row("No correction", "-", fmt("%.2f", report.baseline.wer()), "-");
  auto far_value = report.far.far();
  out += row(system_name, far_value ? fmt("%.1f", *far_value) : "-",
             fmt("%.2f", report.system.wer()), report.werr ? fmt("%.2f", *report.werr) : "-");
  return out;
}

}  // namespace ucorrect
