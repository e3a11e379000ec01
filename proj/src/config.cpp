#include "ucorrect/config.hpp"

#include "ucorrect/error.hpp"
#include "ucorrect/external_scorer.hpp"

namespace ucorrect {

ScorerKind parse_scorer_kind(std::string_view text) {
  if (text == "ngram") return ScorerKind::kNgram;
  if (text == "external") return ScorerKind::kExternal;
  if (text == "uniform") return ScorerKind::kUniform;
  throw Error(ErrorCode::kInvalidConfig, "unknown scorer kind: " + std::string(text));
}

std::string_view to_string(ScorerKind kind) {
  switch (kind) {
    case ScorerKind::kNgram: return "ngram";
    case ScorerKind::kExternal: return "external";
    case ScorerKind::kUniform: return "uniform";
  }
  return "?";
}

namespace {

void require_file(const std::string& path, const char* what) {
  if (!path.empty() && !std::filesystem::exists(path)) {
    throw Error(ErrorCode::kInvalidConfig, std::string(what) + " does not exist: " + path);
  }
}

template <class T>
void read_if(const nlohmann::json& obj, const char* key, T& dst) {
  if (obj.contains(key) && !obj[key].is_null()) dst = obj[key].get<T>();
}

}  // namespace

void RunConfig::validate() const {
  scorer.ngram.validate();
  pipeline.validate();
  noise.validate();
  if (workers < 0) throw Error(ErrorCode::kInvalidConfig, "workers must be positive");
  if (scorer.timeout.count() <= 0) throw Error(ErrorCode::kInvalidConfig, "timeout must be > 0");
  require_file(scorer.model_path, "model");
  require_file(scorer.vocab_path, "vocabulary");
  require_file(phoneme_table, "phoneme table");
}

RunConfig run_config_from_json(const nlohmann::json& doc) {
  RunConfig cfg;
  try {
    if (!doc.is_object()) throw Error(ErrorCode::kInvalidConfig, "config must be a JSON object");
    if (doc.contains("scorer")) {
      const auto& s = doc["scorer"];
      if (s.contains("kind")) cfg.scorer.kind = parse_scorer_kind(s["kind"].get<std::string>());
      read_if(s, "model_path", cfg.scorer.model_path);
      read_if(s, "command", cfg.scorer.command);
      read_if(s, "tcp", cfg.scorer.tcp);
      read_if(s, "vocab_path", cfg.scorer.vocab_path);
      read_if(s, "window", cfg.scorer.ngram.window);
      read_if(s, "lambda", cfg.scorer.ngram.lambda);
      read_if(s, "add_k", cfg.scorer.ngram.add_k);
      if (s.contains("timeout_ms")) {
        cfg.scorer.timeout = std::chrono::milliseconds(s["timeout_ms"].get<std::int64_t>());
      }
    }
    if (doc.contains("pipeline")) {
      const auto& p = doc["pipeline"];
      read_if(p, "l", cfg.pipeline.l);
      read_if(p, "m", cfg.pipeline.m);
      read_if(p, "max_iters", cfg.pipeline.max_iters);
      if (p.contains("detection_threshold") && !p["detection_threshold"].is_null()) {
        cfg.pipeline.detection_threshold = p["detection_threshold"].get<double>();
      }
    }
    if (doc.contains("noise")) {
      const auto& n = doc["noise"];
      read_if(n, "p_sub", cfg.noise.p_sub);
      read_if(n, "p_ins", cfg.noise.p_ins);
      read_if(n, "p_del", cfg.noise.p_del);
      read_if(n, "confusable_only", cfg.noise.confusable_only);
      read_if(n, "confusable_threshold", cfg.noise.confusable_threshold);
      read_if(n, "seed", cfg.noise.seed);
      if (n.contains("exact_substitutions") && !n["exact_substitutions"].is_null()) {
        cfg.noise.exact_substitutions = n["exact_substitutions"].get<std::size_t>();
      }
    }
    read_if(doc, "phoneme_table", cfg.phoneme_table);
    read_if(doc, "workers", cfg.workers);
    read_if(doc, "max_vocab", cfg.max_vocab);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("bad config value: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  auto doc = nlohmann::json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::kInvalidConfig, "config is not JSON: " + path.string());
  return run_config_from_json(doc);
}

Vocab resolve_vocab(const ScorerSettings& settings, const std::optional<Vocab>& fallback) {
  if (!settings.vocab_path.empty()) return load_vocab(settings.vocab_path);
  if (!settings.model_path.empty()) return NgramScorer::load(settings.model_path).vocab();
  if (fallback) return *fallback;
  throw Error(ErrorCode::kInvalidConfig, "no vocabulary: pass --vocab or --model");
}

std::unique_ptr<Scorer> make_scorer(const ScorerSettings& settings,
                                    const std::optional<Vocab>& fallback_vocab) {
  switch (settings.kind) {
    case ScorerKind::kNgram:
      if (settings.model_path.empty()) {
        throw Error(ErrorCode::kInvalidConfig, "n-gram scorer needs a model path");
      }
      return std::make_unique<NgramScorer>(NgramScorer::load(settings.model_path));
    case ScorerKind::kUniform:
      return std::make_unique<UniformScorer>(resolve_vocab(settings, fallback_vocab));
    case ScorerKind::kExternal: {
      ExternalScorerOptions options{settings.timeout};
      Vocab vocab = resolve_vocab(settings, fallback_vocab);
      if (!settings.tcp.empty()) {
        auto colon = settings.tcp.rfind(':');
        if (colon == std::string::npos) {
          throw Error(ErrorCode::kInvalidConfig, "tcp address must be host:port");
        }
        int port = 0;
        try {
          port = std::stoi(settings.tcp.substr(colon + 1));
        } catch (const std::exception&) {
          port = -1;
        }
        if (port <= 0 || port > 65535) throw Error(ErrorCode::kInvalidConfig, "bad tcp port");
        return ExternalScorer::connect(settings.tcp.substr(0, colon),
                                       static_cast<std::uint16_t>(port), std::move(vocab),
                                       options);
      }
      if (settings.command.empty()) {
        throw Error(ErrorCode::kInvalidConfig, "external scorer needs a command or tcp address");
      }
      return ExternalScorer::spawn(settings.command, std::move(vocab), options);
    }
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown scorer kind");
}

}  // namespace ucorrect
