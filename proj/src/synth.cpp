#include "ucorrect/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "ucorrect/error.hpp"
#include "ucorrect/parallel.hpp"

namespace ucorrect {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

bool in_unit(double p) { return p >= 0.0 && p <= 1.0; }

using EligibleSets = std::map<std::string, std::vector<TokenId>>;

EligibleSets eligible_sets(std::span<const TokenSeq> corpus, const NoiseConfig& config,
                           const PhonemeTable& table, const Vocab& vocab) {
  EligibleSets sets;
  for (const auto& seq : corpus) {
    for (const auto& t : seq) sets.try_emplace(t.text);
  }
  std::vector<std::string> phonemes(vocab.size());
  for (TokenId c = 0; c < vocab.size(); ++c) phonemes[c] = to_phonemes(table, vocab.token(c));

  std::vector<EligibleSets::iterator> entries;
  for (auto it = sets.begin(); it != sets.end(); ++it) entries.push_back(it);
  parallel_for(entries.size(), 0, [&](std::size_t e) {
    const std::string& text = entries[e]->first;
    const std::string orig_ph = to_phonemes(table, vocab.token_for(text));
    auto& eligible = entries[e]->second;
    for (TokenId c = 0; c < vocab.size(); ++c) {
      if (vocab.text_of(c) == text) continue;
      if (config.confusable_only &&
          similarity(phonemes[c], orig_ph) < config.confusable_threshold) {
        continue;
      }
      eligible.push_back(c);
    }
  });
  return sets;
}

NoisyPair corrupt_by_rate(const TokenSeq& ref, std::mt19937_64& rng, const NoiseConfig& config,
                          const EligibleSets& sets, const Vocab& vocab) {
  std::vector<Token> out;
  std::vector<Edit> edits;
  const double sub_end = config.p_sub;
  const double ins_end = sub_end + config.p_ins;
  const double del_end = ins_end + config.p_del;

  for (std::size_t p = 0; p < ref.size(); ++p) {
    const Token& orig = ref[p];
    const double u = uniform01(rng);
    if (u < sub_end) {
      const auto& eligible = sets.at(orig.text);
      if (!eligible.empty()) {
        Token r = vocab.token(eligible[uniform_index(rng, eligible.size())]);
        edits.push_back({EditKind::kSubstitution, p, orig, r});
        out.push_back(std::move(r));
        continue;
      }
    } else if (u < ins_end) {
      Token r = vocab.token(static_cast<TokenId>(uniform_index(rng, vocab.size())));
      edits.push_back({EditKind::kInsertion, p, std::nullopt, r});
      out.push_back(orig);
      out.push_back(std::move(r));
      continue;
    } else if (u < del_end) {
      const bool would_empty = out.empty() && p + 1 == ref.size();
      if (!would_empty) {
        edits.push_back({EditKind::kDeletion, p, orig, std::nullopt});
        continue;
      }
    }
    out.push_back(orig);
  }
  return NoisyPair{TokenSeq(std::move(out)), ref, std::move(edits)};
}

NoisyPair corrupt_exact(const TokenSeq& ref, std::mt19937_64& rng, std::size_t count,
                        const EligibleSets& sets, const Vocab& vocab) {
  std::vector<std::size_t> positions;
  for (std::size_t p = 0; p < ref.size(); ++p) {
    if (!sets.at(ref[p].text).empty()) positions.push_back(p);
  }
  const std::size_t k = std::min(count, positions.size());
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(positions[i], positions[i + uniform_index(rng, positions.size() - i)]);
  }
  positions.resize(k);
  std::sort(positions.begin(), positions.end());

  std::vector<Token> out(ref.begin(), ref.end());
  std::vector<Edit> edits;
  for (std::size_t p : positions) {
    const auto& eligible = sets.at(ref[p].text);
    Token r = vocab.token(eligible[uniform_index(rng, eligible.size())]);
    edits.push_back({EditKind::kSubstitution, p, ref[p], r});
    out[p] = std::move(r);
  }
  return NoisyPair{TokenSeq(std::move(out)), ref, std::move(edits)};
}

}  // namespace

void NoiseConfig::validate() const {
  if (!in_unit(p_sub) || !in_unit(p_ins) || !in_unit(p_del)) {
    throw Error(ErrorCode::kInvalidConfig, "noise probabilities must lie in [0, 1]");
  }
  if (p_sub + p_ins + p_del > 1.0 + 1e-12) {
    throw Error(ErrorCode::kInvalidConfig, "p_sub + p_ins + p_del must not exceed 1");
  }
  if (!in_unit(confusable_threshold)) {
    throw Error(ErrorCode::kInvalidConfig, "confusable threshold must lie in [0, 1]");
  }
}

std::mt19937_64 sentence_rng(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(splitmix64(seed) + index));
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t bound = n;
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

std::vector<NoisyPair> inject(std::span<const TokenSeq> corpus, const NoiseConfig& config,
                              const PhonemeTable& table, const Vocab& vocab, int workers) {
  config.validate();
  if (vocab.size() < 2) {
    throw Error(ErrorCode::kInvalidConfig, "noise injection needs at least 2 vocabulary tokens");
  }
  const EligibleSets sets = eligible_sets(corpus, config, table, vocab);

  std::vector<std::optional<NoisyPair>> slots(corpus.size());
  parallel_for(corpus.size(), workers, [&](std::size_t i) {
    auto rng = sentence_rng(config.seed, i);
    slots[i] = config.exact_substitutions
                   ? corrupt_exact(corpus[i], rng, *config.exact_substitutions, sets, vocab)
                   : corrupt_by_rate(corpus[i], rng, config, sets, vocab);
  });
  std::vector<NoisyPair> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

TokenSeq apply_edits(const TokenSeq& reference, std::span<const Edit> edits) {
  std::vector<Token> out;
  std::size_t e = 0;
  for (std::size_t p = 0; p < reference.size(); ++p) {
    bool kept = true;
    std::vector<Token> inserted;
    for (; e < edits.size() && edits[e].position == p; ++e) {
      const Edit& edit = edits[e];
      if (edit.kind != EditKind::kInsertion && edit.original && !(*edit.original == reference[p])) {
        throw Error(ErrorCode::kInvalidInput, "edit does not match reference at position " +
                                                  std::to_string(p));
      }
      switch (edit.kind) {
        case EditKind::kSubstitution:
          out.push_back(*edit.replacement);
          kept = false;
          break;
        case EditKind::kDeletion: kept = false; break;
        case EditKind::kInsertion: inserted.push_back(*edit.replacement); break;
      }
    }
    if (kept) out.push_back(reference[p]);
    for (auto& t : inserted) out.push_back(std::move(t));
  }
  if (e != edits.size()) {
    throw Error(ErrorCode::kInvalidInput, "edits out of order or beyond the reference");
  }
  return TokenSeq(std::move(out));
}

std::string_view to_string(EditKind kind) {
  switch (kind) {
    case EditKind::kSubstitution: return "sub";
    case EditKind::kInsertion: return "ins";
    case EditKind::kDeletion: return "del";
  }
  return "?";
}

std::string to_tsv(std::span<const NoisyPair> pairs) {
  std::string out;
  for (const auto& p : pairs) {
    out += p.source.text();
    out += '\t';
    out += p.reference.text();
    out += '\n';
  }
  return out;
}

nlohmann::json edits_json(std::span<const NoisyPair> pairs) {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    nlohmann::json edits = nlohmann::json::array();
    for (const auto& e : pairs[i].edits) {
      edits.push_back({{"kind", to_string(e.kind)},
                       {"position", e.position},
                       {"original", e.original ? nlohmann::json(e.original->text) : nlohmann::json(nullptr)},
                       {"replacement",
                        e.replacement ? nlohmann::json(e.replacement->text) : nlohmann::json(nullptr)}});
    }
    arr.push_back({{"index", i}, {"edits", edits}});
  }
  return arr;
}

}  // namespace ucorrect
