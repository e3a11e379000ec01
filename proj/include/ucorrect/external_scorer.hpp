#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ucorrect/scorer.hpp"

namespace ucorrect {

// Wire protocol v1: one JSON object per LF-terminated UTF-8 line.
//
//   adapter -> client, first line: {"hello":"ucorrect-scorer","version":1}
//   client  -> adapter: {"id":1,"tokens":["a","b","c"],"mask_index":1,"top_l":2,"orig":"b"}
//   adapter -> client: {"id":1,"prob_orig":0.4,"top":[["b",0.4],["x",0.3]]}
//   adapter -> client on failure: {"id":1,"error":"..."}  (id null if unparseable)
//
// Responses may arrive in any order and are matched by id. Entries of "top"
// may also be objects {"token":..., "prob":...}. top_l 0 asks for prob_orig only.
inline constexpr std::string_view kScorerHello = "ucorrect-scorer";
inline constexpr int kScorerProtocolVersion = 1;

struct ScorerResponse {
  std::uint64_t id = 0;
  double prob_orig = 0.0;
  std::vector<std::pair<std::string, double>> top;
};

// Bit-exact request line, without the trailing LF.
std::string encode_request(std::uint64_t id, std::span<const Token> tokens,
                           std::size_t mask_index, std::size_t top_l, std::string_view orig);

// Throws ProtocolError on malformed lines, bad probabilities, or adapter
// error objects.
ScorerResponse decode_response(std::string_view line);

// Throws ProtocolError unless line is the v1 handshake.
void check_handshake(std::string_view line);

struct ExternalScorerOptions {
  std::chrono::milliseconds timeout{10000};
};

// Client for an out-of-process scorer. One instance may be shared by many
// threads: writes are serialized and a reader thread routes responses to
// their callers by id.
class ExternalScorer final : public Scorer {
 public:
  // Runs command through /bin/sh and talks over its stdin/stdout.
  static std::unique_ptr<ExternalScorer> spawn(const std::string& command, Vocab vocab,
                                               ExternalScorerOptions options = {});
  static std::unique_ptr<ExternalScorer> connect(const std::string& host, std::uint16_t port,
                                                 Vocab vocab, ExternalScorerOptions options = {});

  ~ExternalScorer() override;
  ExternalScorer(const ExternalScorer&) = delete;
  ExternalScorer& operator=(const ExternalScorer&) = delete;

  const Vocab& vocab() const override { return vocab_; }
  double prob(const MaskedSeq& m, TokenId t) const override;
  std::vector<TokenProb> top_candidates(const MaskedSeq& m, std::size_t l) const override;

  // One request/response exchange. orig is the token whose probability is
  // reported as prob_orig.
  ScorerResponse roundtrip(const MaskedSeq& m, std::string_view orig, std::size_t top_l) const;

 private:
  struct Channel;
  ExternalScorer(std::unique_ptr<Channel> channel, Vocab vocab, ExternalScorerOptions options);

  std::unique_ptr<Channel> channel_;
  Vocab vocab_;
  ExternalScorerOptions options_;
};

}  // namespace ucorrect
