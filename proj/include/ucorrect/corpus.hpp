#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ucorrect {

using TokenId = std::uint32_t;

// One grapheme cluster. Unknown tokens carry the vocabulary's unk id but keep
// their surface text, so detokenization is lossless.
struct Token {
  TokenId id = 0;
  std::string text;

  friend bool operator==(const Token& a, const Token& b) {
    return a.text == b.text;
  }
};

class TokenSeq {
 public:
  // Throws EmptyInput when tokens is empty.
  explicit TokenSeq(std::vector<Token> tokens);

  std::size_t size() const noexcept { return tokens_.size(); }
  const Token& operator[](std::size_t i) const { return tokens_[i]; }
  std::span<const Token> tokens() const noexcept { return tokens_; }
  auto begin() const noexcept { return tokens_.begin(); }
  auto end() const noexcept { return tokens_.end(); }

  // Copy with position i replaced by token.
  TokenSeq with_token(std::size_t i, Token token) const;

  // Concatenated surface text.
  std::string text() const;

  friend bool operator==(const TokenSeq& a, const TokenSeq& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  std::vector<Token> tokens_;
};

// Regular tokens occupy ids [0, size()). The mask and unk sentinels sit just
// past the regular range.
class Vocab {
 public:
  static constexpr std::string_view kMaskText = "[MASK]";
  static constexpr std::string_view kUnkText = "[UNK]";

  Vocab() = default;
  // Texts are taken in id order. Throws InvalidInput on duplicates, empty
  // entries, entries containing whitespace, or sentinel texts.
  explicit Vocab(std::vector<std::string> texts);

  std::size_t size() const noexcept { return texts_.size(); }
  TokenId mask_id() const noexcept { return static_cast<TokenId>(texts_.size()); }
  TokenId unk_id() const noexcept { return static_cast<TokenId>(texts_.size() + 1); }
  bool is_regular(TokenId id) const noexcept { return id < texts_.size(); }

  std::optional<TokenId> find(std::string_view text) const;
  // unk_id() when absent.
  TokenId id_of(std::string_view text) const;
  std::string_view text_of(TokenId id) const;
  Token token(TokenId id) const;
  // Token for a surface string; unknown text maps to unk but keeps its text.
  Token token_for(std::string_view text) const;

  std::span<const std::string> texts() const noexcept { return texts_; }

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.texts_ == b.texts_;
  }

 private:
  std::vector<std::string> texts_;
  std::unordered_map<std::string, TokenId> index_;
};

// NFC-normalizes text and splits it into grapheme clusters. Whitespace
// clusters are dropped.
std::vector<std::string> split_graphemes(std::string_view text);

TokenSeq tokenize(std::string_view text, const Vocab& vocab);

// Inverse of tokenize on in-vocabulary text.
std::string detokenize(const TokenSeq& seq);

// Keeps the max_size most frequent grapheme clusters; ties go to the lower
// code-point sequence.
Vocab build_vocab(std::span<const std::string> lines, std::size_t max_size);

struct ParallelPair {
  TokenSeq source;
  TokenSeq reference;
  std::size_t line_no = 0;
};

using ParallelCorpus = std::vector<ParallelPair>;

// source<TAB>reference per line; blank lines are skipped.
ParallelCorpus parse_parallel(std::string_view content, const Vocab& vocab);
ParallelCorpus load_parallel(const std::filesystem::path& path, const Vocab& vocab);

// Lines of a UTF-8 text file, LF-split, trailing CR removed.
std::vector<std::string> read_lines(const std::filesystem::path& path);
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// Plain vocabulary file: one token per line in id order.
Vocab load_vocab(const std::filesystem::path& path);
void save_vocab(const std::filesystem::path& path, const Vocab& vocab);

bool is_blank(std::string_view line);

}  // namespace ucorrect
