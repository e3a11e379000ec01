#include "ucorrect/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include <unicode/brkiter.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "ucorrect/error.hpp"

namespace ucorrect {

TokenSeq::TokenSeq(std::vector<Token> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.empty()) throw Error(ErrorCode::kEmptyInput, "token sequence is empty");
}

TokenSeq TokenSeq::with_token(std::size_t i, Token token) const {
  TokenSeq out = *this;
  out.tokens_.at(i) = std::move(token);
  return out;
}

std::string TokenSeq::text() const {
  std::string out;
  for (const auto& t : tokens_) out += t.text;
  return out;
}

namespace {

bool contains_whitespace(std::string_view text) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  for (int32_t i = 0; i < u.length(); i = u.moveIndex32(i, 1)) {
    if (u_isUWhiteSpace(u.char32At(i))) return true;
  }
  return false;
}

icu::BreakIterator& grapheme_iterator() {
  thread_local std::unique_ptr<icu::BreakIterator> it = [] {
    UErrorCode status = U_ZERO_ERROR;
    std::unique_ptr<icu::BreakIterator> bi(
        icu::BreakIterator::createCharacterInstance(icu::Locale::getRoot(), status));
    if (U_FAILURE(status) || !bi) {
      throw Error(ErrorCode::kIo, std::string("ICU break iterator: ") + u_errorName(status));
    }
    return bi;
  }();
  return *it;
}

}  // namespace

Vocab::Vocab(std::vector<std::string> texts) : texts_(std::move(texts)) {
  index_.reserve(texts_.size());
  for (std::size_t i = 0; i < texts_.size(); ++i) {
    const auto& t = texts_[i];
    if (t.empty()) throw Error(ErrorCode::kInvalidInput, "empty vocabulary entry");
    if (t == kMaskText || t == kUnkText) {
      throw Error(ErrorCode::kInvalidInput, "vocabulary entry collides with a sentinel: " + t);
    }
    if (contains_whitespace(t)) {
      throw Error(ErrorCode::kInvalidInput, "vocabulary entry contains whitespace");
    }
    if (!index_.emplace(t, static_cast<TokenId>(i)).second) {
      throw Error(ErrorCode::kInvalidInput, "duplicate vocabulary entry: " + t);
    }
  }
}

std::optional<TokenId> Vocab::find(std::string_view text) const {
  auto it = index_.find(std::string(text));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocab::id_of(std::string_view text) const {
  return find(text).value_or(unk_id());
}

std::string_view Vocab::text_of(TokenId id) const {
  if (id < texts_.size()) return texts_[id];
  if (id == mask_id()) return kMaskText;
  if (id == unk_id()) return kUnkText;
  throw Error(ErrorCode::kInvalidInput, "token id out of range: " + std::to_string(id));
}

Token Vocab::token(TokenId id) const { return Token{id, std::string(text_of(id))}; }

Token Vocab::token_for(std::string_view text) const {
  return Token{id_of(text), std::string(text)};
}

std::vector<std::string> split_graphemes(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::kIo, std::string("ICU NFC: ") + u_errorName(status));
  }
  icu::UnicodeString raw = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  icu::UnicodeString norm = nfc->normalize(raw, status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::kIo, std::string("ICU NFC: ") + u_errorName(status));
  }

  std::vector<std::string> out;
  auto& it = grapheme_iterator();
  it.setText(norm);
  for (int32_t start = it.first(), end = it.next(); end != icu::BreakIterator::DONE;
       start = end, end = it.next()) {
    if (u_isUWhiteSpace(norm.char32At(start))) continue;
    std::string g;
    norm.tempSubStringBetween(start, end).toUTF8String(g);
    out.push_back(std::move(g));
  }
  return out;
}

TokenSeq tokenize(std::string_view text, const Vocab& vocab) {
  auto graphemes = split_graphemes(text);
  if (graphemes.empty()) throw Error(ErrorCode::kEmptyInput, "text is empty or whitespace-only");
  std::vector<Token> tokens;
  tokens.reserve(graphemes.size());
  for (auto& g : graphemes) {
    TokenId id = vocab.id_of(g);
    tokens.push_back(Token{id, std::move(g)});
  }
  return TokenSeq(std::move(tokens));
}

std::string detokenize(const TokenSeq& seq) { return seq.text(); }

Vocab build_vocab(std::span<const std::string> lines, std::size_t max_size) {
  if (max_size == 0) throw Error(ErrorCode::kInvalidConfig, "max_size must be positive");
  std::map<std::string, std::size_t> freq;
  bool any = false;
  for (const auto& line : lines) {
    for (auto& g : split_graphemes(line)) {
      any = true;
      if (g == Vocab::kMaskText || g == Vocab::kUnkText) continue;
      ++freq[std::move(g)];
    }
  }
  if (!any) throw Error(ErrorCode::kEmptyInput, "no non-empty lines");

  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  // std::map iterates in byte order, which for UTF-8 is code-point order;
  // a stable sort on frequency keeps that as the tie-break.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > max_size) ranked.resize(max_size);

  std::vector<std::string> texts;
  texts.reserve(ranked.size());
  for (auto& [text, count] : ranked) texts.push_back(std::move(text));
  return Vocab(std::move(texts));
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
  });
}

ParallelCorpus parse_parallel(std::string_view content, const Vocab& vocab) {
  ParallelCorpus corpus;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    std::string_view line = content.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (is_blank(line)) continue;

    if (std::count(line.begin(), line.end(), '\t') != 1) {
      throw Error(ErrorCode::kMalformedLine, "expected exactly one TAB", line_no);
    }
    std::size_t tab = line.find('\t');
    try {
      corpus.push_back(ParallelPair{tokenize(line.substr(0, tab), vocab),
                                    tokenize(line.substr(tab + 1), vocab), line_no});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyInput) throw;
      throw Error(ErrorCode::kMalformedLine, "empty source or reference column", line_no);
    }
  }
  if (corpus.empty()) throw Error(ErrorCode::kEmptyInput, "parallel corpus has no pairs");
  return corpus;
}

ParallelCorpus load_parallel(const std::filesystem::path& path, const Vocab& vocab) {
  return parse_parallel(read_file(path), vocab);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::string content = read_file(path);
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t nl = content.find('\n', pos);
    if (nl == std::string::npos) nl = content.size();
    std::string line = content.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    pos = nl + 1;
  }
  return lines;
}

Vocab load_vocab(const std::filesystem::path& path) {
  std::vector<std::string> texts;
  for (auto& line : read_lines(path)) {
    if (line.empty()) continue;
    texts.push_back(std::move(line));
  }
  return Vocab(std::move(texts));
}

void save_vocab(const std::filesystem::path& path, const Vocab& vocab) {
  std::string out;
  for (const auto& t : vocab.texts()) {
    out += t;
    out += '\n';
  }
  write_file(path, out);
}

}  // namespace ucorrect
