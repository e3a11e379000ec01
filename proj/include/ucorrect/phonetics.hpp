#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "ucorrect/corpus.hpp"

namespace ucorrect {

// token text -> phoneme string (for Mandarin, pinyin with a tone digit).
class PhonemeTable {
 public:
  // Last insert wins; returns false when an existing entry was replaced.
  bool insert(std::string token, std::string phonemes);
  const std::string* find(std::string_view token) const;
  std::size_t size() const noexcept { return map_.size(); }
  bool empty() const noexcept { return map_.empty(); }

 private:
  std::unordered_map<std::string, std::string> map_;
};

using DiagnosticSink = std::function<void(const std::string&)>;

// token<TAB>phonemes per line; '#' lines and blank lines are ignored.
// Duplicate tokens are reported through warn (stderr when unset).
PhonemeTable parse_phoneme_table(std::string_view content, const DiagnosticSink& warn = {});
PhonemeTable load_phoneme_table(const std::filesystem::path& path,
                                const DiagnosticSink& warn = {});

// Table lookup, falling back to the token's own text.
std::string to_phonemes(const PhonemeTable& table, const Token& token);

// Unit-cost edit distance over code points.
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

// 1 - levenshtein / max length, in [0, 1]; two empty strings are identical.
double similarity(std::string_view a, std::string_view b);

std::u32string utf8_to_u32(std::string_view s);

}  // namespace ucorrect
