#include "ucorrect/phonetics.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>
#include <vector>

#include <unicode/unistr.h>

#include "ucorrect/error.hpp"

namespace ucorrect {

bool PhonemeTable::insert(std::string token, std::string phonemes) {
  auto [it, inserted] = map_.insert_or_assign(std::move(token), std::move(phonemes));
  return inserted;
}

const std::string* PhonemeTable::find(std::string_view token) const {
  auto it = map_.find(std::string(token));
  return it == map_.end() ? nullptr : &it->second;
}

PhonemeTable parse_phoneme_table(std::string_view content, const DiagnosticSink& warn) {
  PhonemeTable table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    std::string_view line = content.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (is_blank(line) || line.front() == '#') continue;

    std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0 || tab + 1 >= line.size() ||
        line.find('\t', tab + 1) != std::string_view::npos) {
      throw Error(ErrorCode::kMalformedLine, "expected token<TAB>phonemes", line_no);
    }
    std::string token(line.substr(0, tab));
    if (!table.insert(token, std::string(line.substr(tab + 1)))) {
      std::string msg = "phoneme table line " + std::to_string(line_no) +
                        ": duplicate entry for '" + token + "', keeping the last one";
      if (warn) {
        warn(msg);
      } else {
        std::cerr << "warning: " << msg << '\n';
      }
    }
  }
  return table;
}

PhonemeTable load_phoneme_table(const std::filesystem::path& path, const DiagnosticSink& warn) {
  return parse_phoneme_table(read_file(path), warn);
}

std::string to_phonemes(const PhonemeTable& table, const Token& token) {
  if (const auto* p = table.find(token.text)) return *p;
  return token.text;
}

std::u32string utf8_to_u32(std::string_view s) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  std::u32string out;
  out.reserve(static_cast<std::size_t>(u.length()));
  for (int32_t i = 0; i < u.length(); i = u.moveIndex32(i, 1)) {
    out.push_back(static_cast<char32_t>(u.char32At(i)));
  }
  return out;
}

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t up = row[j];
      std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + cost});
      diag = up;
    }
  }
  return row[b.size()];
}

double similarity(std::string_view a, std::string_view b) {
  if (a == b) return 1.0;
  auto ua = utf8_to_u32(a);
  auto ub = utf8_to_u32(b);
  std::size_t longest = std::max(ua.size(), ub.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(ua, ub)) / static_cast<double>(longest);
}

}  // namespace ucorrect
