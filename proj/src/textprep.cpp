// Copyright 2026 The itft-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "itft/textprep.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "itft/error.hpp"
#include "itft/unicode.hpp"

namespace itft {

std::vector<std::string> word_tokenize(std::string_view text, bool lowercase) {
  const auto cps = unicode::decode(lowercase ? unicode::to_lower(text) : std::string(text));
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < cps.size()) {
    while (i < cps.size() && unicode::is_whitespace(cps[i])) ++i;
    std::size_t end = i;
    while (end < cps.size() && !unicode::is_whitespace(cps[end])) ++end;
    if (i == end) break;

    std::size_t lo = i;
    while (lo < end && unicode::is_punctuation(cps[lo])) tokens.push_back(unicode::encode(cps[lo++]));
    std::size_t hi = end;
    while (hi > lo && unicode::is_punctuation(cps[hi - 1])) --hi;
    if (lo < hi) {
      tokens.push_back(unicode::encode(std::vector<char32_t>(cps.begin() + lo, cps.begin() + hi)));
    }
    for (std::size_t k = hi; k < end; ++k) tokens.push_back(unicode::encode(cps[k]));
    i = end;
  }
  return tokens;
}

namespace {

std::size_t skip_digits(const std::vector<char32_t>& cps, std::size_t i) {
  while (i < cps.size() && unicode::is_decimal_digit(cps[i])) ++i;
  return i;
}

bool is_time(const std::vector<char32_t>& cps) {
  std::size_t n = cps.size();
  if (n >= 2) {
    const char32_t a = cps[n - 2];
    const char32_t m = cps[n - 1];
    if ((a == 'a' || a == 'A' || a == 'p' || a == 'P') && (m == 'm' || m == 'M')) n -= 2;
  }
  const std::vector<char32_t> body(cps.begin(), cps.begin() + static_cast<std::ptrdiff_t>(n));
  std::size_t i = skip_digits(body, 0);
  if (i == 0) return false;
  int groups = 0;
  while (i < body.size()) {
    if (body[i] != ':') return false;
    const std::size_t next = skip_digits(body, i + 1);
    if (next == i + 1) return false;
    i = next;
    ++groups;
  }
  return groups > 0;
}

bool is_number(const std::vector<char32_t>& cps) {
  std::size_t i = 0;
  if (i < cps.size() && (cps[i] == '+' || cps[i] == '-')) ++i;
  std::size_t next = skip_digits(cps, i);
  if (next == i) return false;
  i = next;
  while (i < cps.size()) {
    if (cps[i] != '.' && cps[i] != ',') return false;
    next = skip_digits(cps, i + 1);
    if (next == i + 1) return false;
    i = next;
  }
  return true;
}

}  // namespace

std::string normalize_token(std::string_view token) {
  const auto cps = unicode::decode(token);
  if (is_time(cps)) return std::string(kTimeToken);
  if (is_number(cps)) return std::string(kNumberToken);
  return std::string(token);
}

bool is_punctuation_token(std::string_view token) {
  const auto cps = unicode::decode(token);
  if (cps.empty()) return false;
  for (char32_t cp : cps) {
    if (!unicode::is_punctuation(cp)) return false;
  }
  return true;
}

TokenCounts prep_for_divergence(std::span<const std::string> texts, const DivergencePrepConfig& cfg) {
  TokenCounts counts;
  for (const auto& text : texts) {
    for (auto& raw : word_tokenize(text, cfg.lowercase)) {
      if (!cfg.keep_punctuation && is_punctuation_token(raw)) continue;
      std::string token = normalize_token(raw);
      if (cfg.stopwords.contains(token)) continue;
      ++counts[token];
    }
  }
  return counts;
}

std::set<std::string> parse_stopwords(std::string_view content) {
  std::set<std::string> words;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (unicode::is_blank(line) || line == "#" || line.rfind("# ", 0) == 0) continue;
    for (char32_t cp : unicode::decode(line)) {
      if (unicode::is_whitespace(cp)) {
        fail(ErrorKind::format, fmt::format("stopword on line {} contains whitespace", lineno));
      }
    }
    words.insert(line);
  }
  return words;
}

std::set<std::string> read_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, fmt::format("cannot open stopword file '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_stopwords(buf.str());
}

const std::set<std::string>& english_stopwords() {
  static const std::set<std::string> words = {
      "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're", "you've",
      "you'll", "you'd", "your", "yours", "yourself", "yourselves", "he", "him", "his", "himself",
      "she", "she's", "her", "hers", "herself", "it", "it's", "its", "itself", "they", "them",
      "their", "theirs", "themselves", "what", "which", "who", "whom", "this", "that", "that'll",
      "these", "those", "am", "is", "are", "was", "were", "be", "been", "being", "have", "has",
      "had", "having", "do", "does", "did", "doing", "a", "an", "the", "and", "but", "if", "or",
      "because", "as", "until", "while", "of", "at", "by", "for", "with", "about", "against",
      "between", "into", "through", "during", "before", "after", "above", "below", "to", "from",
      "up", "down", "in", "out", "on", "off", "over", "under", "again", "further", "then", "once",
      "here", "there", "when", "where", "why", "how", "all", "any", "both", "each", "few", "more",
      "most", "other", "some", "such", "no", "nor", "not", "only", "own", "same", "so", "than",
      "too", "very", "s", "t", "can", "will", "just", "don", "don't", "should", "should've", "now",
      "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "aren't", "couldn", "couldn't", "didn",
      "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn", "hasn't", "haven", "haven't", "isn",
      "isn't", "ma", "mightn", "mightn't", "mustn", "mustn't", "needn", "needn't", "shan",
      "shan't", "shouldn", "shouldn't", "wasn", "wasn't", "weren", "weren't", "won", "won't",
      "wouldn", "wouldn't"};
  return words;
}

}  // namespace itft
