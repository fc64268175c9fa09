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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace itft {

using TokenCounts = std::map<std::string, std::uint64_t>;

inline constexpr std::string_view kTimeToken = "<TIME>";
inline constexpr std::string_view kNumberToken = "<NUMBER>";

struct DivergencePrepConfig {
  std::set<std::string> stopwords;
  bool lowercase = true;
  bool keep_punctuation = true;
};

// Splits on Unicode whitespace, then peels leading and trailing punctuation
// (general category P) off each chunk, one character per token. Inner
// punctuation ("don't", "12:30") stays attached.
std::vector<std::string> word_tokenize(std::string_view text, bool lowercase = false);

// `digits(:digits)+` with an optional am/pm suffix becomes <TIME>; an
// optionally signed digit run with `.`/`,` separators becomes <NUMBER>.
std::string normalize_token(std::string_view token);

bool is_punctuation_token(std::string_view token);

// tokenize -> lowercase -> normalize -> drop stopwords
TokenCounts prep_for_divergence(std::span<const std::string> texts,
                                const DivergencePrepConfig& cfg = {});

// One token per line; blank lines and "#" comment lines ("#" or "# ...") are
// skipped. Entries containing whitespace are rejected.
std::set<std::string> read_stopwords(const std::filesystem::path& path);
std::set<std::string> parse_stopwords(std::string_view content);

// A common English list (the 179-entry list distributed with NLTK).
const std::set<std::string>& english_stopwords();

}  // namespace itft
