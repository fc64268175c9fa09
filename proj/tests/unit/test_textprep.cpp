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

#include <doctest.h>

#include <string>
#include <vector>

#include "itft/error.hpp"
#include "itft/textprep.hpp"
#include "test_helpers.hpp"

using namespace itft;
using Tokens = std::vector<std::string>;

TEST_CASE("word_tokenize peels edge punctuation") {
  CHECK(word_tokenize("He said, \"go.\"", true) == Tokens{"he", "said", ",", "\"", "go", ".", "\""});
  CHECK(word_tokenize("").empty());
  CHECK(word_tokenize("   \t ").empty());
  CHECK(word_tokenize("අද දින") == Tokens{"අද", "දින"});
  CHECK(word_tokenize("don't stop 12:30") == Tokens{"don't", "stop", "12:30"});
  CHECK(word_tokenize("«Bonjour»") == Tokens{"«", "Bonjour", "»"});
  CHECK(word_tokenize("a b") == Tokens{"a", "b"});
  CHECK(word_tokenize("ÉCOLE") == Tokens{"ÉCOLE"});
  CHECK(word_tokenize("ÉCOLE", true) == Tokens{"école"});
}

TEST_CASE("normalize_token maps times and numbers") {
  CHECK(normalize_token("12:30") == kTimeToken);
  CHECK(normalize_token("9:05:59") == kTimeToken);
  CHECK(normalize_token("7:30pm") == kTimeToken);
  CHECK(normalize_token("7:30AM") == kTimeToken);
  CHECK(normalize_token("1,234.5") == kNumberToken);
  CHECK(normalize_token("-42") == kNumberToken);
  CHECK(normalize_token("+3.14") == kNumberToken);
  CHECK(normalize_token("٣٤") == kNumberToken);
  CHECK(normalize_token("b12") == "b12");
  CHECK(normalize_token("12:") == "12:");
  CHECK(normalize_token("1,") == "1,");
  CHECK(normalize_token("pm") == "pm");
  CHECK(normalize_token("") == "");
}

TEST_CASE("normalize_token is idempotent") {
  for (const char* t : {"12:30", "1,000", "word", "<TIME>", "<NUMBER>", "-", "3pm"}) {
    const auto once = normalize_token(t);
    CHECK(normalize_token(once) == once);
  }
}

TEST_CASE("prep_for_divergence applies the full pipeline") {
  const std::vector<std::string> texts{"the cat at 12:30"};
  DivergencePrepConfig cfg;
  cfg.stopwords = {"the", "at"};
  CHECK(prep_for_divergence(texts, cfg) == TokenCounts{{"cat", 1}, {std::string(kTimeToken), 1}});
  CHECK(prep_for_divergence(texts) ==
        TokenCounts{{"the", 1}, {"cat", 1}, {"at", 1}, {std::string(kTimeToken), 1}});
  cfg.stopwords = {"the", "cat", "at", std::string(kTimeToken)};
  CHECK(prep_for_divergence(texts, cfg).empty());
}

TEST_CASE("prep_for_divergence honours case and punctuation flags") {
  const std::vector<std::string> texts{"Hello, hello!"};
  DivergencePrepConfig cfg;
  CHECK(prep_for_divergence(texts, cfg) == TokenCounts{{"hello", 2}, {",", 1}, {"!", 1}});
  cfg.lowercase = false;
  cfg.keep_punctuation = false;
  CHECK(prep_for_divergence(texts, cfg) == TokenCounts{{"Hello", 1}, {"hello", 1}});
}

TEST_CASE("stopword files") {
  itft::testing::TempDir dir("stop");
  itft::testing::write_file(dir / "sw.txt", "the\n\nand\r\nof\n");
  CHECK(read_stopwords(dir / "sw.txt") == std::set<std::string>{"the", "and", "of"});
  CHECK_THROWS_AS(parse_stopwords("fine\nnot fine\n"), Error);
  try {
    read_stopwords(dir / "missing.txt");
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io);
  }
  CHECK(english_stopwords().size() == 179);
  CHECK(english_stopwords().count("the") == 1);
}

TEST_CASE("bundled English stopword file matches the built-in list") {
  CHECK(read_stopwords(std::string(ITFT_DATA_DIR) + "/stopwords/en.txt") == english_stopwords());
}
