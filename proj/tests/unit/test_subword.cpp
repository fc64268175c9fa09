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
#include "itft/random.hpp"
#include "itft/subword.hpp"
#include "itft/unicode.hpp"
#include "test_helpers.hpp"

using namespace itft;
using Pieces = std::vector<std::string>;

namespace {

const std::string M(kWordMarker);

std::vector<std::string> sample_pool() {
  return {"hello world", "the world is wide", "hello there", "wild wide world", "low lower lowest"};
}

}  // namespace

TEST_CASE("marker segmentation") {
  CHECK(marker_segments("a  b") == Pieces{M + "a", M, M + "b"});
  CHECK(marker_segments("ab") == Pieces{M + "ab"});
  CHECK(marker_segments("").empty());
}

TEST_CASE("one-merge model on abababab") {
  const std::vector<std::string> pool{"abababab"};
  CHECK(minimum_vocab_size(pool) == 7);
  const auto m = train_subword(pool, 8);
  CHECK(m.merges() == std::vector<SymbolPair>{{"a", "b"}});
  CHECK(m.vocab_size() == 8);
  CHECK(m.encode_pieces("abab") == Pieces{M, "ab", "ab"});
  const auto ids = m.encode("abab");
  CHECK(ids.size() == 3);
  CHECK(m.symbol(ids[1]) == "ab");
}

TEST_CASE("vocab size at the base gives a character model") {
  const auto pool = sample_pool();
  const auto m = train_subword(pool, minimum_vocab_size(pool));
  CHECK(m.merges().empty());
  CHECK(m.vocab_size() == static_cast<int>(m.base_vocab().size()) + kNumSpecials);
}

TEST_CASE("too small a vocabulary names the minimum") {
  const auto pool = sample_pool();
  const int min = minimum_vocab_size(pool);
  try {
    train_subword(pool, min - 1);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find(std::to_string(min)) != std::string::npos);
  }
  CHECK_THROWS_AS(train_subword(std::vector<std::string>{}, 100), Error);
}

TEST_CASE("vocab size invariant and specials") {
  const auto m = train_subword(sample_pool(), 40);
  CHECK(m.vocab_size() == static_cast<int>(m.base_vocab().size() + m.merges().size()) + kNumSpecials);
  CHECK(m.symbol(kPadId) != m.symbol(kUnkId));
  CHECK(m.piece_id("never-seen-piece") == kUnkId);
}

TEST_CASE("training is deterministic and larger vocabularies extend the merge list") {
  const auto pool = sample_pool();
  const auto a = train_subword(pool, 30);
  const auto b = train_subword(pool, 30);
  CHECK(a == b);
  CHECK(a.id() == b.id());
  const auto big = train_subword(pool, 45);
  REQUIRE(big.merges().size() >= a.merges().size());
  CHECK(std::equal(a.merges().begin(), a.merges().end(), big.merges().begin()));
}

TEST_CASE("round trip over the training alphabet") {
  const auto pool = sample_pool();
  const auto m = train_subword(pool, 50);
  CHECK(m.decode(m.encode("hello world")) == "hello world");
  CHECK(m.encode("").empty());
  CHECK(m.decode(m.encode("  hello  there ")) == "  hello  there ");
  Rng rng(5);
  const std::string alphabet = "helowrdti ";
  for (int i = 0; i < 300; ++i) {
    std::string s;
    const auto n = 1 + rng.below(25);
    for (std::size_t k = 0; k < n; ++k) s += alphabet[rng.below(alphabet.size())];
    CHECK(m.decode(m.encode(s)) == s);
  }
}

TEST_CASE("unknown characters map to UNK") {
  const auto m = train_subword(sample_pool(), 40);
  const auto ids = m.encode("☃");
  // The marker is known; the snowman is one UNK.
  REQUIRE(ids.size() == 2);
  CHECK(ids[1] == kUnkId);
  CHECK(m.decode(ids) == "\xEF\xBF\xBD");
  CHECK(m.encode_pieces("☃") == Pieces{M, "☃"});
}

TEST_CASE("decode rejects out-of-range ids and skips specials") {
  const auto m = train_subword(sample_pool(), 40);
  const std::vector<int> bad{m.vocab_size()};
  CHECK_THROWS_AS(m.decode(bad), Error);
  const std::vector<int> neg{-1};
  CHECK_THROWS_AS(m.decode(neg), Error);
  auto ids = m.encode("hello");
  ids.insert(ids.begin(), kBosId);
  ids.push_back(kEosId);
  ids.push_back(kPadId);
  CHECK(m.decode(ids) == "hello");
}

TEST_CASE("model files round-trip") {
  itft::testing::TempDir dir("spm");
  const auto m = train_subword(sample_pool(), 40);
  m.save(dir / "m.json");
  const auto back = SubwordModel::load(dir / "m.json");
  CHECK(back == m);
  CHECK(back.id() == m.id());
  const auto j = m.to_json();
  CHECK(j.at("vocab_size") == m.vocab_size());
  CHECK(j.at("marker") == M);
  CHECK(j.contains("base_vocab"));
  CHECK(j.contains("merges"));
  CHECK_THROWS_AS(SubwordModel::load(dir / "missing.json"), Error);
}
