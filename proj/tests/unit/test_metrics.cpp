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

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "itft/error.hpp"
#include "itft/metrics.hpp"
#include "itft/subword.hpp"
#include "test_helpers.hpp"

using namespace itft;
namespace fs = std::filesystem;

TEST_CASE("bleu matches the frozen reference corpora") {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(fs::path(ITFT_FIXTURE_DIR) / "bleu")) {
    const auto j = nlohmann::json::parse(testing::read_file(entry.path()));
    const auto hyps = j.at("hypotheses").get<std::vector<std::string>>();
    const auto refs = j.at("references").get<std::vector<std::string>>();
    const auto& want = j.at("expected");
    CAPTURE(j.at("name").get<std::string>());
    const auto got = bleu_sentences(hyps, refs);
    CHECK(got.score == doctest::Approx(want.at("score").get<double>()).epsilon(1e-9));
    CHECK(got.brevity_penalty == doctest::Approx(want.at("brevity_penalty").get<double>()).epsilon(1e-12));
    CHECK(got.hyp_len == want.at("hyp_len").get<std::int64_t>());
    CHECK(got.ref_len == want.at("ref_len").get<std::int64_t>());
    for (int n = 0; n < kBleuOrder; ++n) {
      CHECK(got.correct[n] == want.at("correct")[n].get<std::int64_t>());
      CHECK(got.total[n] == want.at("total")[n].get<std::int64_t>());
    }
    ++seen;
  }
  CHECK(seen >= 20);
}

TEST_CASE("identical hypothesis and reference score exactly 100") {
  const std::vector<std::string> s = {"the cat sat on the mat", "a b c d e"};
  CHECK(bleu_sentences(s, s).score == 100.0);
}

TEST_CASE("bleu rejects mismatched line counts") {
  const std::vector<std::string> h = {"a"};
  const std::vector<std::string> r = {"a", "b"};
  CHECK_THROWS_AS(bleu_sentences(h, r), Error);
}

TEST_CASE("bleu score json round trip") {
  const std::vector<std::string> h = {"a b c d", "x y"};
  const std::vector<std::string> r = {"a b c e", "x y z"};
  const auto s = bleu_sentences(h, r);
  const auto back = BleuScore::from_json(s.to_json());
  CHECK(back.score == s.score);
  CHECK(back.correct == s.correct);
  CHECK(back.signature == s.signature);
}

TEST_CASE("spbleu with a character model matches character-level bleu") {
  const auto j = nlohmann::json::parse(testing::read_file(fs::path(ITFT_FIXTURE_DIR) / "spbleu_char_model.json"));
  const auto hyps = j.at("hypotheses").get<std::vector<std::string>>();
  const auto refs = j.at("references").get<std::vector<std::string>>();
  std::vector<std::string> pool = refs;
  pool.insert(pool.end(), hyps.begin(), hyps.end());
  const auto model = train_subword(pool, minimum_vocab_size(pool));
  const auto got = sp_bleu(model, hyps, refs);
  CHECK(got.score == doctest::Approx(j.at("expected").at("score").get<double>()).epsilon(1e-9));
  CHECK(got.signature.find(model.id()) != std::string::npos);
  CHECK(sp_bleu(model, refs, refs).score == 100.0);
}

TEST_CASE("pearson on a hand case") {
  const std::vector<double> x = {1, 2, 3};
  const std::vector<double> y = {2, 1, 4};
  const auto c = pearson(x, y);
  CHECK(c.n == 3);
  CHECK(c.r_squared == doctest::Approx(3.0 / 7.0).epsilon(1e-12));
  CHECK(c.pearson_r > 0.0);
  const std::vector<double> neg = {3, 2, 1};
  CHECK(pearson(x, neg).pearson_r == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("pearson rejects degenerate input") {
  const std::vector<double> one = {1};
  CHECK_THROWS_AS(pearson(one, one), Error);
  const std::vector<double> flat = {2, 2, 2};
  const std::vector<double> y = {1, 2, 3};
  CHECK_THROWS_AS(pearson(flat, y), Error);
}
