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

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "itft/corpus.hpp"
#include "itft/divergence.hpp"
#include "itft/error.hpp"
#include "itft/random.hpp"

using namespace itft;

namespace {

TokenDistribution dist(std::map<std::string, double> p) {
  return TokenDistribution::from_probabilities(std::move(p));
}

ParallelCorpus corpus(const std::string& id, const std::string& xx,
                      const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::vector<SentencePair> ps;
  for (const auto& [s, t] : pairs) ps.push_back({s, t});
  return ParallelCorpus({id, "en", xx, "d", "unit"}, std::move(ps));
}

TokenDistribution random_dist(Rng& rng, const std::vector<std::string>& vocab) {
  TokenCounts counts;
  for (const auto& w : vocab) {
    if (rng.below(3) != 0) counts[w] = 1 + rng.below(20);
  }
  if (counts.empty()) counts[vocab.front()] = 1;
  return TokenDistribution::from_counts(counts);
}

}  // namespace

TEST_CASE("hand-computed divergences in bits") {
  const auto half = dist({{"a", 0.5}, {"b", 0.5}});
  const auto point = dist({{"a", 1.0}});
  CHECK(js_divergence(half, point) == doctest::Approx(0.31127812445913283).epsilon(1e-12));
  CHECK(kl_divergence(point, half) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(kl_divergence(half, point), Error);

  const auto p = dist({{"a", 3.0 / 6}, {"b", 2.0 / 6}, {"c", 1.0 / 6}});
  const auto q = dist({{"a", 0.25}, {"b", 0.25}, {"c", 0.5}});
  CHECK(js_divergence(p, q) == doctest::Approx(0.0978548143998655).epsilon(1e-12));
  CHECK(kl_divergence(p, q) == doctest::Approx(0.37418541630608854).epsilon(1e-12));
}

TEST_CASE("disjoint supports give exactly one bit") {
  CHECK(js_divergence(dist({{"a", 1.0}}), dist({{"b", 1.0}})) == 1.0);
  CHECK(js_divergence(dist({{"a", 0.3}, {"b", 0.7}}), dist({{"c", 0.1}, {"d", 0.9}})) == 1.0);
}

TEST_CASE("from_counts normalises and keeps the token total") {
  const auto d = TokenDistribution::from_counts({{"x", 3}, {"y", 1}});
  CHECK(d.token_total() == 4);
  CHECK(d.probability("x") == doctest::Approx(0.75));
  CHECK(d.probability("zzz") == 0.0);
  CHECK(d.support_size() == 2);
}

TEST_CASE("divergence properties on random distributions") {
  Rng rng(42);
  const std::vector<std::string> vocab = {"a", "b", "c", "d", "e", "f", "g", "h"};
  for (int i = 0; i < 200; ++i) {
    const auto p = random_dist(rng, vocab);
    const auto q = random_dist(rng, vocab);
    const double pq = js_divergence(p, q);
    CHECK(pq >= 0.0);
    CHECK(pq <= 1.0);
    CHECK(pq == js_divergence(q, p));
    CHECK(js_divergence(p, p) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(kl_divergence(p, p) == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("matrix averages per-language divergences") {
  // Train: en->si and en->ta corpora. Test: en->si only, so only si and the
  // pooled en sides are shared.
  const LabeledCorpora train{"T", {corpus("t1", "si", {{"a b", "x y"}}), corpus("t2", "ta", {{"a a", "p q"}})}};
  const LabeledCorpora test{"E", {corpus("e1", "si", {{"a c", "x z"}})}};
  const auto m = divergence_matrix({train}, {test});
  REQUIRE(m.rows == std::vector<std::string>{"T"});
  REQUIRE(m.cols == std::vector<std::string>{"E"});
  const auto& langs = m.per_language[0][0];
  REQUIRE(langs.size() == 2);
  const double en = js_divergence(dist({{"a", 0.75}, {"b", 0.25}}), dist({{"a", 0.5}, {"c", 0.5}}));
  const double si = js_divergence(dist({{"x", 0.5}, {"y", 0.5}}), dist({{"x", 0.5}, {"z", 0.5}}));
  CHECK(langs.at("en") == doctest::Approx(en).epsilon(1e-12));
  CHECK(langs.at("si") == doctest::Approx(si).epsilon(1e-12));
  CHECK(*m.at("T", "E") == doctest::Approx((en + si) / 2).epsilon(1e-12));
  CHECK_FALSE(m.at("T", "missing").has_value());

  DivergenceConfig only;
  only.sides = SideSelection::non_pivot_only;
  const auto m2 = divergence_matrix({train}, {test}, only);
  CHECK(m2.per_language[0][0].size() == 1);
  CHECK(*m2.at("T", "E") == doctest::Approx(si).epsilon(1e-12));
}

TEST_CASE("cells without a shared language stay empty") {
  DivergenceConfig cfg;
  cfg.sides = SideSelection::non_pivot_only;
  const LabeledCorpora train{"T", {corpus("t1", "si", {{"a", "x"}})}};
  const LabeledCorpora test{"E", {corpus("e1", "ta", {{"a", "y"}})}};
  const auto m = divergence_matrix({train}, {test}, cfg);
  CHECK_FALSE(m.values[0][0].has_value());
  CHECK(m.to_csv() == "train,E\nT,\n");
}

TEST_CASE("a language emptied by stopwords is an error") {
  DivergenceConfig cfg;
  cfg.prep.stopwords = {"x"};
  cfg.prep.keep_punctuation = false;
  const LabeledCorpora train{"T", {corpus("t1", "si", {{"a", "x"}})}};
  const LabeledCorpora test{"E", {corpus("e1", "si", {{"a", "y"}})}};
  CHECK_THROWS_AS(divergence_matrix({train}, {test}, cfg), Error);
}

TEST_CASE("matrix json round trip") {
  const LabeledCorpora a{"A", {corpus("a", "si", {{"one two", "x y"}, {"two", "y"}})}};
  const LabeledCorpora b{"B", {corpus("b", "si", {{"two three", "y z"}})}};
  const auto m = divergence_matrix({a, b}, {a, b});
  const auto back = DivergenceMatrix::from_json(m.to_json());
  CHECK(back.rows == m.rows);
  CHECK(back.cols == m.cols);
  CHECK(back.values == m.values);
  CHECK(back.per_language == m.per_language);
  CHECK(back.to_csv() == m.to_csv());
  CHECK(*m.at("A", "A") == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(m.metadata.at("log_base") == 2);
  CHECK_THROWS_AS(DivergenceMatrix::from_json(nlohmann::json{{"rows", 3}}), Error);
}
