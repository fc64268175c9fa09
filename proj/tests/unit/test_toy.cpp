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
#include <set>
#include <string>
#include <vector>

#include "itft/divergence.hpp"
#include "itft/error.hpp"
#include "itft/random.hpp"
#include "itft/subword.hpp"
#include "itft/textprep.hpp"
#include "itft/toy/model.hpp"
#include "itft/toy/synthetic.hpp"
#include "itft/toy/train.hpp"
#include "itft/toy/transformer.hpp"
#include "test_helpers.hpp"

using namespace itft;
using namespace itft::toy;

namespace {

ModelConfig small_config(int vocab) {
  ModelConfig c;
  c.d_model = 16;
  c.heads = 2;
  c.enc_layers = 1;
  c.dec_layers = 1;
  c.ffn_dim = 32;
  c.dropout = 0.0;
  c.max_len = 32;
  c.vocab_size = vocab;
  c.vocab_id = "unit";
  return c;
}

std::vector<Example> random_examples(Rng& rng, int vocab, int n) {
  std::vector<Example> out;
  for (int i = 0; i < n; ++i) {
    Example ex;
    const auto ls = 1 + rng.below(8);
    const auto lt = 1 + rng.below(8);
    for (std::size_t k = 0; k < ls; ++k) ex.src.push_back(4 + static_cast<int>(rng.below(vocab - 4)));
    for (std::size_t k = 0; k < lt; ++k) ex.tgt.push_back(4 + static_cast<int>(rng.below(vocab - 4)));
    out.push_back(std::move(ex));
  }
  return out;
}

// Counted from the architecture: two embeddings, pre-norm encoder and decoder
// blocks with final norms, and an untied output projection.
std::size_t expected_parameters(std::size_t v, std::size_t d, std::size_t f, std::size_t enc,
                                std::size_t dec) {
  const std::size_t norm = 2 * d;
  const std::size_t attn = 4 * (d * d + d);
  const std::size_t ffn = d * f + f + f * d + d;
  return 2 * v * d + enc * (2 * norm + attn + ffn) + norm + dec * (3 * norm + 2 * attn + ffn) +
         norm + d * v + v;
}

}  // namespace

TEST_CASE("parameter count of the default model") {
  ModelConfig c;
  c.vocab_size = 512;
  CHECK(parameter_count(c) == 266496);
  CHECK(parameter_count(c) == expected_parameters(512, 64, 128, 2, 2));
  const auto s = small_config(40);
  CHECK(parameter_count(s) == expected_parameters(40, 16, 32, 1, 1));
  CHECK(ParameterLayout(c).total() == parameter_count(c));
}

TEST_CASE("config validation") {
  auto c = small_config(40);
  c.heads = 3;
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_config(4);
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_config(40);
  c.dropout = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK(ModelConfig::from_json(small_config(40).to_json()) == small_config(40));
  TrainConfig t;
  CHECK(TrainConfig::from_json(t.to_json()) == t);
}

TEST_CASE("initial loss is close to uniform") {
  ModelConfig c;
  c.vocab_size = 512;
  c.vocab_id = "unit";
  const auto ckpt = init_model(c, 7);
  Rng rng(3);
  const auto batch = random_examples(rng, 512, 10);
  const double loss = forward(ckpt, batch, false).loss;
  CHECK(std::abs(loss - std::log(512.0)) < 0.05 * std::log(512.0));
}

TEST_CASE("initialisation is deterministic per seed") {
  const auto c = small_config(40);
  CHECK(init_model(c, 1) == init_model(c, 1));
  CHECK(init_model(c, 1).digest() == init_model(c, 1).digest());
  CHECK(init_model(c, 1).parameters != init_model(c, 2).parameters);
}

TEST_CASE("padding does not change the loss") {
  const auto ckpt = init_model(small_config(40), 11);
  Rng rng(5);
  auto batch = random_examples(rng, 40, 4);
  const double clean = forward(ckpt, batch, false).loss;
  for (auto& ex : batch) {
    ex.src.push_back(kPadId);
    ex.src.insert(ex.src.begin(), kPadId);
    ex.tgt.push_back(kPadId);
  }
  CHECK(forward(ckpt, batch, false).loss == clean);
}

TEST_CASE("per-example losses do not depend on batch composition") {
  const auto ckpt = init_model(small_config(40), 13);
  Rng rng(9);
  const auto batch = random_examples(rng, 40, 10);
  const auto together = forward(ckpt, batch, false);
  REQUIRE(together.example_loss.size() == 10);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto alone = forward(ckpt, std::span<const Example>(&batch[i], 1), false);
    CHECK(std::abs(alone.loss - together.example_loss[i]) < 1e-6);
  }
}

TEST_CASE("gradient matches finite differences on a few coordinates") {
  const auto c = small_config(20);
  const auto ckpt = init_model(c, 17);
  Rng rng(21);
  const auto batch = random_examples(rng, 20, 3);
  std::vector<double> params = ckpt.parameters;
  std::vector<double> grad(params.size());
  loss_and_gradient(c, params, batch, grad);
  std::vector<double> scratch(params.size());
  for (int k = 0; k < 25; ++k) {
    const auto i = rng.below(params.size());
    const double h = 1e-5;
    const double saved = params[i];
    params[i] = saved + h;
    const double up = loss_and_gradient(c, params, batch, scratch);
    params[i] = saved - h;
    const double down = loss_and_gradient(c, params, batch, scratch);
    params[i] = saved;
    const double numeric = (up - down) / (2 * h);
    CHECK(std::abs(numeric - grad[i]) <= 1e-6 + 1e-4 * std::abs(numeric));
  }
}

TEST_CASE("checkpoint round trip") {
  testing::TempDir dir("toy");
  auto ckpt = init_model(small_config(40), 3);
  ckpt.step = 12;
  ckpt.lineage.push_back({"final", "c1", 64, 2, 222});
  save_checkpoint(ckpt, dir / "m.ckpt");
  const auto back = load_checkpoint(dir / "m.ckpt");
  CHECK(back == ckpt);
  CHECK(back.digest() == ckpt.digest());
  testing::write_file(dir / "bad.ckpt", "not a checkpoint");
  CHECK_THROWS_AS(load_checkpoint(dir / "bad.ckpt"), Error);
}

TEST_CASE("greedy decoding limits") {
  const auto ckpt = init_model(small_config(40), 3);
  CHECK(greedy_decode(ckpt, {5, 6, 7}, 0).empty());
  const auto out = greedy_decode(ckpt, {5, 6, 7}, 5);
  CHECK(out.size() <= 5);
  for (int id : out) CHECK(id != kPadId);
  CHECK_THROWS_AS(greedy_decode(ckpt, {500}, 3), Error);
}

TEST_CASE("training lowers the loss and is deterministic") {
  const auto a = gen_synthetic_domains(1.0, 3, 10, 40, 5).first;
  std::vector<std::string> pool = a.sources();
  const auto tgt = a.targets();
  pool.insert(pool.end(), tgt.begin(), tgt.end());
  const auto sub = train_subword(pool, 80);
  auto c = small_config(sub.vocab_size());
  c.vocab_id = sub.id();
  const auto base = init_model(c, 1);
  TrainConfig t;
  t.epochs = 5;
  t.lr = 1e-3;
  TrainStats s1, s2;
  const auto m1 = fine_tune(base, sub, a, t, "final", &s1);
  const auto m2 = fine_tune(base, sub, a, t, "final", &s2);
  CHECK(m1 == m2);
  REQUIRE(s1.step_loss.size() >= 2);
  CHECK(s1.step_loss.back() < s1.step_loss.front());
  CHECK(m1.lineage.back().stage == "final");
  CHECK(m1.lineage.back().epochs == 5);
  CHECK(translate(m1, sub, std::vector<std::string>{a.pairs()[0].source}).size() == 1);
}

TEST_CASE("synthetic domains share exactly the requested lexicon fraction") {
  const int lexicon = 40;
  for (double overlap : {0.0, 0.25, 0.5, 1.0}) {
    const auto [a, b] = gen_synthetic_domains(overlap, 6, lexicon, 3000, 2);
    auto content = [&](const ParallelCorpus& c) {
      std::set<std::string> words;
      for (const auto& s : c.sources()) {
        // Function words are single syllables; content words have two or more.
        for (const auto& tok : word_tokenize(s)) {
          if (tok.size() > 2) words.insert(tok);
        }
      }
      return words;
    };
    const auto wa = content(a);
    const auto wb = content(b);
    std::size_t shared = 0;
    for (const auto& x : wa) shared += wb.count(x);
    CHECK(wa.size() == static_cast<std::size_t>(lexicon));
    CHECK(shared == static_cast<std::size_t>(std::floor(overlap * lexicon)));
  }
}

TEST_CASE("lexical overlap drives divergence") {
  auto jsd = [](double overlap) {
    const auto [a, b] = gen_synthetic_domains(overlap, 12, 60, 2000, 222);
    DivergenceConfig cfg;
    cfg.pivot_lang = "en";
    const auto m = divergence_matrix({{"a", {a}}}, {{"b", {b}}}, cfg);
    return *m.at("a", "b");
  };
  CHECK(jsd(1.0) < 0.05);
  CHECK(jsd(0.0) > 0.8);
}

TEST_CASE("synthetic translation is a consistent word mapping") {
  const auto a = gen_synthetic_domains(0.5, 4, 12, 50, 9).first;
  for (const auto& p : a.pairs()) {
    CHECK(word_tokenize(p.source).size() == word_tokenize(p.target).size());
  }
  const auto [train, test] = split_train_test(a, 10);
  CHECK(test.size() == 10);
  CHECK(train.size() == 40);
  CHECK(test.pairs()[0] == a.pairs()[0]);
  CHECK_THROWS_AS(split_train_test(a, 50), Error);
  CHECK(gen_synthetic_domains(0.5, 4, 12, 50, 9).first.pairs() == a.pairs());
}
