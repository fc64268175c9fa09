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

#include "itft/desk.hpp"

#include <cmath>

#include <fmt/format.h>

#include "itft/error.hpp"
#include "itft/toy/synthetic.hpp"

namespace itft {
namespace {

constexpr const char* kDeskVocab = "desk";

// Adds "<label>.train" / "<label>.test" and returns both pieces' texts.
void add_domain(MemoryCorpusStore& store, const ParallelCorpus& corpus, std::size_t test_pairs,
                std::vector<std::string>& pool) {
  auto [train, test] = toy::split_train_test(corpus, test_pairs);
  for (const auto& p : train.pairs()) {
    pool.push_back(p.source);
    pool.push_back(p.target);
  }
  const std::string label = corpus.domain();
  store.add(label + ".train", train.with_meta({label + ".train", train.meta().source_lang,
                                               train.meta().target_lang, label, train.meta().provenance}));
  store.add(label + ".test", test.with_meta({label + ".test", test.meta().source_lang,
                                             test.meta().target_lang, label, test.meta().provenance}));
}

std::vector<LabeledCorpora> labeled(const MemoryCorpusStore& store,
                                    const std::vector<std::string>& domains, const char* part) {
  std::vector<LabeledCorpora> out;
  for (const auto& d : domains) out.push_back({d, {store.corpus(d + part)}});
  return out;
}

DivergenceMatrix store_divergence(const MemoryCorpusStore& store,
                                  const std::vector<std::string>& domains, DivergenceConfig cfg) {
  return divergence_matrix(labeled(store, domains, ".train"), labeled(store, domains, ".test"), cfg);
}

}  // namespace

toy::TrainConfig desk_train_config() {
  toy::TrainConfig t;
  t.epochs = 10;
  t.lr = 1e-3;
  return t;
}

DivergenceMatrix DeskSetup::divergence(const DivergenceConfig& cfg) const {
  return store_divergence(store, domains, cfg);
}

DivergenceMatrix FamilySetup::divergence(const DivergenceConfig& cfg) const {
  return store_divergence(store, domains, cfg);
}

DeskSetup make_desk_setup(const DeskOptions& o) {
  if (!(o.overlap >= 0.0 && o.overlap <= 1.0)) {
    fail(ErrorKind::invalid_argument, fmt::format("overlap {} outside [0, 1]", o.overlap));
  }
  const int shared = static_cast<int>(std::floor(o.overlap * o.lexicon_size + 1e-9));
  const int offset_b = o.lexicon_size - shared;
  toy::SyntheticWorldConfig wc;
  wc.templates = o.grammar_size;
  wc.lexicon_size = o.lexicon_size;
  wc.seed = o.seed;
  const bool with_c = o.pretrain_pairs > 0;
  const toy::SyntheticWorld world(wc, (with_c ? 2 * offset_b : offset_b) + o.lexicon_size);

  DeskSetup s;
  std::vector<std::string> pool;
  add_domain(s.store, world.generate({"synA", 0}, o.train_pairs + o.test_pairs, o.seed), o.test_pairs, pool);
  add_domain(s.store, world.generate({"synB", offset_b}, o.train_pairs + o.test_pairs, o.seed), o.test_pairs, pool);
  s.domains = {"synA", "synB"};
  if (with_c) {
    add_domain(s.store, world.generate({"synC", 2 * offset_b}, o.pretrain_pairs + o.test_pairs, o.seed),
               o.test_pairs, pool);
    s.domains.push_back("synC");
  }
  s.store.add_subword(kDeskVocab, train_subword(pool, o.vocab_size));

  GridSpec& g = s.grid;
  g.base.vocab = kDeskVocab;
  g.base.seed = o.seed;
  if (with_c) g.base.pretrain = StageSpec{"synC.train", "synC", o.pretrain_pairs, desk_train_config()};
  g.intermediate_corpus = "synA.train";
  g.intermediate_domain = "synA";
  g.intermediate_sizes = {0, 256, 2048};
  g.final_corpus = "synB.train";
  g.final_domain = "synB";
  g.final_sizes = {64, 256, 1024, 2048};
  g.tests = {{"synB.test", "synB", "synB", true}, {"synA.test", "synA", "synA", false}};
  g.seeds = {o.seed};
  g.train = desk_train_config();
  g.notes = fmt::format("desk grid: overlap {}, lexicon {}, grammar {}", o.overlap, o.lexicon_size,
                        o.grammar_size);
  return s;
}

DeskSetup make_demo_setup(std::uint64_t seed) {
  DeskOptions o;
  o.train_pairs = 256;
  o.test_pairs = 40;
  o.lexicon_size = 30;
  o.grammar_size = 6;
  o.vocab_size = 160;
  o.seed = seed;
  DeskSetup s = make_desk_setup(o);
  s.grid.base.model.d_model = 32;
  s.grid.base.model.ffn_dim = 64;
  s.grid.base.model.enc_layers = 1;
  s.grid.base.model.dec_layers = 1;
  s.grid.intermediate_sizes = {0, 256};
  s.grid.final_sizes = {32, 128};
  s.grid.train.epochs = 4;
  s.grid.notes = "demo grid";
  return s;
}

FamilySetup make_family_setup(const FamilyOptions& o) {
  FamilySetup s;
  std::vector<std::string> pool;
  for (const auto& c : toy::gen_domain_family(o.domains, o.stride, o.grammar_size, o.lexicon_size,
                                              o.train_pairs + o.test_pairs, o.seed)) {
    add_domain(s.store, c, o.test_pairs, pool);
    s.domains.push_back(c.domain());
  }
  s.store.add_subword(kDeskVocab, train_subword(pool, o.vocab_size));
  s.base.vocab = kDeskVocab;
  s.base.seed = o.seed;
  return s;
}

std::vector<ExperimentPlan> family_plans(const FamilySetup& setup, std::size_t intermediate_size,
                                         std::size_t final_size, const toy::TrainConfig& train,
                                         const std::vector<std::uint64_t>& seeds,
                                         const std::vector<Direction>& directions) {
  std::vector<ExperimentPlan> plans;
  for (const auto seed : seeds) {
    toy::TrainConfig t = train;
    t.seed = seed;
    for (const auto& inter : setup.domains) {
      for (const auto& fin : setup.domains) {
        if (inter == fin) continue;
        ExperimentPlan p;
        p.base = setup.base;
        p.base.seed = seed;
        if (intermediate_size > 0) p.intermediate = StageSpec{inter + ".train", inter, intermediate_size, t};
        p.final_stage = StageSpec{fin + ".train", fin, final_size, t};
        for (const auto& d : setup.domains) p.tests.push_back({d + ".test", d, d, d == fin});
        p.directions = directions;
        p.seed = seed;
        p.notes = "domain family grid";
        plans.push_back(finalize_plan(std::move(p)));
      }
    }
  }
  return plans;
}

}  // namespace itft
