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

#include <atomic>
#include <filesystem>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "itft/error.hpp"
#include "itft/hash.hpp"
#include "itft/orchestrator.hpp"
#include "itft/subword.hpp"
#include "test_helpers.hpp"

using namespace itft;
namespace fs = std::filesystem;

namespace {

// A model is its training history. Once it has seen data it translates
// perfectly by swapping the three-letter side prefix.
class FakeModel : public BackendModel {
 public:
  explicit FakeModel(std::string history) : history_(std::move(history)) {}
  std::string digest() const override { return content_hash(history_); }
  const std::string& history() const { return history_; }

 private:
  std::string history_;
};

class FakeBackend : public TrainerBackend {
 public:
  std::string name() const override { return "fake"; }
  ModelPtr init(const BaseSpec& base, const SubwordModel&) override {
    return std::make_shared<FakeModel>(fmt::format("init:{}", base.seed));
  }
  ModelPtr fine_tune(const ModelPtr& model, const ParallelCorpus& corpus, const toy::TrainConfig& cfg,
                     const std::string& stage) override {
    ++trained;
    if (corpus.id().find(fail_on) != std::string::npos && !fail_on.empty()) {
      fail(ErrorKind::experiment, "synthetic failure");
    }
    const auto& parent = static_cast<const FakeModel&>(*model);
    return std::make_shared<FakeModel>(fmt::format("{}>{}:{}:{}:{}", parent.history(), stage, corpus.id(),
                                                   corpus.size(), cfg.epochs));
  }
  std::vector<std::string> translate(const ModelPtr& model, std::span<const std::string> sources) override {
    const auto& m = static_cast<const FakeModel&>(*model);
    if (m.history().find('>') == std::string::npos) return std::vector<std::string>(sources.size(), "zz");
    std::vector<std::string> out;
    for (const auto& src : sources) out.push_back((src.rfind("src", 0) == 0 ? "tgt" : "src") + src.substr(3));
    return out;
  }
  void save(const ModelPtr& model, const fs::path& path) override {
    testing::write_file(path, static_cast<const FakeModel&>(*model).history());
  }
  ModelPtr load(const fs::path& path) override { return std::make_shared<FakeModel>(testing::read_file(path)); }

  std::atomic<int> trained{0};
  std::string fail_on;
};

ParallelCorpus make_corpus(const std::string& id, const std::string& domain, int n) {
  std::vector<SentencePair> pairs;
  for (int i = 0; i < n; ++i) pairs.push_back({fmt::format("src {} {}", domain, i), fmt::format("tgt {} {}", domain, i)});
  return ParallelCorpus({id, "en", "si", domain, "unit"}, std::move(pairs));
}

struct Fixture {
  MemoryCorpusStore store;
  Fixture() {
    store.add("mid", make_corpus("mid", "bible", 300));
    store.add("fin", make_corpus("fin", "gov", 300));
    store.add("fin.test", make_corpus("fin.test", "gov", 5));
    store.add("mid.test", make_corpus("mid.test", "bible", 5));
    std::vector<std::string> pool;
    const auto fin = store.corpus("fin");
    for (const auto& p : fin.pairs()) pool.push_back(p.source + " " + p.target);
    store.add_subword("vocab", train_subword(pool, 60));
  }

  GridSpec grid() const {
    GridSpec g;
    g.base.vocab = "vocab";
    g.intermediate_corpus = "mid";
    g.intermediate_domain = "bible";
    g.intermediate_sizes = {0, 100, 200};
    g.final_corpus = "fin";
    g.final_domain = "gov";
    g.final_sizes = {10, 50, 100};
    g.tests = {{"fin.test", "gov-test", "gov", false}, {"mid.test", "bible-test", "bible", false}};
    return g;
  }
};

}  // namespace

TEST_CASE("a 3x3 grid expands to 9 validated plans") {
  Fixture f;
  const auto plans = plan_grid(f.grid(), &f.store);
  REQUIRE(plans.size() == 9);
  std::set<std::string> ids;
  for (const auto& p : plans) {
    ids.insert(p.plan_id);
    CHECK(p.plan_id == p.content_id());
    REQUIRE(p.tests.size() == 2);
    CHECK(p.tests[0].in_domain);
    CHECK_FALSE(p.tests[1].in_domain);
  }
  CHECK(ids.size() == 9);
  CHECK_FALSE(plans[0].intermediate.has_value());
  CHECK(plans.back().intermediate->size == 200);
  CHECK(plan_grid(f.grid(), &f.store)[4].plan_id == plans[4].plan_id);
}

TEST_CASE("plan ids depend only on content") {
  Fixture f;
  auto p = plan_grid(f.grid(), &f.store)[3];
  const auto id = p.plan_id;
  p.plan_id = "something else";
  CHECK(p.content_id() == id);
  const auto back = ExperimentPlan::from_json(plan_grid(f.grid(), &f.store)[3].to_json());
  CHECK(back.plan_id == id);
  auto tampered = plan_grid(f.grid(), &f.store)[3].to_json();
  tampered["seed"] = 999;
  CHECK_THROWS_AS(ExperimentPlan::from_json(tampered), Error);
  p.seed = 999;
  CHECK(p.content_id() != id);
}

TEST_CASE("stage sizes beyond the corpus are rejected") {
  Fixture f;
  auto g = f.grid();
  g.final_sizes = {301};
  CHECK_THROWS_AS(plan_grid(g, &f.store), Error);
  g = f.grid();
  g.intermediate_sizes = {1000};
  CHECK_THROWS_AS(plan_grid(g, &f.store), Error);
}

TEST_CASE("plan validation") {
  Fixture f;
  auto p = plan_grid(f.grid(), &f.store)[4];
  p.tests[0].in_domain = false;
  CHECK_THROWS_AS(p.validate(), Error);
  p = plan_grid(f.grid(), &f.store)[4];
  p.final_stage.reset();
  CHECK_THROWS_AS(p.validate(), Error);
  p = plan_grid(f.grid(), &f.store)[4];
  p.directions.clear();
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("an absent intermediate stage is plain fine-tuning of the base") {
  Fixture f;
  FakeBackend backend;
  const auto plans = plan_grid(f.grid(), &f.store);
  const auto rec = run_plan(plans[1], {&backend, &f.store, nullptr});
  REQUIRE(rec.ok());
  const auto base = backend.init(plans[1].base, f.store.subword("vocab"));
  const auto direct =
      backend.fine_tune(base, sample_subset(f.store.corpus("fin"), {50, plans[1].seed}), plans[1].final_stage->train, "final");
  CHECK(rec.stage_digests.at("forward/final") == direct->digest());
  CHECK(rec.stage_digests.count("forward/intermediate") == 0);
  CHECK(rec.scores.size() == 4);
  CHECK(rec.score("gov-test", Direction::forward).bleu.score == 100.0);
  CHECK(rec.score("gov-test", Direction::reverse).pair == "si-en");
}

TEST_CASE("grid runs skip recorded cells and retry failures") {
  Fixture f;
  testing::TempDir dir("grid");
  RecordStore records(dir / "records");
  FakeBackend backend;
  StageCache cache;
  const RunContext ctx{&backend, &f.store, &cache};
  const auto plans = plan_grid(f.grid(), &f.store);

  backend.fail_on = "mid";
  auto first = run_grid(plans, ctx, records);
  CHECK(first.ran == 3);
  CHECK(first.failed == 6);
  for (const auto& r : first.records) {
    if (!r.ok()) CHECK(r.error.find("intermediate stage") != std::string::npos);
  }

  backend.fail_on.clear();
  auto second = run_grid(plans, ctx, records);
  CHECK(second.skipped == 3);
  CHECK(second.ran == 6);
  CHECK(second.failed == 0);
  auto third = run_grid(plans, ctx, records);
  CHECK(third.skipped == 9);
  for (std::size_t i = 0; i < plans.size(); ++i) CHECK(third.records[i].content() == second.records[i].content());

  GridOptions force;
  force.force = true;
  force.jobs = 3;
  auto forced = run_grid(plans, ctx, records, force);
  CHECK(forced.ran == 9);
  for (std::size_t i = 0; i < plans.size(); ++i) CHECK(forced.records[i].content() == second.records[i].content());
  CHECK(cache.hits() > 0);
}

TEST_CASE("the stage cache shares training between plans") {
  Fixture f;
  FakeBackend backend;
  StageCache cache;
  const auto plans = plan_grid(f.grid(), &f.store);
  for (const auto& p : plans) REQUIRE(run_plan(p, {&backend, &f.store, &cache}).ok());
  // Unique stages: 2 intermediate sizes and 9 final stages, per direction.
  CHECK(backend.trained == 2 * (2 + 9));
}

TEST_CASE("record store writes atomically and lists only records") {
  Fixture f;
  testing::TempDir dir("records");
  RecordStore records(dir / "r");
  FakeBackend backend;
  const auto plan = plan_grid(f.grid(), &f.store)[0];
  const auto rec = run_plan(plan, {&backend, &f.store, nullptr});
  records.write(rec);
  CHECK(records.contains(plan.plan_id));
  CHECK(records.read(plan.plan_id)->content() == rec.content());
  testing::write_file(dir / "r" / ".x.json.tmp.1.2.3", "{");
  CHECK(records.list().size() == 1);
  CHECK(records.remove_stale_temps() == 1);
  CHECK(records.list().size() == 1);
  CHECK_FALSE(records.read("nope").has_value());
  int stray = 0;
  for (const auto& e : fs::directory_iterator(dir / "r")) stray += e.path().filename().string().front() == '.';
  CHECK(stray == 0);
}

TEST_CASE("aggregation averages over seeds") {
  Fixture f;
  testing::TempDir dir("agg");
  RecordStore records(dir / "r");
  FakeBackend backend;
  auto g = f.grid();
  g.seeds = {1, 2};
  g.intermediate_sizes = {0, 100};
  g.final_sizes = {10};
  const auto plans = plan_grid(g, &f.store);
  REQUIRE(plans.size() == 4);
  const auto summary = run_grid(plans, {&backend, &f.store, nullptr}, records);
  const auto table = aggregate(summary.records, {"intermediate_size", "test", "direction"});
  CHECK(table.rows.size() == 4 * 2 * 2);
  REQUIRE(table.groups.size() == 2 * 2 * 2);
  for (const auto& grp : table.groups) {
    CHECK(grp.per_seed.size() == 2);
    CHECK(grp.mean == doctest::Approx((grp.per_seed[0].second + grp.per_seed[1].second) / 2));
  }
  CHECK(table.long_csv().rfind("intermediate_size,final_size,seed,test,direction,spbleu", 0) == 0);
  CHECK_THROWS_AS(aggregate(summary.records, {"colour"}), Error);
  CHECK(table.pivot_markdown().find('|') != std::string::npos);
}
