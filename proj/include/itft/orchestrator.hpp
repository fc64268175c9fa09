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
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "itft/corpus.hpp"
#include "itft/metrics.hpp"
#include "itft/subword.hpp"
#include "itft/toy/model.hpp"

namespace itft {

// ---------------------------------------------------------------------------
// Plans

enum class Direction { forward, reverse };

std::string direction_name(Direction d);
Direction parse_direction(const std::string& name);

struct StageSpec {
  std::string corpus;  // corpus store id
  std::string domain;
  std::size_t size = 0;  // pairs drawn by nested sampling with the plan seed
  toy::TrainConfig train;

  nlohmann::json to_json() const;
  static StageSpec from_json(const nlohmann::json& j);
  friend bool operator==(const StageSpec&, const StageSpec&) = default;
};

struct BaseSpec {
  std::string kind = "init";  // "init" or "checkpoint"
  toy::ModelConfig model;     // vocab_size / vocab_id filled from `vocab` at run time
  std::string vocab;          // corpus store id of the subword model
  std::uint64_t seed = kDefaultSeed;
  std::string checkpoint;     // kind == "checkpoint": path of a saved model
  // Optional training on a third domain before any plan stage; evaluating
  // this alone is the zero-shot baseline.
  std::optional<StageSpec> pretrain;

  nlohmann::json to_json() const;
  static BaseSpec from_json(const nlohmann::json& j);
  friend bool operator==(const BaseSpec&, const BaseSpec&) = default;
};

struct TestSpec {
  std::string corpus;
  std::string label;
  std::string domain;
  bool in_domain = false;

  nlohmann::json to_json() const;
  static TestSpec from_json(const nlohmann::json& j);
  friend bool operator==(const TestSpec&, const TestSpec&) = default;
};

// A base model followed by an optional intermediate stage and a final stage.
// Absent intermediate: the single-stage baseline. Absent final: evaluation of
// the base model alone (zero-shot).
struct ExperimentPlan {
  std::string plan_id;
  BaseSpec base;
  std::optional<StageSpec> intermediate;
  std::optional<StageSpec> final_stage;
  std::vector<TestSpec> tests;
  std::vector<Direction> directions{Direction::forward, Direction::reverse};
  std::uint64_t seed = kDefaultSeed;
  std::string notes;  // free text, e.g. language-tag mapping for external backends

  // Checks stage presence, unique test labels, in_domain flags and sizes.
  void validate() const;
  // FNV-1a over the canonical JSON of every field except plan_id.
  std::string content_id() const;
  nlohmann::json to_json() const;
  // Fills plan_id from content when absent; rejects a mismatching plan_id.
  static ExperimentPlan from_json(const nlohmann::json& j);

  friend bool operator==(const ExperimentPlan&, const ExperimentPlan&) = default;
};

ExperimentPlan finalize_plan(ExperimentPlan plan);  // validate + set plan_id

// ---------------------------------------------------------------------------
// Stores

class CorpusStore {
 public:
  virtual ~CorpusStore() = default;
  virtual ParallelCorpus corpus(const std::string& id) const = 0;
  virtual SubwordModel subword(const std::string& id) const = 0;
  virtual std::size_t corpus_size(const std::string& id) const { return corpus(id).size(); }
};

class MemoryCorpusStore : public CorpusStore {
 public:
  void add(const std::string& id, ParallelCorpus corpus);
  void add_subword(const std::string& id, SubwordModel model);
  ParallelCorpus corpus(const std::string& id) const override;
  SubwordModel subword(const std::string& id) const override;
  std::size_t corpus_size(const std::string& id) const override;
  std::vector<std::string> corpus_ids() const;

 private:
  std::map<std::string, ParallelCorpus> corpora_;
  std::map<std::string, SubwordModel> subwords_;
};

// `<root>/<id>.json` corpus sidecars and `<root>/<id>.subword.json` models.
class DirectoryCorpusStore : public CorpusStore {
 public:
  explicit DirectoryCorpusStore(std::filesystem::path root);
  ParallelCorpus corpus(const std::string& id) const override;
  SubwordModel subword(const std::string& id) const override;
  const std::filesystem::path& root() const noexcept { return root_; }

  // Writes a corpus and/or model in the layout read above.
  static void put(const std::filesystem::path& root, const std::string& id,
                  const ParallelCorpus& corpus);
  static void put_subword(const std::filesystem::path& root, const std::string& id,
                          const SubwordModel& model);

 private:
  std::filesystem::path root_;
  mutable std::mutex mu_;
  mutable std::map<std::string, ParallelCorpus> cache_;
};

// ---------------------------------------------------------------------------
// Trainer backends

class BackendModel {
 public:
  virtual ~BackendModel() = default;
  virtual std::string digest() const = 0;
};
using ModelPtr = std::shared_ptr<const BackendModel>;

// Every method must be safe to call concurrently; models are immutable.
class TrainerBackend {
 public:
  virtual ~TrainerBackend() = default;
  virtual std::string name() const = 0;
  virtual ModelPtr init(const BaseSpec& base, const SubwordModel& vocab) = 0;
  virtual ModelPtr fine_tune(const ModelPtr& model, const ParallelCorpus& corpus,
                             const toy::TrainConfig& cfg, const std::string& stage) = 0;
  virtual std::vector<std::string> translate(const ModelPtr& model,
                                             std::span<const std::string> sources) = 0;
  virtual void save(const ModelPtr& model, const std::filesystem::path& path) = 0;
  virtual ModelPtr load(const std::filesystem::path& path) = 0;
};

class ToyModel : public BackendModel {
 public:
  ToyModel(toy::ModelCheckpoint ckpt, std::shared_ptr<const SubwordModel> vocab);
  std::string digest() const override { return digest_; }
  const toy::ModelCheckpoint& checkpoint() const noexcept { return ckpt_; }
  const SubwordModel& vocab() const noexcept { return *vocab_; }
  std::shared_ptr<const SubwordModel> vocab_ptr() const noexcept { return vocab_; }

 private:
  toy::ModelCheckpoint ckpt_;
  std::shared_ptr<const SubwordModel> vocab_;
  std::string digest_;
};

class ToyBackend : public TrainerBackend {
 public:
  std::string name() const override { return "toy"; }
  ModelPtr init(const BaseSpec& base, const SubwordModel& vocab) override;
  ModelPtr fine_tune(const ModelPtr& model, const ParallelCorpus& corpus,
                     const toy::TrainConfig& cfg, const std::string& stage) override;
  std::vector<std::string> translate(const ModelPtr& model,
                                     std::span<const std::string> sources) override;
  // Checkpoint file plus `<path>.subword.json` holding the vocabulary.
  void save(const ModelPtr& model, const std::filesystem::path& path) override;
  ModelPtr load(const std::filesystem::path& path) override;
};

// Trained stage models keyed by the digest of their full lineage (base spec,
// every stage spec up to and including this one, direction). Concurrent
// requests for one key train it once.
class StageCache {
 public:
  explicit StageCache(std::optional<std::filesystem::path> dir = std::nullopt);

  ModelPtr get_or_train(const std::string& key, TrainerBackend& backend,
                        const std::function<ModelPtr()>& train);
  std::size_t hits() const;
  std::size_t misses() const;

 private:
  struct Slot;
  std::optional<std::filesystem::path> dir_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Slot>> slots_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

// ---------------------------------------------------------------------------
// Records

struct ScoreEntry {
  std::string test;    // test label
  std::string corpus;  // test corpus id
  bool in_domain = false;
  Direction direction = Direction::forward;
  std::string pair;    // "src-tgt" after applying the direction
  BleuScore bleu;

  nlohmann::json to_json() const;
  static ScoreEntry from_json(const nlohmann::json& j);
};

struct RunRecord {
  ExperimentPlan plan;
  std::string status = "ok";  // "ok" or "failed"
  std::string error;          // failed only
  std::string backend;
  std::vector<ScoreEntry> scores;  // empty when failed
  // "<direction>/<stage>" -> model digest after that stage
  std::map<std::string, std::string> stage_digests;
  std::string toolkit_version;
  std::string started;   // ISO-8601 UTC
  std::string finished;

  bool ok() const noexcept { return status == "ok"; }
  const ScoreEntry& score(const std::string& test, Direction d) const;

  nlohmann::json to_json() const;
  static RunRecord from_json(const nlohmann::json& j);
  // Canonical JSON without the timestamps; equal for replays of one plan.
  std::string content() const;
};

// One `<plan_id>.json` per record. Writes go to a hidden temp file that is
// fsynced and renamed into place, so readers never see a partial record.
class RecordStore {
 public:
  explicit RecordStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const noexcept { return dir_; }
  std::filesystem::path path_of(const std::string& plan_id) const;
  bool contains(const std::string& plan_id) const;
  std::optional<RunRecord> read(const std::string& plan_id) const;
  void write(const RunRecord& record) const;
  // Every complete record, ordered by plan_id. Temp files are ignored.
  std::vector<RunRecord> list() const;
  // Removes temp files left by interrupted writers; returns how many.
  std::size_t remove_stale_temps() const;

 private:
  std::filesystem::path dir_;
};

std::filesystem::path default_store_root();  // $ITFT_LAB_HOME or ./itft-lab-home

// ---------------------------------------------------------------------------
// Execution

struct RunContext {
  TrainerBackend* backend = nullptr;
  const CorpusStore* corpora = nullptr;
  StageCache* cache = nullptr;  // optional
};

// Runs the stage chain per direction and scores every test with spBLEU.
// Never throws for stage failures: they produce a failed record.
RunRecord run_plan(const ExperimentPlan& plan, const RunContext& ctx);

enum class CellOutcome { ran, skipped, failed };

struct GridEvent {
  std::size_t index = 0;
  std::string plan_id;
  CellOutcome outcome = CellOutcome::ran;
  std::string message;
};

struct GridOptions {
  int jobs = 1;
  bool force = false;  // rerun plans that already have an ok record
  std::function<void(const GridEvent&)> on_event;
};

struct GridSummary {
  std::vector<RunRecord> records;  // in plan order, including skipped ones
  std::size_t ran = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
};

// Plans with an ok record in `store` are skipped unless forced; failed
// records are always retried. Cells run on `jobs` threads.
GridSummary run_grid(std::span<const ExperimentPlan> plans, const RunContext& ctx,
                     const RecordStore& store, const GridOptions& options = {});

// ---------------------------------------------------------------------------
// Grids and aggregation

struct GridSpec {
  BaseSpec base;
  std::string intermediate_corpus;
  std::string intermediate_domain;
  std::vector<std::size_t> intermediate_sizes{0, 256, 2048};
  std::string final_corpus;
  std::string final_domain;
  std::vector<std::size_t> final_sizes{64, 256, 1024, 2048};
  std::vector<TestSpec> tests;  // in_domain is derived from final_domain
  std::vector<std::uint64_t> seeds{kDefaultSeed};
  toy::TrainConfig train;
  std::vector<Direction> directions{Direction::forward, Direction::reverse};
  std::string notes;

  nlohmann::json to_json() const;
  static GridSpec from_json(const nlohmann::json& j);
};

// Cartesian product seeds x intermediate sizes x final sizes; intermediate
// size 0 yields no intermediate stage. Each plan's base seed, sampling seed
// and stage training seeds equal its grid seed. Sizes are checked against
// `corpora` when given.
std::vector<ExperimentPlan> plan_grid(const GridSpec& spec, const CorpusStore* corpora = nullptr);

struct ResultRow {
  std::size_t intermediate_size = 0;
  std::size_t final_size = 0;
  std::uint64_t seed = 0;
  std::string test;
  std::string direction;
  std::string language;  // language pair of the scored direction
  double spbleu = 0.0;
};

struct ResultGroup {
  std::map<std::string, std::string> key;  // group_by field -> value
  double mean = 0.0;
  std::vector<std::pair<std::uint64_t, double>> per_seed;
};

struct ResultTable {
  std::vector<std::string> group_by;
  std::vector<ResultRow> rows;
  std::vector<ResultGroup> groups;

  // Columns: intermediate_size, final_size, seed, test, direction, spbleu.
  std::string long_csv() const;
  std::string groups_csv() const;
  // One table per (test, direction): final size rows, intermediate size
  // columns, mean spBLEU cells.
  std::string pivot_markdown() const;
  nlohmann::json to_json() const;
};

// group_by fields: intermediate_size, final_size, language, direction, test.
// Failed records are ignored; no remaining rows is an error.
ResultTable aggregate(std::span<const RunRecord> records, const std::vector<std::string>& group_by);

std::string utc_timestamp();

}  // namespace itft
