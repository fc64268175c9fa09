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

#include "itft/orchestrator.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "itft/error.hpp"
#include "itft/hash.hpp"
#include "itft/toy/train.hpp"
#include "itft/version.hpp"

namespace itft {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kPlanFormat = "itft-lab.plan/1";
constexpr const char* kRecordFormat = "itft-lab.record/1";
constexpr const char* kGridFormat = "itft-lab.grid/1";

template <typename T>
T required(const json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key)) {
    fail(ErrorKind::format, fmt::format("{}: missing field '{}'", what, key));
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::format, fmt::format("{}: field '{}': {}", what, key, e.what()));
  }
}

json optional_stage_json(const std::optional<StageSpec>& s) {
  return s ? s->to_json() : json(nullptr);
}

std::optional<StageSpec> optional_stage(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return StageSpec::from_json(j.at(key));
}

json directions_json(const std::vector<Direction>& ds) {
  json a = json::array();
  for (auto d : ds) a.push_back(direction_name(d));
  return a;
}

std::vector<Direction> directions_from(const json& j) {
  std::vector<Direction> out;
  for (const auto& d : j) out.push_back(parse_direction(d.get<std::string>()));
  return out;
}

std::string language_pair(const ParallelCorpus& c) {
  return c.meta().source_lang + "-" + c.meta().target_lang;
}

void write_file_durably(const fs::path& path, const std::string& bytes) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) fail(ErrorKind::io, fmt::format("cannot create {}", path.string()));
  std::size_t done = 0;
  while (done < bytes.size()) {
    const auto n = ::write(fd, bytes.data() + done, bytes.size() - done);
    if (n < 0) {
      ::close(fd);
      fail(ErrorKind::io, fmt::format("write failed for {}", path.string()));
    }
    done += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) {
    ::close(fd);
    fail(ErrorKind::io, fmt::format("fsync failed for {}", path.string()));
  }
  ::close(fd);
}

void fsync_dir(const fs::path& dir) {
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (fd >= 0) {
    ::fsync(fd);
    ::close(fd);
  }
}

fs::path temp_sibling(const fs::path& target) {
  static std::atomic<std::uint64_t> counter{0};
  const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
  return target.parent_path() /
         fmt::format(".{}.tmp.{}.{:x}.{}", target.filename().string(), ::getpid(), tid, counter++);
}

bool is_temp_name(const std::string& name) {
  return !name.empty() && name.front() == '.' && name.find(".tmp.") != std::string::npos;
}

}  // namespace

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const auto t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  ::gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  return fmt::format("{}.{:03d}Z", buf, static_cast<int>(ms));
}

std::string direction_name(Direction d) { return d == Direction::forward ? "forward" : "reverse"; }

Direction parse_direction(const std::string& name) {
  if (name == "forward") return Direction::forward;
  if (name == "reverse") return Direction::reverse;
  fail(ErrorKind::invalid_argument, fmt::format("unknown direction '{}'", name));
}

// ---------------------------------------------------------------------------
// Plan (de)serialization

json StageSpec::to_json() const {
  return {{"corpus", corpus}, {"domain", domain}, {"size", size}, {"train", train.to_json()}};
}

StageSpec StageSpec::from_json(const json& j) {
  StageSpec s;
  s.corpus = required<std::string>(j, "corpus", "stage");
  s.domain = j.value("domain", s.corpus);
  s.size = required<std::size_t>(j, "size", "stage");
  if (j.contains("train")) s.train = toy::TrainConfig::from_json(j.at("train"));
  return s;
}

json BaseSpec::to_json() const {
  json j = {{"kind", kind}, {"model", model.to_json()}, {"vocab", vocab}, {"seed", seed},
            {"pretrain", optional_stage_json(pretrain)}};
  if (kind == "checkpoint") j["checkpoint"] = checkpoint;
  return j;
}

BaseSpec BaseSpec::from_json(const json& j) {
  BaseSpec b;
  b.kind = j.value("kind", b.kind);
  if (j.contains("model")) b.model = toy::ModelConfig::from_json(j.at("model"));
  b.vocab = j.value("vocab", b.vocab);
  b.seed = j.value("seed", b.seed);
  b.checkpoint = j.value("checkpoint", b.checkpoint);
  b.pretrain = optional_stage(j, "pretrain");
  return b;
}

json TestSpec::to_json() const {
  return {{"corpus", corpus}, {"label", label}, {"domain", domain}, {"in_domain", in_domain}};
}

TestSpec TestSpec::from_json(const json& j) {
  TestSpec t;
  t.corpus = required<std::string>(j, "corpus", "test");
  t.label = j.value("label", t.corpus);
  t.domain = j.value("domain", t.corpus);
  t.in_domain = j.value("in_domain", false);
  return t;
}

void ExperimentPlan::validate() const {
  if (base.kind != "init" && base.kind != "checkpoint") {
    fail(ErrorKind::invalid_argument, fmt::format("unknown base kind '{}'", base.kind));
  }
  if (base.kind == "checkpoint" && base.checkpoint.empty()) {
    fail(ErrorKind::invalid_argument, "checkpoint base needs a checkpoint path");
  }
  if (base.vocab.empty()) fail(ErrorKind::invalid_argument, "base needs a subword model id");
  if (!final_stage && intermediate) {
    fail(ErrorKind::invalid_argument, "an intermediate stage requires a final stage");
  }
  if (!final_stage && !base.pretrain && base.kind == "init") {
    fail(ErrorKind::invalid_argument, "plan has no training stage at all");
  }
  auto check_stage = [](const std::optional<StageSpec>& s, const char* name) {
    if (!s) return;
    if (s->corpus.empty()) fail(ErrorKind::invalid_argument, fmt::format("{} stage has no corpus", name));
    if (s->size == 0) fail(ErrorKind::invalid_argument, fmt::format("{} stage size must be positive", name));
    s->train.validate();
  };
  check_stage(base.pretrain, "pretrain");
  check_stage(intermediate, "intermediate");
  check_stage(final_stage, "final");
  if (tests.empty()) fail(ErrorKind::invalid_argument, "plan has no tests");
  std::set<std::string> labels;
  for (const auto& t : tests) {
    if (t.label.empty()) fail(ErrorKind::invalid_argument, "test label must not be empty");
    if (!labels.insert(t.label).second) {
      fail(ErrorKind::invalid_argument, fmt::format("duplicate test label '{}'", t.label));
    }
    const bool expect = final_stage && t.domain == final_stage->domain;
    if (t.in_domain != expect) {
      fail(ErrorKind::invalid_argument,
           fmt::format("test '{}': in_domain must be {} (test domain '{}')", t.label, expect, t.domain));
    }
  }
  if (directions.empty()) fail(ErrorKind::invalid_argument, "plan has no directions");
  if (std::set<Direction>(directions.begin(), directions.end()).size() != directions.size()) {
    fail(ErrorKind::invalid_argument, "duplicate direction");
  }
}

json ExperimentPlan::to_json() const {
  json t = json::array();
  for (const auto& x : tests) t.push_back(x.to_json());
  return {{"format", kPlanFormat},
          {"plan_id", plan_id},
          {"base", base.to_json()},
          {"intermediate", optional_stage_json(intermediate)},
          {"final", optional_stage_json(final_stage)},
          {"tests", t},
          {"directions", directions_json(directions)},
          {"seed", seed},
          {"notes", notes}};
}

std::string ExperimentPlan::content_id() const {
  json j = to_json();
  j.erase("plan_id");
  return content_hash(j.dump());
}

ExperimentPlan ExperimentPlan::from_json(const json& j) {
  if (!j.is_object()) fail(ErrorKind::format, "plan must be a JSON object");
  if (j.contains("format") && j.at("format") != kPlanFormat) {
    fail(ErrorKind::format, fmt::format("unsupported plan format {}", j.at("format").dump()));
  }
  ExperimentPlan p;
  if (j.contains("base")) p.base = BaseSpec::from_json(j.at("base"));
  p.intermediate = optional_stage(j, "intermediate");
  p.final_stage = optional_stage(j, "final");
  for (const auto& t : j.value("tests", json::array())) p.tests.push_back(TestSpec::from_json(t));
  if (j.contains("directions")) p.directions = directions_from(j.at("directions"));
  p.seed = j.value("seed", p.seed);
  p.notes = j.value("notes", p.notes);
  const std::string given = j.value("plan_id", std::string());
  p = finalize_plan(std::move(p));
  if (!given.empty() && given != p.plan_id) {
    fail(ErrorKind::format,
         fmt::format("plan_id {} does not match plan content ({})", given, p.plan_id));
  }
  return p;
}

ExperimentPlan finalize_plan(ExperimentPlan plan) {
  plan.validate();
  plan.plan_id = plan.content_id();
  return plan;
}

// ---------------------------------------------------------------------------
// Corpus stores

void MemoryCorpusStore::add(const std::string& id, ParallelCorpus corpus) {
  corpora_.insert_or_assign(id, std::move(corpus));
}

void MemoryCorpusStore::add_subword(const std::string& id, SubwordModel model) {
  subwords_.insert_or_assign(id, std::move(model));
}

ParallelCorpus MemoryCorpusStore::corpus(const std::string& id) const {
  const auto it = corpora_.find(id);
  if (it == corpora_.end()) fail(ErrorKind::invalid_argument, fmt::format("unknown corpus '{}'", id));
  return it->second;
}

std::size_t MemoryCorpusStore::corpus_size(const std::string& id) const {
  const auto it = corpora_.find(id);
  if (it == corpora_.end()) fail(ErrorKind::invalid_argument, fmt::format("unknown corpus '{}'", id));
  return it->second.size();
}

SubwordModel MemoryCorpusStore::subword(const std::string& id) const {
  const auto it = subwords_.find(id);
  if (it == subwords_.end()) fail(ErrorKind::invalid_argument, fmt::format("unknown subword model '{}'", id));
  return it->second;
}

std::vector<std::string> MemoryCorpusStore::corpus_ids() const {
  std::vector<std::string> ids;
  for (const auto& [k, v] : corpora_) ids.push_back(k);
  return ids;
}

DirectoryCorpusStore::DirectoryCorpusStore(fs::path root) : root_(std::move(root)) {
  if (!fs::is_directory(root_)) {
    fail(ErrorKind::io, fmt::format("corpus store {} is not a directory", root_.string()));
  }
}

ParallelCorpus DirectoryCorpusStore::corpus(const std::string& id) const {
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(id); it != cache_.end()) return it->second;
  }
  auto c = read_corpus(root_ / (id + ".json"));
  std::lock_guard lock(mu_);
  return cache_.insert_or_assign(id, std::move(c)).first->second;
}

SubwordModel DirectoryCorpusStore::subword(const std::string& id) const {
  return SubwordModel::load(root_ / (id + ".subword.json"));
}

void DirectoryCorpusStore::put(const fs::path& root, const std::string& id,
                               const ParallelCorpus& corpus) {
  fs::create_directories(root);
  write_corpus(corpus, root, id);
}

void DirectoryCorpusStore::put_subword(const fs::path& root, const std::string& id,
                                       const SubwordModel& model) {
  fs::create_directories(root);
  model.save(root / (id + ".subword.json"));
}

// ---------------------------------------------------------------------------
// Toy backend

ToyModel::ToyModel(toy::ModelCheckpoint ckpt, std::shared_ptr<const SubwordModel> vocab)
    : ckpt_(std::move(ckpt)), vocab_(std::move(vocab)), digest_(ckpt_.digest()) {
  if (ckpt_.config.vocab_id != vocab_->id()) {
    fail(ErrorKind::invalid_argument,
         fmt::format("checkpoint vocabulary {} does not match subword model {}",
                     ckpt_.config.vocab_id, vocab_->id()));
  }
}

namespace {

const ToyModel& as_toy(const ModelPtr& m) {
  const auto* t = dynamic_cast<const ToyModel*>(m.get());
  if (t == nullptr) fail(ErrorKind::invalid_argument, "model was not produced by the toy backend");
  return *t;
}

}  // namespace

ModelPtr ToyBackend::init(const BaseSpec& base, const SubwordModel& vocab) {
  if (base.kind == "checkpoint") {
    auto m = load(base.checkpoint);
    if (as_toy(m).vocab().id() != vocab.id()) {
      fail(ErrorKind::invalid_argument,
           fmt::format("checkpoint {} uses a different subword model", base.checkpoint));
    }
    return m;
  }
  toy::ModelConfig cfg = base.model;
  cfg.vocab_size = vocab.vocab_size();
  cfg.vocab_id = vocab.id();
  return std::make_shared<ToyModel>(toy::init_model(cfg, base.seed),
                                    std::make_shared<const SubwordModel>(vocab));
}

ModelPtr ToyBackend::fine_tune(const ModelPtr& model, const ParallelCorpus& corpus,
                               const toy::TrainConfig& cfg, const std::string& stage) {
  const auto& t = as_toy(model);
  return std::make_shared<ToyModel>(toy::fine_tune(t.checkpoint(), t.vocab(), corpus, cfg, stage),
                                    t.vocab_ptr());
}

std::vector<std::string> ToyBackend::translate(const ModelPtr& model,
                                               std::span<const std::string> sources) {
  const auto& t = as_toy(model);
  return toy::translate(t.checkpoint(), t.vocab(), sources);
}

void ToyBackend::save(const ModelPtr& model, const fs::path& path) {
  const auto& t = as_toy(model);
  toy::save_checkpoint(t.checkpoint(), path);
  t.vocab().save(fs::path(path.string() + ".subword.json"));
}

ModelPtr ToyBackend::load(const fs::path& path) {
  auto vocab = std::make_shared<const SubwordModel>(
      SubwordModel::load(fs::path(path.string() + ".subword.json")));
  return std::make_shared<ToyModel>(toy::load_checkpoint(path), std::move(vocab));
}

// ---------------------------------------------------------------------------
// Stage cache

struct StageCache::Slot {
  std::mutex mu;
  ModelPtr model;
};

StageCache::StageCache(std::optional<fs::path> dir) : dir_(std::move(dir)) {
  if (dir_) fs::create_directories(*dir_);
}

ModelPtr StageCache::get_or_train(const std::string& key, TrainerBackend& backend,
                                  const std::function<ModelPtr()>& train) {
  std::shared_ptr<Slot> slot;
  {
    std::lock_guard lock(mu_);
    auto& s = slots_[key];
    if (!s) s = std::make_shared<Slot>();
    slot = s;
  }
  std::lock_guard slot_lock(slot->mu);
  if (slot->model) {
    std::lock_guard lock(mu_);
    ++hits_;
    return slot->model;
  }
  const fs::path file = dir_ ? *dir_ / (key + ".ckpt") : fs::path();
  if (dir_ && fs::exists(file)) {
    slot->model = backend.load(file);
    std::lock_guard lock(mu_);
    ++hits_;
    return slot->model;
  }
  auto model = train();
  if (dir_) {
    // The vocabulary sidecar is written first so a visible checkpoint is
    // always loadable.
    const fs::path tmp = temp_sibling(file);
    backend.save(model, tmp);
    fs::rename(fs::path(tmp.string() + ".subword.json"), fs::path(file.string() + ".subword.json"));
    fs::rename(tmp, file);
  }
  slot->model = model;
  std::lock_guard lock(mu_);
  ++misses_;
  return model;
}

std::size_t StageCache::hits() const {
  std::lock_guard lock(mu_);
  return hits_;
}

std::size_t StageCache::misses() const {
  std::lock_guard lock(mu_);
  return misses_;
}

// ---------------------------------------------------------------------------
// Records

json ScoreEntry::to_json() const {
  return {{"test", test},
          {"corpus", corpus},
          {"in_domain", in_domain},
          {"direction", direction_name(direction)},
          {"pair", pair},
          {"bleu", bleu.to_json()}};
}

ScoreEntry ScoreEntry::from_json(const json& j) {
  ScoreEntry s;
  s.test = required<std::string>(j, "test", "score");
  s.corpus = required<std::string>(j, "corpus", "score");
  s.in_domain = required<bool>(j, "in_domain", "score");
  s.direction = parse_direction(required<std::string>(j, "direction", "score"));
  s.pair = required<std::string>(j, "pair", "score");
  s.bleu = BleuScore::from_json(j.at("bleu"));
  return s;
}

const ScoreEntry& RunRecord::score(const std::string& test, Direction d) const {
  for (const auto& s : scores) {
    if (s.test == test && s.direction == d) return s;
  }
  fail(ErrorKind::invalid_argument,
       fmt::format("record {} has no score for test '{}' ({})", plan.plan_id, test, direction_name(d)));
}

json RunRecord::to_json() const {
  json s = json::array();
  for (const auto& x : scores) s.push_back(x.to_json());
  json j = {{"format", kRecordFormat},
            {"plan", plan.to_json()},
            {"status", status},
            {"backend", backend},
            {"scores", s},
            {"stage_digests", stage_digests},
            {"toolkit_version", toolkit_version},
            {"timing", {{"started", started}, {"finished", finished}}}};
  if (!ok()) j["error"] = error;
  return j;
}

RunRecord RunRecord::from_json(const json& j) {
  if (!j.is_object() || j.value("format", std::string()) != kRecordFormat) {
    fail(ErrorKind::format, "not a run record");
  }
  RunRecord r;
  r.plan = ExperimentPlan::from_json(j.at("plan"));
  r.status = required<std::string>(j, "status", "record");
  if (r.status != "ok" && r.status != "failed") {
    fail(ErrorKind::format, fmt::format("unknown record status '{}'", r.status));
  }
  r.error = j.value("error", std::string());
  r.backend = j.value("backend", std::string());
  for (const auto& s : j.value("scores", json::array())) r.scores.push_back(ScoreEntry::from_json(s));
  r.stage_digests = j.value("stage_digests", std::map<std::string, std::string>{});
  r.toolkit_version = j.value("toolkit_version", std::string());
  if (j.contains("timing")) {
    r.started = j.at("timing").value("started", std::string());
    r.finished = j.at("timing").value("finished", std::string());
  }
  return r;
}

std::string RunRecord::content() const {
  json j = to_json();
  j.erase("timing");
  return j.dump();
}

RecordStore::RecordStore(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

fs::path RecordStore::path_of(const std::string& plan_id) const { return dir_ / (plan_id + ".json"); }

bool RecordStore::contains(const std::string& plan_id) const { return fs::exists(path_of(plan_id)); }

std::optional<RunRecord> RecordStore::read(const std::string& plan_id) const {
  const auto path = path_of(plan_id);
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return RunRecord::from_json(json::parse(ss.str()));
  } catch (const json::exception& e) {
    fail(ErrorKind::format, fmt::format("{}: {}", path.string(), e.what()));
  }
}

void RecordStore::write(const RunRecord& record) const {
  const auto target = path_of(record.plan.plan_id);
  const auto tmp = temp_sibling(target);
  write_file_durably(tmp, record.to_json().dump(2) + "\n");
  fs::rename(tmp, target);
  fsync_dir(dir_);
}

std::vector<RunRecord> RecordStore::list() const {
  std::vector<std::string> ids;
  for (const auto& e : fs::directory_iterator(dir_)) {
    const auto name = e.path().filename().string();
    if (!e.is_regular_file() || is_temp_name(name) || e.path().extension() != ".json") continue;
    ids.push_back(e.path().stem().string());
  }
  std::sort(ids.begin(), ids.end());
  std::vector<RunRecord> out;
  for (const auto& id : ids) {
    if (auto r = read(id)) out.push_back(std::move(*r));
  }
  return out;
}

std::size_t RecordStore::remove_stale_temps() const {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir_)) {
    if (is_temp_name(e.path().filename().string())) {
      fs::remove(e.path());
      ++n;
    }
  }
  return n;
}

fs::path default_store_root() {
  if (const char* env = std::getenv("ITFT_LAB_HOME"); env != nullptr && *env != '\0') return env;
  return "itft-lab-home";
}

// ---------------------------------------------------------------------------
// Execution

RunRecord run_plan(const ExperimentPlan& plan, const RunContext& ctx) {
  RunRecord rec;
  rec.plan = plan;
  rec.toolkit_version = kToolkitVersion;
  rec.started = utc_timestamp();
  std::string where = "setup";
  try {
    if (ctx.backend == nullptr || ctx.corpora == nullptr) {
      fail(ErrorKind::invalid_argument, "run context needs a backend and a corpus store");
    }
    rec.backend = ctx.backend->name();
    plan.validate();
    auto& backend = *ctx.backend;
    const SubwordModel vocab = ctx.corpora->subword(plan.base.vocab);

    where = "base";
    const ModelPtr base = backend.init(plan.base, vocab);
    const std::string base_key = content_hash(backend.name() + "|" + base->digest());
    rec.stage_digests["base"] = base->digest();

    auto cached = [&](const std::string& key, const std::function<ModelPtr()>& train) {
      return ctx.cache ? ctx.cache->get_or_train(key, backend, train) : train();
    };

    for (const Direction dir : plan.directions) {
      const std::string dname = direction_name(dir);
      ModelPtr model = base;
      std::string key = base_key;
      const std::pair<const char*, const std::optional<StageSpec>*> stages[] = {
          {"pretrain", &plan.base.pretrain},
          {"intermediate", &plan.intermediate},
          {"final", &plan.final_stage}};
      for (const auto& [label, stage] : stages) {
        if (!stage->has_value()) continue;
        const StageSpec& s = **stage;
        where = fmt::format("{} stage ({})", label, dname);
        key = content_hash(fmt::format("{}|{}|{}|{}|{}", key, dname, label, plan.seed, s.to_json().dump()));
        const ModelPtr parent = model;
        model = cached(key, [&] {
          ParallelCorpus corpus = sample_subset(ctx.corpora->corpus(s.corpus), {s.size, plan.seed});
          if (dir == Direction::reverse) corpus = corpus.flipped();
          return backend.fine_tune(parent, corpus, s.train, label);
        });
        rec.stage_digests[fmt::format("{}/{}", dname, label)] = model->digest();
      }
      for (const auto& t : plan.tests) {
        where = fmt::format("test '{}' ({})", t.label, dname);
        ParallelCorpus corpus = ctx.corpora->corpus(t.corpus);
        if (dir == Direction::reverse) corpus = corpus.flipped();
        const auto sources = corpus.sources();
        const auto refs = corpus.targets();
        const auto hyps = backend.translate(model, sources);
        rec.scores.push_back({t.label, t.corpus, t.in_domain, dir, language_pair(corpus),
                              sp_bleu(vocab, hyps, refs)});
      }
    }
  } catch (const std::exception& e) {
    rec.status = "failed";
    rec.error = fmt::format("{}: {}", where, e.what());
    rec.scores.clear();
  }
  rec.finished = utc_timestamp();
  return rec;
}

GridSummary run_grid(std::span<const ExperimentPlan> plans, const RunContext& ctx,
                     const RecordStore& store, const GridOptions& options) {
  GridSummary summary;
  summary.records.resize(plans.size());
  std::vector<CellOutcome> outcomes(plans.size(), CellOutcome::ran);
  std::atomic<std::size_t> next{0};
  std::mutex event_mu;

  auto worker = [&] {
    for (std::size_t i = next++; i < plans.size(); i = next++) {
      const auto& plan = plans[i];
      GridEvent ev{i, plan.plan_id, CellOutcome::ran, {}};
      std::optional<RunRecord> existing;
      try {
        existing = store.read(plan.plan_id);
      } catch (const Error& e) {
        ev.message = fmt::format("unreadable record replaced: {}", e.what());
      }
      if (existing && existing->ok() && !options.force) {
        summary.records[i] = std::move(*existing);
        ev.outcome = CellOutcome::skipped;
        ev.message = "already recorded";
      } else {
        RunRecord rec = run_plan(plan, ctx);
        if (!rec.ok()) {
          ev.outcome = CellOutcome::failed;
          ev.message = rec.error;
        }
        store.write(rec);
        summary.records[i] = std::move(rec);
      }
      outcomes[i] = ev.outcome;
      if (options.on_event) {
        std::lock_guard lock(event_mu);
        options.on_event(ev);
      }
    }
  };

  const std::size_t n_threads = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::max(1, options.jobs)), 1, std::max<std::size_t>(1, plans.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  for (auto o : outcomes) {
    if (o == CellOutcome::ran) ++summary.ran;
    if (o == CellOutcome::skipped) ++summary.skipped;
    if (o == CellOutcome::failed) ++summary.failed;
  }
  return summary;
}

// ---------------------------------------------------------------------------
// Grids

json GridSpec::to_json() const {
  json t = json::array();
  for (const auto& x : tests) t.push_back(x.to_json());
  return {{"format", kGridFormat},
          {"base", base.to_json()},
          {"intermediate_corpus", intermediate_corpus},
          {"intermediate_domain", intermediate_domain},
          {"intermediate_sizes", intermediate_sizes},
          {"final_corpus", final_corpus},
          {"final_domain", final_domain},
          {"final_sizes", final_sizes},
          {"tests", t},
          {"seeds", seeds},
          {"train", train.to_json()},
          {"directions", directions_json(directions)},
          {"notes", notes}};
}

GridSpec GridSpec::from_json(const json& j) {
  if (!j.is_object()) fail(ErrorKind::format, "grid must be a JSON object");
  GridSpec g;
  if (j.contains("base")) g.base = BaseSpec::from_json(j.at("base"));
  g.intermediate_corpus = j.value("intermediate_corpus", g.intermediate_corpus);
  g.intermediate_domain = j.value("intermediate_domain", g.intermediate_corpus);
  g.intermediate_sizes = j.value("intermediate_sizes", g.intermediate_sizes);
  g.final_corpus = required<std::string>(j, "final_corpus", "grid");
  g.final_domain = j.value("final_domain", g.final_corpus);
  g.final_sizes = j.value("final_sizes", g.final_sizes);
  for (const auto& t : j.value("tests", json::array())) g.tests.push_back(TestSpec::from_json(t));
  g.seeds = j.value("seeds", g.seeds);
  if (j.contains("train")) g.train = toy::TrainConfig::from_json(j.at("train"));
  if (j.contains("directions")) g.directions = directions_from(j.at("directions"));
  g.notes = j.value("notes", g.notes);
  return g;
}

std::vector<ExperimentPlan> plan_grid(const GridSpec& spec, const CorpusStore* corpora) {
  if (spec.seeds.empty() || spec.final_sizes.empty() || spec.intermediate_sizes.empty()) {
    fail(ErrorKind::invalid_argument, "grid needs at least one seed and one size per stage");
  }
  auto check_size = [&](const std::string& corpus, std::size_t size, const char* stage) {
    if (corpora == nullptr || size == 0) return;
    const auto n = corpora->corpus_size(corpus);
    if (size > n) {
      fail(ErrorKind::invalid_argument,
           fmt::format("{} size {} exceeds corpus '{}' ({} pairs)", stage, size, corpus, n));
    }
  };
  for (auto s : spec.intermediate_sizes) {
    if (s > 0 && spec.intermediate_corpus.empty()) {
      fail(ErrorKind::invalid_argument, "intermediate sizes given without an intermediate corpus");
    }
    check_size(spec.intermediate_corpus, s, "intermediate");
  }
  for (auto s : spec.final_sizes) {
    if (s == 0) fail(ErrorKind::invalid_argument, "final size must be positive");
    check_size(spec.final_corpus, s, "final");
  }
  if (spec.base.pretrain) check_size(spec.base.pretrain->corpus, spec.base.pretrain->size, "pretrain");

  std::vector<ExperimentPlan> plans;
  for (const auto seed : spec.seeds) {
    toy::TrainConfig train = spec.train;
    train.seed = seed;
    for (const auto isz : spec.intermediate_sizes) {
      for (const auto fsz : spec.final_sizes) {
        ExperimentPlan p;
        p.base = spec.base;
        p.base.seed = seed;
        if (p.base.pretrain) p.base.pretrain->train.seed = seed;
        if (isz > 0) p.intermediate = StageSpec{spec.intermediate_corpus, spec.intermediate_domain, isz, train};
        p.final_stage = StageSpec{spec.final_corpus, spec.final_domain, fsz, train};
        p.tests = spec.tests;
        for (auto& t : p.tests) t.in_domain = t.domain == spec.final_domain;
        p.directions = spec.directions;
        p.seed = seed;
        p.notes = spec.notes;
        plans.push_back(finalize_plan(std::move(p)));
      }
    }
  }
  return plans;
}

// ---------------------------------------------------------------------------
// Aggregation

namespace {

const std::vector<std::string> kGroupFields{"intermediate_size", "final_size", "language",
                                            "direction", "test"};

std::string field_of(const ResultRow& r, const std::string& f) {
  if (f == "intermediate_size") return std::to_string(r.intermediate_size);
  if (f == "final_size") return std::to_string(r.final_size);
  if (f == "language") return r.language;
  if (f == "direction") return r.direction;
  return r.test;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

ResultTable aggregate(std::span<const RunRecord> records, const std::vector<std::string>& group_by) {
  for (const auto& f : group_by) {
    if (std::find(kGroupFields.begin(), kGroupFields.end(), f) == kGroupFields.end()) {
      fail(ErrorKind::invalid_argument, fmt::format("cannot group by '{}'", f));
    }
  }
  ResultTable table;
  table.group_by = group_by;
  for (const auto& rec : records) {
    if (!rec.ok()) continue;
    const auto& p = rec.plan;
    for (const auto& s : rec.scores) {
      table.rows.push_back({p.intermediate ? p.intermediate->size : 0,
                            p.final_stage ? p.final_stage->size : 0, p.seed, s.test,
                            direction_name(s.direction), s.pair, s.bleu.score});
    }
  }
  if (table.rows.empty()) fail(ErrorKind::invalid_argument, "no completed records to aggregate");
  std::stable_sort(table.rows.begin(), table.rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.intermediate_size, a.final_size, a.test, a.direction, a.language, a.seed) <
           std::tie(b.intermediate_size, b.final_size, b.test, b.direction, b.language, b.seed);
  });
  std::map<std::vector<std::string>, std::size_t> index;
  for (const auto& r : table.rows) {
    std::vector<std::string> key;
    for (const auto& f : group_by) key.push_back(field_of(r, f));
    auto [it, fresh] = index.try_emplace(key, table.groups.size());
    if (fresh) {
      ResultGroup g;
      for (std::size_t i = 0; i < group_by.size(); ++i) g.key[group_by[i]] = key[i];
      table.groups.push_back(std::move(g));
    }
    table.groups[it->second].per_seed.emplace_back(r.seed, r.spbleu);
  }
  for (auto& g : table.groups) {
    double sum = 0.0;
    for (const auto& [seed, v] : g.per_seed) sum += v;
    g.mean = sum / static_cast<double>(g.per_seed.size());
  }
  return table;
}

std::string ResultTable::long_csv() const {
  std::string out = "intermediate_size,final_size,seed,test,direction,spbleu\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{:.4f}\n", r.intermediate_size, r.final_size, r.seed,
                       csv_field(r.test), r.direction, r.spbleu);
  }
  return out;
}

std::string ResultTable::groups_csv() const {
  std::string out;
  for (const auto& f : group_by) out += f + ",";
  out += "mean_spbleu,n,per_seed\n";
  for (const auto& g : groups) {
    for (const auto& f : group_by) out += csv_field(g.key.at(f)) + ",";
    std::string seeds;
    for (const auto& [seed, v] : g.per_seed) {
      if (!seeds.empty()) seeds += ';';
      seeds += fmt::format("{}:{:.4f}", seed, v);
    }
    out += fmt::format("{:.4f},{},{}\n", g.mean, g.per_seed.size(), seeds);
  }
  return out;
}

std::string ResultTable::pivot_markdown() const {
  std::set<std::pair<std::string, std::string>> panels;
  std::set<std::size_t> isizes, fsizes;
  for (const auto& r : rows) {
    panels.insert({r.test, r.direction});
    isizes.insert(r.intermediate_size);
    fsizes.insert(r.final_size);
  }
  std::string out;
  for (const auto& [test, dir] : panels) {
    out += fmt::format("### {} ({})\n\n| final \\ intermediate |", test, dir);
    for (auto i : isizes) out += i == 0 ? " 0 (baseline) |" : fmt::format(" {} |", i);
    out += "\n|---|";
    for (std::size_t k = 0; k < isizes.size(); ++k) out += "---:|";
    out += "\n";
    for (auto f : fsizes) {
      out += fmt::format("| {} |", f);
      for (auto i : isizes) {
        double sum = 0.0;
        int n = 0;
        for (const auto& r : rows) {
          if (r.test == test && r.direction == dir && r.intermediate_size == i && r.final_size == f) {
            sum += r.spbleu;
            ++n;
          }
        }
        out += n == 0 ? " - |" : fmt::format(" {:.2f} |", sum / n);
      }
      out += "\n";
    }
    out += "\n";
  }
  return out;
}

json ResultTable::to_json() const {
  json r = json::array();
  for (const auto& x : rows) {
    r.push_back({{"intermediate_size", x.intermediate_size}, {"final_size", x.final_size},
                 {"seed", x.seed}, {"test", x.test}, {"direction", x.direction},
                 {"language", x.language}, {"spbleu", x.spbleu}});
  }
  json g = json::array();
  for (const auto& x : groups) {
    json per = json::array();
    for (const auto& [seed, v] : x.per_seed) per.push_back({{"seed", seed}, {"spbleu", v}});
    g.push_back({{"key", x.key}, {"mean", x.mean}, {"per_seed", per}});
  }
  return {{"group_by", group_by}, {"rows", r}, {"groups", g}};
}

}  // namespace itft
