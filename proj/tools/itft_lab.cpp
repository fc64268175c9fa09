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

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "itft/corpus.hpp"
#include "itft/correlation.hpp"
#include "itft/desk.hpp"
#include "itft/divergence.hpp"
#include "itft/error.hpp"
#include "itft/metrics.hpp"
#include "itft/orchestrator.hpp"
#include "itft/subword.hpp"
#include "itft/textprep.hpp"
#include "itft/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace itft;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitExperiment = 1;
constexpr int kExitUsage = 2;

// Thrown by subcommands that finished but had failing grid cells.
struct ExperimentFailure {
  std::string message;
};

struct Globals {
  bool json_errors = false;
  std::uint64_t seed = kDefaultSeed;
  std::string format = "md";
};

int report_error(const Globals& g, int code, const std::string_view kind, const std::string& message) {
  if (g.json_errors) {
    std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}, {"exit_code", code}}.dump() << "\n";
  } else {
    std::cerr << "itft-lab: " << message << "\n";
  }
  return code;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorKind::io, fmt::format("cannot open {}", p.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const fs::path& p) {
  try {
    return json::parse(read_text(p));
  } catch (const json::parse_error& e) {
    fail(ErrorKind::format, fmt::format("{}: {}", p.string(), e.what()));
  }
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::vector<std::string> lines;
  std::istringstream in(read_text(p));
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) fail(ErrorKind::io, fmt::format("cannot write {}", p.string()));
  out << text;
}

void require_writable_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    fail(ErrorKind::io, fmt::format("output directory {} is not writable", dir.string()));
  }
}

// "--config FILE": top-level keys and the section named after the invoked
// subcommand become flags inserted before the explicit ones, so explicit
// flags win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  auto it = std::find(args.begin(), args.end(), "--config");
  if (it == args.end()) return args;
  if (std::next(it) == args.end()) fail(ErrorKind::invalid_argument, "--config needs a file");
  const fs::path file = *std::next(it);
  args.erase(it, it + 2);
  const json cfg = read_json_file(file);
  if (!cfg.is_object()) fail(ErrorKind::format, "config file must hold a JSON object");

  auto sub = std::find_if(args.begin(), args.end(), [](const std::string& a) { return a.rfind("-", 0) != 0; });
  const std::string subcommand = sub == args.end() ? "" : *sub;
  std::vector<std::string> injected;
  auto add = [&](const std::string& key, const json& v) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    auto one = [&](const json& x) {
      if (x.is_boolean()) {
        if (x.get<bool>()) injected.push_back(flag);
      } else {
        injected.push_back(flag);
        injected.push_back(x.is_string() ? x.get<std::string>() : x.dump());
      }
    };
    if (v.is_array()) {
      for (const auto& x : v) one(x);
    } else {
      one(v);
    }
  };
  for (const auto& [k, v] : cfg.items()) {
    if (v.is_object()) continue;
    add(k, v);
  }
  if (!subcommand.empty() && cfg.contains(subcommand) && cfg.at(subcommand).is_object()) {
    for (const auto& [k, v] : cfg.at(subcommand).items()) add(k, v);
  }
  const auto pos = sub == args.end() ? args.end() : std::next(sub);
  args.insert(pos, injected.begin(), injected.end());
  return args;
}

std::string fmt_score(const BleuScore& b) {
  return fmt::format("BLEU = {:.2f} {:.1f}/{:.1f}/{:.1f}/{:.1f} (BP = {:.3f} hyp_len = {} ref_len = {})",
                     b.score, b.precisions[0], b.precisions[1], b.precisions[2], b.precisions[3],
                     b.brevity_penalty, b.hyp_len, b.ref_len);
}

// LABEL=path[,path...]
LabeledCorpora parse_labeled(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
    fail(ErrorKind::invalid_argument, fmt::format("expected LABEL=sidecar[,sidecar...], got '{}'", spec));
  }
  LabeledCorpora set{spec.substr(0, eq), {}};
  std::stringstream rest(spec.substr(eq + 1));
  for (std::string p; std::getline(rest, p, ',');) {
    if (!p.empty()) set.corpora.push_back(read_corpus(p));
  }
  return set;
}

std::vector<ExperimentPlan> plans_from_json(const json& j, const CorpusStore* store) {
  if (j.is_array()) {
    std::vector<ExperimentPlan> out;
    for (const auto& p : j) out.push_back(ExperimentPlan::from_json(p));
    return out;
  }
  if (j.is_object() && j.value("format", std::string()) == "itft-lab.grid/1") {
    return plan_grid(GridSpec::from_json(j), store);
  }
  return {ExperimentPlan::from_json(j)};
}

void print_event(const GridEvent& ev, std::size_t total) {
  static const char* names[] = {"ran", "skipped", "failed"};
  std::cout << fmt::format("[{}/{}] {} {}{}\n", ev.index + 1, total, ev.plan_id,
                           names[static_cast<int>(ev.outcome)],
                           ev.message.empty() ? "" : ": " + ev.message)
            << std::flush;
}

void write_reports(const std::vector<RunRecord>& records, const fs::path& dir,
                   const std::vector<std::string>& group_by) {
  const auto table = aggregate(records, group_by);
  write_text(dir / "long.csv", table.long_csv());
  write_text(dir / "groups.csv", table.groups_csv());
  write_text(dir / "pivot.md", table.pivot_markdown());
  write_text(dir / "results.json", table.to_json().dump(2) + "\n");
}

std::vector<std::string> split_csv_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    for (std::string s; std::getline(ss, s, ',');) {
      if (!s.empty()) out.push_back(s);
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  Globals g;
  std::vector<std::string> args(argv + 1, argv + argc);
  g.json_errors = std::find(args.begin(), args.end(), "--json") != args.end();
  try {
    args = expand_config(std::move(args));
  } catch (const Error& e) {
    return report_error(g, kExitUsage, error_kind_name(e.kind()), e.what());
  }

  CLI::App app{"Intermediate-task fine-tuning experiments: corpora, divergence, BLEU and toy-model grids"};
  app.set_version_flag("--version", std::string(kToolkitVersion));
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.fallthrough();
  app.add_flag("--json", g.json_errors, "Report errors on stderr as JSON");
  app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--config", "JSON file mirroring the flags (top level and per-subcommand sections)");
  auto add_format = [&](CLI::App* sub, const std::string& def) {
    sub->add_option("--format", g.format, "Output format")
        ->check(CLI::IsMember({"csv", "json", "md"}))
        ->default_val(def);
  };

  std::function<void()> action;

  // ingest -----------------------------------------------------------------
  auto* ingest = app.add_subcommand("ingest", "Read a line-aligned corpus and write it to the store layout");
  struct {
    std::string source, target, id, domain, provenance, out, stem;
    CorpusMeta meta;
  } ing;
  ingest->add_option("--source", ing.source, "Source-language text file")->required();
  ingest->add_option("--target", ing.target, "Target-language text file")->required();
  ingest->add_option("--source-lang", ing.meta.source_lang, "ISO 639 code")->required();
  ingest->add_option("--target-lang", ing.meta.target_lang, "ISO 639 code")->required();
  ingest->add_option("--id", ing.id, "Corpus id")->required();
  ingest->add_option("--domain", ing.domain, "Domain label (default: id)");
  ingest->add_option("--provenance", ing.provenance, "Free-text origin note");
  ingest->add_option("--out", ing.out, "Output directory")->required();
  ingest->add_option("--stem", ing.stem, "File stem (default: id)");
  add_format(ingest, "md");
  ingest->callback([&] {
    action = [&] {
      require_writable_dir(ing.out);
      ing.meta.id = ing.id;
      ing.meta.domain = ing.domain.empty() ? ing.id : ing.domain;
      ing.meta.provenance = ing.provenance;
      const auto r = ingest_line_aligned(ing.source, ing.target, ing.meta);
      const auto files = write_corpus(r.corpus, ing.out, ing.stem.empty() ? ing.id : ing.stem, r.dropped);
      if (g.format == "json") {
        std::cout << corpus_sidecar(r.corpus, r.dropped).dump(2) << "\n";
      } else {
        std::cout << fmt::format("ingested {} pairs ({} dropped) -> {}\n", r.corpus.size(), r.dropped,
                                 files.sidecar.string());
      }
    };
  });

  // align ------------------------------------------------------------------
  auto* align = app.add_subcommand("align", "Align two verse-keyed TSV files into a parallel corpus");
  struct {
    std::string a, b, lang_a, lang_b, books, domain = "bible", out = ".", stem;
  } al;
  align->add_option("--a", al.a, "TSV of book:chapter:verse<TAB>text")->required();
  align->add_option("--b", al.b, "TSV of book:chapter:verse<TAB>text")->required();
  align->add_option("--lang-a", al.lang_a, "Language of --a (default: file stem)");
  align->add_option("--lang-b", al.lang_b, "Language of --b (default: file stem)");
  align->add_option("--books", al.books, "Book-name map file (name<TAB>USFM code)");
  align->add_option("--domain", al.domain, "Domain label")->capture_default_str();
  align->add_option("--out", al.out, "Output directory")->capture_default_str();
  align->add_option("--stem", al.stem, "File stem (default: corpus id)");
  add_format(align, "md");
  align->callback([&] {
    action = [&] {
      require_writable_dir(al.out);
      const BookNameMap books = al.books.empty() ? BookNameMap{} : read_book_name_map(al.books);
      const auto la = al.lang_a.empty() ? fs::path(al.a).stem().string() : al.lang_a;
      const auto lb = al.lang_b.empty() ? fs::path(al.b).stem().string() : al.lang_b;
      const auto r = align_verses(read_verse_tsv(al.a, la, books), read_verse_tsv(al.b, lb, books), al.domain);
      const auto files = write_corpus(r.corpus, al.out, al.stem.empty() ? r.corpus.id() : al.stem);
      const json summary = {{"corpus", r.corpus.id()},
                            {"pairs", r.corpus.size()},
                            {"unmatched_a", r.unmatched_a},
                            {"unmatched_b", r.unmatched_b},
                            {"sidecar", files.sidecar.string()}};
      if (g.format == "json") {
        std::cout << summary.dump(2) << "\n";
      } else {
        std::cout << fmt::format("aligned {} verses ({} only in {}, {} only in {}) -> {}\n", r.corpus.size(),
                                 r.unmatched_a, la, r.unmatched_b, lb, files.sidecar.string());
      }
    };
  });

  // sample -----------------------------------------------------------------
  auto* sample = app.add_subcommand("sample", "Draw a deterministic nested subset of a corpus");
  struct {
    std::string corpus, out = ".", stem;
    std::size_t n = 0;
  } sm;
  sample->add_option("--corpus", sm.corpus, "Corpus sidecar (.json)")->required();
  sample->add_option("--n", sm.n, "Number of pairs")->required();
  sample->add_option("--out", sm.out, "Output directory")->capture_default_str();
  sample->add_option("--stem", sm.stem, "File stem (default: subset id)");
  add_format(sample, "md");
  sample->callback([&] {
    action = [&] {
      require_writable_dir(sm.out);
      const auto sub = sample_subset(read_corpus(sm.corpus), {sm.n, g.seed});
      const auto files = write_corpus(sub, sm.out, sm.stem.empty() ? sub.id() : sm.stem);
      if (g.format == "json") {
        std::cout << corpus_sidecar(sub).dump(2) << "\n";
      } else {
        std::cout << fmt::format("sampled {} pairs (seed {}) -> {}\n", sub.size(), g.seed, files.sidecar.string());
      }
    };
  });

  // subword ----------------------------------------------------------------
  auto* subword = app.add_subcommand("subword", "Train a merge-based subword model");
  struct {
    std::vector<std::string> corpora, texts;
    int vocab_size = 8000;
    std::string out;
  } sw;
  subword->add_option("--corpus", sw.corpora, "Corpus sidecar; both sides are used (repeatable)");
  subword->add_option("--text", sw.texts, "Plain text file, one sentence per line (repeatable)");
  subword->add_option("--vocab-size", sw.vocab_size, "Target vocabulary size")->capture_default_str();
  subword->add_option("--out", sw.out, "Model file (.json)")->required();
  add_format(subword, "md");
  subword->callback([&] {
    action = [&] {
      std::vector<std::string> pool;
      for (const auto& c : sw.corpora) {
        for (const auto& p : read_corpus(c).pairs()) {
          pool.push_back(p.source);
          pool.push_back(p.target);
        }
      }
      for (const auto& t : sw.texts) {
        for (auto& l : read_lines(t)) pool.push_back(std::move(l));
      }
      if (pool.empty()) fail(ErrorKind::invalid_argument, "give at least one --corpus or --text");
      const auto model = train_subword(pool, sw.vocab_size);
      model.save(sw.out);
      const json summary = {{"id", model.id()},
                            {"vocab_size", model.vocab_size()},
                            {"merges", model.merges().size()},
                            {"path", sw.out}};
      std::cout << (g.format == "json" ? summary.dump(2)
                                       : fmt::format("subword model {} ({} symbols, {} merges) -> {}",
                                                     model.id(), model.vocab_size(), model.merges().size(), sw.out))
                << "\n";
    };
  });

  // divergence -------------------------------------------------------------
  auto* divergence = app.add_subcommand("divergence", "JS divergence matrix between train and test sets");
  struct {
    std::vector<std::string> train, test;
    std::string stopwords, pivot = "en", sides = "non_pivot_plus_pivot", out;
    bool english_stopwords = false, keep_case = false, drop_punct = false;
    std::size_t train_size = 25000, test_size = 1000;
  } dv;
  divergence->add_option("--train", dv.train, "LABEL=sidecar[,sidecar...] (repeatable)")->required();
  divergence->add_option("--test", dv.test, "LABEL=sidecar[,sidecar...] (repeatable)")->required();
  auto* sw_file = divergence->add_option("--stopwords", dv.stopwords, "Stopword file, one token per line");
  divergence->add_flag("--english-stopwords", dv.english_stopwords, "Use the bundled English list")->excludes(sw_file);
  divergence->add_flag("--keep-case", dv.keep_case, "Do not lowercase");
  divergence->add_flag("--drop-punct", dv.drop_punct, "Drop punctuation tokens");
  divergence->add_option("--pivot", dv.pivot, "Pivot language")->capture_default_str();
  divergence->add_option("--sides", dv.sides, "Text sides per corpus")
      ->check(CLI::IsMember({"non_pivot_plus_pivot", "non_pivot_only"}))
      ->capture_default_str();
  divergence->add_option("--train-size", dv.train_size, "Pairs per train corpus")->capture_default_str();
  divergence->add_option("--test-size", dv.test_size, "Pairs per test corpus")->capture_default_str();
  divergence->add_option("--out", dv.out, "Directory for matrix.csv and matrix.json");
  add_format(divergence, "md");
  divergence->callback([&] {
    action = [&] {
      DivergenceConfig cfg;
      if (!dv.stopwords.empty()) cfg.prep.stopwords = read_stopwords(dv.stopwords);
      if (dv.english_stopwords) cfg.prep.stopwords = english_stopwords();
      cfg.prep.lowercase = !dv.keep_case;
      cfg.prep.keep_punctuation = !dv.drop_punct;
      cfg.pivot_lang = dv.pivot;
      cfg.sides = parse_side_selection(dv.sides);
      cfg.train_size = dv.train_size;
      cfg.test_size = dv.test_size;
      cfg.seed = g.seed;
      std::vector<LabeledCorpora> train, test;
      for (const auto& s : dv.train) train.push_back(parse_labeled(s));
      for (const auto& s : dv.test) test.push_back(parse_labeled(s));
      const auto m = divergence_matrix(train, test, cfg);
      if (!dv.out.empty()) {
        require_writable_dir(dv.out);
        write_text(fs::path(dv.out) / "matrix.csv", m.to_csv());
        write_text(fs::path(dv.out) / "matrix.json", m.to_json().dump(2) + "\n");
      }
      if (g.format == "json") {
        std::cout << m.to_json().dump(2) << "\n";
      } else if (g.format == "csv") {
        std::cout << m.to_csv();
      } else {
        std::cout << m.to_table();
      }
    };
  });

  // bleu / spbleu ----------------------------------------------------------
  struct {
    std::string hyp, ref, spm;
  } bl;
  auto score_action = [&](bool sub) {
    return [&, sub] {
      const auto hyps = read_lines(bl.hyp);
      const auto refs = read_lines(bl.ref);
      if (hyps.size() != refs.size()) {
        fail(ErrorKind::alignment, fmt::format("line count mismatch: hypotheses have {} lines, references {}",
                                               hyps.size(), refs.size()));
      }
      const BleuScore s = sub ? sp_bleu(SubwordModel::load(bl.spm), hyps, refs) : bleu_sentences(hyps, refs);
      if (g.format == "json") {
        std::cout << s.to_json().dump(2) << "\n";
      } else {
        std::cout << fmt_score(s) << "\n" << s.signature << "\n";
      }
    };
  };
  for (const bool sub : {false, true}) {
    auto* cmd = app.add_subcommand(sub ? "spbleu" : "bleu",
                                   sub ? "Corpus BLEU over subword pieces" : "Corpus BLEU over whitespace tokens");
    cmd->add_option("--hyp", bl.hyp, "Hypothesis file, one sentence per line")->required();
    cmd->add_option("--ref", bl.ref, "Reference file, line-aligned")->required();
    if (sub) cmd->add_option("--spm", bl.spm, "Subword model file")->required();
    add_format(cmd, "md");
    cmd->callback([&, sub] { action = score_action(sub); });
  }

  // synth ------------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "Write synthetic desk-scale domains, a subword model and a grid");
  DeskOptions so;
  std::string synth_out;
  synth->add_option("--overlap", so.overlap, "Shared lexicon fraction")->capture_default_str();
  synth->add_option("--grammar", so.grammar_size, "Number of templates")->capture_default_str();
  synth->add_option("--lexicon", so.lexicon_size, "Content words per domain")->capture_default_str();
  synth->add_option("--pairs", so.train_pairs, "Training pairs per domain")->capture_default_str();
  synth->add_option("--test-pairs", so.test_pairs, "Test pairs per domain")->capture_default_str();
  synth->add_option("--pretrain-pairs", so.pretrain_pairs, "Pairs of a third, zero-shot domain")->capture_default_str();
  synth->add_option("--vocab-size", so.vocab_size, "Subword vocabulary size")->capture_default_str();
  synth->add_option("--out", synth_out, "Corpus store directory")->required();
  synth->callback([&] {
    action = [&] {
      require_writable_dir(synth_out);
      so.seed = g.seed;
      const auto desk = make_desk_setup(so);
      for (const auto& id : desk.store.corpus_ids()) DirectoryCorpusStore::put(synth_out, id, desk.store.corpus(id));
      DirectoryCorpusStore::put_subword(synth_out, desk.grid.base.vocab, desk.store.subword(desk.grid.base.vocab));
      write_text(fs::path(synth_out) / "grid.json", desk.grid.to_json().dump(2) + "\n");
      std::cout << fmt::format("wrote {} corpora, subword model '{}' and grid.json to {}\n",
                               desk.store.corpus_ids().size(), desk.grid.base.vocab, synth_out);
    };
  });

  // plan -------------------------------------------------------------------
  auto* plan = app.add_subcommand("plan", "Expand a grid file into experiment plans");
  std::string plan_grid_file, plan_corpora, plan_out;
  plan->add_option("--grid", plan_grid_file, "Grid JSON")->required();
  plan->add_option("--corpora", plan_corpora, "Corpus store directory (checks sizes)");
  plan->add_option("--out", plan_out, "Write the plan list to this file");
  plan->callback([&] {
    action = [&] {
      std::unique_ptr<DirectoryCorpusStore> store;
      if (!plan_corpora.empty()) store = std::make_unique<DirectoryCorpusStore>(plan_corpora);
      const auto plans = plan_grid(GridSpec::from_json(read_json_file(plan_grid_file)), store.get());
      json arr = json::array();
      for (const auto& p : plans) arr.push_back(p.to_json());
      if (!plan_out.empty()) write_text(plan_out, arr.dump(2) + "\n");
      for (const auto& p : plans) {
        std::cout << fmt::format("{} intermediate={} final={} seed={}\n", p.plan_id,
                                 p.intermediate ? p.intermediate->size : 0, p.final_stage ? p.final_stage->size : 0,
                                 p.seed);
      }
    };
  });

  // run --------------------------------------------------------------------
  auto* run = app.add_subcommand("run", "Execute plans and record results");
  struct {
    bool demo = false, force = false, no_cache = false;
    std::string plan, corpora, store;
    int jobs = 1;
  } rn;
  auto* demo_flag = run->add_flag("--demo", rn.demo, "Run the bundled synthetic demo grid");
  run->add_option("--plan", rn.plan, "Plan, plan list or grid JSON")->excludes(demo_flag);
  run->add_option("--corpora", rn.corpora, "Corpus store directory")->excludes(demo_flag);
  run->add_option("--store", rn.store, "Record directory (default: $ITFT_LAB_HOME/records)");
  run->add_option("--jobs", rn.jobs, "Parallel grid cells")->check(CLI::PositiveNumber)->capture_default_str();
  run->add_flag("--force", rn.force, "Rerun plans that already have a record");
  run->add_flag("--no-cache", rn.no_cache, "Do not keep stage checkpoints on disk");
  run->callback([&] {
    action = [&] {
      if (!rn.demo && (rn.plan.empty() || rn.corpora.empty())) {
        fail(ErrorKind::invalid_argument, "run needs --demo or both --plan and --corpora");
      }
      const fs::path home = default_store_root();
      const fs::path records = rn.store.empty() ? home / "records" : fs::path(rn.store);
      require_writable_dir(records);
      std::unique_ptr<CorpusStore> store;
      std::vector<ExperimentPlan> plans;
      if (rn.demo) {
        auto demo = std::make_unique<DeskSetup>(make_demo_setup(g.seed));
        plans = plan_grid(demo->grid, &demo->store);
        auto mem = std::make_unique<MemoryCorpusStore>(std::move(demo->store));
        store = std::move(mem);
      } else {
        store = std::make_unique<DirectoryCorpusStore>(rn.corpora);
        plans = plans_from_json(read_json_file(rn.plan), store.get());
      }
      ToyBackend backend;
      StageCache cache(rn.no_cache ? std::nullopt : std::optional<fs::path>(home / "cache"));
      const RecordStore rs(records);
      rs.remove_stale_temps();
      GridOptions opts;
      opts.jobs = rn.jobs;
      opts.force = rn.force;
      opts.on_event = [n = plans.size()](const GridEvent& ev) { print_event(ev, n); };
      const auto summary = run_grid(plans, {&backend, store.get(), &cache}, rs, opts);
      std::cout << fmt::format("{} cells: {} ran, {} skipped, {} failed\n", plans.size(), summary.ran,
                               summary.skipped, summary.failed);
      if (summary.failed < plans.size()) {
        const fs::path reports = home / "reports";
        write_reports(summary.records, reports, {"intermediate_size", "final_size"});
        std::cout << "\n" << aggregate(summary.records, {"intermediate_size", "final_size"}).pivot_markdown();
        std::cout << fmt::format("reports -> {}\n", reports.string());
      }
      if (summary.failed > 0) {
        throw ExperimentFailure{fmt::format("{} of {} grid cells failed", summary.failed, plans.size())};
      }
    };
  });

  // report -----------------------------------------------------------------
  auto* report = app.add_subcommand("report", "Aggregate recorded runs");
  struct {
    std::string store, out, divergence, stage = "final";
    std::vector<std::string> group;
    bool all_tests = false;
    std::string direction;
  } rp;
  report->add_option("--store", rp.store, "Record directory (default: $ITFT_LAB_HOME/records)");
  report->add_option("--group", rp.group, "Group fields: intermediate_size, final_size, language, direction, test")
      ->delimiter(',');
  report->add_option("--out", rp.out, "Write long.csv, groups.csv, pivot.md and results.json here");
  report->add_option("--divergence", rp.divergence, "Divergence matrix JSON: correlate it with spBLEU");
  report->add_option("--stage", rp.stage, "Stage whose domain is correlated")
      ->check(CLI::IsMember({"final", "intermediate"}))
      ->capture_default_str();
  report->add_flag("--all-tests", rp.all_tests, "Include in-domain tests in the correlation");
  report->add_option("--direction", rp.direction, "Only this direction in the correlation")
      ->check(CLI::IsMember({"forward", "reverse"}));
  add_format(report, "md");
  report->callback([&] {
    action = [&] {
      const fs::path dir = rp.store.empty() ? default_store_root() / "records" : fs::path(rp.store);
      if (!fs::is_directory(dir)) fail(ErrorKind::io, fmt::format("record store {} does not exist", dir.string()));
      const auto records = RecordStore(dir).list();
      const auto group = rp.group.empty() ? std::vector<std::string>{"intermediate_size", "final_size"}
                                          : split_csv_list(rp.group);
      const auto table = aggregate(records, group);
      if (!rp.out.empty()) {
        require_writable_dir(rp.out);
        write_reports(records, rp.out, group);
      }
      if (!rp.divergence.empty()) {
        CorrelationOptions co;
        co.stage = parse_correlation_stage(rp.stage);
        co.out_domain_only = !rp.all_tests;
        if (!rp.direction.empty()) co.direction = parse_direction(rp.direction);
        const auto c = correlate_divergence(records, DivergenceMatrix::from_json(read_json_file(rp.divergence)), co);
        if (g.format == "json") {
          std::cout << c.to_json().dump(2) << "\n";
        } else {
          std::cout << fmt::format("{} stage divergence vs spBLEU: n = {}, r = {:.4f}, R^2 = {:.4f}\n", rp.stage,
                                   c.report.n, c.report.pearson_r, c.report.r_squared);
        }
        return;
      }
      if (g.format == "json") {
        std::cout << table.to_json().dump(2) << "\n";
      } else if (g.format == "csv") {
        std::cout << table.groups_csv();
      } else {
        std::cout << table.groups_csv() << "\n" << table.pivot_markdown();
      }
    };
  });

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error(g, kExitUsage, "usage", e.what());
  }

  try {
    if (action) action();
    return kExitOk;
  } catch (const ExperimentFailure& e) {
    return report_error(g, kExitExperiment, "experiment", e.message);
  } catch (const Error& e) {
    const int code = e.kind() == ErrorKind::experiment ? kExitExperiment : kExitUsage;
    return report_error(g, code, error_kind_name(e.kind()), e.what());
  } catch (const fs::filesystem_error& e) {
    return report_error(g, kExitUsage, "io", e.what());
  } catch (const std::exception& e) {
    return report_error(g, kExitUsage, "internal", e.what());
  }
}
