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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "itft/random.hpp"

namespace itft {

struct SentencePair {
  std::string source;
  std::string target;

  friend bool operator==(const SentencePair&, const SentencePair&) = default;
};

struct CorpusMeta {
  std::string id;
  std::string source_lang;
  std::string target_lang;
  std::string domain;
  std::string provenance;

  friend bool operator==(const CorpusMeta&, const CorpusMeta&) = default;
};

// Immutable aligned sentence pairs.
//
// Invariants (checked on construction): at least one pair, no empty or
// whitespace-only side, no newline characters, distinct ISO-639 codes.
class ParallelCorpus {
 public:
  ParallelCorpus(CorpusMeta meta, std::vector<SentencePair> pairs);

  const CorpusMeta& meta() const noexcept { return meta_; }
  const std::string& id() const noexcept { return meta_.id; }
  const std::string& domain() const noexcept { return meta_.domain; }
  const std::vector<SentencePair>& pairs() const noexcept { return pairs_; }
  std::size_t size() const noexcept { return pairs_.size(); }

  std::vector<std::string> sources() const;
  std::vector<std::string> targets() const;

  // Swaps the source and target sides (and language codes).
  ParallelCorpus flipped() const;
  ParallelCorpus with_meta(CorpusMeta meta) const;

  friend bool operator==(const ParallelCorpus&, const ParallelCorpus&) = default;

 private:
  CorpusMeta meta_;
  std::vector<SentencePair> pairs_;
};

bool is_language_code(std::string_view code) noexcept;

// ---------------------------------------------------------------------------
// Line-aligned ingestion

struct IngestResult {
  ParallelCorpus corpus;
  std::size_t dropped = 0;  // pairs with an empty or whitespace-only side
};

// Two UTF-8 files, one sentence per line. Trailing blank lines are trimmed
// before the line counts are compared; a trailing '\r' is stripped per line.
IngestResult ingest_line_aligned(const std::filesystem::path& source_path,
                                 const std::filesystem::path& target_path,
                                 const CorpusMeta& meta);

IngestResult ingest_lines(const std::vector<std::string>& source_lines,
                          const std::vector<std::string>& target_lines,
                          const CorpusMeta& meta);

// ---------------------------------------------------------------------------
// Verse-level alignment

struct VerseKey {
  std::string book;  // canonical uppercase code, e.g. "GEN"
  int chapter = 0;
  int verse = 0;

  std::string str() const;
  static VerseKey parse(std::string_view text);

  friend bool operator==(const VerseKey&, const VerseKey&) = default;
};

// Canonical order: books in protocanonical order (GEN..REV), unknown codes
// after them alphabetically; then chapter, then verse.
struct VerseKeyLess {
  bool operator()(const VerseKey& a, const VerseKey& b) const;
};

// Position of `book` in the canonical book list, or -1.
int canonical_book_index(std::string_view book) noexcept;

struct VerseKeyedText {
  std::string lang;
  std::map<VerseKey, std::string, VerseKeyLess> entries;
};

// Maps localized book names to canonical codes (TSV: name<TAB>CODE).
using BookNameMap = std::map<std::string, std::string>;
BookNameMap read_book_name_map(const std::filesystem::path& path);

// TSV rows `book:chapter:verse<TAB>text`. Duplicate keys and empty verse
// texts are format errors.
VerseKeyedText read_verse_tsv(const std::filesystem::path& path, std::string lang,
                              const BookNameMap& book_names = {});
VerseKeyedText parse_verse_tsv(std::string_view content, std::string lang,
                               const BookNameMap& book_names = {});

struct AlignResult {
  ParallelCorpus corpus;
  std::size_t unmatched_a = 0;
  std::size_t unmatched_b = 0;
};

AlignResult align_verses(const VerseKeyedText& a, const VerseKeyedText& b,
                         std::string domain = "bible");

// ---------------------------------------------------------------------------
// Deterministic nested subsampling

struct SampleSpec {
  std::size_t size = 0;
  std::uint64_t seed = kDefaultSeed;
};

// One seeded shuffle of the index range; the first `size` indices are kept
// in shuffled order, so sample(n, s) is a prefix of sample(m, s) for n < m.
ParallelCorpus sample_subset(const ParallelCorpus& corpus, const SampleSpec& spec);

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Files

nlohmann::json corpus_sidecar(const ParallelCorpus& corpus, std::size_t dropped = 0);

struct CorpusFiles {
  std::filesystem::path source;
  std::filesystem::path target;
  std::filesystem::path sidecar;
};

// Writes `<stem>.<src_lang>`, `<stem>.<tgt_lang>` and `<stem>.json` into `dir`.
CorpusFiles write_corpus(const ParallelCorpus& corpus, const std::filesystem::path& dir,
                         const std::string& stem, std::size_t dropped = 0);

// Reads a corpus from its JSON sidecar; text paths are relative to the sidecar.
ParallelCorpus read_corpus(const std::filesystem::path& sidecar);

}  // namespace itft
