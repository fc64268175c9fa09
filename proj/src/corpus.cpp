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

#include "itft/corpus.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "itft/error.hpp"
#include "itft/unicode.hpp"

namespace itft {
namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 66> kCanonicalBooks = {
    "GEN", "EXO", "LEV", "NUM", "DEU", "JOS", "JDG", "RUT", "1SA", "2SA", "1KI",
    "2KI", "1CH", "2CH", "EZR", "NEH", "EST", "JOB", "PSA", "PRO", "ECC", "SNG",
    "ISA", "JER", "LAM", "EZK", "DAN", "HOS", "JOL", "AMO", "OBA", "JON", "MIC",
    "NAM", "HAB", "ZEP", "HAG", "ZEC", "MAL", "MAT", "MRK", "LUK", "JHN", "ACT",
    "ROM", "1CO", "2CO", "GAL", "EPH", "PHP", "COL", "1TH", "2TH", "1TI", "2TI",
    "TIT", "PHM", "HEB", "JAS", "1PE", "2PE", "1JN", "2JN", "3JN", "JUD", "REV"};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> split_lines(const std::string& content) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= content.size()) {
    const auto end = content.find('\n', start);
    if (end == std::string::npos) {
      if (start < content.size()) lines.push_back(content.substr(start));
      break;
    }
    lines.push_back(content.substr(start, end - start));
    start = end + 1;
  }
  for (auto& line : lines) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
  }
  return lines;
}

void trim_trailing_blank(std::vector<std::string>& lines) {
  while (!lines.empty() && unicode::is_blank(lines.back())) lines.pop_back();
}

void check_encoding(const std::vector<std::string>& lines, const std::string& what) {
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (auto pos = unicode::find_invalid_utf8(lines[i])) {
      fail(ErrorKind::encoding,
           fmt::format("{}: invalid UTF-8 at line {} (byte {})", what, i + 1, *pos));
    }
  }
}

bool has_newline(std::string_view s) {
  return s.find('\n') != std::string_view::npos || s.find('\r') != std::string_view::npos;
}

int parse_positive(std::string_view text, std::string_view whole) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || value <= 0) {
    fail(ErrorKind::format, fmt::format("malformed verse key '{}'", whole));
  }
  return value;
}

}  // namespace

bool is_language_code(std::string_view code) noexcept {
  if (code.size() < 2 || code.size() > 3) return false;
  return std::all_of(code.begin(), code.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

ParallelCorpus::ParallelCorpus(CorpusMeta meta, std::vector<SentencePair> pairs)
    : meta_(std::move(meta)), pairs_(std::move(pairs)) {
  if (!is_language_code(meta_.source_lang) || !is_language_code(meta_.target_lang)) {
    fail(ErrorKind::invalid_argument,
         fmt::format("corpus '{}': language codes must be ISO-639 (got '{}', '{}')", meta_.id,
                     meta_.source_lang, meta_.target_lang));
  }
  if (meta_.source_lang == meta_.target_lang) {
    fail(ErrorKind::invalid_argument,
         fmt::format("corpus '{}': source and target language are both '{}'", meta_.id,
                     meta_.source_lang));
  }
  if (pairs_.empty()) {
    fail(ErrorKind::invalid_argument, fmt::format("corpus '{}' has no pairs", meta_.id));
  }
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const auto& p = pairs_[i];
    if (has_newline(p.source) || has_newline(p.target)) {
      fail(ErrorKind::format, fmt::format("corpus '{}': pair {} contains a newline", meta_.id, i));
    }
    if (unicode::is_blank(p.source) || unicode::is_blank(p.target)) {
      fail(ErrorKind::invalid_argument,
           fmt::format("corpus '{}': pair {} has an empty side", meta_.id, i));
    }
  }
}

std::vector<std::string> ParallelCorpus::sources() const {
  std::vector<std::string> out;
  out.reserve(pairs_.size());
  for (const auto& p : pairs_) out.push_back(p.source);
  return out;
}

std::vector<std::string> ParallelCorpus::targets() const {
  std::vector<std::string> out;
  out.reserve(pairs_.size());
  for (const auto& p : pairs_) out.push_back(p.target);
  return out;
}

ParallelCorpus ParallelCorpus::flipped() const {
  CorpusMeta meta = meta_;
  std::swap(meta.source_lang, meta.target_lang);
  std::vector<SentencePair> pairs;
  pairs.reserve(pairs_.size());
  for (const auto& p : pairs_) pairs.push_back({p.target, p.source});
  return ParallelCorpus(std::move(meta), std::move(pairs));
}

ParallelCorpus ParallelCorpus::with_meta(CorpusMeta meta) const {
  return ParallelCorpus(std::move(meta), pairs_);
}

namespace {

IngestResult ingest_impl(const std::vector<std::string>& source_lines,
                         const std::vector<std::string>& target_lines, const CorpusMeta& meta,
                         const std::string& source_label, const std::string& target_label) {
  auto src = source_lines;
  auto tgt = target_lines;
  trim_trailing_blank(src);
  trim_trailing_blank(tgt);
  if (src.size() != tgt.size()) {
    fail(ErrorKind::alignment, fmt::format("line count mismatch: source has {} lines, target has {}",
                                           src.size(), tgt.size()));
  }
  check_encoding(src, source_label);
  check_encoding(tgt, target_label);

  std::vector<SentencePair> pairs;
  pairs.reserve(src.size());
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (has_newline(src[i]) || has_newline(tgt[i])) {
      fail(ErrorKind::format, fmt::format("line {} contains an embedded carriage return", i + 1));
    }
    if (unicode::is_blank(src[i]) || unicode::is_blank(tgt[i])) {
      ++dropped;
      continue;
    }
    pairs.push_back({std::move(src[i]), std::move(tgt[i])});
  }
  if (pairs.empty()) {
    fail(ErrorKind::invalid_argument,
         fmt::format("corpus '{}' is empty after dropping {} blank pairs", meta.id, dropped));
  }
  return IngestResult{ParallelCorpus(meta, std::move(pairs)), dropped};
}

}  // namespace

IngestResult ingest_lines(const std::vector<std::string>& source_lines,
                          const std::vector<std::string>& target_lines, const CorpusMeta& meta) {
  return ingest_impl(source_lines, target_lines, meta, "source", "target");
}

IngestResult ingest_line_aligned(const fs::path& source_path, const fs::path& target_path,
                                 const CorpusMeta& meta) {
  return ingest_impl(split_lines(read_file(source_path)), split_lines(read_file(target_path)), meta,
                     source_path.string(), target_path.string());
}

// ---------------------------------------------------------------------------

std::string VerseKey::str() const { return fmt::format("{}:{}:{}", book, chapter, verse); }

VerseKey VerseKey::parse(std::string_view text) {
  const auto last = text.rfind(':');
  if (last == std::string_view::npos || last == 0) {
    fail(ErrorKind::format, fmt::format("malformed verse key '{}'", text));
  }
  const auto mid = text.rfind(':', last - 1);
  if (mid == std::string_view::npos || mid == 0) {
    fail(ErrorKind::format, fmt::format("malformed verse key '{}'", text));
  }
  VerseKey key;
  key.book = std::string(text.substr(0, mid));
  key.chapter = parse_positive(text.substr(mid + 1, last - mid - 1), text);
  key.verse = parse_positive(text.substr(last + 1), text);
  return key;
}

int canonical_book_index(std::string_view book) noexcept {
  const auto it = std::find(kCanonicalBooks.begin(), kCanonicalBooks.end(), book);
  return it == kCanonicalBooks.end() ? -1 : static_cast<int>(it - kCanonicalBooks.begin());
}

bool VerseKeyLess::operator()(const VerseKey& a, const VerseKey& b) const {
  auto rank = [](const VerseKey& k) {
    const int idx = canonical_book_index(k.book);
    return idx < 0 ? static_cast<int>(kCanonicalBooks.size()) : idx;
  };
  const int ra = rank(a);
  const int rb = rank(b);
  if (ra != rb) return ra < rb;
  if (a.book != b.book) return a.book < b.book;
  if (a.chapter != b.chapter) return a.chapter < b.chapter;
  return a.verse < b.verse;
}

namespace {

std::string canonical_book(const std::string& raw, const BookNameMap& names) {
  if (auto it = names.find(raw); it != names.end()) return it->second;
  std::string code = raw;
  for (char& c : code) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  }
  const bool ok = !code.empty() && std::all_of(code.begin(), code.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
  });
  if (!ok) {
    fail(ErrorKind::format,
         fmt::format("book name '{}' is not a canonical code and has no mapping", raw));
  }
  return code;
}

}  // namespace

BookNameMap read_book_name_map(const fs::path& path) {
  BookNameMap map;
  const auto lines = split_lines(read_file(path));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (unicode::is_blank(lines[i])) continue;
    const auto tab = lines[i].find('\t');
    if (tab == std::string::npos) {
      fail(ErrorKind::format, fmt::format("{}:{}: expected name<TAB>CODE", path.string(), i + 1));
    }
    map[lines[i].substr(0, tab)] = lines[i].substr(tab + 1);
  }
  return map;
}

VerseKeyedText parse_verse_tsv(std::string_view content, std::string lang,
                               const BookNameMap& book_names) {
  VerseKeyedText out;
  out.lang = std::move(lang);
  const auto lines = split_lines(std::string(content));
  check_encoding(lines, "verse file");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (unicode::is_blank(line)) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      fail(ErrorKind::format, fmt::format("line {}: expected key<TAB>text", i + 1));
    }
    VerseKey key = VerseKey::parse(std::string_view(line).substr(0, tab));
    key.book = canonical_book(key.book, book_names);
    std::string text = line.substr(tab + 1);
    if (unicode::is_blank(text)) {
      fail(ErrorKind::format, fmt::format("line {}: verse {} has empty text", i + 1, key.str()));
    }
    const std::string key_str = key.str();
    if (!out.entries.emplace(std::move(key), std::move(text)).second) {
      fail(ErrorKind::format, fmt::format("line {}: duplicate verse key {}", i + 1, key_str));
    }
  }
  return out;
}

VerseKeyedText read_verse_tsv(const fs::path& path, std::string lang,
                              const BookNameMap& book_names) {
  try {
    return parse_verse_tsv(read_file(path), std::move(lang), book_names);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::io) throw;
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

AlignResult align_verses(const VerseKeyedText& a, const VerseKeyedText& b, std::string domain) {
  if (a.entries.empty() || b.entries.empty()) {
    fail(ErrorKind::invalid_argument, "align_verses: both inputs must be non-empty");
  }
  std::vector<SentencePair> pairs;
  std::size_t unmatched_a = 0;
  for (const auto& [key, text] : a.entries) {
    if (auto it = b.entries.find(key); it != b.entries.end()) {
      pairs.push_back({text, it->second});
    } else {
      ++unmatched_a;
    }
  }
  if (pairs.empty()) fail(ErrorKind::alignment, "no common verses");
  const std::size_t unmatched_b = b.entries.size() - pairs.size();
  CorpusMeta meta{fmt::format("{}-{}-{}", domain, a.lang, b.lang), a.lang, b.lang,
                  std::move(domain), "verse-aligned"};
  return AlignResult{ParallelCorpus(std::move(meta), std::move(pairs)), unmatched_a, unmatched_b};
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(mix_seed(seed, 0x5a3d1e));
  rng.shuffle(std::span<std::size_t>(idx));
  return idx;
}

ParallelCorpus sample_subset(const ParallelCorpus& corpus, const SampleSpec& spec) {
  if (spec.size == 0) {
    fail(ErrorKind::invalid_argument,
         "sample size 0 is not a corpus; omit the stage instead");
  }
  if (spec.size > corpus.size()) {
    fail(ErrorKind::invalid_argument,
         fmt::format("sample size {} exceeds corpus '{}' size {}", spec.size, corpus.id(),
                     corpus.size()));
  }
  const auto idx = shuffled_indices(corpus.size(), spec.seed);
  std::vector<SentencePair> pairs;
  pairs.reserve(spec.size);
  for (std::size_t i = 0; i < spec.size; ++i) pairs.push_back(corpus.pairs()[idx[i]]);
  CorpusMeta meta = corpus.meta();
  meta.id = fmt::format("{}.n{}.s{}", corpus.id(), spec.size, spec.seed);
  return ParallelCorpus(std::move(meta), std::move(pairs));
}

// ---------------------------------------------------------------------------

nlohmann::json corpus_sidecar(const ParallelCorpus& corpus, std::size_t dropped) {
  const auto& m = corpus.meta();
  return {{"format", "itft-lab.corpus/1"},
          {"id", m.id},
          {"source_lang", m.source_lang},
          {"target_lang", m.target_lang},
          {"domain", m.domain},
          {"provenance", m.provenance},
          {"counts", {{"pairs", corpus.size()}, {"dropped", dropped}}}};
}

CorpusFiles write_corpus(const ParallelCorpus& corpus, const fs::path& dir, const std::string& stem,
                         std::size_t dropped) {
  fs::create_directories(dir);
  CorpusFiles files{dir / (stem + "." + corpus.meta().source_lang),
                    dir / (stem + "." + corpus.meta().target_lang), dir / (stem + ".json")};
  auto write_side = [&](const fs::path& p, bool source) {
    std::ofstream out(p, std::ios::binary);
    if (!out) fail(ErrorKind::io, fmt::format("cannot write '{}'", p.string()));
    for (const auto& pair : corpus.pairs()) out << (source ? pair.source : pair.target) << '\n';
  };
  write_side(files.source, true);
  write_side(files.target, false);
  auto sidecar = corpus_sidecar(corpus, dropped);
  sidecar["files"] = {{"source", files.source.filename().string()},
                      {"target", files.target.filename().string()}};
  std::ofstream out(files.sidecar, std::ios::binary);
  if (!out) fail(ErrorKind::io, fmt::format("cannot write '{}'", files.sidecar.string()));
  out << sidecar.dump(2) << '\n';
  return files;
}

ParallelCorpus read_corpus(const fs::path& sidecar) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(sidecar));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::format, fmt::format("{}: {}", sidecar.string(), e.what()));
  }
  try {
    CorpusMeta meta{j.at("id"), j.at("source_lang"), j.at("target_lang"), j.at("domain"),
                    j.value("provenance", "")};
    const auto base = sidecar.parent_path();
    const auto src = split_lines(read_file(base / j.at("files").at("source").get<std::string>()));
    const auto tgt = split_lines(read_file(base / j.at("files").at("target").get<std::string>()));
    return ingest_lines(src, tgt, meta).corpus;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::format, fmt::format("{}: {}", sidecar.string(), e.what()));
  }
}

}  // namespace itft
