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

#include "itft/toy/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "itft/error.hpp"
#include "itft/hash.hpp"

namespace itft::toy {
namespace {

constexpr std::string_view kSourceConsonants = "ptkbdgmnslrvz";
constexpr std::string_view kSourceVowels = "aeiou";
constexpr std::string_view kTargetConsonants = "hjwqxcfy";
constexpr std::string_view kTargetVowels = "aeiou";

std::string make_word(Rng& rng, std::string_view consonants, std::string_view vowels, int syllables) {
  std::string w;
  for (int s = 0; s < syllables; ++s) {
    w += consonants[rng.below(consonants.size())];
    w += vowels[rng.below(vowels.size())];
  }
  return w;
}

std::vector<std::string> make_words(Rng& rng, std::size_t n, std::string_view consonants,
                                    std::string_view vowels, int min_syl, int max_syl,
                                    std::set<std::string>& used) {
  std::vector<std::string> out;
  while (out.size() < n) {
    const int syl = min_syl + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_syl - min_syl + 1)));
    auto w = make_word(rng, consonants, vowels, syl);
    if (used.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

}  // namespace

SyntheticWorld::SyntheticWorld(SyntheticWorldConfig config, int pool_size)
    : config_(std::move(config)) {
  const auto& c = config_;
  if (c.function_words <= 0 || c.templates <= 0 || c.lexicon_size <= 0 || pool_size <= 0 ||
      c.min_template_len <= 0 || c.max_template_len < c.min_template_len) {
    fail(ErrorKind::invalid_argument, "synthetic world parameters must be positive");
  }
  Rng rng(mix_seed(c.seed, 0x3011d));
  std::set<std::string> used_src, used_tgt;
  function_src_ = make_words(rng, static_cast<std::size_t>(c.function_words), kSourceConsonants,
                             kSourceVowels, 1, 1, used_src);
  function_tgt_ = make_words(rng, static_cast<std::size_t>(c.function_words), kTargetConsonants,
                             kTargetVowels, 1, 1, used_tgt);
  content_src_ = make_words(rng, static_cast<std::size_t>(pool_size), kSourceConsonants,
                            kSourceVowels, 2, 3, used_src);
  content_tgt_ = make_words(rng, static_cast<std::size_t>(pool_size), kTargetConsonants,
                            kTargetVowels, 2, 3, used_tgt);
  for (int t = 0; t < c.templates; ++t) {
    const int len = c.min_template_len +
                    static_cast<int>(rng.below(static_cast<std::uint64_t>(c.max_template_len - c.min_template_len + 1)));
    std::vector<Slot> slots;
    for (int i = 0; i < len; ++i) {
      const bool fn = rng.uniform() < c.function_slot_rate;
      slots.push_back({fn, fn ? static_cast<int>(rng.below(static_cast<std::uint64_t>(c.function_words))) : 0});
    }
    if (std::all_of(slots.begin(), slots.end(), [](const Slot& s) { return s.function; })) {
      slots.back().function = false;
    }
    templates_.push_back(std::move(slots));
  }
}

std::string SyntheticWorld::translate_word(const std::string& source_word) const {
  for (std::size_t i = 0; i < function_src_.size(); ++i) {
    if (function_src_[i] == source_word) return function_tgt_[i];
  }
  for (std::size_t i = 0; i < content_src_.size(); ++i) {
    if (content_src_[i] == source_word) return content_tgt_[i];
  }
  fail(ErrorKind::invalid_argument, fmt::format("'{}' is not a word of this world", source_word));
}

SentencePair SyntheticWorld::sample_pair(const SyntheticDomain& domain, Rng& rng) const {
  const auto& tpl = templates_[rng.below(templates_.size())];
  std::vector<int> src;        // >= 0 content pool index, < 0 function word -(i+1)
  for (const auto& slot : tpl) {
    if (slot.function) {
      src.push_back(-(slot.word + 1));
    } else {
      const int k = domain.offset + static_cast<int>(rng.below(static_cast<std::uint64_t>(config_.lexicon_size)));
      src.push_back(k % pool_size());
    }
  }
  std::vector<int> tgt = src;
  for (std::size_t i = 0; i < tgt.size();) {
    if (tgt[i] < 0) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < tgt.size() && tgt[j] >= 0) ++j;
    std::reverse(tgt.begin() + static_cast<std::ptrdiff_t>(i), tgt.begin() + static_cast<std::ptrdiff_t>(j));
    i = j;
  }
  auto render = [&](const std::vector<int>& seq, bool source) {
    std::string out;
    for (int w : seq) {
      if (!out.empty()) out += ' ';
      const auto idx = static_cast<std::size_t>(w < 0 ? -w - 1 : w);
      if (w < 0) {
        out += source ? function_src_[idx] : function_tgt_[idx];
      } else {
        out += source ? content_src_[idx] : content_tgt_[idx];
      }
    }
    return out;
  };
  return {render(src, true), render(tgt, false)};
}

ParallelCorpus SyntheticWorld::generate(const SyntheticDomain& domain, std::size_t n_pairs,
                                        std::uint64_t seed) const {
  Rng rng(mix_seed(seed, Fnv1a().update(domain.label).value() ^ static_cast<std::uint64_t>(domain.offset)));
  std::vector<SentencePair> pairs;
  pairs.reserve(n_pairs);
  for (std::size_t i = 0; i < n_pairs; ++i) pairs.push_back(sample_pair(domain, rng));
  CorpusMeta meta{domain.label, config_.source_lang, config_.target_lang, domain.label,
                  fmt::format("synthetic world seed={} offset={} lexicon={}", config_.seed,
                              domain.offset, config_.lexicon_size)};
  return ParallelCorpus(std::move(meta), std::move(pairs));
}

std::pair<ParallelCorpus, ParallelCorpus> gen_synthetic_domains(double overlap, int grammar_size,
                                                                int lexicon_size,
                                                                std::size_t n_pairs,
                                                                std::uint64_t seed) {
  if (!(overlap >= 0.0 && overlap <= 1.0)) {
    fail(ErrorKind::invalid_argument, fmt::format("overlap {} outside [0, 1]", overlap));
  }
  if (grammar_size <= 0 || lexicon_size <= 0 || n_pairs == 0) {
    fail(ErrorKind::invalid_argument, "synthetic domain parameters must be positive");
  }
  const int shared = static_cast<int>(std::floor(overlap * lexicon_size + 1e-9));
  const int offset_b = lexicon_size - shared;
  SyntheticWorldConfig cfg;
  cfg.templates = grammar_size;
  cfg.lexicon_size = lexicon_size;
  cfg.seed = seed;
  const SyntheticWorld world(cfg, offset_b + lexicon_size);
  return {world.generate({"synA", 0}, n_pairs, seed), world.generate({"synB", offset_b}, n_pairs, seed)};
}

std::vector<ParallelCorpus> gen_domain_family(int n_domains, int stride, int grammar_size,
                                              int lexicon_size, std::size_t n_pairs,
                                              std::uint64_t seed) {
  if (n_domains <= 0 || stride < 0 || grammar_size <= 0 || lexicon_size <= 0 || n_pairs == 0) {
    fail(ErrorKind::invalid_argument, "synthetic domain parameters must be positive");
  }
  SyntheticWorldConfig cfg;
  cfg.templates = grammar_size;
  cfg.lexicon_size = lexicon_size;
  cfg.seed = seed;
  const SyntheticWorld world(cfg, (n_domains - 1) * stride + lexicon_size);
  std::vector<ParallelCorpus> out;
  for (int k = 0; k < n_domains; ++k) {
    out.push_back(world.generate({fmt::format("syn{}", k), k * stride}, n_pairs, seed));
  }
  return out;
}

std::pair<ParallelCorpus, ParallelCorpus> split_train_test(const ParallelCorpus& corpus,
                                                           std::size_t test_size) {
  if (test_size == 0 || test_size >= corpus.size()) {
    fail(ErrorKind::invalid_argument,
         fmt::format("test size {} must be in [1, {})", test_size, corpus.size()));
  }
  const auto& p = corpus.pairs();
  CorpusMeta test_meta = corpus.meta();
  test_meta.id += "-test";
  CorpusMeta train_meta = corpus.meta();
  train_meta.id += "-train";
  std::vector<SentencePair> test(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(test_size));
  std::vector<SentencePair> train(p.begin() + static_cast<std::ptrdiff_t>(test_size), p.end());
  return {ParallelCorpus(std::move(train_meta), std::move(train)),
          ParallelCorpus(std::move(test_meta), std::move(test))};
}

}  // namespace itft::toy
