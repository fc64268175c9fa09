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
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "itft/corpus.hpp"
#include "itft/random.hpp"

namespace itft::toy {

// A miniature "language pair": a shared grammar of templates over function
// words plus a pool of content words, each with a fixed translation. Domains
// draw their content words from windows of the pool; two domains overlap in
// exactly the words their windows share.
struct SyntheticWorldConfig {
  int function_words = 6;
  int templates = 12;          // grammar size
  int lexicon_size = 60;       // content words per domain
  int min_template_len = 4;
  int max_template_len = 7;
  double function_slot_rate = 0.12;
  std::string source_lang = "en";
  std::string target_lang = "qaa";
  std::uint64_t seed = 222;
};

struct SyntheticDomain {
  std::string label;
  int offset = 0;  // first pool index of the domain's lexicon window
};

class SyntheticWorld {
 public:
  SyntheticWorld(SyntheticWorldConfig config, int pool_size);

  const SyntheticWorldConfig& config() const noexcept { return config_; }
  int pool_size() const noexcept { return static_cast<int>(content_src_.size()); }

  // Words on the source side that every domain shares.
  const std::vector<std::string>& function_words() const noexcept { return function_src_; }
  const std::vector<std::string>& target_function_words() const noexcept { return function_tgt_; }

  // Source sentence and its translation: dictionary mapping, then every maximal
  // run of consecutive content words is reversed.
  SentencePair sample_pair(const SyntheticDomain& domain, Rng& rng) const;

  ParallelCorpus generate(const SyntheticDomain& domain, std::size_t n_pairs,
                          std::uint64_t seed) const;

  std::string translate_word(const std::string& source_word) const;

 private:
  struct Slot {
    bool function;
    int word;  // function word index (content slots: unused)
  };

  SyntheticWorldConfig config_;
  std::vector<std::string> function_src_, function_tgt_;
  std::vector<std::string> content_src_, content_tgt_;
  std::vector<std::vector<Slot>> templates_;
};

// Two domains whose content lexicons share exactly floor(overlap * lexicon_size)
// words; labels "synA" and "synB".
std::pair<ParallelCorpus, ParallelCorpus> gen_synthetic_domains(double overlap, int grammar_size,
                                                                int lexicon_size,
                                                                std::size_t n_pairs,
                                                                std::uint64_t seed);

// `n_domains` domains "syn0".."syn<n-1>" over one world; domain k draws from
// pool window [k * stride, k * stride + lexicon_size), so neighbours share
// lexicon_size - stride words.
std::vector<ParallelCorpus> gen_domain_family(int n_domains, int stride, int grammar_size,
                                              int lexicon_size, std::size_t n_pairs,
                                              std::uint64_t seed);

// Returns {train, test}; the first `test_size` pairs form the test corpus.
std::pair<ParallelCorpus, ParallelCorpus> split_train_test(const ParallelCorpus& corpus,
                                                           std::size_t test_size);

}  // namespace itft::toy
