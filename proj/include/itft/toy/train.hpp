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

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "itft/corpus.hpp"
#include "itft/subword.hpp"
#include "itft/toy/model.hpp"
#include "itft/toy/transformer.hpp"

namespace itft::toy {

struct TrainStats {
  std::vector<double> step_loss;
  double final_epoch_loss = 0.0;
};

// Encodes both sides; fails naming the first pair that exceeds max_len.
std::vector<Example> encode_corpus(const SubwordModel& vocab, const ParallelCorpus& corpus,
                                   const ModelConfig& config);

// Adam over shuffled mini-batches with dropout. The data order and dropout
// masks are drawn from one stream seeded by cfg.seed, so the result is a pure
// function of (checkpoint, examples, cfg). The input checkpoint is not touched.
ModelCheckpoint train_examples(const ModelCheckpoint& ckpt, std::span<const Example> examples,
                               const TrainConfig& cfg, LineageEntry entry,
                               TrainStats* stats = nullptr);

ModelCheckpoint fine_tune(const ModelCheckpoint& ckpt, const SubwordModel& vocab,
                          const ParallelCorpus& corpus, const TrainConfig& cfg,
                          const std::string& stage = "fine_tune", TrainStats* stats = nullptr);

// Greedy translation of raw sentences. max_out_len <= 0 selects
// min(max_len - 1, 2 * |src| + 10).
std::vector<std::string> translate(const ModelCheckpoint& ckpt, const SubwordModel& vocab,
                                   std::span<const std::string> sources, int max_out_len = 0);

}  // namespace itft::toy
