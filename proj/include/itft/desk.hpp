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
#include <string>
#include <vector>

#include "itft/divergence.hpp"
#include "itft/orchestrator.hpp"

namespace itft {

// Desk-scale stand-in for the full experiment: synthetic domains, a joint
// subword model and a grid over them, all held in memory.
//
// Store ids: "<domain>.train", "<domain>.test" and the subword model "desk".
struct DeskOptions {
  double overlap = 0.5;
  int grammar_size = 12;
  int lexicon_size = 60;
  std::size_t train_pairs = 2048;  // per domain
  std::size_t test_pairs = 200;
  std::size_t pretrain_pairs = 0;  // > 0 adds a third domain "synC" for a zero-shot base
  int vocab_size = 512;
  std::uint64_t seed = kDefaultSeed;
};

// Desk training defaults: the toy model learns the synthetic task from
// scratch only with more passes and a larger step than the stage defaults.
toy::TrainConfig desk_train_config();

struct DeskSetup {
  MemoryCorpusStore store;
  std::vector<std::string> domains;  // "synA" (intermediate), "synB" (final)[, "synC"]
  GridSpec grid;  // intermediate synA -> final synB; tests on both

  // Train sets (rows) against test sets (columns), labeled by domain.
  DivergenceMatrix divergence(const DivergenceConfig& cfg = {}) const;
};

DeskSetup make_desk_setup(const DeskOptions& options = {});

// The fast miniature used by `run --demo`.
DeskSetup make_demo_setup(std::uint64_t seed = kDefaultSeed);

struct FamilyOptions {
  int domains = 4;
  int stride = 15;  // neighbouring domains share lexicon_size - stride words
  int grammar_size = 12;
  int lexicon_size = 60;
  std::size_t train_pairs = 2048;
  std::size_t test_pairs = 200;
  int vocab_size = 512;
  std::uint64_t seed = kDefaultSeed;
};

struct FamilySetup {
  MemoryCorpusStore store;
  std::vector<std::string> domains;  // "syn0".."syn<n-1>"
  BaseSpec base;

  DivergenceMatrix divergence(const DivergenceConfig& cfg = {}) const;
};

FamilySetup make_family_setup(const FamilyOptions& options = {});

// One plan per ordered (intermediate, final) domain pair with distinct
// domains and per seed; every domain's test set is evaluated.
std::vector<ExperimentPlan> family_plans(const FamilySetup& setup, std::size_t intermediate_size,
                                         std::size_t final_size, const toy::TrainConfig& train,
                                         const std::vector<std::uint64_t>& seeds,
                                         const std::vector<Direction>& directions = {Direction::forward});

}  // namespace itft
