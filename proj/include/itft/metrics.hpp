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

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "itft/subword.hpp"

namespace itft {

using TokenList = std::vector<std::string>;

inline constexpr int kBleuOrder = 4;

struct BleuScore {
  double score = 0.0;                             // 0..100
  std::array<double, kBleuOrder> precisions{};    // %, after smoothing
  std::array<std::int64_t, kBleuOrder> correct{};
  std::array<std::int64_t, kBleuOrder> total{};
  double brevity_penalty = 1.0;
  std::int64_t hyp_len = 0;
  std::int64_t ref_len = 0;
  std::string signature;

  nlohmann::json to_json() const;
  static BleuScore from_json(const nlohmann::json& j);
};

// Corpus BLEU, single reference, n = 1..4, clipped counts, "exp" smoothing
// for zero-match orders: the k-th zero precision becomes 100 / (2^k · total).
BleuScore bleu(std::span<const TokenList> hypotheses, std::span<const TokenList> references,
               const std::string& tokenizer = "word");

// Whitespace-split convenience form.
BleuScore bleu_sentences(std::span<const std::string> hypotheses,
                         std::span<const std::string> references);

// BLEU over subword pieces; the signature carries the model id.
BleuScore sp_bleu(const SubwordModel& model, std::span<const std::string> hypotheses,
                  std::span<const std::string> references);

std::string bleu_signature(const std::string& tokenizer);

// ---------------------------------------------------------------------------

struct CorrelationReport {
  std::size_t n = 0;
  double pearson_r = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> pairs;

  nlohmann::json to_json() const;
};

// Sample Pearson correlation. Requires n >= 3 and non-constant inputs.
CorrelationReport pearson(std::span<const double> xs, std::span<const double> ys);

}  // namespace itft
