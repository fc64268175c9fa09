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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "itft/corpus.hpp"
#include "itft/textprep.hpp"

namespace itft {

// Normalized token frequencies. All probabilities are > 0 and sum to 1
// (within 1e-9).
class TokenDistribution {
 public:
  static TokenDistribution from_counts(const TokenCounts& counts);
  // Validates and takes arbitrary positive probabilities summing to 1.
  static TokenDistribution from_probabilities(std::map<std::string, double> probs);

  const std::map<std::string, double>& probs() const noexcept { return probs_; }
  std::size_t support_size() const noexcept { return probs_.size(); }
  std::uint64_t token_total() const noexcept { return token_total_; }
  double probability(const std::string& token) const;

 private:
  TokenDistribution() = default;

  std::map<std::string, double> probs_;
  std::uint64_t token_total_ = 0;
};

inline TokenDistribution build_distribution(const TokenCounts& counts) {
  return TokenDistribution::from_counts(counts);
}

// KL(P || Q) in bits. Requires support(P) ⊆ support(Q).
double kl_divergence(const TokenDistribution& p, const TokenDistribution& q);

// Jensen-Shannon divergence in bits, in [0, 1]: ½KL(P||M) + ½KL(Q||M) with
// M = ½P + ½Q over the union support.
double js_divergence(const TokenDistribution& p, const TokenDistribution& q);

// ---------------------------------------------------------------------------
// Train/test divergence matrices

// A labeled set of corpora (e.g. every en-xx "PMI" corpus), one per pair.
struct LabeledCorpora {
  std::string label;
  std::vector<ParallelCorpus> corpora;
};

enum class SideSelection {
  non_pivot_plus_pivot,  // xx side per corpus, all pivot sides pooled as one more language
  non_pivot_only,
};

struct DivergenceConfig {
  DivergencePrepConfig prep;
  std::string pivot_lang = "en";
  SideSelection sides = SideSelection::non_pivot_plus_pivot;
  std::size_t train_size = 25000;  // per corpus; full corpus when smaller
  std::size_t test_size = 1000;
  std::uint64_t seed = kDefaultSeed;
};

struct DivergenceMatrix {
  std::vector<std::string> rows;  // train labels
  std::vector<std::string> cols;  // test labels
  // values[r][c]; nullopt where train and test share no language.
  std::vector<std::vector<std::optional<double>>> values;
  // per_language[r][c][lang]
  std::vector<std::vector<std::map<std::string, double>>> per_language;
  nlohmann::json metadata;

  std::optional<double> at(const std::string& row, const std::string& col) const;

  std::string to_csv(int precision = 6) const;
  nlohmann::json to_json() const;
  static DivergenceMatrix from_json(const nlohmann::json& j);
  // Fixed-width grid with two decimals and "-" for absent cells.
  std::string to_table() const;
};

// Per-language token texts of a labeled set after sampling.
std::map<std::string, std::vector<std::string>> language_texts(const LabeledCorpora& set,
                                                               std::size_t size_cap,
                                                               const DivergenceConfig& cfg);

DivergenceMatrix divergence_matrix(const std::vector<LabeledCorpora>& train_sets,
                                   const std::vector<LabeledCorpora>& test_sets,
                                   const DivergenceConfig& cfg = {});

std::string side_selection_name(SideSelection s);
SideSelection parse_side_selection(const std::string& name);

}  // namespace itft
