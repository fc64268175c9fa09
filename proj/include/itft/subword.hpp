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
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace itft {

// Reserved ids shared by the subword model and the toy trainer.
enum SpecialId : int { kPadId = 0, kBosId = 1, kEosId = 2, kUnkId = 3 };
inline constexpr int kNumSpecials = 4;

// U+2581, prefixed to every word and substituted for each space.
inline constexpr std::string_view kWordMarker = "\xE2\x96\x81";

using SymbolPair = std::pair<std::string, std::string>;

// Merge-based subword vocabulary.
//
// Ids: 0..3 specials, then base symbols in code point order, then one id per
// merge in training order. vocab_size() == 4 + |base| + |merges|.
class SubwordModel {
 public:
  SubwordModel(std::vector<std::string> base_vocab, std::vector<SymbolPair> merges);

  const std::vector<std::string>& base_vocab() const noexcept { return base_vocab_; }
  const std::vector<SymbolPair>& merges() const noexcept { return merges_; }
  int vocab_size() const noexcept { return static_cast<int>(symbols_.size()); }

  // Content hash of the serialized model; recorded in BLEU signatures.
  const std::string& id() const noexcept { return id_; }

  // Subword pieces. Characters outside the base vocabulary are kept as
  // literal single-character pieces.
  std::vector<std::string> encode_pieces(std::string_view text) const;
  std::vector<int> encode(std::string_view text) const;
  // UNK decodes to U+FFFD; specials PAD/BOS/EOS decode to nothing.
  std::string decode(std::span<const int> ids) const;

  const std::string& symbol(int id) const;
  int piece_id(const std::string& piece) const;  // kUnkId when absent

  nlohmann::json to_json() const;
  static SubwordModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static SubwordModel load(const std::filesystem::path& path);

  friend bool operator==(const SubwordModel& a, const SubwordModel& b) {
    return a.base_vocab_ == b.base_vocab_ && a.merges_ == b.merges_;
  }

 private:
  std::vector<std::string> apply_merges(std::vector<std::string> symbols) const;

  std::vector<std::string> base_vocab_;
  std::vector<SymbolPair> merges_;
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> ids_;
  std::map<SymbolPair, int> merge_rank_;
  std::string id_;
};

// Splits text into marker-prefixed segments: "a  b" -> ["▁a", "▁", "▁b"].
std::vector<std::string> marker_segments(std::string_view text);

// Smallest feasible vocab_size for `pool` (4 + distinct symbols incl. marker).
int minimum_vocab_size(std::span<const std::string> pool);

// Greedy pair merging: repeatedly merge the most frequent adjacent symbol
// pair (ties: lexicographically smallest pair) until vocab_size is reached or
// no pair occurs at least twice.
SubwordModel train_subword(std::span<const std::string> pool, int vocab_size);

}  // namespace itft
