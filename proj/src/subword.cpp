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

#include "itft/subword.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "itft/error.hpp"
#include "itft/hash.hpp"
#include "itft/unicode.hpp"

namespace itft {
namespace {

constexpr std::string_view kReplacement = "\xEF\xBF\xBD";
const std::string kSpecialNames[kNumSpecials] = {"<pad>", "<s>", "</s>", "<unk>"};

// Segments as lists of single-character symbols.
std::vector<std::vector<std::string>> char_segments(std::string_view text) {
  std::vector<std::vector<std::string>> segments;
  if (text.empty()) return segments;
  segments.emplace_back().emplace_back(kWordMarker);
  for (char32_t cp : unicode::decode(text)) {
    if (cp == U' ') {
      segments.emplace_back().emplace_back(kWordMarker);
    } else {
      segments.back().push_back(unicode::encode(cp));
    }
  }
  return segments;
}

}  // namespace

std::vector<std::string> marker_segments(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& seg : char_segments(text)) {
    std::string s;
    for (const auto& c : seg) s += c;
    out.push_back(std::move(s));
  }
  return out;
}

SubwordModel::SubwordModel(std::vector<std::string> base_vocab, std::vector<SymbolPair> merges)
    : base_vocab_(std::move(base_vocab)), merges_(std::move(merges)) {
  if (!std::is_sorted(base_vocab_.begin(), base_vocab_.end()) ||
      std::adjacent_find(base_vocab_.begin(), base_vocab_.end()) != base_vocab_.end()) {
    fail(ErrorKind::format, "subword base vocabulary must be sorted and unique");
  }
  if (!std::binary_search(base_vocab_.begin(), base_vocab_.end(), std::string(kWordMarker))) {
    fail(ErrorKind::format, "subword base vocabulary lacks the word marker");
  }
  for (const auto& name : kSpecialNames) symbols_.push_back(name);
  for (const auto& sym : base_vocab_) {
    if (unicode::decode(sym).size() != 1) {
      fail(ErrorKind::format, fmt::format("base symbol '{}' is not a single character", sym));
    }
    ids_.emplace(sym, static_cast<int>(symbols_.size()));
    symbols_.push_back(sym);
  }
  for (std::size_t r = 0; r < merges_.size(); ++r) {
    const auto& [a, b] = merges_[r];
    if (!ids_.contains(a) || !ids_.contains(b)) {
      fail(ErrorKind::format, fmt::format("merge {} ({}, {}) uses an unknown symbol", r, a, b));
    }
    merge_rank_.emplace(merges_[r], static_cast<int>(r));
    ids_.emplace(a + b, static_cast<int>(symbols_.size()));  // first id wins on duplicates
    symbols_.push_back(a + b);
  }
  nlohmann::json j = {{"base_vocab", base_vocab_}, {"merges", merges_}, {"marker", kWordMarker}};
  id_ = content_hash(j.dump());
}

std::vector<std::string> SubwordModel::apply_merges(std::vector<std::string> symbols) const {
  // Equivalent to applying every merge, in training order, to the whole
  // sequence: each round takes the lowest-ranked pair above the last applied.
  int last = -1;
  for (;;) {
    int best = -1;
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      auto it = merge_rank_.find({symbols[i], symbols[i + 1]});
      if (it != merge_rank_.end() && it->second > last && (best < 0 || it->second < best)) {
        best = it->second;
      }
    }
    if (best < 0) return symbols;
    const auto& [a, b] = merges_[static_cast<std::size_t>(best)];
    std::vector<std::string> next;
    next.reserve(symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      if (i + 1 < symbols.size() && symbols[i] == a && symbols[i + 1] == b) {
        next.push_back(a + b);
        ++i;
      } else {
        next.push_back(std::move(symbols[i]));
      }
    }
    symbols = std::move(next);
    last = best;
  }
}

std::vector<std::string> SubwordModel::encode_pieces(std::string_view text) const {
  std::vector<std::string> pieces;
  for (auto& seg : char_segments(text)) {
    for (auto& piece : apply_merges(std::move(seg))) pieces.push_back(std::move(piece));
  }
  return pieces;
}

std::vector<int> SubwordModel::encode(std::string_view text) const {
  std::vector<int> ids;
  for (const auto& piece : encode_pieces(text)) ids.push_back(piece_id(piece));
  return ids;
}

int SubwordModel::piece_id(const std::string& piece) const {
  auto it = ids_.find(piece);
  return it == ids_.end() ? kUnkId : it->second;
}

const std::string& SubwordModel::symbol(int id) const {
  if (id < 0 || id >= vocab_size()) {
    fail(ErrorKind::invalid_argument,
         fmt::format("subword id {} out of range [0, {})", id, vocab_size()));
  }
  return symbols_[static_cast<std::size_t>(id)];
}

std::string SubwordModel::decode(std::span<const int> ids) const {
  std::string joined;
  for (int id : ids) {
    const auto& sym = symbol(id);
    if (id == kUnkId) {
      joined += kReplacement;
    } else if (id >= kNumSpecials) {
      joined += sym;
    }
  }
  std::string out;
  out.reserve(joined.size());
  for (std::size_t i = 0; i < joined.size();) {
    if (joined.compare(i, kWordMarker.size(), kWordMarker) == 0) {
      out += ' ';
      i += kWordMarker.size();
    } else {
      out += joined[i++];
    }
  }
  if (!out.empty() && out.front() == ' ') out.erase(0, 1);
  return out;
}

nlohmann::json SubwordModel::to_json() const {
  nlohmann::json merges = nlohmann::json::array();
  for (const auto& [a, b] : merges_) merges.push_back({a, b});
  return {{"format", "itft-lab.subword/1"},
          {"base_vocab", base_vocab_},
          {"merges", merges},
          {"vocab_size", vocab_size()},
          {"marker", kWordMarker}};
}

SubwordModel SubwordModel::from_json(const nlohmann::json& j) {
  try {
    if (j.at("marker").get<std::string>() != kWordMarker) {
      fail(ErrorKind::format, "unsupported subword marker");
    }
    std::vector<SymbolPair> merges;
    for (const auto& m : j.at("merges")) {
      merges.emplace_back(m.at(0).get<std::string>(), m.at(1).get<std::string>());
    }
    SubwordModel model(j.at("base_vocab").get<std::vector<std::string>>(), std::move(merges));
    if (j.at("vocab_size").get<int>() != model.vocab_size()) {
      fail(ErrorKind::format, fmt::format("vocab_size {} does not match {} specials+symbols+merges",
                                          j.at("vocab_size").get<int>(), model.vocab_size()));
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::format, fmt::format("malformed subword model: {}", e.what()));
  }
}

void SubwordModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, fmt::format("cannot write '{}'", path.string()));
  out << to_json().dump() << '\n';
}

SubwordModel SubwordModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, fmt::format("cannot open subword model '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return from_json(nlohmann::json::parse(buf.str()));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::format, fmt::format("{}: {}", path.string(), e.what()));
  }
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct Candidate {
  std::int64_t count;
  std::string a, b;
  int ia, ib;

  bool operator<(const Candidate& o) const {
    if (count != o.count) return count > o.count;
    if (a != o.a) return a < o.a;
    return b < o.b;
  }
};

class MergeTrainer {
 public:
  explicit MergeTrainer(std::span<const std::string> pool) {
    std::map<std::string, std::int64_t> word_freq;
    for (const auto& line : pool) {
      for (const auto& seg : marker_segments(line)) ++word_freq[seg];
    }
    for (const auto& [word, freq] : word_freq) {
      std::vector<int> syms;
      for (char32_t cp : unicode::decode(word)) syms.push_back(intern(unicode::encode(cp)));
      words_.push_back(std::move(syms));
      freq_.push_back(freq);
    }
    base_ = names_;
    std::sort(base_.begin(), base_.end());
    for (std::size_t w = 0; w < words_.size(); ++w) add_word(static_cast<int>(w), +1);
  }

  const std::vector<std::string>& base() const { return base_; }

  // Returns false when no pair occurs at least twice.
  bool step(std::vector<SymbolPair>& merges) {
    if (candidates_.empty() || candidates_.begin()->count < 2) return false;
    const Candidate best = *candidates_.begin();
    const int merged = intern(best.a + best.b);
    const auto affected = where_[{best.ia, best.ib}];
    for (int w : affected) {
      add_word(w, -1);
      auto& syms = words_[static_cast<std::size_t>(w)];
      std::vector<int> next;
      next.reserve(syms.size());
      for (std::size_t i = 0; i < syms.size(); ++i) {
        if (i + 1 < syms.size() && syms[i] == best.ia && syms[i + 1] == best.ib) {
          next.push_back(merged);
          ++i;
        } else {
          next.push_back(syms[i]);
        }
      }
      syms = std::move(next);
      add_word(w, +1);
    }
    where_.erase({best.ia, best.ib});
    merges.emplace_back(best.a, best.b);
    return true;
  }

 private:
  int intern(const std::string& s) {
    auto [it, inserted] = ids_.emplace(s, static_cast<int>(names_.size()));
    if (inserted) names_.push_back(s);
    return it->second;
  }

  void add_word(int w, int sign) {
    const auto& syms = words_[static_cast<std::size_t>(w)];
    const std::int64_t f = freq_[static_cast<std::size_t>(w)] * sign;
    for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
      const std::pair<int, int> p{syms[i], syms[i + 1]};
      adjust(p, f);
      if (sign > 0) where_[p].insert(w);
    }
  }

  void adjust(std::pair<int, int> p, std::int64_t delta) {
    auto& count = counts_[p];
    const auto& sa = names_[static_cast<std::size_t>(p.first)];
    const auto& sb = names_[static_cast<std::size_t>(p.second)];
    if (count > 0) candidates_.erase(Candidate{count, sa, sb, p.first, p.second});
    count += delta;
    if (count > 0) {
      candidates_.insert(Candidate{count, sa, sb, p.first, p.second});
    } else {
      counts_.erase(p);
    }
  }

  std::vector<std::string> names_;
  std::map<std::string, int> ids_;
  std::vector<std::string> base_;
  std::vector<std::vector<int>> words_;
  std::vector<std::int64_t> freq_;
  std::map<std::pair<int, int>, std::int64_t> counts_;
  std::map<std::pair<int, int>, std::set<int>> where_;
  std::set<Candidate> candidates_;
};

}  // namespace

int minimum_vocab_size(std::span<const std::string> pool) {
  std::set<char32_t> chars{U'▁'};
  for (const auto& line : pool) {
    for (char32_t cp : unicode::decode(line)) {
      if (cp != U' ') chars.insert(cp);
    }
  }
  return kNumSpecials + static_cast<int>(chars.size());
}

SubwordModel train_subword(std::span<const std::string> pool, int vocab_size) {
  const bool any_text = std::any_of(pool.begin(), pool.end(), [](const auto& s) { return !s.empty(); });
  if (!any_text) fail(ErrorKind::invalid_argument, "subword training pool is empty");
  MergeTrainer trainer(pool);
  const int minimum = kNumSpecials + static_cast<int>(trainer.base().size());
  if (vocab_size < minimum) {
    fail(ErrorKind::invalid_argument,
         fmt::format("vocab_size {} is too small; minimum feasible size is {}", vocab_size, minimum));
  }
  std::vector<SymbolPair> merges;
  while (minimum + static_cast<int>(merges.size()) < vocab_size && trainer.step(merges)) {
  }
  return SubwordModel(trainer.base(), std::move(merges));
}

}  // namespace itft
