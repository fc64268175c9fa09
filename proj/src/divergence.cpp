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

#include "itft/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "itft/error.hpp"
#include "itft/version.hpp"

namespace itft {
namespace {

// Neumaier compensated summation.
class Accumulator {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

TokenDistribution TokenDistribution::from_counts(const TokenCounts& counts) {
  std::uint64_t total = 0;
  for (const auto& [token, n] : counts) total += n;
  if (total == 0) fail(ErrorKind::invalid_argument, "empty distribution");
  TokenDistribution d;
  d.token_total_ = total;
  const double denom = static_cast<double>(total);
  for (const auto& [token, n] : counts) {
    if (n > 0) d.probs_.emplace(token, static_cast<double>(n) / denom);
  }
  return d;
}

TokenDistribution TokenDistribution::from_probabilities(std::map<std::string, double> probs) {
  if (probs.empty()) fail(ErrorKind::invalid_argument, "empty distribution");
  Accumulator sum;
  for (const auto& [token, p] : probs) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      fail(ErrorKind::invalid_argument,
           fmt::format("probability of '{}' must be positive and finite", token));
    }
    sum.add(p);
  }
  if (std::abs(sum.value() - 1.0) > 1e-9) {
    fail(ErrorKind::invalid_argument,
         fmt::format("probabilities sum to {:.12f}, not 1", sum.value()));
  }
  TokenDistribution d;
  d.probs_ = std::move(probs);
  return d;
}

double TokenDistribution::probability(const std::string& token) const {
  auto it = probs_.find(token);
  return it == probs_.end() ? 0.0 : it->second;
}

double kl_divergence(const TokenDistribution& p, const TokenDistribution& q) {
  Accumulator acc;
  for (const auto& [token, pt] : p.probs()) {
    const double qt = q.probability(token);
    if (qt <= 0.0) {
      fail(ErrorKind::invalid_argument,
           fmt::format("KL undefined: token '{}' is outside the support of Q", token));
    }
    acc.add(pt * std::log2(pt / qt));
  }
  return std::max(0.0, acc.value());
}

double js_divergence(const TokenDistribution& p, const TokenDistribution& q) {
  // Walk the union support in token order; the per-token term is symmetric
  // in (p, q), so JSD(P,Q) and JSD(Q,P) round identically.
  auto term = [](double a, double b) {
    const double m = 0.5 * a + 0.5 * b;
    double t = 0.0;
    if (a > 0.0) t += a * std::log2(a / m);
    if (b > 0.0) t += b * std::log2(b / m);
    return t;
  };
  Accumulator acc;
  bool shared = false;
  auto ip = p.probs().begin();
  auto iq = q.probs().begin();
  const auto ep = p.probs().end();
  const auto eq = q.probs().end();
  while (ip != ep || iq != eq) {
    if (iq == eq || (ip != ep && ip->first < iq->first)) {
      acc.add(term(ip->second, 0.0));
      ++ip;
    } else if (ip == ep || iq->first < ip->first) {
      acc.add(term(0.0, iq->second));
      ++iq;
    } else {
      shared = true;
      acc.add(term(ip->second, iq->second));
      ++ip;
      ++iq;
    }
  }
  // Disjoint supports: every term is a·log2(2) = a, so the value is ½(1 + 1).
  if (!shared) return 1.0;
  return std::clamp(0.5 * acc.value(), 0.0, 1.0);
}

// ---------------------------------------------------------------------------

std::string side_selection_name(SideSelection s) {
  switch (s) {
    case SideSelection::non_pivot_plus_pivot: return "non_pivot_plus_pivot";
    case SideSelection::non_pivot_only: return "non_pivot_only";
  }
  return "unknown";
}

SideSelection parse_side_selection(const std::string& name) {
  if (name == "non_pivot_plus_pivot") return SideSelection::non_pivot_plus_pivot;
  if (name == "non_pivot_only") return SideSelection::non_pivot_only;
  fail(ErrorKind::invalid_argument, fmt::format("unknown side selection '{}'", name));
}

std::map<std::string, std::vector<std::string>> language_texts(const LabeledCorpora& set,
                                                               std::size_t size_cap,
                                                               const DivergenceConfig& cfg) {
  std::map<std::string, std::vector<std::string>> texts;
  for (const auto& full : set.corpora) {
    const ParallelCorpus corpus =
        full.size() > size_cap ? sample_subset(full, {size_cap, cfg.seed}) : full;
    const auto& m = corpus.meta();
    const bool src_pivot = m.source_lang == cfg.pivot_lang;
    const bool tgt_pivot = m.target_lang == cfg.pivot_lang;
    auto add = [&](const std::string& lang, std::vector<std::string> side) {
      auto& dst = texts[lang];
      dst.insert(dst.end(), std::make_move_iterator(side.begin()),
                 std::make_move_iterator(side.end()));
    };
    const bool keep_pivot = cfg.sides == SideSelection::non_pivot_plus_pivot;
    if (!src_pivot || keep_pivot) add(m.source_lang, corpus.sources());
    if (!tgt_pivot || keep_pivot) add(m.target_lang, corpus.targets());
  }
  return texts;
}

DivergenceMatrix divergence_matrix(const std::vector<LabeledCorpora>& train_sets,
                                   const std::vector<LabeledCorpora>& test_sets,
                                   const DivergenceConfig& cfg) {
  using Dists = std::map<std::string, std::optional<TokenDistribution>>;
  auto distributions = [&](const LabeledCorpora& set, std::size_t cap) {
    Dists out;
    for (const auto& [lang, texts] : language_texts(set, cap, cfg)) {
      const auto counts = prep_for_divergence(texts, cfg.prep);
      if (counts.empty()) {
        out.emplace(lang, std::nullopt);
      } else {
        out.emplace(lang, TokenDistribution::from_counts(counts));
      }
    }
    return out;
  };

  DivergenceMatrix m;
  std::vector<Dists> train_d;
  std::vector<Dists> test_d;
  for (const auto& s : train_sets) {
    m.rows.push_back(s.label);
    train_d.push_back(distributions(s, cfg.train_size));
  }
  for (const auto& s : test_sets) {
    m.cols.push_back(s.label);
    test_d.push_back(distributions(s, cfg.test_size));
  }

  m.values.assign(m.rows.size(), std::vector<std::optional<double>>(m.cols.size()));
  m.per_language.assign(m.rows.size(), std::vector<std::map<std::string, double>>(m.cols.size()));
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    for (std::size_t c = 0; c < m.cols.size(); ++c) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& [lang, dp] : train_d[r]) {
        auto it = test_d[c].find(lang);
        if (it == test_d[c].end()) continue;
        if (!dp || !it->second) {
          fail(ErrorKind::invalid_argument,
               fmt::format("divergence cell ({}, {}): language '{}' has no tokens after "
                           "preprocessing",
                           m.rows[r], m.cols[c], lang));
        }
        const double v = js_divergence(*dp, *it->second);
        m.per_language[r][c].emplace(lang, v);
        sum += v;
        ++n;
      }
      if (n > 0) m.values[r][c] = sum / static_cast<double>(n);
    }
  }

  m.metadata = {{"pivot_lang", cfg.pivot_lang},
                {"sides", side_selection_name(cfg.sides)},
                {"train_size", cfg.train_size},
                {"test_size", cfg.test_size},
                {"seed", cfg.seed},
                {"lowercase", cfg.prep.lowercase},
                {"keep_punctuation", cfg.prep.keep_punctuation},
                {"stopwords", cfg.prep.stopwords.size()},
                {"log_base", 2},
                {"version", kToolkitVersion}};
  return m;
}

std::optional<double> DivergenceMatrix::at(const std::string& row, const std::string& col) const {
  const auto r = std::find(rows.begin(), rows.end(), row);
  const auto c = std::find(cols.begin(), cols.end(), col);
  if (r == rows.end() || c == cols.end()) return std::nullopt;
  return values[static_cast<std::size_t>(r - rows.begin())][static_cast<std::size_t>(c - cols.begin())];
}

std::string DivergenceMatrix::to_csv(int precision) const {
  std::ostringstream out;
  out << "train";
  for (const auto& c : cols) out << ',' << csv_field(c);
  out << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << csv_field(rows[r]);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out << ',';
      if (values[r][c]) out << fmt::format("{:.{}f}", *values[r][c], precision);
    }
    out << '\n';
  }
  return out.str();
}

nlohmann::json DivergenceMatrix::to_json() const {
  nlohmann::json vals = nlohmann::json::array();
  nlohmann::json langs = nlohmann::json::array();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    nlohmann::json lrow = nlohmann::json::array();
    for (std::size_t c = 0; c < cols.size(); ++c) {
      row.push_back(values[r][c] ? nlohmann::json(*values[r][c]) : nlohmann::json(nullptr));
      lrow.push_back(per_language[r][c]);
    }
    vals.push_back(row);
    langs.push_back(lrow);
  }
  return {{"format", "itft-lab.divergence/1"}, {"rows", rows},          {"cols", cols},
          {"values", vals},                      {"per_language", langs}, {"metadata", metadata}};
}

DivergenceMatrix DivergenceMatrix::from_json(const nlohmann::json& j) {
  try {
    DivergenceMatrix m;
    m.rows = j.at("rows").get<std::vector<std::string>>();
    m.cols = j.at("cols").get<std::vector<std::string>>();
    const auto& vals = j.at("values");
    if (vals.size() != m.rows.size()) fail(ErrorKind::format, "divergence matrix row count mismatch");
    m.values.assign(m.rows.size(), std::vector<std::optional<double>>(m.cols.size()));
    m.per_language.assign(m.rows.size(), std::vector<std::map<std::string, double>>(m.cols.size()));
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
      if (vals[r].size() != m.cols.size()) {
        fail(ErrorKind::format, "divergence matrix column count mismatch");
      }
      for (std::size_t c = 0; c < m.cols.size(); ++c) {
        if (!vals[r][c].is_null()) m.values[r][c] = vals[r][c].get<double>();
        if (j.contains("per_language")) {
          m.per_language[r][c] = j["per_language"][r][c].get<std::map<std::string, double>>();
        }
      }
    }
    m.metadata = j.value("metadata", nlohmann::json::object());
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::format, fmt::format("malformed divergence matrix: {}", e.what()));
  }
}

std::string DivergenceMatrix::to_table() const {
  std::size_t w0 = std::string("Dataset").size();
  for (const auto& r : rows) w0 = std::max(w0, r.size() + 6);
  std::ostringstream out;
  out << fmt::format("{:<{}}", "Dataset", w0);
  std::vector<std::size_t> widths;
  for (const auto& c : cols) {
    const std::string head = c + " test";
    widths.push_back(std::max<std::size_t>(head.size(), 4));
    out << "  " << fmt::format("{:>{}}", head, widths.back());
  }
  out << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << fmt::format("{:<{}}", rows[r] + " train", w0);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const std::string cell = values[r][c] ? fmt::format("{:.2f}", *values[r][c]) : "-";
      out << "  " << fmt::format("{:>{}}", cell, widths[c]);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace itft
