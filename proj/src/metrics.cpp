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

#include "itft/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "itft/error.hpp"
#include "itft/version.hpp"

namespace itft {
namespace {

using NgramCounts = std::map<std::vector<std::string_view>, std::int64_t>;

NgramCounts count_ngrams(const TokenList& tokens, int n) {
  NgramCounts counts;
  const auto len = static_cast<int>(tokens.size());
  for (int i = 0; i + n <= len; ++i) {
    std::vector<std::string_view> gram;
    gram.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) gram.emplace_back(tokens[static_cast<std::size_t>(i + k)]);
    ++counts[gram];
  }
  return counts;
}

TokenList split_whitespace(const std::string& s) {
  TokenList out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace

std::string bleu_signature(const std::string& tokenizer) {
  return fmt::format("nrefs:1|order:{}|smooth:exp|tok:{}|version:{}", kBleuOrder, tokenizer,
                     kToolkitVersion);
}

BleuScore bleu(std::span<const TokenList> hypotheses, std::span<const TokenList> references,
               const std::string& tokenizer) {
  if (hypotheses.size() != references.size()) {
    fail(ErrorKind::alignment, fmt::format("BLEU: {} hypotheses but {} references",
                                           hypotheses.size(), references.size()));
  }
  if (hypotheses.empty()) fail(ErrorKind::invalid_argument, "BLEU: empty corpus");

  BleuScore s;
  s.signature = bleu_signature(tokenizer);
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const auto& hyp = hypotheses[i];
    const auto& ref = references[i];
    s.hyp_len += static_cast<std::int64_t>(hyp.size());
    s.ref_len += static_cast<std::int64_t>(ref.size());
    for (int n = 1; n <= kBleuOrder; ++n) {
      const auto h = count_ngrams(hyp, n);
      const auto r = count_ngrams(ref, n);
      for (const auto& [gram, c] : h) {
        s.total[n - 1] += c;
        if (auto it = r.find(gram); it != r.end()) s.correct[n - 1] += std::min(c, it->second);
      }
    }
  }

  if (s.hyp_len < s.ref_len) {
    s.brevity_penalty =
        s.hyp_len > 0 ? std::exp(1.0 - static_cast<double>(s.ref_len) / s.hyp_len) : 0.0;
  }

  const bool any_match = std::any_of(s.correct.begin(), s.correct.end(), [](auto c) { return c > 0; });
  if (!any_match) return s;

  double smooth = 1.0;
  double log_sum = 0.0;
  bool zero = false;
  for (int n = 0; n < kBleuOrder; ++n) {
    if (s.total[n] == 0) {
      zero = true;  // no n-grams of this order at all: score is 0
      break;
    }
    if (s.correct[n] == 0) {
      smooth *= 2.0;
      s.precisions[n] = 100.0 / (smooth * static_cast<double>(s.total[n]));
    } else {
      s.precisions[n] = 100.0 * static_cast<double>(s.correct[n]) / static_cast<double>(s.total[n]);
    }
    log_sum += std::log(s.precisions[n] / 100.0);
  }
  // A perfect match scores exactly 100.
  s.score = zero ? 0.0 : 100.0 * s.brevity_penalty * std::exp(log_sum / kBleuOrder);
  return s;
}

BleuScore bleu_sentences(std::span<const std::string> hypotheses,
                         std::span<const std::string> references) {
  std::vector<TokenList> h, r;
  for (const auto& s : hypotheses) h.push_back(split_whitespace(s));
  for (const auto& s : references) r.push_back(split_whitespace(s));
  return bleu(h, r, "word");
}

BleuScore sp_bleu(const SubwordModel& model, std::span<const std::string> hypotheses,
                  std::span<const std::string> references) {
  std::vector<TokenList> h, r;
  h.reserve(hypotheses.size());
  r.reserve(references.size());
  for (const auto& s : hypotheses) h.push_back(model.encode_pieces(s));
  for (const auto& s : references) r.push_back(model.encode_pieces(s));
  return bleu(h, r, "sw-" + model.id());
}

nlohmann::json BleuScore::to_json() const {
  return {{"score", score},
          {"precisions", precisions},
          {"counts", {{"correct", correct}, {"total", total}}},
          {"bp", brevity_penalty},
          {"lens", {{"hyp", hyp_len}, {"ref", ref_len}}},
          {"signature", signature}};
}

BleuScore BleuScore::from_json(const nlohmann::json& j) {
  try {
    BleuScore s;
    s.score = j.at("score");
    s.precisions = j.at("precisions");
    if (j.contains("counts")) {
      s.correct = j["counts"].at("correct");
      s.total = j["counts"].at("total");
    }
    s.brevity_penalty = j.at("bp");
    s.hyp_len = j.at("lens").at("hyp");
    s.ref_len = j.at("lens").at("ref");
    s.signature = j.at("signature");
    return s;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::format, fmt::format("malformed BLEU score: {}", e.what()));
  }
}

// ---------------------------------------------------------------------------

CorrelationReport pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    fail(ErrorKind::alignment,
         fmt::format("pearson: {} x values but {} y values", xs.size(), ys.size()));
  }
  if (xs.size() < 3) {
    fail(ErrorKind::invalid_argument,
         fmt::format("pearson: need at least 3 samples, got {}", xs.size()));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) fail(ErrorKind::numeric, "undefined correlation (constant input)");

  CorrelationReport rep;
  rep.n = xs.size();
  rep.pearson_r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  rep.r_squared = rep.pearson_r * rep.pearson_r;
  for (std::size_t i = 0; i < xs.size(); ++i) rep.pairs.emplace_back(xs[i], ys[i]);
  return rep;
}

nlohmann::json CorrelationReport::to_json() const {
  nlohmann::json p = nlohmann::json::array();
  for (const auto& [x, y] : pairs) p.push_back({x, y});
  return {{"n", n}, {"pearson_r", pearson_r}, {"r_squared", r_squared}, {"pairs", p}};
}

}  // namespace itft
