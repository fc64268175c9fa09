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

#include "itft/correlation.hpp"

#include <fmt/format.h>

#include "itft/error.hpp"

namespace itft {

std::string correlation_stage_name(CorrelationStage s) {
  return s == CorrelationStage::final_stage ? "final" : "intermediate";
}

CorrelationStage parse_correlation_stage(const std::string& name) {
  if (name == "final") return CorrelationStage::final_stage;
  if (name == "intermediate") return CorrelationStage::intermediate;
  fail(ErrorKind::invalid_argument, fmt::format("unknown stage '{}'", name));
}

nlohmann::json DivergenceCorrelation::to_json() const {
  nlohmann::json s = nlohmann::json::array();
  for (const auto& x : samples) {
    s.push_back({{"plan_id", x.plan_id},
                 {"test", x.test},
                 {"direction", direction_name(x.direction)},
                 {"stage_domain", x.stage_domain},
                 {"test_domain", x.test_domain},
                 {"divergence", x.divergence},
                 {"spbleu", x.spbleu}});
  }
  return {{"report", report.to_json()}, {"samples", s}};
}

DivergenceCorrelation correlate_divergence(std::span<const RunRecord> records,
                                           const DivergenceMatrix& matrix,
                                           const CorrelationOptions& options) {
  DivergenceCorrelation out;
  std::vector<double> xs, ys;
  for (const auto& rec : records) {
    if (!rec.ok()) continue;
    const auto& p = rec.plan;
    const auto& stage = options.stage == CorrelationStage::final_stage ? p.final_stage : p.intermediate;
    if (!stage) continue;
    if (options.intermediate_size && (p.intermediate ? p.intermediate->size : 0) != *options.intermediate_size) {
      continue;
    }
    if (options.final_size && (p.final_stage ? p.final_stage->size : 0) != *options.final_size) continue;
    for (const auto& s : rec.scores) {
      if (options.out_domain_only && s.in_domain) continue;
      if (options.direction && s.direction != *options.direction) continue;
      std::string test_domain;
      for (const auto& t : p.tests) {
        if (t.label == s.test) test_domain = t.domain;
      }
      const auto d = matrix.at(stage->domain, test_domain);
      if (!d) {
        fail(ErrorKind::invalid_argument,
             fmt::format("divergence matrix has no value for ({}, {})", stage->domain, test_domain));
      }
      out.samples.push_back({p.plan_id, s.test, s.direction, stage->domain, test_domain, *d, s.bleu.score});
      xs.push_back(*d);
      ys.push_back(s.bleu.score);
    }
  }
  out.report = pearson(xs, ys);
  return out;
}

}  // namespace itft
