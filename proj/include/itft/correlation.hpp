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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "itft/divergence.hpp"
#include "itft/metrics.hpp"
#include "itft/orchestrator.hpp"

namespace itft {

enum class CorrelationStage { final_stage, intermediate };

std::string correlation_stage_name(CorrelationStage s);
CorrelationStage parse_correlation_stage(const std::string& name);

// Selects which (record, test, direction) scores become samples. Each
// sample pairs JSD(stage domain, test domain) with that score.
struct CorrelationOptions {
  CorrelationStage stage = CorrelationStage::final_stage;
  bool out_domain_only = true;
  std::optional<Direction> direction;  // all directions when unset
  std::optional<std::size_t> intermediate_size;
  std::optional<std::size_t> final_size;
};

struct CorrelationSample {
  std::string plan_id;
  std::string test;
  Direction direction = Direction::forward;
  std::string stage_domain;
  std::string test_domain;
  double divergence = 0.0;
  double spbleu = 0.0;
};

struct DivergenceCorrelation {
  CorrelationReport report;
  std::vector<CorrelationSample> samples;

  nlohmann::json to_json() const;
};

// Matrix rows are looked up by stage domain and columns by test domain.
// Records lacking the chosen stage are skipped; a missing matrix cell is an
// error naming it.
DivergenceCorrelation correlate_divergence(std::span<const RunRecord> records,
                                           const DivergenceMatrix& matrix,
                                           const CorrelationOptions& options = {});

}  // namespace itft
