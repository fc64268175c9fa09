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

#include <doctest.h>

#include <string>
#include <vector>

#include "itft/correlation.hpp"
#include "itft/error.hpp"

using namespace itft;

namespace {

DivergenceMatrix matrix() {
  DivergenceMatrix m;
  m.rows = {"bible", "gov"};
  m.cols = {"bible", "gov", "news"};
  m.values = {{0.1, 0.6, 0.8}, {0.6, 0.1, 0.3}};
  m.per_language.assign(2, std::vector<std::map<std::string, double>>(3));
  return m;
}

RunRecord record(const std::string& final_domain, std::size_t final_size,
                 const std::vector<std::pair<std::string, double>>& scores) {
  RunRecord r;
  r.plan.plan_id = final_domain + std::to_string(final_size);
  r.plan.final_stage = StageSpec{"c", final_domain, final_size, {}};
  r.plan.intermediate = StageSpec{"i", "bible", 100, {}};
  for (const auto& [domain, bleu] : scores) {
    r.plan.tests.push_back({domain + ".test", domain, domain, domain == final_domain});
    ScoreEntry e;
    e.test = domain;
    e.in_domain = domain == final_domain;
    e.bleu.score = bleu;
    r.scores.push_back(e);
  }
  return r;
}

}  // namespace

TEST_CASE("samples pair each out-of-domain score with its divergence") {
  const std::vector<RunRecord> recs = {
      record("gov", 64, {{"gov", 40}, {"bible", 5}, {"news", 20}}),
      record("bible", 64, {{"bible", 50}, {"gov", 8}, {"news", 4}}),
  };
  const auto c = correlate_divergence(recs, matrix());
  REQUIRE(c.samples.size() == 4);
  CHECK(c.report.n == 4);
  CHECK(c.samples[0].divergence == 0.6);
  CHECK(c.samples[0].spbleu == 5);
  CHECK(c.report.pearson_r < 0);

  CorrelationOptions all;
  all.out_domain_only = false;
  CHECK(correlate_divergence(recs, matrix(), all).samples.size() == 6);

  CorrelationOptions mid;
  mid.stage = CorrelationStage::intermediate;
  const auto by_mid = correlate_divergence(recs, matrix(), mid);
  for (const auto& s : by_mid.samples) CHECK(s.stage_domain == "bible");
}

TEST_CASE("size filters and missing cells") {
  const std::vector<RunRecord> recs = {
      record("gov", 64, {{"gov", 40}, {"bible", 5}, {"news", 20}}),
      record("gov", 128, {{"gov", 45}, {"bible", 6}, {"news", 22}}),
      record("bible", 64, {{"bible", 50}, {"gov", 8}, {"news", 4}}),
  };
  CorrelationOptions o;
  o.final_size = 64;
  CHECK(correlate_divergence(recs, matrix(), o).samples.size() == 4);
  o.final_size = 128;
  CHECK_THROWS_AS(correlate_divergence(recs, matrix(), o), Error);  // two samples only

  const std::vector<RunRecord> off = {record("gov", 64, {{"gov", 40}, {"legal", 5}, {"news", 20}}),
                                      record("bible", 64, {{"bible", 1}, {"gov", 2}, {"news", 3}})};
  CHECK_THROWS_AS(correlate_divergence(off, matrix()), Error);
  CHECK(parse_correlation_stage(correlation_stage_name(CorrelationStage::intermediate)) ==
        CorrelationStage::intermediate);
}
