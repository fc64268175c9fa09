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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "test_helpers.hpp"

namespace fs = std::filesystem;
using itft::testing::read_file;
using itft::testing::TempDir;
using itft::testing::write_file;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult cli(const TempDir& dir, const std::string& args) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const auto cmd = fmt::format("ITFT_LAB_HOME='{}' '{}' {} >'{}' 2>'{}'", (dir / "home").string(), ITFT_CLI_PATH,
                               args, out.string(), err.string());
  const int rc = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

std::string fixture(const std::string& name) {
  return (fs::path(ITFT_FIXTURE_DIR) / "divergence" / name).string();
}

}  // namespace

TEST_CASE("cli: usage errors exit 2") {
  TempDir dir("cli");
  CHECK(cli(dir, "").code == 2);
  CHECK(cli(dir, "nonsense").code == 2);
  CHECK(cli(dir, "bleu --hyp only.txt").code == 2);
  CHECK(cli(dir, "--help").code == 0);
}

TEST_CASE("cli: a missing input is reported as JSON") {
  TempDir dir("cli");
  const auto r = cli(dir, fmt::format("--json bleu --hyp '{}' --ref '{}'", (dir / "nope.txt").string(),
                                      (dir / "nope.txt").string()));
  CHECK(r.code == 2);
  const auto j = nlohmann::json::parse(r.err);
  CHECK(j.contains("error"));
  CHECK(j.at("error").at("message").get<std::string>().find("nope.txt") != std::string::npos);
}

TEST_CASE("cli: bleu of a file against itself is 100") {
  TempDir dir("cli");
  write_file(dir / "h.txt", "the cat sat on the mat\nand the dog lay by the door\n");
  const auto r = cli(dir, fmt::format("bleu --hyp '{}' --ref '{}' --format json", (dir / "h.txt").string(),
                                      (dir / "h.txt").string()));
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out).at("score").get<double>() == 100.0);
  CHECK(cli(dir, fmt::format("spbleu --hyp '{0}' --ref '{0}'", (dir / "h.txt").string())).code == 2);
}

TEST_CASE("cli: divergence on the bundled corpora matches the frozen matrix") {
  TempDir dir("cli");
  const auto store = (dir / "store").string();
  const std::vector<std::pair<std::string, std::string>> corpora = {{"bible", "si"}, {"gov", "si"}, {"news", "ta"}};
  for (const auto& [label, xx] : corpora) {
    const auto r = cli(dir, fmt::format("ingest --source '{}' --target '{}' --source-lang en --target-lang {} "
                                        "--id {} --out '{}'",
                                        fixture(label + ".en"), fixture(label + "." + xx), xx, label, store));
    REQUIRE(r.code == 0);
  }
  std::string sets;
  for (const auto& [label, xx] : corpora) {
    sets += fmt::format(" --train {0}={1}/{0}.json --test {0}={1}/{0}.json", label, store);
  }
  const auto r = cli(dir, "divergence --format json" + sets);
  REQUIRE(r.code == 0);
  const auto got = nlohmann::json::parse(r.out);
  const auto want = nlohmann::json::parse(read_file(fixture("expected.json")));
  const auto labels = want.at("labels");
  REQUIRE(got.at("rows") == labels);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = 0; j < labels.size(); ++j) {
      CHECK(got.at("values")[i][j].get<double>() ==
            doctest::Approx(want.at("values")[i][j].get<double>()).epsilon(1e-9));
    }
  }
  const auto missing = cli(dir, fmt::format("divergence --train a={0}/bible.json --test b={0}/gov.json "
                                            "--stopwords '{1}'",
                                            store, (dir / "absent.txt").string()));
  CHECK(missing.code == 2);
}

TEST_CASE("cli: a grid run is recorded, skipped on rerun and reported") {
  TempDir dir("cli");
  const auto store = (dir / "store").string();
  REQUIRE(cli(dir, fmt::format("synth --pairs 64 --test-pairs 8 --lexicon 10 --grammar 3 --vocab-size 80 "
                               "--out '{}'",
                               store))
              .code == 0);
  auto grid = nlohmann::json::parse(read_file(dir / "store" / "grid.json"));
  grid["base"]["model"].update({{"d_model", 8}, {"ffn_dim", 16}, {"enc_layers", 1}, {"dec_layers", 1}});
  grid["intermediate_sizes"] = {0, 32};
  grid["final_sizes"] = {16};
  grid["directions"] = {"forward"};
  grid["train"]["epochs"] = 1;
  write_file(dir / "grid.json", grid.dump());

  const auto plans = (dir / "plans.json").string();
  REQUIRE(cli(dir, fmt::format("plan --grid '{}' --corpora '{}' --out '{}'", (dir / "grid.json").string(), store,
                               plans))
              .code == 0);
  const auto run = fmt::format("run --plan '{}' --corpora '{}'", plans, store);
  const auto first = cli(dir, run);
  REQUIRE(first.code == 0);
  CHECK(first.out.find("2 cells: 2 ran, 0 skipped, 0 failed") != std::string::npos);
  const auto again = cli(dir, run);
  REQUIRE(again.code == 0);
  CHECK(again.out.find("2 cells: 0 ran, 2 skipped, 0 failed") != std::string::npos);

  const auto report = cli(dir, "report --group intermediate_size --format csv");
  REQUIRE(report.code == 0);
  CHECK(report.out.rfind("intermediate_size,", 0) == 0);
  CHECK(report.out.find("\n0,") != std::string::npos);
  CHECK(report.out.find("\n32,") != std::string::npos);
  CHECK(cli(dir, "report --group colour").code == 2);
}
