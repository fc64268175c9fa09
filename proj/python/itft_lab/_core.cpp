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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "itft/corpus.hpp"
#include "itft/divergence.hpp"
#include "itft/error.hpp"
#include "itft/metrics.hpp"
#include "itft/orchestrator.hpp"
#include "itft/random.hpp"
#include "itft/subword.hpp"
#include "itft/textprep.hpp"
#include "itft/toy/synthetic.hpp"
#include "itft/version.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;

namespace {

using Pairs = std::vector<std::pair<std::string, std::string>>;

Pairs pairs_of(const itft::ParallelCorpus& c) {
  Pairs out;
  out.reserve(c.size());
  for (const auto& p : c.pairs()) out.emplace_back(p.source, p.target);
  return out;
}

itft::TokenDistribution to_dist(const std::map<std::string, double>& p) {
  return itft::TokenDistribution::from_probabilities(p);
}

// JSON crosses the boundary as text; the Python side parses it.
std::vector<itft::LabeledCorpora> labeled(const std::map<std::string, std::vector<fs::path>>& sets) {
  std::vector<itft::LabeledCorpora> out;
  for (const auto& [label, sidecars] : sets) {
    itft::LabeledCorpora lc{label, {}};
    for (const auto& s : sidecars) lc.corpora.push_back(itft::read_corpus(s));
    out.push_back(std::move(lc));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of itft-lab: divergence, BLEU, subword models and experiment records.";
  m.attr("__version__") = std::string(itft::kToolkitVersion);

  py::register_exception<itft::Error>(m, "Error", PyExc_RuntimeError);

  m.def("word_tokenize", &itft::word_tokenize, py::arg("text"), py::arg("lowercase") = false);
  m.def("english_stopwords", [] {
    const auto& s = itft::english_stopwords();
    return std::vector<std::string>(s.begin(), s.end());
  });
  m.def(
      "token_counts",
      [](const std::vector<std::string>& texts, const std::set<std::string>& stopwords, bool lowercase,
         bool keep_punctuation) {
        itft::DivergencePrepConfig cfg{stopwords, lowercase, keep_punctuation};
        return itft::prep_for_divergence(texts, cfg);
      },
      py::arg("texts"), py::arg("stopwords") = std::set<std::string>{}, py::arg("lowercase") = true,
      py::arg("keep_punctuation") = true);

  m.def(
      "js_divergence",
      [](const std::map<std::string, double>& p, const std::map<std::string, double>& q) {
        return itft::js_divergence(to_dist(p), to_dist(q));
      },
      py::arg("p"), py::arg("q"), "Jensen-Shannon divergence in bits; inputs are normalised.");
  m.def(
      "kl_divergence",
      [](const std::map<std::string, double>& p, const std::map<std::string, double>& q) {
        return itft::kl_divergence(to_dist(p), to_dist(q));
      },
      py::arg("p"), py::arg("q"));
  m.def(
      "divergence_matrix_json",
      [](const std::map<std::string, std::vector<fs::path>>& train,
         const std::map<std::string, std::vector<fs::path>>& test, const std::string& pivot,
         std::size_t train_size, std::size_t test_size, std::uint64_t seed) {
        itft::DivergenceConfig cfg;
        cfg.pivot_lang = pivot;
        cfg.train_size = train_size;
        cfg.test_size = test_size;
        cfg.seed = seed;
        return itft::divergence_matrix(labeled(train), labeled(test), cfg).to_json().dump();
      },
      py::arg("train"), py::arg("test"), py::arg("pivot") = "en", py::arg("train_size") = 25000,
      py::arg("test_size") = 1000, py::arg("seed") = itft::kDefaultSeed);

  m.def(
      "bleu_json",
      [](const std::vector<std::string>& hyps, const std::vector<std::string>& refs) {
        return itft::bleu_sentences(hyps, refs).to_json().dump();
      },
      py::arg("hypotheses"), py::arg("references"));

  py::class_<itft::SubwordModel>(m, "SubwordModel")
      .def_static(
          "train", [](const std::vector<std::string>& pool, int size) { return itft::train_subword(pool, size); },
          py::arg("pool"), py::arg("vocab_size"))
      .def_static("load", &itft::SubwordModel::load, py::arg("path"))
      .def("save", &itft::SubwordModel::save, py::arg("path"))
      .def("encode", &itft::SubwordModel::encode, py::arg("text"))
      .def("encode_pieces", &itft::SubwordModel::encode_pieces, py::arg("text"))
      .def("decode", [](const itft::SubwordModel& s, const std::vector<int>& ids) { return s.decode(ids); })
      .def_property_readonly("vocab_size", &itft::SubwordModel::vocab_size)
      .def_property_readonly("id", &itft::SubwordModel::id)
      .def("__len__", &itft::SubwordModel::vocab_size);
  m.def("minimum_vocab_size", [](const std::vector<std::string>& pool) { return itft::minimum_vocab_size(pool); });
  m.def(
      "sp_bleu_json",
      [](const itft::SubwordModel& model, const std::vector<std::string>& hyps,
         const std::vector<std::string>& refs) { return itft::sp_bleu(model, hyps, refs).to_json().dump(); },
      py::arg("model"), py::arg("hypotheses"), py::arg("references"));

  m.def(
      "pearson",
      [](const std::vector<double>& xs, const std::vector<double>& ys) {
        const auto r = itft::pearson(xs, ys);
        return py::make_tuple(r.pearson_r, r.r_squared);
      },
      py::arg("xs"), py::arg("ys"), "Returns (r, r squared).");

  m.def("read_corpus", [](const fs::path& sidecar) { return pairs_of(itft::read_corpus(sidecar)); },
        py::arg("sidecar"));
  m.def(
      "synthetic_domains",
      [](double overlap, int grammar, int lexicon, std::size_t n, std::uint64_t seed) {
        const auto [a, b] = itft::toy::gen_synthetic_domains(overlap, grammar, lexicon, n, seed);
        return py::make_tuple(pairs_of(a), pairs_of(b));
      },
      py::arg("overlap"), py::arg("grammar") = 12, py::arg("lexicon") = 60, py::arg("n_pairs") = 2048,
      py::arg("seed") = itft::kDefaultSeed);

  m.def(
      "records_json",
      [](const fs::path& dir) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& r : itft::RecordStore(dir).list()) out.push_back(r.to_json());
        return out.dump();
      },
      py::arg("store"));
  m.def(
      "aggregate_json",
      [](const fs::path& dir, const std::vector<std::string>& group_by) {
        const auto records = itft::RecordStore(dir).list();
        return itft::aggregate(records, group_by).to_json().dump();
      },
      py::arg("store"), py::arg("group_by"));
}
