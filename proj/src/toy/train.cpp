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

#include "itft/toy/train.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "itft/error.hpp"

namespace itft::toy {

std::vector<Example> encode_corpus(const SubwordModel& vocab, const ParallelCorpus& corpus,
                                   const ModelConfig& config) {
  if (vocab.vocab_size() != config.vocab_size ||
      (!config.vocab_id.empty() && vocab.id() != config.vocab_id)) {
    fail(ErrorKind::invalid_argument,
         fmt::format("subword model {} does not match the checkpoint vocabulary {}", vocab.id(),
                     config.vocab_id));
  }
  std::vector<Example> out;
  out.reserve(corpus.size());
  const auto limit = static_cast<std::size_t>(config.max_len);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& p = corpus.pairs()[i];
    Example ex{vocab.encode(p.source), vocab.encode(p.target)};
    if (ex.src.size() + 1 > limit || ex.tgt.size() + 1 > limit) {
      fail(ErrorKind::invalid_argument,
           fmt::format("corpus '{}' pair {} encodes to {}/{} tokens, over max_len {}", corpus.id(),
                       i, ex.src.size(), ex.tgt.size(), config.max_len));
    }
    out.push_back(std::move(ex));
  }
  return out;
}

ModelCheckpoint train_examples(const ModelCheckpoint& ckpt, std::span<const Example> examples,
                               const TrainConfig& cfg, LineageEntry entry, TrainStats* stats) {
  cfg.validate();
  if (examples.empty()) fail(ErrorKind::invalid_argument, "no training examples");
  ModelCheckpoint out = ckpt;
  const std::size_t n_params = out.parameters.size();
  std::vector<double> grad(n_params), m(n_params, 0.0), v(n_params, 0.0);
  Rng rng(mix_seed(cfg.seed, 0x7a11));
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(cfg.batch_size);

  std::int64_t t = 0;
  double epoch_loss = 0.0;
  bool done = false;
  for (int epoch = 0; epoch < cfg.epochs && !done; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      std::vector<Example> mb;
      for (std::size_t i = start; i < std::min(order.size(), start + batch); ++i) {
        mb.push_back(examples[order[i]]);
      }
      const double loss = loss_and_gradient(out.config, out.parameters, mb, grad, &rng);
      loss_sum += loss;
      ++batches;
      if (stats) stats->step_loss.push_back(loss);

      double scale = 1.0;
      if (cfg.clip_norm > 0.0) {
        double sq = 0.0;
        for (double g : grad) sq += g * g;
        const double norm = std::sqrt(sq);
        if (norm > cfg.clip_norm) scale = cfg.clip_norm / norm;
      }
      ++t;
      const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
      const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
      const double step = cfg.lr / bc1;
      for (std::size_t i = 0; i < n_params; ++i) {
        const double g = grad[i] * scale;
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        out.parameters[i] -= step * m[i] / (std::sqrt(v[i] / bc2) + cfg.eps);
      }
      if (cfg.max_steps > 0 && t >= cfg.max_steps) {
        done = true;
        break;
      }
    }
    epoch_loss = loss_sum / static_cast<double>(batches);
  }
  out.step += t;
  out.lineage.push_back(std::move(entry));
  if (stats) stats->final_epoch_loss = epoch_loss;
  return out;
}

ModelCheckpoint fine_tune(const ModelCheckpoint& ckpt, const SubwordModel& vocab,
                          const ParallelCorpus& corpus, const TrainConfig& cfg,
                          const std::string& stage, TrainStats* stats) {
  const auto examples = encode_corpus(vocab, corpus, ckpt.config);
  return train_examples(ckpt, examples, cfg,
                        LineageEntry{stage, corpus.id(), corpus.size(), cfg.epochs, cfg.seed}, stats);
}

std::vector<std::string> translate(const ModelCheckpoint& ckpt, const SubwordModel& vocab,
                                   std::span<const std::string> sources, int max_out_len) {
  std::vector<std::string> out;
  out.reserve(sources.size());
  for (const auto& s : sources) {
    auto ids = vocab.encode(s);
    if (ids.size() + 1 > static_cast<std::size_t>(ckpt.config.max_len)) {
      ids.resize(static_cast<std::size_t>(ckpt.config.max_len - 1));
    }
    const int cap = max_out_len > 0 ? max_out_len
                                    : std::min(ckpt.config.max_len - 1,
                                               2 * static_cast<int>(ids.size()) + 10);
    out.push_back(vocab.decode(greedy_decode(ckpt, ids, cap)));
  }
  return out;
}

}  // namespace itft::toy
