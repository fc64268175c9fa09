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

#include <span>
#include <vector>

#include <Eigen/Core>

#include "itft/random.hpp"
#include "itft/toy/model.hpp"

namespace itft::toy {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// One training example as bare token ids: no BOS/EOS, PAD ids are ignored
// wherever they appear. The encoder sees `src + EOS`; the decoder is fed
// `BOS + tgt` and predicts `tgt + EOS`.
struct Example {
  std::vector<int> src;
  std::vector<int> tgt;
};

struct ForwardResult {
  double loss = 0.0;                  // mean over all predicted positions
  std::vector<double> example_loss;   // mean per example
  std::vector<Matrix> logits;         // per example: (|tgt| + 1) x vocab
  std::size_t tokens = 0;
};

// Teacher-forced forward pass with dropout disabled.
ForwardResult forward(const ModelCheckpoint& ckpt, std::span<const Example> batch,
                      bool keep_logits = true);

// Loss and its exact gradient w.r.t. the flat parameter vector. `grad` must
// have ParameterLayout::total() entries and is overwritten. Dropout is applied
// only when `rng` is non-null.
double loss_and_gradient(const ModelConfig& config, std::span<const double> params,
                         std::span<const Example> batch, std::span<double> grad,
                         Rng* rng = nullptr);

// Argmax decoding from BOS until EOS or `max_out_len` tokens. PAD and BOS are
// never emitted; EOS is not included in the result.
std::vector<int> greedy_decode(const ModelCheckpoint& ckpt, const std::vector<int>& src,
                               int max_out_len);

// Drops PAD ids and checks lengths and id ranges against the config.
Example sanitize(const ModelConfig& config, Example ex);

}  // namespace itft::toy
