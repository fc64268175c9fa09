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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "itft/random.hpp"

namespace itft::toy {

struct ModelConfig {
  int d_model = 64;
  int heads = 2;
  int enc_layers = 2;
  int dec_layers = 2;
  int ffn_dim = 128;
  double dropout = 0.1;
  int max_len = 200;
  int vocab_size = 0;
  std::string vocab_id;  // SubwordModel::id()

  void validate() const;
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct TrainConfig {
  int epochs = 3;
  double lr = 3e-4;
  // Learning rate used for the pretrained-model fine-tuning this toy setup
  // stands in for; recorded, not used by the toy trainer.
  static constexpr double kPretrainedReferenceLr = 5e-5;
  int batch_size = 10;
  std::uint64_t seed = kDefaultSeed;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 1.0;  // global gradient norm clip; <= 0 disables
  std::int64_t max_steps = 0;  // 0: epochs only

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct LineageEntry {
  std::string stage;
  std::string corpus_id;
  std::size_t size = 0;
  int epochs = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const LineageEntry&, const LineageEntry&) = default;
};

struct TensorSpec {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(rows) * cols; }
  friend bool operator==(const TensorSpec&, const TensorSpec&) = default;
};

// Offsets of all named tensors for one architecture, in a fixed order.
class ParameterLayout {
 public:
  explicit ParameterLayout(const ModelConfig& config);

  const std::vector<TensorSpec>& tensors() const noexcept { return tensors_; }
  std::size_t total() const noexcept { return total_; }
  const TensorSpec& at(const std::string& name) const;

  // Tensor family a flat parameter index belongs to ("enc.0.attn.wq" -> "attn.wq").
  const TensorSpec& tensor_of(std::size_t index) const;

 private:
  std::vector<TensorSpec> tensors_;
  std::size_t total_ = 0;
};

std::size_t parameter_count(const ModelConfig& config);

struct ModelCheckpoint {
  ModelConfig config;
  std::vector<double> parameters;  // flat, laid out by ParameterLayout
  std::int64_t step = 0;
  std::vector<LineageEntry> lineage;

  // FNV-1a over config, lineage, step and raw parameter bytes.
  std::string digest() const;

  friend bool operator==(const ModelCheckpoint&, const ModelCheckpoint&) = default;
};

// Scaled-uniform initialization: matrices U(±sqrt(6/(fan_in+fan_out))),
// embeddings U(±sqrt(3/d)), output projection U(±0.5/sqrt(d)), biases 0,
// norm gains 1.
ModelCheckpoint init_model(const ModelConfig& config, std::uint64_t seed);

// Binary checkpoint: "ITFTCKPT", u32 version, u64 header length, JSON header
// (config, step, lineage, tensor table), then little-endian float64 values.
void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path);
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);

nlohmann::json lineage_to_json(const std::vector<LineageEntry>& lineage);
std::vector<LineageEntry> lineage_from_json(const nlohmann::json& j);

}  // namespace itft::toy
