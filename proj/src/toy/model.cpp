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

#include "itft/toy/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "itft/error.hpp"
#include "itft/hash.hpp"

namespace itft::toy {

void ModelConfig::validate() const {
  if (d_model <= 0 || heads <= 0 || enc_layers < 0 || dec_layers < 0 || ffn_dim <= 0) {
    fail(ErrorKind::invalid_argument, "model dimensions must be positive");
  }
  if (d_model % heads != 0) {
    fail(ErrorKind::invalid_argument,
         fmt::format("d_model {} is not divisible by heads {}", d_model, heads));
  }
  if (dropout < 0.0 || dropout >= 1.0) {
    fail(ErrorKind::invalid_argument, fmt::format("dropout {} outside [0, 1)", dropout));
  }
  if (max_len < 2) fail(ErrorKind::invalid_argument, "max_len must be at least 2");
  if (vocab_size <= 4) {
    fail(ErrorKind::invalid_argument, fmt::format("vocab_size {} leaves no symbols", vocab_size));
  }
}

nlohmann::json ModelConfig::to_json() const {
  return {{"d_model", d_model},       {"heads", heads},     {"enc_layers", enc_layers},
          {"dec_layers", dec_layers}, {"ffn_dim", ffn_dim}, {"dropout", dropout},
          {"max_len", max_len},       {"vocab_size", vocab_size}, {"vocab_id", vocab_id}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.d_model = j.value("d_model", c.d_model);
  c.heads = j.value("heads", c.heads);
  c.enc_layers = j.value("enc_layers", c.enc_layers);
  c.dec_layers = j.value("dec_layers", c.dec_layers);
  c.ffn_dim = j.value("ffn_dim", c.ffn_dim);
  c.dropout = j.value("dropout", c.dropout);
  c.max_len = j.value("max_len", c.max_len);
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.vocab_id = j.value("vocab_id", c.vocab_id);
  return c;
}

void TrainConfig::validate() const {
  if (epochs < 1) fail(ErrorKind::invalid_argument, "epochs must be at least 1");
  if (!(lr > 0.0)) fail(ErrorKind::invalid_argument, "learning rate must be positive");
  if (batch_size < 1) fail(ErrorKind::invalid_argument, "batch_size must be at least 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && eps > 0.0)) {
    fail(ErrorKind::invalid_argument, "invalid Adam hyperparameters");
  }
  if (max_steps < 0) fail(ErrorKind::invalid_argument, "max_steps must be non-negative");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"epochs", epochs}, {"lr", lr},       {"batch_size", batch_size},
          {"seed", seed},     {"beta1", beta1}, {"beta2", beta2},
          {"eps", eps},       {"clip_norm", clip_norm}, {"max_steps", max_steps}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.epochs = j.value("epochs", c.epochs);
  c.lr = j.value("lr", c.lr);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.seed = j.value("seed", c.seed);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.eps = j.value("eps", c.eps);
  c.clip_norm = j.value("clip_norm", c.clip_norm);
  c.max_steps = j.value("max_steps", c.max_steps);
  return c;
}

// ---------------------------------------------------------------------------

ParameterLayout::ParameterLayout(const ModelConfig& c) {
  c.validate();
  const int d = c.d_model;
  const int f = c.ffn_dim;
  const int v = c.vocab_size;
  auto add = [&](std::string name, int rows, int cols) {
    tensors_.push_back({std::move(name), rows, cols, total_});
    total_ += static_cast<std::size_t>(rows) * cols;
  };
  auto norm = [&](const std::string& p) {
    add(p + ".gamma", 1, d);
    add(p + ".beta", 1, d);
  };
  auto attention = [&](const std::string& p) {
    for (const char* m : {"q", "k", "v", "o"}) {
      add(fmt::format("{}.w{}", p, m), d, d);
      add(fmt::format("{}.b{}", p, m), 1, d);
    }
  };
  auto ffn = [&](const std::string& p) {
    add(p + ".w1", d, f);
    add(p + ".b1", 1, f);
    add(p + ".w2", f, d);
    add(p + ".b2", 1, d);
  };

  add("src_embed", v, d);
  add("tgt_embed", v, d);
  for (int l = 0; l < c.enc_layers; ++l) {
    const auto p = fmt::format("enc.{}", l);
    norm(p + ".ln1");
    attention(p + ".attn");
    norm(p + ".ln2");
    ffn(p + ".ffn");
  }
  norm("enc.ln");
  for (int l = 0; l < c.dec_layers; ++l) {
    const auto p = fmt::format("dec.{}", l);
    norm(p + ".ln1");
    attention(p + ".self");
    norm(p + ".ln2");
    attention(p + ".cross");
    norm(p + ".ln3");
    ffn(p + ".ffn");
  }
  norm("dec.ln");
  add("out.w", d, v);
  add("out.b", 1, v);
}

const TensorSpec& ParameterLayout::at(const std::string& name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) return t;
  }
  fail(ErrorKind::invalid_argument, fmt::format("no tensor named '{}'", name));
}

const TensorSpec& ParameterLayout::tensor_of(std::size_t index) const {
  auto it = std::upper_bound(tensors_.begin(), tensors_.end(), index,
                             [](std::size_t i, const TensorSpec& t) { return i < t.offset; });
  if (it == tensors_.begin() || index >= total_) {
    fail(ErrorKind::invalid_argument, fmt::format("parameter index {} out of range", index));
  }
  return *std::prev(it);
}

std::size_t parameter_count(const ModelConfig& config) { return ParameterLayout(config).total(); }

// ---------------------------------------------------------------------------

namespace {

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

nlohmann::json header_json(const ModelCheckpoint& ckpt, const ParameterLayout& layout) {
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& t : layout.tensors()) {
    tensors.push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}, {"offset", t.offset}});
  }
  return {{"format", "itft-lab.checkpoint"},
          {"config", ckpt.config.to_json()},
          {"step", ckpt.step},
          {"lineage", lineage_to_json(ckpt.lineage)},
          {"tensors", tensors},
          {"count", layout.total()}};
}

constexpr char kMagic[8] = {'I', 'T', 'F', 'T', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace

ModelCheckpoint init_model(const ModelConfig& config, std::uint64_t seed) {
  const ParameterLayout layout(config);
  ModelCheckpoint ckpt;
  ckpt.config = config;
  ckpt.parameters.assign(layout.total(), 0.0);
  const double d = config.d_model;
  for (std::size_t ti = 0; ti < layout.tensors().size(); ++ti) {
    const auto& t = layout.tensors()[ti];
    double* data = ckpt.parameters.data() + t.offset;
    Rng rng(mix_seed(seed, ti));
    double limit = 0.0;
    if (ends_with(t.name, ".gamma")) {
      std::fill(data, data + t.size(), 1.0);
      continue;
    }
    if (t.rows == 1) continue;  // biases and betas
    if (ends_with(t.name, "_embed")) {
      limit = std::sqrt(3.0 / d);
    } else if (t.name == "out.w") {
      limit = 0.5 / std::sqrt(d);
    } else {
      limit = std::sqrt(6.0 / (t.rows + t.cols));
    }
    for (std::size_t i = 0; i < t.size(); ++i) data[i] = rng.uniform(-limit, limit);
  }
  ckpt.lineage.push_back({"init", "", 0, 0, seed});
  return ckpt;
}

nlohmann::json lineage_to_json(const std::vector<LineageEntry>& lineage) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : lineage) {
    out.push_back({{"stage", e.stage},
                   {"corpus", e.corpus_id},
                   {"size", e.size},
                   {"epochs", e.epochs},
                   {"seed", e.seed}});
  }
  return out;
}

std::vector<LineageEntry> lineage_from_json(const nlohmann::json& j) {
  std::vector<LineageEntry> out;
  for (const auto& e : j) {
    out.push_back({e.at("stage"), e.at("corpus"), e.at("size"), e.at("epochs"), e.at("seed")});
  }
  return out;
}

std::string ModelCheckpoint::digest() const {
  nlohmann::json head = {{"config", config.to_json()},
                         {"step", step},
                         {"lineage", lineage_to_json(lineage)}};
  Fnv1a h;
  h.update(head.dump());
  h.update(std::string_view(reinterpret_cast<const char*>(parameters.data()),
                            parameters.size() * sizeof(double)));
  return h.hex();
}

void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path) {
  const ParameterLayout layout(ckpt.config);
  if (ckpt.parameters.size() != layout.total()) {
    fail(ErrorKind::invalid_argument, "checkpoint parameter count does not match its config");
  }
  const std::string header = header_json(ckpt, layout).dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, fmt::format("cannot write '{}'", path.string()));
  out.write(kMagic, sizeof kMagic);
  const std::uint32_t version = kCheckpointVersion;
  const std::uint64_t header_len = header.size();
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  out.write(reinterpret_cast<const char*>(&header_len), sizeof header_len);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(ckpt.parameters.data()),
            static_cast<std::streamsize>(ckpt.parameters.size() * sizeof(double)));
  if (!out) fail(ErrorKind::io, fmt::format("short write to '{}'", path.string()));
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, fmt::format("cannot open checkpoint '{}'", path.string()));
  char magic[8];
  std::uint32_t version = 0;
  std::uint64_t header_len = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&header_len), sizeof header_len);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    fail(ErrorKind::format, fmt::format("'{}' is not a checkpoint", path.string()));
  }
  if (version != kCheckpointVersion) {
    fail(ErrorKind::format, fmt::format("unsupported checkpoint version {}", version));
  }
  if (header_len > (1u << 26)) fail(ErrorKind::format, "checkpoint header too large");
  std::string header(header_len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(header_len));
  try {
    const auto j = nlohmann::json::parse(header);
    ModelCheckpoint ckpt;
    ckpt.config = ModelConfig::from_json(j.at("config"));
    ckpt.step = j.at("step");
    ckpt.lineage = lineage_from_json(j.at("lineage"));
    const ParameterLayout layout(ckpt.config);
    if (j.at("count").get<std::size_t>() != layout.total()) {
      fail(ErrorKind::format, "checkpoint tensor count does not match its config");
    }
    ckpt.parameters.resize(layout.total());
    in.read(reinterpret_cast<char*>(ckpt.parameters.data()),
            static_cast<std::streamsize>(ckpt.parameters.size() * sizeof(double)));
    if (!in) fail(ErrorKind::format, fmt::format("'{}' is truncated", path.string()));
    return ckpt;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::format, fmt::format("malformed checkpoint header: {}", e.what()));
  }
}

}  // namespace itft::toy
