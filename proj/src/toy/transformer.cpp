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

// Pre-norm encoder-decoder transformer with hand-written backward pass.
//
// A batch is packed row-wise: every position-wise op (embeddings, linear
// layers, norms, feed-forward) runs on one (tokens x d) matrix, attention
// runs per example over its row segment. No padding is ever materialized.

#include "itft/toy/transformer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "itft/error.hpp"
#include "itft/subword.hpp"

namespace itft::toy {
namespace {

using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using ConstMap = Eigen::Map<const Matrix>;
using MutMap = Eigen::Map<Matrix>;
using ConstRowMap = Eigen::Map<const RowVector>;
using MutRowMap = Eigen::Map<RowVector>;

constexpr double kNormEps = 1e-5;

struct LinearT {
  const TensorSpec* w;
  const TensorSpec* b;
};
struct NormT {
  const TensorSpec* gamma;
  const TensorSpec* beta;
};
struct AttentionT {
  LinearT q, k, v, o;
};
struct FeedForwardT {
  LinearT up, down;
};
struct EncoderLayerT {
  NormT ln1;
  AttentionT attn;
  NormT ln2;
  FeedForwardT ffn;
};
struct DecoderLayerT {
  NormT ln1;
  AttentionT self;
  NormT ln2;
  AttentionT cross;
  NormT ln3;
  FeedForwardT ffn;
};

struct Resolved {
  ParameterLayout layout;
  const TensorSpec* src_embed;
  const TensorSpec* tgt_embed;
  std::vector<EncoderLayerT> enc;
  NormT enc_norm;
  std::vector<DecoderLayerT> dec;
  NormT dec_norm;
  LinearT out;

  explicit Resolved(const ModelConfig& c) : layout(c) {
    auto t = [&](const std::string& n) { return &layout.at(n); };
    auto norm = [&](const std::string& p) { return NormT{t(p + ".gamma"), t(p + ".beta")}; };
    auto lin = [&](const std::string& p, const char* m) {
      return LinearT{t(fmt::format("{}.w{}", p, m)), t(fmt::format("{}.b{}", p, m))};
    };
    auto attn = [&](const std::string& p) {
      return AttentionT{lin(p, "q"), lin(p, "k"), lin(p, "v"), lin(p, "o")};
    };
    auto ffn = [&](const std::string& p) {
      return FeedForwardT{{t(p + ".w1"), t(p + ".b1")}, {t(p + ".w2"), t(p + ".b2")}};
    };
    src_embed = t("src_embed");
    tgt_embed = t("tgt_embed");
    for (int l = 0; l < c.enc_layers; ++l) {
      const auto p = fmt::format("enc.{}", l);
      enc.push_back({norm(p + ".ln1"), attn(p + ".attn"), norm(p + ".ln2"), ffn(p + ".ffn")});
    }
    enc_norm = norm("enc.ln");
    for (int l = 0; l < c.dec_layers; ++l) {
      const auto p = fmt::format("dec.{}", l);
      dec.push_back({norm(p + ".ln1"), attn(p + ".self"), norm(p + ".ln2"), attn(p + ".cross"),
                     norm(p + ".ln3"), ffn(p + ".ffn")});
    }
    dec_norm = norm("dec.ln");
    out = {t("out.w"), t("out.b")};
  }
};

// Row ranges of the packed matrix, one per example.
struct Segments {
  std::vector<int> start;  // size = examples + 1

  int count() const { return static_cast<int>(start.size()) - 1; }
  int begin(int i) const { return start[static_cast<std::size_t>(i)]; }
  int length(int i) const { return start[static_cast<std::size_t>(i) + 1] - begin(i); }
  int rows() const { return start.back(); }
};

struct NormCache {
  Matrix xhat;
  Eigen::VectorXd rstd;
};

struct AttentionCache {
  Matrix xq, xkv;
  Matrix q, k, v;
  std::vector<Matrix> probs;  // [segment * heads + head]
  Matrix concat;
};

struct FeedForwardCache {
  Matrix x, pre, act;
};

struct DropCache {
  Matrix mask;  // empty when inactive
};

struct EncoderLayerCache {
  NormCache n1;
  AttentionCache attn;
  DropCache d1;
  NormCache n2;
  FeedForwardCache ffn;
  DropCache d2;
};

struct DecoderLayerCache {
  NormCache n1;
  AttentionCache self;
  DropCache d1;
  NormCache n2;
  AttentionCache cross;
  DropCache d2;
  NormCache n3;
  FeedForwardCache ffn;
  DropCache d3;
};

struct EncoderTape {
  Segments seg;
  std::vector<int> ids, pos;
  DropCache emb;
  std::vector<EncoderLayerCache> layers;
  NormCache norm;
  Matrix out;
};

struct DecoderTape {
  Segments seg;
  std::vector<int> ids, pos, labels;
  DropCache emb;
  std::vector<DecoderLayerCache> layers;
  NormCache norm;
  Matrix hidden;
  Matrix logits;
};

double gelu(double x) {
  constexpr double c = 0.7978845608028654;  // sqrt(2/pi)
  return 0.5 * x * (1.0 + std::tanh(c * (x + 0.044715 * x * x * x)));
}

double gelu_grad(double x) {
  constexpr double c = 0.7978845608028654;
  const double u = c * (x + 0.044715 * x * x * x);
  const double t = std::tanh(u);
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * c * (1.0 + 3.0 * 0.044715 * x * x);
}

class Network {
 public:
  Network(const ModelConfig& config, const Resolved& r, const double* params, double* grads,
          Rng* rng)
      : cfg_(config), r_(r), p_(params), g_(grads), rng_(rng) {}

  // ---- forward -----------------------------------------------------------

  void encode(EncoderTape& t) const {
    Matrix x = embed(*r_.src_embed, t.ids, t.pos);
    x = dropout(x, t.emb);
    t.layers.resize(r_.enc.size());
    for (std::size_t l = 0; l < r_.enc.size(); ++l) {
      const auto& L = r_.enc[l];
      auto& C = t.layers[l];
      Matrix a = layer_norm(L.ln1, x, C.n1);
      a = attention(L.attn, a, t.seg, a, t.seg, false, C.attn);
      x += dropout(a, C.d1);
      Matrix f = layer_norm(L.ln2, x, C.n2);
      f = feed_forward(L.ffn, f, C.ffn);
      x += dropout(f, C.d2);
    }
    t.out = layer_norm(r_.enc_norm, x, t.norm);
  }

  void decode(DecoderTape& t, const EncoderTape& enc) const {
    Matrix y = embed(*r_.tgt_embed, t.ids, t.pos);
    y = dropout(y, t.emb);
    t.layers.resize(r_.dec.size());
    for (std::size_t l = 0; l < r_.dec.size(); ++l) {
      const auto& L = r_.dec[l];
      auto& C = t.layers[l];
      Matrix a = layer_norm(L.ln1, y, C.n1);
      a = attention(L.self, a, t.seg, a, t.seg, true, C.self);
      y += dropout(a, C.d1);
      Matrix c = layer_norm(L.ln2, y, C.n2);
      c = attention(L.cross, c, t.seg, enc.out, enc.seg, false, C.cross);
      y += dropout(c, C.d2);
      Matrix f = layer_norm(L.ln3, y, C.n3);
      f = feed_forward(L.ffn, f, C.ffn);
      y += dropout(f, C.d3);
    }
    t.hidden = layer_norm(r_.dec_norm, y, t.norm);
    t.logits = linear(r_.out, t.hidden);
  }

  // ---- backward ----------------------------------------------------------

  // dlogits -> parameter gradients; returns d(enc.out).
  Matrix decode_backward(const DecoderTape& t, const EncoderTape& enc, const Matrix& dlogits) const {
    Matrix dh;
    linear_backward(r_.out, t.hidden, dlogits, &dh);
    Matrix dy = layer_norm_backward(r_.dec_norm, t.norm, dh);
    Matrix denc = Matrix::Zero(enc.out.rows(), enc.out.cols());
    for (std::size_t li = r_.dec.size(); li-- > 0;) {
      const auto& L = r_.dec[li];
      const auto& C = t.layers[li];
      {
        Matrix df = dropout_backward(dy, C.d3);
        Matrix dn = feed_forward_backward(L.ffn, C.ffn, df);
        dy += layer_norm_backward(L.ln3, C.n3, dn);
      }
      {
        Matrix dc = dropout_backward(dy, C.d2);
        Matrix dq, dkv;
        attention_backward(L.cross, C.cross, t.seg, enc.seg, false, dc, dq, dkv);
        denc += dkv;
        dy += layer_norm_backward(L.ln2, C.n2, dq);
      }
      {
        Matrix da = dropout_backward(dy, C.d1);
        Matrix dq, dkv;
        attention_backward(L.self, C.self, t.seg, t.seg, true, da, dq, dkv);
        dq += dkv;
        dy += layer_norm_backward(L.ln1, C.n1, dq);
      }
    }
    dy = dropout_backward(dy, t.emb);
    embed_backward(*r_.tgt_embed, t.ids, dy);
    return denc;
  }

  void encode_backward(const EncoderTape& t, const Matrix& dout) const {
    Matrix dx = layer_norm_backward(r_.enc_norm, t.norm, dout);
    for (std::size_t li = r_.enc.size(); li-- > 0;) {
      const auto& L = r_.enc[li];
      const auto& C = t.layers[li];
      {
        Matrix df = dropout_backward(dx, C.d2);
        Matrix dn = feed_forward_backward(L.ffn, C.ffn, df);
        dx += layer_norm_backward(L.ln2, C.n2, dn);
      }
      {
        Matrix da = dropout_backward(dx, C.d1);
        Matrix dq, dkv;
        attention_backward(L.attn, C.attn, t.seg, t.seg, false, da, dq, dkv);
        dq += dkv;
        dx += layer_norm_backward(L.ln1, C.n1, dq);
      }
    }
    dx = dropout_backward(dx, t.emb);
    embed_backward(*r_.src_embed, t.ids, dx);
  }

 private:
  ConstMap W(const TensorSpec& t) const { return ConstMap(p_ + t.offset, t.rows, t.cols); }
  ConstRowMap B(const TensorSpec& t) const { return ConstRowMap(p_ + t.offset, t.cols); }
  MutMap GW(const TensorSpec& t) const { return MutMap(g_ + t.offset, t.rows, t.cols); }
  MutRowMap GB(const TensorSpec& t) const { return MutRowMap(g_ + t.offset, t.cols); }

  Matrix embed(const TensorSpec& table, const std::vector<int>& ids, const std::vector<int>& pos) const {
    const int d = cfg_.d_model;
    const double scale = std::sqrt(static_cast<double>(d));
    const auto E = W(table);
    Matrix x(static_cast<Eigen::Index>(ids.size()), d);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      x.row(row) = E.row(ids[i]) * scale;
      for (int k = 0; k < d; k += 2) {
        const double angle = pos[i] / std::pow(10000.0, static_cast<double>(k) / d);
        x(row, k) += std::sin(angle);
        if (k + 1 < d) x(row, k + 1) += std::cos(angle);
      }
    }
    return x;
  }

  void embed_backward(const TensorSpec& table, const std::vector<int>& ids, const Matrix& dx) const {
    const double scale = std::sqrt(static_cast<double>(cfg_.d_model));
    auto G = GW(table);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      G.row(ids[i]) += dx.row(static_cast<Eigen::Index>(i)) * scale;
    }
  }

  Matrix linear(const LinearT& L, const Matrix& x) const {
    Matrix y;
    y.noalias() = x * W(*L.w);
    y.rowwise() += B(*L.b);
    return y;
  }

  void linear_backward(const LinearT& L, const Matrix& x, const Matrix& dy, Matrix* dx) const {
    GW(*L.w).noalias() += x.transpose() * dy;
    GB(*L.b) += dy.colwise().sum();
    if (dx) dx->noalias() = dy * W(*L.w).transpose();
  }

  Matrix layer_norm(const NormT& N, const Matrix& x, NormCache& c) const {
    const auto n = x.rows();
    const double d = static_cast<double>(x.cols());
    c.xhat.resize(n, x.cols());
    c.rstd.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mean = x.row(i).sum() / d;
      const auto centered = x.row(i).array() - mean;
      const double var = centered.square().sum() / d;
      const double rstd = 1.0 / std::sqrt(var + kNormEps);
      c.rstd(i) = rstd;
      c.xhat.row(i) = centered * rstd;
    }
    Matrix y = c.xhat.array().rowwise() * B(*N.gamma).array();
    y.rowwise() += B(*N.beta);
    return y;
  }

  Matrix layer_norm_backward(const NormT& N, const NormCache& c, const Matrix& dy) const {
    GB(*N.gamma) += (dy.array() * c.xhat.array()).matrix().colwise().sum();
    GB(*N.beta) += dy.colwise().sum();
    const Matrix dxhat = dy.array().rowwise() * B(*N.gamma).array();
    const double d = static_cast<double>(dy.cols());
    Matrix dx(dy.rows(), dy.cols());
    for (Eigen::Index i = 0; i < dy.rows(); ++i) {
      const double m1 = dxhat.row(i).sum() / d;
      const double m2 = dxhat.row(i).dot(c.xhat.row(i)) / d;
      dx.row(i) = (dxhat.row(i).array() - m1 - c.xhat.row(i).array() * m2) * c.rstd(i);
    }
    return dx;
  }

  Matrix attention(const AttentionT& A, const Matrix& xq, const Segments& sq, const Matrix& xkv,
                   const Segments& skv, bool causal, AttentionCache& c) const {
    const int heads = cfg_.heads;
    const int dk = cfg_.d_model / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
    c.xq = xq;
    c.xkv = xkv;
    c.q = linear(A.q, xq);
    c.k = linear(A.k, xkv);
    c.v = linear(A.v, xkv);
    c.concat.setZero(xq.rows(), cfg_.d_model);
    c.probs.resize(static_cast<std::size_t>(sq.count() * heads));
    for (int s = 0; s < sq.count(); ++s) {
      const int q0 = sq.begin(s), nq = sq.length(s);
      const int k0 = skv.begin(s), nk = skv.length(s);
      for (int h = 0; h < heads; ++h) {
        Matrix scores = c.q.block(q0, h * dk, nq, dk) * c.k.block(k0, h * dk, nk, dk).transpose();
        scores *= scale;
        for (int i = 0; i < nq; ++i) {
          const int limit = causal ? std::min(i + 1, nk) : nk;
          const double mx = scores.row(i).head(limit).maxCoeff();
          double sum = 0.0;
          for (int j = 0; j < nk; ++j) {
            const double e = j < limit ? std::exp(scores(i, j) - mx) : 0.0;
            scores(i, j) = e;
            sum += e;
          }
          scores.row(i) /= sum;
        }
        c.concat.block(q0, h * dk, nq, dk).noalias() = scores * c.v.block(k0, h * dk, nk, dk);
        c.probs[static_cast<std::size_t>(s * heads + h)] = std::move(scores);
      }
    }
    return linear(A.o, c.concat);
  }

  void attention_backward(const AttentionT& A, const AttentionCache& c, const Segments& sq,
                          const Segments& skv, bool /*causal*/, const Matrix& dout, Matrix& dxq,
                          Matrix& dxkv) const {
    const int heads = cfg_.heads;
    const int dk = cfg_.d_model / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
    Matrix dconcat;
    linear_backward(A.o, c.concat, dout, &dconcat);
    Matrix dq = Matrix::Zero(c.q.rows(), c.q.cols());
    Matrix dk_ = Matrix::Zero(c.k.rows(), c.k.cols());
    Matrix dv = Matrix::Zero(c.v.rows(), c.v.cols());
    for (int s = 0; s < sq.count(); ++s) {
      const int q0 = sq.begin(s), nq = sq.length(s);
      const int k0 = skv.begin(s), nk = skv.length(s);
      for (int h = 0; h < heads; ++h) {
        // Masked positions carry zero probability, so their gradient vanishes.
        const Matrix& P = c.probs[static_cast<std::size_t>(s * heads + h)];
        const auto dO = dconcat.block(q0, h * dk, nq, dk);
        Matrix dP = dO * c.v.block(k0, h * dk, nk, dk).transpose();
        dv.block(k0, h * dk, nk, dk).noalias() += P.transpose() * dO;
        const Eigen::VectorXd rowdot = (dP.array() * P.array()).rowwise().sum();
        Matrix dS = (P.array() * (dP.array().colwise() - rowdot.array())).matrix() * scale;
        dq.block(q0, h * dk, nq, dk).noalias() += dS * c.k.block(k0, h * dk, nk, dk);
        dk_.block(k0, h * dk, nk, dk).noalias() += dS.transpose() * c.q.block(q0, h * dk, nq, dk);
      }
    }
    linear_backward(A.q, c.xq, dq, &dxq);
    Matrix tmp;
    linear_backward(A.k, c.xkv, dk_, &dxkv);
    linear_backward(A.v, c.xkv, dv, &tmp);
    dxkv += tmp;
  }

  Matrix feed_forward(const FeedForwardT& F, const Matrix& x, FeedForwardCache& c) const {
    c.x = x;
    c.pre = linear(F.up, x);
    c.act = c.pre.unaryExpr(&gelu);
    return linear(F.down, c.act);
  }

  Matrix feed_forward_backward(const FeedForwardT& F, const FeedForwardCache& c,
                               const Matrix& dy) const {
    Matrix dact;
    linear_backward(F.down, c.act, dy, &dact);
    const Matrix dpre = (dact.array() * c.pre.unaryExpr(&gelu_grad).array()).matrix();
    Matrix dx;
    linear_backward(F.up, c.x, dpre, &dx);
    return dx;
  }

  Matrix dropout(const Matrix& x, DropCache& c) const {
    const double p = cfg_.dropout;
    if (!rng_ || p <= 0.0) {
      c.mask.resize(0, 0);
      return x;
    }
    c.mask.resize(x.rows(), x.cols());
    const double keep = 1.0 / (1.0 - p);
    for (Eigen::Index i = 0; i < c.mask.size(); ++i) {
      c.mask.data()[i] = rng_->uniform() < p ? 0.0 : keep;
    }
    return (x.array() * c.mask.array()).matrix();
  }

  static Matrix dropout_backward(const Matrix& dy, const DropCache& c) {
    if (c.mask.size() == 0) return dy;
    return (dy.array() * c.mask.array()).matrix();
  }

  const ModelConfig& cfg_;
  const Resolved& r_;
  const double* p_;
  double* g_;
  Rng* rng_;
};

void check_id(const ModelConfig& c, int id) {
  if (id < 0 || id >= c.vocab_size) {
    fail(ErrorKind::invalid_argument,
         fmt::format("token id {} out of range [0, {})", id, c.vocab_size));
  }
}

void pack_encoder(std::span<const Example> batch, EncoderTape& t) {
  t.seg.start = {0};
  for (const auto& ex : batch) {
    int pos = 0;
    for (int id : ex.src) {
      t.ids.push_back(id);
      t.pos.push_back(pos++);
    }
    t.ids.push_back(kEosId);
    t.pos.push_back(pos);
    t.seg.start.push_back(static_cast<int>(t.ids.size()));
  }
}

void pack_decoder(std::span<const Example> batch, DecoderTape& t) {
  t.seg.start = {0};
  for (const auto& ex : batch) {
    t.ids.push_back(kBosId);
    t.pos.push_back(0);
    int pos = 1;
    for (int id : ex.tgt) {
      t.ids.push_back(id);
      t.pos.push_back(pos++);
      t.labels.push_back(id);
    }
    t.labels.push_back(kEosId);
    t.seg.start.push_back(static_cast<int>(t.ids.size()));
  }
}

// Row-wise log-softmax cross entropy; turns `logits` into d(loss)/d(logits)
// when `grad` is set. Returns the summed token loss per example.
std::vector<double> cross_entropy(Matrix& logits, const DecoderTape& t, double norm, bool grad) {
  std::vector<double> per_example(static_cast<std::size_t>(t.seg.count()), 0.0);
  for (int s = 0; s < t.seg.count(); ++s) {
    for (int i = t.seg.begin(s); i < t.seg.begin(s) + t.seg.length(s); ++i) {
      auto row = logits.row(i);
      const double mx = row.maxCoeff();
      const double lse = mx + std::log((row.array() - mx).exp().sum());
      const int label = t.labels[static_cast<std::size_t>(i)];
      per_example[static_cast<std::size_t>(s)] += lse - row(label);
      if (grad) {
        row = (row.array() - lse).exp() * norm;
        row(label) -= norm;
      }
    }
  }
  return per_example;
}

std::vector<Example> sanitize_batch(const ModelConfig& c, std::span<const Example> batch) {
  if (batch.empty()) fail(ErrorKind::invalid_argument, "empty batch");
  std::vector<Example> out;
  out.reserve(batch.size());
  for (const auto& ex : batch) out.push_back(sanitize(c, ex));
  return out;
}

}  // namespace

Example sanitize(const ModelConfig& config, Example ex) {
  std::erase(ex.src, static_cast<int>(kPadId));
  std::erase(ex.tgt, static_cast<int>(kPadId));
  for (int id : ex.src) check_id(config, id);
  for (int id : ex.tgt) check_id(config, id);
  const auto limit = static_cast<std::size_t>(config.max_len);
  if (ex.src.size() + 1 > limit || ex.tgt.size() + 1 > limit) {
    fail(ErrorKind::invalid_argument,
         fmt::format("sequence of length {}/{} exceeds max_len {} (including EOS/BOS)",
                     ex.src.size(), ex.tgt.size(), config.max_len));
  }
  return ex;
}

ForwardResult forward(const ModelCheckpoint& ckpt, std::span<const Example> batch, bool keep_logits) {
  const auto examples = sanitize_batch(ckpt.config, batch);
  const Resolved r(ckpt.config);
  if (ckpt.parameters.size() != r.layout.total()) {
    fail(ErrorKind::invalid_argument, "parameter vector does not match the model config");
  }
  const Network net(ckpt.config, r, ckpt.parameters.data(), nullptr, nullptr);
  EncoderTape enc;
  DecoderTape dec;
  pack_encoder(examples, enc);
  pack_decoder(examples, dec);
  net.encode(enc);
  net.decode(dec, enc);

  ForwardResult res;
  res.tokens = dec.labels.size();
  if (keep_logits) {
    for (int s = 0; s < dec.seg.count(); ++s) {
      res.logits.push_back(dec.logits.middleRows(dec.seg.begin(s), dec.seg.length(s)));
    }
  }
  const auto sums = cross_entropy(dec.logits, dec, 0.0, false);
  double total = 0.0;
  for (int s = 0; s < dec.seg.count(); ++s) {
    total += sums[static_cast<std::size_t>(s)];
    res.example_loss.push_back(sums[static_cast<std::size_t>(s)] / dec.seg.length(s));
  }
  res.loss = total / static_cast<double>(res.tokens);
  return res;
}

double loss_and_gradient(const ModelConfig& config, std::span<const double> params,
                         std::span<const Example> batch, std::span<double> grad, Rng* rng) {
  const auto examples = sanitize_batch(config, batch);
  const Resolved r(config);
  if (params.size() != r.layout.total() || grad.size() != r.layout.total()) {
    fail(ErrorKind::invalid_argument, "parameter/gradient size does not match the model config");
  }
  std::fill(grad.begin(), grad.end(), 0.0);
  const Network net(config, r, params.data(), grad.data(), rng);
  EncoderTape enc;
  DecoderTape dec;
  pack_encoder(examples, enc);
  pack_decoder(examples, dec);
  net.encode(enc);
  net.decode(dec, enc);

  const double n = static_cast<double>(dec.labels.size());
  const auto sums = cross_entropy(dec.logits, dec, 1.0 / n, true);
  double total = 0.0;
  for (double s : sums) total += s;

  const Matrix denc = net.decode_backward(dec, enc, dec.logits);
  net.encode_backward(enc, denc);
  return total / n;
}

std::vector<int> greedy_decode(const ModelCheckpoint& ckpt, const std::vector<int>& src,
                               int max_out_len) {
  const Example ex = sanitize(ckpt.config, {src, {}});
  std::vector<int> out;
  if (max_out_len <= 0) return out;
  const int cap = std::min(max_out_len, ckpt.config.max_len - 1);
  const Resolved r(ckpt.config);
  const Network net(ckpt.config, r, ckpt.parameters.data(), nullptr, nullptr);
  EncoderTape enc;
  pack_encoder(std::span<const Example>(&ex, 1), enc);
  net.encode(enc);
  while (static_cast<int>(out.size()) < cap) {
    DecoderTape dec;
    const Example prefix{{}, out};
    pack_decoder(std::span<const Example>(&prefix, 1), dec);
    net.decode(dec, enc);
    auto last = dec.logits.row(dec.logits.rows() - 1);
    last(kPadId) = -std::numeric_limits<double>::infinity();
    last(kBosId) = -std::numeric_limits<double>::infinity();
    Eigen::Index best = 0;
    last.maxCoeff(&best);
    if (best == kEosId) break;
    out.push_back(static_cast<int>(best));
  }
  return out;
}

}  // namespace itft::toy
