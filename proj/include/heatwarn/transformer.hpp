// Attention-based mortality forecaster. Reads a 14-day window of causally
// min-max normalized mortality and meteorology (plus in-window position
// channels) and emits the next `horizon` days of normalized mortality.
// Parameters live in one flat vector addressed through a named-tensor layout;
// gradients are computed by hand against the same layout.
#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <cstring>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "heatwarn/date.hpp"
#include "heatwarn/linalg.hpp"
#include "heatwarn/series.hpp"

namespace heatwarn {

struct TransformerConfig {
  int window = 14;       // input days per sample
  int horizon = 5;       // forecast days per sample
  int meteo_channels = 4;
  int d_model = 32;
  int n_blocks = 2;
  int n_heads = 2;
  int mlp_hidden = 32;
  double learning_rate = 1e-4;
  int epochs = 300;
  int batch_size = 64;
  std::uint64_t seed = 0;

  // mortality + meteo + sin/cos position channels
  int channels() const { return 1 + meteo_channels + 2; }
  int head_dim() const { return d_model / n_heads; }

  void validate() const {
    if (window < 2 || horizon < 1 || meteo_channels < 0 || d_model < 1 ||
        n_blocks < 1 || n_heads < 1 || mlp_hidden < 1 || epochs < 0 ||
        batch_size < 1 || learning_rate <= 0)
      throw DataError("forecaster config out of range");
    if (d_model % n_heads != 0)
      throw DataError("d_model must be divisible by n_heads");
  }
};

enum class TensorKind { weight, bias, gain };

struct TensorSpec {
  std::string name;
  std::vector<int> shape;  // [rows, cols] for matrices, [n] for vectors
  std::size_t offset = 0;
  TensorKind kind = TensorKind::weight;

  std::size_t numel() const {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return n;
  }
};

struct ParamLayout {
  std::vector<TensorSpec> tensors;
  std::size_t total = 0;

  std::size_t add(std::string name, std::vector<int> shape, TensorKind kind) {
    TensorSpec s{std::move(name), std::move(shape), total, kind};
    total += s.numel();
    tensors.push_back(std::move(s));
    return tensors.back().offset;
  }
  const TensorSpec* find(const std::string& name) const {
    for (const auto& t : tensors)
      if (t.name == name) return &t;
    return nullptr;
  }
};

namespace detail {

struct BlockOffsets {
  std::size_t wq, wk, wv, wo, bo;
  std::size_t ln1_g, ln1_s;
  std::size_t w1, b1, w2, b2;
  std::size_t ln2_g, ln2_s;
};

struct ParamOffsets {
  std::size_t w_in, b_in;
  std::vector<BlockOffsets> blocks;
  std::size_t head_w, head_b;
};

}  // namespace detail

// Scratch buffers for one batch; reusable across steps. All activation
// matrices are row-major with `rows = batch * window` unless noted.
template <typename Real>
struct Workspace {
  struct BlockActs {
    std::vector<Real> q, k, v;     // rows x d_model, per-head column blocks
    std::vector<Real> attn;        // batch*heads x window*window probabilities
    std::vector<Real> concat;      // rows x d_model, merged head outputs
    std::vector<Real> res1;        // rows x d_model, input + attention
    std::vector<Real> norm1;       // rows x d_model
    std::vector<Real> ff_act;      // rows x mlp_hidden, tanh output
    std::vector<Real> res2;        // rows x d_model, norm1 + mlp
    std::vector<Real> norm2;       // rows x d_model
    std::vector<Real> ln1_mean, ln1_rstd, ln2_mean, ln2_rstd;  // rows
  };

  int capacity = 0;  // max batch size buffers are sized for
  std::vector<Real> x;       // rows x channels
  std::vector<Real> embed;   // rows x d_model
  std::vector<BlockActs> blocks;
  std::vector<Real> pooled;  // batch x d_model
  std::vector<Real> out;     // batch x horizon
  std::vector<Real> target;  // batch x horizon

  // backward scratch
  std::vector<Real> d1, d2, d3;  // rows x d_model
  std::vector<Real> dff;         // rows x max(mlp_hidden, d_model)
  std::vector<Real> dqkv;        // rows x 3*d_model
  std::vector<Real> dscore;      // window x window
  std::vector<Real> dpool;       // batch x d_model

  void resize(const TransformerConfig& c, int batch) {
    capacity = batch;
    const std::size_t rows = static_cast<std::size_t>(batch) * c.window;
    const std::size_t rd = rows * c.d_model;
    x.resize(rows * c.channels());
    embed.resize(rd);
    blocks.resize(c.n_blocks);
    for (auto& b : blocks) {
      b.q.resize(rd);
      b.k.resize(rd);
      b.v.resize(rd);
      b.attn.resize(static_cast<std::size_t>(batch) * c.n_heads * c.window *
                    c.window);
      b.concat.resize(rd);
      b.res1.resize(rd);
      b.norm1.resize(rd);
      b.ff_act.resize(rows * c.mlp_hidden);
      b.res2.resize(rd);
      b.norm2.resize(rd);
      b.ln1_mean.resize(rows);
      b.ln1_rstd.resize(rows);
      b.ln2_mean.resize(rows);
      b.ln2_rstd.resize(rows);
    }
    pooled.resize(static_cast<std::size_t>(batch) * c.d_model);
    out.resize(static_cast<std::size_t>(batch) * c.horizon);
    target.resize(static_cast<std::size_t>(batch) * c.horizon);
    d1.resize(rd);
    d2.resize(rd);
    d3.resize(rd);
    dff.resize(rows * static_cast<std::size_t>(std::max(c.mlp_hidden, c.d_model)));
    dqkv.resize(rd * 3);
    dscore.resize(static_cast<std::size_t>(c.window) * c.window);
    dpool.resize(static_cast<std::size_t>(batch) * c.d_model);
  }
};

template <typename Real>
struct AdamState {
  std::vector<Real> m, v;
  long step = 0;

  void reset(std::size_t n) {
    m.assign(n, Real(0));
    v.assign(n, Real(0));
    step = 0;
  }
};

// Training data: pre-normalized input windows and targets, one row block per
// forecast origin.
template <typename Real>
struct SampleSet {
  int window = 0, channels = 0, horizon = 0;
  std::vector<Real> inputs;   // n * window * channels
  std::vector<Real> targets;  // n * horizon
  std::vector<int> origins;   // series index of each sample's origin day

  std::size_t size() const { return origins.size(); }
  const Real* input(std::size_t i) const {
    return inputs.data() + i * static_cast<std::size_t>(window) * channels;
  }
  const Real* target(std::size_t i) const {
    return targets.data() + i * static_cast<std::size_t>(horizon);
  }
};

template <typename Real = float>
class Transformer {
 public:
  explicit Transformer(TransformerConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    build_layout();
    params_.assign(layout_.total, Real(0));
  }

  const TransformerConfig& config() const { return cfg_; }
  const ParamLayout& layout() const { return layout_; }
  std::vector<Real>& params() { return params_; }
  const std::vector<Real>& params() const { return params_; }
  bool initialized() const { return initialized_; }
  void mark_initialized() { initialized_ = true; }

  Real* tensor(const std::string& name) {
    const TensorSpec* s = layout_.find(name);
    if (!s) throw DataError("unknown tensor: " + name);
    return params_.data() + s->offset;
  }

  // Seeded init: weight matrices uniform(-0.05, 0.05), biases and layer-norm
  // shifts zero, layer-norm gains one.
  void init_params(std::uint64_t seed) {
    std::mt19937 rng(static_cast<std::mt19937::result_type>(seed));
    std::uniform_real_distribution<double> dist(-0.05, 0.05);
    for (const auto& t : layout_.tensors) {
      Real* p = params_.data() + t.offset;
      switch (t.kind) {
        case TensorKind::weight:
          for (std::size_t i = 0; i < t.numel(); ++i)
            p[i] = static_cast<Real>(dist(rng));
          break;
        case TensorKind::bias:
          std::fill(p, p + t.numel(), Real(0));
          break;
        case TensorKind::gain:
          std::fill(p, p + t.numel(), Real(1));
          break;
      }
    }
    initialized_ = true;
  }

  // Forward `batch` samples already gathered into ws.x. Fills ws.out.
  void forward(int batch, Workspace<Real>& ws) const {
    const int T = cfg_.window, D = cfg_.d_model, H = cfg_.n_heads;
    const int DK = cfg_.head_dim(), F = cfg_.mlp_hidden, C = cfg_.channels();
    const int rows = batch * T;
    const Real* P = params_.data();
    const auto& off = offs_;

    la::gemm_nn(ws.x.data(), P + off.w_in, ws.embed.data(), rows, C, D);
    la::add_bias(ws.embed.data(), P + off.b_in, rows, D, D);

    const Real* in = ws.embed.data();
    const Real inv_sqrt_dk = Real(1) / std::sqrt(Real(DK));
    for (int b = 0; b < cfg_.n_blocks; ++b) {
      auto& a = ws.blocks[b];
      const auto& w = off.blocks[b];
      la::gemm_nn(in, P + w.wq, a.q.data(), rows, D, D);
      la::gemm_nn(in, P + w.wk, a.k.data(), rows, D, D);
      la::gemm_nn(in, P + w.wv, a.v.data(), rows, D, D);
      for (int s = 0; s < batch; ++s) {
        for (int h = 0; h < H; ++h) {
          const std::size_t base = static_cast<std::size_t>(s) * T * D +
                                   static_cast<std::size_t>(h) * DK;
          Real* probs = a.attn.data() +
                        (static_cast<std::size_t>(s) * H + h) * T * T;
          la::gemm_nt(a.q.data() + base, a.k.data() + base, probs, T, DK, T, D,
                      D, T);
          la::vscale(probs, inv_sqrt_dk, static_cast<std::ptrdiff_t>(T) * T);
          la::softmax_rows(probs, T, T);
          la::gemm_nn(probs, a.v.data() + base, a.concat.data() + base, T, T,
                      DK, T, D, D);
        }
      }
      la::gemm_nn(a.concat.data(), P + w.wo, a.res1.data(), rows, D, D);
      la::add_bias(a.res1.data(), P + w.bo, rows, D, D);
      la::vadd(a.res1.data(), in, a.res1.data(),
               static_cast<std::ptrdiff_t>(rows) * D);
      la::layernorm_forward(a.res1.data(), P + w.ln1_g, P + w.ln1_s,
                            a.norm1.data(), a.ln1_mean.data(),
                            a.ln1_rstd.data(), rows, D);
      la::gemm_nn(a.norm1.data(), P + w.w1, a.ff_act.data(), rows, D, F);
      la::add_bias(a.ff_act.data(), P + w.b1, rows, F, F);
      la::vtanh(a.ff_act.data(), static_cast<std::ptrdiff_t>(rows) * F);
      la::gemm_nn(a.ff_act.data(), P + w.w2, a.res2.data(), rows, F, D);
      la::add_bias(a.res2.data(), P + w.b2, rows, D, D);
      la::vadd(a.res2.data(), a.norm1.data(), a.res2.data(),
               static_cast<std::ptrdiff_t>(rows) * D);
      la::layernorm_forward(a.res2.data(), P + w.ln2_g, P + w.ln2_s,
                            a.norm2.data(), a.ln2_mean.data(),
                            a.ln2_rstd.data(), rows, D);
      in = a.norm2.data();
    }

    // Mean-pool over the window, then project to the horizon.
    const Real inv_t = Real(1) / Real(T);
    for (int s = 0; s < batch; ++s) {
      Real* ps = ws.pooled.data() + static_cast<std::size_t>(s) * D;
      la::vzero(ps, D);
      const Real* rows_in = in + static_cast<std::size_t>(s) * T * D;
      la::column_sums_accum(rows_in, ps, T, D, D);
      la::vscale(ps, inv_t, D);
    }
    la::gemm_nn(ws.pooled.data(), P + off.head_w, ws.out.data(), batch, D,
                cfg_.horizon);
    la::add_bias(ws.out.data(), P + off.head_b, batch, cfg_.horizon,
                 cfg_.horizon);
  }

  // Mean squared error over all horizon outputs of the batch, plus gradient
  // of that loss with respect to every parameter. forward() must have run on
  // the same workspace contents. `grad` is overwritten.
  double backward(int batch, Workspace<Real>& ws,
                  std::vector<Real>& grad) const {
    const int T = cfg_.window, D = cfg_.d_model, H = cfg_.n_heads;
    const int DK = cfg_.head_dim(), F = cfg_.mlp_hidden, C = cfg_.channels();
    const int Hh = cfg_.horizon;
    const int rows = batch * T;
    const Real* P = params_.data();
    const auto& off = offs_;
    grad.assign(layout_.total, Real(0));
    Real* G = grad.data();

    // loss and d out
    double sq = 0;
    const Real scale = Real(2) / (Real(batch) * Real(Hh));
    std::vector<Real>& dout = ws.target;  // reuse: overwritten with gradient
    for (std::size_t i = 0;
         i < static_cast<std::size_t>(batch) * Hh; ++i) {
      const double diff = static_cast<double>(ws.out[i]) -
                          static_cast<double>(ws.target[i]);
      sq += diff * diff;
      dout[i] = static_cast<Real>(diff) * scale;
    }
    const double loss = sq / (static_cast<double>(batch) * Hh);

    // output head
    la::gemm_tn<true>(ws.pooled.data(), dout.data(), G + off.head_w, D, batch,
                      Hh);
    la::column_sums_accum(dout.data(), G + off.head_b, batch, Hh, Hh);
    la::gemm_nt(dout.data(), P + off.head_w, ws.dpool.data(), batch, Hh, D);

    // un-pool: every window row gets dpool / T
    const Real inv_t = Real(1) / Real(T);
    Real* dy = ws.d1.data();
    for (int s = 0; s < batch; ++s) {
      const Real* dp = ws.dpool.data() + static_cast<std::size_t>(s) * D;
      for (int t = 0; t < T; ++t) {
        Real* r = dy + (static_cast<std::size_t>(s) * T + t) * D;
        for (int j = 0; j < D; ++j) r[j] = dp[j] * inv_t;
      }
    }

    const Real inv_sqrt_dk = Real(1) / std::sqrt(Real(DK));
    for (int b = cfg_.n_blocks - 1; b >= 0; --b) {
      auto& a = ws.blocks[b];
      const auto& w = off.blocks[b];
      const Real* in = b == 0 ? ws.embed.data() : ws.blocks[b - 1].norm2.data();

      // dy = d norm2 -> d res2 (ws.d2), layer-norm params
      la::layernorm_backward(a.res2.data(), P + w.ln2_g, a.ln2_mean.data(),
                             a.ln2_rstd.data(), dy, ws.d2.data(), G + w.ln2_g,
                             G + w.ln2_s, rows, D);

      // res2 = norm1 + mlp(norm1); d2 flows to both branches
      Real* dff = ws.dff.data();
      la::gemm_nt(ws.d2.data(), P + w.w2, dff, rows, D, F);
      la::tanh_backward(dff, a.ff_act.data(),
                        static_cast<std::ptrdiff_t>(rows) * F);
      la::gemm_tn<true>(a.ff_act.data(), ws.d2.data(), G + w.w2, F, rows, D);
      la::column_sums_accum(ws.d2.data(), G + w.b2, rows, D, D);
      la::gemm_tn<true>(a.norm1.data(), dff, G + w.w1, D, rows, F);
      la::column_sums_accum(dff, G + w.b1, rows, F, F);
      la::gemm_nt(dff, P + w.w1, ws.d3.data(), rows, F, D);
      la::vadd(ws.d3.data(), ws.d2.data(), ws.d3.data(),
               static_cast<std::ptrdiff_t>(rows) * D);  // d norm1

      // norm1 backward -> d res1 (ws.d2)
      la::layernorm_backward(a.res1.data(), P + w.ln1_g, a.ln1_mean.data(),
                             a.ln1_rstd.data(), ws.d3.data(), ws.d2.data(),
                             G + w.ln1_g, G + w.ln1_s, rows, D);

      // res1 = in + merge(concat); d2 -> merge branch and residual input
      la::gemm_tn<true>(a.concat.data(), ws.d2.data(), G + w.wo, D, rows, D);
      la::column_sums_accum(ws.d2.data(), G + w.bo, rows, D, D);
      la::gemm_nt(ws.d2.data(), P + w.wo, ws.d3.data(), rows, D, D);  // dconcat

      // attention backward per sample and head
      Real* dq = ws.dqkv.data();
      Real* dk = dq + static_cast<std::size_t>(rows) * D;
      Real* dv = dk + static_cast<std::size_t>(rows) * D;
      la::vzero(dq, static_cast<std::ptrdiff_t>(rows) * D * 3);
      for (int s = 0; s < batch; ++s) {
        for (int h = 0; h < H; ++h) {
          const std::size_t base = static_cast<std::size_t>(s) * T * D +
                                   static_cast<std::size_t>(h) * DK;
          const Real* probs = a.attn.data() +
                              (static_cast<std::size_t>(s) * H + h) * T * T;
          const Real* dconcat = ws.d3.data() + base;
          Real* ds = ws.dscore.data();
          // d probs = dconcat * V^T, then through softmax, then scale
          la::gemm_nt(dconcat, a.v.data() + base, ds, T, DK, T, D, D, T);
          la::softmax_backward_rows(probs, ds, T, T);
          la::vscale(ds, inv_sqrt_dk, static_cast<std::ptrdiff_t>(T) * T);
          // dv += probs^T * dconcat; dq += ds * K; dk += ds^T * Q
          la::gemm_tn<true>(probs, dconcat, dv + base, T, T, DK, T, D, D);
          la::gemm_nn<true>(ds, a.k.data() + base, dq + base, T, T, DK, T, D,
                            D);
          la::gemm_tn<true>(ds, a.q.data() + base, dk + base, T, T, DK, T, D,
                            D);
        }
      }
      la::gemm_tn<true>(in, dq, G + w.wq, D, rows, D);
      la::gemm_tn<true>(in, dk, G + w.wk, D, rows, D);
      la::gemm_tn<true>(in, dv, G + w.wv, D, rows, D);

      // d input = residual path + projections
      la::gemm_nt<true>(dq, P + w.wq, ws.d2.data(), rows, D, D, D, D, D);
      la::gemm_nt<true>(dk, P + w.wk, ws.d2.data(), rows, D, D, D, D, D);
      la::gemm_nt<true>(dv, P + w.wv, ws.d2.data(), rows, D, D, D, D, D);
      std::swap(ws.d1, ws.d2);
      dy = ws.d1.data();
    }

    // embedding
    la::gemm_tn<true>(ws.x.data(), dy, G + off.w_in, C, rows, D);
    la::column_sums_accum(dy, G + off.b_in, rows, D, D);
    return loss;
  }

  // One Adam update over the flat parameter vector.
  void adam_step(const std::vector<Real>& grad, AdamState<Real>& st) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++st.step;
    const Real bc1 = static_cast<Real>(1.0 / (1.0 - std::pow(b1, st.step)));
    const Real bc2 = static_cast<Real>(1.0 / (1.0 - std::pow(b2, st.step)));
    const Real lr = static_cast<Real>(cfg_.learning_rate);
    const Real kb1 = Real(b1), kb2 = Real(b2), ke = Real(eps);
    Real* p = params_.data();
    Real* m = st.m.data();
    Real* v = st.v.data();
    const Real* g = grad.data();
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(layout_.total);
#pragma omp simd
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      m[i] = kb1 * m[i] + (Real(1) - kb1) * g[i];
      v[i] = kb2 * v[i] + (Real(1) - kb2) * g[i] * g[i];
      p[i] -= lr * (m[i] * bc1) / (std::sqrt(v[i] * bc2) + ke);
    }
  }

  // Train on a sample set with seeded epoch shuffling. If parameters have
  // been initialized or loaded already, training continues from them
  // (fine-tuning); otherwise they are freshly initialized from cfg.seed.
  // Optimizer state always starts from zero; the final state is copied to
  // *opt_out when requested (for checkpointing). Returns per-epoch mean loss.
  std::vector<double> train(const SampleSet<Real>& data,
                            AdamState<Real>* opt_out = nullptr) {
    if (data.window != cfg_.window || data.channels != cfg_.channels() ||
        data.horizon != cfg_.horizon)
      throw DataError("sample set does not match forecaster config");
    if (data.size() == 0) throw DataError("empty training sample set");
    if (!initialized_) init_params(cfg_.seed);

    AdamState<Real> opt;
    opt.reset(layout_.total);
    Workspace<Real> ws;
    const int max_batch =
        static_cast<int>(std::min<std::size_t>(cfg_.batch_size, data.size()));
    ws.resize(cfg_, max_batch);
    std::vector<Real> grad(layout_.total);

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937 rng(static_cast<std::mt19937::result_type>(cfg_.seed));

    const std::size_t in_stride =
        static_cast<std::size_t>(cfg_.window) * cfg_.channels();
    const std::size_t tgt_stride = static_cast<std::size_t>(cfg_.horizon);
    std::vector<double> trace;
    trace.reserve(cfg_.epochs);
    for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      double sum = 0;
      for (std::size_t pos = 0; pos < data.size();) {
        const int batch = static_cast<int>(
            std::min<std::size_t>(max_batch, data.size() - pos));
        for (int i = 0; i < batch; ++i) {
          const std::size_t s = order[pos + i];
          std::memcpy(ws.x.data() + i * in_stride, data.input(s),
                      in_stride * sizeof(Real));
          std::memcpy(ws.target.data() + i * tgt_stride, data.target(s),
                      tgt_stride * sizeof(Real));
        }
        forward(batch, ws);
        const double loss = backward(batch, ws, grad);
        adam_step(grad, opt);
        sum += loss * batch;
        pos += static_cast<std::size_t>(batch);
      }
      trace.push_back(sum / static_cast<double>(data.size()));
    }
    if (opt_out) *opt_out = std::move(opt);
    return trace;
  }

 private:
  void build_layout() {
    const int D = cfg_.d_model, F = cfg_.mlp_hidden, C = cfg_.channels();
    offs_.w_in = layout_.add("embed.w", {C, D}, TensorKind::weight);
    offs_.b_in = layout_.add("embed.b", {D}, TensorKind::bias);
    offs_.blocks.resize(cfg_.n_blocks);
    for (int b = 0; b < cfg_.n_blocks; ++b) {
      const std::string p = "block" + std::to_string(b) + ".";
      auto& o = offs_.blocks[b];
      o.wq = layout_.add(p + "attn.wq", {D, D}, TensorKind::weight);
      o.wk = layout_.add(p + "attn.wk", {D, D}, TensorKind::weight);
      o.wv = layout_.add(p + "attn.wv", {D, D}, TensorKind::weight);
      o.wo = layout_.add(p + "attn.wo", {D, D}, TensorKind::weight);
      o.bo = layout_.add(p + "attn.bo", {D}, TensorKind::bias);
      o.ln1_g = layout_.add(p + "ln1.gain", {D}, TensorKind::gain);
      o.ln1_s = layout_.add(p + "ln1.shift", {D}, TensorKind::bias);
      o.w1 = layout_.add(p + "ff.w1", {D, F}, TensorKind::weight);
      o.b1 = layout_.add(p + "ff.b1", {F}, TensorKind::bias);
      o.w2 = layout_.add(p + "ff.w2", {F, D}, TensorKind::weight);
      o.b2 = layout_.add(p + "ff.b2", {D}, TensorKind::bias);
      o.ln2_g = layout_.add(p + "ln2.gain", {D}, TensorKind::gain);
      o.ln2_s = layout_.add(p + "ln2.shift", {D}, TensorKind::bias);
    }
    offs_.head_w = layout_.add("head.w", {D, cfg_.horizon}, TensorKind::weight);
    offs_.head_b = layout_.add("head.b", {cfg_.horizon}, TensorKind::bias);
  }

  TransformerConfig cfg_;
  ParamLayout layout_;
  detail::ParamOffsets offs_;
  std::vector<Real> params_;
  bool initialized_ = false;
};

// --- sample construction -----------------------------------------------

// Anything exposing dense numeric mortality and meteorology by day index.
template <typename P>
concept DailyPanel = requires(const P& p, int ch, int t) {
  { p.size() } -> std::convertible_to<int>;
  { p.mortality(t) } -> std::convertible_to<double>;
  { p.meteo(ch, t) } -> std::convertible_to<double>;
};

// Plain dense panel; the usual concrete implementation.
struct NumericPanel {
  std::vector<double> deaths;
  std::vector<std::vector<double>> met;  // kMeteoDims channels

  int size() const { return static_cast<int>(deaths.size()); }
  double mortality(int t) const { return deaths[static_cast<std::size_t>(t)]; }
  double meteo(int ch, int t) const {
    return met[static_cast<std::size_t>(ch)][static_cast<std::size_t>(t)];
  }
};

namespace detail {

// Causal min-max features for all channels on days 1..limit, plus the
// mortality envelope in effect at each day (used for target scaling).
struct FeatureTable {
  int channels = 0;  // 1 + meteo
  int limit = 0;
  std::vector<double> values;  // (limit+1) x channels; day 0 row unused
  std::vector<PrefixEnvelope<double>> mort_env;  // per day, size limit+1

  const double* row(int day) const {
    return values.data() + static_cast<std::size_t>(day) * channels;
  }
};

template <DailyPanel P>
FeatureTable build_feature_table(const P& p, int limit, int meteo_channels) {
  if (limit < 1 || limit >= p.size())
    throw DataError("feature table limit out of range");
  FeatureTable t;
  t.channels = 1 + meteo_channels;
  t.limit = limit;
  t.values.assign(static_cast<std::size_t>(limit + 1) * t.channels, 0.0);
  t.mort_env.assign(static_cast<std::size_t>(limit + 1), {});
  for (int ch = 0; ch < t.channels; ++ch) {
    auto value = [&](int day) {
      return ch == 0 ? p.mortality(day) : p.meteo(ch - 1, day);
    };
    double mn = value(0);
    double mx = value(0);
    for (int day = 1; day <= limit; ++day) {
      const double x = value(day);
      mx = std::max(mx, x);
      PrefixEnvelope<double> env{mn, mx};
      t.values[static_cast<std::size_t>(day) * t.channels + ch] =
          env.normalize(x);
      if (ch == 0) t.mort_env[static_cast<std::size_t>(day)] = env;
      mn = std::min(mn, x);
    }
  }
  return t;
}

}  // namespace detail

// Build training samples for every origin t in [first_origin, last_origin].
// Inputs cover days t-window+1..t, targets days t+1..t+horizon scaled by the
// mortality envelope at the origin. Origins below `window` are skipped since
// day 0 has no causal scaling reference.
template <typename Real, DailyPanel P>
SampleSet<Real> build_samples(const P& p, int first_origin, int last_origin,
                              const TransformerConfig& cfg) {
  cfg.validate();
  first_origin = std::max(first_origin, cfg.window);
  if (last_origin + cfg.horizon >= p.size())
    throw DataError("sample targets extend past end of series");
  SampleSet<Real> out;
  out.window = cfg.window;
  out.channels = cfg.channels();
  out.horizon = cfg.horizon;
  if (last_origin < first_origin) return out;

  const auto table =
      detail::build_feature_table(p, last_origin, cfg.meteo_channels);
  const int C = cfg.channels();
  const int base_ch = table.channels;
  std::vector<double> pos_sin(cfg.window), pos_cos(cfg.window);
  for (int i = 0; i < cfg.window; ++i) {
    const double a = 2.0 * std::numbers::pi * i / cfg.window;
    pos_sin[i] = std::sin(a);
    pos_cos[i] = std::cos(a);
  }

  const int n = last_origin - first_origin + 1;
  out.inputs.resize(static_cast<std::size_t>(n) * cfg.window * C);
  out.targets.resize(static_cast<std::size_t>(n) * cfg.horizon);
  out.origins.resize(static_cast<std::size_t>(n));
  for (int t = first_origin; t <= last_origin; ++t) {
    const std::size_t s = static_cast<std::size_t>(t - first_origin);
    out.origins[s] = t;
    Real* in = out.inputs.data() + s * cfg.window * C;
    for (int i = 0; i < cfg.window; ++i) {
      const int day = t - cfg.window + 1 + i;
      const double* src = table.row(day);
      Real* r = in + static_cast<std::size_t>(i) * C;
      for (int ch = 0; ch < base_ch; ++ch) r[ch] = static_cast<Real>(src[ch]);
      r[base_ch] = static_cast<Real>(pos_sin[i]);
      r[base_ch + 1] = static_cast<Real>(pos_cos[i]);
    }
    const auto& env = table.mort_env[static_cast<std::size_t>(t)];
    Real* tgt = out.targets.data() + s * cfg.horizon;
    for (int k = 0; k < cfg.horizon; ++k)
      tgt[k] = static_cast<Real>(env.normalize(p.mortality(t + 1 + k)));
  }
  return out;
}

// Forecast expected mortality for days t+1..t+horizon from origin day t.
// Reads the panel only on days <= t; the normalized outputs are mapped back
// to deaths with the origin-day mortality envelope.
template <typename Real, DailyPanel P>
std::vector<double> predict_horizon(const Transformer<Real>& model, const P& p,
                                    int t) {
  const auto& cfg = model.config();
  if (t < cfg.window || t >= p.size())
    throw DataError("forecast origin out of range");
  const auto table = detail::build_feature_table(p, t, cfg.meteo_channels);
  const int C = cfg.channels();
  Workspace<Real> ws;
  ws.resize(cfg, 1);
  for (int i = 0; i < cfg.window; ++i) {
    const int day = t - cfg.window + 1 + i;
    const double* src = table.row(day);
    Real* r = ws.x.data() + static_cast<std::size_t>(i) * C;
    for (int ch = 0; ch < table.channels; ++ch)
      r[ch] = static_cast<Real>(src[ch]);
    const double a = 2.0 * std::numbers::pi * i / cfg.window;
    r[table.channels] = static_cast<Real>(std::sin(a));
    r[table.channels + 1] = static_cast<Real>(std::cos(a));
  }
  model.forward(1, ws);
  const auto& env = table.mort_env[static_cast<std::size_t>(t)];
  std::vector<double> pred(static_cast<std::size_t>(cfg.horizon));
  for (int k = 0; k < cfg.horizon; ++k)
    pred[static_cast<std::size_t>(k)] =
        env.denormalize(static_cast<double>(ws.out[static_cast<std::size_t>(k)]));
  return pred;
}

}  // namespace heatwarn
