// Copyright 2026 the pcrlab authors
// SPDX-License-Identifier: Apache-2.0

#include "pcr/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pcr::model {
namespace {

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;

double gelu(double x) {
  const double t = std::tanh(kGeluC * (x + kGeluA * x * x * x));
  return 0.5 * x * (1.0 + t);
}

double gelu_prime(double x) {
  const double t = std::tanh(kGeluC * (x + kGeluA * x * x * x));
  const double sech2 = 1.0 - t * t;
  return 0.5 * (1.0 + t) + 0.5 * x * sech2 * kGeluC * (1.0 + 3.0 * kGeluA * x * x);
}

// y = W x for row-major W [rows][cols]; fixed accumulation order.
void matvec(const double* w, const double* x, int rows, int cols, double* y) {
  for (int o = 0; o < rows; ++o) {
    double acc = 0.0;
    const double* row = w + static_cast<std::size_t>(o) * cols;
    for (int i = 0; i < cols; ++i) acc += row[i] * x[i];
    y[o] = acc;
  }
}

// y = W^T g for row-major W [rows][cols]; y has `cols` entries.
void matvec_transposed(const double* w, const double* g, int rows, int cols,
                       double* y) {
  for (int i = 0; i < cols; ++i) {
    double acc = 0.0;
    for (int o = 0; o < rows; ++o) {
      acc += w[static_cast<std::size_t>(o) * cols + i] * g[o];
    }
    y[i] = acc;
  }
}

// dW += g (outer) x for row-major dW [rows][cols].
void outer_acc(double* dw, const double* g, const double* x, int rows,
               int cols) {
  for (int o = 0; o < rows; ++o) {
    double* row = dw + static_cast<std::size_t>(o) * cols;
    const double go = g[o];
    for (int i = 0; i < cols; ++i) row[i] += go * x[i];
  }
}

// Layer norm over one row: xhat = (x - mean) / sqrt(var + eps), population
// variance.  Returns inv_std; xhat and out may alias distinct buffers.
double layer_norm_row(const double* x, const double* gain, const double* bias,
                      int d, double eps, double* xhat, double* out) {
  double mean = 0.0;
  for (int i = 0; i < d; ++i) mean += x[i];
  mean /= d;
  double var = 0.0;
  for (int i = 0; i < d; ++i) {
    const double c = x[i] - mean;
    var += c * c;
  }
  var /= d;
  const double inv_std = 1.0 / std::sqrt(var + eps);
  for (int i = 0; i < d; ++i) {
    xhat[i] = (x[i] - mean) * inv_std;
    out[i] = gain[i] * xhat[i] + bias[i];
  }
  return inv_std;
}

// Backward through one layer-norm row.  dxhat is consumed in place.
void layer_norm_backward_row(const double* dy, const double* gain,
                             const double* xhat, double inv_std, int d,
                             double* dgain, double* dbias, double* dx_acc) {
  double mean_dxhat = 0.0;
  double mean_dxhat_xhat = 0.0;
  for (int i = 0; i < d; ++i) {
    dgain[i] += dy[i] * xhat[i];
    dbias[i] += dy[i];
  }
  for (int i = 0; i < d; ++i) {
    const double dxh = dy[i] * gain[i];
    mean_dxhat += dxh;
    mean_dxhat_xhat += dxh * xhat[i];
  }
  mean_dxhat /= d;
  mean_dxhat_xhat /= d;
  for (int i = 0; i < d; ++i) {
    const double dxh = dy[i] * gain[i];
    dx_acc[i] += inv_std * (dxh - mean_dxhat - xhat[i] * mean_dxhat_xhat);
  }
}

struct ParamView {
  const double* embed;
  const double* wq;
  const double* wk;
  const double* wv;
  const double* wo;
  const double* w1;
  const double* b1;
  const double* w2;
  const double* b2;
  const double* ln1_gain;
  const double* ln1_bias;
  const double* ln2_gain;
  const double* ln2_bias;
  const double* head;
};

const TensorEntry& entry_checked(const ParamSet& params, std::size_t idx,
                                 const char* name, std::size_t want_size) {
  if (idx >= params.entries.size()) {
    throw std::invalid_argument("param set missing entry " + std::string(name));
  }
  const TensorEntry& e = params.entries[idx];
  if (e.name != name || e.values.size() != want_size) {
    throw std::invalid_argument("param set entry mismatch at " +
                                std::string(name));
  }
  return e;
}

ParamView view_params(const ModelConfig& cfg, const ParamSet& params) {
  const std::size_t v = cfg.vocab_size;
  const std::size_t d = cfg.d_model;
  const std::size_t f = cfg.d_ff;
  ParamView pv{};
  pv.embed = entry_checked(params, 0, "embed.weight", v * d).values.data();
  pv.wq = entry_checked(params, 1, "attn.wq", d * d).values.data();
  pv.wk = entry_checked(params, 2, "attn.wk", d * d).values.data();
  pv.wv = entry_checked(params, 3, "attn.wv", d * d).values.data();
  pv.wo = entry_checked(params, 4, "attn.wo", d * d).values.data();
  pv.w1 = entry_checked(params, 5, "mlp.w1", f * d).values.data();
  pv.b1 = entry_checked(params, 6, "mlp.b1", f).values.data();
  pv.w2 = entry_checked(params, 7, "mlp.w2", d * f).values.data();
  pv.b2 = entry_checked(params, 8, "mlp.b2", d).values.data();
  pv.ln1_gain = entry_checked(params, 9, "ln1.gain", d).values.data();
  pv.ln1_bias = entry_checked(params, 10, "ln1.bias", d).values.data();
  pv.ln2_gain = entry_checked(params, 11, "ln2.gain", d).values.data();
  pv.ln2_bias = entry_checked(params, 12, "ln2.bias", d).values.data();
  pv.head = entry_checked(params, 13, "head.weight", v * d).values.data();
  return pv;
}

void check_tokens(const ModelConfig& cfg, const std::vector<int>& tokens) {
  if (tokens.empty()) throw std::invalid_argument("empty token sequence");
  if (static_cast<int>(tokens.size()) > cfg.max_seq_len) {
    throw std::invalid_argument("sequence exceeds max_seq_len");
  }
  for (int t : tokens) {
    if (t < 0 || t >= cfg.vocab_size) {
      throw std::invalid_argument("token id out of range");
    }
  }
}

}  // namespace

void ModelConfig::validate() const {
  if (vocab_size < 2) throw std::invalid_argument("vocab_size must be >= 2");
  if (d_model < 1) throw std::invalid_argument("d_model must be >= 1");
  if (d_ff < 1) throw std::invalid_argument("d_ff must be >= 1");
  if (max_seq_len < 2) throw std::invalid_argument("max_seq_len must be >= 2");
  if (!(ln_eps > 0.0) || !std::isfinite(ln_eps)) {
    throw std::invalid_argument("ln_eps must be positive and finite");
  }
}

ParamSet init_params(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(derive_seed(seed, {0x70617261u}));  // independent init stream

  const int v = cfg.vocab_size;
  const int d = cfg.d_model;
  const int f = cfg.d_ff;
  constexpr double kInitStd = 0.02;

  ParamSet params;
  auto add = [&params](const char* name, LayerTag tag, std::vector<int> shape) {
    TensorEntry e;
    e.name = name;
    e.tag = tag;
    std::size_t n = 1;
    for (int dim : shape) n *= static_cast<std::size_t>(dim);
    e.shape = std::move(shape);
    e.values.assign(n, 0.0);
    params.entries.push_back(std::move(e));
    return &params.entries.back();
  };
  auto fill_gaussian = [&rng](TensorEntry* e) {
    for (double& x : e->values) x = rng.gaussian(0.0, kInitStd);
  };
  auto fill_ones = [](TensorEntry* e) {
    for (double& x : e->values) x = 1.0;
  };

  fill_gaussian(add("embed.weight", LayerTag::Embedding, {v, d}));
  fill_gaussian(add("attn.wq", LayerTag::Attention, {d, d}));
  fill_gaussian(add("attn.wk", LayerTag::Attention, {d, d}));
  fill_gaussian(add("attn.wv", LayerTag::Attention, {d, d}));
  fill_gaussian(add("attn.wo", LayerTag::Attention, {d, d}));
  fill_gaussian(add("mlp.w1", LayerTag::Mlp, {f, d}));
  add("mlp.b1", LayerTag::Mlp, {f});
  fill_gaussian(add("mlp.w2", LayerTag::Mlp, {d, f}));
  add("mlp.b2", LayerTag::Mlp, {d});
  fill_ones(add("ln1.gain", LayerTag::Norm, {d}));
  add("ln1.bias", LayerTag::Norm, {d});
  fill_ones(add("ln2.gain", LayerTag::Norm, {d}));
  add("ln2.bias", LayerTag::Norm, {d});
  fill_gaussian(add("head.weight", LayerTag::Head, {v, d}));
  return params;
}

std::vector<TokenDist> forward(const ModelConfig& cfg, const ParamSet& params,
                               const std::vector<int>& tokens,
                               ForwardCache* cache) {
  cfg.validate();
  check_tokens(cfg, tokens);
  const ParamView pv = view_params(cfg, params);

  const int s = static_cast<int>(tokens.size());
  const int d = cfg.d_model;
  const int f = cfg.d_ff;
  const int vz = cfg.vocab_size;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));

  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.tokens = tokens;
  c.seq_len = s;
  c.emb.assign(static_cast<std::size_t>(s) * d, 0.0);
  c.ln1_xhat.assign(static_cast<std::size_t>(s) * d, 0.0);
  c.ln1_inv_std.assign(s, 0.0);
  c.ln1_out.assign(static_cast<std::size_t>(s) * d, 0.0);
  c.q.assign(static_cast<std::size_t>(s) * d, 0.0);
  c.k.assign(static_cast<std::size_t>(s) * d, 0.0);
  c.v.assign(static_cast<std::size_t>(s) * d, 0.0);
  c.attn.assign(static_cast<std::size_t>(s) * s, 0.0);
  c.ctx.assign(static_cast<std::size_t>(s) * d, 0.0);
  c.resid1.assign(static_cast<std::size_t>(s) * d, 0.0);
  c.ln2_xhat.assign(static_cast<std::size_t>(s) * d, 0.0);
  c.ln2_inv_std.assign(s, 0.0);
  c.ln2_out.assign(static_cast<std::size_t>(s) * d, 0.0);
  c.mlp_pre.assign(static_cast<std::size_t>(s) * f, 0.0);
  c.mlp_act.assign(static_cast<std::size_t>(s) * f, 0.0);
  c.resid2.assign(static_cast<std::size_t>(s) * d, 0.0);

  // Embedding lookup and first layer norm.
  for (int p = 0; p < s; ++p) {
    const double* row = pv.embed + static_cast<std::size_t>(tokens[p]) * d;
    double* e = c.emb.data() + static_cast<std::size_t>(p) * d;
    for (int i = 0; i < d; ++i) e[i] = row[i];
    c.ln1_inv_std[p] = layer_norm_row(
        e, pv.ln1_gain, pv.ln1_bias, d, cfg.ln_eps,
        c.ln1_xhat.data() + static_cast<std::size_t>(p) * d,
        c.ln1_out.data() + static_cast<std::size_t>(p) * d);
  }

  // Q/K/V projections.
  for (int p = 0; p < s; ++p) {
    const double* h = c.ln1_out.data() + static_cast<std::size_t>(p) * d;
    matvec(pv.wq, h, d, d, c.q.data() + static_cast<std::size_t>(p) * d);
    matvec(pv.wk, h, d, d, c.k.data() + static_cast<std::size_t>(p) * d);
    matvec(pv.wv, h, d, d, c.v.data() + static_cast<std::size_t>(p) * d);
  }

  // Causal attention: only positions t <= p contribute; everything above the
  // diagonal stays exactly zero in the cached weight matrix.
  std::vector<double> scores(s, 0.0);
  for (int p = 0; p < s; ++p) {
    const double* qp = c.q.data() + static_cast<std::size_t>(p) * d;
    double max_score = -1e300;
    for (int t = 0; t <= p; ++t) {
      const double* kt = c.k.data() + static_cast<std::size_t>(t) * d;
      double acc = 0.0;
      for (int i = 0; i < d; ++i) acc += qp[i] * kt[i];
      scores[t] = acc * scale;
      if (scores[t] > max_score) max_score = scores[t];
    }
    double denom = 0.0;
    double* arow = c.attn.data() + static_cast<std::size_t>(p) * s;
    for (int t = 0; t <= p; ++t) {
      arow[t] = std::exp(scores[t] - max_score);
      denom += arow[t];
    }
    for (int t = 0; t <= p; ++t) arow[t] /= denom;

    double* ctxp = c.ctx.data() + static_cast<std::size_t>(p) * d;
    for (int t = 0; t <= p; ++t) {
      const double* vt = c.v.data() + static_cast<std::size_t>(t) * d;
      const double w = arow[t];
      for (int i = 0; i < d; ++i) ctxp[i] += w * vt[i];
    }
  }

  // Output projection, residual, second layer norm, MLP, final residual.
  std::vector<double> tmp(d, 0.0);
  for (int p = 0; p < s; ++p) {
    const double* ctxp = c.ctx.data() + static_cast<std::size_t>(p) * d;
    matvec(pv.wo, ctxp, d, d, tmp.data());
    const double* e = c.emb.data() + static_cast<std::size_t>(p) * d;
    double* r1 = c.resid1.data() + static_cast<std::size_t>(p) * d;
    for (int i = 0; i < d; ++i) r1[i] = e[i] + tmp[i];

    c.ln2_inv_std[p] = layer_norm_row(
        r1, pv.ln2_gain, pv.ln2_bias, d, cfg.ln_eps,
        c.ln2_xhat.data() + static_cast<std::size_t>(p) * d,
        c.ln2_out.data() + static_cast<std::size_t>(p) * d);

    const double* h2 = c.ln2_out.data() + static_cast<std::size_t>(p) * d;
    double* u = c.mlp_pre.data() + static_cast<std::size_t>(p) * f;
    matvec(pv.w1, h2, f, d, u);
    double* act = c.mlp_act.data() + static_cast<std::size_t>(p) * f;
    for (int j = 0; j < f; ++j) {
      u[j] += pv.b1[j];
      act[j] = gelu(u[j]);
    }
    double* r2 = c.resid2.data() + static_cast<std::size_t>(p) * d;
    matvec(pv.w2, act, d, f, r2);
    for (int i = 0; i < d; ++i) r2[i] = r1[i] + (r2[i] + pv.b2[i]);
  }

  // Unembedding and log-softmax with max subtraction.
  std::vector<TokenDist> dists(s);
  std::vector<double> logits(vz, 0.0);
  for (int p = 0; p < s; ++p) {
    const double* r2 = c.resid2.data() + static_cast<std::size_t>(p) * d;
    matvec(pv.head, r2, vz, d, logits.data());
    double max_logit = logits[0];
    for (int u = 1; u < vz; ++u) {
      if (logits[u] > max_logit) max_logit = logits[u];
    }
    double denom = 0.0;
    for (int u = 0; u < vz; ++u) denom += std::exp(logits[u] - max_logit);
    const double lse = max_logit + std::log(denom);
    dists[p].log_probs.resize(vz);
    for (int u = 0; u < vz; ++u) dists[p].log_probs[u] = logits[u] - lse;
  }
  return dists;
}

GradSet backward(const ModelConfig& cfg, const ParamSet& params,
                 const ForwardCache& cache,
                 const std::vector<DenseVec>& dlogits) {
  cfg.validate();
  const ParamView pv = view_params(cfg, params);
  const int s = cache.seq_len;
  const int d = cfg.d_model;
  const int f = cfg.d_ff;
  const int vz = cfg.vocab_size;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));

  if (static_cast<int>(dlogits.size()) != s) {
    throw std::invalid_argument("backward: dlogits row count mismatch");
  }
  for (const auto& row : dlogits) {
    if (static_cast<int>(row.size()) != vz) {
      throw std::invalid_argument("backward: dlogits row width mismatch");
    }
  }

  GradSet grads = zeros_like(params);
  double* g_embed = grads.entries[0].values.data();
  double* g_wq = grads.entries[1].values.data();
  double* g_wk = grads.entries[2].values.data();
  double* g_wv = grads.entries[3].values.data();
  double* g_wo = grads.entries[4].values.data();
  double* g_w1 = grads.entries[5].values.data();
  double* g_b1 = grads.entries[6].values.data();
  double* g_w2 = grads.entries[7].values.data();
  double* g_b2 = grads.entries[8].values.data();
  double* g_ln1_gain = grads.entries[9].values.data();
  double* g_ln1_bias = grads.entries[10].values.data();
  double* g_ln2_gain = grads.entries[11].values.data();
  double* g_ln2_bias = grads.entries[12].values.data();
  double* g_head = grads.entries[13].values.data();

  DenseVec dresid1(static_cast<std::size_t>(s) * d, 0.0);
  DenseVec demb(static_cast<std::size_t>(s) * d, 0.0);
  DenseVec dctx(static_cast<std::size_t>(s) * d, 0.0);
  DenseVec dq(static_cast<std::size_t>(s) * d, 0.0);
  DenseVec dk(static_cast<std::size_t>(s) * d, 0.0);
  DenseVec dv(static_cast<std::size_t>(s) * d, 0.0);
  DenseVec dh1(static_cast<std::size_t>(s) * d, 0.0);

  // Head, MLP and second layer norm, one position at a time.
  DenseVec dresid2(d, 0.0);
  DenseVec df(f, 0.0);
  DenseVec du(f, 0.0);
  DenseVec dh2(d, 0.0);
  for (int p = 0; p < s; ++p) {
    const double* dl = dlogits[p].data();
    const double* r2 = cache.resid2.data() + static_cast<std::size_t>(p) * d;
    for (int i = 0; i < d; ++i) {
      double acc = 0.0;
      for (int u = 0; u < vz; ++u) {
        acc += pv.head[static_cast<std::size_t>(u) * d + i] * dl[u];
      }
      dresid2[i] = acc;
    }
    outer_acc(g_head, dl, r2, vz, d);

    // Residual split: one path to resid1, one through the MLP.
    double* dr1 = dresid1.data() + static_cast<std::size_t>(p) * d;
    for (int i = 0; i < d; ++i) {
      dr1[i] += dresid2[i];
      g_b2[i] += dresid2[i];
    }
    const double* act = cache.mlp_act.data() + static_cast<std::size_t>(p) * f;
    const double* u = cache.mlp_pre.data() + static_cast<std::size_t>(p) * f;
    outer_acc(g_w2, dresid2.data(), act, d, f);
    matvec_transposed(pv.w2, dresid2.data(), d, f, df.data());
    for (int j = 0; j < f; ++j) {
      du[j] = df[j] * gelu_prime(u[j]);
      g_b1[j] += du[j];
    }
    const double* h2 = cache.ln2_out.data() + static_cast<std::size_t>(p) * d;
    outer_acc(g_w1, du.data(), h2, f, d);
    matvec_transposed(pv.w1, du.data(), f, d, dh2.data());

    layer_norm_backward_row(dh2.data(), pv.ln2_gain,
                            cache.ln2_xhat.data() + static_cast<std::size_t>(p) * d,
                            cache.ln2_inv_std[p], d, g_ln2_gain, g_ln2_bias,
                            dr1);
  }

  // First residual split and attention output projection.
  for (int p = 0; p < s; ++p) {
    const double* dr1 = dresid1.data() + static_cast<std::size_t>(p) * d;
    double* de = demb.data() + static_cast<std::size_t>(p) * d;
    for (int i = 0; i < d; ++i) de[i] += dr1[i];
    const double* ctxp = cache.ctx.data() + static_cast<std::size_t>(p) * d;
    outer_acc(g_wo, dr1, ctxp, d, d);
    matvec_transposed(pv.wo, dr1, d, d,
                      dctx.data() + static_cast<std::size_t>(p) * d);
  }

  // Attention core: softmax and causal mixing.
  std::vector<double> da(s, 0.0);
  std::vector<double> ds(s, 0.0);
  for (int p = 0; p < s; ++p) {
    const double* dctxp = dctx.data() + static_cast<std::size_t>(p) * d;
    const double* arow = cache.attn.data() + static_cast<std::size_t>(p) * s;
    double sum_ada = 0.0;
    for (int t = 0; t <= p; ++t) {
      const double* vt = cache.v.data() + static_cast<std::size_t>(t) * d;
      double acc = 0.0;
      for (int i = 0; i < d; ++i) acc += dctxp[i] * vt[i];
      da[t] = acc;
      sum_ada += arow[t] * acc;
    }
    for (int t = 0; t <= p; ++t) ds[t] = arow[t] * (da[t] - sum_ada);

    double* dqp = dq.data() + static_cast<std::size_t>(p) * d;
    const double* qp = cache.q.data() + static_cast<std::size_t>(p) * d;
    for (int t = 0; t <= p; ++t) {
      double* dvt = dv.data() + static_cast<std::size_t>(t) * d;
      double* dkt = dk.data() + static_cast<std::size_t>(t) * d;
      const double* kt = cache.k.data() + static_cast<std::size_t>(t) * d;
      const double w = arow[t];
      const double dst = ds[t] * scale;
      for (int i = 0; i < d; ++i) {
        dvt[i] += w * dctxp[i];
        dqp[i] += dst * kt[i];
        dkt[i] += dst * qp[i];
      }
    }
  }

  // Q/K/V projection weights and their input gradient.
  DenseVec tmp(d, 0.0);
  for (int p = 0; p < s; ++p) {
    const double* h1 = cache.ln1_out.data() + static_cast<std::size_t>(p) * d;
    double* dh1p = dh1.data() + static_cast<std::size_t>(p) * d;

    const double* dqp = dq.data() + static_cast<std::size_t>(p) * d;
    outer_acc(g_wq, dqp, h1, d, d);
    matvec_transposed(pv.wq, dqp, d, d, tmp.data());
    for (int i = 0; i < d; ++i) dh1p[i] += tmp[i];

    const double* dkp = dk.data() + static_cast<std::size_t>(p) * d;
    outer_acc(g_wk, dkp, h1, d, d);
    matvec_transposed(pv.wk, dkp, d, d, tmp.data());
    for (int i = 0; i < d; ++i) dh1p[i] += tmp[i];

    const double* dvp = dv.data() + static_cast<std::size_t>(p) * d;
    outer_acc(g_wv, dvp, h1, d, d);
    matvec_transposed(pv.wv, dvp, d, d, tmp.data());
    for (int i = 0; i < d; ++i) dh1p[i] += tmp[i];
  }

  // First layer norm and embedding scatter.
  for (int p = 0; p < s; ++p) {
    double* de = demb.data() + static_cast<std::size_t>(p) * d;
    layer_norm_backward_row(dh1.data() + static_cast<std::size_t>(p) * d,
                            pv.ln1_gain,
                            cache.ln1_xhat.data() + static_cast<std::size_t>(p) * d,
                            cache.ln1_inv_std[p], d, g_ln1_gain, g_ln1_bias,
                            de);
    double* erow =
        g_embed + static_cast<std::size_t>(cache.tokens[p]) * d;
    for (int i = 0; i < d; ++i) erow[i] += de[i];
  }

  return grads;
}

SampledResponse sample_response(const ModelConfig& cfg, const ParamSet& params,
                                const std::vector<int>& query,
                                int max_new_tokens, Rng& rng) {
  check_tokens(cfg, query);
  if (max_new_tokens < 0) {
    throw std::invalid_argument("sample_response: max_new_tokens must be >= 0");
  }
  if (static_cast<int>(query.size()) + max_new_tokens > cfg.max_seq_len) {
    throw std::invalid_argument("sample_response: sequence would exceed max_seq_len");
  }

  SampledResponse out;
  std::vector<int> seq = query;
  for (int step = 0; step < max_new_tokens; ++step) {
    const auto dists = forward(cfg, params, seq);
    const auto& lp = dists.back().log_probs;
    const int tok = rng.categorical_from_log_probs(lp);
    out.tokens.push_back(tok);
    out.log_probs.push_back(lp[tok]);
    seq.push_back(tok);
    if (tok == kEosToken) break;
  }
  return out;
}

double nll(const ModelConfig& cfg, const ParamSet& params,
           const std::vector<int>& tokens) {
  if (tokens.size() < 2) {
    throw std::invalid_argument("nll: need at least two tokens");
  }
  const auto dists = forward(cfg, params, tokens);
  double total = 0.0;
  for (std::size_t p = 1; p < tokens.size(); ++p) {
    total += -dists[p - 1].log_probs[tokens[p]];
  }
  return total / static_cast<double>(tokens.size() - 1);
}

}  // namespace pcr::model
