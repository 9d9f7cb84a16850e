// Copyright 2026 the pcrlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "pcr/rng.hpp"
#include "pcr/tensor.hpp"

namespace pcr::model {

// Single-block, single-head, decoder-only transformer over a small vocabulary.
// Token id 0 is reserved as the end-of-sequence marker.  There is no position
// embedding; the causal mask is the only source of order information.
struct ModelConfig {
  int vocab_size = 32;
  int d_model = 32;
  int d_ff = 64;
  int max_seq_len = 32;
  double ln_eps = 1e-5;

  // Throws std::invalid_argument on nonsensical values.
  void validate() const;
};

inline constexpr int kEosToken = 0;

// Log-probabilities over the vocabulary at one position.
struct TokenDist {
  DenseVec log_probs;
};

// Activations recorded by forward() and consumed by backward().  Per-position
// rows are stored flattened, row-major.
struct ForwardCache {
  std::vector<int> tokens;
  int seq_len = 0;

  DenseVec emb;          // [seq][d_model] token embeddings
  DenseVec ln1_xhat;     // [seq][d_model] normalized pre-gain input, block 1
  DenseVec ln1_inv_std;  // [seq]
  DenseVec ln1_out;      // [seq][d_model]
  DenseVec q, k, v;      // [seq][d_model]
  DenseVec attn;         // [seq][seq] causal softmax weights (0 above diag)
  DenseVec ctx;          // [seq][d_model] attention-weighted values
  DenseVec resid1;       // [seq][d_model] emb + attention output
  DenseVec ln2_xhat;     // [seq][d_model]
  DenseVec ln2_inv_std;  // [seq]
  DenseVec ln2_out;      // [seq][d_model]
  DenseVec mlp_pre;      // [seq][d_ff] pre-activation
  DenseVec mlp_act;      // [seq][d_ff] gelu output
  DenseVec resid2;       // [seq][d_model] final residual stream
};

// Canonical parameter set: 14 entries in fixed order (embed, attention
// projections, mlp, the two layer norms, unembedding head).  Weights are
// Gaussian(0, 0.02^2); biases zero; norm gains one.
ParamSet init_params(const ModelConfig& cfg, std::uint64_t seed);

// Log-probability distribution over the next token at every position.
// `cache`, when non-null, is filled for use by backward().
std::vector<TokenDist> forward(const ModelConfig& cfg, const ParamSet& params,
                               const std::vector<int>& tokens,
                               ForwardCache* cache = nullptr);

// Reverse-mode gradient of L = sum_{p,v} dlogits[p][v] * logits[p][v] with
// respect to every parameter.  `dlogits` rows must match the cached sequence.
GradSet backward(const ModelConfig& cfg, const ParamSet& params,
                 const ForwardCache& cache,
                 const std::vector<DenseVec>& dlogits);

struct SampledResponse {
  std::vector<int> tokens;       // includes the EOS token when one was drawn
  std::vector<double> log_probs; // log pi(token | prefix) for each token
};

// Autoregressive ancestral sampling: extend `query` token by token until EOS
// or `max_new_tokens`.  The query must be non-empty and short enough that the
// full sequence fits in max_seq_len.
SampledResponse sample_response(const ModelConfig& cfg, const ParamSet& params,
                                const std::vector<int>& query,
                                int max_new_tokens, Rng& rng);

// Mean negative log-likelihood of tokens[1..] given their prefixes.
double nll(const ModelConfig& cfg, const ParamSet& params,
           const std::vector<int>& tokens);

}  // namespace pcr::model
