// Copyright 2026 the pcrlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <utility>
#include <vector>

#include "pcr/model.hpp"
#include "pcr/tensor.hpp"

namespace pcr::grpo {

struct GrpoConfig {
  double clip_eps = 0.2;   // importance-ratio clip half-width
  double beta = 0.04;      // weight of the KL stability term
  double adv_eps = 1e-8;   // reward-spread floor below which advantages are 0
  int group_size = 8;      // responses sampled per query
  int batch_size = 8;      // queries per optimization step
  int inner_epochs = 1;    // gradient steps per sampled batch
  bool freeze_reference = false;  // keep the reference policy at its initial value
  int ref_refresh_every = 10;     // steps between reference refreshes (0 = never)

  void validate() const;
};

// Sampled responses for one query plus everything needed to recompute the
// objective: rewards and the behavior policy's per-token log-probs.
struct RolloutGroup {
  std::vector<int> query;
  std::vector<std::vector<int>> responses;
  std::vector<double> rewards;
  std::vector<std::vector<double>> old_log_probs;

  int size() const { return static_cast<int>(responses.size()); }
  void validate() const;
};

// Group-standardized advantages: (r - mean) / population-std.  When the std
// falls below adv_eps (e.g. all rewards equal) every advantage is zero.
std::vector<double> compute_advantages(const std::vector<double>& rewards,
                                       double adv_eps);

// Per-token importance ratios exp(new - old).
std::vector<double> importance_ratios(const std::vector<double>& new_log_probs,
                                      const std::vector<double>& old_log_probs);

// Clipped surrogate gain for one token: min(R*A, clip(R, 1-eps, 1+eps)*A),
// with its derivative in R.  Ties resolve to the unclipped branch.
struct SurrogateGain {
  double value = 0.0;
  double dvalue_dR = 0.0;
};
SurrogateGain surrogate_gain(double ratio, double advantage, double clip_eps);

// Plasticity objective: mean over queries of -(1/n) sum_i (1/T_i) sum_j S_ij,
// with its parameter gradient.
std::pair<double, GradSet> plasticity_loss_and_grad(
    const model::ModelConfig& mcfg, const ParamSet& params,
    const std::vector<RolloutGroup>& groups, const GrpoConfig& cfg);

// Stability objective: mean over queries of (1/n) sum_i (1/T_i) sum_j KL_j,
// where KL_j is the exact-vocabulary KL from the current policy to the
// reference at the token-j prediction position.
std::pair<double, GradSet> stability_loss_and_grad(
    const model::ModelConfig& mcfg, const ParamSet& params,
    const ParamSet& ref_params, const std::vector<RolloutGroup>& groups,
    const GrpoConfig& cfg);

// g_pla + beta * g_sta.
GradSet total_grad_naive(const GradSet& g_pla, const GradSet& g_sta,
                         double beta);

// Both gradient streams per query.  The mean over queries of each stream
// equals the corresponding batch gradient.
struct PerQueryGrads {
  std::vector<GradSet> pla;
  std::vector<GradSet> sta;
  std::vector<double> loss_pla;
  std::vector<double> loss_sta;
};
PerQueryGrads per_query_grads(const model::ModelConfig& mcfg,
                              const ParamSet& params, const ParamSet& ref_params,
                              const std::vector<RolloutGroup>& groups,
                              const GrpoConfig& cfg);

}  // namespace pcr::grpo
