// Copyright 2026 the pcrlab authors
// SPDX-License-Identifier: Apache-2.0

#include "pcr/grpo.hpp"

#include <cmath>
#include <stdexcept>

namespace pcr::grpo {
namespace {

// Objective pieces for one query group.  The reference may be null, in which
// case only the plasticity stream is evaluated.
struct GroupEval {
  double loss_pla = 0.0;
  double loss_sta = 0.0;
  GradSet g_pla;
  GradSet g_sta;
};

GroupEval evaluate_group(const model::ModelConfig& mcfg, const ParamSet& params,
                         const ParamSet* ref_params, const RolloutGroup& group,
                         const GrpoConfig& cfg, bool want_pla, bool want_sta) {
  group.validate();
  const int n = group.size();
  const int query_len = static_cast<int>(group.query.size());
  const int vz = mcfg.vocab_size;
  const auto advantages = compute_advantages(group.rewards, cfg.adv_eps);

  GroupEval out;
  if (want_pla) out.g_pla = zeros_like(params);
  if (want_sta) out.g_sta = zeros_like(params);

  for (int i = 0; i < n; ++i) {
    const auto& response = group.responses[i];
    const int t_len = static_cast<int>(response.size());
    std::vector<int> seq = group.query;
    seq.insert(seq.end(), response.begin(), response.end());

    model::ForwardCache cache;
    const auto dists = model::forward(mcfg, params, seq, &cache);
    std::vector<model::TokenDist> ref_dists;
    if (want_sta) {
      if (!ref_params) throw std::invalid_argument("stability needs reference");
      ref_dists = model::forward(mcfg, *ref_params, seq);
    }

    const int seq_len = static_cast<int>(seq.size());
    std::vector<DenseVec> dl_pla;
    std::vector<DenseVec> dl_sta;
    if (want_pla) dl_pla.assign(seq_len, DenseVec(vz, 0.0));
    if (want_sta) dl_sta.assign(seq_len, DenseVec(vz, 0.0));

    const double inv_nt = 1.0 / (static_cast<double>(n) * t_len);
    double sum_gain = 0.0;
    double sum_kl = 0.0;
    for (int j = 0; j < t_len; ++j) {
      const int pos = query_len + j - 1;  // position whose dist predicts token j
      const auto& lp = dists[pos].log_probs;
      const int y = response[j];

      if (want_pla) {
        const double ratio = std::exp(lp[y] - group.old_log_probs[i][j]);
        const auto sg = surrogate_gain(ratio, advantages[i], cfg.clip_eps);
        sum_gain += sg.value;
        // d(-S)/dlogits through log pi(y|prefix): c * (onehot(y) - p).
        const double c = -inv_nt * sg.dvalue_dR * ratio;
        auto& row = dl_pla[pos];
        for (int u = 0; u < vz; ++u) {
          const double p = std::exp(lp[u]);
          row[u] += c * ((u == y ? 1.0 : 0.0) - p);
        }
      }

      if (want_sta) {
        const auto& lq = ref_dists[pos].log_probs;
        double kl = 0.0;
        for (int u = 0; u < vz; ++u) kl += std::exp(lp[u]) * (lp[u] - lq[u]);
        sum_kl += kl;
        auto& row = dl_sta[pos];
        for (int u = 0; u < vz; ++u) {
          row[u] += inv_nt * std::exp(lp[u]) * (lp[u] - lq[u] - kl);
        }
      }
    }

    if (want_pla) {
      out.loss_pla -= sum_gain * inv_nt;
      GradSet g = model::backward(mcfg, params, cache, dl_pla);
      axpy_into(out.g_pla, 1.0, g);
    }
    if (want_sta) {
      out.loss_sta += sum_kl * inv_nt;
      GradSet g = model::backward(mcfg, params, cache, dl_sta);
      axpy_into(out.g_sta, 1.0, g);
    }
  }
  return out;
}

}  // namespace

void GrpoConfig::validate() const {
  if (!(clip_eps > 0.0) || !(clip_eps < 1.0)) {
    throw std::invalid_argument("clip_eps must lie in (0, 1)");
  }
  if (beta < 0.0 || !std::isfinite(beta)) {
    throw std::invalid_argument("beta must be finite and >= 0");
  }
  if (!(adv_eps > 0.0)) throw std::invalid_argument("adv_eps must be > 0");
  if (group_size < 2) throw std::invalid_argument("group_size must be >= 2");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (inner_epochs < 1) throw std::invalid_argument("inner_epochs must be >= 1");
  if (ref_refresh_every < 0) {
    throw std::invalid_argument("ref_refresh_every must be >= 0");
  }
}

void RolloutGroup::validate() const {
  if (query.empty()) throw std::invalid_argument("rollout group: empty query");
  const std::size_t n = responses.size();
  if (n < 2) throw std::invalid_argument("rollout group: need >= 2 responses");
  if (rewards.size() != n || old_log_probs.size() != n) {
    throw std::invalid_argument("rollout group: field length mismatch");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (responses[i].empty()) {
      throw std::invalid_argument("rollout group: empty response");
    }
    if (old_log_probs[i].size() != responses[i].size()) {
      throw std::invalid_argument("rollout group: log-prob length mismatch");
    }
    if (!std::isfinite(rewards[i])) {
      throw std::invalid_argument("rollout group: non-finite reward");
    }
    for (double lp : old_log_probs[i]) {
      if (!std::isfinite(lp)) {
        throw std::invalid_argument("rollout group: non-finite log-prob");
      }
    }
  }
}

std::vector<double> compute_advantages(const std::vector<double>& rewards,
                                       double adv_eps) {
  if (rewards.size() < 2) {
    throw std::invalid_argument("advantages: need at least 2 rewards");
  }
  if (!(adv_eps > 0.0)) throw std::invalid_argument("advantages: adv_eps <= 0");
  const int n = static_cast<int>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) {
    const double c = r - mean;
    var += c * c;
  }
  var /= n;  // population variance
  const double sigma = std::sqrt(var);

  std::vector<double> adv(rewards.size(), 0.0);
  if (sigma < adv_eps) return adv;  // degenerate group: no learning signal
  for (int i = 0; i < n; ++i) adv[i] = (rewards[i] - mean) / sigma;
  return adv;
}

std::vector<double> importance_ratios(const std::vector<double>& new_log_probs,
                                      const std::vector<double>& old_log_probs) {
  if (new_log_probs.size() != old_log_probs.size()) {
    throw std::invalid_argument("importance_ratios: length mismatch");
  }
  std::vector<double> out(new_log_probs.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::exp(new_log_probs[i] - old_log_probs[i]);
  }
  return out;
}

SurrogateGain surrogate_gain(double ratio, double advantage, double clip_eps) {
  if (!(clip_eps > 0.0) || !(clip_eps < 1.0)) {
    throw std::invalid_argument("surrogate_gain: clip_eps must lie in (0, 1)");
  }
  if (!(ratio >= 0.0) || !std::isfinite(ratio)) {
    throw std::invalid_argument("surrogate_gain: ratio must be finite and >= 0");
  }
  double clipped_ratio = ratio;
  if (clipped_ratio < 1.0 - clip_eps) clipped_ratio = 1.0 - clip_eps;
  if (clipped_ratio > 1.0 + clip_eps) clipped_ratio = 1.0 + clip_eps;

  const double unclipped = ratio * advantage;
  const double clipped = clipped_ratio * advantage;
  SurrogateGain out;
  if (unclipped <= clipped) {
    out.value = unclipped;
    out.dvalue_dR = advantage;  // ties take the unclipped branch
  } else {
    out.value = clipped;
    out.dvalue_dR = 0.0;  // active clip: flat in the ratio
  }
  return out;
}

std::pair<double, GradSet> plasticity_loss_and_grad(
    const model::ModelConfig& mcfg, const ParamSet& params,
    const std::vector<RolloutGroup>& groups, const GrpoConfig& cfg) {
  cfg.validate();
  if (groups.empty()) throw std::invalid_argument("no rollout groups");
  const double b = static_cast<double>(groups.size());
  double loss = 0.0;
  GradSet grad = zeros_like(params);
  for (const auto& group : groups) {
    GroupEval ev = evaluate_group(mcfg, params, nullptr, group, cfg,
                                  /*want_pla=*/true, /*want_sta=*/false);
    loss += ev.loss_pla;
    axpy_into(grad, 1.0, ev.g_pla);
  }
  // Sum first, divide once: keeps the batch mean identical to the arithmetic
  // mean of the per-query gradients.
  loss /= b;
  for (auto& e : grad.entries) {
    for (double& v : e.values) v /= b;
  }
  return {loss, std::move(grad)};
}

std::pair<double, GradSet> stability_loss_and_grad(
    const model::ModelConfig& mcfg, const ParamSet& params,
    const ParamSet& ref_params, const std::vector<RolloutGroup>& groups,
    const GrpoConfig& cfg) {
  cfg.validate();
  if (groups.empty()) throw std::invalid_argument("no rollout groups");
  require_congruent(params, ref_params);
  const double b = static_cast<double>(groups.size());
  double loss = 0.0;
  GradSet grad = zeros_like(params);
  for (const auto& group : groups) {
    GroupEval ev = evaluate_group(mcfg, params, &ref_params, group, cfg,
                                  /*want_pla=*/false, /*want_sta=*/true);
    loss += ev.loss_sta;
    axpy_into(grad, 1.0, ev.g_sta);
  }
  loss /= b;
  for (auto& e : grad.entries) {
    for (double& v : e.values) v /= b;
  }
  return {loss, std::move(grad)};
}

GradSet total_grad_naive(const GradSet& g_pla, const GradSet& g_sta,
                         double beta) {
  require_congruent(g_pla, g_sta);
  GradSet out = g_pla;
  axpy_into(out, beta, g_sta);
  return out;
}

PerQueryGrads per_query_grads(const model::ModelConfig& mcfg,
                              const ParamSet& params, const ParamSet& ref_params,
                              const std::vector<RolloutGroup>& groups,
                              const GrpoConfig& cfg) {
  cfg.validate();
  if (groups.size() < 2) {
    throw std::invalid_argument("per-query gradients need >= 2 groups");
  }
  require_congruent(params, ref_params);
  PerQueryGrads out;
  out.pla.reserve(groups.size());
  out.sta.reserve(groups.size());
  for (const auto& group : groups) {
    GroupEval ev = evaluate_group(mcfg, params, &ref_params, group, cfg,
                                  /*want_pla=*/true, /*want_sta=*/true);
    out.pla.push_back(std::move(ev.g_pla));
    out.sta.push_back(std::move(ev.g_sta));
    out.loss_pla.push_back(ev.loss_pla);
    out.loss_sta.push_back(ev.loss_sta);
  }
  return out;
}

}  // namespace pcr::grpo
