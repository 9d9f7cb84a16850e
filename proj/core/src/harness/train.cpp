// Copyright 2026 the pcrlab authors
// SPDX-License-Identifier: Apache-2.0

#include "pcr/harness/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "pcr/checkpoint.hpp"
#include "pcr/conflict.hpp"
#include "pcr/grpo.hpp"
#include "pcr/rng.hpp"

namespace pcr::harness {
namespace {

// Purpose tags for seed-stream derivation; every sampling site in a run owns
// an independent stream keyed by (seed, purpose, indices...).
constexpr std::uint64_t kStreamInit = 1;
constexpr std::uint64_t kStreamTask = 2;
constexpr std::uint64_t kStreamSample = 3;
constexpr std::uint64_t kStreamReward = 4;
constexpr std::uint64_t kStreamHeldout = 5;
constexpr std::uint64_t kStreamPretrain = 6;

struct Optimizer {
  OptimizerKind kind = OptimizerKind::Sgd;
  double lr = 1e-3;
  GradSet m;
  GradSet v;
  long t = 0;

  void init(const ParamSet& params) {
    if (kind == OptimizerKind::AdamLike) {
      m = zeros_like(params);
      v = zeros_like(params);
    }
  }

  void apply(ParamSet& params, const GradSet& grad) {
    if (kind == OptimizerKind::Sgd) {
      axpy_into(params, -lr, grad);
      return;
    }
    ++t;
    const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(t));
    for (std::size_t e = 0; e < params.entries.size(); ++e) {
      auto& theta = params.entries[e].values;
      auto& me = m.entries[e].values;
      auto& ve = v.entries[e].values;
      const auto& g = grad.entries[e].values;
      for (std::size_t i = 0; i < theta.size(); ++i) {
        me[i] = kAdamBeta1 * me[i] + (1.0 - kAdamBeta1) * g[i];
        ve[i] = kAdamBeta2 * ve[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
        const double mhat = me[i] / bc1;
        const double vhat = ve[i] / bc2;
        theta[i] -= lr * mhat / (std::sqrt(vhat) + kAdamEps);
      }
    }
  }
};

int target_len_for(const RunConfig& cfg) {
  return cfg.task == TaskKind::ReverseSequence ? cfg.query_len : 1;
}

// Supervised warm-up on the counter mapping, so the starting (and reference)
// policy actively prefers answers the task later penalizes.
void counter_pretrain(const RunConfig& cfg, ParamSet& params) {
  const TaskSpec spec{cfg.task, cfg.query_len};
  const int vz = cfg.model.vocab_size;
  constexpr int kBatch = 8;
  for (int step = 0; step < cfg.counter_pretrain_steps; ++step) {
    GradSet grad = zeros_like(params);
    for (int b = 0; b < kBatch; ++b) {
      Rng rng(derive_seed(cfg.seed, {kStreamPretrain,
                                     static_cast<std::uint64_t>(step),
                                     static_cast<std::uint64_t>(b)}));
      const TaskInstance inst = make_task(spec, vz, rng);
      const std::vector<int> tgt = counter_target(spec, vz, inst.query);
      std::vector<int> seq = inst.query;
      seq.insert(seq.end(), tgt.begin(), tgt.end());

      model::ForwardCache cache;
      const auto dists = model::forward(cfg.model, params, seq, &cache);
      std::vector<DenseVec> dl(seq.size(), DenseVec(vz, 0.0));
      const int qlen = static_cast<int>(inst.query.size());
      const int tlen = static_cast<int>(tgt.size());
      const double w = 1.0 / (static_cast<double>(kBatch) * tlen);
      for (int j = 0; j < tlen; ++j) {
        const int pos = qlen + j - 1;
        const auto& lp = dists[pos].log_probs;
        auto& row = dl[pos];
        for (int u = 0; u < vz; ++u) {
          // Gradient of mean NLL of the counter target: softmax minus onehot.
          row[u] = w * (std::exp(lp[u]) - (u == tgt[j] ? 1.0 : 0.0));
        }
      }
      GradSet g = model::backward(cfg.model, params, cache, dl);
      axpy_into(grad, 1.0, g);
    }
    axpy_into(params, -cfg.counter_pretrain_lr, grad);
    if (!params.all_finite()) {
      throw NumericalError("counter pretraining diverged at step " +
                           std::to_string(step));
    }
  }
}

std::string g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

TrainResult train(const RunConfig& cfg, const TrainSinks& sinks) {
  cfg.validate();
  const TaskSpec spec{cfg.task, cfg.query_len};
  const int vz = cfg.model.vocab_size;
  const int max_new = target_len_for(cfg);

  ParamSet params =
      model::init_params(cfg.model, derive_seed(cfg.seed, {kStreamInit}));
  if (cfg.counter_pretrain_steps > 0) counter_pretrain(cfg, params);
  ParamSet ref = params;

  // Fixed held-out probe sequences.  After counter pretraining they probe
  // retention of the counter mapping (the behavior the KL term protects);
  // otherwise they track the task mapping itself.
  std::vector<std::vector<int>> heldout;
  heldout.reserve(cfg.heldout_prompts);
  for (int i = 0; i < cfg.heldout_prompts; ++i) {
    Rng rng(derive_seed(cfg.seed, {kStreamHeldout, static_cast<std::uint64_t>(i)}));
    const TaskInstance inst = make_task(spec, vz, rng);
    const std::vector<int> tgt = cfg.counter_pretrain_steps > 0
                                     ? counter_target(spec, vz, inst.query)
                                     : inst.target;
    std::vector<int> seq = inst.query;
    seq.insert(seq.end(), tgt.begin(), tgt.end());
    heldout.push_back(std::move(seq));
  }

  Optimizer opt;
  opt.kind = cfg.optimizer;
  opt.lr = cfg.learning_rate;
  opt.init(params);

  TrainResult out;
  std::vector<double> window_alphas;
  long window_conflicts = 0;
  long window_rows = 0;
  int update_index = 0;

  for (int step = 0; step < cfg.steps; ++step) {
    if (!cfg.grpo.freeze_reference && cfg.grpo.ref_refresh_every > 0 &&
        step > 0 && step % cfg.grpo.ref_refresh_every == 0) {
      ref = params;
    }

    // Roll out the batch under the current policy, which becomes the
    // behavior policy for this step's (possibly repeated) updates.
    const ParamSet theta_old = params;
    std::vector<grpo::RolloutGroup> groups;
    groups.reserve(cfg.grpo.batch_size);
    double task_reward_sum = 0.0;
    long task_reward_count = 0;
    for (int qi = 0; qi < cfg.grpo.batch_size; ++qi) {
      Rng task_rng(derive_seed(cfg.seed, {kStreamTask,
                                          static_cast<std::uint64_t>(step),
                                          static_cast<std::uint64_t>(qi)}));
      const TaskInstance inst = make_task(spec, vz, task_rng);
      grpo::RolloutGroup group;
      group.query = inst.query;
      for (int ri = 0; ri < cfg.grpo.group_size; ++ri) {
        Rng sample_rng(derive_seed(cfg.seed,
                                   {kStreamSample,
                                    static_cast<std::uint64_t>(step),
                                    static_cast<std::uint64_t>(qi),
                                    static_cast<std::uint64_t>(ri)}));
        auto resp = model::sample_response(cfg.model, theta_old, inst.query,
                                           max_new, sample_rng);
        double r = reward(resp.tokens, inst.target);
        task_reward_sum += r;
        ++task_reward_count;
        if (cfg.reward_flip_prob > 0.0) {
          // Training-signal corruption; the metric above stays uncorrupted.
          Rng flip_rng(derive_seed(cfg.seed,
                                   {kStreamReward,
                                    static_cast<std::uint64_t>(step),
                                    static_cast<std::uint64_t>(qi),
                                    static_cast<std::uint64_t>(ri)}));
          if (flip_rng.uniform() < cfg.reward_flip_prob) r = 1.0 - r;
        }
        group.responses.push_back(std::move(resp.tokens));
        group.old_log_probs.push_back(std::move(resp.log_probs));
        group.rewards.push_back(r);
      }
      groups.push_back(std::move(group));
    }

    double loss_pla = 0.0;
    double loss_sta = 0.0;
    double grad_norm = 0.0;
    conflict::ResolutionReport last_report;
    for (int epoch = 0; epoch < cfg.grpo.inner_epochs; ++epoch) {
      auto pq = grpo::per_query_grads(cfg.model, params, ref, groups, cfg.grpo);
      auto res =
          conflict::resolve_batch(pq.pla, pq.sta, cfg.grpo.beta, cfg.conflict);
      if (!res.grad.all_finite()) {
        throw NumericalError("non-finite resolved gradient at step " +
                             std::to_string(step));
      }

      loss_pla = 0.0;
      loss_sta = 0.0;
      for (double l : pq.loss_pla) loss_pla += l;
      for (double l : pq.loss_sta) loss_sta += l;
      loss_pla /= static_cast<double>(pq.loss_pla.size());
      loss_sta /= static_cast<double>(pq.loss_sta.size());
      grad_norm = norm(res.grad);
      out.step_grad_norms.push_back(grad_norm);

      for (const auto& row : res.report) {
        if (sinks.resolution_jsonl) {
          *sinks.resolution_jsonl
              << conflict::report_line_json(update_index, row) << "\n";
        }
        ++window_rows;
        if (row.conflict) {
          ++window_conflicts;
          ++out.conflicted_layer_steps;
        }
        if (row.has_arbitration) window_alphas.push_back(row.alpha);
      }
      out.total_layer_steps += static_cast<long>(res.report.size());
      last_report = std::move(res.report);

      opt.apply(params, res.grad);
      if (!params.all_finite()) {
        throw NumericalError("non-finite parameters after step " +
                             std::to_string(step));
      }
      ++update_index;
    }

    if (step % cfg.eval_every == 0 || step == cfg.steps - 1) {
      MetricsRecord rec;
      rec.step = step;
      rec.mean_reward = task_reward_sum / static_cast<double>(task_reward_count);
      rec.plasticity_loss = loss_pla;
      rec.stability_loss = loss_sta;
      double nll_sum = 0.0;
      for (const auto& seq : heldout) {
        nll_sum += model::nll(cfg.model, params, seq);
      }
      rec.heldout_nll = nll_sum / static_cast<double>(heldout.size());
      rec.grad_norm_total = grad_norm;
      for (const auto& row : last_report) {
        rec.layer_cosines.emplace_back(row.layer, row.cosine);
      }
      if (!window_alphas.empty()) {
        rec.alpha_summary.count = static_cast<int>(window_alphas.size());
        rec.alpha_summary.min =
            *std::min_element(window_alphas.begin(), window_alphas.end());
        rec.alpha_summary.max =
            *std::max_element(window_alphas.begin(), window_alphas.end());
        rec.alpha_summary.median = median_of(window_alphas);
      }
      rec.conflict_fraction =
          window_rows > 0
              ? static_cast<double>(window_conflicts) / window_rows
              : 0.0;
      if (!rec.all_finite()) {
        throw NumericalError("non-finite metrics at step " +
                             std::to_string(step));
      }
      if (sinks.metrics_jsonl) {
        *sinks.metrics_jsonl << metrics_line_json(rec) << "\n";
      }
      out.metrics.push_back(std::move(rec));
      window_alphas.clear();
      window_conflicts = 0;
      window_rows = 0;
    }
  }

  out.params = std::move(params);
  return out;
}

TrainResult run_training(const RunConfig& cfg, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::ofstream metrics_os(out_dir + "/metrics.jsonl");
  std::ofstream resolution_os(out_dir + "/resolution.jsonl");
  if (!metrics_os || !resolution_os) {
    throw std::runtime_error("cannot open output files in " + out_dir);
  }
  TrainSinks sinks;
  sinks.metrics_jsonl = &metrics_os;
  sinks.resolution_jsonl = &resolution_os;
  TrainResult result = train(cfg, sinks);

  std::ofstream summary_os(out_dir + "/summary.csv");
  summary_os << "step,mean_reward,plasticity_loss,stability_loss,heldout_nll,"
                "grad_norm_total,conflict_fraction,alpha_count,alpha_min,"
                "alpha_median,alpha_max\n";
  for (const auto& r : result.metrics) {
    summary_os << r.step << "," << g17(r.mean_reward) << ","
               << g17(r.plasticity_loss) << "," << g17(r.stability_loss) << ","
               << g17(r.heldout_nll) << "," << g17(r.grad_norm_total) << ","
               << g17(r.conflict_fraction) << "," << r.alpha_summary.count
               << "," << g17(r.alpha_summary.min) << ","
               << g17(r.alpha_summary.median) << ","
               << g17(r.alpha_summary.max) << "\n";
  }

  std::ofstream manifest_os(out_dir + "/run_manifest.json");
  manifest_os << run_manifest_json(cfg);

  save_checkpoint_file(out_dir + "/final.ckpt", cfg.model, result.params);
  return result;
}

}  // namespace pcr::harness
