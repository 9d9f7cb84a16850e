// Copyright 2026 the pcrlab authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance gate: one self-contained check per release criterion, each
// printing a single PASS/FAIL line.  The binary exits nonzero when any
// criterion fails, so it can anchor CI and release decisions on its own.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pcr/conflict.hpp"
#include "pcr/grpo.hpp"
#include "pcr/harness/config.hpp"
#include "pcr/harness/quad.hpp"
#include "pcr/harness/task.hpp"
#include "pcr/harness/train.hpp"
#include "pcr/mmse.hpp"
#include "pcr/model.hpp"
#include "pcr/rng.hpp"
#include "pcr/tensor.hpp"

namespace {

using pcr::DenseVec;
using pcr::GradSet;
using pcr::ParamSet;
namespace conflict = pcr::conflict;
namespace grpo = pcr::grpo;
namespace harness = pcr::harness;
namespace mmse = pcr::mmse;
namespace model = pcr::model;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Small shared helpers.

bool g_detail_printed = false;

void detail(const char* fmt, ...) {
  std::va_list args;
  va_start(args, fmt);
  std::printf("      - ");
  std::vprintf(fmt, args);
  std::printf("\n");
  va_end(args);
  g_detail_printed = true;
}

DenseVec random_vec(std::size_t d, pcr::Rng& rng, double scale = 1.0) {
  DenseVec v(d);
  for (double& x : v) x = rng.gaussian(0.0, scale);
  return v;
}

// A pair with strictly negative inner product and non-degenerate geometry.
std::pair<DenseVec, DenseVec> conflicting_pair(std::size_t d, pcr::Rng& rng) {
  for (;;) {
    DenseVec pla = random_vec(d, rng);
    DenseVec sta = random_vec(d, rng);
    double dp = pcr::dot(pla, sta);
    if (dp > 0.0) {
      for (double& x : sta) x = -x;
      dp = -dp;
    }
    const double np = pcr::norm(pla);
    const double ns = pcr::norm(sta);
    if (np < 1e-3 || ns < 1e-3) continue;
    if (std::abs(dp) < 1e-3 * np * ns) continue;
    return {std::move(pla), std::move(sta)};
  }
}

double log_uniform(pcr::Rng& rng, double lo_exp, double hi_exp) {
  return std::pow(10.0, rng.uniform(lo_exp, hi_exp));
}

double population_std(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(xs.size()));
}

// Rollout groups with guaranteed reward spread, sampled from the model.
std::vector<grpo::RolloutGroup> sampled_groups(const model::ModelConfig& mcfg,
                                               const ParamSet& behavior,
                                               int n_groups, int group_size,
                                               int query_len, int max_new,
                                               std::uint64_t seed) {
  std::vector<grpo::RolloutGroup> groups;
  pcr::Rng rng(seed);
  for (int g = 0; g < n_groups; ++g) {
    grpo::RolloutGroup group;
    group.query.resize(query_len);
    for (int& t : group.query) t = rng.uniform_int(1, mcfg.vocab_size - 1);
    for (int i = 0; i < group_size; ++i) {
      const auto resp =
          model::sample_response(mcfg, behavior, group.query, max_new, rng);
      group.responses.push_back(resp.tokens);
      group.old_log_probs.push_back(resp.log_probs);
      group.rewards.push_back(i % 2 == 0 ? 1.0 : 0.0);
    }
    groups.push_back(std::move(group));
  }
  return groups;
}

bool sets_bit_equal(const GradSet& a, const GradSet& b, const char* what) {
  if (!a.congruent_with(b)) {
    detail("%s: sets are not congruent", what);
    return false;
  }
  for (std::size_t e = 0; e < a.entries.size(); ++e) {
    for (std::size_t i = 0; i < a.entries[e].values.size(); ++i) {
      if (a.entries[e].values[i] != b.entries[e].values[i]) {
        detail("%s: entry %zu coord %zu differs: %.17g vs %.17g", what, e, i,
               a.entries[e].values[i], b.entries[e].values[i]);
        return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// 1. Closed forms of the scalar estimation problem.

bool criterion_closed_forms() {
  pcr::Rng rng(1001);
  for (int trial = 0; trial < 1000; ++trial) {
    const double vp = log_uniform(rng, -6.0, 6.0);
    const double vs = log_uniform(rng, -6.0, 6.0);
    mmse::ScalarChannel ch;
    ch.var_pla = vp;
    ch.var_sta = vs;

    const double r0 = mmse::risk_analytic(ch, 0.0);
    if (std::abs(r0 - vp) > 1e-12 * vp) {
      detail("R(0) != var_pla at (%g, %g): %g", vp, vs, r0);
      return false;
    }
    const double r1 = mmse::risk_analytic(ch, 1.0);
    if (std::abs(r1 - vs) > 1e-12 * vs) {
      detail("R(1) != var_sta at (%g, %g): %g", vp, vs, r1);
      return false;
    }
    const double astar = mmse::optimal_alpha(ch);
    const double want = 1.0 / (1.0 / vp + 1.0 / vs);
    const double ropt = mmse::risk_analytic(ch, astar);
    if (std::abs(ropt - want) > 1e-12 * want) {
      detail("R(alpha*) != 1/(lam_pla+lam_sta) at (%g, %g): %g vs %g", vp, vs,
             ropt, want);
      return false;
    }
    const auto dom = mmse::dominance_check(ch);
    if (!dom.strict || dom.risk_opt >= dom.risk_full_removal ||
        dom.risk_opt >= dom.risk_no_removal) {
      detail("dominance not strict at (%g, %g)", vp, vs);
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// 2. Monte Carlo agreement with the closed forms.

bool criterion_monte_carlo() {
  const std::int64_t n = 1000000;
  const double alphas[5] = {0.0, 0.25, 0.5, 0.75, 1.0};
  const std::pair<double, double> pairs[5] = {
      {1.0, 1.0}, {1.0, 3.0}, {3.0, 1.0}, {0.1, 10.0}, {10.0, 0.1}};

  std::uint64_t seed = 2000;
  for (const auto& [vp, vs] : pairs) {
    mmse::ScalarChannel ch;
    ch.var_pla = vp;
    ch.var_sta = vs;
    for (double a : alphas) {
      const auto mc = mmse::risk_monte_carlo(ch, a, n, seed++);
      const double want = mmse::risk_analytic(ch, a);
      if (std::abs(mc.estimate - want) > 4.0 * mc.std_err) {
        detail("cell (vp=%g, vs=%g, alpha=%g): |%g - %g| > 4*%g", vp, vs, a,
               mc.estimate, want, mc.std_err);
        return false;
      }
    }
  }

  // Grid sweeps: the empirical argmin must land within one cell of alpha*.
  const std::pair<double, double> sweep_pairs[3] = {
      {1.0, 1.0}, {1.0, 3.0}, {3.0, 1.0}};
  for (const auto& [vp, vs] : sweep_pairs) {
    mmse::ScalarChannel ch;
    ch.var_pla = vp;
    ch.var_sta = vs;
    const auto curve = mmse::risk_sweep(ch, 101, n, seed++);
    const double astar = mmse::optimal_alpha(ch);
    if (std::abs(curve.argmin_alpha - astar) > 0.01 + 1e-9) {
      detail("sweep (vp=%g, vs=%g): argmin %g vs alpha* %g", vp, vs,
             curve.argmin_alpha, astar);
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// 3. Closed-form arbitration and its limits.

bool criterion_arbitration() {
  const double floor = 1e-12, cap = 1e12;
  {
    const auto r = conflict::retention_coefficient(1.0, 1.0, floor, cap);
    if (std::abs(r.k - 0.5) > 1e-12) {
      detail("k at equal variances: %g", r.k);
      return false;
    }
  }
  {
    const auto r = conflict::retention_coefficient(1.0, 3.0, floor, cap);
    if (std::abs(r.k - 0.75) > 1e-12 || std::abs(r.alpha - 0.25) > 1e-12) {
      detail("(k, alpha) at (1, 3): (%g, %g)", r.k, r.alpha);
      return false;
    }
  }
  pcr::Rng rng(3001);
  for (int trial = 0; trial < 1000; ++trial) {
    const double vp = log_uniform(rng, -16.0, 16.0);  // exercises both clamps
    const double vs = log_uniform(rng, -16.0, 16.0);
    const auto r = conflict::retention_coefficient(vp, vs, floor, cap);
    if (std::abs(r.k + r.alpha - 1.0) > 1e-12) {
      detail("k + alpha != 1 at (%g, %g): %g", vp, vs, r.k + r.alpha);
      return false;
    }
  }

  // Limit equivalences on real projections.
  conflict::ConflictConfig cfg;
  for (int trial = 0; trial < 200; ++trial) {
    const auto [pla, sta] = conflicting_pair(8, rng);
    const double scale = std::max(1.0, pcr::norm(pla));

    const auto to_pcgrad = conflict::pcr_layer(pla, sta, 1.0, floor, 0.0, cfg);
    const DenseVec hard = conflict::pcgrad_layer(pla, sta, 0.0, cfg);
    for (std::size_t i = 0; i < pla.size(); ++i) {
      if (std::abs(to_pcgrad.g_out[i] - hard[i]) > 1e-6 * scale) {
        detail("var_sta at floor: coord %zu differs from hard projection by %g",
               i, std::abs(to_pcgrad.g_out[i] - hard[i]));
        return false;
      }
    }

    const auto to_pla = conflict::pcr_layer(pla, sta, floor, 1.0, 0.0, cfg);
    for (std::size_t i = 0; i < pla.size(); ++i) {
      if (std::abs(to_pla.g_out[i] - pla[i]) > 1e-6 * scale) {
        detail("var_pla at floor: coord %zu differs from mu_pla by %g", i,
               std::abs(to_pla.g_out[i] - pla[i]));
        return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// 4. Projection geometry across dimensions.

bool criterion_geometry() {
  conflict::ConflictConfig cfg;
  pcr::Rng rng(4001);
  for (std::size_t d : {std::size_t{2}, std::size_t{8}, std::size_t{512}}) {
    for (int trial = 0; trial < 10000; ++trial) {
      const auto [pla, sta] = conflicting_pair(d, rng);
      const double np = pcr::norm(pla);
      const double ns = pcr::norm(sta);
      const double before = pcr::dot(pla, sta);
      const double nsq = pcr::norm_sq(sta);
      const double scale = std::max(1.0, np);

      const auto dec = conflict::decompose(pla, sta, cfg.sta_norm_floor);
      if (!dec.has_value()) {
        detail("d=%zu trial %d: decomposition unexpectedly undefined", d, trial);
        return false;
      }
      for (std::size_t i = 0; i < d; ++i) {
        if (std::abs(dec->perp[i] + dec->par[i] - pla[i]) > 1e-12 * scale) {
          detail("d=%zu trial %d: identity violated at coord %zu", d, trial, i);
          return false;
        }
      }
      if (std::abs(pcr::dot(dec->perp, sta)) > 1e-9 * np * ns) {
        detail("d=%zu trial %d: perp not orthogonal (dot %g)", d, trial,
               pcr::dot(dec->perp, sta));
        return false;
      }

      const double vp = log_uniform(rng, -2.0, 2.0);
      const double vs = log_uniform(rng, -2.0, 2.0);
      const auto soft = conflict::pcr_layer(pla, sta, vp, vs, 0.0, cfg);
      if (soft.report.method != conflict::Method::PcrSoft) {
        detail("d=%zu trial %d: expected the projecting branch", d, trial);
        return false;
      }
      const double after = pcr::dot(soft.g_out, sta);
      const double want = (1.0 - soft.report.alpha) * before;
      if (std::abs(after - want) > 1e-9 * std::abs(before)) {
        detail("d=%zu trial %d: shrinkage %g vs want %g (before %g)", d, trial,
               after, want, before);
        return false;
      }
      for (std::size_t i = 0; i < d; ++i) {
        const double safe = soft.g_out[i] - after / nsq * sta[i];
        if (std::abs(safe - dec->perp[i]) > 1e-10 * scale) {
          detail("d=%zu trial %d: safe component moved at coord %zu", d, trial,
                 i);
          return false;
        }
      }

      const DenseVec hard = conflict::pcgrad_layer(pla, sta, 0.0, cfg);
      if (std::abs(pcr::dot(hard, sta)) > 1e-9 * std::abs(before)) {
        detail("d=%zu trial %d: hard projection leaves conflict (dot %g)", d,
               trial, pcr::dot(hard, sta));
        return false;
      }
      for (std::size_t i = 0; i < d; ++i) {
        if (std::abs(hard[i] - dec->perp[i]) > 1e-10 * scale) {
          detail("d=%zu trial %d: hard projection != perp at coord %zu", d,
                 trial, i);
          return false;
        }
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// 5. Gradient correctness against central finite differences.

struct TagCoords {
  pcr::LayerTag tag;
  std::vector<std::pair<std::size_t, std::size_t>> coords;  // (entry, index)
};

std::vector<TagCoords> pick_coords_per_tag(const ParamSet& params,
                                           std::size_t per_tag, pcr::Rng& rng) {
  std::vector<TagCoords> out;
  for (pcr::LayerTag tag :
       {pcr::LayerTag::Mlp, pcr::LayerTag::Attention, pcr::LayerTag::Norm,
        pcr::LayerTag::Embedding, pcr::LayerTag::Head}) {
    std::vector<std::pair<std::size_t, std::size_t>> all;
    for (std::size_t e = 0; e < params.entries.size(); ++e) {
      if (params.entries[e].tag != tag) continue;
      for (std::size_t i = 0; i < params.entries[e].values.size(); ++i) {
        all.emplace_back(e, i);
      }
    }
    // Partial Fisher-Yates: the first `take` slots become a uniform sample
    // without replacement.
    const std::size_t take = std::min(per_tag, all.size());
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t j =
          i + static_cast<std::size_t>(
                  rng.uniform_int(0, static_cast<int>(all.size() - i) - 1));
      std::swap(all[i], all[j]);
    }
    all.resize(take);
    out.push_back(TagCoords{tag, std::move(all)});
  }
  return out;
}

// Pre-softmax logits recomputed from the cached residual stream.
std::vector<DenseVec> raw_logits(const model::ModelConfig& cfg,
                                 const ParamSet& params,
                                 const std::vector<int>& tokens) {
  model::ForwardCache cache;
  model::forward(cfg, params, tokens, &cache);
  const pcr::TensorEntry* head = params.find("head.weight");
  std::vector<DenseVec> out(tokens.size(), DenseVec(cfg.vocab_size, 0.0));
  for (std::size_t p = 0; p < tokens.size(); ++p) {
    for (int u = 0; u < cfg.vocab_size; ++u) {
      double acc = 0.0;
      for (int i = 0; i < cfg.d_model; ++i) {
        acc += head->values[static_cast<std::size_t>(u) * cfg.d_model + i] *
               cache.resid2[p * cfg.d_model + i];
      }
      out[p][u] = acc;
    }
  }
  return out;
}

bool fd_check_per_tag(const char* what, ParamSet& params, const GradSet& grad,
                      const std::vector<TagCoords>& tag_coords,
                      const std::function<double(const ParamSet&)>& objective) {
  for (const auto& tc : tag_coords) {
    if (tc.coords.size() < 200) {
      detail("%s: tag %s offers only %zu coordinates", what,
             pcr::layer_tag_name(tc.tag), tc.coords.size());
      return false;
    }
    double worst = 0.0;
    for (const auto& [e, i] : tc.coords) {
      double& slot = params.entries[e].values[i];
      const double theta0 = slot;
      const double h = 1e-5 * (1.0 + std::abs(theta0));
      slot = theta0 + h;
      const double up = objective(params);
      slot = theta0 - h;
      const double dn = objective(params);
      slot = theta0;
      const double fd = (up - dn) / (2.0 * h);
      const double an = grad.entries[e].values[i];
      const double rel =
          std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6});
      worst = std::max(worst, rel);
      if (rel >= 1e-4) {
        detail("%s: tag %s entry %zu coord %zu rel err %g (fd %g, grad %g)",
               what, pcr::layer_tag_name(tc.tag), e, i, rel, fd, an);
        return false;
      }
    }
  }
  return true;
}

bool criterion_gradients() {
  model::ModelConfig mcfg;
  mcfg.vocab_size = 16;
  mcfg.d_model = 52;  // norm gains+biases then offer 4*52 >= 200 coordinates
  mcfg.d_ff = 64;
  mcfg.max_seq_len = 16;

  const ParamSet behavior = model::init_params(mcfg, 45);
  ParamSet params = model::init_params(mcfg, 46);
  const ParamSet ref = model::init_params(mcfg, 47);
  const auto groups = sampled_groups(mcfg, behavior, 2, 2, 4, 4, 4501);
  grpo::GrpoConfig gcfg;
  gcfg.group_size = 2;
  gcfg.batch_size = 2;

  pcr::Rng pick(4502);
  const auto tag_coords = pick_coords_per_tag(params, 200, pick);

  // (a) The reverse pass itself, against the raw-logits functional.
  {
    pcr::Rng tok_rng(4503);
    std::vector<int> tokens(8);
    for (int& t : tokens) t = tok_rng.uniform_int(0, mcfg.vocab_size - 1);
    std::vector<DenseVec> dlogits(tokens.size(), DenseVec(mcfg.vocab_size));
    for (auto& row : dlogits) {
      for (double& x : row) x = tok_rng.gaussian();
    }
    model::ForwardCache cache;
    model::forward(mcfg, params, tokens, &cache);
    const GradSet grad = model::backward(mcfg, params, cache, dlogits);
    auto objective = [&](const ParamSet& theta) {
      const auto logits = raw_logits(mcfg, theta, tokens);
      double acc = 0.0;
      for (std::size_t p = 0; p < logits.size(); ++p) {
        for (int u = 0; u < mcfg.vocab_size; ++u) {
          acc += dlogits[p][u] * logits[p][u];
        }
      }
      return acc;
    };
    if (!fd_check_per_tag("backward", params, grad, tag_coords, objective)) {
      return false;
    }
  }

  // (b) The plasticity gradient.
  {
    const auto [loss, grad] =
        grpo::plasticity_loss_and_grad(mcfg, params, groups, gcfg);
    (void)loss;
    auto objective = [&](const ParamSet& theta) {
      return grpo::plasticity_loss_and_grad(mcfg, theta, groups, gcfg).first;
    };
    if (!fd_check_per_tag("plasticity", params, grad, tag_coords, objective)) {
      return false;
    }
  }

  // (c) The stability gradient.
  {
    const auto [loss, grad] =
        grpo::stability_loss_and_grad(mcfg, params, ref, groups, gcfg);
    (void)loss;
    auto objective = [&](const ParamSet& theta) {
      return grpo::stability_loss_and_grad(mcfg, theta, ref, groups, gcfg)
          .first;
    };
    if (!fd_check_per_tag("stability", params, grad, tag_coords, objective)) {
      return false;
    }
  }

  // (d) The stability stream vanishes when the policy equals the reference.
  {
    const auto [loss, grad] =
        grpo::stability_loss_and_grad(mcfg, params, params, groups, gcfg);
    const double n = pcr::norm(grad);
    if (!(n < 1e-8) || !(std::abs(loss) < 1e-10)) {
      detail("g_sta at params == ref: norm %g, loss %g", n, loss);
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// 6. Mode equivalences on real per-query gradient streams.

bool criterion_mode_equivalences() {
  model::ModelConfig mcfg;
  mcfg.vocab_size = 12;
  mcfg.d_model = 16;
  mcfg.d_ff = 32;
  mcfg.max_seq_len = 16;
  const ParamSet behavior = model::init_params(mcfg, 61);
  const ParamSet params = model::init_params(mcfg, 62);
  const ParamSet ref = model::init_params(mcfg, 63);
  grpo::GrpoConfig gcfg;
  gcfg.group_size = 3;
  gcfg.batch_size = 3;
  const auto groups = sampled_groups(mcfg, behavior, 3, 3, 4, 4, 6001);
  const double beta = 0.7;

  const auto pq = grpo::per_query_grads(mcfg, params, ref, groups, gcfg);

  conflict::ConflictConfig fixed1;
  fixed1.mode = conflict::Mode::FixedAlpha;
  fixed1.fixed_alpha = 1.0;
  fixed1.pcr_scope = conflict::PcrScope::AllLayers;
  conflict::ConflictConfig hard;
  hard.mode = conflict::Mode::PcGrad;
  hard.pcr_scope = conflict::PcrScope::AllLayers;
  const auto res_fixed = conflict::resolve_batch(pq.pla, pq.sta, beta, fixed1);
  const auto res_hard = conflict::resolve_batch(pq.pla, pq.sta, beta, hard);
  if (!sets_bit_equal(res_fixed.grad, res_hard.grad,
                      "FixedAlpha(1) vs hard projection")) {
    return false;
  }
  for (std::size_t l = 0; l < res_fixed.report.size(); ++l) {
    if (res_fixed.report[l].method != res_hard.report[l].method) {
      detail("FixedAlpha(1) vs hard projection: method differs at layer %zu",
             l);
      return false;
    }
  }

  conflict::ConflictConfig naive;
  naive.mode = conflict::Mode::NaiveSum;
  const auto res_naive = conflict::resolve_batch(pq.pla, pq.sta, beta, naive);

  conflict::ConflictConfig mlp_only;
  mlp_only.mode = conflict::Mode::Pcr;
  mlp_only.pcr_scope = conflict::PcrScope::MlpOnly;
  const auto res_scoped = conflict::resolve_batch(pq.pla, pq.sta, beta, mlp_only);
  for (std::size_t l = 0; l < res_scoped.report.size(); ++l) {
    if (res_scoped.grad.entries[l].tag == pcr::LayerTag::Mlp) continue;
    if (res_scoped.report[l].method != conflict::Method::NaiveSum) {
      detail("scope: non-MLP layer %s not on the naive path",
             res_scoped.report[l].layer.c_str());
      return false;
    }
    for (std::size_t i = 0; i < res_scoped.grad.entries[l].values.size(); ++i) {
      if (res_scoped.grad.entries[l].values[i] !=
          res_naive.grad.entries[l].values[i]) {
        detail("scope: non-MLP layer %s coord %zu differs from naive sum",
               res_scoped.report[l].layer.c_str(), i);
        return false;
      }
    }
  }

  // Naive mode reproduces the plain weighted combination of the two batch
  // gradients bit for bit.
  const auto g_pla = grpo::plasticity_loss_and_grad(mcfg, params, groups, gcfg);
  const auto g_sta =
      grpo::stability_loss_and_grad(mcfg, params, ref, groups, gcfg);
  const GradSet combined = grpo::total_grad_naive(g_pla.second, g_sta.second, beta);
  if (!sets_bit_equal(res_naive.grad, combined,
                      "naive mode vs batch combination")) {
    return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// 7. The quadratic testbed realizes the scalar-channel risk ratios.

bool criterion_quad_testbed() {
  harness::QuadSpec spec;
  spec.dim = 16;
  spec.steps = 10000;
  spec.samples_per_step = 8;
  spec.noise_pla = 1.0;
  spec.noise_sta = 1.0;
  spec.eta = 0.0;  // freeze at the engineered conflict point

  const auto even = harness::quad_testbed(spec, conflict::Mode::Pcr, 71);
  const double r_pcgrad = even.mse_pcr / even.mse_pcgrad;
  const double r_sum = even.mse_pcr / even.mse_sum;
  detail("unit noises: mse_pcr/mse_pcgrad = %.4f, mse_pcr/mse_sum = %.4f, "
         "conflict fraction %.3f",
         r_pcgrad, r_sum, even.conflict_fraction);
  if (r_pcgrad < 0.4 || r_pcgrad > 0.6 || r_sum < 0.4 || r_sum > 0.6) {
    detail("risk ratio outside [0.4, 0.6]");
    return false;
  }

  harness::QuadSpec clean = spec;
  clean.noise_sta = 1e-3;
  const auto res = harness::quad_testbed(clean, conflict::Mode::Pcr, 72);
  detail("clean stability stream: mean update gap %.3g", res.mean_update_gap);
  if (res.mean_update_gap > 0.05) {
    detail("soft and hard projection disagree by more than 5%%");
    return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// 8. Variance estimator against a brute-force covariance trace.

bool criterion_variance_oracle() {
  pcr::Rng rng(8001);
  for (int batch = 0; batch < 100; ++batch) {
    const int n = 2 << rng.uniform_int(0, 2);  // 2, 4 or 8
    const std::size_t d = rng.uniform_int(0, 1) == 0 ? 3 : 17;
    std::vector<DenseVec> flat;
    std::vector<GradSet> samples;
    for (int q = 0; q < n; ++q) {
      DenseVec v = random_vec(d, rng, 2.0);
      GradSet s;
      pcr::TensorEntry e;
      e.name = "layer";
      e.tag = pcr::LayerTag::Mlp;
      e.shape = {static_cast<int>(d)};
      e.values = v;
      s.entries.push_back(std::move(e));
      samples.push_back(std::move(s));
      flat.push_back(std::move(v));
    }

    for (auto vn : {conflict::VarianceNorm::PerCoordMean,
                    conflict::VarianceNorm::RawTrace}) {
      const auto est =
          conflict::estimate_gaussian(samples, conflict::Granularity::PerLayer, vn);
      double trace = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        double mean = 0.0;
        for (const auto& s : flat) mean += s[i];
        mean /= static_cast<double>(n);
        double acc = 0.0;
        for (const auto& s : flat) acc += (s[i] - mean) * (s[i] - mean);
        trace += acc / static_cast<double>(n - 1);
      }
      const double want = vn == conflict::VarianceNorm::RawTrace
                              ? trace
                              : trace / (static_cast<double>(d) *
                                         static_cast<double>(n));
      if (std::abs(est[0].variance - want) >
          1e-12 * std::max(1.0, std::abs(want))) {
        detail("batch %d (n=%d, d=%zu): variance %g vs brute force %g", batch,
               n, d, est[0].variance, want);
        return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// 9. Byte-identical artifacts for identical configs.

harness::RunConfig toy_run_config() {
  harness::RunConfig cfg;
  cfg.seed = 90;
  cfg.steps = 200;
  cfg.learning_rate = 0.02;
  cfg.eval_every = 20;
  cfg.heldout_prompts = 8;
  cfg.task = harness::TaskKind::ReverseSequence;
  cfg.query_len = 4;
  cfg.model.vocab_size = 16;
  cfg.model.d_model = 16;
  cfg.model.d_ff = 32;
  cfg.model.max_seq_len = 16;
  cfg.grpo.group_size = 4;
  cfg.grpo.batch_size = 4;
  cfg.grpo.beta = 0.1;
  cfg.conflict.mode = conflict::Mode::Pcr;
  return cfg;
}

bool criterion_determinism() {
  const harness::RunConfig cfg = toy_run_config();
  const fs::path base = fs::temp_directory_path();
  const fs::path da = base / "pcrlab_acceptance_run_a";
  const fs::path db = base / "pcrlab_acceptance_run_b";
  fs::remove_all(da);
  fs::remove_all(db);
  harness::run_training(cfg, da.string());
  harness::run_training(cfg, db.string());

  bool ok = true;
  for (const char* leaf : {"metrics.jsonl", "resolution.jsonl", "summary.csv",
                           "run_manifest.json", "final.ckpt"}) {
    auto slurp = [](const fs::path& p) {
      std::ifstream is(p, std::ios::binary);
      std::ostringstream os;
      os << is.rdbuf();
      return os.str();
    };
    const std::string a = slurp(da / leaf);
    const std::string b = slurp(db / leaf);
    if (a.empty() || a != b) {
      detail("%s: %s", leaf, a.empty() ? "missing or empty" : "differs");
      ok = false;
    }
  }
  fs::remove_all(da);
  fs::remove_all(db);
  return ok;
}

// ---------------------------------------------------------------------------
// 10. Grad-norm stability trend across seeds (statistical).

bool criterion_stability_trend() {
  harness::RunConfig cfg;
  cfg.steps = 100;
  cfg.learning_rate = 0.25;
  cfg.eval_every = 25;
  cfg.heldout_prompts = 8;
  cfg.task = harness::TaskKind::ReverseSequence;
  cfg.query_len = 4;
  cfg.reward_flip_prob = 0.2;
  cfg.counter_pretrain_steps = 60;
  cfg.counter_pretrain_lr = 0.2;
  cfg.model.vocab_size = 12;
  cfg.model.d_model = 16;
  cfg.model.d_ff = 32;
  cfg.model.max_seq_len = 16;
  cfg.grpo.group_size = 6;
  cfg.grpo.batch_size = 4;
  cfg.grpo.beta = 0.5;
  cfg.grpo.freeze_reference = true;

  int wins = 0;
  long conflicted = 0, total = 0;
  for (std::uint64_t seed = 101; seed <= 105; ++seed) {
    harness::RunConfig pcr_cfg = cfg;
    pcr_cfg.seed = seed;
    pcr_cfg.conflict.mode = conflict::Mode::Pcr;
    pcr_cfg.conflict.pcr_scope = conflict::PcrScope::MlpOnly;
    const auto pcr_res = harness::train(pcr_cfg);

    harness::RunConfig naive_cfg = pcr_cfg;
    naive_cfg.conflict.mode = conflict::Mode::NaiveSum;
    const auto naive_res = harness::train(naive_cfg);

    const double sd_pcr = population_std(pcr_res.step_grad_norms);
    const double sd_naive = population_std(naive_res.step_grad_norms);
    const double frac =
        static_cast<double>(pcr_res.conflicted_layer_steps) /
        static_cast<double>(pcr_res.total_layer_steps);
    detail("seed %llu: grad-norm std %.5f (pcr) vs %.5f (naive), "
           "conflict fraction %.3f",
           static_cast<unsigned long long>(seed), sd_pcr, sd_naive, frac);
    if (sd_pcr <= sd_naive) ++wins;
    conflicted += pcr_res.conflicted_layer_steps;
    total += pcr_res.total_layer_steps;
  }
  const double overall =
      static_cast<double>(conflicted) / static_cast<double>(total);
  detail("pcr no-worse in %d/5 seeds; overall conflict fraction %.3f", wins,
         overall);
  if (wins < 4) {
    detail("smoothing trend not met (need >= 4/5)");
    return false;
  }
  if (!(overall > 0.1)) {
    detail("conflict regime not reached (need fraction > 0.1)");
    return false;
  }
  return true;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* desc;
    bool (*fn)();
  };
  const Criterion criteria[] = {
      {1, "closed-form risks, optimum and strict dominance", criterion_closed_forms},
      {2, "monte carlo risk agreement and sweep argmin", criterion_monte_carlo},
      {3, "retention arbitration values and limits", criterion_arbitration},
      {4, "projection geometry in dims {2, 8, 512}", criterion_geometry},
      {5, "gradients vs finite differences per tag", criterion_gradients},
      {6, "resolution mode equivalences (bit-exact)", criterion_mode_equivalences},
      {7, "quadratic testbed risk ratios", criterion_quad_testbed},
      {8, "variance estimator vs brute-force trace", criterion_variance_oracle},
      {9, "byte-identical training artifacts", criterion_determinism},
      {10, "grad-norm stability trend across seeds", criterion_stability_trend},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    g_detail_printed = false;
    bool ok = false;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      ok = c.fn();
    } catch (const std::exception& e) {
      detail("exception: %s", e.what());
      ok = false;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::printf("[%2d] %-52s %s  (%.1fs)\n", c.id, c.desc,
                ok ? "PASS" : "FAIL", secs);
    if (!ok) ++failures;
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all %zu criteria passed\n", std::size(criteria));
  return 0;
}
