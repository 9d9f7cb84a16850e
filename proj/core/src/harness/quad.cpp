// Copyright 2026 the pcrlab authors
// SPDX-License-Identifier: Apache-2.0

#include "pcr/harness/quad.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "pcr/rng.hpp"

namespace pcr::harness {
namespace {

constexpr std::uint64_t kStreamQuadNoise = 21;
constexpr std::uint64_t kStreamQuadChannel = 22;

GradSet wrap_vec(const DenseVec& v) {
  TensorEntry e;
  e.name = "quad";
  e.tag = LayerTag::Mlp;
  e.shape = {static_cast<int>(v.size())};
  e.values = v;
  GradSet g;
  g.entries.push_back(std::move(e));
  return g;
}

std::string g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

void QuadSpec::validate() const {
  if (dim < 1) throw std::invalid_argument("quad: dim must be >= 1");
  if (!theta_task.empty() && static_cast<int>(theta_task.size()) != dim) {
    throw std::invalid_argument("quad: theta_task length must equal dim");
  }
  if (noise_pla < 0.0 || noise_sta < 0.0) {
    throw std::invalid_argument("quad: noise scales must be >= 0");
  }
  if (steps < 1) throw std::invalid_argument("quad: steps must be >= 1");
  if (samples_per_step < 2) {
    throw std::invalid_argument("quad: samples_per_step must be >= 2");
  }
  if (eta < 0.0 || !std::isfinite(eta)) {
    throw std::invalid_argument("quad: eta must be finite and >= 0");
  }
  if (beta < 0.0 || !std::isfinite(beta)) {
    throw std::invalid_argument("quad: beta must be finite and >= 0");
  }
  conflict.validate();
}

QuadResult quad_testbed(const QuadSpec& spec, conflict::Mode drive_mode,
                        std::uint64_t seed) {
  spec.validate();
  if (drive_mode != conflict::Mode::Pcr && drive_mode != conflict::Mode::PcGrad &&
      drive_mode != conflict::Mode::NaiveSum) {
    throw std::invalid_argument("quad: drive mode must be pcr, pcgrad or naive_sum");
  }
  const int d = spec.dim;
  const int n = spec.samples_per_step;
  DenseVec theta_task = spec.theta_task;
  if (theta_task.empty()) theta_task.assign(d, 1.0);

  DenseVec theta(d);
  for (int i = 0; i < d; ++i) theta[i] = 0.5 * theta_task[i];

  // True variances of the per-coordinate sample means, used by the scalar
  // observation channel the modes are scored on.
  const double var_sta_true = spec.noise_sta * spec.noise_sta / n;
  const double var_pla_true = spec.noise_pla * spec.noise_pla / n;
  const double sd_sta_true = std::sqrt(var_sta_true);
  const double sd_pla_true = std::sqrt(var_pla_true);

  QuadResult out;
  out.trace.reserve(spec.steps);
  double sum_err_pcr = 0.0;
  double sum_err_pcgrad = 0.0;
  double sum_err_sum = 0.0;
  double sum_gap = 0.0;
  long conflict_steps = 0;

  std::vector<GradSet> pla_samples(n);
  std::vector<GradSet> sta_samples(n);
  for (int step = 0; step < spec.steps; ++step) {
    // Noisy per-query gradient samples around the true pulls.
    Rng noise_rng(derive_seed(seed, {kStreamQuadNoise,
                                     static_cast<std::uint64_t>(step)}));
    DenseVec g_pla(d), g_sta(d);
    for (int q = 0; q < n; ++q) {
      for (int i = 0; i < d; ++i) {
        g_pla[i] = (theta[i] - theta_task[i]) +
                   spec.noise_pla * noise_rng.gaussian();
      }
      for (int i = 0; i < d; ++i) {
        g_sta[i] = theta[i] + spec.noise_sta * noise_rng.gaussian();
      }
      pla_samples[q] = wrap_vec(g_pla);
      sta_samples[q] = wrap_vec(g_sta);
    }

    const auto est_pla = conflict::estimate_gaussian(
        pla_samples, conflict::Granularity::PerLayer, spec.conflict.variance_norm);
    const auto est_sta = conflict::estimate_gaussian(
        sta_samples, conflict::Granularity::PerLayer, spec.conflict.variance_norm);
    const DenseVec& mu_pla = est_pla[0].mean;
    const DenseVec& mu_sta = est_sta[0].mean;

    // All three policies on the same estimates.
    const conflict::LayerOutcome pcr_out =
        conflict::pcr_layer(mu_pla, mu_sta, est_pla[0].variance,
                            est_sta[0].variance, spec.beta, spec.conflict);
    const DenseVec pcgrad_out =
        conflict::pcgrad_layer(mu_pla, mu_sta, spec.beta, spec.conflict);
    DenseVec sum_out(d);
    for (int i = 0; i < d; ++i) sum_out[i] = mu_pla[i] + spec.beta * mu_sta[i];

    // Removal fractions the policies actually applied.  The branch taken is
    // shared (same guards), so PcGrad projected iff the Pcr branch did.
    const bool projected =
        pcr_out.report.method == conflict::Method::PcrSoft;
    const double alpha_pcr = projected ? pcr_out.report.alpha : 0.0;
    const double alpha_pcgrad = projected ? 1.0 : 0.0;

    // Shared-draw scalar channel along the stability axis.
    Rng channel_rng(derive_seed(seed, {kStreamQuadChannel,
                                       static_cast<std::uint64_t>(step)}));
    const double z_true = channel_rng.gaussian(0.0, sd_sta_true);
    const double eps = channel_rng.gaussian(0.0, sd_pla_true);
    const double z_obs = z_true + eps;
    const auto axis_err = [&](double alpha) {
      const double zhat = (1.0 - alpha) * z_obs;
      const double err = zhat - z_true;
      return err * err;
    };

    QuadStepRecord rec;
    rec.step = step;
    rec.dot = dot(mu_pla, mu_sta);
    rec.conflict = pcr_out.report.conflict;
    rec.axis_err_pcr = axis_err(alpha_pcr);
    rec.axis_err_pcgrad = axis_err(alpha_pcgrad);
    rec.axis_err_sum = axis_err(0.0);

    double gap_sq = 0.0;
    double ref_sq = 0.0;
    for (int i = 0; i < d; ++i) {
      const double diff = pcr_out.g_out[i] - pcgrad_out[i];
      gap_sq += diff * diff;
      ref_sq += pcgrad_out[i] * pcgrad_out[i];
    }
    rec.update_gap_pcr_pcgrad =
        ref_sq > 0.0 ? std::sqrt(gap_sq / ref_sq) : 0.0;

    const DenseVec* update = &sum_out;
    double alpha_used = 0.0;
    if (drive_mode == conflict::Mode::Pcr) {
      update = &pcr_out.g_out;
      alpha_used = alpha_pcr;
    } else if (drive_mode == conflict::Mode::PcGrad) {
      update = &pcgrad_out;
      alpha_used = alpha_pcgrad;
    }
    rec.alpha_used = alpha_used;
    for (int i = 0; i < d; ++i) theta[i] -= spec.eta * (*update)[i];

    double dist_task_sq = 0.0;
    double dist_ref_sq = 0.0;
    for (int i = 0; i < d; ++i) {
      const double dt = theta[i] - theta_task[i];
      dist_task_sq += dt * dt;
      dist_ref_sq += theta[i] * theta[i];
    }
    rec.dist_task = std::sqrt(dist_task_sq);
    rec.dist_ref = std::sqrt(dist_ref_sq);

    sum_err_pcr += rec.axis_err_pcr;
    sum_err_pcgrad += rec.axis_err_pcgrad;
    sum_err_sum += rec.axis_err_sum;
    sum_gap += rec.update_gap_pcr_pcgrad;
    if (rec.conflict) ++conflict_steps;
    out.trace.push_back(rec);
  }

  const double inv_steps = 1.0 / static_cast<double>(spec.steps);
  out.mse_pcr = sum_err_pcr * inv_steps;
  out.mse_pcgrad = sum_err_pcgrad * inv_steps;
  out.mse_sum = sum_err_sum * inv_steps;
  out.mean_update_gap = sum_gap * inv_steps;
  out.conflict_fraction = static_cast<double>(conflict_steps) * inv_steps;
  out.final_dist_task = out.trace.back().dist_task;
  out.final_dist_ref = out.trace.back().dist_ref;
  return out;
}

void write_quad_trace_csv(std::ostream& os, const QuadResult& result) {
  os << "step,dist_task,dist_ref,dot,conflict,alpha_used,axis_err_pcr,"
        "axis_err_pcgrad,axis_err_sum,update_gap_pcr_pcgrad\n";
  for (const auto& r : result.trace) {
    os << r.step << "," << g17(r.dist_task) << "," << g17(r.dist_ref) << ","
       << g17(r.dot) << "," << (r.conflict ? 1 : 0) << "," << g17(r.alpha_used)
       << "," << g17(r.axis_err_pcr) << "," << g17(r.axis_err_pcgrad) << ","
       << g17(r.axis_err_sum) << "," << g17(r.update_gap_pcr_pcgrad) << "\n";
  }
}

}  // namespace pcr::harness
