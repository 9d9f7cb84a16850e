// Copyright 2026 the pcrlab authors
// SPDX-License-Identifier: Apache-2.0

#include "pcr/mmse.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "pcr/rng.hpp"

namespace pcr::mmse {
namespace {

// Draws are produced in fixed-size batches, each batch from its own derived
// stream.  Grid sweeps iterate the identical batches, which is what makes the
// per-alpha estimates common-random-number coupled.
constexpr std::int64_t kMcBatch = 8192;
constexpr std::uint64_t kMcStreamTag = 0x6d637273ULL;

Rng batch_rng(std::uint64_t seed, std::int64_t batch_index) {
  return Rng(derive_seed(seed, {kMcStreamTag,
                                static_cast<std::uint64_t>(batch_index)}));
}

void check_mc_args(double alpha, std::int64_t n_samples) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in [0, 1]");
  }
  if (n_samples < 100) {
    throw std::invalid_argument("need at least 100 Monte Carlo samples");
  }
}

std::string format_g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

void ScalarChannel::validate() const {
  if (!(var_pla > 0.0) || !std::isfinite(var_pla)) {
    throw std::invalid_argument("var_pla must be positive and finite");
  }
  if (!(var_sta > 0.0) || !std::isfinite(var_sta)) {
    throw std::invalid_argument("var_sta must be positive and finite");
  }
}

double risk_analytic(const ScalarChannel& ch, double alpha) {
  ch.validate();
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in [0, 1]");
  }
  const double keep = 1.0 - alpha;
  return alpha * alpha * ch.var_sta + keep * keep * ch.var_pla;
}

double optimal_alpha(const ScalarChannel& ch) {
  ch.validate();
  return ch.var_pla / (ch.var_pla + ch.var_sta);
}

MonteCarloRisk risk_monte_carlo(const ScalarChannel& ch, double alpha,
                                std::int64_t n_samples, std::uint64_t seed) {
  ch.validate();
  check_mc_args(alpha, n_samples);
  const double sd_sta = std::sqrt(ch.var_sta);
  const double sd_pla = std::sqrt(ch.var_pla);
  const double keep = 1.0 - alpha;

  double sum = 0.0;
  double sum_sq = 0.0;
  std::int64_t done = 0;
  for (std::int64_t b = 0; done < n_samples; ++b) {
    Rng rng = batch_rng(seed, b);
    const std::int64_t m = std::min(kMcBatch, n_samples - done);
    for (std::int64_t i = 0; i < m; ++i) {
      const double z = rng.gaussian(0.0, sd_sta);
      const double e = rng.gaussian(0.0, sd_pla);
      const double err = keep * (z + e) - z;
      const double sq = err * err;
      sum += sq;
      sum_sq += sq * sq;
    }
    done += m;
  }
  MonteCarloRisk out;
  out.samples = n_samples;
  out.estimate = sum / static_cast<double>(n_samples);
  const double var =
      sum_sq / static_cast<double>(n_samples) - out.estimate * out.estimate;
  out.std_err = std::sqrt(std::max(var, 0.0) / static_cast<double>(n_samples));
  return out;
}

RiskCurve risk_sweep(const ScalarChannel& ch, int grid_points,
                     std::int64_t n_samples, std::uint64_t seed) {
  ch.validate();
  if (grid_points < 11) {
    throw std::invalid_argument("risk_sweep: need at least 11 grid points");
  }
  if (n_samples < 100) {
    throw std::invalid_argument("risk_sweep: need at least 100 samples");
  }

  RiskCurve curve;
  curve.alphas.resize(grid_points);
  for (int g = 0; g < grid_points; ++g) {
    curve.alphas[g] =
        static_cast<double>(g) / static_cast<double>(grid_points - 1);
  }

  // Shared draws across the whole grid: every alpha sees the same (z, e)
  // stream, so curve differences reflect alpha alone, not sampling noise.
  std::vector<double> sum(grid_points, 0.0);
  std::vector<double> sum_sq(grid_points, 0.0);
  const double sd_sta = std::sqrt(ch.var_sta);
  const double sd_pla = std::sqrt(ch.var_pla);
  std::int64_t done = 0;
  for (std::int64_t b = 0; done < n_samples; ++b) {
    Rng rng = batch_rng(seed, b);
    const std::int64_t m = std::min(kMcBatch, n_samples - done);
    for (std::int64_t i = 0; i < m; ++i) {
      const double z = rng.gaussian(0.0, sd_sta);
      const double e = rng.gaussian(0.0, sd_pla);
      for (int g = 0; g < grid_points; ++g) {
        const double err = (1.0 - curve.alphas[g]) * (z + e) - z;
        const double sq = err * err;
        sum[g] += sq;
        sum_sq[g] += sq * sq;
      }
    }
    done += m;
  }

  curve.risk_mc.resize(grid_points);
  curve.std_err.resize(grid_points);
  curve.risk_analytic.resize(grid_points);
  int argmin = 0;
  for (int g = 0; g < grid_points; ++g) {
    const double est = sum[g] / static_cast<double>(n_samples);
    const double var =
        sum_sq[g] / static_cast<double>(n_samples) - est * est;
    curve.risk_mc[g] = est;
    curve.std_err[g] =
        std::sqrt(std::max(var, 0.0) / static_cast<double>(n_samples));
    curve.risk_analytic[g] = risk_analytic(ch, curve.alphas[g]);
    if (est < curve.risk_mc[argmin]) argmin = g;
  }
  curve.argmin_alpha = curve.alphas[argmin];
  return curve;
}

DominanceCheck dominance_check(const ScalarChannel& ch) {
  ch.validate();
  DominanceCheck out;
  out.risk_full_removal = ch.var_sta;                  // alpha = 1
  out.risk_no_removal = ch.var_pla;                    // alpha = 0
  out.risk_opt = 1.0 / (1.0 / ch.var_pla + 1.0 / ch.var_sta);
  out.strict = out.risk_opt < out.risk_full_removal &&
               out.risk_opt < out.risk_no_removal;
  return out;
}

void write_risk_curve_csv(std::ostream& os, const RiskCurve& curve) {
  os << "alpha,risk_mc,std_err,risk_analytic\n";
  for (std::size_t g = 0; g < curve.alphas.size(); ++g) {
    os << format_g17(curve.alphas[g]) << "," << format_g17(curve.risk_mc[g])
       << "," << format_g17(curve.std_err[g]) << ","
       << format_g17(curve.risk_analytic[g]) << "\n";
  }
}

}  // namespace pcr::mmse
