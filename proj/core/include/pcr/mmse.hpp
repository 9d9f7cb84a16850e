// Copyright 2026 the pcrlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace pcr::mmse {

// Scalar observation channel: a latent z* ~ N(0, var_sta) is observed as
// z_obs = z* + eps with eps ~ N(0, var_pla).  The estimator family is
// zhat(alpha) = (1 - alpha) * z_obs.
struct ScalarChannel {
  double var_pla = 1.0;  // observation-noise variance
  double var_sta = 1.0;  // latent (signal) variance

  void validate() const;  // positive, finite
};

// Exact mean squared error of zhat(alpha):
//   R(alpha) = alpha^2 var_sta + (1 - alpha)^2 var_pla.
// alpha must lie in [0, 1].
double risk_analytic(const ScalarChannel& ch, double alpha);

// Risk minimizer: alpha* = var_pla / (var_pla + var_sta).
double optimal_alpha(const ScalarChannel& ch);

struct MonteCarloRisk {
  double estimate = 0.0;
  double std_err = 0.0;
  std::int64_t samples = 0;
};

// Monte Carlo estimate of R(alpha).  Draws are generated in fixed-size
// batches with per-batch derived seeds, so the sample stream for a given
// (seed, n_samples) is independent of alpha — the same draws evaluated at
// different alphas are common random numbers.
MonteCarloRisk risk_monte_carlo(const ScalarChannel& ch, double alpha,
                                std::int64_t n_samples, std::uint64_t seed);

// Evaluate the Monte Carlo risk on a uniform alpha grid over [0, 1], reusing
// one stream of draws for every grid point (common random numbers).  Each
// grid cell is bit-identical to risk_monte_carlo at the same alpha/seed.
struct RiskCurve {
  std::vector<double> alphas;
  std::vector<double> risk_mc;
  std::vector<double> std_err;
  std::vector<double> risk_analytic;
  double argmin_alpha = 0.0;  // grid alpha with the smallest MC risk
};
RiskCurve risk_sweep(const ScalarChannel& ch, int grid_points,
                     std::int64_t n_samples, std::uint64_t seed);

// Analytic risks of the three estimator choices:
//   full removal (alpha = 1)  -> var_sta
//   no removal   (alpha = 0)  -> var_pla
//   optimal alpha             -> var_pla * var_sta / (var_pla + var_sta),
// plus whether the optimum strictly beats both endpoints.
struct DominanceCheck {
  double risk_opt = 0.0;
  double risk_full_removal = 0.0;
  double risk_no_removal = 0.0;
  bool strict = false;
};
DominanceCheck dominance_check(const ScalarChannel& ch);

// CSV with header "alpha,risk_mc,std_err,risk_analytic", one row per grid
// point, doubles printed with 17 significant digits.
void write_risk_curve_csv(std::ostream& os, const RiskCurve& curve);

}  // namespace pcr::mmse
