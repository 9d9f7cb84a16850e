// Copyright 2026 the pcrlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "pcr/conflict.hpp"
#include "pcr/tensor.hpp"

namespace pcr::harness {

// Synthetic two-objective quadratic testbed.  The plasticity pull is toward
// theta_task, the stability pull toward the origin, and their true gradients
// at theta are (theta - theta_task) and theta.  Per-step "per-query" samples
// add isotropic Gaussian noise with the configured scales, then flow through
// the real estimation/resolution pipeline.  Starting at theta_task / 2 the
// two pulls oppose exactly, so conflict is present from step one.
struct QuadSpec {
  int dim = 16;
  DenseVec theta_task;     // empty means all-ones of length dim
  double noise_pla = 1.0;  // per-coordinate sample noise, plasticity stream
  double noise_sta = 1.0;  // per-coordinate sample noise, stability stream
  int steps = 1000;
  int samples_per_step = 8;
  double eta = 0.01;       // step size; 0 freezes the geometry in place
  double beta = 0.0;       // stability weight in fallback/naive combinations
  conflict::ConflictConfig conflict;  // floors etc.; mode is chosen per call

  void validate() const;
};

// Per-step diagnostics.  The axis-error columns score each policy on the
// scalar observation channel along the stability direction: a latent
// z* ~ N(0, noise_sta^2/N) observed as z* + eps, eps ~ N(0, noise_pla^2/N),
// with the estimator (1 - alpha_mode) * z_obs using the alpha each policy
// actually applied that step (1 for full projection, 0 when combining).
struct QuadStepRecord {
  int step = 0;
  double dist_task = 0.0;  // |theta - theta_task|
  double dist_ref = 0.0;   // |theta|
  double dot = 0.0;        // <mu_pla, mu_sta> of the estimated means
  bool conflict = false;
  double alpha_used = 0.0;  // driving mode's removal fraction
  double axis_err_pcr = 0.0;
  double axis_err_pcgrad = 0.0;
  double axis_err_sum = 0.0;
  double update_gap_pcr_pcgrad = 0.0;  // relative distance of the two updates
};

struct QuadResult {
  std::vector<QuadStepRecord> trace;
  double mse_pcr = 0.0;      // mean of axis_err_pcr
  double mse_pcgrad = 0.0;
  double mse_sum = 0.0;
  double mean_update_gap = 0.0;
  double conflict_fraction = 0.0;
  double final_dist_task = 0.0;
  double final_dist_ref = 0.0;
};

// Runs the testbed driving theta with `drive_mode` (Pcr, PcGrad or NaiveSum);
// all three policies are scored on the shared channel draws every step.
QuadResult quad_testbed(const QuadSpec& spec, conflict::Mode drive_mode,
                        std::uint64_t seed);

void write_quad_trace_csv(std::ostream& os, const QuadResult& result);

}  // namespace pcr::harness
