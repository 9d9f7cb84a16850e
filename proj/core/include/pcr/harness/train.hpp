// Copyright 2026 the pcrlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcr/harness/config.hpp"
#include "pcr/harness/metrics.hpp"
#include "pcr/tensor.hpp"

namespace pcr::harness {

// Raised when a run produces non-finite parameters, gradients or metrics
// (CLI maps it to exit 3).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainSinks {
  std::ostream* metrics_jsonl = nullptr;
  std::ostream* resolution_jsonl = nullptr;
};

struct TrainResult {
  ParamSet params;
  std::vector<MetricsRecord> metrics;
  std::vector<double> step_grad_norms;  // resolved-update norm per step
  long conflicted_layer_steps = 0;
  long total_layer_steps = 0;
};

// Full GRPO training loop with conflict-resolved updates.  Single-threaded
// and fully derived from cfg.seed: the same config yields the same result
// and byte-identical sink output on every run.
TrainResult train(const RunConfig& cfg, const TrainSinks& sinks = {});

// train() plus artifacts on disk: metrics.jsonl, resolution.jsonl,
// summary.csv, run_manifest.json and final.ckpt inside out_dir (created if
// missing).
TrainResult run_training(const RunConfig& cfg, const std::string& out_dir);

}  // namespace pcr::harness
