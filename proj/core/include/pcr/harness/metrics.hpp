// Copyright 2026 the pcrlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pcr/harness/config.hpp"

namespace pcr::harness {

// Spread of the retention-derived alpha values observed in one eval window.
struct AlphaSummary {
  int count = 0;  // projected layer-steps contributing
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
};

// One evaluation snapshot emitted to metrics.jsonl.
struct MetricsRecord {
  int step = 0;
  double mean_reward = 0.0;
  double plasticity_loss = 0.0;
  double stability_loss = 0.0;
  double heldout_nll = 0.0;
  double grad_norm_total = 0.0;
  std::vector<std::pair<std::string, double>> layer_cosines;
  AlphaSummary alpha_summary;
  double conflict_fraction = 0.0;  // conflicted layer-steps / all layer-steps

  bool all_finite() const;
};

// Round-trippable JSONL encoding: parse_metrics_line(metrics_line_json(r))
// reproduces r exactly (doubles survive bit-for-bit).
std::string metrics_line_json(const MetricsRecord& r);
MetricsRecord parse_metrics_line(const std::string& line);

// Median via fixed midpoint rule; input copied, not modified.
double median_of(std::vector<double> xs);

// run_manifest.json: format tag, library version, seed and config hash plus
// the canonical config text.  Contains nothing volatile (no timestamps or
// paths), so identical runs produce identical manifests.
std::string run_manifest_json(const RunConfig& cfg);

}  // namespace pcr::harness
