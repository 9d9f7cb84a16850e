// Copyright 2026 the pcrlab authors
// SPDX-License-Identifier: Apache-2.0

#include "pcr/harness/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nlohmann/json.hpp"

#include "pcr/version.hpp"

namespace pcr::harness {

using nlohmann::json;

bool MetricsRecord::all_finite() const {
  const double scalars[] = {mean_reward,   plasticity_loss, stability_loss,
                            heldout_nll,   grad_norm_total, alpha_summary.min,
                            alpha_summary.median, alpha_summary.max,
                            conflict_fraction};
  for (double v : scalars) {
    if (!std::isfinite(v)) return false;
  }
  for (const auto& [name, cosine] : layer_cosines) {
    (void)name;
    if (!std::isfinite(cosine)) return false;
  }
  return true;
}

std::string metrics_line_json(const MetricsRecord& r) {
  json j;
  j["step"] = r.step;
  j["mean_reward"] = r.mean_reward;
  j["plasticity_loss"] = r.plasticity_loss;
  j["stability_loss"] = r.stability_loss;
  j["heldout_nll"] = r.heldout_nll;
  j["grad_norm_total"] = r.grad_norm_total;
  // Array of [name, value] pairs: preserves layer order through a round trip.
  json cosines = json::array();
  for (const auto& [name, cosine] : r.layer_cosines) {
    cosines.push_back(json::array({name, cosine}));
  }
  j["layer_cosines"] = cosines;
  j["alpha_summary"] = {{"count", r.alpha_summary.count},
                        {"min", r.alpha_summary.min},
                        {"median", r.alpha_summary.median},
                        {"max", r.alpha_summary.max}};
  j["conflict_fraction"] = r.conflict_fraction;
  return j.dump();
}

MetricsRecord parse_metrics_line(const std::string& line) {
  const json j = json::parse(line);
  MetricsRecord r;
  r.step = j.at("step").get<int>();
  r.mean_reward = j.at("mean_reward").get<double>();
  r.plasticity_loss = j.at("plasticity_loss").get<double>();
  r.stability_loss = j.at("stability_loss").get<double>();
  r.heldout_nll = j.at("heldout_nll").get<double>();
  r.grad_norm_total = j.at("grad_norm_total").get<double>();
  for (const auto& pair : j.at("layer_cosines")) {
    r.layer_cosines.emplace_back(pair.at(0).get<std::string>(),
                                 pair.at(1).get<double>());
  }
  const auto& a = j.at("alpha_summary");
  r.alpha_summary.count = a.at("count").get<int>();
  r.alpha_summary.min = a.at("min").get<double>();
  r.alpha_summary.median = a.at("median").get<double>();
  r.alpha_summary.max = a.at("max").get<double>();
  r.conflict_fraction = j.at("conflict_fraction").get<double>();
  return r;
}

double median_of(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("median of empty set");
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  if (n % 2 == 1) return xs[n / 2];
  return 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

std::string run_manifest_json(const RunConfig& cfg) {
  json j;
  j["format"] = "pcrlab-run-manifest";
  j["format_version"] = 1;
  j["pcrlab_version"] = kVersion;
  j["seed"] = cfg.seed;
  j["config_hash"] = config_hash(cfg);
  j["config"] = canonical_config_text(cfg);
  return j.dump(2) + "\n";
}

}  // namespace pcr::harness
