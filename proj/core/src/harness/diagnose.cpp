// Copyright 2026 the pcrlab authors
// SPDX-License-Identifier: Apache-2.0

#include "pcr/harness/diagnose.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace pcr::harness {
namespace {

constexpr double kZeroNormFloor = 1e-12;

std::string g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

std::vector<DiagnosticRow> diagnose(const model::ModelConfig& mcfg,
                                    const ParamSet& params,
                                    const ParamSet& ref_params,
                                    const std::vector<grpo::RolloutGroup>& groups,
                                    const grpo::GrpoConfig& cfg) {
  const auto [loss_pla, g_pla] =
      grpo::plasticity_loss_and_grad(mcfg, params, groups, cfg);
  const auto [loss_sta, g_sta] =
      grpo::stability_loss_and_grad(mcfg, params, ref_params, groups, cfg);
  (void)loss_pla;
  (void)loss_sta;

  std::vector<DiagnosticRow> rows;
  rows.reserve(g_pla.entries.size());
  for (std::size_t l = 0; l < g_pla.entries.size(); ++l) {
    const auto& p = g_pla.entries[l].values;
    const auto& s = g_sta.entries[l].values;
    DiagnosticRow row;
    row.layer = g_pla.entries[l].name;
    row.tag = g_pla.entries[l].tag;
    row.dot = dot(p, s);
    row.norm_pla = norm(p);
    row.norm_sta = norm(s);
    row.zero_norm = row.norm_pla < kZeroNormFloor || row.norm_sta < kZeroNormFloor;
    row.cosine = row.zero_norm ? 0.0 : row.dot / (row.norm_pla * row.norm_sta);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_diagnose_csv(std::ostream& os,
                        const std::vector<DiagnosticRow>& rows) {
  os << "layer,tag,dot,cosine,norm_pla,norm_sta,zero_norm\n";
  for (const auto& r : rows) {
    os << r.layer << "," << layer_tag_name(r.tag) << "," << g17(r.dot) << ","
       << g17(r.cosine) << "," << g17(r.norm_pla) << "," << g17(r.norm_sta)
       << "," << (r.zero_norm ? 1 : 0) << "\n";
  }
}

}  // namespace pcr::harness
