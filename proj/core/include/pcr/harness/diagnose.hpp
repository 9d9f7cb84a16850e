// Copyright 2026 the pcrlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pcr/grpo.hpp"
#include "pcr/model.hpp"
#include "pcr/tensor.hpp"

namespace pcr::harness {

// Offline per-layer geometry of the two gradient streams at a checkpoint.
struct DiagnosticRow {
  std::string layer;
  LayerTag tag = LayerTag::Mlp;
  double dot = 0.0;
  double cosine = 0.0;  // 0 when either stream has (near-)zero norm
  double norm_pla = 0.0;
  double norm_sta = 0.0;
  bool zero_norm = false;
};

std::vector<DiagnosticRow> diagnose(const model::ModelConfig& mcfg,
                                    const ParamSet& params,
                                    const ParamSet& ref_params,
                                    const std::vector<grpo::RolloutGroup>& groups,
                                    const grpo::GrpoConfig& cfg);

void write_diagnose_csv(std::ostream& os,
                        const std::vector<DiagnosticRow>& rows);

}  // namespace pcr::harness
