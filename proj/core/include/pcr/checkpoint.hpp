// Copyright 2026 the pcrlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>

#include "pcr/model.hpp"
#include "pcr/tensor.hpp"

namespace pcr {

// Text checkpoint format, one file per model:
//
//   pcrlab-checkpoint v1 vocab_size=.. d_model=.. d_ff=.. max_seq_len=..
//       ln_eps=<hexfloat> entries=N            (single header line)
//   <name> <tag> <ndims> <dim0> <dim1> ...     (entry descriptor line)
//   <hexfloat> <hexfloat> ...                  (values, one line per entry)
//
// Values are written with %a so save -> load -> save is byte-identical and
// every double round-trips exactly.
struct Checkpoint {
  model::ModelConfig config;
  ParamSet params;
};

void save_checkpoint(std::ostream& os, const model::ModelConfig& cfg,
                     const ParamSet& params);
void save_checkpoint_file(const std::string& path,
                          const model::ModelConfig& cfg,
                          const ParamSet& params);

// Throws std::runtime_error on malformed input.
Checkpoint load_checkpoint(std::istream& is);
Checkpoint load_checkpoint_file(const std::string& path);

}  // namespace pcr
