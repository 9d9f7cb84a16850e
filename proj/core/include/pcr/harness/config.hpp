// Copyright 2026 the pcrlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "pcr/conflict.hpp"
#include "pcr/grpo.hpp"
#include "pcr/harness/task.hpp"
#include "pcr/model.hpp"

namespace pcr::harness {

// Raised for malformed or invalid run configuration (CLI maps it to exit 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class OptimizerKind { Sgd, AdamLike };
const char* optimizer_kind_name(OptimizerKind k);

// AdamLike moment constants are fixed, not configurable.
inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

// Everything a training run depends on.  Parsed from an INI-style key=value
// file with [run], [model], [grpo] and [conflict] sections; unknown sections
// or keys are errors, missing keys keep their defaults.
struct RunConfig {
  // [run]
  std::uint64_t seed = 1;
  int steps = 100;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::Sgd;
  int eval_every = 10;
  int heldout_prompts = 16;
  TaskKind task = TaskKind::ReverseSequence;
  int query_len = 6;
  double reward_flip_prob = 0.0;     // chance a sampled reward is replaced by 1-r
  int counter_pretrain_steps = 0;    // supervised steps on the counter mapping
  double counter_pretrain_lr = 0.1;  // learning rate for that phase

  // [model], [grpo], [conflict]
  model::ModelConfig model;
  grpo::GrpoConfig grpo;
  conflict::ConflictConfig conflict;

  void validate() const;  // throws ConfigError
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// Every field in a fixed order and fixed formatting; two configs are equal
// iff their canonical texts match.
std::string canonical_config_text(const RunConfig& cfg);

// FNV-1a hash of the canonical text, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

}  // namespace pcr::harness
