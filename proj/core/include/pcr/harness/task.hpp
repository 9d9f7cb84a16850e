// Copyright 2026 the pcrlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "pcr/rng.hpp"

namespace pcr::harness {

// Synthetic sequence tasks with a deterministic correct answer per query.
//   ReverseSequence: target is the query reversed.
//   SumModVocab:     target is the single token (sum of query) mod vocab.
enum class TaskKind { ReverseSequence, SumModVocab };

const char* task_kind_name(TaskKind k);
std::optional<TaskKind> task_kind_from_name(std::string_view s);

struct TaskSpec {
  TaskKind kind = TaskKind::ReverseSequence;
  int query_len = 6;

  void validate(int vocab_size, int max_seq_len) const;
};

struct TaskInstance {
  std::vector<int> query;   // tokens in [1, vocab); EOS never appears in queries
  std::vector<int> target;  // correct response
};

// Query tokens are drawn uniformly from [1, vocab); the target follows
// deterministically from the query.
TaskInstance make_task(const TaskSpec& spec, int vocab_size, Rng& rng);

// A contrarian mapping over the same query distribution, used to pretrain
// reference policies whose preferences oppose the task:
//   ReverseSequence -> copy the query unchanged;
//   SumModVocab     -> (sum + vocab/2) mod vocab.
std::vector<int> counter_target(const TaskSpec& spec, int vocab_size,
                                const std::vector<int>& query);

// Positional-overlap reward in [0, 1]: matching positions divided by
// max(target length, response length).  Exact match scores 1.
double reward(const std::vector<int>& response, const std::vector<int>& target);

}  // namespace pcr::harness
