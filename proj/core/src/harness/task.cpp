// Copyright 2026 the pcrlab authors
// SPDX-License-Identifier: Apache-2.0

#include "pcr/harness/task.hpp"

#include <algorithm>
#include <stdexcept>

namespace pcr::harness {

const char* task_kind_name(TaskKind k) {
  switch (k) {
    case TaskKind::ReverseSequence: return "reverse_sequence";
    case TaskKind::SumModVocab: return "sum_mod_vocab";
  }
  throw std::invalid_argument("task_kind_name: unknown kind");
}

std::optional<TaskKind> task_kind_from_name(std::string_view s) {
  if (s == "reverse_sequence") return TaskKind::ReverseSequence;
  if (s == "sum_mod_vocab") return TaskKind::SumModVocab;
  return std::nullopt;
}

void TaskSpec::validate(int vocab_size, int max_seq_len) const {
  if (query_len < 1) throw std::invalid_argument("query_len must be >= 1");
  if (vocab_size < 2) throw std::invalid_argument("vocab_size must be >= 2");
  const int target_len = kind == TaskKind::ReverseSequence ? query_len : 1;
  // Sampling runs to the full target length plus room for one EOS overrun.
  if (query_len + target_len + 1 > max_seq_len) {
    throw std::invalid_argument("query_len too large for max_seq_len");
  }
}

TaskInstance make_task(const TaskSpec& spec, int vocab_size, Rng& rng) {
  if (spec.query_len < 1 || vocab_size < 2) {
    throw std::invalid_argument("make_task: bad spec");
  }
  TaskInstance out;
  out.query.resize(spec.query_len);
  for (int& t : out.query) t = rng.uniform_int(1, vocab_size - 1);

  switch (spec.kind) {
    case TaskKind::ReverseSequence:
      out.target.assign(out.query.rbegin(), out.query.rend());
      break;
    case TaskKind::SumModVocab: {
      long sum = 0;
      for (int t : out.query) sum += t;
      out.target.assign(1, static_cast<int>(sum % vocab_size));
      break;
    }
  }
  return out;
}

std::vector<int> counter_target(const TaskSpec& spec, int vocab_size,
                                const std::vector<int>& query) {
  switch (spec.kind) {
    case TaskKind::ReverseSequence:
      return query;  // copy instead of reverse
    case TaskKind::SumModVocab: {
      long sum = 0;
      for (int t : query) sum += t;
      return {static_cast<int>((sum + vocab_size / 2) % vocab_size)};
    }
  }
  throw std::invalid_argument("counter_target: unknown kind");
}

double reward(const std::vector<int>& response,
              const std::vector<int>& target) {
  if (target.empty()) throw std::invalid_argument("reward: empty target");
  const std::size_t overlap = std::min(response.size(), target.size());
  std::size_t matches = 0;
  for (std::size_t i = 0; i < overlap; ++i) {
    if (response[i] == target[i]) ++matches;
  }
  const std::size_t denom = std::max(response.size(), target.size());
  return static_cast<double>(matches) / static_cast<double>(denom);
}

}  // namespace pcr::harness
