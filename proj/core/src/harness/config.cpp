// Copyright 2026 the pcrlab authors
// SPDX-License-Identifier: Apache-2.0

#include "pcr/harness/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pcr/rng.hpp"

namespace pcr::harness {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void fail(int line_no, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line_no) + ": " + what);
}

long long parse_int(const std::string& v, int line_no) {
  const char* begin = v.c_str();
  char* end = nullptr;
  const long long x = std::strtoll(begin, &end, 10);
  if (end == begin || *end != '\0') fail(line_no, "expected integer, got '" + v + "'");
  return x;
}

std::uint64_t parse_u64(const std::string& v, int line_no) {
  const char* begin = v.c_str();
  char* end = nullptr;
  const unsigned long long x = std::strtoull(begin, &end, 10);
  if (end == begin || *end != '\0') fail(line_no, "expected unsigned integer, got '" + v + "'");
  return x;
}

double parse_double(const std::string& v, int line_no) {
  const char* begin = v.c_str();
  char* end = nullptr;
  const double x = std::strtod(begin, &end);
  if (end == begin || *end != '\0') fail(line_no, "expected number, got '" + v + "'");
  return x;
}

bool parse_bool(const std::string& v, int line_no) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(line_no, "expected bool, got '" + v + "'");
}

void apply_run_key(RunConfig& cfg, const std::string& key,
                   const std::string& value, int line_no) {
  if (key == "seed") {
    cfg.seed = parse_u64(value, line_no);
  } else if (key == "steps") {
    cfg.steps = static_cast<int>(parse_int(value, line_no));
  } else if (key == "learning_rate") {
    cfg.learning_rate = parse_double(value, line_no);
  } else if (key == "optimizer") {
    if (value == "sgd") {
      cfg.optimizer = OptimizerKind::Sgd;
    } else if (value == "adamlike") {
      cfg.optimizer = OptimizerKind::AdamLike;
    } else {
      fail(line_no, "unknown optimizer '" + value + "'");
    }
  } else if (key == "eval_every") {
    cfg.eval_every = static_cast<int>(parse_int(value, line_no));
  } else if (key == "heldout_prompts") {
    cfg.heldout_prompts = static_cast<int>(parse_int(value, line_no));
  } else if (key == "task") {
    const auto kind = task_kind_from_name(value);
    if (!kind) fail(line_no, "unknown task '" + value + "'");
    cfg.task = *kind;
  } else if (key == "query_len") {
    cfg.query_len = static_cast<int>(parse_int(value, line_no));
  } else if (key == "reward_flip_prob") {
    cfg.reward_flip_prob = parse_double(value, line_no);
  } else if (key == "counter_pretrain_steps") {
    cfg.counter_pretrain_steps = static_cast<int>(parse_int(value, line_no));
  } else if (key == "counter_pretrain_lr") {
    cfg.counter_pretrain_lr = parse_double(value, line_no);
  } else {
    fail(line_no, "unknown key '" + key + "' in section [run]");
  }
}

void apply_model_key(RunConfig& cfg, const std::string& key,
                     const std::string& value, int line_no) {
  if (key == "vocab_size") {
    cfg.model.vocab_size = static_cast<int>(parse_int(value, line_no));
  } else if (key == "d_model") {
    cfg.model.d_model = static_cast<int>(parse_int(value, line_no));
  } else if (key == "d_ff") {
    cfg.model.d_ff = static_cast<int>(parse_int(value, line_no));
  } else if (key == "max_seq_len") {
    cfg.model.max_seq_len = static_cast<int>(parse_int(value, line_no));
  } else if (key == "ln_eps") {
    cfg.model.ln_eps = parse_double(value, line_no);
  } else {
    fail(line_no, "unknown key '" + key + "' in section [model]");
  }
}

void apply_grpo_key(RunConfig& cfg, const std::string& key,
                    const std::string& value, int line_no) {
  if (key == "clip_eps") {
    cfg.grpo.clip_eps = parse_double(value, line_no);
  } else if (key == "beta") {
    cfg.grpo.beta = parse_double(value, line_no);
  } else if (key == "adv_eps") {
    cfg.grpo.adv_eps = parse_double(value, line_no);
  } else if (key == "group_size") {
    cfg.grpo.group_size = static_cast<int>(parse_int(value, line_no));
  } else if (key == "batch_size") {
    cfg.grpo.batch_size = static_cast<int>(parse_int(value, line_no));
  } else if (key == "inner_epochs") {
    cfg.grpo.inner_epochs = static_cast<int>(parse_int(value, line_no));
  } else if (key == "freeze_reference") {
    cfg.grpo.freeze_reference = parse_bool(value, line_no);
  } else if (key == "ref_refresh_every") {
    cfg.grpo.ref_refresh_every = static_cast<int>(parse_int(value, line_no));
  } else {
    fail(line_no, "unknown key '" + key + "' in section [grpo]");
  }
}

void apply_conflict_key(RunConfig& cfg, const std::string& key,
                        const std::string& value, int line_no) {
  if (key == "mode") {
    const auto m = conflict::mode_from_name(value);
    if (!m) fail(line_no, "unknown conflict mode '" + value + "'");
    cfg.conflict.mode = *m;
  } else if (key == "fixed_alpha") {
    cfg.conflict.fixed_alpha = parse_double(value, line_no);
  } else if (key == "pcr_scope") {
    const auto s = conflict::pcr_scope_from_name(value);
    if (!s) fail(line_no, "unknown pcr_scope '" + value + "'");
    cfg.conflict.pcr_scope = *s;
  } else if (key == "granularity") {
    const auto g = conflict::granularity_from_name(value);
    if (!g) fail(line_no, "unknown granularity '" + value + "'");
    cfg.conflict.granularity = *g;
  } else if (key == "variance_norm") {
    const auto v = conflict::variance_norm_from_name(value);
    if (!v) fail(line_no, "unknown variance_norm '" + value + "'");
    cfg.conflict.variance_norm = *v;
  } else if (key == "variance_floor") {
    cfg.conflict.variance_floor = parse_double(value, line_no);
  } else if (key == "variance_cap") {
    cfg.conflict.variance_cap = parse_double(value, line_no);
  } else if (key == "sta_norm_floor") {
    cfg.conflict.sta_norm_floor = parse_double(value, line_no);
  } else if (key == "add_beta_sta_in_pcr") {
    cfg.conflict.add_beta_sta_in_pcr = parse_bool(value, line_no);
  } else {
    fail(line_no, "unknown key '" + key + "' in section [conflict]");
  }
}

std::string g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

const char* optimizer_kind_name(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::Sgd: return "sgd";
    case OptimizerKind::AdamLike: return "adamlike";
  }
  throw std::invalid_argument("optimizer_kind_name: unknown kind");
}

void RunConfig::validate() const {
  try {
    model.validate();
    grpo.validate();
    conflict.validate();
    TaskSpec spec{task, query_len};
    spec.validate(model.vocab_size, model.max_seq_len);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (steps < 1) throw ConfigError("steps must be >= 1");
  if (grpo.batch_size < 2) {
    // Per-query spread estimation needs at least two queries per step.
    throw ConfigError("batch_size must be >= 2");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be positive and finite");
  }
  if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (heldout_prompts < 1) throw ConfigError("heldout_prompts must be >= 1");
  if (!(reward_flip_prob >= 0.0 && reward_flip_prob <= 1.0)) {
    throw ConfigError("reward_flip_prob must lie in [0, 1]");
  }
  if (counter_pretrain_steps < 0) {
    throw ConfigError("counter_pretrain_steps must be >= 0");
  }
  if (!(counter_pretrain_lr > 0.0) || !std::isfinite(counter_pretrain_lr)) {
    throw ConfigError("counter_pretrain_lr must be positive and finite");
  }
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const std::size_t cut = raw.find_first_of("#;");
    if (cut != std::string::npos) raw.erase(cut);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "run" && section != "model" && section != "grpo" &&
          section != "conflict") {
        fail(line_no, "unknown section [" + section + "]");
      }
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(line_no, "empty key");
    if (value.empty()) fail(line_no, "empty value for key '" + key + "'");
    if (section.empty()) fail(line_no, "key '" + key + "' before any section");

    if (section == "run") {
      apply_run_key(cfg, key, value, line_no);
    } else if (section == "model") {
      apply_model_key(cfg, key, value, line_no);
    } else if (section == "grpo") {
      apply_grpo_key(cfg, key, value, line_no);
    } else {
      apply_conflict_key(cfg, key, value, line_no);
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_config_text(buf.str());
}

std::string canonical_config_text(const RunConfig& cfg) {
  std::ostringstream os;
  os << "[run]\n";
  os << "seed = " << cfg.seed << "\n";
  os << "steps = " << cfg.steps << "\n";
  os << "learning_rate = " << g17(cfg.learning_rate) << "\n";
  os << "optimizer = " << optimizer_kind_name(cfg.optimizer) << "\n";
  os << "eval_every = " << cfg.eval_every << "\n";
  os << "heldout_prompts = " << cfg.heldout_prompts << "\n";
  os << "task = " << task_kind_name(cfg.task) << "\n";
  os << "query_len = " << cfg.query_len << "\n";
  os << "reward_flip_prob = " << g17(cfg.reward_flip_prob) << "\n";
  os << "counter_pretrain_steps = " << cfg.counter_pretrain_steps << "\n";
  os << "counter_pretrain_lr = " << g17(cfg.counter_pretrain_lr) << "\n";
  os << "[model]\n";
  os << "vocab_size = " << cfg.model.vocab_size << "\n";
  os << "d_model = " << cfg.model.d_model << "\n";
  os << "d_ff = " << cfg.model.d_ff << "\n";
  os << "max_seq_len = " << cfg.model.max_seq_len << "\n";
  os << "ln_eps = " << g17(cfg.model.ln_eps) << "\n";
  os << "[grpo]\n";
  os << "clip_eps = " << g17(cfg.grpo.clip_eps) << "\n";
  os << "beta = " << g17(cfg.grpo.beta) << "\n";
  os << "adv_eps = " << g17(cfg.grpo.adv_eps) << "\n";
  os << "group_size = " << cfg.grpo.group_size << "\n";
  os << "batch_size = " << cfg.grpo.batch_size << "\n";
  os << "inner_epochs = " << cfg.grpo.inner_epochs << "\n";
  os << "freeze_reference = " << (cfg.grpo.freeze_reference ? "true" : "false")
     << "\n";
  os << "ref_refresh_every = " << cfg.grpo.ref_refresh_every << "\n";
  os << "[conflict]\n";
  os << "mode = " << conflict::mode_name(cfg.conflict.mode) << "\n";
  os << "fixed_alpha = " << g17(cfg.conflict.fixed_alpha) << "\n";
  os << "pcr_scope = " << conflict::pcr_scope_name(cfg.conflict.pcr_scope)
     << "\n";
  os << "granularity = "
     << conflict::granularity_name(cfg.conflict.granularity) << "\n";
  os << "variance_norm = "
     << conflict::variance_norm_name(cfg.conflict.variance_norm) << "\n";
  os << "variance_floor = " << g17(cfg.conflict.variance_floor) << "\n";
  os << "variance_cap = " << g17(cfg.conflict.variance_cap) << "\n";
  os << "sta_norm_floor = " << g17(cfg.conflict.sta_norm_floor) << "\n";
  os << "add_beta_sta_in_pcr = "
     << (cfg.conflict.add_beta_sta_in_pcr ? "true" : "false") << "\n";
  return os.str();
}

std::string config_hash(const RunConfig& cfg) {
  const std::uint64_t h = fnv1a64(canonical_config_text(cfg));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace pcr::harness
