// Copyright 2026 the pcrlab authors
// SPDX-License-Identifier: Apache-2.0

// pcrlab: command-line front-end for the lab.
//
//   pcrlab train    --config run.ini --out runs/a
//   pcrlab mmse     --var-pla 1 --var-sta 3 --out risk.csv
//   pcrlab quad     --mode pcr --out trace.csv
//   pcrlab diagnose --ckpt final.ckpt --ref init.ckpt --out geometry.csv
//
// Exit codes: 0 success, 2 configuration or validation error, 3 numerical
// failure (non-finite values during a run), 1 anything unexpected.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pcr/checkpoint.hpp"
#include "pcr/conflict.hpp"
#include "pcr/grpo.hpp"
#include "pcr/harness/config.hpp"
#include "pcr/harness/diagnose.hpp"
#include "pcr/harness/metrics.hpp"
#include "pcr/harness/quad.hpp"
#include "pcr/harness/task.hpp"
#include "pcr/harness/train.hpp"
#include "pcr/mmse.hpp"
#include "pcr/model.hpp"
#include "pcr/rng.hpp"
#include "pcr/version.hpp"

namespace {

using pcr::harness::ConfigError;

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open output file: " + path);
  os << text;
  os.flush();
  if (!os.good()) throw std::runtime_error("failed writing output file: " + path);
}

pcr::Checkpoint load_checkpoint_arg(const std::string& path) {
  try {
    return pcr::load_checkpoint_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("while loading '") + path + "': " + e.what());
  }
}

struct TrainArgs {
  std::string config_path;
  std::string out_dir;
};

int run_train(const TrainArgs& a) {
  const pcr::harness::RunConfig cfg = pcr::harness::parse_config_file(a.config_path);
  const pcr::harness::TrainResult result = pcr::harness::run_training(cfg, a.out_dir);
  std::cout << "run " << pcr::harness::config_hash(cfg) << ": " << cfg.steps
            << " steps, mode " << pcr::conflict::mode_name(cfg.conflict.mode)
            << "\n";
  if (!result.metrics.empty()) {
    const auto& last = result.metrics.back();
    std::cout << "final: mean_reward=" << last.mean_reward
              << " heldout_nll=" << last.heldout_nll
              << " grad_norm=" << last.grad_norm_total << "\n";
  }
  if (result.total_layer_steps > 0) {
    std::cout << "conflicted layer-steps: " << result.conflicted_layer_steps
              << " / " << result.total_layer_steps << "\n";
  }
  std::cout << "artifacts in " << a.out_dir << "\n";
  return 0;
}

struct MmseArgs {
  double var_pla = 1.0;
  double var_sta = 1.0;
  int grid = 101;
  std::int64_t samples = 1000000;
  std::uint64_t seed = 1;
  std::string out_path;
};

int run_mmse(const MmseArgs& a) {
  const pcr::mmse::ScalarChannel ch{a.var_pla, a.var_sta};
  ch.validate();
  const pcr::mmse::RiskCurve curve =
      pcr::mmse::risk_sweep(ch, a.grid, a.samples, a.seed);
  std::ostringstream csv;
  pcr::mmse::write_risk_curve_csv(csv, curve);
  write_text_file(a.out_path, csv.str());

  const pcr::mmse::DominanceCheck dom = pcr::mmse::dominance_check(ch);
  std::cout << "alpha*=" << pcr::mmse::optimal_alpha(ch)
            << " risk_opt=" << dom.risk_opt
            << " risk_full_removal=" << dom.risk_full_removal
            << " risk_no_removal=" << dom.risk_no_removal
            << " strict_dominance=" << (dom.strict ? "yes" : "no")
            << " argmin_mc=" << curve.argmin_alpha << "\n";
  std::cout << "wrote " << a.out_path << " (" << a.grid << " rows)\n";
  return 0;
}

struct QuadArgs {
  std::string mode = "pcr";
  int dim = 16;
  double noise_pla = 1.0;
  double noise_sta = 1.0;
  int steps = 1000;
  int samples = 8;
  double eta = 0.01;
  double beta = 0.0;
  std::uint64_t seed = 1;
  std::string out_path;
};

pcr::conflict::Mode quad_mode_from_arg(const std::string& s) {
  if (s == "sum") return pcr::conflict::Mode::NaiveSum;
  if (const auto m = pcr::conflict::mode_from_name(s);
      m && *m != pcr::conflict::Mode::FixedAlpha) {
    return *m;
  }
  throw ConfigError("quad: mode must be one of pcr, pcgrad, sum");
}

int run_quad(const QuadArgs& a) {
  const pcr::conflict::Mode mode = quad_mode_from_arg(a.mode);
  pcr::harness::QuadSpec spec;
  spec.dim = a.dim;
  spec.noise_pla = a.noise_pla;
  spec.noise_sta = a.noise_sta;
  spec.steps = a.steps;
  spec.samples_per_step = a.samples;
  spec.eta = a.eta;
  spec.beta = a.beta;
  spec.validate();

  const pcr::harness::QuadResult result =
      pcr::harness::quad_testbed(spec, mode, a.seed);
  std::ostringstream csv;
  pcr::harness::write_quad_trace_csv(csv, result);
  write_text_file(a.out_path, csv.str());

  std::cout << "mode=" << a.mode << " steps=" << a.steps
            << " conflict_fraction=" << result.conflict_fraction << "\n";
  std::cout << "axis mse: pcr=" << result.mse_pcr
            << " pcgrad=" << result.mse_pcgrad << " sum=" << result.mse_sum
            << " mean_update_gap=" << result.mean_update_gap << "\n";
  std::cout << "final: dist_task=" << result.final_dist_task
            << " dist_ref=" << result.final_dist_ref << "\n";
  std::cout << "wrote " << a.out_path << "\n";
  return 0;
}

struct DiagnoseArgs {
  std::string ckpt_path;
  std::string ref_path;
  std::string task = "reverse_sequence";
  int query_len = 6;
  int queries = 8;
  int group_size = 8;
  std::uint64_t seed = 1;
  std::string out_path;
};

int run_diagnose(const DiagnoseArgs& a) {
  const pcr::Checkpoint ckpt = load_checkpoint_arg(a.ckpt_path);
  const pcr::Checkpoint ref = load_checkpoint_arg(a.ref_path);
  const pcr::model::ModelConfig& mcfg = ckpt.config;
  if (ref.config.vocab_size != mcfg.vocab_size ||
      ref.config.d_model != mcfg.d_model || ref.config.d_ff != mcfg.d_ff ||
      ref.config.max_seq_len != mcfg.max_seq_len) {
    throw ConfigError("diagnose: checkpoint and reference model shapes differ");
  }

  const auto kind = pcr::harness::task_kind_from_name(a.task);
  if (!kind) {
    throw ConfigError("diagnose: unknown task '" + a.task +
                      "' (want reverse_sequence or sum_mod_vocab)");
  }
  if (a.queries < 1) throw ConfigError("diagnose: queries must be >= 1");
  if (a.group_size < 2) throw ConfigError("diagnose: group-size must be >= 2");
  const pcr::harness::TaskSpec tspec{*kind, a.query_len};
  tspec.validate(mcfg.vocab_size, mcfg.max_seq_len);

  // Roll out groups with the checkpoint itself as the behavior policy, the
  // same way a training step would see them.
  pcr::Rng rng(a.seed);
  std::vector<pcr::grpo::RolloutGroup> groups;
  for (int g = 0; g < a.queries; ++g) {
    const pcr::harness::TaskInstance inst =
        pcr::harness::make_task(tspec, mcfg.vocab_size, rng);
    pcr::grpo::RolloutGroup group;
    group.query = inst.query;
    const int max_new = static_cast<int>(inst.target.size()) + 1;
    for (int i = 0; i < a.group_size; ++i) {
      const auto resp =
          pcr::model::sample_response(mcfg, ckpt.params, group.query, max_new, rng);
      group.responses.push_back(resp.tokens);
      group.old_log_probs.push_back(resp.log_probs);
      group.rewards.push_back(pcr::harness::reward(resp.tokens, inst.target));
    }
    groups.push_back(std::move(group));
  }

  pcr::grpo::GrpoConfig gcfg;
  gcfg.group_size = a.group_size;
  gcfg.batch_size = a.queries;
  const std::vector<pcr::harness::DiagnosticRow> rows =
      pcr::harness::diagnose(mcfg, ckpt.params, ref.params, groups, gcfg);

  std::ostringstream csv;
  pcr::harness::write_diagnose_csv(csv, rows);
  write_text_file(a.out_path, csv.str());

  int conflicted = 0;
  int live = 0;
  for (const auto& row : rows) {
    if (row.zero_norm) continue;
    ++live;
    if (row.dot < 0.0) ++conflicted;
  }
  std::cout << rows.size() << " layers, " << conflicted << " conflicting of "
            << live << " with both streams non-zero\n";
  std::cout << "wrote " << a.out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale laboratory for conflict-resolved GRPO updates"};
  app.set_version_flag("--version", pcr::kVersion);
  app.require_subcommand(1);

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "run a training loop from a config file");
  train->add_option("--config", train_args.config_path, "INI-style run config")
      ->required();
  train->add_option("--out", train_args.out_dir, "output directory for run artifacts")
      ->required();

  MmseArgs mmse_args;
  CLI::App* mmse = app.add_subcommand(
      "mmse", "sweep the scalar-channel estimator risk over alpha");
  mmse->add_option("--var-pla", mmse_args.var_pla, "observation-noise variance")
      ->required();
  mmse->add_option("--var-sta", mmse_args.var_sta, "latent signal variance")
      ->required();
  mmse->add_option("--grid", mmse_args.grid, "alpha grid points (default 101)");
  mmse->add_option("--samples", mmse_args.samples,
                   "Monte Carlo samples per grid point (default 1000000)");
  mmse->add_option("--seed", mmse_args.seed, "RNG seed");
  mmse->add_option("--out", mmse_args.out_path, "risk-curve CSV path")->required();

  QuadArgs quad_args;
  CLI::App* quad = app.add_subcommand(
      "quad", "run the conflicting-quadratic testbed with known ground truth");
  quad->add_option("--mode", quad_args.mode, "driving policy: pcr, pcgrad or sum")
      ->required();
  quad->add_option("--dim", quad_args.dim, "parameter dimension (default 16)");
  quad->add_option("--noise-pla", quad_args.noise_pla,
                   "plasticity sample noise scale (default 1)");
  quad->add_option("--noise-sta", quad_args.noise_sta,
                   "stability sample noise scale (default 1)");
  quad->add_option("--steps", quad_args.steps, "testbed steps (default 1000)");
  quad->add_option("--samples", quad_args.samples,
                   "per-step gradient samples (default 8)");
  quad->add_option("--eta", quad_args.eta, "step size; 0 freezes the iterate");
  quad->add_option("--beta", quad_args.beta, "stability weight when summing");
  quad->add_option("--seed", quad_args.seed, "RNG seed");
  quad->add_option("--out", quad_args.out_path, "per-step trace CSV path")->required();

  DiagnoseArgs diag_args;
  CLI::App* diag = app.add_subcommand(
      "diagnose", "per-layer gradient geometry of a checkpoint pair");
  diag->add_option("--ckpt", diag_args.ckpt_path, "policy checkpoint")->required();
  diag->add_option("--ref", diag_args.ref_path, "reference checkpoint")->required();
  diag->add_option("--task", diag_args.task,
                   "reverse_sequence or sum_mod_vocab (default reverse_sequence)");
  diag->add_option("--query-len", diag_args.query_len, "task query length");
  diag->add_option("--queries", diag_args.queries, "rollout groups to sample");
  diag->add_option("--group-size", diag_args.group_size, "responses per group");
  diag->add_option("--seed", diag_args.seed, "RNG seed");
  diag->add_option("--out", diag_args.out_path, "geometry CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // --help / --version exit clean
  }

  try {
    if (train->parsed()) return run_train(train_args);
    if (mmse->parsed()) return run_mmse(mmse_args);
    if (quad->parsed()) return run_quad(quad_args);
    if (diag->parsed()) return run_diagnose(diag_args);
    std::cerr << "no subcommand selected\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const pcr::harness::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
