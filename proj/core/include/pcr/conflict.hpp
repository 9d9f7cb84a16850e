// Copyright 2026 the pcrlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pcr/tensor.hpp"

namespace pcr::conflict {

// How conflicting gradient streams are combined.
enum class Mode { Pcr, PcGrad, NaiveSum, FixedAlpha };
// Which layers are eligible for projection (others fall back to naive sum).
enum class PcrScope { MlpOnly, AllLayers };
// Whether statistics are estimated per layer or over the whole parameter set.
enum class Granularity { PerLayer, Global };
// Normalization of the spread statistic: average per-coordinate variance of
// the sample mean (default), or the raw unbiased covariance trace.
enum class VarianceNorm { PerCoordMean, RawTrace };
// What actually happened at one layer.
enum class Method { PcrSoft, NaiveSum, SkippedZeroSta, NoConflictFallback };

const char* mode_name(Mode m);
const char* pcr_scope_name(PcrScope s);
const char* granularity_name(Granularity g);
const char* variance_norm_name(VarianceNorm v);
const char* method_name(Method m);
std::optional<Mode> mode_from_name(std::string_view s);
std::optional<PcrScope> pcr_scope_from_name(std::string_view s);
std::optional<Granularity> granularity_from_name(std::string_view s);
std::optional<VarianceNorm> variance_norm_from_name(std::string_view s);

struct ConflictConfig {
  Mode mode = Mode::Pcr;
  double fixed_alpha = 0.5;          // used only by Mode::FixedAlpha
  PcrScope pcr_scope = PcrScope::MlpOnly;
  Granularity granularity = Granularity::PerLayer;
  VarianceNorm variance_norm = VarianceNorm::PerCoordMean;
  double variance_floor = 1e-12;     // clamp for precision weights
  double variance_cap = 1e12;
  double sta_norm_floor = 1e-10;     // floor on |mu_sta|^2 below which projection is skipped
  bool add_beta_sta_in_pcr = false;  // ablation: keep beta*mu_sta in projected updates

  void validate() const;
};

// Isotropic Gaussian fit of a set of per-query gradient samples: sample mean
// plus a single scalar variance for the mean estimate.
struct GaussianGradEstimate {
  DenseVec mean;
  double variance = 0.0;
  int sample_count = 0;
  bool degenerate = false;  // all samples identical
};

// One estimate per layer (PerLayer) or a single estimate over the
// concatenated parameter vector (Global).  Sample means are accumulated in
// sample order and divided once, so they are bit-stable.
std::vector<GaussianGradEstimate> estimate_gaussian(
    const std::vector<GradSet>& samples, Granularity granularity,
    VarianceNorm variance_norm = VarianceNorm::PerCoordMean);

// Strict-sign conflict test: <mu_pla, mu_sta> < 0.
bool detect_conflict(const DenseVec& mu_pla, const DenseVec& mu_sta);

// Orthogonal split of mu_pla along mu_sta.  Returns nullopt when |mu_sta|^2
// falls below the floor (projection undefined).  `par` is the projection onto
// mu_sta; `perp = mu_pla - par` by construction.
struct Decomposition {
  DenseVec perp;
  DenseVec par;
};
std::optional<Decomposition> decompose(const DenseVec& mu_pla,
                                       const DenseVec& mu_sta,
                                       double sta_norm_floor);

// Precision-weighted retention: k = lam_pla / (lam_pla + lam_sta) with
// lam = 1/clamp(var); alpha = 1 - k is the removed fraction.
struct ArbitrationResult {
  double k = 0.0;
  double alpha = 0.0;
  double lambda_pla = 0.0;
  double lambda_sta = 0.0;
};
ArbitrationResult retention_coefficient(double var_pla, double var_sta,
                                        double variance_floor,
                                        double variance_cap);

// Diagnostics for one layer of one resolution step.
struct LayerResolution {
  std::string layer;
  LayerTag tag = LayerTag::Mlp;
  double dot = 0.0;
  double cosine = 0.0;
  bool conflict = false;
  bool has_arbitration = false;  // k/alpha valid only when true
  double k = 0.0;
  double alpha = 0.0;
  Method method = Method::NaiveSum;
  double norm_pla = 0.0;
  double norm_sta = 0.0;
  double norm_par = 0.0;  // length of the component of mu_pla along mu_sta
  double var_pla = 0.0;
  double var_sta = 0.0;
};
using ResolutionReport = std::vector<LayerResolution>;

// One resolved layer: the combined update direction plus its report row.
struct LayerOutcome {
  DenseVec g_out;
  LayerResolution report;
};

// Precision-weighted soft projection for one layer (conflict branch removes
// alpha * parallel component; sign-agreement and zero-norm cases fall back to
// mu_pla + beta * mu_sta).
LayerOutcome pcr_layer(const DenseVec& mu_pla, const DenseVec& mu_sta,
                       double var_pla, double var_sta, double beta,
                       const ConflictConfig& cfg);

// Full projection baseline: identical to pcr_layer with alpha pinned to 1.
DenseVec pcgrad_layer(const DenseVec& mu_pla, const DenseVec& mu_sta,
                      double beta, const ConflictConfig& cfg);

// Batch entry point: fit Gaussians to the two per-query sample streams and
// combine them according to cfg.  Sample lists must be congruent, same
// length, and hold at least two samples.
struct BatchResolution {
  GradSet grad;
  ResolutionReport report;
};
BatchResolution resolve_batch(const std::vector<GradSet>& pla_samples,
                              const std::vector<GradSet>& sta_samples,
                              double beta, const ConflictConfig& cfg);

// One JSONL line per layer row.
std::string report_line_json(int step, const LayerResolution& row);

}  // namespace pcr::conflict
