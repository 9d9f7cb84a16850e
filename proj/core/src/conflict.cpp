// Copyright 2026 the pcrlab authors
// SPDX-License-Identifier: Apache-2.0

#include "pcr/conflict.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nlohmann/json.hpp"

namespace pcr::conflict {
namespace {

DenseVec naive_combine(const DenseVec& mu_pla, const DenseVec& mu_sta,
                       double beta) {
  DenseVec out(mu_pla.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = mu_pla[i] + beta * mu_sta[i];
  }
  return out;
}

double variance_from_ss(double ss, int n, std::size_t d, VarianceNorm vn) {
  const double unbiased_trace = ss / static_cast<double>(n - 1);
  if (vn == VarianceNorm::RawTrace) return unbiased_trace;
  // Average per-coordinate variance of the sample mean.
  return unbiased_trace / (static_cast<double>(d) * static_cast<double>(n));
}

// Shared projection path.  PcGrad and FixedAlpha(1.0) flow through the exact
// same arithmetic, so their outputs are bit-identical by construction.
LayerOutcome resolve_layer(const DenseVec& mu_pla, const DenseVec& mu_sta,
                           double var_pla, double var_sta, double beta,
                           const ConflictConfig& cfg, Mode mode) {
  if (mu_pla.size() != mu_sta.size()) {
    throw std::invalid_argument("resolve_layer: length mismatch");
  }
  LayerOutcome out;
  LayerResolution& r = out.report;
  const double nsq_sta = norm_sq(mu_sta);
  r.norm_pla = std::sqrt(norm_sq(mu_pla));
  r.norm_sta = std::sqrt(nsq_sta);
  r.dot = dot(mu_pla, mu_sta);
  r.cosine = (r.norm_pla > 0.0 && r.norm_sta > 0.0)
                 ? r.dot / (r.norm_pla * r.norm_sta)
                 : 0.0;
  r.conflict = r.dot < 0.0;
  r.norm_par = r.norm_sta > 0.0 ? std::abs(r.dot) / r.norm_sta : 0.0;
  r.var_pla = var_pla;
  r.var_sta = var_sta;

  if (mode == Mode::NaiveSum) {
    out.g_out = naive_combine(mu_pla, mu_sta, beta);
    r.method = Method::NaiveSum;
    return out;
  }
  if (nsq_sta < cfg.sta_norm_floor) {
    out.g_out = naive_combine(mu_pla, mu_sta, beta);
    r.method = Method::SkippedZeroSta;
    return out;
  }
  if (!r.conflict) {
    out.g_out = naive_combine(mu_pla, mu_sta, beta);
    r.method = Method::NoConflictFallback;
    return out;
  }

  double alpha = 0.0;
  double k = 0.0;
  switch (mode) {
    case Mode::Pcr: {
      const ArbitrationResult arb = retention_coefficient(
          var_pla, var_sta, cfg.variance_floor, cfg.variance_cap);
      alpha = arb.alpha;
      k = arb.k;
      break;
    }
    case Mode::PcGrad:
      alpha = 1.0;
      k = 0.0;
      break;
    case Mode::FixedAlpha:
      alpha = cfg.fixed_alpha;
      k = 1.0 - cfg.fixed_alpha;
      break;
    default:
      throw std::logic_error("resolve_layer: unexpected mode");
  }

  const double coef = alpha * (r.dot / nsq_sta);
  out.g_out.resize(mu_pla.size());
  for (std::size_t i = 0; i < out.g_out.size(); ++i) {
    out.g_out[i] = mu_pla[i] - coef * mu_sta[i];
  }
  if (cfg.add_beta_sta_in_pcr) {
    for (std::size_t i = 0; i < out.g_out.size(); ++i) {
      out.g_out[i] += beta * mu_sta[i];
    }
  }
  r.method = Method::PcrSoft;
  r.has_arbitration = true;
  r.k = k;
  r.alpha = alpha;
  return out;
}

}  // namespace

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Pcr: return "pcr";
    case Mode::PcGrad: return "pcgrad";
    case Mode::NaiveSum: return "naive_sum";
    case Mode::FixedAlpha: return "fixed_alpha";
  }
  throw std::invalid_argument("mode_name: unknown mode");
}

const char* pcr_scope_name(PcrScope s) {
  switch (s) {
    case PcrScope::MlpOnly: return "mlp_only";
    case PcrScope::AllLayers: return "all_layers";
  }
  throw std::invalid_argument("pcr_scope_name: unknown scope");
}

const char* granularity_name(Granularity g) {
  switch (g) {
    case Granularity::PerLayer: return "per_layer";
    case Granularity::Global: return "global";
  }
  throw std::invalid_argument("granularity_name: unknown granularity");
}

const char* variance_norm_name(VarianceNorm v) {
  switch (v) {
    case VarianceNorm::PerCoordMean: return "per_coord_mean";
    case VarianceNorm::RawTrace: return "raw_trace";
  }
  throw std::invalid_argument("variance_norm_name: unknown value");
}

const char* method_name(Method m) {
  switch (m) {
    case Method::PcrSoft: return "pcr_soft";
    case Method::NaiveSum: return "naive_sum";
    case Method::SkippedZeroSta: return "skipped_zero_sta";
    case Method::NoConflictFallback: return "no_conflict_fallback";
  }
  throw std::invalid_argument("method_name: unknown method");
}

std::optional<Mode> mode_from_name(std::string_view s) {
  if (s == "pcr") return Mode::Pcr;
  if (s == "pcgrad") return Mode::PcGrad;
  if (s == "naive_sum") return Mode::NaiveSum;
  if (s == "fixed_alpha") return Mode::FixedAlpha;
  return std::nullopt;
}

std::optional<PcrScope> pcr_scope_from_name(std::string_view s) {
  if (s == "mlp_only") return PcrScope::MlpOnly;
  if (s == "all_layers") return PcrScope::AllLayers;
  return std::nullopt;
}

std::optional<Granularity> granularity_from_name(std::string_view s) {
  if (s == "per_layer") return Granularity::PerLayer;
  if (s == "global") return Granularity::Global;
  return std::nullopt;
}

std::optional<VarianceNorm> variance_norm_from_name(std::string_view s) {
  if (s == "per_coord_mean") return VarianceNorm::PerCoordMean;
  if (s == "raw_trace") return VarianceNorm::RawTrace;
  return std::nullopt;
}

void ConflictConfig::validate() const {
  if (!(variance_floor > 0.0) || !std::isfinite(variance_floor)) {
    throw std::invalid_argument("variance_floor must be positive and finite");
  }
  if (!(variance_cap >= variance_floor)) {
    throw std::invalid_argument("variance_cap must be >= variance_floor");
  }
  if (!(sta_norm_floor > 0.0) || !std::isfinite(sta_norm_floor)) {
    throw std::invalid_argument("sta_norm_floor must be positive and finite");
  }
  if (!(fixed_alpha >= 0.0 && fixed_alpha <= 1.0)) {
    throw std::invalid_argument("fixed_alpha must lie in [0, 1]");
  }
}

std::vector<GaussianGradEstimate> estimate_gaussian(
    const std::vector<GradSet>& samples, Granularity granularity,
    VarianceNorm variance_norm) {
  const int n = static_cast<int>(samples.size());
  if (n < 2) {
    throw std::invalid_argument("estimate_gaussian: need at least 2 samples");
  }
  for (int q = 1; q < n; ++q) require_congruent(samples[0], samples[q]);
  const TensorSet& proto = samples[0];

  std::vector<GaussianGradEstimate> out;
  if (granularity == Granularity::PerLayer) {
    out.reserve(proto.entries.size());
    for (std::size_t l = 0; l < proto.entries.size(); ++l) {
      const std::size_t d = proto.entries[l].values.size();
      GaussianGradEstimate est;
      est.sample_count = n;
      est.mean.assign(d, 0.0);
      for (int q = 0; q < n; ++q) {
        const auto& v = samples[q].entries[l].values;
        for (std::size_t i = 0; i < d; ++i) est.mean[i] += v[i];
      }
      for (std::size_t i = 0; i < d; ++i) est.mean[i] /= n;
      double ss = 0.0;
      for (int q = 0; q < n; ++q) {
        const auto& v = samples[q].entries[l].values;
        for (std::size_t i = 0; i < d; ++i) {
          const double c = v[i] - est.mean[i];
          ss += c * c;
        }
      }
      est.degenerate = (ss == 0.0);
      est.variance = variance_from_ss(ss, n, d, variance_norm);
      out.push_back(std::move(est));
    }
    return out;
  }

  // Global: one estimate over the concatenated parameter vector.
  const std::size_t d = proto.total_dim();
  GaussianGradEstimate est;
  est.sample_count = n;
  est.mean.assign(d, 0.0);
  for (int q = 0; q < n; ++q) {
    std::size_t off = 0;
    for (const auto& e : samples[q].entries) {
      for (std::size_t i = 0; i < e.values.size(); ++i) {
        est.mean[off + i] += e.values[i];
      }
      off += e.values.size();
    }
  }
  for (std::size_t i = 0; i < d; ++i) est.mean[i] /= n;
  double ss = 0.0;
  for (int q = 0; q < n; ++q) {
    std::size_t off = 0;
    for (const auto& e : samples[q].entries) {
      for (std::size_t i = 0; i < e.values.size(); ++i) {
        const double c = e.values[i] - est.mean[off + i];
        ss += c * c;
      }
      off += e.values.size();
    }
  }
  est.degenerate = (ss == 0.0);
  est.variance = variance_from_ss(ss, n, d, variance_norm);
  out.push_back(std::move(est));
  return out;
}

bool detect_conflict(const DenseVec& mu_pla, const DenseVec& mu_sta) {
  return dot(mu_pla, mu_sta) < 0.0;
}

std::optional<Decomposition> decompose(const DenseVec& mu_pla,
                                       const DenseVec& mu_sta,
                                       double sta_norm_floor) {
  if (mu_pla.size() != mu_sta.size()) {
    throw std::invalid_argument("decompose: length mismatch");
  }
  const double nsq = norm_sq(mu_sta);
  if (nsq < sta_norm_floor) return std::nullopt;
  const double coef = dot(mu_pla, mu_sta) / nsq;
  Decomposition out;
  out.par.resize(mu_pla.size());
  out.perp.resize(mu_pla.size());
  for (std::size_t i = 0; i < mu_pla.size(); ++i) {
    out.par[i] = coef * mu_sta[i];
    out.perp[i] = mu_pla[i] - out.par[i];
  }
  return out;
}

ArbitrationResult retention_coefficient(double var_pla, double var_sta,
                                        double variance_floor,
                                        double variance_cap) {
  if (!(variance_floor > 0.0) || !(variance_cap >= variance_floor)) {
    throw std::invalid_argument("retention_coefficient: bad clamp range");
  }
  if (!std::isfinite(var_pla) || !std::isfinite(var_sta) || var_pla < 0.0 ||
      var_sta < 0.0) {
    throw std::invalid_argument("retention_coefficient: bad variance");
  }
  const auto clamp = [&](double v) {
    return std::min(std::max(v, variance_floor), variance_cap);
  };
  ArbitrationResult r;
  r.lambda_pla = 1.0 / clamp(var_pla);
  r.lambda_sta = 1.0 / clamp(var_sta);
  r.k = r.lambda_pla / (r.lambda_pla + r.lambda_sta);
  r.alpha = 1.0 - r.k;
  return r;
}

LayerOutcome pcr_layer(const DenseVec& mu_pla, const DenseVec& mu_sta,
                       double var_pla, double var_sta, double beta,
                       const ConflictConfig& cfg) {
  return resolve_layer(mu_pla, mu_sta, var_pla, var_sta, beta, cfg, Mode::Pcr);
}

DenseVec pcgrad_layer(const DenseVec& mu_pla, const DenseVec& mu_sta,
                      double beta, const ConflictConfig& cfg) {
  return resolve_layer(mu_pla, mu_sta, 0.0, 0.0, beta, cfg, Mode::PcGrad).g_out;
}

BatchResolution resolve_batch(const std::vector<GradSet>& pla_samples,
                              const std::vector<GradSet>& sta_samples,
                              double beta, const ConflictConfig& cfg) {
  cfg.validate();
  if (pla_samples.size() != sta_samples.size()) {
    throw std::invalid_argument("resolve_batch: sample count mismatch");
  }
  const auto est_pla =
      estimate_gaussian(pla_samples, cfg.granularity, cfg.variance_norm);
  const auto est_sta =
      estimate_gaussian(sta_samples, cfg.granularity, cfg.variance_norm);
  require_congruent(pla_samples[0], sta_samples[0]);
  const TensorSet& proto = pla_samples[0];

  const auto effective_mode = [&cfg](LayerTag tag) {
    if (cfg.mode == Mode::NaiveSum) return Mode::NaiveSum;
    if (cfg.pcr_scope == PcrScope::MlpOnly && tag != LayerTag::Mlp) {
      return Mode::NaiveSum;
    }
    return cfg.mode;
  };

  BatchResolution out;
  out.grad = zeros_like(proto);

  if (cfg.granularity == Granularity::PerLayer) {
    for (std::size_t l = 0; l < proto.entries.size(); ++l) {
      LayerOutcome lo = resolve_layer(
          est_pla[l].mean, est_sta[l].mean, est_pla[l].variance,
          est_sta[l].variance, beta, cfg, effective_mode(proto.entries[l].tag));
      out.grad.entries[l].values = std::move(lo.g_out);
      lo.report.layer = proto.entries[l].name;
      lo.report.tag = proto.entries[l].tag;
      out.report.push_back(std::move(lo.report));
    }
    return out;
  }

  // Global granularity: a single conflict decision over the concatenated
  // vector; the layer scope does not apply.  Report rows still carry
  // per-layer geometric diagnostics alongside the shared decision.
  const Mode mode = cfg.mode == Mode::NaiveSum ? Mode::NaiveSum : cfg.mode;
  LayerOutcome lo =
      resolve_layer(est_pla[0].mean, est_sta[0].mean, est_pla[0].variance,
                    est_sta[0].variance, beta, cfg, mode);
  std::size_t off = 0;
  for (std::size_t l = 0; l < proto.entries.size(); ++l) {
    const std::size_t d = proto.entries[l].values.size();
    auto& dst = out.grad.entries[l].values;
    for (std::size_t i = 0; i < d; ++i) dst[i] = lo.g_out[off + i];

    LayerResolution row = lo.report;
    row.layer = proto.entries[l].name;
    row.tag = proto.entries[l].tag;
    DenseVec slice_pla(est_pla[0].mean.begin() + off,
                       est_pla[0].mean.begin() + off + d);
    DenseVec slice_sta(est_sta[0].mean.begin() + off,
                       est_sta[0].mean.begin() + off + d);
    row.dot = dot(slice_pla, slice_sta);
    row.norm_pla = norm(slice_pla);
    row.norm_sta = norm(slice_sta);
    row.cosine = (row.norm_pla > 0.0 && row.norm_sta > 0.0)
                     ? row.dot / (row.norm_pla * row.norm_sta)
                     : 0.0;
    row.norm_par = row.norm_sta > 0.0 ? std::abs(row.dot) / row.norm_sta : 0.0;
    out.report.push_back(std::move(row));
    off += d;
  }
  return out;
}

std::string report_line_json(int step, const LayerResolution& r) {
  nlohmann::json j;
  j["step"] = step;
  j["layer"] = r.layer;
  j["tag"] = layer_tag_name(r.tag);
  j["dot"] = r.dot;
  j["cosine"] = r.cosine;
  j["conflict"] = r.conflict;
  if (r.has_arbitration) {
    j["k"] = r.k;
    j["alpha"] = r.alpha;
  } else {
    j["k"] = nullptr;
    j["alpha"] = nullptr;
  }
  j["method"] = method_name(r.method);
  j["norm_pla"] = r.norm_pla;
  j["norm_sta"] = r.norm_sta;
  j["var_pla"] = r.var_pla;
  j["var_sta"] = r.var_sta;
  return j.dump();
}

}  // namespace pcr::conflict
