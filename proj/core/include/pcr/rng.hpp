// Copyright 2026 the pcrlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace pcr {

// One step of the splitmix64 mixer.  Used both for whitening raw seeds and
// for deriving independent child streams from (seed, path) tuples so that
// every sampling site in a run owns its own generator.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic stream derivation: hash the base seed together with a path of
// integers (e.g. {purpose, step, query, response}).  Changing any component
// yields an unrelated stream.
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = splitmix64(base);
  for (std::uint64_t p : path) {
    s = splitmix64(s ^ (p + 0x9e3779b97f4a7c15ULL));
  }
  return s;
}

// FNV-1a, used for content hashes (e.g. canonical config text -> run id).
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Deterministic pseudo-random stream.  All distributions are implemented
// by hand on top of the raw 64-bit output so that sequences are stable
// across platforms and standard library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi) {
    if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next_u64() % span);
  }

  // Standard normal via the Marsaglia polar method.  The spare value is
  // cached, so a given stream always yields the same sequence.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  double gaussian(double mean, double stddev) {
    return mean + stddev * gaussian();
  }

  // Inverse-CDF draw from a categorical distribution given log-probabilities.
  // Probabilities are accumulated left to right; the final index absorbs any
  // rounding shortfall at the top of the unit interval.
  int categorical_from_log_probs(const std::vector<double>& log_probs) {
    if (log_probs.empty()) {
      throw std::invalid_argument("categorical: empty distribution");
    }
    const double u = uniform();
    double acc = 0.0;
    for (std::size_t v = 0; v < log_probs.size(); ++v) {
      acc += std::exp(log_probs[v]);
      if (u < acc) return static_cast<int>(v);
    }
    return static_cast<int>(log_probs.size()) - 1;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace pcr
