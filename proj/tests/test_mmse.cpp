// Copyright 2026 the pcrlab authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "pcr/mmse.hpp"
#include "pcr/rng.hpp"

namespace {

namespace mmse = pcr::mmse;

mmse::ScalarChannel channel(double vp, double vs) {
  mmse::ScalarChannel ch;
  ch.var_pla = vp;
  ch.var_sta = vs;
  return ch;
}

}  // namespace

TEST_SUITE_BEGIN("mmse");

TEST_CASE("analytic risk endpoints are the raw variances") {
  pcr::Rng rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const double vp = std::pow(10.0, rng.uniform(-6.0, 6.0));
    const double vs = std::pow(10.0, rng.uniform(-6.0, 6.0));
    const auto ch = channel(vp, vs);
    CHECK(mmse::risk_analytic(ch, 0.0) == vp);
    CHECK(mmse::risk_analytic(ch, 1.0) == vs);
    // At the minimizer the risk equals the harmonic combination
    // vp * vs / (vp + vs) = 1 / (1/vp + 1/vs).
    const double astar = mmse::optimal_alpha(ch);
    const double want = 1.0 / (1.0 / vp + 1.0 / vs);
    CHECK(std::abs(mmse::risk_analytic(ch, astar) - want) <= 1e-12 * want);
  }
}

TEST_CASE("optimal alpha on worked examples") {
  CHECK(mmse::optimal_alpha(channel(1.0, 1.0)) ==
        doctest::Approx(0.5).epsilon(1e-15));
  // Noisy observation, small latent spread: remove most of the update.
  CHECK(mmse::optimal_alpha(channel(3.0, 1.0)) ==
        doctest::Approx(0.75).epsilon(1e-14));
  // Clean observation: keep almost everything.
  CHECK(mmse::optimal_alpha(channel(1e-9, 1.0)) < 1e-8);
}

TEST_CASE("analytic risk is strictly convex in alpha") {
  const auto ch = channel(0.7, 2.3);
  const int g = 41;
  double prev = 0.0, prev2 = 0.0;
  for (int i = 0; i < g; ++i) {
    const double a = static_cast<double>(i) / (g - 1);
    const double r = mmse::risk_analytic(ch, a);
    if (i >= 2) {
      CHECK(prev2 - 2.0 * prev + r > 0.0);  // positive second difference
    }
    prev2 = prev;
    prev = r;
  }
  // The minimizer beats both neighbors.
  const double astar = mmse::optimal_alpha(ch);
  CHECK(mmse::risk_analytic(ch, astar) <
        mmse::risk_analytic(ch, std::min(1.0, astar + 0.01)));
  CHECK(mmse::risk_analytic(ch, astar) <
        mmse::risk_analytic(ch, std::max(0.0, astar - 0.01)));
}

TEST_CASE("optimal alpha strictly dominates both pure strategies") {
  {
    const auto d = mmse::dominance_check(channel(1.0, 1.0));
    CHECK(d.risk_opt == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(d.risk_full_removal == 1.0);
    CHECK(d.risk_no_removal == 1.0);
    CHECK(d.strict);
  }
  {
    const auto d = mmse::dominance_check(channel(1.0, 3.0));
    CHECK(d.risk_opt == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(d.risk_full_removal == 3.0);
    CHECK(d.risk_no_removal == 1.0);
    CHECK(d.strict);
  }
  pcr::Rng rng(102);
  for (int trial = 0; trial < 200; ++trial) {
    const double vp = std::pow(10.0, rng.uniform(-6.0, 6.0));
    const double vs = std::pow(10.0, rng.uniform(-6.0, 6.0));
    const auto d = mmse::dominance_check(channel(vp, vs));
    CHECK(d.strict);
    CHECK(d.risk_opt < d.risk_full_removal);
    CHECK(d.risk_opt < d.risk_no_removal);
  }
}

TEST_CASE("monte carlo risk is deterministic and unbiased") {
  const auto ch = channel(0.8, 1.7);
  const std::int64_t n = 200000;
  const auto a = mmse::risk_monte_carlo(ch, 0.3, n, 99);
  const auto b = mmse::risk_monte_carlo(ch, 0.3, n, 99);
  CHECK(a.estimate == b.estimate);
  CHECK(a.std_err == b.std_err);
  CHECK(a.samples == n);
  CHECK(a.std_err > 0.0);

  for (double alpha : {0.0, 0.3, 0.5, 0.9, 1.0}) {
    const auto mc = mmse::risk_monte_carlo(ch, alpha, n, 7);
    const double want = mmse::risk_analytic(ch, alpha);
    CHECK(std::abs(mc.estimate - want) <= 4.0 * mc.std_err);
  }

  // Different seeds give different draws.
  const auto c = mmse::risk_monte_carlo(ch, 0.3, n, 100);
  CHECK(c.estimate != a.estimate);

  // Full removal of a nearly-deterministic latent leaves almost no error.
  const auto tiny = mmse::risk_monte_carlo(channel(1.0, 1e-12), 1.0, 10000, 3);
  CHECK(tiny.estimate < 1e-10);
}

TEST_CASE("monte carlo error shrinks like one over sqrt n") {
  const auto ch = channel(1.0, 1.0);
  const auto small = mmse::risk_monte_carlo(ch, 0.4, 20000, 21);
  const auto large = mmse::risk_monte_carlo(ch, 0.4, 80000, 21);
  const double ratio = large.std_err / small.std_err;
  CHECK(ratio > 0.4);
  CHECK(ratio < 0.6);
}

TEST_CASE("sweep cells reproduce the single-point estimator bit for bit") {
  const auto ch = channel(2.0, 0.5);
  const int grid = 11;
  const std::int64_t n = 10000;  // spans more than one internal batch
  const auto curve = mmse::risk_sweep(ch, grid, n, 1234);
  REQUIRE(curve.alphas.size() == static_cast<std::size_t>(grid));
  REQUIRE(curve.risk_mc.size() == curve.alphas.size());
  REQUIRE(curve.std_err.size() == curve.alphas.size());
  REQUIRE(curve.risk_analytic.size() == curve.alphas.size());
  CHECK(curve.alphas.front() == 0.0);
  CHECK(curve.alphas.back() == 1.0);
  for (int i = 0; i < grid; ++i) {
    const double a = curve.alphas[i];
    CHECK(a == doctest::Approx(static_cast<double>(i) / (grid - 1))
                   .epsilon(1e-15));
    const auto single = mmse::risk_monte_carlo(ch, a, n, 1234);
    CHECK(curve.risk_mc[i] == single.estimate);
    CHECK(curve.std_err[i] == single.std_err);
    CHECK(curve.risk_analytic[i] == mmse::risk_analytic(ch, a));
  }
}

TEST_CASE("sweep argmin lands next to the analytic minimizer") {
  const auto ch = channel(1.0, 1.0);
  const auto curve = mmse::risk_sweep(ch, 21, 400000, 5);
  const double astar = mmse::optimal_alpha(ch);
  CHECK(std::abs(curve.argmin_alpha - astar) <= 0.05 + 1e-12);
  // Endpoints agree with the exact variances within Monte Carlo error.
  CHECK(std::abs(curve.risk_mc.front() - ch.var_pla) <=
        4.0 * curve.std_err.front());
  CHECK(std::abs(curve.risk_mc.back() - ch.var_sta) <=
        4.0 * curve.std_err.back());
}

TEST_CASE("input validation") {
  const auto ch = channel(1.0, 1.0);
  CHECK_THROWS_AS(mmse::risk_analytic(ch, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(mmse::risk_analytic(ch, 1.1), std::invalid_argument);
  CHECK_THROWS_AS(mmse::risk_monte_carlo(ch, -0.1, 1000, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(mmse::risk_monte_carlo(ch, 0.5, 99, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(mmse::risk_sweep(ch, 10, 1000, 1), std::invalid_argument);
  CHECK_THROWS_AS(mmse::risk_sweep(ch, 11, 99, 1), std::invalid_argument);
  CHECK_THROWS_AS(channel(0.0, 1.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(channel(1.0, -2.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(channel(1.0, std::numeric_limits<double>::infinity())
                      .validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(mmse::risk_analytic(channel(-1.0, 1.0), 0.5),
                  std::invalid_argument);
}

TEST_CASE("risk curve serializes to a parseable CSV") {
  const auto curve = mmse::risk_sweep(channel(1.0, 2.0), 11, 1000, 8);
  std::ostringstream os;
  mmse::write_risk_curve_csv(os, curve);
  std::istringstream is(os.str());
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line == "alpha,risk_mc,std_err,risk_analytic");
  int rows = 0;
  while (std::getline(is, line)) {
    REQUIRE(!line.empty());
    // Re-read the four fields and compare against the source values.
    std::istringstream fields(line);
    std::string cell;
    double got[4] = {0, 0, 0, 0};
    for (int c = 0; c < 4; ++c) {
      REQUIRE(std::getline(fields, cell, ','));
      got[c] = std::stod(cell);
    }
    CHECK(!std::getline(fields, cell, ','));  // exactly four columns
    CHECK(got[0] == curve.alphas[rows]);
    CHECK(got[1] == curve.risk_mc[rows]);
    CHECK(got[2] == curve.std_err[rows]);
    CHECK(got[3] == curve.risk_analytic[rows]);
    ++rows;
  }
  CHECK(rows == 11);
}

TEST_SUITE_END();
