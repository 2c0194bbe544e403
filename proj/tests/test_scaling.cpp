#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fragcgp/scaling.hpp"

using namespace fragcgp;

TEST_CASE("power-law fit recovers exact data", "[scaling]") {
  std::vector<std::pair<double, double>> pts;
  for (const double d : {4.0, 8.0, 16.0, 32.0, 64.0}) pts.emplace_back(d, 2.0 * std::sqrt(d));
  const ScalingFit fit = fit_power_law(pts);
  REQUIRE(fit.raw_converged);
  REQUIRE(std::abs(fit.amplitude - 2.0) < 1e-8);
  REQUIRE(std::abs(fit.exponent - 0.5) < 1e-8);
  REQUIRE(fit.rmse_raw < 1e-10);
  REQUIRE(fit.rmse_log < 1e-10);
  REQUIRE(fit.n_points == 5);
}

TEST_CASE("analytic Krylov-count sequences give the closed-form exponents", "[scaling]") {
  SECTION("t-Jz: K = 2^{L+1} - 1 against d = 3^L") {
    std::vector<std::pair<double, double>> pts;
    for (int L = 1; L <= 6; ++L)
      pts.emplace_back(static_cast<double>(ipow(3, L)), static_cast<double>(ipow(2, L + 1) - 1));
    const ScalingFit fit = fit_power_law(pts);
    const double target = std::log(2.0) / std::log(3.0);  // 0.6309...
    REQUIRE(std::abs(fit.exponent - target) < 0.02);
  }
  SECTION("TL: closed-form K against d = 3^L") {
    std::vector<std::pair<double, double>> pts;
    for (const int L : {2, 4, 6, 8})
      pts.emplace_back(static_cast<double>(ipow(3, L)), tl_K_closed_form(L));
    const ScalingFit fit = fit_power_law(pts);
    const double target = std::log(kTlQ) / std::log(3.0);  // 0.8760...
    REQUIRE(std::abs(fit.exponent - target) < 0.02);
  }
}

TEST_CASE("fit input validation", "[scaling]") {
  REQUIRE_THROWS_AS(fit_power_law({{1.0, 1.0}, {2.0, 2.0}}), std::invalid_argument);
  REQUIRE_THROWS_AS(fit_power_law({{1.0, 1.0}, {2.0, -2.0}, {3.0, 3.0}}), std::invalid_argument);
  REQUIRE_THROWS_AS(fit_power_law({{0.0, 1.0}, {2.0, 2.0}, {3.0, 3.0}}), std::invalid_argument);
}

TEST_CASE("fit tolerates noise around a power law", "[scaling]") {
  Rng rng(9);
  std::vector<std::pair<double, double>> pts;
  for (const double d : {9.0, 27.0, 81.0, 243.0, 729.0})
    pts.emplace_back(d, 1.7 * std::pow(d, 0.83) * (1.0 + 0.02 * (rng.uniform() - 0.5)));
  const ScalingFit fit = fit_power_law(pts);
  REQUIRE(std::abs(fit.exponent - 0.83) < 0.03);
  REQUIRE(fit.exponent_stderr > 0.0);
  REQUIRE(fit.rmse_raw > 0.0);
}

TEST_CASE("sweeps produce the analytic K columns", "[scaling]") {
  SweepOptions opts;
  opts.n_times = 40;
  SECTION("XXZ") {
    const auto recs = sweep(ModelId::xxz, {2, 3, 4}, opts);
    REQUIRE(recs.size() == 3);
    REQUIRE(recs[0].K == 3);
    REQUIRE(recs[1].K == 4);
    REQUIRE(recs[2].K == 5);
    for (const auto& r : recs) {
      REQUIRE(r.d == ipow(2, r.L));
      REQUIRE(r.mean_f >= static_cast<double>(r.K) - 1e-6);
      REQUIRE(r.n_times == 40);
    }
  }
  SECTION("t-Jz") {
    const auto recs = sweep(ModelId::tjz, {1, 2, 3}, opts);
    REQUIRE(recs[0].K == 3);
    REQUIRE(recs[1].K == 7);
    REQUIRE(recs[2].K == 15);
  }
  SECTION("TL") {
    const auto recs = sweep(ModelId::tl, {2, 4}, opts);
    REQUIRE(recs[0].d == 9);
    REQUIRE(recs[1].d == 81);
    REQUIRE(recs[0].K == 9);
    REQUIRE(recs[1].K == 64);
  }
}

TEST_CASE("sweeps are bit-reproducible for a fixed seed", "[scaling]") {
  SweepOptions opts;
  opts.n_times = 30;
  opts.seed = 5;
  const auto a = sweep(ModelId::tjz, {1, 2}, opts);
  const auto b = sweep(ModelId::tjz, {1, 2}, opts);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].mean_f == b[i].mean_f);
    REQUIRE(a[i].stderr_f == b[i].stderr_f);
    REQUIRE(a[i].mean_cgp == b[i].mean_cgp);
  }
}

TEST_CASE("bound comparison", "[scaling]") {
  SweepOptions opts;
  opts.n_times = 40;
  const auto recs = sweep(ModelId::tjz, {1, 2, 3, 4}, opts);
  const BoundComparison cmp = compare_to_bound(recs);
  REQUIRE(cmp.f_over_K.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i)
    REQUIRE(cmp.f_over_K[i] >= 1.0 - 1e-9);  // f >= K
  // f is squeezed between K and d, so its exponent lies between theirs
  REQUIRE(cmp.f_fit.exponent >= cmp.k_fit.exponent - 0.05);
  REQUIRE(cmp.f_fit.exponent <= 1.0 + 0.05);

  auto mixed = recs;
  mixed[0].model = ModelId::xxz;
  REQUIRE_THROWS_AS(compare_to_bound(mixed), std::invalid_argument);
}
