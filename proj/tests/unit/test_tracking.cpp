#include "doctest.h"

#include "jamwatch/errors.hpp"
#include "jamwatch/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

using namespace jamwatch;

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t k = 0; k < idx.size(); ++k)
    r[idx[k]] = double(k);
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a), rb = ranks(b);
  double d2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    d2 += (ra[k] - rb[k]) * (ra[k] - rb[k]);
  const double n = double(a.size());
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

double estimate_from_sim(double cn0, const CnoEstimatorConfig& cfg, std::mt19937_64& rng) {
  std::vector<CorrelatorBlock> blocks;
  for (int k = 0; k < cfg.averaging; ++k)
    blocks.push_back(simulate_prompts(cn0, cfg, rng));
  return estimate_cno(normalized_power(blocks), cfg);
}

} // namespace

TEST_SUITE("tracking") {

TEST_CASE("effective C/N0 law") {
  ChannelModel model;
  model.quality_factor = 1.0;
  CHECK(effective_cn0(45.0, -std::numeric_limits<double>::infinity(), model) == 45.0);
  CHECK(std::abs(effective_cn0(45.0, 30.0, model) - 29.96) < 0.01);

  model.quality_factor = 1.5;
  for (double nominal = 30.0; nominal <= 50.0; nominal += 5.0) {
    double prev = effective_cn0(nominal, -20.0, model);
    for (double js = -15.0; js <= 60.0; js += 5.0) {
      const double now = effective_cn0(nominal, js, model);
      REQUIRE(now < prev);
      REQUIRE(now < nominal);
      prev = now;
    }
  }
}

TEST_CASE("jammer to signal ratio from JNR") {
  CHECK(jammer_to_signal_db(0.0, 45.0, 2e6) == doctest::Approx(10.0 * std::log10(2e6) - 45.0));
}

TEST_CASE("quality factor of a chirp band") {
  const double rc = 1.023e6;
  // Narrow band at DC sees the code PSD peak Tc, so Q tends to 1 once aliases are far away.
  CHECK(spectral_quality_factor(-1e3, 1e3, rc, 1e9) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(spectral_quality_factor(-1e3, 1e3, rc, 2e6) < 1.0);

  // Independent oracle: midpoint rule on a fine grid.
  const double lo = -250e3, hi = 250e3, fs = 2e6;
  const double tc = 1.0 / rc;
  const int n = 200000;
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    const double f = lo + (k + 0.5) * (hi - lo) / n;
    for (int m = -8; m <= 8; ++m) {
      const double x = (f + m * fs) * tc;
      const double s = x == 0.0 ? 1.0 : std::sin(M_PI * x) / (M_PI * x);
      acc += tc * s * s;
    }
  }
  const double kappa = acc / n;
  CHECK(spectral_quality_factor(lo, hi, rc, fs) == doctest::Approx(1.0 / (rc * kappa)).epsilon(1e-6));
  CHECK_THROWS_AS(spectral_quality_factor(1.0, 1.0, rc, fs), InvalidArgument);
}

TEST_CASE("prompt amplitude and noise moments") {
  CHECK(prompt_amplitude(45.0, 1e-3) == doctest::Approx(7.95).epsilon(1e-3));

  CnoEstimatorConfig cfg;
  std::mt19937_64 rng(3);
  double si = 0, sq = 0, sii = 0, sqq = 0;
  const int trials = 5000; // M * trials = 1e5
  for (int k = 0; k < trials; ++k) {
    const auto b = simulate_prompts(-std::numeric_limits<double>::infinity(), cfg, rng);
    for (int i = 0; i < cfg.coherent_blocks; ++i) {
      si += b.ip[i];
      sq += b.qp[i];
      sii += b.ip[i] * b.ip[i];
      sqq += b.qp[i] * b.qp[i];
    }
  }
  const double n = double(trials) * cfg.coherent_blocks;
  CHECK(std::abs(si / n) < 0.05);
  CHECK(std::abs(sq / n) < 0.05);
  CHECK(sii / n == doctest::Approx(1.0).epsilon(0.05));
  CHECK(sqq / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("prompt blocks are reproducible and carry one data bit") {
  CnoEstimatorConfig cfg;
  const auto a = simulate_prompts(45.0, cfg, 99);
  const auto b = simulate_prompts(45.0, cfg, 99);
  CHECK(a.ip == b.ip);
  CHECK(a.qp == b.qp);
  // At 60 dB-Hz the sign of every I sample is the data bit.
  const auto strong = simulate_prompts(60.0, cfg, 5);
  const bool positive = strong.ip[0] > 0;
  for (double v : strong.ip)
    CHECK((v > 0) == positive);
}

TEST_CASE("normalized power arithmetic") {
  CorrelatorBlock flat{std::vector<double>(20, 3.0), std::vector<double>(20, 0.0), 0.0, 1};
  CHECK(normalized_power(std::vector{flat}) == doctest::Approx(20.0));
  CorrelatorBlock tiny{{1.0, 1.0}, {0.0, 0.0}, 0.0, 1};
  CHECK(normalized_power(std::vector{tiny}) == 2.0);
  CorrelatorBlock zero{{0.0, 0.0}, {0.0, 0.0}, 0.0, 1};
  CHECK_THROWS_AS(normalized_power(std::vector{zero}), DegenerateBlock);
  CHECK_THROWS_AS(normalized_power(std::vector<CorrelatorBlock>{}), EmptyInput);
  CHECK_THROWS_AS(normalized_power(std::vector{flat, tiny}), InvalidArgument);
}

TEST_CASE("scale invariance") {
  CnoEstimatorConfig cfg;
  std::mt19937_64 rng(17);
  std::vector<CorrelatorBlock> blocks;
  for (int k = 0; k < 10; ++k)
    blocks.push_back(simulate_prompts(40.0, cfg, rng));
  const double base = normalized_power(blocks);
  for (double c : {0.25, -4.0, 1024.0}) {
    auto scaled = blocks;
    for (auto& b : scaled) {
      for (auto& v : b.ip)
        v *= c;
      for (auto& v : b.qp)
        v *= c;
    }
    CHECK(normalized_power(scaled) == base);
  }
  for (double c : {1e-3, 7.3, -0.61}) {
    auto scaled = blocks;
    for (auto& b : scaled) {
      for (auto& v : b.ip)
        v *= c;
      for (auto& v : b.qp)
        v *= c;
    }
    CHECK(normalized_power(scaled) == doctest::Approx(base).epsilon(1e-13));
  }
}

TEST_CASE("estimator inversion and range") {
  CnoEstimatorConfig cfg;
  CHECK(estimate_cno(10.5, cfg) == doctest::Approx(30.0).epsilon(1e-12));
  CHECK(estimate_cno(1.0 + 1e-9, cfg) < -50.0);
  try {
    estimate_cno(1.0, cfg);
    FAIL("expected an error");
  } catch (const EstimatorRangeError& e) {
    CHECK(e.reason() == EstimatorRangeError::Reason::BelowNoise);
  }
  try {
    estimate_cno(20.0, cfg);
    FAIL("expected an error");
  } catch (const EstimatorRangeError& e) {
    CHECK(e.reason() == EstimatorRangeError::Reason::Saturated);
  }
  CHECK_THROWS_AS(estimate_cno(0.3, cfg), EstimatorRangeError);
  CHECK_THROWS_AS(estimate_cno(std::nan(""), cfg), EstimatorRangeError);
}

TEST_CASE("pure noise averages to unit normalized power") {
  CnoEstimatorConfig cfg;
  std::mt19937_64 rng(8);
  std::vector<CorrelatorBlock> blocks;
  for (int k = 0; k < 10000; ++k)
    blocks.push_back(simulate_prompts(-std::numeric_limits<double>::infinity(), cfg, rng));
  CHECK(normalized_power(blocks) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("estimator bias at 45 dB-Hz") {
  CnoEstimatorConfig cfg;
  cfg.averaging = 100;
  std::mt19937_64 rng(45);
  double sum = 0.0;
  for (int trial = 0; trial < 200; ++trial)
    sum += estimate_from_sim(45.0, cfg, rng);
  CHECK(std::abs(sum / 200.0 - 45.0) < 0.5);
}

TEST_CASE("estimates track the jammed C/N0 ordering") {
  CnoEstimatorConfig cfg;
  cfg.averaging = 100;
  ChannelModel model;
  std::mt19937_64 rng(2024);
  std::vector<double> truth, est;
  for (double js = 0.0; js <= 40.0; js += 5.0) {
    const double eff = effective_cn0(45.0, js, model);
    double acc = 0.0;
    for (int k = 0; k < 40; ++k)
      acc += estimate_from_sim(eff, cfg, rng);
    truth.push_back(-eff);
    est.push_back(-acc / 40.0);
  }
  CHECK(spearman(truth, est) > 0.99);
}

TEST_CASE("correlating a spread signal against its own code") {
  std::mt19937_64 rng(1);
  const auto code = SpreadingCode::random(1023, 1.023e6, rng);
  const double fs = 2.046e6;
  const auto chips = code.sample(2046, fs);
  CHECK(chips[0] == code.chips[0]);
  CHECK(chips[1] == code.chips[0]);
  CHECK(chips[2] == code.chips[1]);
  std::vector<std::complex<double>> x(chips.size());
  for (std::size_t n = 0; n < x.size(); ++n)
    x[n] = {0.5 * chips[n], -0.25 * chips[n]};
  const auto prompts = correlate_prompts(x, chips, 1023);
  REQUIRE(prompts.size() == 2);
  CHECK(prompts[0].real() == doctest::Approx(0.5 * 1023));
  CHECK(prompts[1].imag() == doctest::Approx(-0.25 * 1023));

  std::vector<std::complex<double>> many(45, {1.0, 0.0});
  const auto blocks = group_prompts(many, 20, 3.0, 1e-3, 7);
  REQUIRE(blocks.size() == 2);
  CHECK(blocks[1].t == doctest::Approx(3.02));
  CHECK(blocks[1].sat == 7);
  CHECK_THROWS_AS(code.sample(3000, fs), InvalidArgument);
}

}
