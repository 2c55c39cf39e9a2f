#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rispm/outage.hpp"

#include <cmath>
#include <vector>

using namespace rispm;

TEST_CASE("gamma approximation parameters") {
  GammaApprox k0 = gamma_approx_params(0);
  CHECK(k0.first_moment == doctest::Approx(1.0));
  CHECK(k0.second_moment == doctest::Approx(2.0));
  CHECK(k0.shape == doctest::Approx(1.0));
  CHECK(k0.scale == doctest::Approx(1.0));

  GammaApprox k1 = gamma_approx_params(1);
  CHECK(k1.first_moment == doctest::Approx(2.0 + M_PI / 2.0).epsilon(1e-12));
  CHECK(k1.second_moment == doctest::Approx(10.0 + 3.0 * M_PI).epsilon(1e-12));
  CHECK(k1.shape == doctest::Approx(1.9104).epsilon(1e-4));
  CHECK(k1.scale == doctest::Approx(1.8691).epsilon(1e-4));

  GammaApprox k3 = gamma_approx_params(3);
  CHECK(k3.first_moment == doctest::Approx(4.0 + 3.0 * M_PI).epsilon(1e-12));
  CHECK(k3.second_moment ==
        doctest::Approx(44.0 + 54.0 * M_PI + 1.5 * M_PI * M_PI).epsilon(1e-12));
  CHECK(k3.shape == doctest::Approx(3.737).epsilon(1e-3));
}

TEST_CASE("gamma moments agree with a large monte-carlo cross check") {
  for (std::size_t kbar : {1u, 3u}) {
    GammaApprox g = gamma_approx_params(kbar);
    RngStream rng = substream(500, kbar);
    const std::size_t trials = 10000000;
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      double s = 0.0;
      for (std::size_t i = 0; i <= kbar; ++i) s += std::abs(rng.cnormal());
      const double x = s * s;
      m1 += x;
      m2 += x * x;
    }
    m1 /= trials;
    m2 /= trials;
    CHECK(m1 == doctest::Approx(g.first_moment).epsilon(0.005));
    CHECK(m2 == doctest::Approx(g.second_moment).epsilon(0.005));
  }
}

TEST_CASE("shape bounds and monotonicity") {
  double prev = 0.0;
  for (std::size_t kbar = 0; kbar <= 10; ++kbar) {
    GammaApprox g = gamma_approx_params(kbar);
    CHECK(g.shape >= 1.0 - 1e-12);
    CHECK(g.shape <= static_cast<double>(kbar) + 1.0 + 1e-12);
    if (kbar == 0) CHECK(g.shape == doctest::Approx(1.0));
    if (kbar > 0) {
      CHECK(g.shape > prev);
      CHECK(g.shape < static_cast<double>(kbar) + 1.0);
    }
    prev = g.shape;
  }
}

TEST_CASE("closed-form outage basics") {
  OutageQuery q{0, 1.0, 100.0, PhaseMode::kOptimal};
  OutageValue v = outage_closed_form(q);
  CHECK(v.probability == doctest::Approx(0.01).epsilon(1e-12));
  CHECK_FALSE(v.clamped);

  // monotone decreasing in the SNR
  double prev = 2.0;
  for (double snr : {10.0, 30.0, 100.0, 300.0, 1000.0}) {
    OutageQuery qq{2, 1.0, snr, PhaseMode::kOptimal};
    const double p = outage_closed_form(qq).probability;
    CHECK(p <= prev);
    prev = p;
  }

  // clamping at low SNR
  OutageQuery low{0, 4.0, 1e-3, PhaseMode::kOptimal};
  OutageValue clamped = outage_closed_form(low);
  CHECK(clamped.probability == 1.0);
  CHECK(clamped.clamped);

  CHECK_THROWS_AS(outage_closed_form({0, -1.0, 10.0, PhaseMode::kOptimal}),
                  std::invalid_argument);
}

TEST_CASE("unit-phase benchmark values") {
  OutageQuery q{1, 1.0, 100.0, PhaseMode::kUnit};
  CHECK(outage_unit_phase(q).probability == doctest::Approx(0.005).epsilon(1e-12));

  // kbar = 0 coincides with the co-phased closed form
  OutageQuery q0{0, 1.5, 250.0, PhaseMode::kUnit};
  OutageQuery q0opt{0, 1.5, 250.0, PhaseMode::kOptimal};
  CHECK(outage_unit_phase(q0).probability ==
        doctest::Approx(outage_closed_form(q0opt).probability).epsilon(1e-12));

  // doubling kbar+1 halves the probability
  OutageQuery qa{1, 1.0, 500.0, PhaseMode::kUnit};
  OutageQuery qb{3, 1.0, 500.0, PhaseMode::kUnit};
  CHECK(outage_unit_phase(qb).probability ==
        doctest::Approx(0.5 * outage_unit_phase(qa).probability).epsilon(1e-12));
}

TEST_CASE("monte-carlo outage against exact distributions") {
  // gamma -> 0 forces outage
  RngStream rng0 = substream(501, 0);
  OutageEstimate sat = outage_monte_carlo({2, 1.0, 1e-9, PhaseMode::kOptimal}, 4, 2000, rng0);
  CHECK(sat.probability == doctest::Approx(1.0));

  // kbar = 0: exact exponential CDF
  for (double snr : {10.0, 100.0}) {
    RngStream rng = substream(502, static_cast<std::uint64_t>(snr));
    OutageEstimate est = outage_monte_carlo({0, 1.0, snr, PhaseMode::kOptimal}, 4, 200000, rng);
    const double exact = 1.0 - std::exp(-1.0 / snr);
    CHECK(std::abs(est.probability - exact) <= 3.0 * est.stderr_value + 1e-12);
  }

  // unit mode, kbar = 1: the sum is CN(0,2), outage is exponential in the
  // halved threshold
  RngStream rng1 = substream(503, 0);
  OutageEstimate unit = outage_monte_carlo({1, 1.0, 20.0, PhaseMode::kUnit}, 4, 200000, rng1);
  const double exact_unit = 1.0 - std::exp(-1.0 / (2.0 * 20.0));
  CHECK(std::abs(unit.probability - exact_unit) <= 3.0 * unit.stderr_value);

  CHECK_THROWS_AS(outage_monte_carlo({5, 1.0, 10.0, PhaseMode::kOptimal}, 4, 100, rng1),
                  std::invalid_argument);
}

TEST_CASE("co-phasing beats unit phases") {
  for (std::size_t kbar : {1u, 3u}) {
    const double snr = 15.0;
    RngStream ra = substream(504, kbar);
    RngStream rb = substream(505, kbar);
    OutageEstimate opt =
        outage_monte_carlo({kbar, 1.0, snr, PhaseMode::kOptimal}, 4, 400000, ra);
    OutageEstimate unit = outage_monte_carlo({kbar, 1.0, snr, PhaseMode::kUnit}, 4, 400000, rb);
    const double spread =
        std::sqrt(opt.stderr_value * opt.stderr_value + unit.stderr_value * unit.stderr_value);
    CHECK(opt.probability < unit.probability - 3.0 * spread);
  }
}

TEST_CASE("log-log outage slope approximates the diversity order") {
  for (std::size_t kbar : {0u, 1u}) {
    const GammaApprox g = gamma_approx_params(kbar);
    const std::vector<double> snrs = {100.0, 177.8, 316.2, 562.3, 1000.0};
    const std::size_t trials = kbar == 0 ? 2000000 : 20000000;
    std::vector<double> logp, logg;
    for (std::size_t i = 0; i < snrs.size(); ++i) {
      RngStream rng = substream(506 + kbar, i);
      OutageEstimate est =
          outage_monte_carlo({kbar, 1.0, snrs[i], PhaseMode::kOptimal}, 4, trials, rng);
      REQUIRE(est.probability > 0.0);
      logp.push_back(std::log(est.probability));
      logg.push_back(std::log(snrs[i]));
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(logp.size());
    for (std::size_t i = 0; i < logp.size(); ++i) {
      sx += logg[i];
      sy += logp[i];
      sxx += logg[i] * logg[i];
      sxy += logg[i] * logp[i];
    }
    const double slope = (sxy - sx * sy / n) / (sxx - sx * sx / n);
    CHECK(std::abs(-slope - g.shape) <= 0.15 * g.shape);
  }
}
