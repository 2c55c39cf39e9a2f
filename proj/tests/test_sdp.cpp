#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rispm/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace rispm;

namespace {

CMat random_hermitian(std::size_t n, RngStream& rng) {
  CMat a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = rng.cnormal();
  return a.hermitized();
}

double quad_form(const CMat& xi, const std::vector<cplx>& v) {
  return dot_conj(v, xi * v).real();
}

std::vector<cplx> random_unit_modulus(std::size_t n, RngStream& rng) {
  std::vector<cplx> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::polar(1.0, rng.phase());
  return v;
}

}  // namespace

TEST_CASE("zero cost gives zero objective and a feasible point") {
  SdrProblem p{CMat(3, 3)};
  SdrSolution sol = solve_unit_diag_sdp(p);
  CHECK(std::abs(sol.objective) <= 1e-9);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(sol.q(i, i).real() == doctest::Approx(1.0).epsilon(1e-7));
  EigResult e = hermitian_eig(sol.q);
  CHECK(e.values.front() >= -1e-7);
}

TEST_CASE("rank-one cost with unit-modulus factor reaches the analytic optimum") {
  // Xi = u u^H with |u_i| = 1 has optimum (sum |u_i|)^2 = n^2, at Q = v v^H.
  RngStream rng = substream(11, 0);
  std::vector<cplx> u = random_unit_modulus(3, rng);
  CMat xi(3, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) xi(i, j) = u[i] * std::conj(u[j]);
  SdrSolution sol = solve_unit_diag_sdp({xi});
  CHECK(sol.objective == doctest::Approx(9.0).epsilon(1e-6));
  CHECK(sol.duality_gap <= 1e-6 * std::max(1.0, std::abs(sol.objective)));
}

TEST_CASE("n=2 relaxation matches the exhaustive phase grid") {
  RngStream rng = substream(21, 0);
  for (int trial = 0; trial < 10; ++trial) {
    CMat xi = random_hermitian(2, rng);
    SdrSolution sol = solve_unit_diag_sdp({xi});

    double grid_best = -1e300;
    const int grid = 100000;
    for (int k = 0; k < grid; ++k) {
      const double phi = 2.0 * M_PI * k / grid;
      const double val = xi(0, 0).real() + xi(1, 1).real() +
                         2.0 * (xi(0, 1) * std::polar(1.0, phi)).real();
      grid_best = std::max(grid_best, val);
    }
    const double denom = std::max(1.0, std::abs(grid_best));
    CHECK(sol.objective >= grid_best - 1e-5 * denom);
    CHECK(std::abs(sol.objective - grid_best) <= 1e-5 * denom);

    // Extraction recovers a vector meeting the grid optimum (exact for n=2).
    std::vector<cplx> phi_t = gaussian_randomize(sol, {xi}, 100, rng);
    CHECK(quad_form(xi, phi_t) >= grid_best - 1e-5 * denom);
  }
}

TEST_CASE("relaxation upper-bounds every sampled rank-one point") {
  RngStream rng = substream(31, 2);
  CMat xi = random_hermitian(5, rng);
  SdrSolution sol = solve_unit_diag_sdp({xi});
  for (int s = 0; s < 1000; ++s) {
    const double val = quad_form(xi, random_unit_modulus(5, rng));
    CHECK(sol.objective >= val - 1e-6 * std::max(1.0, std::abs(val)));
  }
}

TEST_CASE("solution invariants: unit diagonal, psd, small gap") {
  RngStream rng = substream(41, 7);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t n = 2 + trial % 4;
    CMat xi = random_hermitian(n, rng);
    SdrSolution sol = solve_unit_diag_sdp({xi});
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::abs(sol.q(i, i).real() - 1.0) <= 1e-7);
    EigResult e = hermitian_eig(sol.q);
    CHECK(e.values.front() >= -1e-7);
    CHECK(sol.duality_gap <= 1e-6 * std::max(1.0, std::abs(sol.objective)));
  }
}

TEST_CASE("solver handles badly scaled costs") {
  RngStream rng = substream(51, 3);
  CMat xi = random_hermitian(4, rng);
  SdrSolution base = solve_unit_diag_sdp({xi});
  for (double s : {1e-9, 1e9}) {
    SdrSolution scaled = solve_unit_diag_sdp({xi.scaled(s)});
    CHECK(scaled.objective == doctest::Approx(base.objective * s).epsilon(1e-6));
  }
}

TEST_CASE("non-Hermitian cost rejected") {
  CMat xi(2, 2);
  xi(0, 1) = 1.0;
  xi(1, 0) = 0.3;
  CHECK_THROWS_AS(solve_unit_diag_sdp({xi}), std::invalid_argument);
}

TEST_CASE("iteration cap raises a convergence error carrying the iterate") {
  RngStream rng = substream(61, 1);
  CMat xi = random_hermitian(4, rng);
  SdpOptions opts;
  opts.max_iterations = 1;
  try {
    solve_unit_diag_sdp({xi}, opts);
    FAIL("expected SolverError");
  } catch (const SolverError& err) {
    CHECK(err.last_iterate.q.rows() == 4);
    for (std::size_t i = 0; i < 4; ++i)
      CHECK(err.last_iterate.q(i, i).real() == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("gaussian randomization passes rank-one solutions through") {
  RngStream rng = substream(71, 0);
  std::vector<cplx> v = random_unit_modulus(4, rng);
  CMat q(4, 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) q(i, j) = v[i] * std::conj(v[j]);
  SdrSolution sol;
  sol.q = q;
  CMat xi = random_hermitian(4, rng);
  std::vector<cplx> got = gaussian_randomize(sol, {xi}, 50, rng);
  // Same vector up to a global phase, so |<got, v>| = n.
  CHECK(std::abs(dot_conj(got, v)) == doctest::Approx(4.0).epsilon(1e-9));
  // sqrt of the near-zero eigenvalues limits the achievable match here
  CHECK(quad_form(xi, got) == doctest::Approx(quad_form(xi, v)).epsilon(1e-7));
}

TEST_CASE("gaussian randomization scalar case") {
  SdrSolution sol;
  sol.q = CMat::identity(1);
  CMat xi(1, 1);
  xi(0, 0) = 2.5;
  RngStream rng = substream(81, 0);
  std::vector<cplx> got = gaussian_randomize(sol, {xi}, 10, rng);
  CHECK(got.size() == 1);
  CHECK(std::abs(got[0]) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(quad_form(xi, got) == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("randomization beats the random unit-modulus median") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    RngStream rng = substream(1000 + seed, 0);
    CMat xi = random_hermitian(4, rng);
    SdrSolution sol = solve_unit_diag_sdp({xi});
    RngStream rand_rng = substream(1000 + seed, 1);
    std::vector<cplx> got = gaussian_randomize(sol, {xi}, 100, rand_rng);
    const double got_obj = quad_form(xi, got);

    std::vector<double> baseline(1000);
    for (double& b : baseline) b = quad_form(xi, random_unit_modulus(4, rand_rng));
    std::nth_element(baseline.begin(), baseline.begin() + 500, baseline.end());
    CHECK(got_obj >= baseline[500]);
  }
}

TEST_CASE("randomization is deterministic given the stream") {
  RngStream rng = substream(91, 4);
  CMat xi = random_hermitian(4, rng);
  SdrSolution sol = solve_unit_diag_sdp({xi});
  RngStream r1 = substream(5, 5);
  RngStream r2 = substream(5, 5);
  std::vector<cplx> a = gaussian_randomize(sol, {xi}, 64, r1);
  std::vector<cplx> b = gaussian_randomize(sol, {xi}, 64, r2);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  CHECK_THROWS_AS(gaussian_randomize(sol, {xi}, 0, r1), std::invalid_argument);
}

TEST_CASE("extract_phases basics") {
  const cplx j(0.0, 1.0);
  std::vector<cplx> tilde = {std::polar(1.0, M_PI / 4), cplx(1.0, 0.0)};
  std::vector<cplx> phi = extract_phases(tilde);
  REQUIRE(phi.size() == 1);
  CHECK(std::abs(phi[0] - std::polar(1.0, M_PI / 4)) < 1e-14);

  std::vector<cplx> tri = {std::polar(1.0, M_PI / 3), std::polar(1.0, M_PI / 6),
                           std::polar(1.0, M_PI / 6)};
  std::vector<cplx> phi3 = extract_phases(tri);
  CHECK(std::abs(phi3[0] - std::polar(1.0, M_PI / 6)) < 1e-14);
  CHECK(std::abs(phi3[1] - cplx(1.0, 0.0)) < 1e-14);

  std::vector<cplx> degenerate = {cplx(1.0, 0.0), cplx(1e-13, 0.0)};
  CHECK_THROWS_AS(extract_phases(degenerate), std::invalid_argument);
  (void)j;
}

TEST_CASE("extract_phases is invariant to a global phase") {
  RngStream rng = substream(101, 0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<cplx> tilde = random_unit_modulus(5, rng);
    const cplx rot = std::polar(1.0, rng.phase());
    std::vector<cplx> rotated = vec_scaled(tilde, rot);
    std::vector<cplx> a = extract_phases(tilde);
    std::vector<cplx> b = extract_phases(rotated);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(std::abs(a[i] - b[i]) < 1e-12);
      CHECK(std::abs(std::abs(a[i]) - 1.0) < 1e-15);
    }
  }
}
