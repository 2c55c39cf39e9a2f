#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rispm/numkit.hpp"

#include <cmath>
#include <complex>
#include <vector>

using namespace rispm;

namespace {

CMat random_hermitian(std::size_t n, RngStream& rng) {
  CMat a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = rng.cnormal();
  return a.hermitized();
}

// Independent oracle for the dominant eigenpair: shifted power iteration run
// to a 1e-12 residual. The shift makes the largest (signed) eigenvalue the
// dominant one in magnitude.
std::pair<double, std::vector<cplx>> power_iteration_max(const CMat& m, RngStream& rng) {
  const double shift = m.frobenius() + 1.0;
  CMat shifted = m + CMat::identity(m.rows()).scaled(shift);
  std::vector<cplx> v = rng.cnormal_vec(m.rows());
  v = vec_scaled(v, 1.0 / vec_norm(v));
  double lambda = 0.0;
  for (int it = 0; it < 100000; ++it) {
    std::vector<cplx> w = shifted * v;
    const double nw = vec_norm(w);
    v = vec_scaled(w, 1.0 / nw);
    lambda = dot_conj(v, m * v).real();
    std::vector<cplx> resid = m * v;
    for (std::size_t i = 0; i < resid.size(); ++i) resid[i] -= lambda * v[i];
    if (vec_norm(resid) <= 1e-12 * std::max(1.0, m.frobenius())) break;
  }
  return {lambda, v};
}

// High-precision gamma reference (Lanczos approximation, g = 7, 9 terms).
double lanczos_gamma(double x) {
  static const double g = 7.0;
  static const double coef[9] = {
      0.99999999999980993,  676.5203681218851,   -1259.1392167224028,
      771.32342877765313,   -176.61502916214059, 12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) return M_PI / (std::sin(M_PI * x) * lanczos_gamma(1.0 - x));
  x -= 1.0;
  double a = coef[0];
  const double t = x + g + 0.5;
  for (int i = 1; i < 9; ++i) a += coef[i] / (x + i);
  return std::sqrt(2.0 * M_PI) * std::pow(t, x + 0.5) * std::exp(-t) * a;
}

}  // namespace

TEST_CASE("hermitian_eig_max identity and diagonal cases") {
  CMat id3 = CMat::identity(3);
  auto [l1, v1] = hermitian_eig_max(id3);
  CHECK(l1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(vec_norm(v1) == doctest::Approx(1.0).epsilon(1e-12));

  CMat d(3, 3);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  d(2, 2) = 3.0;
  auto [l2, v2] = hermitian_eig_max(d);
  CHECK(l2 == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(std::abs(v2[2]) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(v2[0]) < 1e-12);
  CHECK(std::abs(v2[1]) < 1e-12);
}

TEST_CASE("hermitian_eig_max matches power-iteration oracle on random input") {
  RngStream rng = substream(1234, 0);
  for (int trial = 0; trial < 20; ++trial) {
    CMat m = random_hermitian(4, rng);
    auto [lambda, v] = hermitian_eig_max(m);
    auto [lref, vref] = power_iteration_max(m, rng);
    CHECK(lambda == doctest::Approx(lref).epsilon(1e-9));
    // Same direction up to a global phase.
    CHECK(std::abs(dot_conj(v, vref)) == doctest::Approx(1.0).epsilon(1e-8));
    // Residual contract.
    std::vector<cplx> resid = m * v;
    for (std::size_t i = 0; i < resid.size(); ++i) resid[i] -= lambda * v[i];
    CHECK(vec_norm(resid) <= 1e-9 * std::max(1.0, m.frobenius()));
    CHECK(vec_norm(v) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("full eigendecomposition reconstructs the matrix") {
  RngStream rng = substream(99, 3);
  CMat m = random_hermitian(7, rng);
  EigResult e = hermitian_eig(m);
  // M = V diag(w) V^H
  CMat diag(7, 7);
  for (std::size_t i = 0; i < 7; ++i) diag(i, i) = e.values[i];
  CMat rebuilt = e.vectors * diag * e.vectors.adjoint();
  CHECK((rebuilt - m).max_abs() <= 1e-11 * std::max(1.0, m.max_abs()));
  // V unitary
  CMat vhv = e.vectors.adjoint() * e.vectors;
  CHECK((vhv - CMat::identity(7)).max_abs() <= 1e-12);
  // ascending order
  for (std::size_t i = 0; i + 1 < e.values.size(); ++i) CHECK(e.values[i] <= e.values[i + 1]);
}

TEST_CASE("rayleigh quotient bounded by the largest eigenvalue") {
  RngStream rng = substream(7, 1);
  for (int trial = 0; trial < 30; ++trial) {
    CMat m = random_hermitian(5, rng);
    auto [lambda, v] = hermitian_eig_max(m);
    std::vector<cplx> w = rng.cnormal_vec(5);
    w = vec_scaled(w, 1.0 / vec_norm(w));
    CHECK(dot_conj(w, m * w).real() <= lambda + 1e-9 * std::max(1.0, std::abs(lambda)));
    CHECK(dot_conj(v, m * v).real() == doctest::Approx(lambda).epsilon(1e-9));
  }
}

TEST_CASE("non-Hermitian input rejected") {
  CMat m(2, 2);
  m(0, 1) = cplx(1.0, 0.0);
  m(1, 0) = cplx(0.5, 0.0);
  CHECK_THROWS_AS(hermitian_eig_max(m), std::invalid_argument);
}

TEST_CASE("dft_matrix small cases") {
  CMat f1 = dft_matrix(1);
  CHECK(f1(0, 0) == cplx(1.0, 0.0));

  CMat f2 = dft_matrix(2);
  CHECK(std::abs(f2(0, 0) - cplx(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(f2(0, 1) - cplx(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(f2(1, 0) - cplx(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(f2(1, 1) - cplx(-1.0, 0.0)) < 1e-15);

  CHECK_THROWS_AS(dft_matrix(0), std::invalid_argument);
}

TEST_CASE("dft_matrix orthogonality and unit modulus") {
  for (std::size_t n : {3u, 5u, 8u}) {
    CMat f = dft_matrix(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        CHECK(std::abs(f(i, j)) == doctest::Approx(1.0).epsilon(1e-14));
    // F F^H = n I, so columns are pairwise orthogonal.
    CMat prod = f * f.adjoint();
    CMat target = CMat::identity(n).scaled(static_cast<double>(n));
    CHECK((prod - target).max_abs() <= 1e-12 * static_cast<double>(n));
  }
}

TEST_CASE("gamma function values") {
  CHECK(gamma_fn(1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gamma_fn(0.5) == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-13));
  // Against an independent Lanczos reference.
  for (double x : {0.1, 0.7, 1.3, 2.9, 4.7373, 9.25, 17.0}) {
    CHECK(gamma_fn(x) == doctest::Approx(lanczos_gamma(x)).epsilon(1e-10));
  }
  CHECK_THROWS_AS(gamma_fn(0.0), std::domain_error);
  CHECK_THROWS_AS(gamma_fn(-1.5), std::domain_error);
}

TEST_CASE("cholesky factorization round trip") {
  RngStream rng = substream(2024, 5);
  CMat b(6, 6);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) b(i, j) = rng.cnormal();
  CMat spd = (b * b.adjoint() + CMat::identity(6).scaled(0.5)).hermitized();
  CMat lower;
  REQUIRE(cholesky_factor(spd, lower));
  CMat rebuilt = lower * lower.adjoint();
  CHECK((rebuilt - spd).max_abs() <= 1e-11 * spd.max_abs());

  std::vector<cplx> rhs = rng.cnormal_vec(6);
  std::vector<cplx> x = cholesky_solve(lower, rhs);
  std::vector<cplx> back = spd * x;
  for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(back[i] - rhs[i]) < 1e-10);

  CMat inv = cholesky_inverse(lower);
  CHECK((spd * inv - CMat::identity(6)).max_abs() <= 1e-10);

  // Indefinite input must be refused.
  CMat indef = CMat::identity(2);
  indef(1, 1) = -1.0;
  CMat l2;
  CHECK_FALSE(cholesky_factor(indef, l2));
}

TEST_CASE("rng streams are deterministic") {
  RngStream a = substream(42, 0);
  RngStream b = substream(42, 0);
  for (int i = 0; i < 1000; ++i) CHECK(a.normal() == b.normal());
  RngStream c = substream(42, 0);
  RngStream d = substream(42, 0);
  for (int i = 0; i < 1000; ++i) CHECK(c.cnormal() == d.cnormal());
}

TEST_CASE("distinct stream ids decorrelate") {
  RngStream a = substream(42, 0);
  RngStream b = substream(42, 1);
  const int n = 100000;
  double sxy = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = a.normal();
    const double y = b.normal();
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  const double corr = (sxy / n - sx / n * sy / n) /
                      std::sqrt((sxx / n - sx / n * sx / n) * (syy / n - sy / n * sy / n));
  CHECK(std::abs(corr) <= 0.02);
}

TEST_CASE("complex normal has unit variance") {
  RngStream rng = substream(7, 0);
  const int n = 1000000;
  double acc = 0.0;
  double mean_re = 0.0, mean_im = 0.0;
  for (int i = 0; i < n; ++i) {
    const cplx z = rng.cnormal();
    acc += std::norm(z);
    mean_re += z.real();
    mean_im += z.imag();
  }
  CHECK(acc / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(std::abs(mean_re / n) < 0.005);
  CHECK(std::abs(mean_im / n) < 0.005);
}

TEST_CASE("uniform phase lands in (0, 2pi]") {
  RngStream rng = substream(3, 9);
  for (int i = 0; i < 10000; ++i) {
    const double p = rng.phase();
    CHECK(p > 0.0);
    CHECK(p <= 2.0 * M_PI);
  }
}
