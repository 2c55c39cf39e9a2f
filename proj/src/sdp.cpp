#include "rispm/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rispm {

namespace {

// Real symmetric embedding T(H) = [[Re H, -Im H], [Im H, Re H]] stored as a
// complex matrix with zero imaginary parts so the shared kernels apply.
CMat real_embedding(const CMat& h) {
  const std::size_t n = h.rows();
  CMat t(2 * n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double re = h(i, j).real();
      const double im = h(i, j).imag();
      t(i, j) = re;
      t(i + n, j + n) = re;
      t(i, j + n) = -im;
      t(i + n, j) = im;
    }
  }
  return t;
}

// Maps a feasible point of the embedded real SDP back to a Hermitian matrix
// with the same objective and unit diagonal.
CMat complexify(const CMat& y) {
  const std::size_t n = y.rows() / 2;
  CMat q(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double re = 0.5 * (y(i, j).real() + y(i + n, j + n).real());
      const double im = 0.5 * (y(j, i + n).real() - y(i, j + n).real());
      q(i, j) = cplx(re, im);
    }
  }
  return q.hermitized();
}

double real_inner(const CMat& a, const CMat& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      acc += a(i, j).real() * b(i, j).real();
  return acc;
}

// Largest step alpha <= 1 keeping x + alpha*dx positive definite, located by
// bisection on Cholesky feasibility.
double max_psd_step(const CMat& x, const CMat& dx, double fraction) {
  CMat lower;
  auto feasible = [&](double alpha) {
    return cholesky_factor((x + dx.scaled(alpha)).hermitized(), lower);
  };
  if (feasible(1.0)) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid))
      lo = mid;
    else
      hi = mid;
  }
  return fraction * lo;
}

}  // namespace

SdrSolution solve_unit_diag_sdp(const SdrProblem& problem, const SdpOptions& opts) {
  const std::size_t n = problem.xi.rows();
  if (n == 0 || problem.xi.cols() != n)
    throw std::invalid_argument("solve_unit_diag_sdp: cost matrix must be square");
  if (!problem.xi.is_hermitian())
    throw std::invalid_argument("solve_unit_diag_sdp: cost matrix is not Hermitian");

  const double scale = problem.xi.max_abs();
  if (scale == 0.0) {
    // Zero cost: any feasible point is optimal; return the identity.
    SdrSolution sol;
    sol.q = CMat::identity(n);
    sol.objective = 0.0;
    sol.duality_gap = 0.0;
    return sol;
  }

  // Normalize so tolerances are scale-free; the feasible set is unchanged.
  const CMat c = real_embedding(problem.xi.hermitized().scaled(1.0 / scale)).scaled(0.5);
  const std::size_t m = 2 * n;

  CMat y = CMat::identity(m);
  std::vector<double> dual(m);
  for (std::size_t i = 0; i < m; ++i) {
    double rowsum = 1.0;
    for (std::size_t j = 0; j < m; ++j) rowsum += std::abs(c(i, j).real());
    dual[i] = rowsum;
  }
  auto make_slack = [&](const std::vector<double>& dvec) {
    CMat s = c.scaled(-1.0);
    for (std::size_t i = 0; i < m; ++i) s(i, i) += dvec[i];
    return s;
  };
  CMat slack = make_slack(dual);

  auto snapshot = [&](double gap, int iters) {
    SdrSolution sol;
    sol.q = complexify(y);
    sol.objective = real_inner(c, y) * scale;
    sol.duality_gap = gap * scale;
    sol.iterations = iters;
    return sol;
  };

  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    const double gap = real_inner(y, slack);
    const double obj = real_inner(c, y);
    if (gap <= opts.gap_tol * std::max(1.0, std::abs(obj))) return snapshot(gap, iter);

    const double mu = opts.centering * gap / static_cast<double>(m);

    CMat slower;
    if (!cholesky_factor(slack, slower)) break;
    const CMat sinv = cholesky_inverse(slower).hermitized();

    // Schur system M dy = mu*diag(Sinv) - 1 with M = Y (Hadamard) Sinv.
    CMat schur(m, m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        schur(i, j) = y(i, j).real() * sinv(i, j).real();
    schur = schur.hermitized();
    CMat mlower;
    if (!cholesky_factor(schur, mlower)) {
      for (std::size_t i = 0; i < m; ++i) schur(i, i) += 1e-13;
      if (!cholesky_factor(schur, mlower)) break;
    }
    std::vector<cplx> rhs(m);
    for (std::size_t i = 0; i < m; ++i) rhs[i] = mu * sinv(i, i).real() - 1.0;
    const std::vector<cplx> dy = cholesky_solve(mlower, rhs);

    // dY = mu*Sinv - Y - Y*Diag(dy)*Sinv, symmetrized.
    CMat ydiag = y;  // Y * Diag(dy)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) ydiag(i, j) = y(i, j) * dy[j];
    CMat dyp = sinv.scaled(mu) - y - ydiag * sinv;
    dyp = dyp.hermitized();

    CMat ds(m, m);
    for (std::size_t i = 0; i < m; ++i) ds(i, i) = dy[i];

    const double alpha_p = max_psd_step(y, dyp, opts.step_fraction);
    const double alpha_d = max_psd_step(slack, ds, opts.step_fraction);
    if (alpha_p <= 0.0 || alpha_d <= 0.0) break;

    y = (y + dyp.scaled(alpha_p)).hermitized();
    for (std::size_t i = 0; i < m; ++i) dual[i] += alpha_d * dy[i].real();
    slack = make_slack(dual);
  }

  const double gap = real_inner(y, slack);
  throw SolverError("solve_unit_diag_sdp: no convergence within iteration cap",
                    snapshot(gap, iter));
}

namespace {

std::vector<cplx> project_unit_modulus(const std::vector<cplx>& v) {
  std::vector<cplx> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v[i]);
    out[i] = mag > 0.0 ? v[i] / mag : cplx(1.0, 0.0);
  }
  return out;
}

double quad_form(const CMat& xi, const std::vector<cplx>& v) {
  return dot_conj(v, xi * v).real();
}

}  // namespace

std::vector<cplx> gaussian_randomize(const SdrSolution& sol, const SdrProblem& problem,
                                     std::size_t num_samples, RngStream& rng) {
  if (num_samples == 0)
    throw std::invalid_argument("gaussian_randomize: need at least one sample");
  const std::size_t n = sol.q.rows();
  if (problem.xi.rows() != n)
    throw std::invalid_argument("gaussian_randomize: mismatched problem and solution");

  const EigResult e = hermitian_eig(sol.q.hermitized());
  CMat factor = e.vectors;  // U D^{1/2}, clamping tiny negative eigenvalues
  for (std::size_t j = 0; j < n; ++j) {
    const double root = std::sqrt(std::max(0.0, e.values[j]));
    for (std::size_t i = 0; i < n; ++i) factor(i, j) *= root;
  }

  std::vector<cplx> best =
      project_unit_modulus(factor * std::vector<cplx>(n, cplx(1.0, 0.0)));
  double best_obj = quad_form(problem.xi, best);

  for (std::size_t s = 0; s < num_samples; ++s) {
    const std::vector<cplx> cand = project_unit_modulus(factor * rng.cnormal_vec(n));
    const double obj = quad_form(problem.xi, cand);
    if (obj > best_obj) {
      best_obj = obj;
      best = cand;
    }
  }
  return best;
}

std::vector<cplx> extract_phases(const std::vector<cplx>& phi_tilde) {
  if (phi_tilde.empty()) throw std::invalid_argument("extract_phases: empty input");
  const cplx last = phi_tilde.back();
  if (std::abs(last) < kUnitModulusTol)
    throw std::invalid_argument("extract_phases: vanishing homogenization entry");
  std::vector<cplx> out(phi_tilde.size() - 1);
  for (std::size_t g = 0; g < out.size(); ++g) {
    const cplx ratio = phi_tilde[g] / last;
    const double mag = std::abs(ratio);
    out[g] = mag > 0.0 ? ratio / mag : cplx(1.0, 0.0);
  }
  return out;
}

}  // namespace rispm
