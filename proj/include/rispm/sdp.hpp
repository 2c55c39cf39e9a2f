#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "rispm/numkit.hpp"

namespace rispm {

/// Unit-diagonal complex SDP instance: maximize tr(Xi * Q) over Hermitian
/// Q >= 0 with Q_ii = 1.
struct SdrProblem {
  CMat xi;  // Hermitian cost matrix
};

struct SdrSolution {
  CMat q;              // Hermitian PSD, unit diagonal
  double objective = 0.0;
  double duality_gap = 0.0;
  int iterations = 0;
};

struct SdpOptions {
  int max_iterations = 200;
  double gap_tol = 1e-7;      // relative duality gap target
  double centering = 0.1;     // sigma
  double step_fraction = 0.98;
};

/// Thrown when the interior-point loop hits its iteration cap; carries the
/// last iterate so callers can inspect how far it got.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, SdrSolution last)
      : std::runtime_error(what), last_iterate(std::move(last)) {}
  SdrSolution last_iterate;
};

/// Solves the unit-diagonal SDP with a primal-dual path-following interior
/// point method on the real symmetric embedding of the Hermitian problem
/// (dimension doubles). Throws std::invalid_argument for non-Hermitian cost
/// and SolverError on non-convergence.
SdrSolution solve_unit_diag_sdp(const SdrProblem& problem, const SdpOptions& opts = {});

/// Extracts a unit-modulus vector from an SDP solution: the deterministic
/// candidate U D^{1/2} 1 plus num_samples Gaussian candidates U D^{1/2} k,
/// k ~ CN(0, I), all projected entrywise to unit modulus; returns the one
/// with the best objective (deterministic candidate wins ties).
std::vector<cplx> gaussian_randomize(const SdrSolution& sol, const SdrProblem& problem,
                                     std::size_t num_samples, RngStream& rng);

/// De-homogenizes an augmented phase vector: divides the first G entries by
/// the last one and renormalizes each to unit modulus. Invariant to a global
/// phase on the input. Throws on a vanishing last entry.
std::vector<cplx> extract_phases(const std::vector<cplx>& phi_tilde);

}  // namespace rispm
