#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rispm/numkit.hpp"
#include "rispm/sdp.hpp"

namespace rispm {

/// First and second moments of the binary ON/OFF group vector, plus the
/// augmented matrix [[A, a], [a^T, 1]] used by the average-power objective.
struct OnOffStatistics {
  CMat second_moment;            // G x G, E[s s^T]
  std::vector<double> mean;      // length G, E[s]
  CMat augmented;                // (G+1) x (G+1)
  std::size_t groups = 0;
};

/// Moments when exactly kbar of G groups are ON, all combinations
/// equiprobable: diagonal K/G, off-diagonal K(K-1)/(G(G-1)), mean K/G.
OnOffStatistics onoff_stats_rpm(std::size_t groups, std::size_t kbar);

/// Moments when each group is ON independently with probability 1/2:
/// A = (11^T + I)/4, a = 1/2.
OnOffStatistics onoff_stats_pbit(std::size_t groups);

/// One reflection configuration: the binary state, its index set, the phase
/// vector, and the resulting reflection coefficients theta_g = phi_g s_g.
struct ReflectionState {
  std::vector<int> on;             // length G, 0/1
  std::vector<std::size_t> iset;   // sorted ON indices (0-based)
  std::vector<cplx> phases;        // length G, unit modulus
  std::vector<cplx> theta;         // length G
};

/// theta_g = phi_g for g in iset, 0 elsewhere. Indices are 0-based.
std::vector<cplx> apply_onoff(const std::vector<cplx>& phases,
                              const std::vector<std::size_t>& iset);

/// Assembles the full reflection configuration for a drawn ON set.
ReflectionState make_reflection_state(const std::vector<cplx>& phases,
                                      std::vector<std::size_t> iset);

struct BeamformSolution {
  std::vector<cplx> w;              // ||w|| <= 1
  std::vector<cplx> phases;         // length G, unit modulus
  std::vector<double> objective_trace;  // per completed iteration
  std::size_t iterations = 0;
  bool converged = false;
};

/// The phase subproblem data for a fixed beamformer: Lambda = diag(H_hat w)
/// and the effective direct coefficient g_d = h_d_hat^H w.
struct PhaseSubproblem {
  std::vector<cplx> lambda;  // diagonal entries
  cplx g_d;
};

PhaseSubproblem make_phase_subproblem(const CMat& cascaded_hat,
                                      const std::vector<cplx>& ap_user_hat,
                                      const std::vector<cplx>& w);

/// Homogenized cost matrix of the phase subproblem:
/// [[Lambda^H A Lambda, g_d Lambda^H a], [g_d^H a^T Lambda, 0]].
CMat phase_cost_matrix(const PhaseSubproblem& sub, const OnOffStatistics& stats);

/// Average received power (normalized by the transmit power):
/// w^H [Phi H; h_d^H]^H Atilde [Phi H; h_d^H] w.
double avg_power_objective(const std::vector<cplx>& w, const std::vector<cplx>& phases,
                           const CMat& cascaded_hat, const std::vector<cplx>& ap_user_hat,
                           const OnOffStatistics& stats);

/// Optimal beamformer for fixed phases: the dominant unit eigenvector of the
/// quadratic-form matrix; second member is the attained objective.
struct BeamformerStep {
  std::vector<cplx> w;
  double objective = 0.0;
};
BeamformerStep solve_w_given_phi(const std::vector<cplx>& phases, const CMat& cascaded_hat,
                                 const std::vector<cplx>& ap_user_hat,
                                 const OnOffStatistics& stats);

/// Phase update for a fixed beamformer via semidefinite relaxation and
/// Gaussian randomization. When previous phases are supplied the better of
/// old/new (by subproblem objective) is returned, which keeps the outer
/// alternation monotone under the randomized extraction.
std::vector<cplx> solve_phi_given_w(const std::vector<cplx>& w, const CMat& cascaded_hat,
                                    const std::vector<cplx>& ap_user_hat,
                                    const OnOffStatistics& stats, RngStream& rng,
                                    std::size_t randomization_samples = 100,
                                    const std::vector<cplx>* previous = nullptr);

/// Joint design from statistical ON/OFF knowledge: alternate the eigenvector
/// beamformer step and the SDR phase step, starting from identity phases,
/// until the fractional objective increase drops below eps or the iteration
/// cap is reached.
BeamformSolution alternating_optimize_statistical(const CMat& cascaded_hat,
                                                  const std::vector<cplx>& ap_user_hat,
                                                  const OnOffStatistics& stats, double eps,
                                                  std::size_t max_iterations, RngStream& rng,
                                                  std::size_t randomization_samples = 100);

struct InstantaneousSolution {
  std::vector<cplx> w;
  std::vector<cplx> theta_on;  // reflection coefficients of the ON groups, in iset order
  double objective = 0.0;      // |(theta^T H_I + h_d^H) w|^2
  std::size_t iterations = 0;
  bool converged = false;
};

/// Design with known ON set: closed-form co-phasing of the ON groups against
/// the direct link, alternated with maximum-ratio transmission.
InstantaneousSolution alternating_optimize_instantaneous(const CMat& cascaded_on_rows,
                                                         const std::vector<cplx>& ap_user_hat,
                                                         double eps, std::size_t max_iterations);

enum class Scheme {
  kRpmStatistical,
  kRpmInstantaneous,
  kNoItFullOn,
  kNoRisMrt,
  kRandomPhase,
  kPbit,
};

/// Parses a scheme name; throws std::invalid_argument for unknown names.
Scheme scheme_from_string(const std::string& name);
std::string scheme_name(Scheme scheme);

struct SchemeInput {
  const CMat* cascaded_hat = nullptr;
  const std::vector<cplx>* ap_user_hat = nullptr;
  std::size_t kbar = 0;
  double eps = 1e-4;
  std::size_t max_iterations = 5;
  std::size_t randomization_samples = 100;
  /// ON set for the instantaneous design; required for kRpmInstantaneous.
  std::optional<std::vector<std::size_t>> iset;
};

/// Dispatches to the named design. For the instantaneous schemes the
/// returned phases carry the designed reflection phases on the ON groups
/// and 1 elsewhere.
BeamformSolution scheme_select(Scheme scheme, const SchemeInput& input, RngStream& rng);

}  // namespace rispm
