#pragma once

#include <cstddef>

#include "rispm/numkit.hpp"

namespace rispm {

/// Moment-matched Gamma parameters for the squared sum of (kbar+1)
/// independent Rayleigh magnitudes (co-phased reflected paths plus the
/// direct one, all unit mean power).
struct GammaApprox {
  double shape = 1.0;          // k_x
  double scale = 1.0;          // theta_x
  double first_moment = 1.0;   // E[X]
  double second_moment = 2.0;  // E[X^2]
};

GammaApprox gamma_approx_params(std::size_t kbar);

enum class PhaseMode { kOptimal, kUnit };

struct OutageQuery {
  std::size_t kbar = 0;
  double target_rate = 1.0;  // R, bits/s/Hz
  double snr = 1.0;          // gamma = Pt / sigma^2, linear
  PhaseMode phase_mode = PhaseMode::kOptimal;
};

/// A probability together with a flag marking that the asymptotic formula
/// left [0, 1] and was clamped (low-SNR regime).
struct OutageValue {
  double probability = 0.0;
  bool clamped = false;
};

/// High-SNR closed form (2^R-1)^k / (theta^k Gamma(k+1)) * gamma^-k for the
/// co-phased design.
OutageValue outage_closed_form(const OutageQuery& query);

/// High-SNR benchmark (2^R-1) / ((kbar+1) gamma) for unit phase shifts.
OutageValue outage_unit_phase(const OutageQuery& query);

struct OutageEstimate {
  double probability = 0.0;
  double stderr_value = 0.0;
  std::size_t trials = 0;
};

/// Direct Monte Carlo of the outage event for the normalized single-antenna
/// model: kbar+1 independent CN(0,1) terms, co-phased (sum of magnitudes)
/// or superposed as-is (unit phases), squared and compared against
/// (2^R - 1)/gamma.
OutageEstimate outage_monte_carlo(const OutageQuery& query, std::size_t groups,
                                  std::size_t trials, RngStream& rng);

}  // namespace rispm
