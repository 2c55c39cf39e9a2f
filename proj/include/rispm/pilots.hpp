#pragma once

#include <vector>

#include "rispm/channel.hpp"
#include "rispm/numkit.hpp"

namespace rispm {

/// One uplink training block: the pilot sequence, the reflection pattern
/// used while it was sent (column i is the augmented state [1; psi^(i)]),
/// and the stacked received pilot matrix.
struct PilotBlock {
  std::vector<cplx> pilots;  // length G+1, unit modulus
  CMat pattern;              // (G+1) x (G+1)
  CMat received;             // N x (G+1)
};

struct ChannelEstimate {
  std::vector<cplx> ap_user_hat;  // length N
  CMat cascaded_hat;              // G x N
};

/// Zadoff-Chu sequence of the requested length; root must be coprime to the
/// length. Uses the n(n+1) exponent for odd lengths and n^2 for even ones.
std::vector<cplx> zadoff_chu(std::size_t length, std::size_t root);

/// Sends G+1 pilot symbols through the DFT reflection pattern and stacks the
/// received vectors: column i = sqrt(Pp) (H^H psi^(i) + h_d) x_i + noise.
PilotBlock run_pilot_phase(const ChannelSet& set, const ScenarioConfig& cfg, RngStream& rng);

/// Least-squares estimate [h_d_hat, H_hat^H] = Y diag(x)^-1 F^H / (sqrt(Pp)(G+1)).
/// Exact under zero noise. Requires the block's pattern to be the DFT one.
ChannelEstimate estimate_channels(const PilotBlock& block, double pp_w);

}  // namespace rispm
