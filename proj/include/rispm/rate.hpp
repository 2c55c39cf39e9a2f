#pragma once

#include <cstdint>
#include <vector>

#include "rispm/beamform.hpp"
#include "rispm/channel.hpp"
#include "rispm/numkit.hpp"

namespace rispm {

/// All kbar-subsets of {0..G-1} in lexicographic order.
struct ComboIndex {
  std::size_t groups = 0;
  std::size_t kbar = 0;
  std::vector<std::vector<std::size_t>> sets;
  std::size_t count() const { return sets.size(); }
};

ComboIndex combo_index_set(std::size_t groups, std::size_t kbar);

/// All 2^G subsets (any size), used by the coin-flip benchmark.
std::vector<std::vector<std::size_t>> all_onoff_subsets(std::size_t groups);

std::uint64_t binomial(std::size_t n, std::size_t k);

/// Lexicographic rank of a kbar-subset and its inverse; the transmitter-side
/// mapping carries floor(log2 C(G, kbar)) bits per symbol.
std::uint64_t combo_rank(const std::vector<std::size_t>& set, std::size_t groups);
std::vector<std::size_t> combo_unrank(std::uint64_t rank, std::size_t groups, std::size_t kbar);
std::size_t combo_bit_capacity(std::size_t groups, std::size_t kbar);

/// Unit-average-power symbol set.
struct Constellation {
  std::size_t order = 0;
  std::vector<cplx> points;
};

Constellation bpsk();
Constellation qpsk();  // {(+-1 +- j)/sqrt(2)}, Gray order
Constellation psk(std::size_t order);

/// Effective scalar channels perceived by the user for a fixed design:
/// per-group reflected coefficients (Phi H w) and the direct one (h_d^H w).
struct EffectiveChannels {
  std::vector<cplx> reflected;  // length G
  cplx direct = cplx(0.0, 0.0);
};

EffectiveChannels effective_channels(const std::vector<cplx>& phases, const CMat& cascaded,
                                     const std::vector<cplx>& ap_user,
                                     const std::vector<cplx>& w);

struct RateEstimate {
  double bits = 0.0;
  double stderr_value = 0.0;
  std::size_t noise_samples = 0;
};

/// Conditional achievable rate for one channel realization of the scheme
/// whose effective per-combination channels are sum_{k in S_j} reflected[k]
/// + direct: Monte Carlo over the noise variable with `noise_samples` draws.
/// Tiny negative estimates are clamped to zero.
RateEstimate rate_practical(const EffectiveChannels& eff,
                            const std::vector<std::vector<std::size_t>>& combos,
                            const Constellation& constellation, double pt_w, double sigma2_w,
                            std::size_t noise_samples, RngStream& rng);

/// Conditional rate of the instantaneous-knowledge upper bound: designs the
/// beamforming per combination (on `design` estimates when given, otherwise
/// on the true channels) and evaluates the resulting per-combination
/// effective channels against the true ones.
RateEstimate rate_upper_bound(const ChannelSet& set,
                              const std::vector<std::vector<std::size_t>>& combos,
                              const Constellation& constellation, double pt_w, double sigma2_w,
                              std::size_t noise_samples, RngStream& rng,
                              const CMat* design_cascaded = nullptr,
                              const std::vector<cplx>* design_ap_user = nullptr);

/// Scales a rate by the (1 - (G+1)/Tc) training-overhead factor.
double effective_rate_with_overhead(double rate_bits, std::size_t groups,
                                    std::size_t coherence_symbols);

}  // namespace rispm
