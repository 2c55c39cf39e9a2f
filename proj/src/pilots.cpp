#include "rispm/pilots.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rispm {

std::vector<cplx> zadoff_chu(std::size_t length, std::size_t root) {
  if (length == 0) throw std::invalid_argument("zadoff_chu: length must be positive");
  if (root == 0 || std::gcd(length, root) != 1)
    throw std::invalid_argument("zadoff_chu: root must be coprime to the length");
  std::vector<cplx> seq(length);
  const double len = static_cast<double>(length);
  for (std::size_t i = 0; i < length; ++i) {
    const double n = static_cast<double>(i);
    const double exponent = (length % 2 == 1) ? n * (n + 1.0) : n * n;
    seq[i] = std::polar(1.0, -M_PI * static_cast<double>(root) * exponent / len);
  }
  return seq;
}

PilotBlock run_pilot_phase(const ChannelSet& set, const ScenarioConfig& cfg, RngStream& rng) {
  const std::size_t g = set.cascaded.rows();
  const std::size_t n = set.cascaded.cols();
  if (g != cfg.groups || n != cfg.n_ap)
    throw std::invalid_argument("run_pilot_phase: channel set does not match the scenario");

  PilotBlock block;
  block.pilots = zadoff_chu(g + 1, 1);
  block.pattern = dft_matrix(g + 1);
  block.received = CMat(n, g + 1);

  const double amp = std::sqrt(cfg.pp_w);
  const double noise_amp = std::sqrt(cfg.noise_w);
  const CMat cascaded_h = set.cascaded.adjoint();  // N x G
  for (std::size_t i = 0; i <= g; ++i) {
    // psi^(i): rows 1..G of pattern column i (row 0 is the direct-path slot).
    std::vector<cplx> accum = set.ap_user;
    for (std::size_t gi = 0; gi < g; ++gi) {
      const cplx psi = block.pattern(gi + 1, i);
      for (std::size_t a = 0; a < n; ++a) accum[a] += cascaded_h(a, gi) * psi;
    }
    for (std::size_t a = 0; a < n; ++a) {
      const cplx noise = noise_amp * rng.cnormal();
      block.received(a, i) = amp * accum[a] * block.pilots[i] + noise;
    }
  }
  return block;
}

ChannelEstimate estimate_channels(const PilotBlock& block, double pp_w) {
  const std::size_t cols = block.received.cols();
  const std::size_t n = block.received.rows();
  if (cols == 0 || block.pilots.size() != cols || block.pattern.rows() != cols)
    throw std::invalid_argument("estimate_channels: inconsistent pilot block");
  if (!(pp_w > 0.0)) throw std::invalid_argument("estimate_channels: pilot power must be positive");
  for (const cplx& x : block.pilots)
    if (std::abs(x) < 1e-12)
      throw std::invalid_argument("estimate_channels: pilot sequence has a vanishing entry");
  // The inversion below is exact only for the DFT pattern.
  const CMat check = block.pattern * block.pattern.adjoint();
  const CMat target = CMat::identity(cols).scaled(static_cast<double>(cols));
  if ((check - target).max_abs() > 1e-9 * static_cast<double>(cols))
    throw std::invalid_argument("estimate_channels: pattern is not the DFT reflection pattern");

  // H_tilde_hat = Y diag(x)^-1 F^H / (sqrt(Pp) (G+1))
  CMat scaled = block.received;  // N x (G+1)
  for (std::size_t i = 0; i < cols; ++i) {
    const cplx inv = 1.0 / block.pilots[i];
    for (std::size_t a = 0; a < n; ++a) scaled(a, i) *= inv;
  }
  const double factor = 1.0 / (std::sqrt(pp_w) * static_cast<double>(cols));
  const CMat h_tilde = (scaled * block.pattern.adjoint()).scaled(factor);

  ChannelEstimate est;
  est.ap_user_hat = h_tilde.col(0);
  est.cascaded_hat = CMat(cols - 1, n);
  for (std::size_t gi = 0; gi + 1 < cols; ++gi)
    for (std::size_t a = 0; a < n; ++a)
      est.cascaded_hat(gi, a) = std::conj(h_tilde(a, gi + 1));
  return est;
}

}  // namespace rispm
