#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "rispm/numkit.hpp"

namespace rispm {

/// Physical and protocol parameters of one scenario. All values are linear
/// scale / SI units; dBm/dB conversion happens at config load.
struct ScenarioConfig {
  std::size_t n_ap = 4;     // AP antennas
  std::size_t ris_l = 144;  // RIS elements
  std::size_t groups = 4;   // element groups G
  std::size_t kbar = 3;     // ON-state groups per symbol
  std::size_t ris_lx = 12;  // RIS columns (x axis)
  std::size_t ris_lz = 12;  // RIS rows (z axis)

  double pt_w = 0.1;        // downlink transmit power (20 dBm)
  double pp_w = 0.01;       // pilot transmit power (10 dBm)
  double noise_w = 1e-11;   // noise power (-80 dBm)

  double d0 = 50.0;         // AP-RIS horizontal distance (m)
  double dy = 45.0;         // AP-user horizontal distance (m)
  double dz = 2.0;          // user height offset (m)
  double wavelength = 0.1;  // carrier wavelength (m)

  double alpha_au = 3.8;    // path-loss exponents
  double alpha_ar = 2.2;
  double alpha_ru = 2.4;
  double c0 = 1e-3;         // path loss at 1 m (30 dB)

  double kappa_au = 0.0;    // Rician factors (inf allowed)
  double kappa_ar = std::numeric_limits<double>::infinity();
  double kappa_ru = 0.0;

  std::size_t coherence_symbols = 150;  // T_c
  std::size_t constellation_order = 4;  // M

  std::size_t group_size() const { return ris_l / groups; }
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Rectangular tiling of the RIS aperture into G groups of adjacent
/// elements; tiles are tile_lx x tile_lz element blocks.
struct GroupTiling {
  std::size_t tiles_x = 1, tiles_z = 1;    // tile grid
  std::size_t tile_lx = 1, tile_lz = 1;    // elements per tile along x/z
  /// Element index (into the tiled enumeration) -> (ix, iz) on the aperture.
  std::vector<std::array<std::size_t, 2>> element_grid;
};

/// Chooses the most-square rectangular tiling of an lx-by-lz aperture into
/// `groups` tiles (ties resolved toward more tiles along z). Throws when no
/// rectangular tiling exists.
GroupTiling choose_tiling(std::size_t lx, std::size_t lz, std::size_t groups);

/// One channel realization: AP->RIS matrix, RIS->user and AP->user vectors,
/// and the per-group cascaded matrix. RIS elements are enumerated tile by
/// tile so each group occupies a contiguous index block.
struct ChannelSet {
  CMat ap_ris;              // L x N
  std::vector<cplx> ris_user;  // length L (column h_r; rows of H use conj)
  std::vector<cplx> ap_user;   // length N (column h_d)
  CMat cascaded;            // G x N, row g = r_g^H Delta_g^H
  GroupTiling tiling;
};

/// Draws one scalar Rician channel coefficient with mean power `path_loss`:
/// a fixed component of phase exp(-j*2*pi*distance/wavelength) plus a
/// circularly symmetric scattered component. kappa may be infinite.
cplx rician_sample(double path_loss, double kappa, double distance, double wavelength,
                   RngStream& rng);

/// Synthesizes a full channel realization for the scenario geometry.
ChannelSet sample_channels(const ScenarioConfig& cfg, RngStream& rng);

/// Per-group cascaded matrix from the ungrouped channels; groups are the
/// contiguous index blocks of length L/G.
CMat group_cascade(const CMat& ap_ris, const std::vector<cplx>& ris_user, std::size_t groups);

/// Received downlink sample y = sqrt(Pt) (theta^T H + h_d^H) w x + noise.
cplx received_signal(const ChannelSet& set, const std::vector<cplx>& theta,
                     const std::vector<cplx>& w, cplx symbol, double pt_w, cplx noise);

}  // namespace rispm
