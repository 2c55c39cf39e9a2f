#include "rispm/channel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rispm {

void ScenarioConfig::validate() const {
  if (n_ap == 0) throw std::invalid_argument("scenario.n: AP antenna count must be positive");
  if (ris_l == 0) throw std::invalid_argument("scenario.l: RIS element count must be positive");
  if (groups == 0) throw std::invalid_argument("scenario.g: group count must be positive");
  if (ris_l % groups != 0)
    throw std::invalid_argument("scenario.l/g: group size L/G must be an integer");
  if (kbar > groups)
    throw std::invalid_argument("scenario.kbar: ON-group count cannot exceed G");
  if (ris_lx * ris_lz != ris_l)
    throw std::invalid_argument("scenario.ris_lx/ris_lz: aperture grid must cover L elements");
  if (!(pt_w > 0.0)) throw std::invalid_argument("scenario.pt: transmit power must be positive");
  if (!(pp_w > 0.0)) throw std::invalid_argument("scenario.pp: pilot power must be positive");
  if (!(noise_w >= 0.0)) throw std::invalid_argument("scenario.sigma2: noise power must be >= 0");
  if (!(d0 > 0.0) || !(dy > 0.0))
    throw std::invalid_argument("scenario.d0/dy: distances must be positive");
  if (!(wavelength > 0.0))
    throw std::invalid_argument("scenario.wavelength: wavelength must be positive");
  if (!(c0 > 0.0)) throw std::invalid_argument("scenario.c0: reference path loss must be positive");
  if (kappa_au < 0.0 || kappa_ar < 0.0 || kappa_ru < 0.0)
    throw std::invalid_argument("scenario.kappa: Rician factors must be non-negative");
  if (coherence_symbols <= groups + 1)
    throw std::invalid_argument("scenario.tc: coherence length must exceed G+1 pilot symbols");
  if (constellation_order < 2)
    throw std::invalid_argument("scenario.m: constellation order must be at least 2");
  choose_tiling(ris_lx, ris_lz, groups);  // throws if no rectangular grouping exists
}

GroupTiling choose_tiling(std::size_t lx, std::size_t lz, std::size_t groups) {
  bool found = false;
  std::size_t best_gx = 0, best_gz = 0;
  for (std::size_t gx = 1; gx <= groups; ++gx) {
    if (groups % gx != 0) continue;
    const std::size_t gz = groups / gx;
    if (lx % gx != 0 || lz % gz != 0) continue;
    const auto diff = [](std::size_t a, std::size_t b) { return a > b ? a - b : b - a; };
    if (!found || diff(gx, gz) < diff(best_gx, best_gz) ||
        (diff(gx, gz) == diff(best_gx, best_gz) && gx < best_gx)) {
      best_gx = gx;
      best_gz = gz;
      found = true;
    }
  }
  if (!found)
    throw std::invalid_argument("choose_tiling: no rectangular tiling of " + std::to_string(lx) +
                                "x" + std::to_string(lz) + " into " + std::to_string(groups) +
                                " groups");
  GroupTiling t;
  t.tiles_x = best_gx;
  t.tiles_z = best_gz;
  t.tile_lx = lx / best_gx;
  t.tile_lz = lz / best_gz;
  t.element_grid.reserve(lx * lz);
  for (std::size_t tz = 0; tz < t.tiles_z; ++tz) {
    for (std::size_t tx = 0; tx < t.tiles_x; ++tx) {
      for (std::size_t ez = 0; ez < t.tile_lz; ++ez) {
        for (std::size_t ex = 0; ex < t.tile_lx; ++ex) {
          t.element_grid.push_back({tx * t.tile_lx + ex, tz * t.tile_lz + ez});
        }
      }
    }
  }
  return t;
}

namespace {

double los_weight(double kappa) {
  if (std::isinf(kappa)) return 1.0;
  return std::sqrt(kappa / (kappa + 1.0));
}

double nlos_weight(double kappa) {
  if (std::isinf(kappa)) return 0.0;
  return std::sqrt(1.0 / (kappa + 1.0));
}

struct Vec3 {
  double x, y, z;
};

double dist(const Vec3& a, const Vec3& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace

cplx rician_sample(double path_loss, double kappa, double distance, double wavelength,
                   RngStream& rng) {
  if (!(distance > 0.0)) throw std::invalid_argument("rician_sample: distance must be positive");
  const cplx los = std::polar(1.0, -2.0 * M_PI * distance / wavelength);
  const cplx scatter = rng.cnormal();  // drawn even at kappa = inf for stream stability
  return std::sqrt(path_loss) * (los_weight(kappa) * los + nlos_weight(kappa) * scatter);
}

ChannelSet sample_channels(const ScenarioConfig& cfg, RngStream& rng) {
  cfg.validate();
  const std::size_t n = cfg.n_ap;
  const std::size_t l = cfg.ris_l;
  const double half = 0.5 * cfg.wavelength;

  ChannelSet set;
  set.tiling = choose_tiling(cfg.ris_lx, cfg.ris_lz, cfg.groups);

  // Geometry: AP is a half-wavelength ULA on the x axis centered at the
  // origin, the RIS a half-wavelength planar array in the x-z plane centered
  // at (0, d0, 0), the user a point at (0, dy, dz).
  std::vector<Vec3> ap_pos(n);
  for (std::size_t i = 0; i < n; ++i)
    ap_pos[i] = {(static_cast<double>(i) - 0.5 * static_cast<double>(n - 1)) * half, 0.0, 0.0};
  std::vector<Vec3> ris_pos(l);
  for (std::size_t e = 0; e < l; ++e) {
    const auto [ix, iz] = set.tiling.element_grid[e];
    ris_pos[e] = {(static_cast<double>(ix) - 0.5 * static_cast<double>(cfg.ris_lx - 1)) * half,
                  cfg.d0,
                  (static_cast<double>(iz) - 0.5 * static_cast<double>(cfg.ris_lz - 1)) * half};
  }
  const Vec3 user{0.0, cfg.dy, cfg.dz};
  const Vec3 ap_center{0.0, 0.0, 0.0};
  const Vec3 ris_center{0.0, cfg.d0, 0.0};

  // Path losses use center-to-center distances.
  const double d_au = dist(ap_center, user);
  const double d_ru = dist(ris_center, user);
  const double pl_au = cfg.c0 * std::pow(d_au, -cfg.alpha_au);
  const double pl_ar = cfg.c0 * std::pow(cfg.d0, -cfg.alpha_ar);
  const double pl_ru = cfg.c0 * std::pow(d_ru, -cfg.alpha_ru);

  // AP -> user, per-element LoS phases from exact distances.
  set.ap_user.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    set.ap_user[i] = rician_sample(pl_au, cfg.kappa_au, dist(ap_pos[i], user), cfg.wavelength, rng);

  // AP -> RIS, far-field planar-wave LoS: rank-one product of the steering
  // vectors toward the AP->RIS direction.
  const Vec3 khat{(ris_center.x - ap_center.x) / cfg.d0, (ris_center.y - ap_center.y) / cfg.d0,
                  (ris_center.z - ap_center.z) / cfg.d0};
  const double wl = cfg.wavelength;
  const double ar_los_w = los_weight(cfg.kappa_ar);
  const double ar_nlos_w = nlos_weight(cfg.kappa_ar);
  set.ap_ris = CMat(l, n);
  for (std::size_t e = 0; e < l; ++e) {
    const double ris_proj = ris_pos[e].x * khat.x + (ris_pos[e].y - cfg.d0) * khat.y +
                            ris_pos[e].z * khat.z;
    const cplx steer_r = std::polar(1.0, -2.0 * M_PI * ris_proj / wl);
    for (std::size_t i = 0; i < n; ++i) {
      const double ap_proj = ap_pos[i].x * khat.x + ap_pos[i].y * khat.y + ap_pos[i].z * khat.z;
      const cplx steer_t = std::polar(1.0, 2.0 * M_PI * ap_proj / wl);
      const cplx los = std::polar(1.0, -2.0 * M_PI * cfg.d0 / wl) * steer_r * steer_t;
      const cplx scatter = rng.cnormal();
      set.ap_ris(e, i) = std::sqrt(pl_ar) * (ar_los_w * los + ar_nlos_w * scatter);
    }
  }

  // RIS -> user.
  set.ris_user.resize(l);
  for (std::size_t e = 0; e < l; ++e)
    set.ris_user[e] =
        rician_sample(pl_ru, cfg.kappa_ru, dist(ris_pos[e], user), cfg.wavelength, rng);

  set.cascaded = group_cascade(set.ap_ris, set.ris_user, cfg.groups);
  return set;
}

CMat group_cascade(const CMat& ap_ris, const std::vector<cplx>& ris_user, std::size_t groups) {
  const std::size_t l = ap_ris.rows();
  const std::size_t n = ap_ris.cols();
  if (ris_user.size() != l)
    throw std::invalid_argument("group_cascade: RIS-user vector length mismatch");
  if (groups == 0 || l % groups != 0)
    throw std::invalid_argument("group_cascade: element count not divisible into groups");
  const std::size_t per = l / groups;
  CMat h(groups, n);
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t e = g * per; e < (g + 1) * per; ++e) {
      const cplx r_conj = std::conj(ris_user[e]);
      for (std::size_t i = 0; i < n; ++i) h(g, i) += r_conj * ap_ris(e, i);
    }
  }
  return h;
}

cplx received_signal(const ChannelSet& set, const std::vector<cplx>& theta,
                     const std::vector<cplx>& w, cplx symbol, double pt_w, cplx noise) {
  const std::size_t g = set.cascaded.rows();
  const std::size_t n = set.cascaded.cols();
  if (theta.size() != g) throw std::invalid_argument("received_signal: theta length mismatch");
  if (w.size() != n) throw std::invalid_argument("received_signal: beamformer length mismatch");
  if (vec_norm(w) > 1.0 + 1e-9)
    throw std::invalid_argument("received_signal: beamformer must satisfy ||w|| <= 1");
  for (const cplx& t : theta) {
    const double mag = std::abs(t);
    if (std::abs(mag) > 1e-6 && std::abs(mag - 1.0) > 1e-6)
      throw std::invalid_argument("received_signal: reflection entries must be 0 or unit modulus");
  }
  cplx combined(0.0, 0.0);
  for (std::size_t gi = 0; gi < g; ++gi) {
    cplx row_w(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) row_w += set.cascaded(gi, i) * w[i];
    combined += theta[gi] * row_w;
  }
  combined += dot_conj(set.ap_user, w);  // h_d^H w
  return std::sqrt(pt_w) * combined * symbol + noise;
}

}  // namespace rispm
