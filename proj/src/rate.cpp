#include "rispm/rate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rispm {

ComboIndex combo_index_set(std::size_t groups, std::size_t kbar) {
  if (kbar > groups)
    throw std::invalid_argument("combo_index_set: ON count cannot exceed the group count");
  ComboIndex combos;
  combos.groups = groups;
  combos.kbar = kbar;
  std::vector<std::size_t> cur;
  auto rec = [&](auto&& self, std::size_t start) -> void {
    if (cur.size() == kbar) {
      combos.sets.push_back(cur);
      return;
    }
    for (std::size_t i = start; i + (kbar - cur.size()) <= groups; ++i) {
      cur.push_back(i);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return combos;
}

std::vector<std::vector<std::size_t>> all_onoff_subsets(std::size_t groups) {
  if (groups >= 20)
    throw std::invalid_argument("all_onoff_subsets: too many groups to enumerate");
  std::vector<std::vector<std::size_t>> out;
  out.reserve(1ull << groups);
  for (std::uint64_t mask = 0; mask < (1ull << groups); ++mask) {
    std::vector<std::size_t> set;
    for (std::size_t g = 0; g < groups; ++g)
      if ((mask >> g) & 1ull) set.push_back(g);
    out.push_back(std::move(set));
  }
  return out;
}

std::uint64_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;  // exact: product of i consecutive ints
  }
  return result;
}

std::uint64_t combo_rank(const std::vector<std::size_t>& set, std::size_t groups) {
  const std::size_t kbar = set.size();
  std::uint64_t rank = 0;
  std::size_t prev = 0;
  for (std::size_t i = 0; i < kbar; ++i) {
    if (set[i] >= groups || (i > 0 && set[i] <= set[i - 1]))
      throw std::invalid_argument("combo_rank: set must be sorted and within range");
    for (std::size_t v = prev; v < set[i]; ++v) rank += binomial(groups - 1 - v, kbar - 1 - i);
    prev = set[i] + 1;
  }
  return rank;
}

std::vector<std::size_t> combo_unrank(std::uint64_t rank, std::size_t groups, std::size_t kbar) {
  if (rank >= binomial(groups, kbar))
    throw std::invalid_argument("combo_unrank: rank out of range");
  std::vector<std::size_t> set(kbar);
  std::size_t v = 0;
  for (std::size_t i = 0; i < kbar; ++i) {
    while (true) {
      const std::uint64_t block = binomial(groups - 1 - v, kbar - 1 - i);
      if (rank < block) break;
      rank -= block;
      ++v;
    }
    set[i] = v++;
  }
  return set;
}

std::size_t combo_bit_capacity(std::size_t groups, std::size_t kbar) {
  const std::uint64_t count = binomial(groups, kbar);
  std::size_t bits = 0;
  while ((1ull << (bits + 1)) <= count) ++bits;
  return bits;
}

Constellation bpsk() {
  Constellation c;
  c.order = 2;
  c.points = {cplx(1.0, 0.0), cplx(-1.0, 0.0)};
  return c;
}

Constellation qpsk() {
  const double s = 1.0 / std::sqrt(2.0);
  Constellation c;
  c.order = 4;
  c.points = {cplx(s, s), cplx(-s, s), cplx(-s, -s), cplx(s, -s)};
  return c;
}

Constellation psk(std::size_t order) {
  if (order < 2) throw std::invalid_argument("psk: order must be at least 2");
  if (order == 2) return bpsk();
  if (order == 4) return qpsk();
  Constellation c;
  c.order = order;
  c.points.resize(order);
  for (std::size_t m = 0; m < order; ++m)
    c.points[m] = std::polar(1.0, 2.0 * M_PI * static_cast<double>(m) / order);
  return c;
}

EffectiveChannels effective_channels(const std::vector<cplx>& phases, const CMat& cascaded,
                                     const std::vector<cplx>& ap_user,
                                     const std::vector<cplx>& w) {
  if (phases.size() != cascaded.rows())
    throw std::invalid_argument("effective_channels: phase vector length mismatch");
  EffectiveChannels eff;
  const std::vector<cplx> hw = cascaded * w;
  eff.reflected.resize(hw.size());
  for (std::size_t g = 0; g < hw.size(); ++g) eff.reflected[g] = phases[g] * hw[g];
  eff.direct = dot_conj(ap_user, w);
  return eff;
}

namespace {

// Conditional mutual-information estimate for arbitrary per-combination
// effective channels: log2(J M) - log2 e - mean over noise draws of the
// average log2 kernel sum.
RateEstimate conditional_rate(const std::vector<cplx>& combo_channels,
                              const Constellation& constellation, double pt_w, double sigma2_w,
                              std::size_t noise_samples, RngStream& rng) {
  const std::size_t j_count = combo_channels.size();
  const std::size_t m_count = constellation.points.size();
  if (j_count == 0) throw std::invalid_argument("rate: need at least one combination");
  if (m_count == 0) throw std::invalid_argument("rate: constellation must not be empty");
  if (noise_samples == 0) throw std::invalid_argument("rate: need at least one noise sample");
  if (!(sigma2_w > 0.0)) throw std::invalid_argument("rate: noise power must be positive");
  if (!(pt_w > 0.0)) throw std::invalid_argument("rate: transmit power must be positive");

  const std::size_t q_count = j_count * m_count;
  std::vector<double> pre(q_count), pim(q_count);
  for (std::size_t j = 0; j < j_count; ++j) {
    for (std::size_t m = 0; m < m_count; ++m) {
      const cplx p = combo_channels[j] * constellation.points[m];
      pre[j * m_count + m] = p.real();
      pim[j * m_count + m] = p.imag();
    }
  }

  const double sigma_eff = std::sqrt(sigma2_w / pt_w);  // std of v / sqrt(Pt)
  const double inv_var = pt_w / sigma2_w;
  const double log2e = 1.4426950408889634;

  std::vector<double> expo(q_count);
  double sum_t = 0.0, sum_t2 = 0.0;
  for (std::size_t s = 0; s < noise_samples; ++s) {
    const cplx z = rng.cnormal();
    const double ur = sigma_eff * z.real();
    const double ui = sigma_eff * z.imag();
    double per_sample = 0.0;
    for (std::size_t q = 0; q < q_count; ++q) {
      const double dr = ur + pre[q];
      const double di = ui + pim[q];
      double emax = -1e300;
      for (std::size_t qq = 0; qq < q_count; ++qq) {
        const double xr = dr - pre[qq];
        const double xi = di - pim[qq];
        const double e = -(xr * xr + xi * xi) * inv_var;
        expo[qq] = e;
        if (e > emax) emax = e;
      }
      double acc = 0.0;
      for (std::size_t qq = 0; qq < q_count; ++qq) acc += std::exp(expo[qq] - emax);
      per_sample += (emax + std::log(acc)) * log2e;
    }
    per_sample /= static_cast<double>(q_count);
    sum_t += per_sample;
    sum_t2 += per_sample * per_sample;
  }

  const double n = static_cast<double>(noise_samples);
  const double mean_t = sum_t / n;
  const double var_t = std::max(0.0, sum_t2 / n - mean_t * mean_t);

  RateEstimate est;
  est.noise_samples = noise_samples;
  est.bits = std::log2(static_cast<double>(q_count)) - log2e - mean_t;
  if (est.bits < 0.0) est.bits = 0.0;
  est.stderr_value = std::sqrt(var_t / n);
  return est;
}

}  // namespace

RateEstimate rate_practical(const EffectiveChannels& eff,
                            const std::vector<std::vector<std::size_t>>& combos,
                            const Constellation& constellation, double pt_w, double sigma2_w,
                            std::size_t noise_samples, RngStream& rng) {
  std::vector<cplx> combo_channels(combos.size());
  for (std::size_t j = 0; j < combos.size(); ++j) {
    cplx acc = eff.direct;
    for (std::size_t k : combos[j]) {
      if (k >= eff.reflected.size())
        throw std::invalid_argument("rate_practical: combination index out of range");
      acc += eff.reflected[k];
    }
    combo_channels[j] = acc;
  }
  return conditional_rate(combo_channels, constellation, pt_w, sigma2_w, noise_samples, rng);
}

RateEstimate rate_upper_bound(const ChannelSet& set,
                              const std::vector<std::vector<std::size_t>>& combos,
                              const Constellation& constellation, double pt_w, double sigma2_w,
                              std::size_t noise_samples, RngStream& rng,
                              const CMat* design_cascaded,
                              const std::vector<cplx>* design_ap_user) {
  const CMat& dh = design_cascaded != nullptr ? *design_cascaded : set.cascaded;
  const std::vector<cplx>& dd = design_ap_user != nullptr ? *design_ap_user : set.ap_user;
  const std::size_t n = set.cascaded.cols();

  std::vector<cplx> combo_channels(combos.size());
  for (std::size_t j = 0; j < combos.size(); ++j) {
    const auto& iset = combos[j];
    CMat rows(iset.size(), n);
    for (std::size_t k = 0; k < iset.size(); ++k) {
      if (iset[k] >= dh.rows())
        throw std::invalid_argument("rate_upper_bound: combination index out of range");
      for (std::size_t c = 0; c < n; ++c) rows(k, c) = dh(iset[k], c);
    }
    const InstantaneousSolution design =
        alternating_optimize_instantaneous(rows, dd, 1e-6, 50);
    // Effective channel the user actually sees: true channels, designed
    // reflection and beamformer.
    const std::vector<cplx> hw = set.cascaded * design.w;
    cplx f = dot_conj(set.ap_user, design.w);
    for (std::size_t k = 0; k < iset.size(); ++k) f += design.theta_on[k] * hw[iset[k]];
    combo_channels[j] = f;
  }
  return conditional_rate(combo_channels, constellation, pt_w, sigma2_w, noise_samples, rng);
}

double effective_rate_with_overhead(double rate_bits, std::size_t groups,
                                    std::size_t coherence_symbols) {
  if (coherence_symbols <= groups + 1)
    throw std::invalid_argument(
        "effective_rate_with_overhead: coherence length must exceed the pilot overhead");
  const double ratio =
      static_cast<double>(groups + 1) / static_cast<double>(coherence_symbols);
  return (1.0 - ratio) * rate_bits;
}

}  // namespace rispm
