#include "rispm/outage.hpp"

#include <cmath>
#include <stdexcept>

namespace rispm {

GammaApprox gamma_approx_params(std::size_t kbar) {
  const double k = static_cast<double>(kbar);
  const double m1 = (k + 1.0) * (1.0 + M_PI / 4.0 * k);
  const double m2 = 2.0 * (k + 1.0) + (1.5 * M_PI + 3.0) * (k + 1.0) * k +
                    1.5 * M_PI * (k + 1.0) * k * (k - 1.0) +
                    (M_PI * M_PI / 16.0) * (k + 1.0) * k * (k - 1.0) * (k - 2.0);
  const double variance = m2 - m1 * m1;
  GammaApprox out;
  out.first_moment = m1;
  out.second_moment = m2;
  out.shape = m1 * m1 / variance;
  out.scale = variance / m1;
  return out;
}

namespace {

void validate_query(const OutageQuery& q) {
  if (!(q.target_rate > 0.0)) throw std::invalid_argument("outage: target rate must be positive");
  if (!(q.snr > 0.0)) throw std::invalid_argument("outage: SNR must be positive");
}

OutageValue clamp01(double p) {
  OutageValue v;
  if (p < 0.0) {
    v.probability = 0.0;
    v.clamped = true;
  } else if (p > 1.0) {
    v.probability = 1.0;
    v.clamped = true;
  } else {
    v.probability = p;
  }
  return v;
}

}  // namespace

OutageValue outage_closed_form(const OutageQuery& query) {
  validate_query(query);
  const GammaApprox g = gamma_approx_params(query.kbar);
  const double delta = std::exp2(query.target_rate) - 1.0;
  const double p = std::pow(delta, g.shape) /
                   (std::pow(g.scale, g.shape) * gamma_fn(g.shape + 1.0)) *
                   std::pow(query.snr, -g.shape);
  return clamp01(p);
}

OutageValue outage_unit_phase(const OutageQuery& query) {
  validate_query(query);
  const double delta = std::exp2(query.target_rate) - 1.0;
  const double p = delta / ((static_cast<double>(query.kbar) + 1.0) * query.snr);
  return clamp01(p);
}

OutageEstimate outage_monte_carlo(const OutageQuery& query, std::size_t groups,
                                  std::size_t trials, RngStream& rng) {
  validate_query(query);
  if (trials == 0) throw std::invalid_argument("outage_monte_carlo: need at least one trial");
  if (query.kbar > groups)
    throw std::invalid_argument("outage_monte_carlo: ON count cannot exceed the group count");
  const double threshold = (std::exp2(query.target_rate) - 1.0) / query.snr;
  const std::size_t terms = query.kbar + 1;

  std::size_t hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    double power;
    if (query.phase_mode == PhaseMode::kOptimal) {
      double magsum = 0.0;
      for (std::size_t i = 0; i < terms; ++i) magsum += std::abs(rng.cnormal());
      power = magsum * magsum;
    } else {
      cplx sum(0.0, 0.0);
      for (std::size_t i = 0; i < terms; ++i) sum += rng.cnormal();
      power = std::norm(sum);
    }
    if (power < threshold) ++hits;
  }
  OutageEstimate est;
  est.trials = trials;
  est.probability = static_cast<double>(hits) / static_cast<double>(trials);
  est.stderr_value =
      std::sqrt(est.probability * (1.0 - est.probability) / static_cast<double>(trials));
  return est;
}

}  // namespace rispm
