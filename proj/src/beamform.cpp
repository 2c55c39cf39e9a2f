#include "rispm/beamform.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rispm {

namespace {

constexpr double kInstantaneousEps = 1e-6;
constexpr std::size_t kInstantaneousMaxIter = 50;

OnOffStatistics assemble_stats(std::size_t groups, const CMat& second, std::vector<double> mean) {
  OnOffStatistics stats;
  stats.groups = groups;
  stats.second_moment = second;
  stats.mean = std::move(mean);
  stats.augmented = CMat(groups + 1, groups + 1);
  for (std::size_t i = 0; i < groups; ++i) {
    for (std::size_t j = 0; j < groups; ++j) stats.augmented(i, j) = second(i, j);
    stats.augmented(i, groups) = stats.mean[i];
    stats.augmented(groups, i) = stats.mean[i];
  }
  stats.augmented(groups, groups) = 1.0;
  return stats;
}

// [Phi H; h_d^H] w as a length-(G+1) vector.
std::vector<cplx> stacked_apply(const std::vector<cplx>& phases, const CMat& cascaded,
                                const std::vector<cplx>& ap_user, const std::vector<cplx>& w) {
  const std::size_t g = cascaded.rows();
  std::vector<cplx> out(g + 1);
  const std::vector<cplx> hw = cascaded * w;
  for (std::size_t i = 0; i < g; ++i) out[i] = phases[i] * hw[i];
  out[g] = dot_conj(ap_user, w);
  return out;
}

}  // namespace

OnOffStatistics onoff_stats_rpm(std::size_t groups, std::size_t kbar) {
  if (groups == 0) throw std::invalid_argument("onoff_stats_rpm: group count must be positive");
  if (kbar > groups)
    throw std::invalid_argument("onoff_stats_rpm: ON count cannot exceed the group count");
  const double g = static_cast<double>(groups);
  const double k = static_cast<double>(kbar);
  const double diag = k / g;
  const double off = groups > 1 ? k * (k - 1.0) / (g * (g - 1.0)) : diag;
  CMat second(groups, groups);
  for (std::size_t i = 0; i < groups; ++i)
    for (std::size_t j = 0; j < groups; ++j) second(i, j) = (i == j) ? diag : off;
  return assemble_stats(groups, second, std::vector<double>(groups, diag));
}

OnOffStatistics onoff_stats_pbit(std::size_t groups) {
  if (groups == 0) throw std::invalid_argument("onoff_stats_pbit: group count must be positive");
  CMat second(groups, groups);
  for (std::size_t i = 0; i < groups; ++i)
    for (std::size_t j = 0; j < groups; ++j) second(i, j) = (i == j) ? 0.5 : 0.25;
  return assemble_stats(groups, second, std::vector<double>(groups, 0.5));
}

std::vector<cplx> apply_onoff(const std::vector<cplx>& phases,
                              const std::vector<std::size_t>& iset) {
  std::vector<cplx> theta(phases.size(), cplx(0.0, 0.0));
  for (std::size_t g : iset) {
    if (g >= phases.size()) throw std::invalid_argument("apply_onoff: group index out of range");
    theta[g] = phases[g];
  }
  return theta;
}

ReflectionState make_reflection_state(const std::vector<cplx>& phases,
                                      std::vector<std::size_t> iset) {
  std::sort(iset.begin(), iset.end());
  ReflectionState state;
  state.on.assign(phases.size(), 0);
  state.phases = phases;
  state.theta = apply_onoff(phases, iset);
  for (std::size_t g : iset) state.on[g] = 1;
  state.iset = std::move(iset);
  return state;
}

PhaseSubproblem make_phase_subproblem(const CMat& cascaded_hat,
                                      const std::vector<cplx>& ap_user_hat,
                                      const std::vector<cplx>& w) {
  PhaseSubproblem sub;
  sub.lambda = cascaded_hat * w;
  sub.g_d = dot_conj(ap_user_hat, w);
  return sub;
}

CMat phase_cost_matrix(const PhaseSubproblem& sub, const OnOffStatistics& stats) {
  const std::size_t g = sub.lambda.size();
  if (stats.groups != g)
    throw std::invalid_argument("phase_cost_matrix: statistics dimension mismatch");
  CMat xi(g + 1, g + 1);
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t j = 0; j < g; ++j)
      xi(i, j) = std::conj(sub.lambda[i]) * stats.second_moment(i, j) * sub.lambda[j];
    xi(i, g) = sub.g_d * std::conj(sub.lambda[i]) * stats.mean[i];
    xi(g, i) = std::conj(xi(i, g));
  }
  xi(g, g) = 0.0;
  return xi;
}

double avg_power_objective(const std::vector<cplx>& w, const std::vector<cplx>& phases,
                           const CMat& cascaded_hat, const std::vector<cplx>& ap_user_hat,
                           const OnOffStatistics& stats) {
  const std::size_t g = cascaded_hat.rows();
  if (phases.size() != g || stats.groups != g || ap_user_hat.size() != cascaded_hat.cols() ||
      w.size() != cascaded_hat.cols())
    throw std::invalid_argument("avg_power_objective: dimension mismatch");
  const std::vector<cplx> m = stacked_apply(phases, cascaded_hat, ap_user_hat, w);
  return dot_conj(m, stats.augmented * m).real();
}

BeamformerStep solve_w_given_phi(const std::vector<cplx>& phases, const CMat& cascaded_hat,
                                 const std::vector<cplx>& ap_user_hat,
                                 const OnOffStatistics& stats) {
  const std::size_t g = cascaded_hat.rows();
  const std::size_t n = cascaded_hat.cols();
  if (phases.size() != g || stats.groups != g || ap_user_hat.size() != n)
    throw std::invalid_argument("solve_w_given_phi: dimension mismatch");
  // B = [Phi H; h_d^H], quadratic-form matrix R = B^H Atilde B.
  CMat b(g + 1, n);
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t j = 0; j < n; ++j) b(i, j) = phases[i] * cascaded_hat(i, j);
  for (std::size_t j = 0; j < n; ++j) b(g, j) = std::conj(ap_user_hat[j]);
  const CMat r = (b.adjoint() * (stats.augmented * b)).hermitized();
  auto [lambda, v] = hermitian_eig_max(r);
  BeamformerStep step;
  step.w = v;
  step.objective = lambda;
  return step;
}

namespace {

// (P1.2)-style objective of a phase vector against a homogenized cost.
double phase_objective(const CMat& xi, const std::vector<cplx>& phases) {
  std::vector<cplx> augmented = phases;
  augmented.push_back(cplx(1.0, 0.0));
  return dot_conj(augmented, xi * augmented).real();
}

}  // namespace

std::vector<cplx> solve_phi_given_w(const std::vector<cplx>& w, const CMat& cascaded_hat,
                                    const std::vector<cplx>& ap_user_hat,
                                    const OnOffStatistics& stats, RngStream& rng,
                                    std::size_t randomization_samples,
                                    const std::vector<cplx>* previous) {
  const PhaseSubproblem sub = make_phase_subproblem(cascaded_hat, ap_user_hat, w);
  const CMat xi = phase_cost_matrix(sub, stats);

  std::vector<cplx> candidate;
  if (xi.max_abs() == 0.0) {
    // Degenerate subproblem: any unit-modulus phases are optimal.
    candidate.assign(stats.groups, cplx(1.0, 0.0));
  } else {
    const SdrProblem problem{xi};
    const SdrSolution sol = solve_unit_diag_sdp(problem);
    const std::vector<cplx> lifted = gaussian_randomize(sol, problem, randomization_samples, rng);
    candidate = extract_phases(lifted);
  }

  if (previous != nullptr && previous->size() == candidate.size()) {
    // Keep the better of old and new so the outer alternation stays monotone
    // under the randomized extraction.
    if (phase_objective(xi, *previous) > phase_objective(xi, candidate)) return *previous;
  }
  return candidate;
}

BeamformSolution alternating_optimize_statistical(const CMat& cascaded_hat,
                                                  const std::vector<cplx>& ap_user_hat,
                                                  const OnOffStatistics& stats, double eps,
                                                  std::size_t max_iterations, RngStream& rng,
                                                  std::size_t randomization_samples) {
  if (!(eps > 0.0))
    throw std::invalid_argument("alternating_optimize_statistical: eps must be positive");
  if (max_iterations == 0)
    throw std::invalid_argument("alternating_optimize_statistical: need at least one iteration");

  BeamformSolution sol;
  sol.phases.assign(cascaded_hat.rows(), cplx(1.0, 0.0));

  for (std::size_t iter = 1; iter <= max_iterations; ++iter) {
    const BeamformerStep step =
        solve_w_given_phi(sol.phases, cascaded_hat, ap_user_hat, stats);
    const std::vector<cplx> new_phases =
        solve_phi_given_w(step.w, cascaded_hat, ap_user_hat, stats, rng, randomization_samples,
                          &sol.phases);
    const double objective =
        avg_power_objective(step.w, new_phases, cascaded_hat, ap_user_hat, stats);

    sol.w = step.w;
    sol.phases = new_phases;
    sol.iterations = iter;

    const double reference = sol.objective_trace.empty() ? step.objective
                                                         : sol.objective_trace.back();
    sol.objective_trace.push_back(objective);
    const double increase = objective - reference;
    if (increase <= eps * std::max(reference, 1e-300)) {
      sol.converged = true;
      break;
    }
  }
  return sol;
}

InstantaneousSolution alternating_optimize_instantaneous(const CMat& cascaded_on_rows,
                                                         const std::vector<cplx>& ap_user_hat,
                                                         double eps,
                                                         std::size_t max_iterations) {
  if (!(eps > 0.0))
    throw std::invalid_argument("alternating_optimize_instantaneous: eps must be positive");
  const std::size_t kbar = cascaded_on_rows.rows();
  const std::size_t n = ap_user_hat.size();
  if (kbar > 0 && cascaded_on_rows.cols() != n)
    throw std::invalid_argument("alternating_optimize_instantaneous: dimension mismatch");

  InstantaneousSolution sol;
  const double hd_norm = vec_norm(ap_user_hat);

  if (kbar == 0) {
    // Direct link only: maximum-ratio transmission.
    sol.w.assign(n, cplx(0.0, 0.0));
    if (hd_norm > 0.0) {
      sol.w = vec_scaled(ap_user_hat, 1.0 / hd_norm);
      sol.objective = hd_norm * hd_norm;
    } else {
      sol.w[0] = 1.0;
    }
    sol.iterations = 1;
    sol.converged = true;
    return sol;
  }

  // Start from the direct-link beamformer, or the dominant direction of the
  // reflected channel when there is no direct link.
  if (hd_norm > 0.0) {
    sol.w = vec_scaled(ap_user_hat, 1.0 / hd_norm);
  } else {
    auto [lambda, v] =
        hermitian_eig_max((cascaded_on_rows.adjoint() * cascaded_on_rows).hermitized());
    (void)lambda;
    sol.w = v;
  }

  sol.theta_on.assign(kbar, cplx(1.0, 0.0));
  double prev_objective = -1.0;
  for (std::size_t iter = 1; iter <= max_iterations; ++iter) {
    // Co-phase every ON group with the direct term (reference phase 0 when
    // the direct term vanishes).
    const std::vector<cplx> hw = cascaded_on_rows * sol.w;
    const cplx gd = dot_conj(ap_user_hat, sol.w);
    const double ref = std::abs(gd) > 0.0 ? std::arg(gd) : 0.0;
    for (std::size_t k = 0; k < kbar; ++k) {
      const double align = std::abs(hw[k]) > 0.0 ? std::arg(hw[k]) : 0.0;
      sol.theta_on[k] = std::polar(1.0, ref - align);
    }
    // Maximum-ratio transmission on the combined channel.
    std::vector<cplx> combined(n);  // row theta^T H_I + h_d^H, stored entrywise
    for (std::size_t j = 0; j < n; ++j) {
      cplx acc = std::conj(ap_user_hat[j]);
      for (std::size_t k = 0; k < kbar; ++k) acc += sol.theta_on[k] * cascaded_on_rows(k, j);
      combined[j] = acc;
    }
    const double cnorm = vec_norm(combined);
    if (cnorm == 0.0) {
      sol.objective = 0.0;
      sol.iterations = iter;
      sol.converged = true;
      return sol;
    }
    for (std::size_t j = 0; j < n; ++j) sol.w[j] = std::conj(combined[j]) / cnorm;
    sol.objective = cnorm * cnorm;
    sol.iterations = iter;
    if (prev_objective >= 0.0 &&
        sol.objective - prev_objective <= eps * std::max(prev_objective, 1e-300)) {
      sol.converged = true;
      break;
    }
    prev_objective = sol.objective;
  }
  return sol;
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "rpm_statistical") return Scheme::kRpmStatistical;
  if (name == "rpm_instantaneous") return Scheme::kRpmInstantaneous;
  if (name == "no_it_full_on") return Scheme::kNoItFullOn;
  if (name == "no_ris_mrt") return Scheme::kNoRisMrt;
  if (name == "random_phase") return Scheme::kRandomPhase;
  if (name == "pbit") return Scheme::kPbit;
  throw std::invalid_argument("unknown scheme: " + name);
}

std::string scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::kRpmStatistical: return "rpm_statistical";
    case Scheme::kRpmInstantaneous: return "rpm_instantaneous";
    case Scheme::kNoItFullOn: return "no_it_full_on";
    case Scheme::kNoRisMrt: return "no_ris_mrt";
    case Scheme::kRandomPhase: return "random_phase";
    case Scheme::kPbit: return "pbit";
  }
  throw std::invalid_argument("unknown scheme enum");
}

namespace {

BeamformSolution instantaneous_as_solution(const CMat& cascaded_hat,
                                           const std::vector<cplx>& ap_user_hat,
                                           const std::vector<std::size_t>& iset) {
  const std::size_t n = cascaded_hat.cols();
  CMat rows(iset.size(), n);
  for (std::size_t k = 0; k < iset.size(); ++k) {
    if (iset[k] >= cascaded_hat.rows())
      throw std::invalid_argument("scheme_select: ON-set index out of range");
    for (std::size_t j = 0; j < n; ++j) rows(k, j) = cascaded_hat(iset[k], j);
  }
  const InstantaneousSolution inst =
      alternating_optimize_instantaneous(rows, ap_user_hat, kInstantaneousEps,
                                         kInstantaneousMaxIter);
  BeamformSolution sol;
  sol.w = inst.w;
  sol.phases.assign(cascaded_hat.rows(), cplx(1.0, 0.0));
  for (std::size_t k = 0; k < iset.size(); ++k) sol.phases[iset[k]] = inst.theta_on[k];
  sol.objective_trace.push_back(inst.objective);
  sol.iterations = inst.iterations;
  sol.converged = inst.converged;
  return sol;
}

}  // namespace

BeamformSolution scheme_select(Scheme scheme, const SchemeInput& input, RngStream& rng) {
  if (input.cascaded_hat == nullptr || input.ap_user_hat == nullptr)
    throw std::invalid_argument("scheme_select: missing channel estimates");
  const CMat& cascaded = *input.cascaded_hat;
  const std::vector<cplx>& ap_user = *input.ap_user_hat;
  const std::size_t groups = cascaded.rows();

  switch (scheme) {
    case Scheme::kRpmStatistical: {
      const OnOffStatistics stats = onoff_stats_rpm(groups, input.kbar);
      return alternating_optimize_statistical(cascaded, ap_user, stats, input.eps,
                                              input.max_iterations, rng,
                                              input.randomization_samples);
    }
    case Scheme::kPbit: {
      const OnOffStatistics stats = onoff_stats_pbit(groups);
      return alternating_optimize_statistical(cascaded, ap_user, stats, input.eps,
                                              input.max_iterations, rng,
                                              input.randomization_samples);
    }
    case Scheme::kRandomPhase: {
      const OnOffStatistics stats = onoff_stats_rpm(groups, input.kbar);
      BeamformSolution sol;
      sol.phases.resize(groups);
      for (std::size_t g = 0; g < groups; ++g) sol.phases[g] = std::polar(1.0, rng.phase());
      const BeamformerStep step = solve_w_given_phi(sol.phases, cascaded, ap_user, stats);
      sol.w = step.w;
      sol.objective_trace.push_back(step.objective);
      sol.iterations = 1;
      sol.converged = true;
      return sol;
    }
    case Scheme::kNoRisMrt: {
      BeamformSolution sol;
      sol.phases.assign(groups, cplx(1.0, 0.0));
      const double nrm = vec_norm(ap_user);
      sol.w.assign(ap_user.size(), cplx(0.0, 0.0));
      if (nrm > 0.0)
        sol.w = vec_scaled(ap_user, 1.0 / nrm);
      else
        sol.w[0] = 1.0;
      sol.objective_trace.push_back(nrm * nrm);
      sol.iterations = 1;
      sol.converged = true;
      return sol;
    }
    case Scheme::kNoItFullOn: {
      std::vector<std::size_t> all(groups);
      for (std::size_t g = 0; g < groups; ++g) all[g] = g;
      return instantaneous_as_solution(cascaded, ap_user, all);
    }
    case Scheme::kRpmInstantaneous: {
      if (!input.iset.has_value())
        throw std::invalid_argument("scheme_select: instantaneous design needs an ON set");
      return instantaneous_as_solution(cascaded, ap_user, *input.iset);
    }
  }
  throw std::invalid_argument("scheme_select: unknown scheme");
}

}  // namespace rispm
