#include "rispm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "rispm/beamform.hpp"
#include "rispm/config.hpp"
#include "rispm/outage.hpp"
#include "rispm/pilots.hpp"
#include "rispm/rate.hpp"

namespace rispm {

using nlohmann::json;

FigId fig_from_name(const std::string& name) {
  if (name == "fig2_outage_vs_snr") return FigId::kFig2;
  if (name == "fig3_power_vs_dy") return FigId::kFig3;
  if (name == "fig4_outage_vs_pt") return FigId::kFig4;
  if (name == "fig5_rate_vs_dy") return FigId::kFig5;
  if (name == "fig6_rate_vs_kbar") return FigId::kFig6;
  if (name == "fig7_rate_vs_grouping") return FigId::kFig7;
  throw std::invalid_argument("unknown experiment name: " + name);
}

std::string fig_name(FigId fig) {
  switch (fig) {
    case FigId::kFig2: return "fig2_outage_vs_snr";
    case FigId::kFig3: return "fig3_power_vs_dy";
    case FigId::kFig4: return "fig4_outage_vs_pt";
    case FigId::kFig5: return "fig5_rate_vs_dy";
    case FigId::kFig6: return "fig6_rate_vs_kbar";
    case FigId::kFig7: return "fig7_rate_vs_grouping";
  }
  throw std::invalid_argument("unknown figure id");
}

void ExperimentSpec::validate() const {
  fig_from_name(name);
  scenario.validate();
  if (sweep_values.empty()) throw std::invalid_argument("sweep.values must not be empty");
  for (double v : sweep_values)
    if (!std::isfinite(v)) throw std::invalid_argument("sweep.values must be finite");
  if (!std::is_sorted(sweep_values.begin(), sweep_values.end()))
    throw std::invalid_argument("sweep.values must be sorted ascending");
  if (schemes.empty()) throw std::invalid_argument("experiment.schemes must not be empty");
  if (trials == 0) throw std::invalid_argument("experiment.trials must be positive");
  if (noise_samples == 0)
    throw std::invalid_argument("experiment.noise_samples must be positive");
  if (workers == 0) throw std::invalid_argument("experiment.workers must be positive");
  if (csi != "perfect" && csi != "estimated")
    throw std::invalid_argument("experiment.csi must be \"perfect\" or \"estimated\"");
  if (randomization_samples == 0)
    throw std::invalid_argument("experiment.randomization_samples must be positive");
  if (!(target_rate > 0.0))
    throw std::invalid_argument("experiment.target_rate must be positive");
  const FigId f = fig();
  if (f == FigId::kFig2 && kbars.empty())
    throw std::invalid_argument("experiment.kbars must not be empty for the outage-vs-SNR run");
  if (f == FigId::kFig6 && pt_series_dbm.empty())
    throw std::invalid_argument("experiment.pt_series_dbm must not be empty");
  if (f == FigId::kFig7) {
    if (groups_list.empty())
      throw std::invalid_argument("experiment.groups_list must not be empty");
    for (std::size_t g : groups_list) {
      ScenarioConfig variant = scenario;
      variant.groups = g;
      variant.kbar = g / 2;
      variant.validate();
    }
  }
}

namespace {

std::vector<double> linspace_step(double first, double last, double step) {
  std::vector<double> out;
  for (double v = first; v <= last + 1e-9; v += step) out.push_back(v);
  return out;
}

}  // namespace

ExperimentSpec default_spec(FigId fig, bool full) {
  ExperimentSpec spec;
  spec.name = fig_name(fig);
  switch (fig) {
    case FigId::kFig2:
      spec.sweep_param = "snr_db";
      spec.sweep_values = linspace_step(10.0, 30.0, 2.5);
      spec.kbars = {0, 1, 2, 3, 4};
      spec.schemes = {"outage_mc", "outage_approx"};
      spec.trials = full ? 1000000 : 100000;
      spec.csi = "perfect";
      break;
    case FigId::kFig3:
      spec.sweep_param = "dy";
      spec.sweep_values = linspace_step(20.0, 70.0, 2.5);
      spec.schemes = {"upper_bound", "no_it_full_on", "rpm_k3", "random_phase", "no_ris_mrt"};
      spec.trials = full ? 1000 : 200;
      spec.csi = "perfect";
      break;
    case FigId::kFig4:
      spec.sweep_param = "pt_dbm";
      spec.sweep_values = linspace_step(0.0, 40.0, 5.0);
      spec.schemes = {"rpm_k3", "rpm_k5", "pbit", "no_it_full_on", "no_ris_mrt"};
      spec.scenario.groups = 6;
      spec.scenario.kbar = 3;
      spec.trials = full ? 5000 : 1000;
      break;
    case FigId::kFig5:
      spec.sweep_param = "dy";
      spec.sweep_values = linspace_step(20.0, 70.0, 2.5);
      spec.schemes = {"upper_bound", "rpm_k3", "rpm_k2", "no_it_full_on", "no_ris_mrt", "pbit"};
      spec.trials = full ? 1000 : 300;
      spec.noise_samples = 200;
      break;
    case FigId::kFig6:
      spec.sweep_param = "kbar";
      spec.sweep_values = {1, 2, 3, 4, 5, 6, 7, 8};
      spec.schemes = {"rpm"};
      spec.scenario.groups = 9;
      spec.scenario.kbar = 4;
      spec.pt_series_dbm = {10.0, 30.0};
      spec.trials = full ? 1000 : 100;
      spec.noise_samples = full ? 200 : 50;
      break;
    case FigId::kFig7:
      spec.sweep_param = "pt_dbm";
      spec.sweep_values = linspace_step(-10.0, 40.0, 10.0);
      spec.schemes = {"rpm", "pbit"};
      spec.groups_list = {2, 4, 6};
      spec.trials = full ? 1000 : 200;
      spec.noise_samples = full ? 200 : 100;
      spec.apply_overhead = true;
      break;
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Spec <-> JSON

namespace {

json kappa_to_json(double kappa) {
  if (std::isinf(kappa)) return "inf";
  return kappa;
}

double kappa_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw std::runtime_error("spec json: bad rician factor string");
  }
  return j.get<double>();
}

json scenario_to_json(const ScenarioConfig& s) {
  return json{{"n", s.n_ap},
              {"l", s.ris_l},
              {"g", s.groups},
              {"kbar", s.kbar},
              {"ris_lx", s.ris_lx},
              {"ris_lz", s.ris_lz},
              {"pt_w", s.pt_w},
              {"pp_w", s.pp_w},
              {"sigma2_w", s.noise_w},
              {"d0", s.d0},
              {"dy", s.dy},
              {"dz", s.dz},
              {"wavelength", s.wavelength},
              {"alpha_au", s.alpha_au},
              {"alpha_ar", s.alpha_ar},
              {"alpha_ru", s.alpha_ru},
              {"c0", s.c0},
              {"kappa_au", kappa_to_json(s.kappa_au)},
              {"kappa_ar", kappa_to_json(s.kappa_ar)},
              {"kappa_ru", kappa_to_json(s.kappa_ru)},
              {"tc", s.coherence_symbols},
              {"m", s.constellation_order}};
}

ScenarioConfig scenario_from_json(const json& j) {
  ScenarioConfig s;
  s.n_ap = j.at("n").get<std::size_t>();
  s.ris_l = j.at("l").get<std::size_t>();
  s.groups = j.at("g").get<std::size_t>();
  s.kbar = j.at("kbar").get<std::size_t>();
  s.ris_lx = j.at("ris_lx").get<std::size_t>();
  s.ris_lz = j.at("ris_lz").get<std::size_t>();
  s.pt_w = j.at("pt_w").get<double>();
  s.pp_w = j.at("pp_w").get<double>();
  s.noise_w = j.at("sigma2_w").get<double>();
  s.d0 = j.at("d0").get<double>();
  s.dy = j.at("dy").get<double>();
  s.dz = j.at("dz").get<double>();
  s.wavelength = j.at("wavelength").get<double>();
  s.alpha_au = j.at("alpha_au").get<double>();
  s.alpha_ar = j.at("alpha_ar").get<double>();
  s.alpha_ru = j.at("alpha_ru").get<double>();
  s.c0 = j.at("c0").get<double>();
  s.kappa_au = kappa_from_json(j.at("kappa_au"));
  s.kappa_ar = kappa_from_json(j.at("kappa_ar"));
  s.kappa_ru = kappa_from_json(j.at("kappa_ru"));
  s.coherence_symbols = j.at("tc").get<std::size_t>();
  s.constellation_order = j.at("m").get<std::size_t>();
  return s;
}

json spec_to_json(const ExperimentSpec& spec) {
  return json{{"name", spec.name},
              {"scenario", scenario_to_json(spec.scenario)},
              {"sweep", json{{"param", spec.sweep_param}, {"values", spec.sweep_values}}},
              {"schemes", spec.schemes},
              {"trials", spec.trials},
              {"noise_samples", spec.noise_samples},
              {"seed", spec.seed},
              {"workers", spec.workers},
              {"csi", spec.csi},
              {"randomization_samples", spec.randomization_samples},
              {"target_rate", spec.target_rate},
              {"kbars", spec.kbars},
              {"pt_series_dbm", spec.pt_series_dbm},
              {"groups_list", spec.groups_list},
              {"apply_overhead", spec.apply_overhead}};
}

ExperimentSpec spec_from_json(const json& j) {
  ExperimentSpec spec;
  spec.name = j.at("name").get<std::string>();
  spec.scenario = scenario_from_json(j.at("scenario"));
  spec.sweep_param = j.at("sweep").at("param").get<std::string>();
  spec.sweep_values = j.at("sweep").at("values").get<std::vector<double>>();
  spec.schemes = j.at("schemes").get<std::vector<std::string>>();
  spec.trials = j.at("trials").get<std::size_t>();
  spec.noise_samples = j.at("noise_samples").get<std::size_t>();
  spec.seed = j.at("seed").get<std::uint64_t>();
  spec.workers = j.at("workers").get<std::size_t>();
  spec.csi = j.at("csi").get<std::string>();
  spec.randomization_samples = j.at("randomization_samples").get<std::size_t>();
  spec.target_rate = j.at("target_rate").get<double>();
  spec.kbars = j.at("kbars").get<std::vector<std::size_t>>();
  spec.pt_series_dbm = j.at("pt_series_dbm").get<std::vector<double>>();
  spec.groups_list = j.at("groups_list").get<std::vector<std::size_t>>();
  spec.apply_overhead = j.at("apply_overhead").get<bool>();
  spec.validate();
  return spec;
}

}  // namespace

std::string spec_to_json_text(const ExperimentSpec& spec) { return spec_to_json(spec).dump(2); }

ExperimentSpec spec_from_json_text(const std::string& text) {
  json j = json::parse(text);
  if (j.contains("experiment")) j = j.at("experiment");  // accept a summary echo
  return spec_from_json(j);
}

ExperimentSpec load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return spec_from_json_text(text);

  ParsedConfig cfg = ParsedConfig::parse_text(text, path);
  const std::string name = cfg.text("experiment.name", "fig3_power_vs_dy");
  ExperimentSpec spec = default_spec(fig_from_name(name));
  spec.name = name;

  spec.trials = static_cast<std::size_t>(cfg.number("experiment.trials",
                                                    static_cast<double>(spec.trials)));
  spec.noise_samples = static_cast<std::size_t>(
      cfg.number("experiment.noise_samples", static_cast<double>(spec.noise_samples)));
  spec.seed = static_cast<std::uint64_t>(cfg.number("experiment.seed",
                                                    static_cast<double>(spec.seed)));
  spec.workers = static_cast<std::size_t>(cfg.number("experiment.workers",
                                                     static_cast<double>(spec.workers)));
  spec.csi = cfg.text("experiment.csi", spec.csi);
  spec.randomization_samples = static_cast<std::size_t>(cfg.number(
      "experiment.randomization_samples", static_cast<double>(spec.randomization_samples)));
  spec.target_rate = cfg.number("experiment.target_rate", spec.target_rate);
  spec.apply_overhead = cfg.boolean("experiment.apply_overhead", spec.apply_overhead);
  if (cfg.has("experiment.schemes")) spec.schemes = cfg.text_list("experiment.schemes");
  if (cfg.has("experiment.kbars")) {
    spec.kbars.clear();
    for (double v : cfg.number_list("experiment.kbars"))
      spec.kbars.push_back(static_cast<std::size_t>(v));
  }
  if (cfg.has("experiment.pt_series_dbm"))
    spec.pt_series_dbm = cfg.number_list("experiment.pt_series_dbm");
  if (cfg.has("experiment.groups_list")) {
    spec.groups_list.clear();
    for (double v : cfg.number_list("experiment.groups_list"))
      spec.groups_list.push_back(static_cast<std::size_t>(v));
  }

  ScenarioConfig& s = spec.scenario;
  s.n_ap = static_cast<std::size_t>(cfg.number("scenario.n", static_cast<double>(s.n_ap)));
  s.ris_l = static_cast<std::size_t>(cfg.number("scenario.l", static_cast<double>(s.ris_l)));
  s.groups = static_cast<std::size_t>(cfg.number("scenario.g", static_cast<double>(s.groups)));
  s.kbar = static_cast<std::size_t>(cfg.number("scenario.kbar", static_cast<double>(s.kbar)));
  s.ris_lx = static_cast<std::size_t>(cfg.number("scenario.ris_lx",
                                                 static_cast<double>(s.ris_lx)));
  s.ris_lz = static_cast<std::size_t>(cfg.number("scenario.ris_lz",
                                                 static_cast<double>(s.ris_lz)));
  s.pt_w = cfg.power_watts("scenario.pt", s.pt_w);
  s.pp_w = cfg.power_watts("scenario.pp", s.pp_w);
  s.noise_w = cfg.power_watts("scenario.sigma2", s.noise_w);
  s.d0 = cfg.number("scenario.d0", s.d0);
  s.dy = cfg.number("scenario.dy", s.dy);
  s.dz = cfg.number("scenario.dz", s.dz);
  s.wavelength = cfg.number("scenario.wavelength", s.wavelength);
  s.alpha_au = cfg.number("scenario.alpha_au", s.alpha_au);
  s.alpha_ar = cfg.number("scenario.alpha_ar", s.alpha_ar);
  s.alpha_ru = cfg.number("scenario.alpha_ru", s.alpha_ru);
  s.c0 = cfg.linear_gain("scenario.c0", s.c0);
  s.kappa_au = cfg.number_or_inf("scenario.kappa_au", s.kappa_au);
  s.kappa_ar = cfg.number_or_inf("scenario.kappa_ar", s.kappa_ar);
  s.kappa_ru = cfg.number_or_inf("scenario.kappa_ru", s.kappa_ru);
  s.coherence_symbols = static_cast<std::size_t>(
      cfg.number("scenario.tc", static_cast<double>(s.coherence_symbols)));
  s.constellation_order = static_cast<std::size_t>(
      cfg.number("scenario.m", static_cast<double>(s.constellation_order)));

  if (cfg.has("sweep.param")) spec.sweep_param = cfg.text("sweep.param", spec.sweep_param);
  if (cfg.has("sweep.values")) spec.sweep_values = cfg.number_list("sweep.values");

  cfg.ensure_all_consumed();
  spec.validate();
  return spec;
}

// ---------------------------------------------------------------------------
// Runners

namespace {

// Stream roles. Channel and pilot slots are group-dependent so the
// grouping-ratio experiment draws independent channels per grouping.
std::uint64_t stream_id(std::size_t sweep_idx, std::size_t trial, std::size_t slot) {
  return (static_cast<std::uint64_t>(sweep_idx) << 40) |
         (static_cast<std::uint64_t>(trial) << 8) | static_cast<std::uint64_t>(slot);
}
std::size_t channel_slot(std::size_t groups) { return 2 * groups; }
std::size_t pilot_slot(std::size_t groups) { return 2 * groups + 1; }
constexpr std::size_t kRateNoiseSlot = 48;  // shared across schemes on purpose

struct SeriesPlan {
  enum class Kind { kRpm, kUpperBound, kNoItFullOn, kNoRisMrt, kRandomPhase, kPbit };
  std::string token;
  Kind kind = Kind::kRpm;
  std::size_t kbar = 0;
};

std::size_t design_slot(const SeriesPlan& plan) {
  return 64 + static_cast<std::size_t>(plan.kind) * 16 + plan.kbar;
}

SeriesPlan parse_series_token(const std::string& token, std::size_t default_kbar) {
  SeriesPlan plan;
  plan.token = token;
  plan.kbar = default_kbar;
  if (token == "rpm" || token == "rpm_statistical") {
    plan.kind = SeriesPlan::Kind::kRpm;
  } else if (token.rfind("rpm_k", 0) == 0) {
    plan.kind = SeriesPlan::Kind::kRpm;
    plan.kbar = static_cast<std::size_t>(std::stoul(token.substr(5)));
  } else if (token == "upper_bound" || token == "rpm_instantaneous") {
    plan.kind = SeriesPlan::Kind::kUpperBound;
  } else if (token == "no_it_full_on") {
    plan.kind = SeriesPlan::Kind::kNoItFullOn;
  } else if (token == "no_ris_mrt") {
    plan.kind = SeriesPlan::Kind::kNoRisMrt;
  } else if (token == "random_phase") {
    plan.kind = SeriesPlan::Kind::kRandomPhase;
  } else if (token == "pbit") {
    plan.kind = SeriesPlan::Kind::kPbit;
  } else {
    throw std::invalid_argument("unknown scheme token: " + token);
  }
  return plan;
}

void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t wi = 0; wi < workers; ++wi) {
    pool.emplace_back([&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(count);
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct TrialChannels {
  ChannelSet set;
  CMat est_cascaded;
  std::vector<cplx> est_ap_user;
};

TrialChannels make_trial_channels(const ScenarioConfig& scenario, std::uint64_t seed,
                                  std::size_t sweep_idx, std::size_t trial, bool estimated) {
  TrialChannels tc;
  RngStream chan_rng = substream(seed, stream_id(sweep_idx, trial,
                                                 channel_slot(scenario.groups)));
  tc.set = sample_channels(scenario, chan_rng);
  if (estimated) {
    RngStream pilot_rng =
        substream(seed, stream_id(sweep_idx, trial, pilot_slot(scenario.groups)));
    const PilotBlock block = run_pilot_phase(tc.set, scenario, pilot_rng);
    const ChannelEstimate est = estimate_channels(block, scenario.pp_w);
    tc.est_cascaded = est.cascaded_hat;
    tc.est_ap_user = est.ap_user_hat;
  } else {
    tc.est_cascaded = tc.set.cascaded;
    tc.est_ap_user = tc.set.ap_user;
  }
  return tc;
}

double true_power(const ChannelSet& set, const std::vector<cplx>& theta,
                  const std::vector<cplx>& w) {
  const std::vector<cplx> hw = set.cascaded * w;
  cplx acc = dot_conj(set.ap_user, w);
  for (std::size_t g = 0; g < theta.size(); ++g) acc += theta[g] * hw[g];
  return std::norm(acc);
}

BeamformSolution design_scheme(const SeriesPlan& plan, const ScenarioConfig& scenario,
                               const TrialChannels& tc, const ExperimentSpec& spec,
                               RngStream& rng) {
  SchemeInput input;
  input.cascaded_hat = &tc.est_cascaded;
  input.ap_user_hat = &tc.est_ap_user;
  input.kbar = plan.kbar;
  input.randomization_samples = spec.randomization_samples;
  (void)scenario;
  switch (plan.kind) {
    case SeriesPlan::Kind::kRpm:
      return scheme_select(Scheme::kRpmStatistical, input, rng);
    case SeriesPlan::Kind::kPbit:
      return scheme_select(Scheme::kPbit, input, rng);
    case SeriesPlan::Kind::kRandomPhase:
      return scheme_select(Scheme::kRandomPhase, input, rng);
    case SeriesPlan::Kind::kNoRisMrt:
      return scheme_select(Scheme::kNoRisMrt, input, rng);
    case SeriesPlan::Kind::kNoItFullOn:
      return scheme_select(Scheme::kNoItFullOn, input, rng);
    case SeriesPlan::Kind::kUpperBound:
      throw std::logic_error("upper bound is handled per metric");
  }
  throw std::logic_error("unreachable");
}

// Uniformly drawn ON set of size kbar.
std::vector<std::size_t> draw_onoff(const ComboIndex& combos, RngStream& rng) {
  const std::size_t j = std::min<std::size_t>(
      combos.count() - 1, static_cast<std::size_t>(rng.uniform01() *
                                                   static_cast<double>(combos.count())));
  return combos.sets[j];
}

std::vector<std::size_t> draw_coinflip_set(std::size_t groups, RngStream& rng) {
  std::vector<std::size_t> set;
  for (std::size_t g = 0; g < groups; ++g)
    if (rng.uniform01() < 0.5) set.push_back(g);
  return set;
}

struct SeriesAccumulator {
  std::vector<std::vector<double>> per_trial;  // [series][trial]
};

Series reduce_mean(const std::string& name, const std::vector<double>& values) {
  Series s;
  s.name = name;
  double sum = 0.0, sq = 0.0;
  for (double v : values) {
    sum += v;
    sq += v * v;
  }
  const double n = static_cast<double>(values.size());
  const double mean = sum / n;
  const double var = std::max(0.0, sq / n - mean * mean);
  s.mean.push_back(mean);
  s.stderr_value.push_back(std::sqrt(var / n));
  return s;
}

Series reduce_binary(const std::string& name, const std::vector<double>& values) {
  Series s;
  s.name = name;
  double sum = 0.0;
  for (double v : values) sum += v;
  const double n = static_cast<double>(values.size());
  const double p = sum / n;
  s.mean.push_back(p);
  s.stderr_value.push_back(std::sqrt(p * (1.0 - p) / n));
  return s;
}

ScenarioConfig scenario_at(const ExperimentSpec& spec, double sweep_value) {
  ScenarioConfig s = spec.scenario;
  if (spec.sweep_param == "dy") {
    s.dy = sweep_value;
  } else if (spec.sweep_param == "pt_dbm") {
    s.pt_w = dbm_to_watts(sweep_value);
  } else if (spec.sweep_param == "kbar") {
    s.kbar = static_cast<std::size_t>(sweep_value);
  } else if (spec.sweep_param == "snr_db") {
    ;  // handled by the outage runner directly
  } else {
    throw std::invalid_argument("unknown sweep parameter: " + spec.sweep_param);
  }
  return s;
}

void append_series_point(std::vector<Series>& all, const Series& point) {
  for (Series& s : all) {
    if (s.name == point.name) {
      s.mean.push_back(point.mean.front());
      s.stderr_value.push_back(point.stderr_value.front());
      return;
    }
  }
  all.push_back(point);
}

// --- fig2: analytic outage curves ------------------------------------------

ResultTable run_fig2(const ExperimentSpec& spec) {
  ResultTable table;
  table.sweep_param = spec.sweep_param;
  table.sweep_values = spec.sweep_values;
  table.spec = spec;

  const bool want_mc =
      std::count(spec.schemes.begin(), spec.schemes.end(), "outage_mc") > 0;
  const bool want_approx =
      std::count(spec.schemes.begin(), spec.schemes.end(), "outage_approx") > 0;
  const bool want_unit =
      std::count(spec.schemes.begin(), spec.schemes.end(), "outage_unit") > 0;

  struct Point {
    double mc = 0.0, mc_stderr = 0.0, approx = 0.0, unit = 0.0;
  };
  std::vector<Point> points(spec.sweep_values.size() * spec.kbars.size());

  parallel_for(points.size(), spec.workers, [&](std::size_t idx) {
    const std::size_t v = idx / spec.kbars.size();
    const std::size_t ki = idx % spec.kbars.size();
    const double snr = db_to_linear(spec.sweep_values[v]);
    OutageQuery q{spec.kbars[ki], spec.target_rate, snr, PhaseMode::kOptimal};
    Point& p = points[idx];
    if (want_mc) {
      RngStream rng = substream(spec.seed, stream_id(v, ki, 0));
      const OutageEstimate est = outage_monte_carlo(q, spec.scenario.groups, spec.trials, rng);
      p.mc = est.probability;
      p.mc_stderr = est.stderr_value;
    }
    if (want_approx) p.approx = outage_closed_form(q).probability;
    if (want_unit) {
      q.phase_mode = PhaseMode::kUnit;
      p.unit = outage_unit_phase(q).probability;
    }
  });

  for (std::size_t ki = 0; ki < spec.kbars.size(); ++ki) {
    const std::string suffix = "_k" + std::to_string(spec.kbars[ki]);
    for (std::size_t v = 0; v < spec.sweep_values.size(); ++v) {
      const Point& p = points[v * spec.kbars.size() + ki];
      if (want_mc) {
        Series s;
        s.name = "outage_mc" + suffix;
        s.mean.push_back(p.mc);
        s.stderr_value.push_back(p.mc_stderr);
        append_series_point(table.series, s);
      }
      if (want_approx) {
        Series s;
        s.name = "outage_approx" + suffix;
        s.mean.push_back(p.approx);
        s.stderr_value.push_back(0.0);
        append_series_point(table.series, s);
      }
      if (want_unit) {
        Series s;
        s.name = "outage_unit" + suffix;
        s.mean.push_back(p.unit);
        s.stderr_value.push_back(0.0);
        append_series_point(table.series, s);
      }
    }
  }
  return table;
}

// --- fig3: average received power ------------------------------------------

ResultTable run_fig3(const ExperimentSpec& spec) {
  ResultTable table;
  table.sweep_param = spec.sweep_param;
  table.sweep_values = spec.sweep_values;
  table.spec = spec;

  std::vector<SeriesPlan> plans;
  for (const std::string& token : spec.schemes)
    plans.push_back(parse_series_token(token, spec.scenario.kbar));
  const bool estimated = spec.csi == "estimated";

  for (std::size_t v = 0; v < spec.sweep_values.size(); ++v) {
    const ScenarioConfig scenario = scenario_at(spec, spec.sweep_values[v]);
    std::vector<std::vector<double>> values(plans.size(),
                                            std::vector<double>(spec.trials, 0.0));
    parallel_for(spec.trials, spec.workers, [&](std::size_t t) {
      try {
        const TrialChannels tc = make_trial_channels(scenario, spec.seed, v, t, estimated);
        for (std::size_t pi = 0; pi < plans.size(); ++pi) {
          const SeriesPlan& plan = plans[pi];
          RngStream rng = substream(spec.seed, stream_id(v, t, design_slot(plan)));
          double power = 0.0;
          switch (plan.kind) {
            case SeriesPlan::Kind::kRpm:
            case SeriesPlan::Kind::kRandomPhase: {
              const BeamformSolution sol = design_scheme(plan, scenario, tc, spec, rng);
              power = avg_power_objective(sol.w, sol.phases, tc.set.cascaded, tc.set.ap_user,
                                          onoff_stats_rpm(scenario.groups, plan.kbar));
              break;
            }
            case SeriesPlan::Kind::kPbit: {
              const BeamformSolution sol = design_scheme(plan, scenario, tc, spec, rng);
              power = avg_power_objective(sol.w, sol.phases, tc.set.cascaded, tc.set.ap_user,
                                          onoff_stats_pbit(scenario.groups));
              break;
            }
            case SeriesPlan::Kind::kNoRisMrt: {
              const BeamformSolution sol = design_scheme(plan, scenario, tc, spec, rng);
              power = std::norm(dot_conj(tc.set.ap_user, sol.w));
              break;
            }
            case SeriesPlan::Kind::kNoItFullOn: {
              const BeamformSolution sol = design_scheme(plan, scenario, tc, spec, rng);
              power = true_power(tc.set, sol.phases, sol.w);
              break;
            }
            case SeriesPlan::Kind::kUpperBound: {
              // Exact average over the equiprobable ON sets.
              const ComboIndex combos = combo_index_set(scenario.groups, plan.kbar);
              SchemeInput input;
              input.cascaded_hat = &tc.est_cascaded;
              input.ap_user_hat = &tc.est_ap_user;
              input.kbar = plan.kbar;
              for (const auto& iset : combos.sets) {
                input.iset = iset;
                const BeamformSolution sol =
                    scheme_select(Scheme::kRpmInstantaneous, input, rng);
                power += true_power(tc.set, apply_onoff(sol.phases, iset), sol.w) /
                         static_cast<double>(combos.count());
              }
              break;
            }
          }
          values[pi][t] = scenario.pt_w * power;
        }
      } catch (const std::exception& err) {
        throw std::runtime_error("trial " + std::to_string(t) + ": " + err.what());
      }
    });
    for (std::size_t pi = 0; pi < plans.size(); ++pi)
      append_series_point(table.series, reduce_mean("power_" + plans[pi].token, values[pi]));
  }
  return table;
}

// --- fig4: outage probability vs transmit power -----------------------------

ResultTable run_fig4(const ExperimentSpec& spec) {
  ResultTable table;
  table.sweep_param = spec.sweep_param;
  table.sweep_values = spec.sweep_values;
  table.spec = spec;

  std::vector<SeriesPlan> plans;
  for (const std::string& token : spec.schemes)
    plans.push_back(parse_series_token(token, spec.scenario.kbar));
  const bool estimated = spec.csi == "estimated";

  for (std::size_t v = 0; v < spec.sweep_values.size(); ++v) {
    const ScenarioConfig scenario = scenario_at(spec, spec.sweep_values[v]);
    const double threshold = (std::exp2(spec.target_rate) - 1.0) * scenario.noise_w;
    std::vector<std::vector<double>> outage(plans.size(),
                                            std::vector<double>(spec.trials, 0.0));
    parallel_for(spec.trials, spec.workers, [&](std::size_t t) {
      try {
        const TrialChannels tc = make_trial_channels(scenario, spec.seed, v, t, estimated);
        for (std::size_t pi = 0; pi < plans.size(); ++pi) {
          const SeriesPlan& plan = plans[pi];
          RngStream rng = substream(spec.seed, stream_id(v, t, design_slot(plan)));
          double power = 0.0;
          switch (plan.kind) {
            case SeriesPlan::Kind::kRpm:
            case SeriesPlan::Kind::kRandomPhase: {
              const BeamformSolution sol = design_scheme(plan, scenario, tc, spec, rng);
              const ComboIndex combos = combo_index_set(scenario.groups, plan.kbar);
              const ReflectionState state =
                  make_reflection_state(sol.phases, draw_onoff(combos, rng));
              power = true_power(tc.set, state.theta, sol.w);
              break;
            }
            case SeriesPlan::Kind::kPbit: {
              const BeamformSolution sol = design_scheme(plan, scenario, tc, spec, rng);
              const ReflectionState state =
                  make_reflection_state(sol.phases, draw_coinflip_set(scenario.groups, rng));
              power = true_power(tc.set, state.theta, sol.w);
              break;
            }
            case SeriesPlan::Kind::kNoRisMrt: {
              const BeamformSolution sol = design_scheme(plan, scenario, tc, spec, rng);
              power = std::norm(dot_conj(tc.set.ap_user, sol.w));
              break;
            }
            case SeriesPlan::Kind::kNoItFullOn: {
              const BeamformSolution sol = design_scheme(plan, scenario, tc, spec, rng);
              power = true_power(tc.set, sol.phases, sol.w);
              break;
            }
            case SeriesPlan::Kind::kUpperBound: {
              const ComboIndex combos = combo_index_set(scenario.groups, plan.kbar);
              const auto iset = draw_onoff(combos, rng);
              SchemeInput input;
              input.cascaded_hat = &tc.est_cascaded;
              input.ap_user_hat = &tc.est_ap_user;
              input.kbar = plan.kbar;
              input.iset = iset;
              const BeamformSolution sol =
                  scheme_select(Scheme::kRpmInstantaneous, input, rng);
              power = true_power(tc.set, apply_onoff(sol.phases, iset), sol.w);
              break;
            }
          }
          outage[pi][t] = (scenario.pt_w * power < threshold) ? 1.0 : 0.0;
        }
      } catch (const std::exception& err) {
        throw std::runtime_error("trial " + std::to_string(t) + ": " + err.what());
      }
    });
    for (std::size_t pi = 0; pi < plans.size(); ++pi)
      append_series_point(table.series, reduce_binary("outage_" + plans[pi].token, outage[pi]));
  }
  return table;
}

// --- fig5/6/7: achievable rate ----------------------------------------------

double series_rate(const SeriesPlan& plan, const ScenarioConfig& scenario,
                   const TrialChannels& tc, const ExperimentSpec& spec, double pt_w,
                   RngStream& design_rng, RngStream noise_rng) {
  const Constellation constellation = psk(scenario.constellation_order);
  switch (plan.kind) {
    case SeriesPlan::Kind::kRpm:
    case SeriesPlan::Kind::kRandomPhase:
    case SeriesPlan::Kind::kPbit: {
      const BeamformSolution sol = design_scheme(plan, scenario, tc, spec, design_rng);
      const EffectiveChannels eff =
          effective_channels(sol.phases, tc.set.cascaded, tc.set.ap_user, sol.w);
      const auto combos = plan.kind == SeriesPlan::Kind::kPbit
                              ? all_onoff_subsets(scenario.groups)
                              : combo_index_set(scenario.groups, plan.kbar).sets;
      return rate_practical(eff, combos, constellation, pt_w, scenario.noise_w,
                            spec.noise_samples, noise_rng)
          .bits;
    }
    case SeriesPlan::Kind::kNoItFullOn: {
      const BeamformSolution sol = design_scheme(plan, scenario, tc, spec, design_rng);
      const EffectiveChannels eff =
          effective_channels(sol.phases, tc.set.cascaded, tc.set.ap_user, sol.w);
      std::vector<std::size_t> all(scenario.groups);
      for (std::size_t g = 0; g < scenario.groups; ++g) all[g] = g;
      return rate_practical(eff, {all}, constellation, pt_w, scenario.noise_w,
                            spec.noise_samples, noise_rng)
          .bits;
    }
    case SeriesPlan::Kind::kNoRisMrt: {
      const BeamformSolution sol = design_scheme(plan, scenario, tc, spec, design_rng);
      const EffectiveChannels eff =
          effective_channels(sol.phases, tc.set.cascaded, tc.set.ap_user, sol.w);
      return rate_practical(eff, {{}}, constellation, pt_w, scenario.noise_w,
                            spec.noise_samples, noise_rng)
          .bits;
    }
    case SeriesPlan::Kind::kUpperBound: {
      const auto combos = combo_index_set(scenario.groups, plan.kbar).sets;
      return rate_upper_bound(tc.set, combos, constellation, pt_w, scenario.noise_w,
                              spec.noise_samples, noise_rng, &tc.est_cascaded, &tc.est_ap_user)
          .bits;
    }
  }
  throw std::logic_error("unreachable");
}

ResultTable run_fig5(const ExperimentSpec& spec) {
  ResultTable table;
  table.sweep_param = spec.sweep_param;
  table.sweep_values = spec.sweep_values;
  table.spec = spec;

  std::vector<SeriesPlan> plans;
  for (const std::string& token : spec.schemes)
    plans.push_back(parse_series_token(token, spec.scenario.kbar));
  const bool estimated = spec.csi == "estimated";

  for (std::size_t v = 0; v < spec.sweep_values.size(); ++v) {
    const ScenarioConfig scenario = scenario_at(spec, spec.sweep_values[v]);
    std::vector<std::vector<double>> bits(plans.size(), std::vector<double>(spec.trials, 0.0));
    parallel_for(spec.trials, spec.workers, [&](std::size_t t) {
      try {
        const TrialChannels tc = make_trial_channels(scenario, spec.seed, v, t, estimated);
        for (std::size_t pi = 0; pi < plans.size(); ++pi) {
          RngStream design_rng =
              substream(spec.seed, stream_id(v, t, design_slot(plans[pi])));
          RngStream noise_rng = substream(spec.seed, stream_id(v, t, kRateNoiseSlot));
          double rate = series_rate(plans[pi], scenario, tc, spec, scenario.pt_w, design_rng,
                                    noise_rng);
          if (spec.apply_overhead)
            rate = effective_rate_with_overhead(rate, scenario.groups,
                                                scenario.coherence_symbols);
          bits[pi][t] = rate;
        }
      } catch (const std::exception& err) {
        throw std::runtime_error("trial " + std::to_string(t) + ": " + err.what());
      }
    });
    for (std::size_t pi = 0; pi < plans.size(); ++pi)
      append_series_point(table.series, reduce_mean("rate_" + plans[pi].token, bits[pi]));
  }
  return table;
}

ResultTable run_fig6(const ExperimentSpec& spec) {
  ResultTable table;
  table.sweep_param = spec.sweep_param;
  table.sweep_values = spec.sweep_values;
  table.spec = spec;
  const bool estimated = spec.csi == "estimated";

  for (std::size_t v = 0; v < spec.sweep_values.size(); ++v) {
    const ScenarioConfig scenario = scenario_at(spec, spec.sweep_values[v]);
    scenario.validate();
    const SeriesPlan plan = parse_series_token("rpm", scenario.kbar);
    std::vector<std::vector<double>> bits(spec.pt_series_dbm.size(),
                                          std::vector<double>(spec.trials, 0.0));
    parallel_for(spec.trials, spec.workers, [&](std::size_t t) {
      try {
        const TrialChannels tc = make_trial_channels(scenario, spec.seed, v, t, estimated);
        RngStream design_rng = substream(spec.seed, stream_id(v, t, design_slot(plan)));
        const BeamformSolution sol = design_scheme(plan, scenario, tc, spec, design_rng);
        const EffectiveChannels eff =
            effective_channels(sol.phases, tc.set.cascaded, tc.set.ap_user, sol.w);
        const auto combos = combo_index_set(scenario.groups, scenario.kbar).sets;
        const Constellation constellation = psk(scenario.constellation_order);
        for (std::size_t qi = 0; qi < spec.pt_series_dbm.size(); ++qi) {
          // Same noise stream at every power level (common random numbers).
          RngStream noise_rng = substream(spec.seed, stream_id(v, t, kRateNoiseSlot));
          double rate = rate_practical(eff, combos, constellation,
                                       dbm_to_watts(spec.pt_series_dbm[qi]), scenario.noise_w,
                                       spec.noise_samples, noise_rng)
                            .bits;
          if (spec.apply_overhead)
            rate = effective_rate_with_overhead(rate, scenario.groups,
                                                scenario.coherence_symbols);
          bits[qi][t] = rate;
        }
      } catch (const std::exception& err) {
        throw std::runtime_error("trial " + std::to_string(t) + ": " + err.what());
      }
    });
    for (std::size_t qi = 0; qi < spec.pt_series_dbm.size(); ++qi) {
      char name[64];
      std::snprintf(name, sizeof(name), "rate_rpm_pt%gdbm", spec.pt_series_dbm[qi]);
      append_series_point(table.series, reduce_mean(name, bits[qi]));
    }
  }
  return table;
}

ResultTable run_fig7(const ExperimentSpec& spec) {
  ResultTable table;
  table.sweep_param = spec.sweep_param;
  table.sweep_values = spec.sweep_values;
  table.spec = spec;
  const bool estimated = spec.csi == "estimated";

  struct Variant {
    SeriesPlan plan;
    ScenarioConfig scenario;  // dy/pt filled per sweep value
    std::string name;
  };
  std::vector<Variant> variants;
  for (const std::string& token : spec.schemes) {
    for (std::size_t g : spec.groups_list) {
      Variant var;
      var.scenario = spec.scenario;
      var.scenario.groups = g;
      var.scenario.kbar = g / 2;
      var.plan = parse_series_token(token, var.scenario.kbar);
      var.name = "rate_" + token + "_g" + std::to_string(g);
      variants.push_back(var);
    }
  }

  for (std::size_t v = 0; v < spec.sweep_values.size(); ++v) {
    const double pt_w = dbm_to_watts(spec.sweep_values[v]);
    std::vector<std::vector<double>> bits(variants.size(),
                                          std::vector<double>(spec.trials, 0.0));
    parallel_for(spec.trials, spec.workers, [&](std::size_t t) {
      try {
        for (std::size_t vi = 0; vi < variants.size(); ++vi) {
          ScenarioConfig scenario = variants[vi].scenario;
          scenario.pt_w = pt_w;
          const TrialChannels tc = make_trial_channels(scenario, spec.seed, v, t, estimated);
          RngStream design_rng =
              substream(spec.seed, stream_id(v, t, design_slot(variants[vi].plan)));
          RngStream noise_rng = substream(spec.seed, stream_id(v, t, kRateNoiseSlot));
          double rate = series_rate(variants[vi].plan, scenario, tc, spec, pt_w, design_rng,
                                    noise_rng);
          if (spec.apply_overhead)
            rate = effective_rate_with_overhead(rate, scenario.groups,
                                                scenario.coherence_symbols);
          bits[vi][t] = rate;
        }
      } catch (const std::exception& err) {
        throw std::runtime_error("trial " + std::to_string(t) + ": " + err.what());
      }
    });
    for (std::size_t vi = 0; vi < variants.size(); ++vi)
      append_series_point(table.series, reduce_mean(variants[vi].name, bits[vi]));
  }
  return table;
}

}  // namespace

ResultTable run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  ResultTable table;
  switch (spec.fig()) {
    case FigId::kFig2: table = run_fig2(spec); break;
    case FigId::kFig3: table = run_fig3(spec); break;
    case FigId::kFig4: table = run_fig4(spec); break;
    case FigId::kFig5: table = run_fig5(spec); break;
    case FigId::kFig6: table = run_fig6(spec); break;
    case FigId::kFig7: table = run_fig7(spec); break;
  }
  table.metadata["code_version"] = kCodeVersion;
  std::vector<std::size_t> tiled_groups = spec.groups_list;
  if (tiled_groups.empty()) tiled_groups.push_back(spec.scenario.groups);
  std::string tiles;
  for (std::size_t g : tiled_groups) {
    const GroupTiling tiling = choose_tiling(spec.scenario.ris_lx, spec.scenario.ris_lz, g);
    if (!tiles.empty()) tiles += ",";
    tiles += std::to_string(tiling.tile_lx) + "x" + std::to_string(tiling.tile_lz);
  }
  table.metadata["ris_tile"] = tiles;
  table.metadata["randomization"] =
      "best of " + std::to_string(spec.randomization_samples) +
      " gaussian samples plus the deterministic candidate";
  return table;
}

OutputPaths write_outputs(const ResultTable& table, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("write_outputs: cannot create '" + out_dir + "'");

  OutputPaths paths;
  paths.csv = (fs::path(out_dir) / (table.spec.name + ".csv")).string();
  paths.json = (fs::path(out_dir) / (table.spec.name + ".json")).string();

  auto fmt = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::string(buf);
  };

  {
    std::ofstream csv(paths.csv, std::ios::binary);
    if (!csv) throw std::runtime_error("write_outputs: cannot write '" + paths.csv + "'");
    csv << table.sweep_param;
    for (const Series& s : table.series) csv << "," << s.name << ",stderr_" << s.name;
    csv << "\n";
    for (std::size_t v = 0; v < table.sweep_values.size(); ++v) {
      csv << fmt(table.sweep_values[v]);
      for (const Series& s : table.series)
        csv << "," << fmt(s.mean[v]) << "," << fmt(s.stderr_value[v]);
      csv << "\n";
    }
  }

  {
    json series = json::object();
    for (const Series& s : table.series)
      series[s.name] = json{{"mean", s.mean}, {"stderr", s.stderr_value}};
    json meta = json::object();
    for (const auto& [k, vv] : table.metadata) meta[k] = vv;
    json out{{"schema_version", 1},
             {"experiment", json::parse(spec_to_json_text(table.spec))},
             {"sweep", json{{"param", table.sweep_param}, {"values", table.sweep_values}}},
             {"series", series},
             {"metadata", meta}};
    std::ofstream jf(paths.json, std::ios::binary);
    if (!jf) throw std::runtime_error("write_outputs: cannot write '" + paths.json + "'");
    jf << out.dump(2) << "\n";
  }
  return paths;
}

}  // namespace rispm
