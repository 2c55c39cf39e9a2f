#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rispm/cli.hpp"
#include "rispm/config.hpp"
#include "rispm/experiment.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace rispm;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
  const std::string path = (std::filesystem::temp_directory_path() / name).string();
  std::ofstream out(path, std::ios::binary);
  out << text;
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int call_cli(std::vector<std::string> args) {
  std::vector<std::vector<char>> storage;
  std::vector<char*> argv;
  storage.emplace_back(std::vector<char>{'r', 'i', 's', 'p', 'm', '\0'});
  for (const std::string& a : args) {
    storage.emplace_back(a.begin(), a.end());
    storage.back().push_back('\0');
  }
  for (auto& s : storage) argv.push_back(s.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

const Series& find_series(const ResultTable& table, const std::string& name) {
  for (const Series& s : table.series)
    if (s.name == name) return s;
  throw std::runtime_error("missing series " + name);
}

}  // namespace

TEST_CASE("empty config falls back to the stock scenario") {
  const std::string path = write_temp("rispm_empty.cfg", "");
  ExperimentSpec spec = load_config(path);
  CHECK(spec.name == "fig3_power_vs_dy");
  CHECK(spec.scenario.n_ap == 4);
  CHECK(spec.scenario.ris_l == 144);
  CHECK(spec.scenario.groups == 4);
  CHECK(spec.scenario.kbar == 3);
  CHECK(spec.scenario.pt_w == doctest::Approx(0.1));
  CHECK(spec.scenario.pp_w == doctest::Approx(0.01));
  CHECK(spec.scenario.noise_w == doctest::Approx(1e-11));
  CHECK(spec.scenario.d0 == doctest::Approx(50.0));
  CHECK(spec.scenario.dz == doctest::Approx(2.0));
  CHECK(spec.scenario.wavelength == doctest::Approx(0.1));
  CHECK(spec.scenario.alpha_au == doctest::Approx(3.8));
  CHECK(spec.scenario.alpha_ar == doctest::Approx(2.2));
  CHECK(spec.scenario.alpha_ru == doctest::Approx(2.4));
  CHECK(spec.scenario.c0 == doctest::Approx(1e-3));
  CHECK(spec.scenario.kappa_au == 0.0);
  CHECK(std::isinf(spec.scenario.kappa_ar));
  CHECK(spec.scenario.kappa_ru == 0.0);
  CHECK(spec.scenario.coherence_symbols == 150);
  CHECK(spec.scenario.constellation_order == 4);
}

TEST_CASE("config units and validation") {
  const std::string good = write_temp("rispm_units.cfg",
                                      "[scenario]\n"
                                      "pt = \"20 dBm\"\n"
                                      "sigma2 = \"-80 dBm\"\n"
                                      "c0 = \"30 dB\"\n"
                                      "kappa_ar = inf\n");
  ExperimentSpec spec = load_config(good);
  CHECK(spec.scenario.pt_w == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(spec.scenario.noise_w == doctest::Approx(1e-11).epsilon(1e-12));
  CHECK(spec.scenario.c0 == doctest::Approx(1000.0).epsilon(1e-12));
  CHECK(std::isinf(spec.scenario.kappa_ar));

  const std::string bad_l = write_temp("rispm_badl.cfg",
                                       "[scenario]\nl = 145\nris_lx = 29\nris_lz = 5\n");
  CHECK_THROWS_WITH_AS(load_config(bad_l), doctest::Contains("L/G"), std::invalid_argument);

  const std::string unknown = write_temp("rispm_unknown.cfg", "[scenario]\nbogus_key = 3\n");
  CHECK_THROWS_WITH_AS(load_config(unknown), doctest::Contains("bogus_key"), std::runtime_error);

  const std::string bad_value = write_temp("rispm_badv.cfg", "[experiment]\ntrials = yes\n");
  CHECK_THROWS_AS(load_config(bad_value), std::runtime_error);

  CHECK_THROWS_WITH_AS(load_config("/nonexistent/rispm.cfg"), doctest::Contains("cannot open"),
                       std::runtime_error);
}

TEST_CASE("spec json round trip") {
  ExperimentSpec spec = default_spec(FigId::kFig4);
  spec.seed = 99;
  spec.trials = 17;
  spec.schemes = {"rpm_k3", "pbit"};
  const std::string text = spec_to_json_text(spec);
  ExperimentSpec back = spec_from_json_text(text);
  CHECK(spec_to_json_text(back) == text);
  CHECK(back.scenario.groups == 6);
  CHECK(std::isinf(back.scenario.kappa_ar));
}

TEST_CASE("noiseless fig3 keeps the full-on benchmark above the statistical design") {
  ExperimentSpec spec = default_spec(FigId::kFig3);
  spec.sweep_values = {35.0, 45.0, 55.0};
  spec.schemes = {"no_it_full_on", "rpm_k3"};
  spec.trials = 2;
  spec.csi = "estimated";
  spec.scenario.noise_w = 0.0;  // exact pilot estimates
  spec.seed = 11;
  ResultTable table = run_experiment(spec);
  const Series& full_on = find_series(table, "power_no_it_full_on");
  const Series& rpm = find_series(table, "power_rpm_k3");
  for (std::size_t v = 0; v < spec.sweep_values.size(); ++v)
    CHECK(full_on.mean[v] >= rpm.mean[v] * (1.0 - 1e-9));
}

TEST_CASE("outage curves order by diversity") {
  // SNRs low enough that even the kbar = 4 outage counts resolve at this
  // trial budget; the ordering holds at every SNR (stochastic dominance).
  ExperimentSpec spec = default_spec(FigId::kFig2);
  spec.sweep_values = {-3.0, 0.0};
  spec.kbars = {0, 2, 4};
  spec.trials = 200000;
  spec.seed = 3;
  ResultTable table = run_experiment(spec);
  const Series& k0 = find_series(table, "outage_mc_k0");
  const Series& k2 = find_series(table, "outage_mc_k2");
  const Series& k4 = find_series(table, "outage_mc_k4");
  for (std::size_t v = 0; v < spec.sweep_values.size(); ++v) {
    auto spread = [&](const Series& a, const Series& b) {
      return 3.0 * std::sqrt(a.stderr_value[v] * a.stderr_value[v] +
                             b.stderr_value[v] * b.stderr_value[v]);
    };
    CHECK(k4.mean[v] < k2.mean[v] - spread(k4, k2));
    CHECK(k2.mean[v] < k0.mean[v] - spread(k2, k0));
  }
}

TEST_CASE("results are identical for any worker count") {
  ExperimentSpec spec = default_spec(FigId::kFig4);
  spec.sweep_values = {10.0, 20.0};
  spec.schemes = {"rpm_k3", "pbit"};
  spec.trials = 8;
  spec.seed = 21;

  spec.workers = 1;
  ResultTable serial = run_experiment(spec);
  spec.workers = 8;
  ResultTable parallel = run_experiment(spec);

  const std::string dir =
      (std::filesystem::temp_directory_path() / "rispm_workers").string();
  serial.spec.workers = 1;
  parallel.spec.workers = 1;  // align the echo so the bytes can match
  OutputPaths a = write_outputs(serial, dir + "/a");
  OutputPaths b = write_outputs(parallel, dir + "/b");
  CHECK(slurp(a.csv) == slurp(b.csv));
  CHECK(slurp(a.json) == slurp(b.json));
}

TEST_CASE("rate runner is also worker-count independent") {
  ExperimentSpec spec = default_spec(FigId::kFig5);
  spec.sweep_values = {45.0};
  spec.schemes = {"rpm_k3", "upper_bound"};
  spec.trials = 4;
  spec.noise_samples = 40;
  spec.seed = 31;

  spec.workers = 1;
  ResultTable serial = run_experiment(spec);
  spec.workers = 4;
  ResultTable parallel = run_experiment(spec);
  for (std::size_t s = 0; s < serial.series.size(); ++s) {
    CHECK(serial.series[s].mean[0] == parallel.series[s].mean[0]);
    CHECK(serial.series[s].stderr_value[0] == parallel.series[s].stderr_value[0]);
  }
}

TEST_CASE("dropping a scheme leaves the others' numbers unchanged") {
  ExperimentSpec spec = default_spec(FigId::kFig4);
  spec.sweep_values = {0.0};  // high outage, so the probabilities are nonzero
  spec.schemes = {"rpm_k3", "pbit", "no_ris_mrt"};
  spec.trials = 6;
  spec.seed = 5;
  ResultTable all = run_experiment(spec);

  spec.schemes = {"pbit"};
  ResultTable only = run_experiment(spec);
  CHECK(find_series(all, "outage_pbit").mean[0] == find_series(only, "outage_pbit").mean[0]);
}

TEST_CASE("csv schema and byte-identical reruns") {
  ExperimentSpec spec = default_spec(FigId::kFig4);
  spec.sweep_values = {10.0, 15.0};
  spec.schemes = {"rpm_k3", "pbit"};
  spec.trials = 4;
  spec.seed = 77;
  const std::string dir = (std::filesystem::temp_directory_path() / "rispm_csv").string();
  OutputPaths first = write_outputs(run_experiment(spec), dir);
  const std::string csv = slurp(first.csv);
  CHECK(csv.rfind("pt_dbm,outage_rpm_k3,stderr_outage_rpm_k3,outage_pbit,stderr_outage_pbit",
                  0) == 0);
  const std::size_t rows = std::count(csv.begin(), csv.end(), '\n');
  CHECK(rows == 3);  // header + one row per sweep value

  OutputPaths second = write_outputs(run_experiment(spec), dir);
  CHECK(slurp(second.csv) == csv);

  // The JSON summary reloads into the same spec.
  ExperimentSpec loaded = load_config(first.json);
  CHECK(spec_to_json_text(loaded) == spec_to_json_text(spec));
}

TEST_CASE("cli entry points") {
  const std::string out = (std::filesystem::temp_directory_path() / "rispm_cli").string();
  CHECK(call_cli({"reproduce", "--fig", "2", "--trials", "2000", "--seed", "7", "--out", out}) ==
        0);
  CHECK(std::filesystem::exists(out + "/fig2_outage_vs_snr.csv"));
  CHECK(std::filesystem::exists(out + "/fig2_outage_vs_snr.json"));

  CHECK(call_cli({"run", "--config", "/missing/nope.cfg"}) == 1);
  CHECK(call_cli({"reproduce", "--fig", "9"}) == 2);
  CHECK(call_cli({"reproduce", "--bogus-flag"}) == 2);

  // config-driven run with overrides
  const std::string cfg = write_temp("rispm_cli_run.cfg",
                                     "[experiment]\n"
                                     "name = \"fig2_outage_vs_snr\"\n"
                                     "kbars = [0, 1]\n"
                                     "[sweep]\n"
                                     "param = \"snr_db\"\n"
                                     "values = [10, 20]\n");
  CHECK(call_cli({"run", "--config", cfg, "--trials", "1000", "--out", out}) == 0);

  // worker count does not change the bytes
  const std::string out1 = out + "/w1";
  const std::string out4 = out + "/w4";
  CHECK(call_cli({"run", "--config", cfg, "--trials", "1000", "--workers", "1", "--out",
                  out1}) == 0);
  // align the workers echo for the byte comparison below
  ExperimentSpec s1 = load_config(out1 + "/fig2_outage_vs_snr.json");
  CHECK(call_cli({"run", "--config", cfg, "--trials", "1000", "--workers", "4", "--out",
                  out4}) == 0);
  ExperimentSpec s4 = load_config(out4 + "/fig2_outage_vs_snr.json");
  CHECK(slurp(out1 + "/fig2_outage_vs_snr.csv") == slurp(out4 + "/fig2_outage_vs_snr.csv"));
  s1.workers = s4.workers = 1;
  CHECK(spec_to_json_text(s1) == spec_to_json_text(s4));
}
