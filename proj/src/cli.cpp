#include "rispm/cli.hpp"

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "rispm/experiment.hpp"

namespace rispm {

namespace {

struct CommonArgs {
  long long trials = -1;
  long long noise_samples = -1;
  long long seed = -1;
  long long workers = -1;
  std::string out_dir = "results";
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--trials", args.trials, "Channel realizations per sweep point");
  cmd->add_option("--noise-samples", args.noise_samples, "Noise draws per realization");
  cmd->add_option("--seed", args.seed, "Master seed");
  cmd->add_option("--workers", args.workers, "Worker threads (results identical for any count)");
  cmd->add_option("--out", args.out_dir, "Output directory");
}

void apply_common(ExperimentSpec& spec, const CommonArgs& args) {
  if (args.trials >= 0) spec.trials = static_cast<std::size_t>(args.trials);
  if (args.noise_samples >= 0) spec.noise_samples = static_cast<std::size_t>(args.noise_samples);
  if (args.seed >= 0) spec.seed = static_cast<std::uint64_t>(args.seed);
  if (args.workers >= 0) spec.workers = static_cast<std::size_t>(args.workers);
}

int execute(ExperimentSpec spec, const std::string& out_dir) {
  const ResultTable table = run_experiment(spec);
  const OutputPaths paths = write_outputs(table, out_dir);
  std::printf("wrote %s\n", paths.csv.c_str());
  std::printf("wrote %s\n", paths.json.c_str());
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"RIS reflection-pattern-modulation link simulator"};
  app.require_subcommand(1);

  CommonArgs reproduce_args;
  int fig = 0;
  bool full = false;
  CLI::App* reproduce = app.add_subcommand("reproduce", "Re-run one of the stock experiments");
  reproduce->add_option("--fig", fig, "Experiment number (2-7)")->required();
  reproduce->add_flag("--full", full, "Full-scale trial counts (1000+ realizations)");
  add_common(reproduce, reproduce_args);

  CommonArgs run_args;
  std::string config_path;
  CLI::App* run = app.add_subcommand("run", "Run an experiment described by a config file");
  run->add_option("--config", config_path, "Config file path")->required();
  add_common(run, run_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;  // help exits 0, usage errors exit 2
  }

  try {
    if (reproduce->parsed()) {
      FigId id;
      switch (fig) {
        case 2: id = FigId::kFig2; break;
        case 3: id = FigId::kFig3; break;
        case 4: id = FigId::kFig4; break;
        case 5: id = FigId::kFig5; break;
        case 6: id = FigId::kFig6; break;
        case 7: id = FigId::kFig7; break;
        default:
          std::fprintf(stderr, "unknown figure %d: expected 2-7\n", fig);
          return 2;
      }
      ExperimentSpec spec = default_spec(id, full);
      apply_common(spec, reproduce_args);
      return execute(std::move(spec), reproduce_args.out_dir);
    }
    ExperimentSpec spec = load_config(config_path);
    apply_common(spec, run_args);
    return execute(std::move(spec), run_args.out_dir);
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
}

}  // namespace rispm
