#include "minnaert/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace minnaert;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  int jobs = 0;
  long long seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment configuration file (JSON)")->required();
  cmd->add_option("--out", args.out_dir, "output directory (defaults to the config's output_dir)");
  cmd->add_option("--jobs", args.jobs, "parallel workers for per-position stages");
  cmd->add_option("--seed", args.seed, "noise seed override");
}

int dispatch(const std::string& name, const CommonArgs& args) {
  RunConfig cfg;
  try {
    cfg = load_config(args.config_path);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  }
  if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
  if (args.jobs > 0) cfg.jobs = args.jobs;
  if (args.seed >= 0) cfg.seed = static_cast<unsigned long long>(args.seed);

  try {
    if (name == "synth") return run_synth(cfg, cfg.output_dir);
    if (name == "reconstruct") return run_reconstruct(cfg, cfg.output_dir);
    if (name == "validate") return run_validate(cfg, cfg.output_dir);
    return run_sweep(cfg, cfg.output_dir);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  } catch (const SilentTraceError& e) {
    std::cerr << "[" << name << "] detection failure: " << e.what() << "\n";
    return kExitDetection;
  } catch (const FitError& e) {
    std::cerr << "[" << name << "] fit failure: " << e.what() << "\n";
    return kExitFit;
  } catch (const InversionError& e) {
    std::cerr << "[" << name << "] inversion failure: " << e.what() << "\n";
    return kExitInversion;
  } catch (const std::exception& e) {
    std::cerr << "[" << name << "] error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bubble-resonance acoustic imaging: synthesis and reconstruction"};
  app.require_subcommand(1);

  CommonArgs args;
  const char* names[] = {"synth", "reconstruct", "validate", "sweep"};
  const char* descs[] = {"synthesize the measurement set for a bubble scan",
                         "run reconstruction steps 1-4 against a measurement set",
                         "run the module invariant battery",
                         "bubble-size scaling and convergence tables"};
  for (int i = 0; i < 4; ++i) add_common(app.add_subcommand(names[i], descs[i]), args);

  CLI11_PARSE(app, argc, argv);
  return dispatch(app.get_subcommands().front()->get_name(), args);
}
