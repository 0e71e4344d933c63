// Command-line entry point: configuration, orchestration and output files.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shadowgm/commands.hpp"
#include "shadowgm/io.hpp"

namespace fs = std::filesystem;
using namespace shadowgm;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("-c,--config", f.config, "JSON configuration file")->check(CLI::ExistingFile);
  sub->add_option("--seed", f.seed, "Seed (single run) and base seed (campaigns)");
  sub->add_option("--threads", f.threads, "Worker threads; results do not depend on it")
      ->check(CLI::PositiveNumber);
  sub->add_option("-o,--out", f.out, "Output directory (overrides SHADOWGM_OUTPUT_ROOT)");
  sub->add_option("--set", f.overrides, "Override a config key, e.g. --set parameters.gamma=1e3");
}

RunConfig resolve(const CommonFlags& f) {
  nlohmann::json tree = nlohmann::json::object();
  if (!f.config.empty()) {
    tree = nlohmann::json::parse(io::read_file(f.config), nullptr, false);
    if (tree.is_discarded()) throw ConfigError("cannot parse " + f.config);
  }
  for (const auto& o : f.overrides) apply_override(tree, o);
  RunConfig cfg = config_from_json(tree);
  if (f.seed) {
    cfg.seed = *f.seed;
    cfg.ensemble.base_seed = *f.seed;
  }
  if (f.threads) cfg.ensemble.threads = *f.threads;
  if (!f.out.empty())
    cfg.output_dir = f.out;
  else if (const char* root = std::getenv("SHADOWGM_OUTPUT_ROOT"); root && *root)
    cfg.output_dir = root;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator and bound checker for the stochastic shadow Gierer-Meinhardt system"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string inputs;
  std::vector<double> gammas;
  std::string verify_dir;

  auto* validate_cmd = app.add_subcommand("validate", "Resolve parameters and regime flags");
  auto* simulate_cmd = app.add_subcommand("simulate", "Integrate one path");
  auto* ensemble_cmd = app.add_subcommand("ensemble", "Monte Carlo campaign with bound checks");
  auto* bounds_cmd = app.add_subcommand("bounds", "Evaluate the closed-form bounds");
  auto* profile_cmd = app.add_subcommand("verify-profile", "Check the initial-profile inequality");
  auto* tail_cmd = app.add_subcommand("tail-check", "Empirical running-maximum tails");
  auto* sweep_cmd = app.add_subcommand("sweep-gamma", "Blowup times across amplitudes");
  auto* verify_cmd = app.add_subcommand("verify", "Re-hash the configuration embedded in outputs");

  for (auto* sub : {validate_cmd, simulate_cmd, ensemble_cmd, bounds_cmd, profile_cmd, tail_cmd,
                    sweep_cmd})
    add_common(sub, flags);
  bounds_cmd->add_option("--inputs", inputs, "JSON file of realized quantities")
      ->check(CLI::ExistingFile);
  sweep_cmd->add_option("--gammas", gammas, "Increasing amplitudes (overrides sweep.gammas)");
  verify_cmd->add_option("dir", verify_dir, "Directory of output files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << error_json("UsageError", e.what()) << '\n';
    return kExitUsage;
  }

  try {
    CommandResult res;
    if (verify_cmd->parsed()) {
      res = cmd_verify(verify_dir);
    } else {
      RunConfig cfg = resolve(flags);
      if (sweep_cmd->parsed() && !gammas.empty()) cfg.gammas = gammas;
      const fs::path out = cfg.output_dir;
      if (validate_cmd->parsed()) res = cmd_validate(cfg);
      else if (simulate_cmd->parsed()) res = cmd_simulate(cfg, out);
      else if (ensemble_cmd->parsed()) res = cmd_ensemble(cfg, out);
      else if (bounds_cmd->parsed())
        res = cmd_bounds(cfg, inputs.empty() ? std::nullopt : std::optional<fs::path>(inputs), out);
      else if (profile_cmd->parsed()) res = cmd_verify_profile(cfg, out);
      else if (tail_cmd->parsed()) res = cmd_tail_check(cfg, out);
      else if (sweep_cmd->parsed()) res = cmd_sweep_gamma(cfg, out);
    }
    std::cout << res.summary << '\n';
    for (const auto& f : res.files) std::cout << "wrote " << f.string() << '\n';
    return res.exit_code;
  } catch (const Error& e) {
    std::cerr << error_json(e.kind(), e.what()) << '\n';
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    std::cerr << error_json("IOError", e.what()) << '\n';
    return kExitUsage;
  }
}
