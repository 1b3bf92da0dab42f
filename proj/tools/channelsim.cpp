// Experiment runner: reproduces the channel-transport experiments from a JSON
// config and emits manifest.json / results.csv / summary.json.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "narrowchannel/experiments.hpp"
#include "narrowchannel/version.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<long long> seed;
  std::optional<int> threads;
};

int run_kind(const std::string& kind, const CommonOpts& opts) {
  nlohmann::json config;
  try {
    std::ifstream in(opts.config_path);
    if (!in) {
      std::cerr << "channelsim: cannot open config '" << opts.config_path << "'\n";
      return 2;
    }
    in >> config;
  } catch (const std::exception& e) {
    std::cerr << "channelsim: bad config JSON: " << e.what() << "\n";
    return 2;
  }

  config["kind"] = kind;
  if (const char* env_seed = std::getenv("CHANNELSIM_SEED"))
    config["seed"] = std::strtoull(env_seed, nullptr, 10);
  if (opts.seed) config["seed"] = *opts.seed;  // flag wins over the environment
  if (opts.threads) config["threads"] = *opts.threads;

  try {
    const nchan::ExperimentResult result = nchan::run_experiment(config);
    nchan::write_outputs(result, opts.out_dir);
    std::cout << result.summary.dump(2) << "\n";
    return 0;
  } catch (const nchan::ConfigError& e) {
    std::cerr << "channelsim: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "channelsim: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "channelsim: numeric fault: " << e.what() << "\n";
    std::ofstream diag(opts.out_dir + "/fault.txt");
    diag << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Narrow-channel transport experiments"};
  app.set_version_flag("--version", nchan::kVersion);
  app.require_subcommand(1);

  CommonOpts opts;
  const char* kinds[] = {"validate-geometry", "estimate-K", "graph-mc", "sde-mc",
                         "eps-sweep",         "speed",      "oracle-compare"};
  const char* descs[] = {
      "check a channel shape against the geometric assumptions",
      "estimate the width-ratio kernel K(t) of a random environment",
      "first-passage Monte Carlo of the limiting graph diffusion",
      "first-passage Monte Carlo of the reflected 2-D diffusion",
      "compare 2-D exit times against the graph limit over an epsilon ladder",
      "assemble the effective inverse transport speed",
      "cross-check the closed-form exit time against the finite-difference solver"};

  std::string picked;
  for (std::size_t i = 0; i < std::size(kinds); ++i) {
    CLI::App* sub = app.add_subcommand(kinds[i], descs[i]);
    sub->add_option("--config", opts.config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--seed", opts.seed, "seed override");
    sub->add_option("--threads", opts.threads, "worker thread count");
    sub->callback([&picked, name = std::string(kinds[i])] { picked = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }
  return run_kind(picked, opts);
}
