// dualvote [subcommand] [--config PATH] [--seed N] [--trials N] [--out DIR] [--experiment NAME]
#include <cctype>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dualvote/errors.hpp"
#include "dualvote/harness.hpp"

using namespace dualvote;

int main(int argc, char** argv) {
  CLI::App app{"Dual-tree voting experiments"};
  std::string config_path, out_dir, experiment_name;
  std::uint64_t seed = 0, trials = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Root seed");
  auto* trials_opt = app.add_option("--trials", trials, "Monte Carlo trials (0: experiment default)");
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory (default $DUALVOTE_OUT or dualvote-out)");
  app.add_option("--experiment", experiment_name, "Experiment name");
  bool list = false;
  app.add_flag("--list", list, "List experiments and exit");

  std::vector<std::pair<CLI::App*, Experiment>> subs;
  for (auto e : all_experiments()) {
    std::string name(to_string(e));
    std::string kebab;
    for (std::size_t i = 0; i < name.size(); ++i) {
      const char c = name[i];
      if (std::isupper(static_cast<unsigned char>(c))) {
        if (i) kebab += '-';
        kebab += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      } else {
        kebab += c;
      }
    }
    subs.emplace_back(app.add_subcommand(kebab, "Run " + name), e);
  }
  app.require_subcommand(0, 1);
  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (auto e : all_experiments()) std::cout << to_string(e) << (is_stochastic(e) ? " (seeded)" : "") << '\n';
    return 0;
  }

  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    bool chosen = !config_path.empty();
    if (!experiment_name.empty()) {
      cfg.experiment = experiment_from_string(experiment_name);
      chosen = true;
    }
    for (const auto& [sub, e] : subs) {
      if (sub->parsed()) {
        cfg.experiment = e;
        chosen = true;
      }
    }
    if (!chosen) {
      std::cerr << app.help();
      return 2;
    }
    if (*seed_opt) cfg.seed = seed;
    if (*trials_opt) cfg.trials = trials;
    if (!out_dir.empty()) cfg.output_dir = out_dir;

    const auto result = run_experiment(cfg);
    std::cout << format_summary(result.summary);
    return result.pass() ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
