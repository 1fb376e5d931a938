#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sncbf/config.hpp"
#include "sncbf/errors.hpp"
#include "sncbf/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"sequential barrier workbench: train, bench, decomp, replay"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  uint64_t seed_offset = 0;
  int threads = 1;
  app.add_option("--config", config_path,
                 "experiment config file (key = value lines)");
  app.add_option("--out", out_dir, "output directory (default: out)");
  app.add_option("--seed-offset", seed_offset,
                 "added to every configured seed");
  app.add_option("--threads", threads, "parallel sweep workers")
      ->check(CLI::PositiveNumber);

  auto* sub_train = app.add_subcommand("train", "demonstrations, dynamics fit, two-phase barrier training");
  auto* sub_bench = app.add_subcommand("bench", "collision-rate sweep over methods, densities and seeds");
  auto* sub_decomp = app.add_subcommand("decomp", "obstacle predictor study across densities");
  auto* sub_replay = app.add_subcommand("replay", "barrier level sets over a recorded trajectory");
  for (auto* sub : {sub_train, sub_bench, sub_decomp, sub_replay})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? sncbf::kExitOk : sncbf::kExitConfig;
  }

  try {
    sncbf::ExperimentConfig cfg =
        config_path.empty()
            ? sncbf::experiment_config_from(sncbf::ConfigMap::parse(""),
                                            seed_offset)
            : sncbf::load_experiment_config(config_path, seed_offset);
    if (*sub_train) {
      sncbf::cli::cmd_train(cfg, out_dir, std::cout);
    } else if (*sub_bench) {
      sncbf::cli::cmd_bench(cfg, out_dir, threads, std::cout);
    } else if (*sub_decomp) {
      sncbf::cli::cmd_decomp(cfg, out_dir, std::cout);
    } else if (*sub_replay) {
      sncbf::cli::cmd_replay(cfg, out_dir, std::cout);
    }
    return sncbf::kExitOk;
  } catch (const sncbf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return sncbf::kExitConfig;
  } catch (const sncbf::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return sncbf::kExitIo;
  } catch (const sncbf::StageError& e) {
    std::cerr << "stage error: " << e.what() << "\n";
    return sncbf::kExitStage;
  } catch (const std::exception& e) {
    std::cerr << "stage error: " << e.what() << "\n";
    return sncbf::kExitStage;
  }
}
