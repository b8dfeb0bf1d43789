// cvpic <config> [--out-dir DIR] [--seed N] [--threads N]
// Exit status: 0 success, 1 invalid command line or config, 2 runtime failure.
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cvpic/config.hpp"
#include "cvpic/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Curvilinear Vlasov-Poisson particle experiments"};
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  app.add_option("config", config_path, "key=value experiment description")->required();
  app.add_option("--out-dir", out_dir, "output directory (overrides out_dir)");
  app.add_option("--seed", seed, "RNG seed (overrides seed)");
  app.add_option("--threads", threads, "particle-loop workers (overrides threads)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  cvpic::RunConfig config;
  try {
    config = cvpic::parse_config(config_path);
    if (out_dir) config.out_dir = *out_dir;
    if (seed) config.seed = *seed;
    if (threads) config.threads = *threads;
    config.validate();
  } catch (const cvpic::ConfigError& e) {
    std::cerr << "cvpic: " << config_path << ": " << e.what() << '\n';
    return 1;
  }

  try {
    for (const auto& path : cvpic::run_experiment(config)) std::cout << path.string() << '\n';
  } catch (const cvpic::ConfigError& e) {
    std::cerr << "cvpic: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "cvpic: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
