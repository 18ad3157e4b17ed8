#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sgf/config.hpp"
#include "sgf/errors.hpp"
#include "sgf/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Semi-grant-free NOMA uplink simulator and hierarchical PPO harness"};
  std::string mode;
  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  std::string out_dir;

  app.add_option("mode", mode, "train-lower | train-hier | eval | sweep | oracle | scale")->required();
  app.add_option("--config", config_path, "flat key=value config file")->required();
  app.add_option("--set", overrides, "key=value override, repeatable");
  auto* seed_opt = app.add_option("--seed", seed, "base seed");
  auto* out_opt = app.add_option("--out", out_dir, "output root directory");
  app.add_flag_callback("--list-keys", [] {
    for (const auto& k : sgf::config_keys()) std::cout << k << '\n';
    std::exit(0);
  }, "print every config key and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const auto run_mode = sgf::harness::parse_mode(mode);
    auto config = sgf::load_config_file(config_path);
    for (const auto& o : overrides) sgf::apply_override(config, o);
    if (*seed_opt) config.seed = seed;
    if (*out_opt) config.output_dir = out_dir;
    const auto report = sgf::harness::run(run_mode, config);
    std::cout << "artifacts: " << report.directory << '\n';
    for (const auto& line : report.summary) std::cout << line << '\n';
    return 0;
  } catch (const sgf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const sgf::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
