#include <CLI11.hpp>

#include <iostream>

#include "ymh/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-spectral Yang-Mills-Higgs lab in Lorenz gauge"};
  std::string command, config_path, out;
  long long seed = -1;
  std::vector<std::string> overrides;
  app.add_option("command", command, "simulate | verify-identities | probe-estimates | converge | data-check")
      ->required();
  app.add_option("--config", config_path, "flat key = value configuration file");
  app.add_option("--seed", seed, "overrides run.seed");
  app.add_option("--out", out, "overrides run.out (output directory)");
  app.add_option("--set", overrides, "extra 'key=value' assignments applied after the file");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : ymh::kExitInvalidConfig;
  }

  ymh::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = ymh::load_config(config_path);
    cfg.command = ymh::parse_command(command);
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    else if (seed != -1) throw ymh::ConfigError("--seed: must be non-negative");
    if (!out.empty()) cfg.out = out;
    for (const auto& kv : overrides) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw ymh::ConfigError("--set: expected key=value, got '" + kv + "'");
      ymh::set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
  } catch (const ymh::ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return ymh::kExitInvalidConfig;
  }

  try {
    ymh::RunOutcome r = ymh::run_command(cfg, std::cout);
    std::cout << "config_hash " << ymh::hash_hex(cfg.hash()) << " exit " << r.exit_code << "\n";
    return r.exit_code;
  } catch (const ymh::ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return ymh::kExitInvalidConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ymh::kExitCheckFailed;
  }
}
