#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ymh/evolve.hpp"

namespace ymh {

enum class Command { Simulate, VerifyIdentities, ProbeEstimates, Converge, DataCheck };

Command parse_command(const std::string& name);
std::string command_name(Command c);

/// Validated run parameters. Every field has a flat key "section.name".
struct RunConfig {
  Command command = Command::Simulate;

  GridSpec grid;
  AlgebraKind kind = AlgebraKind::su(2);
  double p = 3.0;
  double eps = 0.05;
  std::uint64_t seed = 1;
  std::string out = "out";

  EvolveConfig evolve;
  Dynamics dynamics = Dynamics::Full;

  std::string data_kind = "compliant";  ///< compliant | random
  int data_band = 2;
  double data_amplitude = 0.05;
  double data_lambda = 0.5;
  double data_target_norm = 0.0;  ///< rescale data to this norm when > 0

  int diag_every = 10;
  int snapshot_every = 0;  ///< 0 writes the final state only

  int verify_seeds = 10;

  int probe_batch = 100;
  int probe_N = 8;
  int probe_M = 8;
  std::string probe_estimates = "all";
  std::size_t probe_symbol_samples = 1000000;
  std::size_t probe_angle_samples = 100000;
  bool probe_linear = true;

  std::vector<double> converge_dts{4e-3, 2e-3, 1e-3};

  double s() const { return 1.0 - eps; }
  double b() const { return 0.5 + 2.0 * eps; }

  /// Raises ConfigError on any inconsistent value.
  void validate() const;
  /// Canonical "key = value" lines, sorted by key.
  std::vector<std::string> canonical() const;
  /// FNV-1a over the canonical lines and the command name.
  std::uint64_t hash() const;
};

/// Parses "key = value" lines; '#' starts a comment. Unknown keys, repeated
/// keys and malformed values raise ConfigError naming the line.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Applies one "key = value" assignment to `cfg`.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

std::vector<std::string> config_keys();

std::uint64_t fnv1a(const std::string& text, std::uint64_t h = 14695981039346656037ull);

std::string hash_hex(std::uint64_t h);

}  // namespace ymh
