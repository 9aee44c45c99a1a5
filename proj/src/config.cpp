#include "ymh/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace ymh {

namespace {

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  auto a = s.find_first_not_of(ws);
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(ws);
  return s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || errno != 0 || !std::isfinite(x))
    throw ConfigError(key + ": expected a finite number, got '" + v + "'");
  return x;
}

long long to_int(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || errno != 0) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  std::string l = lower(v);
  if (l == "true" || l == "1" || l == "yes") return true;
  if (l == "false" || l == "0" || l == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

AlgebraKind to_kind(const std::string& key, const std::string& v) {
  std::string l = lower(v);
  std::string digits;
  Family fam;
  if (l.rfind("su", 0) == 0)
    fam = Family::SU;
  else if (l.rfind("so", 0) == 0)
    fam = Family::SO;
  else
    throw ConfigError(key + ": expected su(n) or so(n), got '" + v + "'");
  for (char c : l.substr(2))
    if (std::isdigit(static_cast<unsigned char>(c))) digits += c;
    else if (c != '(' && c != ')') throw ConfigError(key + ": expected su(n) or so(n), got '" + v + "'");
  if (digits.empty()) throw ConfigError(key + ": missing n in '" + v + "'");
  int n = std::atoi(digits.c_str());
  if (n < 2 || n > 8) throw ConfigError(key + ": n must be in [2, 8]");
  return {fam, n};
}

std::string kind_text(const AlgebraKind& k) {
  return std::string(k.family == Family::SU ? "su" : "so") + "(" + std::to_string(k.n) + ")";
}

struct Key {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::map<std::string, Key>& registry() {
  static const std::map<std::string, Key> keys = [] {
    std::map<std::string, Key> k;
    auto real = [&](const std::string& name, double RunConfig::*field) {
      k[name] = {[name, field](RunConfig& c, const std::string& v) { c.*field = to_double(name, v); },
                 [field](const RunConfig& c) { return num(c.*field); }};
    };
    auto integer = [&](const std::string& name, int RunConfig::*field) {
      k[name] = {[name, field](RunConfig& c, const std::string& v) {
                   long long x = to_int(name, v);
                   if (x < -1000000000LL || x > 1000000000LL) throw ConfigError(name + ": out of range");
                   c.*field = static_cast<int>(x);
                 },
                 [field](const RunConfig& c) { return std::to_string(c.*field); }};
    };
    k["grid.N"] = {[](RunConfig& c, const std::string& v) { c.grid.N = static_cast<int>(to_int("grid.N", v)); },
                   [](const RunConfig& c) { return std::to_string(c.grid.N); }};
    k["grid.L"] = {[](RunConfig& c, const std::string& v) { c.grid.L = to_double("grid.L", v); },
                   [](const RunConfig& c) { return num(c.grid.L); }};
    k["grid.dealias"] = {[](RunConfig& c, const std::string& v) {
                           std::string l = lower(v);
                           if (l == "two-thirds" || l == "2/3") c.grid.dealias = Dealias::TwoThirds;
                           else if (l == "none") c.grid.dealias = Dealias::None;
                           else throw ConfigError("grid.dealias: expected two-thirds or none, got '" + v + "'");
                         },
                         [](const RunConfig& c) {
                           return std::string(c.grid.dealias == Dealias::TwoThirds ? "two-thirds" : "none");
                         }};
    k["algebra.kind"] = {[](RunConfig& c, const std::string& v) { c.kind = to_kind("algebra.kind", v); },
                         [](const RunConfig& c) { return kind_text(c.kind); }};
    real("model.p", &RunConfig::p);
    real("model.eps", &RunConfig::eps);
    k["run.seed"] = {[](RunConfig& c, const std::string& v) {
                       long long x = to_int("run.seed", v);
                       if (x < 0) throw ConfigError("run.seed: must be non-negative");
                       c.seed = static_cast<std::uint64_t>(x);
                     },
                     [](const RunConfig& c) { return std::to_string(c.seed); }};
    k["run.out"] = {[](RunConfig& c, const std::string& v) { c.out = v; },
                    [](const RunConfig& c) { return c.out; }};
    k["evolve.dt"] = {[](RunConfig& c, const std::string& v) { c.evolve.dt = to_double("evolve.dt", v); },
                      [](const RunConfig& c) { return num(c.evolve.dt); }};
    k["evolve.T"] = {[](RunConfig& c, const std::string& v) { c.evolve.T = to_double("evolve.T", v); },
                     [](const RunConfig& c) { return num(c.evolve.T); }};
    k["evolve.integrator"] = {[](RunConfig& c, const std::string& v) {
                                std::string l = lower(v);
                                if (l == "exprk4") c.evolve.integrator = Integrator::ExpRK4;
                                else if (l == "expeuler") c.evolve.integrator = Integrator::ExpEuler;
                                else throw ConfigError("evolve.integrator: expected ExpRK4 or ExpEuler, got '" + v + "'");
                              },
                              [](const RunConfig& c) {
                                return std::string(c.evolve.integrator == Integrator::ExpRK4 ? "ExpRK4" : "ExpEuler");
                              }};
    k["evolve.picard_depth"] = {[](RunConfig& c, const std::string& v) {
                                  c.evolve.picard_depth = static_cast<int>(to_int("evolve.picard_depth", v));
                                },
                                [](const RunConfig& c) { return std::to_string(c.evolve.picard_depth); }};
    k["evolve.dynamics"] = {[](RunConfig& c, const std::string& v) {
                              std::string l = lower(v);
                              if (l == "full") c.dynamics = Dynamics::Full;
                              else if (l == "linear") c.dynamics = Dynamics::Linear;
                              else if (l == "free") c.dynamics = Dynamics::Free;
                              else throw ConfigError("evolve.dynamics: expected full, linear or free, got '" + v + "'");
                            },
                            [](const RunConfig& c) {
                              return std::string(c.dynamics == Dynamics::Full     ? "full"
                                                 : c.dynamics == Dynamics::Linear ? "linear"
                                                                                  : "free");
                            }};
    k["data.kind"] = {[](RunConfig& c, const std::string& v) {
                        std::string l = lower(v);
                        if (l != "compliant" && l != "random")
                          throw ConfigError("data.kind: expected compliant or random, got '" + v + "'");
                        c.data_kind = l;
                      },
                      [](const RunConfig& c) { return c.data_kind; }};
    integer("data.band", &RunConfig::data_band);
    real("data.amplitude", &RunConfig::data_amplitude);
    real("data.lambda", &RunConfig::data_lambda);
    real("data.target_norm", &RunConfig::data_target_norm);
    integer("simulate.diag_every", &RunConfig::diag_every);
    integer("simulate.snapshot_every", &RunConfig::snapshot_every);
    integer("verify.seeds", &RunConfig::verify_seeds);
    integer("probe.batch", &RunConfig::probe_batch);
    integer("probe.N", &RunConfig::probe_N);
    integer("probe.M", &RunConfig::probe_M);
    k["probe.estimates"] = {[](RunConfig& c, const std::string& v) { c.probe_estimates = v; },
                            [](const RunConfig& c) { return c.probe_estimates; }};
    k["probe.symbol_samples"] = {[](RunConfig& c, const std::string& v) {
                                   long long x = to_int("probe.symbol_samples", v);
                                   if (x < 0) throw ConfigError("probe.symbol_samples: must be non-negative");
                                   c.probe_symbol_samples = static_cast<std::size_t>(x);
                                 },
                                 [](const RunConfig& c) { return std::to_string(c.probe_symbol_samples); }};
    k["probe.angle_samples"] = {[](RunConfig& c, const std::string& v) {
                                  long long x = to_int("probe.angle_samples", v);
                                  if (x < 0) throw ConfigError("probe.angle_samples: must be non-negative");
                                  c.probe_angle_samples = static_cast<std::size_t>(x);
                                },
                                [](const RunConfig& c) { return std::to_string(c.probe_angle_samples); }};
    k["probe.linear"] = {[](RunConfig& c, const std::string& v) { c.probe_linear = to_bool("probe.linear", v); },
                         [](const RunConfig& c) { return std::string(c.probe_linear ? "true" : "false"); }};
    k["converge.dts"] = {[](RunConfig& c, const std::string& v) {
                           std::vector<double> dts;
                           std::stringstream ss(v);
                           std::string item;
                           while (std::getline(ss, item, ',')) dts.push_back(to_double("converge.dts", trim(item)));
                           c.converge_dts = dts;
                         },
                         [](const RunConfig& c) {
                           std::string out;
                           for (double d : c.converge_dts) out += (out.empty() ? "" : ",") + num(d);
                           return out;
                         }};
    return k;
  }();
  return keys;
}

}  // namespace

Command parse_command(const std::string& name) {
  if (name == "simulate") return Command::Simulate;
  if (name == "verify-identities") return Command::VerifyIdentities;
  if (name == "probe-estimates") return Command::ProbeEstimates;
  if (name == "converge") return Command::Converge;
  if (name == "data-check") return Command::DataCheck;
  throw ConfigError("unknown command '" + name + "'");
}

std::string command_name(Command c) {
  switch (c) {
    case Command::Simulate: return "simulate";
    case Command::VerifyIdentities: return "verify-identities";
    case Command::ProbeEstimates: return "probe-estimates";
    case Command::Converge: return "converge";
    case Command::DataCheck: return "data-check";
  }
  return "?";
}

void RunConfig::validate() const {
  try {
    grid.validate();
  } catch (const StructuralError& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  if (kind.dimension() < 1) throw ConfigError("algebra.kind: algebra must have positive dimension");
  try {
    validate_exponent(p);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("model.p: ") + e.what());
  }
  if (!(eps > 0.0 && eps < 0.25)) throw ConfigError("model.eps: must lie in (0, 1/4)");
  evolve.validate();
  if (evolve.picard_depth < 0 || evolve.picard_depth > 64) throw ConfigError("evolve.picard_depth: must be in [0, 64]");
  if (data_band < 1 || 3 * data_band > grid.N) throw ConfigError("data.band: must be in [1, N/3]");
  if (!(data_amplitude >= 0.0)) throw ConfigError("data.amplitude: must be non-negative");
  if (!(data_target_norm >= 0.0)) throw ConfigError("data.target_norm: must be non-negative");
  if (diag_every < 1) throw ConfigError("simulate.diag_every: must be positive");
  if (snapshot_every < 0) throw ConfigError("simulate.snapshot_every: must be non-negative");
  if (verify_seeds < 1) throw ConfigError("verify.seeds: must be positive");
  if (probe_batch < 1) throw ConfigError("probe.batch: must be positive");
  auto pow2 = [](int n) { return n >= 4 && (n & (n - 1)) == 0; };
  if (!pow2(probe_N) || !pow2(probe_M) || probe_N > 32 || probe_M > 32)
    throw ConfigError("probe.N and probe.M: must be powers of two in [4, 32]");
  if (converge_dts.size() < 3) throw ConfigError("converge.dts: need at least three step sizes");
  for (double d : converge_dts)
    if (!(d > 0.0)) throw ConfigError("converge.dts: step sizes must be positive");
  if (out.empty()) throw ConfigError("run.out: must not be empty");
}

std::vector<std::string> RunConfig::canonical() const {
  std::vector<std::string> lines;
  for (const auto& [key, k] : registry()) lines.push_back(key + " = " + k.get(*this));
  return lines;
}

std::uint64_t RunConfig::hash() const {
  std::uint64_t h = fnv1a("command = " + command_name(command) + "\n");
  for (const auto& line : canonical())
    if (line.rfind("run.out ", 0) != 0) h = fnv1a(line + "\n", h);
  return h;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto it = registry().find(key);
  if (it == registry().end()) throw ConfigError("unknown key '" + key + "'");
  it->second.set(cfg, value);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& kv : registry()) keys.push_back(kv.first);
  return keys;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "missing key");
    if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
    try {
      set_config_value(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::uint64_t fnv1a(const std::string& text, std::uint64_t h) {
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ymh
