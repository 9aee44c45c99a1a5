#include <algorithm>
#include <string>

#include "doctest.h"
#include "ymh/config.hpp"

using namespace ymh;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "cfg").validate();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("parsing assigns values and ignores comments") {
  RunConfig c = parse_config(
      "# header\n"
      "grid.N = 16   # trailing comment\n"
      "algebra.kind = so(3)\n"
      "evolve.integrator = ExpEuler\n"
      "converge.dts = 0.1, 0.05, 0.025\n"
      "\n");
  c.validate();
  CHECK(c.grid.N == 16);
  CHECK(c.kind.family == Family::SO);
  CHECK(c.kind.n == 3);
  CHECK(c.evolve.integrator == Integrator::ExpEuler);
  CHECK(c.converge_dts == std::vector<double>{0.1, 0.05, 0.025});
}

TEST_CASE("parse errors name the source line") {
  CHECK(error_of("grid.N = 16\nbogus.key = 1\n").rfind("cfg:2: unknown key 'bogus.key'", 0) == 0);
  CHECK(error_of("grid.N = 16\ngrid.N = 32\n").rfind("cfg:2: duplicate key 'grid.N'", 0) == 0);
  CHECK(error_of("grid.N\n").rfind("cfg:1: expected 'key = value'", 0) == 0);
  CHECK(error_of("model.p = three\n").rfind("cfg:1: model.p:", 0) == 0);
  CHECK(error_of("algebra.kind = sp(2)\n").find("algebra.kind") != std::string::npos);
}

TEST_CASE("validation rejects inconsistent values") {
  CHECK(error_of("model.p = 5\n").rfind("model.p", 0) == 0);
  CHECK(error_of("model.p = 1.5\n").rfind("model.p", 0) == 0);
  CHECK(error_of("model.p = 4.9\n").empty());
  CHECK(error_of("model.eps = 0.3\n").rfind("model.eps", 0) == 0);
  CHECK(error_of("grid.N = 8\ndata.band = 3\n").rfind("data.band", 0) == 0);
  CHECK(error_of("converge.dts = 0.1, 0.05\n").rfind("converge.dts", 0) == 0);
  CHECK(error_of("probe.N = 6\n").rfind("probe.N", 0) == 0);
  CHECK(error_of("evolve.dt = 0\n").find("dt") != std::string::npos);
}

TEST_CASE("canonical form is sorted and round trips") {
  RunConfig c;
  c.grid.N = 16;
  c.p = 2.5;
  auto lines = c.canonical();
  CHECK(std::is_sorted(lines.begin(), lines.end()));
  CHECK(lines.size() == config_keys().size());
  std::string text;
  for (const auto& l : lines) text += l + "\n";
  RunConfig back = parse_config(text);
  CHECK(back.canonical() == lines);
  CHECK(back.hash() == c.hash());
}

TEST_CASE("hash covers every key except the output directory") {
  RunConfig a, b;
  CHECK(a.hash() == b.hash());
  b.out = "elsewhere";
  CHECK(a.hash() == b.hash());
  for (const auto& key : config_keys()) {
    if (key == "run.out") continue;
    RunConfig c;
    std::string value;
    for (const auto& l : c.canonical())
      if (l.rfind(key + " = ", 0) == 0) value = l.substr(key.size() + 3);
    // perturb the value in a way every parser accepts
    std::string changed;
    if (key == "algebra.kind") changed = "su(3)";
    else if (key == "grid.dealias") changed = "none";
    else if (key == "evolve.integrator") changed = "ExpEuler";
    else if (key == "evolve.dynamics") changed = "free";
    else if (key == "data.kind") changed = "random";
    else if (key == "probe.linear") changed = "false";
    else if (key == "probe.estimates") changed = "F-1";
    else if (key == "converge.dts") changed = "0.1, 0.05, 0.02";
    else changed = value == "2" ? "3" : "2";
    set_config_value(c, key, changed);
    CAPTURE(key);
    CHECK(c.hash() != a.hash());
  }
  RunConfig d;
  d.command = Command::Converge;
  CHECK(d.hash() != a.hash());
}

TEST_CASE("commands") {
  for (auto c : {Command::Simulate, Command::VerifyIdentities, Command::ProbeEstimates, Command::Converge,
                 Command::DataCheck})
    CHECK(parse_command(command_name(c)) == c);
  CHECK_THROWS_AS(parse_command("run"), ConfigError);
}

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a("") == 14695981039346656037ull);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
  CHECK(hash_hex(0xabcull) == "0000000000000abc");
}
