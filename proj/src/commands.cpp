#include "ymh/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "ymh/data.hpp"
#include "ymh/diagnose.hpp"
#include "ymh/normlab.hpp"
#include "ymh/nullform.hpp"
#include "ymh/snapshot.hpp"

namespace ymh {

namespace {

namespace fs = std::filesystem;

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class Run {
 public:
  Run(const RunConfig& cfg, std::ostream& log) : cfg_(cfg), log_(log), hash_(cfg.hash()) {
    fs::create_directories(cfg.out);
  }

  std::string path(const std::string& name) const { return (fs::path(cfg_.out) / name).string(); }

  void write(const std::string& name, const std::string& body) {
    std::ofstream out(path(name), std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path(name));
    out << body;
    outcome_.artifacts.push_back(name);
  }

  std::string csv_head(const std::string& columns) const {
    return "# config_hash " + hash_hex(hash_) + "\n" + columns + "\n";
  }

  void bundle(const std::string& name, const std::vector<NamedField>& fields) {
    write_bundle(path(name), fields, hash_);
    outcome_.artifacts.push_back(name);
    outcome_.artifacts.push_back(name + ".manifest");
  }

  void check(const std::string& name, double value, double tol, bool pass) {
    outcome_.checks.push_back({name, value, tol, pass});
    log_ << (pass ? "PASS " : "FAIL ") << name << " value=" << num(value) << " tol=" << num(tol) << "\n";
  }
  void check_below(const std::string& name, double value, double tol) {
    check(name, value, tol, std::isfinite(value) && value < tol);
  }

  RunOutcome finish(int code) {
    if (code == kExitOk)
      for (const auto& c : outcome_.checks)
        if (!c.pass) code = kExitCheckFailed;
    outcome_.exit_code = code;
    std::string m = "# ymh run manifest\n";
    m += "config_hash = " + hash_hex(hash_) + "\n";
    m += "command = " + command_name(cfg_.command) + "\n";
    m += "[config]\n";
    for (const auto& line : cfg_.canonical()) m += line + "\n";
    m += "[checks]\n";
    for (const auto& c : outcome_.checks)
      m += c.name + " = " + num(c.value) + " tol " + num(c.tolerance) + (c.pass ? " PASS" : " FAIL") + "\n";
    m += "[artifacts]\n";
    for (const auto& a : outcome_.artifacts) m += a + "\n";
    m += "exit_code = " + std::to_string(code) + "\n";
    std::ofstream(path("run_manifest.txt"), std::ios::binary) << m;
    return outcome_;
  }

  const RunConfig& cfg() const { return cfg_; }
  std::ostream& log() { return log_; }
  std::uint64_t hash() const { return hash_; }

 private:
  const RunConfig& cfg_;
  std::ostream& log_;
  std::uint64_t hash_;
  RunOutcome outcome_;
};

CauchyData make_data(const RunConfig& cfg, const GridPtr& grid, std::uint64_t seed) {
  CauchyData d = cfg.data_kind == "random"
                     ? make_random_data(grid, cfg.kind, seed, cfg.data_band, cfg.data_amplitude, cfg.p)
                     : make_compliant_data(grid, cfg.kind, seed, cfg.data_band, cfg.data_amplitude, cfg.p,
                                           cfg.data_lambda);
  if (cfg.data_target_norm > 0.0) {
    double n = data_norm(d);
    if (n > 0.0 && cfg.data_kind == "random") {
      d *= cfg.data_target_norm / n;
    } else if (n > 0.0) {
      // Plain rescaling would break the quadratic constraint terms.
      double amp = cfg.data_amplitude * cfg.data_target_norm / n;
      d = make_compliant_data(grid, cfg.kind, seed, cfg.data_band, amp, cfg.p, cfg.data_lambda);
    }
  }
  return d;
}

std::vector<NamedField> state_fields(const GaugeState& s) {
  std::vector<NamedField> out;
  auto names = GaugeState::component_names();
  auto comps = s.components();
  for (std::size_t i = 0; i < comps.size(); ++i) out.push_back({names[i], comps[i]->physical()});
  return out;
}

double rel_l2(const Field& a, const Field& b) {
  Field pa = a.physical(), pb = b.physical();
  double den = std::max(l2_norm(pa), l2_norm(pb));
  double diff = l2_norm(pa - pb);
  return den > 0.0 ? diff / den : diff;
}

int simulate(Run& run) {
  const RunConfig& cfg = run.cfg();
  auto grid = Grid::make(cfg.grid);
  CauchyData d = make_data(cfg, grid, cfg.seed);
  save_data(run.path("initial_data.ymh"), d, run.hash());
  GaugeState g0 = state_from_data(d);
  Stepper stepper(grid, cfg.p, cfg.dynamics);
  DiagnosticSeries series;
  const int steps = cfg.evolve.steps();
  int step = 0;
  int code = kExitOk;
  HalfWaveState last;
  try {
    last = evolve(to_half_wave(g0), stepper, cfg.evolve, [&](const HalfWaveState& h) {
      bool final = step == steps;
      if (step % cfg.diag_every == 0 || final) series.record(from_half_wave(h), h.time, cfg.p);
      if (cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0 && !final) {
        char name[64];
        std::snprintf(name, sizeof name, "state_%06d.ymh", step);
        run.bundle(name, state_fields(from_half_wave(h)));
      }
      ++step;
    });
    run.bundle("state_final.ymh", state_fields(from_half_wave(last)));
  } catch (const NanAbort& e) {
    run.log() << "non-finite state after t = " << num(e.last_valid_time()) << "\n";
    code = kExitNanAbort;
  }
  run.write("diagnostics.csv", series.csv(run.hash()));
  if (!series.energy.empty()) run.log() << "energy drift " << num(series.drift()) << "\n";
  return code;
}

int verify_identities(Run& run) {
  const RunConfig& cfg = run.cfg();
  auto grid = Grid::make(cfg.grid);
  std::string csv = run.csv_head("seed,check,value,tolerance,pass");
  double worst_lemma = 0.0, worst_trick = 0.0, worst_recomb = 0.0;
  auto row = [&](std::uint64_t seed, const std::string& name, double v, double tol) {
    csv += std::to_string(seed) + "," + name + "," + num(v) + "," + num(tol) + "," + (v < tol ? "1" : "0") + "\n";
  };
  for (int i = 0; i < cfg.verify_seeds; ++i) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(i);
    Potential A = make_lorenz_potential(grid, cfg.kind, seed, cfg.data_band, cfg.data_amplitude);
    SpacetimeField psi{random_field(grid, cfg.kind, seed ^ 0x9e3779b97f4a7c15ull, cfg.data_band, 1.0, false),
                       random_field(grid, cfg.kind, seed ^ 0x7f4a7c159e3779b9ull, cfg.data_band, 1.0, false)};
    Lemma1Report l = verify_lemma1(A, psi);
    row(seed, "lemma1_potential", l.potential_residual, 1e-9);
    row(seed, "lemma1_derivative", l.derivative_residual, 1e-9);
    worst_lemma = std::max({worst_lemma, l.potential_residual, l.derivative_residual});
    for (auto [a, b] : {std::pair{0, 1}, std::pair{1, 2}, std::pair{2, 3}}) {
      double r = nullform_trick_residual(A[1], a, b);
      row(seed, "nullform_trick_" + std::to_string(a) + std::to_string(b), r, 1e-12);
      worst_trick = std::max(worst_trick, r);
    }
    CauchyData d = make_compliant_data(grid, cfg.kind, seed, cfg.data_band, cfg.data_amplitude, cfg.p,
                                       cfg.data_lambda);
    RecombinationReport rr = recombination_residual(state_from_data(d), cfg.p);
    row(seed, "recombination", rr.max(), 1e-8);
    worst_recomb = std::max(worst_recomb, rr.max());
  }
  run.write("identities.csv", csv);
  run.check_below("lemma1", worst_lemma, 1e-9);
  run.check_below("nullform_trick", worst_trick, 1e-12);
  run.check_below("recombination", worst_recomb, 1e-8);
  return kExitOk;
}

int probe_estimates(Run& run) {
  const RunConfig& cfg = run.cfg();
  if (cfg.probe_symbol_samples > 0) {
    auto reports = check_symbol_bounds(cfg.probe_symbol_samples, cfg.seed);
    std::string csv = run.csv_head(bound_csv_header());
    for (const auto& r : reports) {
      csv += bound_csv_row(r) + "\n";
      if (r.id == "qij") run.check("symbol_qij", r.max_ratio, 1.0 + 1e-12, r.max_ratio <= 1.0 + 1e-12);
      if (r.id == "q0" || r.id == "q0j") run.check("symbol_" + r.id, r.max_ratio, 4.0, r.max_ratio <= 4.0);
    }
    run.write("symbol_bounds.csv", csv);
  }
  if (cfg.probe_angle_samples > 0) {
    std::string csv = run.csv_head("alpha,beta,gamma," + bound_csv_header());
    double worst = 0.0;
    const double ex[3] = {0.0, 0.25, 0.5};
    for (double a : ex)
      for (double b : ex)
        for (double c : ex)
          for (const auto& r : check_angle_estimate(cfg.probe_angle_samples, cfg.seed, a, b, c)) {
            csv += num(a) + "," + num(b) + "," + num(c) + "," + bound_csv_row(r) + "\n";
            worst = std::max(worst, r.max_ratio);
          }
    run.write("angle_estimate.csv", csv);
    run.check("angle_estimate", worst, 10.0, std::isfinite(worst) && worst <= 10.0);
  }

  auto catalog = estimate_catalog(cfg.eps);
  std::vector<EstimateDef> chosen;
  if (cfg.probe_estimates == "all" || cfg.probe_estimates.empty()) {
    chosen = catalog;
  } else {
    std::stringstream ss(cfg.probe_estimates);
    std::string id;
    while (std::getline(ss, id, ',')) {
      try {
        chosen.push_back(find_estimate(catalog, id));
      } catch (const StructuralError& e) {
        throw ConfigError(std::string("probe.estimates: ") + e.what());
      }
    }
  }
  const int N1 = cfg.probe_N, M1 = cfg.probe_M, N2 = 2 * N1, M2 = 2 * M1;
  const bool doubled = N2 <= 32 && M2 <= 32;
  std::string csv = run.csv_head(probe_csv_header());
  std::string growth = run.csv_head("estimate,admissible,ratio_coarse,ratio_fine,growth");
  double worst_growth = 0.0;
  for (const auto& def : chosen) {
    run.log() << "probe " << def.id << "\n";
    ProbeResult a = run_estimate_probe(def, N1, M1, cfg.probe_batch, cfg.seed);
    csv += probe_csv_row(a) + "\n";
    if (!doubled) continue;
    ProbeResult b = run_estimate_probe(def, N2, M2, cfg.probe_batch, cfg.seed);
    csv += probe_csv_row(b) + "\n";
    double g = a.max_ratio > 0.0 ? b.max_ratio / a.max_ratio - 1.0 : 0.0;
    growth += def.id + "," + (a.admissible ? "1" : "0") + "," + num(a.max_ratio) + "," + num(b.max_ratio) + "," +
              num(g) + "\n";
    worst_growth = std::max(worst_growth, g);
  }
  run.write("estimate_probes.csv", csv);
  if (doubled && !chosen.empty()) {
    run.write("estimate_growth.csv", growth);
    run.check("estimate_growth", worst_growth, 0.25, worst_growth < 0.25);
  }

  // HXH comparison on a random windowed sample.
  {
    GridSpec g;
    g.N = N1;
    g.dealias = Dealias::None;
    SpacetimeSample u = SpacetimeSample::zeros(g, M1, 2.0 * kPi, Window::Hann);
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& v : u.values) v = cplx(gauss(rng), gauss(rng));
    std::string hx = run.csv_head("s,b,norm_wave,norm_plus,norm_minus,weight_violation,norm_violation");
    double worst = 0.0;
    for (double b : {cfg.b(), 0.0, -0.4}) {
      HxhReport r = hxh_check(u, cfg.s(), b);
      hx += num(r.s) + "," + num(r.b) + "," + num(r.norm_wave) + "," + num(r.norm_plus) + "," + num(r.norm_minus) +
            "," + num(r.max_weight_violation) + "," + num(r.norm_violation) + "\n";
      worst = std::max(worst, r.max_weight_violation);
    }
    run.write("hxh.csv", hx);
    run.check("hxh_weight_violation", worst, 0.0, worst == 0.0);
  }

  if (cfg.probe_linear) {
    auto rows = linear_estimate_probe(N1, 2 * M1, {1.0, 0.5, 0.25}, cfg.eps, cfg.probe_batch / 4 + 1, cfg.seed);
    std::string lc = run.csv_head("T,max_ratio,max_ratio_without_T_power");
    bool finite = true;
    for (const auto& r : rows) {
      lc += num(r.T) + "," + num(r.max_ratio) + "," + num(r.max_ratio_no_power) + "\n";
      finite = finite && std::isfinite(r.max_ratio);
    }
    run.write("linear_estimate.csv", lc);
    run.check("linear_estimate_finite", finite ? 0.0 : 1.0, 0.0, finite);
  }
  return kExitOk;
}

int converge(Run& run) {
  const RunConfig& cfg = run.cfg();
  auto grid = Grid::make(cfg.grid);
  CauchyData d = make_data(cfg, grid, cfg.seed);
  GaugeState g0 = state_from_data(d);
  const HalfWaveState h0 = to_half_wave(g0);
  Stepper stepper(grid, cfg.p, cfg.dynamics);
  const double nominal = cfg.evolve.integrator == Integrator::ExpRK4 ? 4.0 : 1.0;

  run.check_below("initial_lorenz_residual", lorenz_residual(g0), 1e-12);
  run.check_below("initial_compat_residual", compatibility_residual(g0), 1e-12);

  std::vector<GaugeState> finals;
  std::vector<double> lor, comp, drift;
  for (double dt : cfg.converge_dts) {
    EvolveConfig e = cfg.evolve;
    e.dt = dt;
    DiagnosticSeries series;
    try {
      HalfWaveState h = evolve(h0, stepper, e, [&](const HalfWaveState& x) {
        if (x.time == 0.0) series.record(from_half_wave(x), x.time, cfg.p);
      });
      GaugeState s = from_half_wave(h);
      series.record(s, h.time, cfg.p);
      finals.push_back(s);
    } catch (const NanAbort& err) {
      run.log() << "non-finite state at dt = " << num(dt) << " after t = " << num(err.last_valid_time()) << "\n";
      return kExitNanAbort;
    }
    lor.push_back(series.lorenz_residual.back());
    comp.push_back(series.compat_residual.back());
    drift.push_back(series.drift());
    run.log() << "dt " << num(dt) << " drift " << num(drift.back()) << "\n";
  }
  std::vector<double> h, diffs;
  for (std::size_t i = 0; i + 1 < finals.size(); ++i) {
    h.push_back(cfg.converge_dts[i]);
    diffs.push_back(state_distance(finals[i], finals[i + 1]));
  }
  std::string csv = run.csv_head("dt,steps,energy_drift,lorenz_residual,compat_residual,distance_to_next");
  for (std::size_t i = 0; i < finals.size(); ++i) {
    EvolveConfig e = cfg.evolve;
    e.dt = cfg.converge_dts[i];
    csv += num(e.dt) + "," + std::to_string(e.steps()) + "," + num(drift[i]) + "," + num(lor[i]) + "," +
           num(comp[i]) + "," + (i < diffs.size() ? num(diffs[i]) : std::string("")) + "\n";
  }
  run.write("converge.csv", csv);
  double order = fit_order(h, diffs);
  run.check("solution_order", order, 0.3, std::abs(order - nominal) <= 0.3);
  double lor_order = fit_order(cfg.converge_dts, lor);
  double comp_order = fit_order(cfg.converge_dts, comp);
  run.log() << "order solution " << num(order) << " lorenz " << num(lor_order) << " compat " << num(comp_order)
            << " nominal " << num(nominal) << "\n";
  run.check("lorenz_order", lor_order, 0.3, std::abs(lor_order - nominal) <= 0.3);
  run.check("compat_order", comp_order, 0.3, std::abs(comp_order - nominal) <= 0.3);

  if (cfg.evolve.picard_depth > 0) {
    EvolveConfig e = cfg.evolve;
    e.dt = cfg.converge_dts.front();
    PicardResult pr = picard_iterate(h0, stepper, e, cfg.evolve.picard_depth, cfg.s());
    std::string pc = run.csv_head("iterate,distance,ratio");
    double worst = 0.0;
    for (std::size_t k = 0; k < pr.distances.size(); ++k) {
      double ratio = k > 0 && pr.distances[k - 1] > 0.0 ? pr.distances[k] / pr.distances[k - 1] : 0.0;
      if (k > 0) worst = std::max(worst, ratio);
      pc += std::to_string(k + 2) + "," + num(pr.distances[k]) + "," + num(ratio) + "\n";
    }
    run.check("picard_contraction", worst, 0.5, !pr.diverged && worst < 0.5);
    // Each scheme's tolerance is its distance to its own run on the next step size.
    EvolveConfig e2 = e;
    e2.dt = cfg.converge_dts[1];
    PicardResult pr2 = picard_iterate(h0, stepper, e2, cfg.evolve.picard_depth, cfg.s());
    const GaugeState p1 = from_half_wave(pr.last.back());
    const double tol_picard = state_distance(p1, from_half_wave(pr2.last.back()));
    const double tol_stepper = diffs.front();
    const double tol = std::max(tol_picard, tol_stepper);
    const double gap = state_distance(p1, finals.front());
    run.log() << "picard vs stepper " << num(gap) << " tolerance picard " << num(tol_picard) << " stepper "
              << num(tol_stepper) << "\n";
    pc += "# final_gap " + num(gap) + " tolerance_picard " + num(tol_picard) + " tolerance_stepper " +
          num(tol_stepper) + "\n";
    run.write("picard.csv", pc);
    run.check("picard_matches_stepper", gap, 10.0 * tol, gap <= 10.0 * tol);
  }
  return kExitOk;
}

int data_check(Run& run) {
  const RunConfig& cfg = run.cfg();
  auto grid = Grid::make(cfg.grid);
  CauchyData d = make_data(cfg, grid, cfg.seed);
  save_data(run.path("data.ymh"), d, run.hash());
  FData f = build_F_data(d);
  auto curv = curvature_from_potential(d.a, d.dota);
  double worst_f = 0.0;
  for (int k = 0; k < 6; ++k) worst_f = std::max(worst_f, rel_l2(f.f[k], curv[k]));
  CauchyData once = finalize_lorenz(d), twice = finalize_lorenz(once);
  double idem = 0.0;
  for (int a = 0; a < 4; ++a) idem = std::max({idem, rel_l2(once.a[a], twice.a[a]), rel_l2(once.dota[a], twice.dota[a])});
  FBoundReport fb = check_f_bounds(d, f);
  double gauss = gauss_residual(d, f);
  double lorenz = lorenz_data_residual(d);

  std::string csv = run.csv_head("quantity,value");
  csv += "f_vs_curvature," + num(worst_f) + "\n";
  csv += "finalize_idempotence," + num(idem) + "\n";
  csv += "lorenz_residual," + num(lorenz) + "\n";
  csv += "gauss_residual," + num(gauss) + "\n";
  csv += "data_norm," + num(data_norm(d)) + "\n";
  csv += "f_bound_printed," + num(fb.f_printed) + "\n";
  csv += "f_bound_corrected," + num(fb.f_corrected) + "\n";
  csv += "fdot_bound," + num(fb.fdot) + "\n";
  run.write("data_check.csv", csv);

  run.check_below("f_equals_curvature", worst_f, 1e-12);
  run.check("finalize_idempotent", idem, 0.0, idem == 0.0);
  run.check_below("lorenz_residual", lorenz, 1e-12);
  if (cfg.data_kind == "compliant") run.check_below("gauss_residual", gauss, 1e-10);
  bool finite = std::isfinite(fb.f_printed) && std::isfinite(fb.f_corrected) && std::isfinite(fb.fdot);
  run.check("f_bounds_finite", finite ? 0.0 : 1.0, 0.0, finite);
  return kExitOk;
}

}  // namespace

RunOutcome run_command(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  Run run(cfg, log);
  int code = kExitOk;
  switch (cfg.command) {
    case Command::Simulate: code = simulate(run); break;
    case Command::VerifyIdentities: code = verify_identities(run); break;
    case Command::ProbeEstimates: code = probe_estimates(run); break;
    case Command::Converge: code = converge(run); break;
    case Command::DataCheck: code = data_check(run); break;
  }
  return run.finish(code);
}

}  // namespace ymh
