#include "rdeq/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include "rdeq/bounds.hpp"
#include "rdeq/dynamics.hpp"
#include "rdeq/equilibrium.hpp"
#include "rdeq/stability.hpp"

namespace rdeq {

using nlohmann::json;

namespace {

json header(const AnalysisConfig& cfg, const char* command) {
  return {{"tool", kToolName},
          {"version", kToolVersion},
          {"config_hash", config_hash(cfg)},
          {"command", command},
          {"seed", cfg.run.seed}};
}

json number_or_null(std::optional<double> x) { return x ? json(*x) : json(nullptr); }

json coeffs_json(const Eigen::VectorXd& c) {
  json out = json::array();
  for (Eigen::Index i = 0; i < c.size(); ++i) out.push_back(format_double(c(i)));
  return out;
}

Pairing pairing_of(const RunBlock& run) {
  return run.pairing == "literal" ? Pairing::kPaperLiteral : Pairing::kDerivative;
}

// Runs `body`, mapping exceptions to exit codes and an "error" entry.
CommandOutput guarded(const AnalysisConfig& cfg, const char* command,
                      const std::function<void(CommandOutput&)>& body) {
  CommandOutput out;
  out.report = header(cfg, command);
  try {
    body(out);
  } catch (const SimulationError& e) {
    out.exit_code = kExitAnalysisFailure;
    out.report["error"] = {
        {"kind", e.reason() == SimulationError::Reason::kZeroDenominator ? "zero-denominator" : "non-finite"},
        {"step", e.step()},
        {"message", e.what()}};
  } catch (const ConsistencyError& e) {
    out.exit_code = kExitAnalysisFailure;
    out.report["error"] = {{"kind", "consistency"}, {"message", e.what()}};
  } catch (const std::invalid_argument& e) {  // SpecError, ConfigError
    out.exit_code = kExitInvalidInput;
    out.report["error"] = {{"kind", "invalid-input"}, {"message", e.what()}};
  } catch (const std::exception& e) {
    out.exit_code = kExitAnalysisFailure;
    out.report["error"] = {{"kind", "internal"}, {"message", e.what()}};
  }
  return out;
}

// ---- simulate ---------------------------------------------------------------

json admissibility_json(const AdmissibilityReport& a) {
  return {{"admissible", a.admissible},
          {"first_violation", a.first_violation ? json(*a.first_violation) : json(nullptr)},
          {"message", a.message}};
}

json oscillation_json(const Trajectory& traj, const RunBlock& run) {
  OscillationOptions opts;
  opts.window_cap = run.oscillation_window_cap;
  opts.scan = run.oscillation_scan;
  opts.zero_tolerance = run.oscillation_zero_tolerance;
  if (static_cast<int>(traj.size()) <= opts.window_cap + 2) {
    return {{"oscillatory", nullptr}, {"note", "trajectory too short for the oscillation scan"}};
  }
  const OscillationReport rep = detect_oscillation(traj, opts);
  json witnesses = json::array();
  for (std::size_t i = 0; i < rep.witnesses.size() && i < 16; ++i) {
    const auto& w = rep.witnesses[i];
    witnesses.push_back(json::array({w.k, w.n, w.m}));
  }
  return {{"oscillatory", rep.oscillatory},
          {"window_cap", rep.window_cap},
          {"scanned", rep.scanned},
          {"witness_count", rep.witnesses.size()},
          {"witnesses", witnesses}};
}

json trajectory_summary(const Trajectory& traj, const RunBlock& run) {
  const auto body_begin = traj.values.begin() + (-traj.start_index + 1);
  const auto [lo, hi] = std::minmax_element(body_begin, traj.values.end());
  const DivergenceReport div = detect_divergence(traj, run.divergence_threshold);
  return {{"steps", traj.last_index()},
          {"min", *lo},
          {"max", *hi},
          {"last", traj.values.back()},
          {"divergence",
           {{"divergent", div.divergent},
            {"first_exceedance", div.first_exceedance ? json(*div.first_exceedance) : json(nullptr)},
            {"growth_fallback", div.growth_fallback},
            {"threshold", run.divergence_threshold}}},
          {"oscillation", oscillation_json(traj, run)}};
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  return os.str();
}

struct SimulationRun {
  RecurrenceSpec spec;
  InitialConditions init;
  Trajectory traj;
};

// Fills out.report["simulation"]; returns the run when it completed.
std::optional<SimulationRun> run_simulation(const AnalysisConfig& cfg, CommandOutput& out) {
  const RecurrenceSpec spec = build_spec(cfg.spec);
  if (!cfg.init) throw ConfigError("simulate needs an init block");
  if (cfg.run.steps == 0) throw ConfigError("run.steps must be >= 1");
  const InitialConditions init = make_initial_conditions(*cfg.init, spec);
  const AdmissibilityReport adm = check_admissible(init, spec);
  out.report["admissibility"] = admissibility_json(adm);
  if (!adm.admissible) {
    out.exit_code = kExitInvalidInput;
    out.report["error"] = {{"kind", "inadmissible"}, {"message", adm.message}};
    return std::nullopt;
  }
  Trajectory traj = simulate(spec, init, static_cast<std::size_t>(cfg.run.steps), cfg.run.seed);
  out.report["summary"] = trajectory_summary(traj, cfg.run);
  return SimulationRun{spec, init, std::move(traj)};
}

// ---- certify ----------------------------------------------------------------

json bands_json(const CoefficientBands& b) {
  json terms = json::array();
  for (std::size_t i = 0; i < b.b_low.size(); ++i) terms.push_back(json::array({b.b_low[i], b.b_high[i]}));
  return {{"a", json::array({b.a_low, b.a_high})}, {"b", terms}};
}

json certificate_json(const BoundCertificate& c) {
  json verdicts = json::object();
  for (const auto& [key, v] : c.verdicts) {
    verdicts[key] = {{"status", to_string(v.status)}, {"detail", v.detail}};
  }
  const auto& s = c.selection;
  json cert = {{"variant", to_string(c.variant)},
               {"m", c.m},
               {"M", c.big_m},
               {"accepted", c.accepted},
               {"verdicts", verdicts},
               {"selection",
                {{"mu_p", s.mu_p},
                 {"nu_p", s.nu_p},
                 {"mu_r", s.mu_r},
                 {"nu_r", s.nu_r},
                 {"index", s.index},
                 {"cases", s.case_tag}}},
               {"step_range", json::array({c.step_low, c.step_high})},
               {"bands", bands_json(c.bands)}};
  if (c.accepted) {
    const auto [low, high] = inverse_bounds(c);
    cert["inverse_bounds"] = json::array({low, high});
  }
  return cert;
}

void run_certificate(const AnalysisConfig& cfg, CommandOutput& out) {
  const RecurrenceSpec spec = build_spec(cfg.spec);
  const CertificateBlock& block = cfg.run.certificate;
  const CoefficientBands bands = block.bands ? *block.bands : CoefficientBands::from_spec(spec);
  if (bands.b_low.size() != spec.q()) throw ConfigError("certificate bands do not match the term count");

  json section = {{"mode", block.mode}, {"boundedness_by_exponent", to_string(boundedness_by_exponent(spec))}};
  std::optional<BoundCertificate> cert;
  if (block.mode == "check") {
    if (!block.big_m) throw ConfigError("run.certificate.M is required in check mode");
    if (block.variant == "fixed-lower") {
      cert = check_certificate_fixed_lower(spec, *block.big_m, bands);
    } else {
      if (!block.m) throw ConfigError("run.certificate.m is required in check mode");
      if (block.variant == "single-term") {
        cert = check_certificate_q1(spec, *block.m, *block.big_m, bands);
      } else if (block.variant == "coefficient-band") {
        cert = check_certificate_band(spec, *block.m, *block.big_m, bands);
      } else {
        cert = check_certificate_general(spec, *block.m, *block.big_m, bands);
      }
    }
  } else {
    SearchBox box = SearchBox::around(bands);
    box.grid = block.grid;
    if (block.m_range) std::tie(box.m_low, box.m_high) = std::pair{(*block.m_range)[0], (*block.m_range)[1]};
    if (block.big_m_range) {
      std::tie(box.big_m_low, box.big_m_high) = std::pair{(*block.big_m_range)[0], (*block.big_m_range)[1]};
    }
    section["search_box"] = {{"m", json::array({box.m_low, box.m_high})},
                             {"M", json::array({box.big_m_low, box.big_m_high})},
                             {"grid", box.grid}};
    cert = search_certificate(spec, bands, box);
  }

  section["certificate"] = cert ? certificate_json(*cert) : json(nullptr);
  section["accepted"] = cert && cert->accepted;
  out.report["certify"] = section;
  if (!cert || !cert->accepted) out.exit_code = std::max(out.exit_code, kExitAnalysisFailure);
}

// ---- equilibria and stability -----------------------------------------------

json structure_json(const StructureReport& s) {
  auto ids = [](const std::vector<std::size_t>& v) {
    json out = json::array();
    for (std::size_t i : v) out.push_back(i + 1);
    return out;
  };
  return {{"q1", ids(s.q1)},
          {"q2", ids(s.q2)},
          {"q3", ids(s.q3)},
          {"zero_equilibrium_of_inverse", s.zero_equilibrium_of_inverse},
          {"unique_closed_form", s.unique_closed_form},
          {"nonexistence", s.nonexistence},
          {"nonexistence_sum", s.nonexistence_sum},
          {"unit_equilibrium", s.unit_equilibrium},
          {"unbounded_risk", s.unbounded_risk},
          {"oscillatory_regime", s.oscillatory_regime}};
}

json interval_json(const IntervalBounds& b) {
  json out = {{"rho", b.rho},
              {"delta", b.delta},
              {"b_total", b.b_total},
              {"omega", number_or_null(b.omega)},
              {"v", number_or_null(b.v)},
              {"lower", b.lower},
              {"upper", number_or_null(b.upper)},
              {"omega_cap", number_or_null(b.omega_cap)},
              {"v_cap", number_or_null(b.v_cap)},
              {"limsup_power_cap", number_or_null(b.limsup_power_cap)},
              {"rho_threshold", number_or_null(b.rho_threshold)},
              {"delta_threshold", number_or_null(b.delta_threshold)}};
  if (!b.omega_note.empty()) out["omega_note"] = b.omega_note;
  if (!b.v_note.empty()) out["v_note"] = b.v_note;
  return out;
}

json verdict_json(const StabilityVerdict& v) {
  json out = {{"state", to_string(v.stable)},
              {"max_root_modulus", v.max_root_modulus},
              {"method", to_string(v.method)},
              {"margin_band", v.margin_band},
              {"jury_stable", v.jury_stable},
              {"jury_degenerate", v.jury_degenerate}};
  if (!v.note.empty()) out["note"] = v.note;
  return out;
}

json polynomial_json(const CharPolynomial& p) {
  return {{"degree", p.degree()}, {"coefficients", coeffs_json(p.coeffs)}, {"point", p.point}, {"formula", p.formula}};
}

std::vector<double> log_points(double lo, double hi, int n) {
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    xs[static_cast<std::size_t>(i)] =
        i == 0 ? lo : i == n - 1 ? hi : std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1));
  }
  return xs;
}

struct EquilibriumRun {
  LimitSpec limits;
  SearchRange range;
  IntervalBounds interval;
  EquilibriumPartition partition;
};

EquilibriumRun run_equilibria(const AnalysisConfig& cfg, CommandOutput& out, bool detailed) {
  const RecurrenceSpec spec = build_spec(cfg.spec);
  EquilibriumRun run;
  run.limits = LimitSpec::from_spec(spec);
  run.range = cfg.run.equilibrium_range
                  ? SearchRange{(*cfg.run.equilibrium_range)[0], (*cfg.run.equilibrium_range)[1]}
                  : default_search_range(run.limits);
  RootOptions opts;
  opts.grid_points = cfg.run.equilibrium_grid;
  const auto points = find_equilibria(run.limits, run.range, opts);
  run.interval = equilibrium_interval_bounds(run.limits);
  const Pairing pairing = pairing_of(cfg.run);
  run.partition = classify_equilibria(run.limits, points, pairing, cfg.run.margin_band);

  json pts = json::array();
  json es = json::array();
  json eu = json::array();
  auto add = [&](const ClassifiedPoint& c, bool stable) {
    json p = {{"x", c.point.x},
              {"residual", c.point.residual},
              {"kind", to_string(c.point.kind)},
              {"class", stable ? "E_s" : "E_u"},
              {"stability", verdict_json(c.verdict)},
              {"polynomial", polynomial_json(c.polynomial)}};
    if (detailed) {
      // Sampled comparison against z^n, whose zeros all sit at the origin.
      Eigen::VectorXd ref = Eigen::VectorXd::Zero(c.polynomial.coeffs.size());
      ref(0) = 1.0;
      const RoucheResult rr = rouche_compare(c.polynomial.coeffs, ref, cfg.run.rouche_samples);
      p["rouche_vs_monomial"] = {{"verdict", to_string(rr.verdict)},
                                 {"max_ratio", rr.max_ratio},
                                 {"samples", rr.samples},
                                 {"sampled", true}};
      const Pairing other = pairing == Pairing::kDerivative ? Pairing::kPaperLiteral : Pairing::kDerivative;
      const CharPolynomial alt = characteristic_polynomial(run.limits, c.point.x, other);
      p["alternate_pairing"] = {{"pairing", to_string(other)},
                                {"polynomial", polynomial_json(alt)},
                                {"stability", verdict_json(schur_stable(alt, cfg.run.margin_band))}};
    }
    pts.push_back(p);
    (stable ? es : eu).push_back(c.point.x);
  };
  for (const auto& c : run.partition.stable) add(c, true);
  for (const auto& c : run.partition.unstable) add(c, false);
  std::stable_sort(pts.begin(), pts.end(),
                   [](const json& a, const json& b) { return a["x"].get<double>() < b["x"].get<double>(); });

  out.report["equilibria"] = {{"structure", structure_json(classify_structure(run.limits))},
                              {"interval_bounds", interval_json(run.interval)},
                              {"search_range", json::array({run.range.low, run.range.high})},
                              {"pairing", to_string(pairing)},
                              {"points", pts},
                              {"E_s", es},
                              {"E_u", eu}};

  std::ostringstream csv;
  csv << "x,residual,kind,class\n";
  for (const auto& p : pts) {
    csv << format_double(p["x"].get<double>()) << ',' << format_double(p["residual"].get<double>()) << ','
        << p["kind"].get<std::string>() << ',' << p["class"].get<std::string>() << '\n';
  }
  out.csv = csv.str();

  std::ostringstream res;
  res << "x,g\n";
  for (double x : log_points(run.range.low, run.range.high, cfg.run.residual_points)) {
    res << format_double(x) << ',' << format_double(equilibrium_residual(run.limits, x)) << '\n';
  }
  out.files["residual.csv"] = res.str();
  return run;
}

json envelope_stability_json(const EquilibriumRun& run, const RunBlock& cfg_run) {
  json sides = json::object();
  const Pairing pairing = pairing_of(cfg_run);
  for (const auto& [side, name, point] :
       {std::tuple{EnvelopeSide::kRho, "rho", run.interval.v}, std::tuple{EnvelopeSide::kDelta, "delta", run.interval.omega}}) {
    if (!point) {
      sides[name] = {{"available", false}};
      continue;
    }
    json polys = json::array();
    bool all_stable = true;
    for (const auto& poly : envelope_polynomials(run.limits, side, point, pairing)) {
      const StabilityVerdict v = schur_stable(poly, cfg_run.margin_band);
      all_stable = all_stable && v.stable == Stability::kStable;
      polys.push_back({{"polynomial", polynomial_json(poly)}, {"stability", verdict_json(v)}});
    }
    sides[name] = {{"available", true}, {"point", *point}, {"polynomials", polys}, {"all_stable", all_stable}};
  }

  bool unit_delays = true;
  for (std::size_t i = 0; i < run.limits.q(); ++i) {
    unit_delays = unit_delays && run.limits.ell[i] == 1 && run.limits.s[i] == 1;
  }
  json first_order = nullptr;
  if (unit_delays) {
    first_order = json::object();
    for (const auto& [name, point, e] : {std::tuple{"rho", run.interval.v, run.interval.rho},
                                         std::tuple{"delta", run.interval.omega, run.interval.delta}}) {
      if (!point) continue;
      const FirstOrderVerdict f = first_order_stability_condition(run.limits, *point, e);
      first_order[name] = {{"stable", f.stable}, {"bracket_holds", f.bracket_holds}, {"cap", f.cap}, {"threshold", f.threshold}};
    }
  }
  return {{"envelope_polynomials", sides},
          {"first_order_condition", first_order},
          {"exponent_displays",
           {{"used", "x^(p_i-r_i-1)"}, {"alternatives", json::array({"x^(p_i-r_i-1)", "x^(r_i+p_i-1)"})}}}};
}

// ---- envelopes for the combined report --------------------------------------

std::optional<std::string> envelope_files(const AnalysisConfig& cfg, const SimulationRun& sim,
                                          std::map<std::string, std::string>& files, json& section) {
  const auto& init = sim.init.values;
  if (!std::all_of(init.begin(), init.end(), [](double x) { return x > 0.0; })) {
    return "envelopes need a strictly positive initial window";
  }
  const EnvelopePair win = windowed_envelope(sim.spec, EnvelopeBands::from_spec(sim.spec), sim.init,
                                             static_cast<std::size_t>(cfg.run.steps));
  std::ostringstream os;
  write_envelope_csv(os, win);
  files["envelope.csv"] = os.str();
  section["windowed"] = {{"omega_last", win.omega.values.back()}, {"v_last", win.v.values.back()}};

  try {
    const LimitSpec limits = LimitSpec::from_spec(sim.spec);
    const auto rd = rho_delta(limits.p, limits.r);
    const auto [lo, hi] = std::minmax_element(init.begin(), init.end());
    const EnvelopePair sc = scalar_envelope(limits.a, limits.b_sum(), rd.rho, rd.delta, *lo, *hi,
                                            static_cast<std::size_t>(cfg.run.steps));
    std::ostringstream os2;
    write_envelope_csv(os2, sc);
    files["envelope_scalar.csv"] = os2.str();
    section["scalar"] = {{"omega_last", sc.omega.values.back()}, {"v_last", sc.v.values.back()}};
  } catch (const SpecError& e) {
    section["scalar"] = {{"note", e.what()}};
  }
  return std::nullopt;
}

}  // namespace

CommandOutput cmd_simulate(const AnalysisConfig& cfg) {
  return guarded(cfg, "simulate", [&](CommandOutput& out) {
    if (auto sim = run_simulation(cfg, out)) {
      out.csv = trajectory_csv(sim->traj);
      out.files["trajectory.csv"] = out.csv;
    }
  });
}

CommandOutput cmd_certify(const AnalysisConfig& cfg) {
  return guarded(cfg, "certify", [&](CommandOutput& out) { run_certificate(cfg, out); });
}

CommandOutput cmd_equilibria(const AnalysisConfig& cfg) {
  return guarded(cfg, "equilibria", [&](CommandOutput& out) { run_equilibria(cfg, out, false); });
}

CommandOutput cmd_stability(const AnalysisConfig& cfg) {
  return guarded(cfg, "stability", [&](CommandOutput& out) {
    const EquilibriumRun run = run_equilibria(cfg, out, true);
    out.report["stability"] = envelope_stability_json(run, cfg.run);
  });
}

CommandOutput cmd_report(const AnalysisConfig& cfg) {
  CommandOutput out;
  out.report = header(cfg, "report");
  auto merge = [&](const char* key, CommandOutput sub) {
    out.exit_code = std::max(out.exit_code, sub.exit_code);
    for (const char* h : {"tool", "version", "config_hash", "command", "seed"}) sub.report.erase(h);
    if (sub.report.contains(key)) {
      json inner = sub.report[key];
      sub.report.erase(key);
      sub.report.update(inner);
    }
    out.report[key] = sub.report;
    for (auto& [name, body] : sub.files) out.files[name] = std::move(body);
  };

  if (cfg.init) {
    merge("simulate", guarded(cfg, "simulate", [&](CommandOutput& sub) {
            auto sim = run_simulation(cfg, sub);
            if (!sim) return;
            sub.files["trajectory.csv"] = trajectory_csv(sim->traj);
            json env = json::object();
            if (auto note = envelope_files(cfg, *sim, sub.files, env)) env["note"] = *note;
            sub.report["envelopes"] = env;
          }));
  } else {
    out.report["simulate"] = {{"skipped", "no init block"}};
  }
  merge("certify", cmd_certify(cfg));
  merge("stability", cmd_stability(cfg));
  return out;
}

namespace {

void write_outputs(const OutputsBlock& o, const CommandOutput& res) {
  if (!o.enabled) return;
  std::filesystem::create_directories(o.dir);
  auto wanted = [&](const std::string& name) {
    if (name == "trajectory.csv") return o.trajectory;
    if (name.rfind("envelope", 0) == 0) return o.envelope;
    if (name == "residual.csv") return o.residual;
    return true;
  };
  for (const auto& [name, body] : res.files) {
    if (!wanted(name)) continue;
    std::ofstream f(std::filesystem::path(o.dir) / name, std::ios::binary);
    f << body;
    if (!f) throw std::runtime_error("cannot write " + name);
  }
  if (o.report) {
    std::ofstream f(std::filesystem::path(o.dir) / "report.json", std::ios::binary);
    f << res.report.dump(2) << '\n';
    if (!f) throw std::runtime_error("cannot write report.json");
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Analysis of rational recurrences with delays", kToolName};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> steps;
  std::string out_dir;
  std::string format = "json";
  for (const char* name : {"simulate", "certify", "equilibria", "stability", "report"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "analysis config (JSON)")->required();
    sub->add_option("--seed", seed, "override run.seed");
    sub->add_option("--steps", steps, "override run.steps");
    sub->add_option("--out", out_dir, "write files into this directory");
    sub->add_option("--format", format, "standard output format")->check(CLI::IsMember({"json", "csv"}));
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalidInput;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInvalidInput;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  if (format == "csv" && command != "simulate" && command != "equilibria") {
    err << "error: --format csv is available for simulate and equilibria only\n";
    return kExitInvalidInput;
  }

  AnalysisConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalidInput;
  }
  if (seed) cfg.run.seed = *seed;
  if (steps) cfg.run.steps = *steps;
  if (!out_dir.empty()) {
    if (!cfg.outputs) cfg.outputs = OutputsBlock{};
    cfg.outputs->enabled = true;
    cfg.outputs->dir = out_dir;
  }

  CommandOutput res;
  if (command == "simulate") {
    res = cmd_simulate(cfg);
  } else if (command == "certify") {
    res = cmd_certify(cfg);
  } else if (command == "equilibria") {
    res = cmd_equilibria(cfg);
  } else if (command == "stability") {
    res = cmd_stability(cfg);
  } else {
    res = cmd_report(cfg);
  }

  if (format == "csv") {
    out << res.csv;
  } else {
    out << res.report.dump(2) << '\n';
  }
  if (res.report.contains("error")) err << "error: " << res.report["error"]["message"].get<std::string>() << '\n';

  try {
    if (cfg.outputs) write_outputs(*cfg.outputs, res);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return std::max(res.exit_code, kExitAnalysisFailure);
  }
  return res.exit_code;
}

}  // namespace rdeq
