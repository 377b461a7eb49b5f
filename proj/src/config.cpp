#include "rdeq/config.hpp"

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace rdeq {

using nlohmann::json;

namespace {

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

void reject_unknown(const json& j, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

const json& field(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(where + ": missing '" + key + "'");
  return *it;
}

double as_double(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + ": expected a number");
  return v.get<double>();
}

std::int64_t as_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return v.get<std::int64_t>();
}

std::uint64_t as_u64(const json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
  throw ConfigError(where + ": expected a nonnegative integer");
}

int as_positive_int(const json& v, const std::string& where) {
  const std::int64_t x = as_int(v, where);
  if (x < 1 || x > 1'000'000'000) throw ConfigError(where + ": expected a positive integer");
  return static_cast<int>(x);
}

bool as_bool(const json& v, const std::string& where) {
  if (!v.is_boolean()) throw ConfigError(where + ": expected true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) throw ConfigError(where + ": expected a string");
  return v.get<std::string>();
}

std::string one_of(const json& v, const std::string& where, std::initializer_list<const char*> options) {
  const std::string s = as_string(v, where);
  for (const char* o : options) {
    if (s == o) return s;
  }
  throw ConfigError(where + ": unsupported value '" + s + "'");
}

Range as_range(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2) throw ConfigError(where + ": expected [low, high]");
  Range r{as_double(v[0], where), as_double(v[1], where)};
  if (!(r[0] > 0.0 && r[0] <= r[1])) throw ConfigError(where + ": expected 0 < low <= high");
  return r;
}

CoefficientModel parse_coefficient(const json& j, const std::string& where) {
  require_object(j, where);
  const std::string kind = one_of(field(j, "kind", where), where + ".kind",
                                  {"constant", "convergent", "banded"});
  try {
    if (kind == "constant") {
      reject_unknown(j, where, {"kind", "value"});
      return CoefficientModel::constant(as_double(field(j, "value", where), where + ".value"));
    }
    if (kind == "convergent") {
      reject_unknown(j, where, {"kind", "start", "limit", "decay"});
      return CoefficientModel::convergent(as_double(field(j, "start", where), where + ".start"),
                                          as_double(field(j, "limit", where), where + ".limit"),
                                          as_double(field(j, "decay", where), where + ".decay"));
    }
    reject_unknown(j, where, {"kind", "low", "high", "limit"});
    std::optional<double> limit;
    if (j.contains("limit")) limit = as_double(j["limit"], where + ".limit");
    return CoefficientModel::banded(as_double(field(j, "low", where), where + ".low"),
                                    as_double(field(j, "high", where), where + ".high"), limit);
  } catch (const SpecError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

json coefficient_json(const CoefficientModel& c) {
  switch (c.kind) {
    case CoefficientKind::kConstant:
      return {{"kind", "constant"}, {"value", c.low}};
    case CoefficientKind::kConvergent:
      return {{"kind", "convergent"}, {"start", c.start}, {"limit", *c.limit}, {"decay", c.decay}};
    case CoefficientKind::kBanded: {
      json j = {{"kind", "banded"}, {"low", c.low}, {"high", c.high}};
      if (c.limit) j["limit"] = *c.limit;
      return j;
    }
  }
  return {};
}

RawSpec parse_spec(const json& j) {
  const std::string where = "spec";
  require_object(j, where);
  reject_unknown(j, where, {"a", "terms"});
  RawSpec raw;
  raw.a = parse_coefficient(field(j, "a", where), "spec.a");
  const json& terms = field(j, "terms", where);
  if (!terms.is_array()) throw ConfigError("spec.terms: expected an array");
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const std::string w = "spec.terms[" + std::to_string(i) + "]";
    const json& t = terms[i];
    require_object(t, w);
    reject_unknown(t, w, {"p", "r", "ell", "s", "b"});
    Term term;
    term.p = as_double(field(t, "p", w), w + ".p");
    term.r = as_double(field(t, "r", w), w + ".r");
    const std::int64_t ell = as_int(field(t, "ell", w), w + ".ell");
    const std::int64_t s = as_int(field(t, "s", w), w + ".s");
    if (ell < -1'000'000 || ell > 1'000'000 || s < -1'000'000 || s > 1'000'000) {
      throw ConfigError(w + ": delay out of range");
    }
    term.ell = static_cast<int>(ell);
    term.s = static_cast<int>(s);
    term.b = parse_coefficient(field(t, "b", w), w + ".b");
    raw.terms.push_back(term);
  }
  return raw;
}

InitBlock parse_init(const json& j) {
  require_object(j, "init");
  reject_unknown(j, "init", {"values", "constant"});
  InitBlock init;
  if (j.contains("values")) {
    const json& v = j["values"];
    if (!v.is_array() || v.empty()) throw ConfigError("init.values: expected a nonempty array");
    std::vector<double> values;
    for (const auto& x : v) values.push_back(as_double(x, "init.values"));
    init.values = std::move(values);
  }
  if (j.contains("constant")) init.constant = as_double(j["constant"], "init.constant");
  if (init.values.has_value() == init.constant.has_value()) {
    throw ConfigError("init: give exactly one of 'values' and 'constant'");
  }
  return init;
}

CoefficientBands parse_bands(const json& j) {
  const std::string where = "run.certificate.bands";
  require_object(j, where);
  reject_unknown(j, where, {"a", "b"});
  CoefficientBands bands;
  const json& a = field(j, "a", where);
  if (!a.is_array() || a.size() != 2) throw ConfigError(where + ".a: expected [low, high]");
  bands.a_low = as_double(a[0], where + ".a");
  bands.a_high = as_double(a[1], where + ".a");
  const json& b = field(j, "b", where);
  if (!b.is_array() || b.empty()) throw ConfigError(where + ".b: expected a nonempty array");
  for (const auto& band : b) {
    if (!band.is_array() || band.size() != 2) throw ConfigError(where + ".b: expected [low, high] pairs");
    bands.b_low.push_back(as_double(band[0], where + ".b"));
    bands.b_high.push_back(as_double(band[1], where + ".b"));
  }
  if (!bands.consistent()) throw ConfigError(where + ": inconsistent bands");
  return bands;
}

CertificateBlock parse_certificate(const json& j) {
  const std::string where = "run.certificate";
  require_object(j, where);
  reject_unknown(j, where, {"mode", "variant", "m", "M", "grid", "m_range", "M_range", "bands"});
  CertificateBlock c;
  if (j.contains("mode")) c.mode = one_of(j["mode"], where + ".mode", {"search", "check"});
  if (j.contains("variant")) {
    c.variant = one_of(j["variant"], where + ".variant",
                       {"general", "single-term", "fixed-lower", "coefficient-band"});
  }
  if (j.contains("m")) c.m = as_double(j["m"], where + ".m");
  if (j.contains("M")) c.big_m = as_double(j["M"], where + ".M");
  if (j.contains("grid")) c.grid = as_positive_int(j["grid"], where + ".grid");
  if (j.contains("m_range")) c.m_range = as_range(j["m_range"], where + ".m_range");
  if (j.contains("M_range")) c.big_m_range = as_range(j["M_range"], where + ".M_range");
  if (j.contains("bands")) c.bands = parse_bands(j["bands"]);
  return c;
}

RunBlock parse_run(const json& j) {
  const std::string w = "run";
  require_object(j, w);
  reject_unknown(j, w,
                 {"steps", "seed", "divergence_threshold", "oscillation_window_cap", "oscillation_scan",
                  "oscillation_zero_tolerance", "margin_band", "equilibrium_grid", "equilibrium_range",
                  "rouche_samples", "residual_points", "pairing", "certificate"});
  RunBlock run;
  if (j.contains("steps")) run.steps = as_u64(j["steps"], "run.steps");
  if (j.contains("seed")) run.seed = as_u64(j["seed"], "run.seed");
  if (j.contains("divergence_threshold")) {
    run.divergence_threshold = as_double(j["divergence_threshold"], "run.divergence_threshold");
    if (!(run.divergence_threshold > 0.0)) throw ConfigError("run.divergence_threshold: must be positive");
  }
  if (j.contains("oscillation_window_cap")) {
    run.oscillation_window_cap = as_positive_int(j["oscillation_window_cap"], "run.oscillation_window_cap");
  }
  if (j.contains("oscillation_scan")) {
    run.oscillation_scan = as_positive_int(j["oscillation_scan"], "run.oscillation_scan");
  }
  if (j.contains("oscillation_zero_tolerance")) {
    run.oscillation_zero_tolerance =
        as_double(j["oscillation_zero_tolerance"], "run.oscillation_zero_tolerance");
    if (!(run.oscillation_zero_tolerance >= 0.0)) {
      throw ConfigError("run.oscillation_zero_tolerance: must be nonnegative");
    }
  }
  if (j.contains("margin_band")) {
    run.margin_band = as_double(j["margin_band"], "run.margin_band");
    if (!(run.margin_band >= 0.0)) throw ConfigError("run.margin_band: must be nonnegative");
  }
  if (j.contains("equilibrium_grid")) {
    run.equilibrium_grid = as_positive_int(j["equilibrium_grid"], "run.equilibrium_grid");
    if (run.equilibrium_grid < 2) throw ConfigError("run.equilibrium_grid: need at least 2 points");
  }
  if (j.contains("equilibrium_range")) run.equilibrium_range = as_range(j["equilibrium_range"], "run.equilibrium_range");
  if (j.contains("rouche_samples")) run.rouche_samples = as_positive_int(j["rouche_samples"], "run.rouche_samples");
  if (j.contains("residual_points")) {
    run.residual_points = as_positive_int(j["residual_points"], "run.residual_points");
    if (run.residual_points < 2) throw ConfigError("run.residual_points: need at least 2 points");
  }
  if (j.contains("pairing")) run.pairing = one_of(j["pairing"], "run.pairing", {"derivative", "literal"});
  if (j.contains("certificate")) run.certificate = parse_certificate(j["certificate"]);
  return run;
}

OutputsBlock parse_outputs(const json& j) {
  const std::string w = "outputs";
  require_object(j, w);
  reject_unknown(j, w, {"enabled", "dir", "trajectory", "report", "envelope", "residual"});
  OutputsBlock o;
  if (j.contains("enabled")) o.enabled = as_bool(j["enabled"], "outputs.enabled");
  if (j.contains("dir")) o.dir = as_string(j["dir"], "outputs.dir");
  if (j.contains("trajectory")) o.trajectory = as_bool(j["trajectory"], "outputs.trajectory");
  if (j.contains("report")) o.report = as_bool(j["report"], "outputs.report");
  if (j.contains("envelope")) o.envelope = as_bool(j["envelope"], "outputs.envelope");
  if (j.contains("residual")) o.residual = as_bool(j["residual"], "outputs.residual");
  return o;
}

json range_json(const Range& r) { return json::array({r[0], r[1]}); }

}  // namespace

AnalysisConfig parse_config(const json& j) {
  require_object(j, "config");
  reject_unknown(j, "config", {"spec", "init", "run", "outputs"});
  AnalysisConfig cfg;
  cfg.spec = parse_spec(field(j, "spec", "config"));
  if (j.contains("init")) cfg.init = parse_init(j["init"]);
  if (j.contains("run")) cfg.run = parse_run(j["run"]);
  if (j.contains("outputs")) cfg.outputs = parse_outputs(j["outputs"]);
  return cfg;
}

AnalysisConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

AnalysisConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

json to_json(const AnalysisConfig& cfg) {
  json terms = json::array();
  for (const Term& t : cfg.spec.terms) {
    terms.push_back({{"p", t.p}, {"r", t.r}, {"ell", t.ell}, {"s", t.s}, {"b", coefficient_json(t.b)}});
  }
  json j;
  j["spec"] = {{"a", coefficient_json(cfg.spec.a)}, {"terms", terms}};

  if (cfg.init) {
    json init = json::object();
    if (cfg.init->values) init["values"] = *cfg.init->values;
    if (cfg.init->constant) init["constant"] = *cfg.init->constant;
    j["init"] = init;
  }

  const RunBlock& r = cfg.run;
  json run = {{"steps", r.steps},
              {"seed", r.seed},
              {"divergence_threshold", r.divergence_threshold},
              {"oscillation_window_cap", r.oscillation_window_cap},
              {"oscillation_scan", r.oscillation_scan},
              {"oscillation_zero_tolerance", r.oscillation_zero_tolerance},
              {"margin_band", r.margin_band},
              {"equilibrium_grid", r.equilibrium_grid},
              {"rouche_samples", r.rouche_samples},
              {"residual_points", r.residual_points},
              {"pairing", r.pairing}};
  if (r.equilibrium_range) run["equilibrium_range"] = range_json(*r.equilibrium_range);

  const CertificateBlock& c = r.certificate;
  json cert = {{"mode", c.mode}, {"variant", c.variant}, {"grid", c.grid}};
  if (c.m) cert["m"] = *c.m;
  if (c.big_m) cert["M"] = *c.big_m;
  if (c.m_range) cert["m_range"] = range_json(*c.m_range);
  if (c.big_m_range) cert["M_range"] = range_json(*c.big_m_range);
  if (c.bands) {
    json b = json::array();
    for (std::size_t i = 0; i < c.bands->b_low.size(); ++i) {
      b.push_back(json::array({c.bands->b_low[i], c.bands->b_high[i]}));
    }
    cert["bands"] = {{"a", json::array({c.bands->a_low, c.bands->a_high})}, {"b", b}};
  }
  run["certificate"] = cert;
  j["run"] = run;

  if (cfg.outputs) {
    const OutputsBlock& o = *cfg.outputs;
    j["outputs"] = {{"enabled", o.enabled},       {"dir", o.dir},
                    {"trajectory", o.trajectory}, {"report", o.report},
                    {"envelope", o.envelope},     {"residual", o.residual}};
  }
  return j;
}

std::string serialize_config(const AnalysisConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

std::string config_hash(const AnalysisConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(cfg).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

InitialConditions make_initial_conditions(const InitBlock& init, const RecurrenceSpec& spec) {
  if (init.constant) return InitialConditions::constant(spec, *init.constant);
  auto ic = InitialConditions::from_values(*init.values);
  if (static_cast<int>(ic.values.size()) < spec.window_size()) {
    throw SpecError("init.values: window needs " + std::to_string(spec.window_size()) + " values, got " +
                    std::to_string(ic.values.size()));
  }
  return ic;
}

}  // namespace rdeq
