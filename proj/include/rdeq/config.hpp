#pragma once

// JSON analysis configs: one file describes one reproducible experiment.
//
//   {
//     "spec":    {"a": <coefficient>, "terms": [{"p", "r", "ell", "s", "b": <coefficient>}]},
//     "init":    {"values": [oldest, ..., x_0]}  or  {"constant": c},
//     "run":     {"steps", "seed", ..., "certificate": {...}},
//     "outputs": {"dir", "trajectory", "report", "envelope", "residual"}
//   }
//
// <coefficient> is {"kind": "constant", "value"}, {"kind": "convergent",
// "start", "limit", "decay"} or {"kind": "banded", "low", "high", "limit"?}.
// Unknown keys are rejected at every level.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rdeq/bounds.hpp"
#include "rdeq/model.hpp"

namespace rdeq {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Range = std::array<double, 2>;

struct CertificateBlock {
  std::string mode = "search";      // "search" | "check"
  std::string variant = "general";  // see to_string(CertificateVariant)
  std::optional<double> m;
  std::optional<double> big_m;
  int grid = 64;
  std::optional<Range> m_range;
  std::optional<Range> big_m_range;
  /// Replaces the bands derived from the spec.
  std::optional<CoefficientBands> bands;

  bool operator==(const CertificateBlock&) const = default;
};

struct RunBlock {
  std::uint64_t steps = 100;
  std::uint64_t seed = 0;
  double divergence_threshold = 1e12;
  int oscillation_window_cap = 64;
  int oscillation_scan = 256;
  double oscillation_zero_tolerance = 1e-13;
  double margin_band = 1e-8;
  int equilibrium_grid = 4096;
  std::optional<Range> equilibrium_range;
  int rouche_samples = 4096;
  int residual_points = 256;
  std::string pairing = "derivative";  // "derivative" | "literal"
  CertificateBlock certificate;

  bool operator==(const RunBlock&) const = default;
};

struct InitBlock {
  std::optional<std::vector<double>> values;
  std::optional<double> constant;

  bool operator==(const InitBlock&) const = default;
};

struct OutputsBlock {
  bool enabled = true;
  std::string dir = "out";
  bool trajectory = true;
  bool report = true;
  bool envelope = true;
  bool residual = true;

  bool operator==(const OutputsBlock&) const = default;
};

struct AnalysisConfig {
  RawSpec spec;
  std::optional<InitBlock> init;
  RunBlock run;
  std::optional<OutputsBlock> outputs;

  bool operator==(const AnalysisConfig&) const = default;
};

/// Throws ConfigError on malformed JSON, wrong types, unknown keys or values
/// outside their domain. Spec invariants are checked later by build_spec().
AnalysisConfig parse_config(const nlohmann::json& j);
AnalysisConfig parse_config_text(const std::string& text);
AnalysisConfig load_config(const std::string& path);

/// Every field written explicitly, so parse(to_json(c)) == c.
nlohmann::json to_json(const AnalysisConfig& cfg);
std::string serialize_config(const AnalysisConfig& cfg);

/// 64-bit FNV-1a of the compact canonical serialization, as 16 hex digits.
std::string config_hash(const AnalysisConfig& cfg);

/// Initial window of the given spec described by the init block.
InitialConditions make_initial_conditions(const InitBlock& init, const RecurrenceSpec& spec);

}  // namespace rdeq
