#pragma once

// Equilibria of the limiting equation x = A + sum_i B_i x^{p_i - r_i}.

#include <optional>
#include <string>
#include <vector>

#include "rdeq/model.hpp"

namespace rdeq {

/// Limits A_k -> A, B_ik -> B_i with the exponents and delays of the spec.
struct LimitSpec {
  double a = 0.0;
  std::vector<double> b;
  std::vector<double> p;
  std::vector<double> r;
  std::vector<int> ell;
  std::vector<int> s;

  /// Throws SpecError when some coefficient model has no limit.
  static LimitSpec from_spec(const RecurrenceSpec& spec);

  std::size_t q() const { return b.size(); }
  double b_sum() const;
  /// Checks A > 0, B_i >= 0, sum B_i > 0 (unless allow_zero_b) and matching sizes.
  void validate(bool allow_zero_b = false) const;
};

/// g(x) = x - A - sum_i B_i x^{p_i - r_i}; zero exactly at equilibria.
double equilibrium_residual(const LimitSpec& limits, double x);

enum class EquilibriumKind { kInteriorRoot, kClosedForm, kUnitPoint };
const char* to_string(EquilibriumKind k);

struct EquilibriumPoint {
  double x = 0.0;
  double residual = 0.0;
  EquilibriumKind kind = EquilibriumKind::kInteriorRoot;
};

struct SearchRange {
  double low = 0.0;
  double high = 0.0;
};

/// [A, max(10 (A + sum B max(1, max_i A^{p_i - r_i})), 1e3)].
SearchRange default_search_range(const LimitSpec& limits);

struct RootOptions {
  int grid_points = 4096;
  double residual_tolerance = 1e-10;
  double dedup_relative = 1e-8;
};

/// Sign-change scan of g on a log grid over [max(low, A(1 - 1e-9)), high],
/// bisection inside each bracket, plus the closed form A / (1 - sum B) when
/// every term has p_i = r_i + 1. Sorted ascending, deduplicated.
std::vector<EquilibriumPoint> find_equilibria(const LimitSpec& limits, const SearchRange& range,
                                              const RootOptions& opts = {});

/// Tolerance for the index-set membership test r_i = p_i - 1.
inline constexpr double kStructureTolerance = 1e-12;

struct StructureReport {
  std::vector<std::size_t> q1;  // r_i = p_i - 1
  std::vector<std::size_t> q2;  // r_i > p_i - 1
  std::vector<std::size_t> q3;  // r_i < p_i - 1

  bool zero_equilibrium_of_inverse = false;
  bool unique_closed_form = false;
  bool nonexistence = false;
  bool unit_equilibrium = false;
  bool unbounded_risk = false;
  bool oscillatory_regime = false;

  /// sum_{Q1} B_i + sum_{Q3} B_i A^{|r_i - p_i + 1|}
  double nonexistence_sum = 0.0;
};

StructureReport classify_structure(const LimitSpec& limits,
                                   double tolerance = kStructureTolerance);

/// Bounds that enclose every equilibrium, from the scalar envelope maps
///   omega = A + B min(omega^delta, omega^rho),   v = A + B max(v^rho, v^delta).
struct IntervalBounds {
  double rho = 0.0;
  double delta = 0.0;
  double b_total = 0.0;

  std::optional<double> omega;  // smallest root >= A; needs delta < 0
  std::optional<double> v;      // unique root; needs rho < 0
  std::string omega_note;
  std::string v_note;

  double lower = 0.0;  // max(A, omega) or A
  std::optional<double> upper;

  /// Analytic caps, A >= 1: A + B/A^{|delta|}, A + B/A^{|rho|}.
  /// A < 1: A + B min(1/A^{|delta|}, A^rho) and A + B min(1/A^{|delta|}, 1/A^{|rho|}).
  std::optional<double> omega_cap;
  std::optional<double> v_cap;
  /// (A + B/A^{|rho|})^{|rho|+1}, the limsup cap in its other displayed form.
  std::optional<double> limsup_power_cap;
  /// |rho|^{1/(|rho|+1)} and |delta|^{1/(|delta|+1)}.
  std::optional<double> rho_threshold;
  std::optional<double> delta_threshold;
};

IntervalBounds equilibrium_interval_bounds(const LimitSpec& limits);

struct FirstOrderVerdict {
  bool stable = false;
  /// (A + B/A^{|e|}) >= point > |e|^{1/(|e|+1)}.
  bool bracket_holds = false;
  double cap = 0.0;
  double threshold = 0.0;
};

/// point^{|e|+1} > |e|. Only meaningful when every delay equals 1; throws
/// SpecError otherwise.
FirstOrderVerdict first_order_stability_condition(const LimitSpec& limits, double point,
                                                  double exponent);

}  // namespace rdeq
