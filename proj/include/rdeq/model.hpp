#pragma once

// Parameterization of the rational recurrence
//
//   x_{k+1} = A_k + sum_i B_ik * x_{k+1-ell_i}^{p_i} / x_{k+1-s_i}^{r_i}
//
// together with admissibility of initial windows and the exponent extremes
// used by the boundedness certificates.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rdeq {

class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class CoefficientKind { kConstant, kConvergent, kBanded };

/// A coefficient sequence (A_k or B_ik) described by its band and, when it
/// has one, its limit.
///
/// - constant: c_k = value.
/// - convergent: c_k = limit + (start - limit) * decay^k, 0 <= decay < 1.
/// - banded: c_k drawn uniformly from [low, high] by a seeded generator; an
///   optional declared limit may be attached for equilibrium analysis.
struct CoefficientModel {
  CoefficientKind kind = CoefficientKind::kConstant;
  double low = 0.0;
  double high = 0.0;
  double start = 0.0;
  double decay = 0.0;
  std::optional<double> limit;

  static CoefficientModel constant(double value);
  static CoefficientModel convergent(double start, double limit, double decay);
  static CoefficientModel banded(double low, double high,
                                 std::optional<double> limit = std::nullopt);

  bool is_random() const { return kind == CoefficientKind::kBanded; }
  bool identically_zero() const { return low == 0.0 && high == 0.0; }

  /// Deterministic value at step k; banded models return the band midpoint.
  double deterministic_value(std::int64_t k) const;

  bool operator==(const CoefficientModel&) const = default;
};

struct Term {
  double p = 1.0;
  double r = 1.0;
  int ell = 1;
  int s = 1;
  CoefficientModel b;

  bool operator==(const Term&) const = default;
};

/// Unvalidated parameters as they come out of a config file.
struct RawSpec {
  CoefficientModel a;
  std::vector<Term> terms;

  bool operator==(const RawSpec&) const = default;
};

/// Validated recurrence. Only build_spec() creates one.
class RecurrenceSpec {
 public:
  const CoefficientModel& a() const { return a_; }
  std::span<const Term> terms() const { return terms_; }
  const Term& term(std::size_t i) const { return terms_.at(i); }
  std::size_t q() const { return terms_.size(); }

  int max_ell() const { return max_ell_; }
  int max_s() const { return max_s_; }
  /// Number of values in the initial window, max(ell, s).
  int window_size() const { return max_ell_ > max_s_ ? max_ell_ : max_s_; }
  /// Oldest index of the initial window, min(1 - ell, 1 - s).
  int window_start() const { return 1 - window_size(); }

  std::vector<double> p() const;
  std::vector<double> r() const;

  bool operator==(const RecurrenceSpec&) const = default;

 private:
  friend RecurrenceSpec build_spec(const RawSpec& raw);
  RecurrenceSpec() = default;

  CoefficientModel a_;
  std::vector<Term> terms_;
  int max_ell_ = 1;
  int max_s_ = 1;
};

/// Validates raw parameters. Throws SpecError on non-positive delays, an
/// empty term list, an A-band touching zero, or all B-bands identically zero.
RecurrenceSpec build_spec(const RawSpec& raw);

/// Initial window x_{start}, ..., x_0 stored oldest first.
struct InitialConditions {
  int start = 0;
  std::vector<double> values;

  static InitialConditions from_values(std::vector<double> oldest_first);
  static InitialConditions constant(const RecurrenceSpec& spec, double value);

  int end() const { return start + static_cast<int>(values.size()) - 1; }
  double at(int index) const { return values.at(static_cast<std::size_t>(index - start)); }
};

struct AdmissibilityReport {
  bool admissible = true;
  /// First index (closest to 0) that violates the positivity pattern.
  std::optional<int> first_violation;
  std::string message;
};

/// Strict positivity is required on every index that some denominator reads
/// at step 0 (x_0 ... x_{1-s}); the remaining older indices only need to be
/// nonnegative. Throws SpecError if the window is too short.
AdmissibilityReport check_admissible(const InitialConditions& init,
                                     const RecurrenceSpec& spec);

enum class ExponentSlot { kMuP = 0, kNuP = 1, kMuR = 2, kNuR = 3 };

struct ExponentSelection {
  double mu_p = 0.0;  // argmax_i M^{p_i - 1}
  double nu_p = 0.0;  // argmin_i m^{p_i - 1}
  double mu_r = 0.0;  // argmax_i m^{r_i}
  double nu_r = 0.0;  // argmin_i M^{r_i}
  std::array<std::size_t, 4> index{};
  /// Case label of the exponent-set decomposition that fired, per slot
  /// ("i.1" ... "iv.4").
  std::array<std::string, 4> case_tag;

  double slot(ExponentSlot s) const;
};

/// Direct argmax/argmin selection (ties resolved to the smallest index), with
/// the case labels of the decomposition filled in. Throws SpecError unless
/// 0 < m <= M.
ExponentSelection exponent_extremes(std::span<const double> p, std::span<const double> r,
                                    double m, double big_m);
ExponentSelection exponent_extremes(const RecurrenceSpec& spec, double m, double big_m);

/// The same four selections made through the case table that splits the
/// exponents into {p >= 1}, {p < 1}, {r >= 0}, {r < 0} and branches on
/// m, M >= 1. Used as an independent route to exponent_extremes().
ExponentSelection exponent_extremes_by_cases(std::span<const double> p,
                                             std::span<const double> r, double m,
                                             double big_m);

struct RhoDelta {
  double rho = 0.0;    // max_i (p_i - r_i)
  double delta = 0.0;  // min_i (p_i - r_i)
};

RhoDelta rho_delta(std::span<const double> p, std::span<const double> r);
RhoDelta rho_delta(const RecurrenceSpec& spec);

}  // namespace rdeq
