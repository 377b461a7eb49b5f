#pragma once

// Boundedness certificates: an interval [m, M] plus coefficient bands for
// which one induction step of the recurrence maps [m, M] into itself.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rdeq/model.hpp"

namespace rdeq {

/// a_m <= A_k <= a_M and b_m[i] <= B_ik <= b_M[i] for all k.
struct CoefficientBands {
  double a_low = 0.0;
  double a_high = 0.0;
  std::vector<double> b_low;
  std::vector<double> b_high;

  static CoefficientBands from_spec(const RecurrenceSpec& spec);

  double b_low_sum() const;
  double b_high_sum() const;
  /// 0 < a_m <= a_M, 0 <= b_m[i] <= b_M[i]. All-zero B bands are allowed.
  bool consistent() const;
  /// True when every coefficient model of `spec` stays inside these bands.
  bool encloses(const RecurrenceSpec& spec) const;

  bool operator==(const CoefficientBands&) const = default;
};

enum class VerdictStatus { kPass, kFail, kNotApplicable };

struct ConstraintVerdict {
  VerdictStatus status = VerdictStatus::kNotApplicable;
  std::string detail;

  bool passed() const { return status == VerdictStatus::kPass; }
  bool failed() const { return status == VerdictStatus::kFail; }
};

enum class CertificateVariant { kSingleTerm, kFixedLower, kCoefficientBand, kGeneral };

const char* to_string(CertificateVariant v);
const char* to_string(VerdictStatus s);

/// Verdicts are keyed by constraint label ("2.2" ... "2.18"); the key
/// "interval" holds the exact per-term interval bound of one recurrence step.
struct BoundCertificate {
  double m = 0.0;
  double big_m = 0.0;
  CoefficientBands bands;
  ExponentSelection selection;
  std::map<std::string, ConstraintVerdict> verdicts;
  bool accepted = false;
  CertificateVariant variant = CertificateVariant::kGeneral;
  /// Range of x_{k+1} over all windows in [m, M] and coefficients in the bands.
  double step_low = 0.0;
  double step_high = 0.0;
};

/// Relative slack used in every certificate inequality.
inline constexpr double kCertificateTolerance = 1e-12;

/// Single-term check: band consistency, a_m <= m, the sandwich inequality,
/// the necessary 1/r-power conditions (skipped for r <= 0), and the
/// band-ratio condition (reported, never part of `accepted`).
/// Throws SpecError if q != 1 or the interval is malformed.
BoundCertificate check_certificate_q1(const RecurrenceSpec& spec, double m, double big_m,
                                      const CoefficientBands& bands);

/// Single-term check with the lower end pinned to m = a_m.
BoundCertificate check_certificate_fixed_lower(const RecurrenceSpec& spec, double big_m,
                                               const CoefficientBands& bands);

/// Single-term check that constrains the coefficient band directly and
/// leaves a_m <= m out.
BoundCertificate check_certificate_band(const RecurrenceSpec& spec, double m, double big_m,
                                        const CoefficientBands& bands);

/// Multi-term check. Accepted iff the bands are consistent, the chain
///   m <= a_m + b_m m^{nu_p}/M^{mu_r} <= a_M + b_M M^{mu_p}/m^{nu_r} <= M
/// holds, and the exact interval step maps [m, M] into itself.
BoundCertificate check_certificate_general(const RecurrenceSpec& spec, double m, double big_m,
                                           const CoefficientBands& bands);

struct SearchBox {
  double m_low = 0.0;
  double m_high = 0.0;
  double big_m_low = 0.0;
  double big_m_high = 0.0;
  int grid = 64;

  static SearchBox around(const CoefficientBands& bands);
};

/// Log-spaced grid scan over (m, M), m <= M. Returns the accepted
/// certificate with the largest M/m (first in scan order on ties).
std::optional<BoundCertificate> search_certificate(const RecurrenceSpec& spec,
                                                   const CoefficientBands& bands,
                                                   const SearchBox& box);

/// (1/M, 1/m): bounds of the reciprocal recurrence under a reciprocal window.
std::pair<double, double> inverse_bounds(const BoundCertificate& cert);

enum class ExponentVerdict { kBounded, kInconclusive };
const char* to_string(ExponentVerdict v);

/// Bounded whenever every numerator exponent lies strictly inside (0, 1).
ExponentVerdict boundedness_by_exponent(const RecurrenceSpec& spec);

}  // namespace rdeq
