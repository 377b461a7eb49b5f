#pragma once

// Local stability of equilibria through the characteristic polynomial of the
// linearized recurrence.

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdeq/equilibrium.hpp"
#include "rdeq/polynomial.hpp"

namespace rdeq {

/// Raised when the eigenvalue and Jury routes disagree outside the margin band.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Which lag each exponent is paired with in the linearization.
///  - kDerivative: p_i with ell_i and r_i with s_i (differentiating the recurrence).
///  - kPaperLiteral: z^n + sum B_i x^{p_i-r_i-1} (p_i z^{n-s_i} - r_i z^{n-ell_i}).
enum class Pairing { kDerivative, kPaperLiteral };
const char* to_string(Pairing p);

/// Monic real polynomial, coefficients highest degree first (coeffs(0) == 1).
struct CharPolynomial {
  Eigen::VectorXd coeffs;
  double point = 0.0;
  std::string formula;

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

/// T(x, z) = z^n - sum_i B_i x^{p_i-r_i-1} (p_i z^{n-ell_i} - r_i z^{n-s_i}),
/// n = max(max ell_i, max s_i).
CharPolynomial characteristic_polynomial(const LimitSpec& limits, double x,
                                         Pairing pairing = Pairing::kDerivative);

enum class EnvelopeSide { kRho, kDelta };

/// One polynomial per term j whose p_j - r_j equals rho (or delta):
///   z^{n_j} - point^{e-1} B (p_j z^{n_j-ell_j} - r_j z^{n_j-s_j}),  n_j = max(s_j, ell_j),
/// with B = sum B_i and e the side's exponent. Throws SpecError when `point`
/// is absent (side unavailable).
std::vector<CharPolynomial> envelope_polynomials(const LimitSpec& limits, EnvelopeSide side,
                                                 std::optional<double> point,
                                                 Pairing pairing = Pairing::kDerivative);

enum class Stability { kStable, kUnstable, kMarginal };
const char* to_string(Stability s);

enum class StabilityMethod { kEigenvalue, kJury, kRouche };
const char* to_string(StabilityMethod m);

struct StabilityVerdict {
  Stability stable = Stability::kMarginal;
  double max_root_modulus = 0.0;
  StabilityMethod method = StabilityMethod::kEigenvalue;
  double margin_band = 1e-8;
  bool jury_stable = false;
  bool jury_degenerate = false;
  std::string note;
};

/// Eigenvalue verdict with a Jury cross-check. Throws SpecError for
/// non-finite or non-monic input, ConsistencyError on disagreement outside
/// the margin band.
StabilityVerdict schur_stable(const CharPolynomial& poly, double margin_band = 1e-8);
StabilityVerdict schur_stable(const Eigen::VectorXd& monic, double margin_band = 1e-8);

struct RoucheResult {
  RoucheVerdict verdict = RoucheVerdict::kInconclusive;
  double max_ratio = 0.0;
  int samples = 0;
};
const char* to_string(RoucheVerdict v);

/// Sufficiency test against a reference known to be Schur stable. Throws
/// SpecError on degree mismatch or when the reference is not stable.
RoucheResult rouche_compare(const Eigen::VectorXd& t, const Eigen::VectorXd& reference,
                            int samples = 4096);

struct ClassifiedPoint {
  EquilibriumPoint point;
  CharPolynomial polynomial;
  StabilityVerdict verdict;
};

struct EquilibriumPartition {
  std::vector<ClassifiedPoint> stable;    // locally asymptotically stable
  std::vector<ClassifiedPoint> unstable;  // unstable or marginal
};

EquilibriumPartition classify_equilibria(const LimitSpec& limits,
                                         const std::vector<EquilibriumPoint>& points,
                                         Pairing pairing = Pairing::kDerivative,
                                         double margin_band = 1e-8);

}  // namespace rdeq
