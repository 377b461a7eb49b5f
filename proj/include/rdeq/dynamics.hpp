#pragma once

// Trajectories of the recurrence and of its reciprocal form, bounding
// envelopes, and divergence / oscillation detectors.

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdeq/model.hpp"

namespace rdeq {

class SimulationError : public std::runtime_error {
 public:
  enum class Reason { kZeroDenominator, kNonFinite };

  SimulationError(Reason reason, std::int64_t step, const std::string& what)
      : std::runtime_error(what), reason_(reason), step_(step) {}

  Reason reason() const { return reason_; }
  /// Index k+1 of the value that could not be computed.
  std::int64_t step() const { return step_; }

 private:
  Reason reason_;
  std::int64_t step_;
};

/// Realized coefficient values; a[k] is A_k and b[k][i] is B_ik, k = 0 .. steps-1.
struct CoefficientTrace {
  std::vector<double> a;
  std::vector<std::vector<double>> b;

  std::size_t steps() const { return a.size(); }
  bool operator==(const CoefficientTrace&) const = default;
};

/// Draws A_k and every B_ik for `steps` steps. Banded models consume the
/// generator in the order A_k, B_1k, ..., B_qk at each k; deterministic models
/// do not touch it.
CoefficientTrace sample_coefficients(const RecurrenceSpec& spec, std::size_t steps,
                                     std::uint64_t seed);

struct Trajectory {
  int start_index = 0;
  std::vector<double> values;
  CoefficientTrace coefficients;

  std::size_t size() const { return values.size(); }
  int last_index() const { return start_index + static_cast<int>(values.size()) - 1; }
  double at(int k) const { return values.at(static_cast<std::size_t>(k - start_index)); }
};

/// Iterates the recurrence with a fresh coefficient trace drawn from `seed`.
/// Throws SpecError for inadmissible input, SimulationError on a zero
/// denominator or a non-finite value.
Trajectory simulate(const RecurrenceSpec& spec, const InitialConditions& init,
                    std::size_t steps, std::uint64_t seed = 0);

/// Same, driven by an explicit coefficient trace (its length sets the step count).
Trajectory simulate(const RecurrenceSpec& spec, const InitialConditions& init,
                    const CoefficientTrace& trace);

/// Iterates the reciprocal recurrence
///   y_{k+1} = 1 / (A_k + sum_i B_ik * y_{k+1-s_i}^{r_i} / y_{k+1-ell_i}^{p_i}),
/// which is what y = 1/x satisfies. Requires a strictly positive window.
Trajectory simulate_inverse(const RecurrenceSpec& spec, const InitialConditions& init,
                            std::size_t steps, std::uint64_t seed = 0);
Trajectory simulate_inverse(const RecurrenceSpec& spec, const InitialConditions& init,
                            const CoefficientTrace& trace);

/// x^e with 0^0 = 1; 0 to a negative power is reported by the caller.
double safe_pow(double x, double e);

enum class EnvelopeVariant { kScalar, kWindowed };

struct EnvelopePair {
  Trajectory omega;
  Trajectory v;
  EnvelopeVariant variant = EnvelopeVariant::kScalar;
};

/// First-order scalar envelopes
///   omega_{k+1} = A + B min(omega_k^delta, omega_k^rho)
///   v_{k+1}     = A + B max(v_k^rho, v_k^delta).
/// Throws SpecError for non-positive A, B or starting values.
EnvelopePair scalar_envelope(double a, double b, double rho, double delta, double omega0,
                             double v0, std::size_t steps);

/// Per-term coefficient bands used by the windowed envelope.
struct EnvelopeBands {
  double a_low = 0.0;
  double a_high = 0.0;
  std::vector<double> b_low;
  std::vector<double> b_high;

  static EnvelopeBands from_spec(const RecurrenceSpec& spec);
};

/// Windowed envelope: each step bounds every term over the box
/// [min window omega, max window v]^2 with the term's own exponents, so that
/// omega_k <= x_k <= v_k holds for every trajectory whose coefficients stay
/// inside `bands` and whose initial window equals `init`.
EnvelopePair windowed_envelope(const RecurrenceSpec& spec, const EnvelopeBands& bands,
                               const InitialConditions& init, std::size_t steps);

struct OscillationWitness {
  int k = 0;
  int n = 0;  // N_k
  int m = 0;  // M_k
};

struct OscillationOptions {
  int window_cap = 64;
  int scan = 256;
  /// Differences with |dx| <= zero_tolerance * |x| carry no sign.
  double zero_tolerance = 1e-13;
};

struct OscillationReport {
  bool oscillatory = false;
  std::vector<OscillationWitness> witnesses;
  int window_cap = 0;
  int scanned = 0;
};

/// For each scanned k >= 1 looks for N, M <= window_cap with
///   sign(x_{k+N+M} - x_{k+N}) = -sign(x_{k+N} - x_k), both nonzero.
/// The scan stops early at the first k after which the trajectory is
/// numerically stationary over the search horizon. Oscillatory iff at least one
/// k was scanned and every scanned k has a witness.
OscillationReport detect_oscillation(const Trajectory& traj, const OscillationOptions& opts = {});

struct DivergenceReport {
  bool divergent = false;
  std::optional<int> first_exceedance;
  bool growth_fallback = false;
};

/// Divergent iff some x_k > threshold, or the final 10% of the trajectory is
/// strictly increasing with non-decaying steps (last step >= half the first)
/// and ends at least 10x above the smallest post-window value.
DivergenceReport detect_divergence(const Trajectory& traj, double threshold = 1e12);

/// CSV with header `k,x`, 17 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
/// CSV with header `k,omega,v`.
void write_envelope_csv(std::ostream& out, const EnvelopePair& env);

/// %.17g rendering used by every exported number.
std::string format_double(double x);

}  // namespace rdeq
