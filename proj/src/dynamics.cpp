#include "rdeq/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace rdeq {

double safe_pow(double x, double e) {
  if (e == 0.0) return 1.0;
  return std::pow(x, e);
}

CoefficientTrace sample_coefficients(const RecurrenceSpec& spec, std::size_t steps,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto draw = [&rng](const CoefficientModel& c, std::int64_t k) {
    if (!c.is_random()) return c.deterministic_value(k);
    if (c.low == c.high) return c.low;
    return std::uniform_real_distribution<double>(c.low, c.high)(rng);
  };

  CoefficientTrace trace;
  trace.a.resize(steps);
  trace.b.assign(steps, std::vector<double>(spec.q()));
  for (std::size_t k = 0; k < steps; ++k) {
    const auto kk = static_cast<std::int64_t>(k);
    trace.a[k] = draw(spec.a(), kk);
    for (std::size_t i = 0; i < spec.q(); ++i) trace.b[k][i] = draw(spec.term(i).b, kk);
  }
  return trace;
}

namespace {

void check_trace(const RecurrenceSpec& spec, const CoefficientTrace& trace) {
  if (trace.steps() == 0) throw SpecError("steps must be >= 1");
  if (trace.b.size() != trace.a.size()) throw SpecError("coefficient trace is ragged");
  for (const auto& row : trace.b) {
    if (row.size() != spec.q()) throw SpecError("coefficient trace has wrong term count");
  }
}

Trajectory start_trajectory(const RecurrenceSpec& spec, const InitialConditions& init,
                            const CoefficientTrace& trace) {
  check_trace(spec, trace);
  if (init.end() != 0 || init.start > spec.window_start()) {
    throw SpecError("initial window does not cover the delays of the recurrence");
  }
  Trajectory traj;
  traj.start_index = init.start;
  traj.values.reserve(init.values.size() + trace.steps());
  traj.values = init.values;
  traj.coefficients = trace;
  return traj;
}

[[noreturn]] void fail(SimulationError::Reason reason, std::int64_t step) {
  const char* what = reason == SimulationError::Reason::kZeroDenominator
                         ? "zero denominator at step "
                         : "non-finite value at step ";
  throw SimulationError(reason, step, what + std::to_string(step));
}

}  // namespace

Trajectory simulate(const RecurrenceSpec& spec, const InitialConditions& init,
                    const CoefficientTrace& trace) {
  const auto admissible = check_admissible(init, spec);
  if (!admissible.admissible) throw SpecError("inadmissible initial conditions: " + admissible.message);

  Trajectory traj = start_trajectory(spec, init, trace);
  auto& x = traj.values;
  for (std::size_t k = 0; k < trace.steps(); ++k) {
    const std::size_t next = x.size();  // position of x_{k+1}
    const auto step = static_cast<std::int64_t>(k) + 1;
    double sum = trace.a[k];
    for (std::size_t i = 0; i < spec.q(); ++i) {
      const Term& t = spec.term(i);
      const double num = x[next - static_cast<std::size_t>(t.ell)];
      const double den = x[next - static_cast<std::size_t>(t.s)];
      if ((den == 0.0 && t.r > 0.0) || (num == 0.0 && t.p < 0.0)) {
        fail(SimulationError::Reason::kZeroDenominator, step);
      }
      sum += trace.b[k][i] * safe_pow(num, t.p) / safe_pow(den, t.r);
    }
    if (!std::isfinite(sum)) fail(SimulationError::Reason::kNonFinite, step);
    x.push_back(sum);
  }
  return traj;
}

Trajectory simulate(const RecurrenceSpec& spec, const InitialConditions& init,
                    std::size_t steps, std::uint64_t seed) {
  if (steps == 0) throw SpecError("steps must be >= 1");
  return simulate(spec, init, sample_coefficients(spec, steps, seed));
}

Trajectory simulate_inverse(const RecurrenceSpec& spec, const InitialConditions& init,
                            const CoefficientTrace& trace) {
  for (double y : init.values) {
    if (!(y > 0.0) || !std::isfinite(y)) {
      throw SpecError("reciprocal recurrence needs a strictly positive initial window");
    }
  }
  Trajectory traj = start_trajectory(spec, init, trace);
  auto& y = traj.values;
  for (std::size_t k = 0; k < trace.steps(); ++k) {
    const std::size_t next = y.size();
    const auto step = static_cast<std::int64_t>(k) + 1;
    double denom = trace.a[k];
    for (std::size_t i = 0; i < spec.q(); ++i) {
      const Term& t = spec.term(i);
      const double lagged_s = y[next - static_cast<std::size_t>(t.s)];
      const double lagged_ell = y[next - static_cast<std::size_t>(t.ell)];
      denom += trace.b[k][i] * safe_pow(lagged_s, t.r) / safe_pow(lagged_ell, t.p);
    }
    if (denom == 0.0) fail(SimulationError::Reason::kZeroDenominator, step);
    const double value = 1.0 / denom;
    if (!std::isfinite(value) || !std::isfinite(denom)) {
      fail(SimulationError::Reason::kNonFinite, step);
    }
    y.push_back(value);
  }
  return traj;
}

Trajectory simulate_inverse(const RecurrenceSpec& spec, const InitialConditions& init,
                            std::size_t steps, std::uint64_t seed) {
  if (steps == 0) throw SpecError("steps must be >= 1");
  return simulate_inverse(spec, init, sample_coefficients(spec, steps, seed));
}

EnvelopePair scalar_envelope(double a, double b, double rho, double delta, double omega0,
                             double v0, std::size_t steps) {
  if (!(a > 0.0) || !(b > 0.0)) throw SpecError("envelope needs A > 0 and B > 0");
  if (!(omega0 > 0.0) || !(v0 > 0.0)) throw SpecError("envelope starting values must be positive");
  if (delta > rho) throw SpecError("envelope needs delta <= rho");

  EnvelopePair env;
  env.variant = EnvelopeVariant::kScalar;
  env.omega.values.reserve(steps + 1);
  env.v.values.reserve(steps + 1);
  env.omega.values.push_back(omega0);
  env.v.values.push_back(v0);
  for (std::size_t k = 0; k < steps; ++k) {
    const double w = env.omega.values.back();
    const double u = env.v.values.back();
    env.omega.values.push_back(a + b * std::min(std::pow(w, delta), std::pow(w, rho)));
    env.v.values.push_back(a + b * std::max(std::pow(u, rho), std::pow(u, delta)));
  }
  return env;
}

EnvelopeBands EnvelopeBands::from_spec(const RecurrenceSpec& spec) {
  EnvelopeBands bands;
  bands.a_low = spec.a().low;
  bands.a_high = spec.a().high;
  for (const auto& t : spec.terms()) {
    bands.b_low.push_back(t.b.low);
    bands.b_high.push_back(t.b.high);
  }
  return bands;
}

namespace {
constexpr double kOutwardRounding = 1e-14;
}  // namespace

EnvelopePair windowed_envelope(const RecurrenceSpec& spec, const EnvelopeBands& bands,
                               const InitialConditions& init, std::size_t steps) {
  if (bands.b_low.size() != spec.q() || bands.b_high.size() != spec.q()) {
    throw SpecError("envelope bands do not match the term count");
  }
  if (init.end() != 0 || init.start > spec.window_start()) {
    throw SpecError("initial window does not cover the delays of the recurrence");
  }

  EnvelopePair env;
  env.variant = EnvelopeVariant::kWindowed;
  env.omega.start_index = env.v.start_index = init.start;
  env.omega.values = init.values;
  env.v.values = init.values;
  auto& lo = env.omega.values;
  auto& hi = env.v.values;
  const auto window = static_cast<std::size_t>(spec.window_size());

  for (std::size_t k = 0; k < steps; ++k) {
    const double box_lo = *std::min_element(lo.end() - static_cast<std::ptrdiff_t>(window), lo.end());
    const double box_hi = *std::max_element(hi.end() - static_cast<std::ptrdiff_t>(window), hi.end());

    double lower = bands.a_low;
    double upper = bands.a_high;
    for (std::size_t i = 0; i < spec.q(); ++i) {
      const Term& t = spec.term(i);
      const double num_lo = safe_pow(box_lo, t.p);
      const double num_hi = safe_pow(box_hi, t.p);
      const double den_lo = safe_pow(box_lo, -t.r);
      const double den_hi = safe_pow(box_hi, -t.r);
      const double term_min = std::min(num_lo, num_hi) * std::min(den_lo, den_hi);
      const double term_max = std::max(num_lo, num_hi) * std::max(den_lo, den_hi);
      if (bands.b_low[i] > 0.0) lower += bands.b_low[i] * term_min;
      if (bands.b_high[i] > 0.0) upper += bands.b_high[i] * term_max;
    }
    // Outward rounding covers the evaluation error of the recurrence itself.
    lo.push_back(lower * (1.0 - kOutwardRounding));
    hi.push_back(upper * (1.0 + kOutwardRounding));
  }
  return env;
}

OscillationReport detect_oscillation(const Trajectory& traj, const OscillationOptions& opts) {
  if (opts.window_cap < 1) throw SpecError("oscillation window cap must be >= 1");
  if (traj.size() <= static_cast<std::size_t>(opts.window_cap) + 2) {
    throw SpecError("trajectory too short for the oscillation scan");
  }

  const int last = traj.last_index();
  const int cap = opts.window_cap;
  auto sign_of = [&](int from, int to) {
    const double a = traj.at(from);
    const double d = traj.at(to) - a;
    if (std::abs(d) <= opts.zero_tolerance * std::max(std::abs(a), std::abs(traj.at(to)))) return 0;
    return d > 0.0 ? 1 : -1;
  };

  OscillationReport report;
  report.window_cap = cap;
  const int k_max = std::min(opts.scan, last - 2 * cap >= 1 ? last - 2 * cap : last - 2);

  bool all_found = true;
  for (int k = 1; k <= k_max; ++k) {
    const int horizon = std::min(last, k + 2 * cap);
    bool stationary = true;
    for (int j = k; j < horizon && stationary; ++j) stationary = sign_of(j, j + 1) == 0;
    if (stationary) break;

    ++report.scanned;
    bool found = false;
    for (int n = 1; n <= cap && k + n < last && !found; ++n) {
      const int first = sign_of(k, k + n);
      if (first == 0) continue;
      for (int m = 1; m <= cap && k + n + m <= last; ++m) {
        const int second = sign_of(k + n, k + n + m);
        if (second != 0 && second == -first) {
          report.witnesses.push_back({k, n, m});
          found = true;
          break;
        }
      }
    }
    all_found = all_found && found;
  }
  report.oscillatory = report.scanned > 0 && all_found;
  return report;
}

DivergenceReport detect_divergence(const Trajectory& traj, double threshold) {
  DivergenceReport report;
  for (std::size_t i = 0; i < traj.values.size(); ++i) {
    if (!(traj.values[i] <= threshold)) {
      report.divergent = true;
      report.first_exceedance = traj.start_index + static_cast<int>(i);
      return report;
    }
  }

  // Slow growth below the threshold: a strictly increasing tail whose
  // increments do not decay towards a limit.
  const std::size_t window = static_cast<std::size_t>(std::max(0, -traj.start_index + 1));
  if (traj.values.size() < window + 4) return report;
  const std::size_t body = traj.values.size() - window;
  const std::size_t tail = std::max<std::size_t>(3, body / 10);
  const auto& x = traj.values;
  const std::size_t first = x.size() - tail;
  for (std::size_t i = first + 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) return report;
  }
  const double first_step = x[first + 1] - x[first];
  const double last_step = x.back() - x[x.size() - 2];
  const double floor = *std::min_element(x.begin() + static_cast<std::ptrdiff_t>(window), x.end());
  if (last_step >= 0.5 * first_step && x.back() >= 10.0 * floor) {
    report.divergent = true;
    report.growth_fallback = true;
  }
  return report;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "k,x\n";
  for (std::size_t i = 0; i < traj.values.size(); ++i) {
    out << traj.start_index + static_cast<int>(i) << ',' << format_double(traj.values[i]) << '\n';
  }
}

void write_envelope_csv(std::ostream& out, const EnvelopePair& env) {
  out << "k,omega,v\n";
  const std::size_t n = std::min(env.omega.values.size(), env.v.values.size());
  for (std::size_t i = 0; i < n; ++i) {
    out << env.omega.start_index + static_cast<int>(i) << ',' << format_double(env.omega.values[i])
        << ',' << format_double(env.v.values[i]) << '\n';
  }
}

}  // namespace rdeq
