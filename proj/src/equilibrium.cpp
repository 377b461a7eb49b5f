#include "rdeq/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace rdeq {

LimitSpec LimitSpec::from_spec(const RecurrenceSpec& spec) {
  LimitSpec limits;
  if (!spec.a().limit) throw SpecError("A has no declared limit");
  limits.a = *spec.a().limit;
  for (std::size_t i = 0; i < spec.q(); ++i) {
    const Term& t = spec.term(i);
    if (!t.b.limit) throw SpecError("B of term " + std::to_string(i + 1) + " has no declared limit");
    limits.b.push_back(*t.b.limit);
    limits.p.push_back(t.p);
    limits.r.push_back(t.r);
    limits.ell.push_back(t.ell);
    limits.s.push_back(t.s);
  }
  limits.validate();
  return limits;
}

double LimitSpec::b_sum() const {
  double s = 0.0;
  for (double x : b) s += x;
  return s;
}

void LimitSpec::validate(bool allow_zero_b) const {
  const std::size_t n = b.size();
  if (n == 0 || p.size() != n || r.size() != n || ell.size() != n || s.size() != n) {
    throw SpecError("limit spec: inconsistent term arrays");
  }
  if (!(a > 0.0)) throw SpecError("limit spec: A must be positive");
  for (double x : b) {
    if (!(x >= 0.0)) throw SpecError("limit spec: B_i must be nonnegative");
  }
  if (!allow_zero_b && !(b_sum() > 0.0)) throw SpecError("limit spec: at least one B_i must be positive");
}

double equilibrium_residual(const LimitSpec& limits, double x) {
  if (!(x > 0.0)) throw SpecError("equilibrium residual needs x > 0");
  double g = x - limits.a;
  for (std::size_t i = 0; i < limits.q(); ++i) {
    if (limits.b[i] != 0.0) g -= limits.b[i] * std::pow(x, limits.p[i] - limits.r[i]);
  }
  return g;
}

const char* to_string(EquilibriumKind k) {
  switch (k) {
    case EquilibriumKind::kInteriorRoot: return "interior-root";
    case EquilibriumKind::kClosedForm: return "closed-form";
    case EquilibriumKind::kUnitPoint: return "unit-point";
  }
  return "unknown";
}

SearchRange default_search_range(const LimitSpec& limits) {
  double weight = 1.0;
  for (std::size_t i = 0; i < limits.q(); ++i) {
    weight = std::max(weight, std::pow(limits.a, limits.p[i] - limits.r[i]));
  }
  return {limits.a, std::max(10.0 * (limits.a + limits.b_sum() * weight), 1e3)};
}

namespace {

bool in_q1(const LimitSpec& limits, std::size_t i, double tol) {
  return std::abs(limits.r[i] - (limits.p[i] - 1.0)) <= tol;
}

// Bisection on a sign-changing bracket until it stops shrinking.
double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double f_lo = f(lo);
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if (std::signbit(f_mid) == std::signbit(f_lo)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < n; ++i) {
    g[static_cast<std::size_t>(i)] = i == 0 ? lo : i == n - 1 ? hi : std::exp(a + (b - a) * i / (n - 1));
  }
  return g;
}

// Smallest root of f on [lo, hi] given f(lo) < 0 <= f(hi).
double first_root(const std::function<double(double)>& f, double lo, double hi, int grid) {
  const auto xs = log_grid(lo, hi, grid);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double fx = f(xs[i]);
    if (fx >= 0.0) return fx == 0.0 ? xs[i] : bisect(f, xs[i - 1], xs[i]);
  }
  return hi;
}

}  // namespace

std::vector<EquilibriumPoint> find_equilibria(const LimitSpec& limits, const SearchRange& range,
                                              const RootOptions& opts) {
  limits.validate();
  if (!(range.low > 0.0)) throw SpecError("equilibrium search range must be positive");
  if (!(range.low < range.high)) throw SpecError("equilibrium search range is empty");
  if (opts.grid_points < 2) throw SpecError("equilibrium search needs at least 2 grid points");

  const double lo = std::max(range.low, limits.a * (1.0 - 1e-9));
  const double hi = range.high;
  std::vector<EquilibriumPoint> points;
  if (!(lo < hi)) return points;

  auto g = [&](double x) { return equilibrium_residual(limits, x); };

  bool all_q1 = true;
  for (std::size_t i = 0; i < limits.q(); ++i) all_q1 = all_q1 && in_q1(limits, i, kStructureTolerance);
  if (all_q1) {
    // g is linear: x (1 - sum B) - A.
    const double bsum = limits.b_sum();
    if (bsum < 1.0) {
      const double x = limits.a / (1.0 - bsum);
      if (x >= lo && x <= hi) points.push_back({x, g(x), EquilibriumKind::kClosedForm});
    }
    return points;
  }

  const auto xs = log_grid(lo, hi, opts.grid_points);
  std::vector<double> gs(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) gs[i] = g(xs[i]);

  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (gs[i] == 0.0) {
      points.push_back({xs[i], 0.0, EquilibriumKind::kInteriorRoot});
      continue;
    }
    if (i + 1 < xs.size() && gs[i + 1] != 0.0 && std::signbit(gs[i]) != std::signbit(gs[i + 1])) {
      const double x = bisect(g, xs[i], xs[i + 1]);
      points.push_back({x, g(x), EquilibriumKind::kInteriorRoot});
    }
  }

  if (std::abs(limits.a + limits.b_sum() - 1.0) <= kStructureTolerance && lo <= 1.0 && 1.0 <= hi) {
    points.push_back({1.0, g(1.0), EquilibriumKind::kUnitPoint});
  }

  std::sort(points.begin(), points.end(),
            [](const EquilibriumPoint& a, const EquilibriumPoint& b) { return a.x < b.x; });
  std::vector<EquilibriumPoint> unique;
  for (const auto& pt : points) {
    if (!unique.empty() &&
        std::abs(pt.x - unique.back().x) <= opts.dedup_relative * std::max(pt.x, unique.back().x)) {
      if (pt.kind != EquilibriumKind::kInteriorRoot) unique.back() = pt;
      continue;
    }
    unique.push_back(pt);
  }
  return unique;
}

StructureReport classify_structure(const LimitSpec& limits, double tolerance) {
  limits.validate();
  StructureReport rep;
  double q1_sum = 0.0;
  double q3_sum = 0.0;
  for (std::size_t i = 0; i < limits.q(); ++i) {
    const double gap = limits.r[i] - (limits.p[i] - 1.0);
    if (std::abs(gap) <= tolerance) {
      rep.q1.push_back(i);
      q1_sum += limits.b[i];
    } else if (gap > 0.0) {
      rep.q2.push_back(i);
    } else {
      rep.q3.push_back(i);
      q3_sum += limits.b[i] * std::pow(limits.a, std::abs(gap));
    }
  }
  const double bsum = limits.b_sum();
  rep.nonexistence_sum = q1_sum + q3_sum;

  rep.zero_equilibrium_of_inverse =
      rep.q3.empty() && !rep.q1.empty() && std::abs(q1_sum - 1.0) <= tolerance;
  rep.nonexistence = rep.nonexistence_sum > 1.0;
  rep.unit_equilibrium = std::abs(limits.a + bsum - 1.0) <= tolerance;
  rep.unique_closed_form = rep.q1.size() == limits.q() && bsum < 1.0;
  rep.unbounded_risk = rep.zero_equilibrium_of_inverse;
  rep.oscillatory_regime = rep.nonexistence;
  return rep;
}

IntervalBounds equilibrium_interval_bounds(const LimitSpec& limits) {
  limits.validate();
  IntervalBounds out;
  const auto rd = rho_delta(limits.p, limits.r);
  out.rho = rd.rho;
  out.delta = rd.delta;
  out.b_total = limits.b_sum();
  const double a = limits.a;
  const double b = out.b_total;
  const double rho = out.rho;
  const double delta = out.delta;

  if (delta < 0.0) {
    auto f = [&](double w) { return w - a - b * std::min(std::pow(w, delta), std::pow(w, rho)); };
    // min(w^delta, w^rho) <= w^delta <= A^delta on [A, inf).
    out.omega = first_root(f, a, a + b * std::pow(a, delta), 4096);
    out.omega_cap = a >= 1.0 ? a + b / std::pow(a, std::abs(delta))
                             : a + b * std::min(std::pow(a, delta), std::pow(a, rho));
    out.delta_threshold = std::pow(std::abs(delta), 1.0 / (std::abs(delta) + 1.0));
  } else {
    out.omega_note = "no lower envelope equilibrium: delta >= 0";
  }

  if (rho < 0.0) {
    auto f = [&](double u) { return u - a - b * std::max(std::pow(u, rho), std::pow(u, delta)); };
    const double reach = a + b * std::max(std::pow(a, rho), std::pow(a, delta));
    out.v = first_root(f, a, reach, 4096);
    out.v_cap = a >= 1.0 ? a + b / std::pow(a, std::abs(rho))
                         : a + b * std::min(std::pow(a, delta), std::pow(a, rho));
    out.limsup_power_cap = std::pow(a + b / std::pow(a, std::abs(rho)), std::abs(rho) + 1.0);
    out.rho_threshold = std::pow(std::abs(rho), 1.0 / (std::abs(rho) + 1.0));
  } else {
    out.v_note = "no upper envelope equilibrium: rho >= 0";
  }

  out.lower = out.omega ? std::max(a, *out.omega) : a;
  out.upper = out.v;
  return out;
}

FirstOrderVerdict first_order_stability_condition(const LimitSpec& limits, double point,
                                                  double exponent) {
  limits.validate();
  for (std::size_t i = 0; i < limits.q(); ++i) {
    if (limits.ell[i] != 1 || limits.s[i] != 1) {
      throw SpecError("first-order condition needs every delay equal to 1");
    }
  }
  if (!(point > 0.0)) throw SpecError("first-order condition needs a positive point");
  const double e = std::abs(exponent);
  FirstOrderVerdict out;
  out.stable = std::pow(point, e + 1.0) > e;
  out.cap = limits.a + limits.b_sum() / std::pow(limits.a, e);
  out.threshold = std::pow(e, 1.0 / (e + 1.0));
  out.bracket_holds = out.cap >= point && point > out.threshold;
  return out;
}

}  // namespace rdeq
