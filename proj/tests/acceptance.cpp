// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rdeq/bounds.hpp"
#include "rdeq/dynamics.hpp"
#include "rdeq/equilibrium.hpp"
#include "rdeq/polynomial.hpp"
#include "rdeq/stability.hpp"

using namespace rdeq;
using fixture::uniform;
using fixture::uniform_int;

namespace {

// Tolerances pinned per criterion.
constexpr double kClosedFormTol = 1e-10;
constexpr double kTrapSlack = 1e-12;
constexpr double kCapSlack = 1e-6;
constexpr double kDualityTol = 1e-12;
constexpr double kMarginBand = 1e-8;
constexpr double kEnclosureSlack = 1e-9;
constexpr double kUnitTol = 1e-9;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Eigen::VectorXd vec(const std::vector<double>& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

std::vector<std::complex<double>> random_roots(std::mt19937_64& g, int degree, double max_modulus) {
  std::vector<std::complex<double>> roots;
  while (static_cast<int>(roots.size()) < degree) {
    const double m = uniform(g, 0, max_modulus);
    if (degree - static_cast<int>(roots.size()) >= 2 && uniform(g, 0, 1) < 0.5) {
      const auto z = std::polar(m, uniform(g, 0, 3.14159));
      roots.push_back(z);
      roots.push_back(std::conj(z));
    } else {
      roots.emplace_back(uniform(g, 0, 1) < 0.5 ? m : -m, 0.0);
    }
  }
  return roots;
}

Outcome closed_forms() {
  const auto silver = fixture::limits1(2, 1, 0, 1);
  const auto a = find_equilibria(silver, default_search_range(silver));
  const auto half = fixture::limits1(1, 0.5, 2, 1);
  const auto b = find_equilibria(half, default_search_range(half));
  const double err_a = a.size() == 1 ? std::abs(a[0].x - (1 + std::sqrt(2.0))) : INFINITY;
  const double err_b = b.size() == 1 ? std::abs(b[0].x - 2.0) : INFINITY;
  return {err_a <= kClosedFormTol && err_b <= kClosedFormTol,
          fmt("|x-(1+sqrt2)|=%.3g, |x-2|=%.3g (points %zu, %zu)", err_a, err_b, a.size(), b.size())};
}

Outcome amleh_threshold() {
  auto classify = [](double alpha) {
    const auto l = fixture::limits1(alpha, 1, 1, 1, 2, 1);
    return classify_equilibria(l, find_equilibria(l, default_search_range(l)));
  };
  const auto at2 = classify(2);
  const auto at_half = classify(0.5);
  bool ok = at2.stable.size() == 1 && at2.unstable.empty() && at_half.stable.empty() && at_half.unstable.size() == 1;
  if (ok) {
    const auto& c = at2.stable[0].polynomial.coeffs;
    ok = (c - vec({1, 1.0 / 3, -1.0 / 3})).cwiseAbs().maxCoeff() <= 1e-15;
  }
  int agree = 0, flips_at_one = 0;
  bool prev_stable = false;
  for (int i = 0; i < 50; ++i) {
    const double alpha = std::pow(10.0, -1.0 + 2.0 * (i + 0.5) / 50);  // 0.1 .. 10, never exactly 1
    const auto part = classify(alpha);
    const double xbar = alpha + 1;
    const auto roots = oracle::quadratic_roots(1, 1 / xbar, -1 / xbar);
    const bool truth = std::max(std::abs(roots[0]), std::abs(roots[1])) < 1;
    const bool got = part.stable.size() == 1 && part.unstable.empty();
    if (got == truth && got == (alpha > 1)) ++agree;
    if (i > 0 && got != prev_stable) flips_at_one += 1;
    prev_stable = got;
  }
  ok = ok && agree == 50 && flips_at_one == 1;
  return {ok, fmt("alpha=2 E_s, alpha=0.5 E_u; sweep agreement %d/50, verdict changes %d", agree, flips_at_one)};
}

RecurrenceSpec random_banded_spec(std::mt19937_64& g) {
  RawSpec raw;
  const double a_low = uniform(g, 0.2, 3);
  raw.a = CoefficientModel::banded(a_low, a_low * uniform(g, 1, 2));
  const int q = uniform_int(g, 1, 3);
  for (int i = 0; i < q; ++i) {
    const double b_high = uniform(g, 0.05, 1.5);
    raw.terms.push_back({uniform(g, -1, 1.5), uniform(g, -1, 1.5), uniform_int(g, 1, 4), uniform_int(g, 1, 4),
                         CoefficientModel::banded(b_high * uniform(g, 0, 1), b_high)});
  }
  return build_spec(raw);
}

Outcome certificate_soundness() {
  std::mt19937_64 g(1001);
  int certs = 0, tried = 0;
  long excursions = 0;
  double worst = 0;
  while (certs < 200 && tried < 20000) {
    ++tried;
    const auto spec = random_banded_spec(g);
    const auto bands = CoefficientBands::from_spec(spec);
    SearchBox box = SearchBox::around(bands);
    box.grid = 16;
    const auto found = search_certificate(spec, bands, box);
    if (!found) continue;
    const auto cert = check_certificate_general(spec, found->m, found->big_m, bands);
    if (!cert.accepted) continue;
    ++certs;
    for (int run = 0; run < 10; ++run) {
      std::vector<double> window;
      for (int j = 0; j < spec.window_size(); ++j) window.push_back(uniform(g, cert.m, cert.big_m));
      const auto traj = simulate(spec, InitialConditions::from_values(window), 10000, g());
      for (double x : traj.values) {
        const double below = cert.m * (1 - kTrapSlack) - x;
        const double above = x - cert.big_m * (1 + kTrapSlack);
        if (below > 0 || above > 0) {
          ++excursions;
          worst = std::max({worst, below / cert.m, above / cert.big_m});
        }
      }
    }
  }
  return {certs == 200 && excursions == 0,
          fmt("%d certificates (%d specs tried), %ld excursions, worst relative %.3g", certs, tried, excursions, worst)};
}

Outcome square_root_cap() {
  const auto spec = fixture::single(0.5, 1, 2, 1, CoefficientModel::banded(1, 2), CoefficientModel::banded(0.5, 1));
  const std::size_t steps = 100000;
  const auto traj = simulate(spec, InitialConditions::constant(spec, 1.0), steps, 42);
  double tail_max = 0;
  for (std::size_t i = traj.values.size() - steps / 2; i < traj.values.size(); ++i) {
    tail_max = std::max(tail_max, traj.values[i]);
  }
  const auto verdict = boundedness_by_exponent(spec);
  return {tail_max <= 4 + kCapSlack && verdict == ExponentVerdict::kBounded,
          fmt("max over last %zu steps %.12g (cap 4), exponent verdict %s", steps / 2, tail_max, to_string(verdict))};
}

Outcome case_table() {
  std::mt19937_64 g(1005);
  const std::vector<double> special = {-1, 0, 0.5, 1, 2};
  auto pick = [&](double lo, double hi) {
    return uniform(g, 0, 1) < 0.2 ? special[uniform_int(g, 0, 4)] : uniform(g, lo, hi);
  };
  // A base of exactly 1 makes every exponent attain the same value, so the
  // two routes may pick different indices; the attained values must agree and
  // the exponents must agree whenever the base differs from 1.
  int value_mismatches = 0, exponent_mismatches = 0, unit_base_ties = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int q = uniform_int(g, 1, 6);
    std::vector<double> p, r;
    for (int i = 0; i < q; ++i) {
      p.push_back(pick(-2, 3));
      r.push_back(pick(-2, 3));
    }
    double m = uniform(g, 0, 1) < 0.1 ? 1.0 : std::exp(uniform(g, -2, 2));
    double big_m = uniform(g, 0, 1) < 0.1 ? 1.0 : std::exp(uniform(g, -2, 2));
    if (m > big_m) std::swap(m, big_m);
    const auto d = exponent_extremes(p, r, m, big_m);
    const auto c = exponent_extremes_by_cases(p, r, m, big_m);
    const std::array<double, 4> base = {big_m, m, m, big_m};
    const std::array<double, 4> de = {d.mu_p - 1, d.nu_p - 1, d.mu_r, d.nu_r};
    const std::array<double, 4> ce = {c.mu_p - 1, c.nu_p - 1, c.mu_r, c.nu_r};
    for (int k = 0; k < 4; ++k) {
      if (std::pow(base[k], de[k]) != std::pow(base[k], ce[k])) ++value_mismatches;
      if (de[k] != ce[k]) (base[k] == 1.0 ? unit_base_ties : exponent_mismatches) += 1;
    }
  }
  return {value_mismatches == 0 && exponent_mismatches == 0,
          fmt("10000 cases x 4 slots: %d value mismatches, %d exponent mismatches, %d unit-base ties",
              value_mismatches, exponent_mismatches, unit_base_ties)};
}

Outcome schur_oracle() {
  std::mt19937_64 g(1006);
  int hard = 0, in_band = 0, degenerate = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int degree = uniform_int(g, 1, 8);
    std::vector<double> coeffs;
    if (trial % 2 == 0) {
      coeffs = oracle::from_roots(random_roots(g, degree, 1.6));
    } else {
      coeffs.push_back(1.0);
      for (int i = 0; i < degree; ++i) coeffs.push_back(uniform(g, -1.5, 1.5));
    }
    const auto c = vec(coeffs);
    const double rho = max_root_modulus(c);
    if (std::abs(rho - 1) <= kMarginBand) {
      ++in_band;
      continue;
    }
    const auto jury = jury_test(c);
    if (jury.degenerate) {
      ++degenerate;
      continue;
    }
    if (jury.stable != (rho < 1)) ++hard;
  }
  return {hard == 0, fmt("10000 polynomials, %d hard disagreements, %d in band, %d degenerate tables", hard, in_band,
                         degenerate)};
}

Outcome rouche_soundness() {
  std::mt19937_64 g(1007);
  int claimed = 0, refuted = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int degree = uniform_int(g, 1, 8);
    const auto ref = vec(oracle::from_roots(random_roots(g, degree, 0.95)));
    Eigen::VectorXd t = ref;
    const double scale = uniform(g, 0, 0.6);
    for (int i = 1; i <= degree; ++i) t(i) += uniform(g, -scale, scale);
    if (rouche_compare(t, ref).verdict != RoucheVerdict::kStableByRouche) continue;
    ++claimed;
    if (!(max_root_modulus(t) < 1.0)) ++refuted;
  }
  return {refuted == 0 && claimed > 0, fmt("1000 pairs, %d stable-by-rouche, %d refuted by eigenvalues", claimed, refuted)};
}

Outcome duality() {
  std::mt19937_64 g(1008);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    RawSpec raw;
    raw.a = CoefficientModel::banded(1.0, 1.0 + uniform(g, 0, 2));
    const int q = uniform_int(g, 1, 3);
    for (int i = 0; i < q; ++i) {
      raw.terms.push_back({uniform(g, -0.5, 0.5), uniform(g, -0.5, 0.5), uniform_int(g, 1, 4), uniform_int(g, 1, 4),
                           CoefficientModel::banded(0.0, uniform(g, 0.1, 1.0))});
    }
    const auto spec = build_spec(raw);
    std::vector<double> window, reciprocal;
    for (int j = 0; j < spec.window_size(); ++j) {
      window.push_back(uniform(g, 0.5, 3));
      reciprocal.push_back(1.0 / window.back());
    }
    const auto trace = sample_coefficients(spec, 1000, g());
    const auto x = simulate(spec, InitialConditions::from_values(window), trace);
    const auto y = simulate_inverse(spec, InitialConditions::from_values(reciprocal), trace);
    for (int k = 1; k <= 1000; ++k) worst = std::max(worst, std::abs(y.at(k) * x.at(k) - 1.0));
  }
  return {worst <= kDualityTol, fmt("100 specs x 1000 steps, worst |y*x - 1| = %.3g", worst)};
}

Outcome structural_regimes() {
  const auto growth = fixture::single(1, 0, 1, 1, 1.0, 1.0);
  const auto g_traj = simulate(growth, InitialConditions::constant(growth, 1.0), 1000);
  const bool diverges = detect_divergence(g_traj).divergent;
  const bool zero_inverse = classify_structure(LimitSpec::from_spec(growth)).zero_equilibrium_of_inverse;

  const auto doubling = fixture::single(1, 0, 16, 1, 1.0, 2.0);
  std::vector<double> window;
  for (int j = 0; j < 16; ++j) window.push_back(j % 2 ? 1.0 : 2.0);
  const auto d_traj = simulate(doubling, InitialConditions::from_values(window), 10000);
  const auto structure = classify_structure(LimitSpec::from_spec(doubling));
  const bool oscillates = detect_oscillation(d_traj).oscillatory;
  const double d_max = *std::max_element(d_traj.values.begin(), d_traj.values.end());

  const auto unit = fixture::limits1(0.5, 0.5, 0.5, 1);
  bool unit_found = false;
  for (const auto& pt : find_equilibria(unit, default_search_range(unit))) {
    unit_found |= std::abs(pt.x - 1.0) <= kUnitTol;
  }
  const bool unit_flag = classify_structure(unit).unit_equilibrium;

  return {diverges && zero_inverse && structure.nonexistence && oscillates && unit_found && unit_flag,
          fmt("B=1 divergent=%d; B=2 nonexistence=%d oscillatory=%d (max x %.3g); unit point found=%d flag=%d",
              diverges, structure.nonexistence, oscillates, d_max, unit_found, unit_flag)};
}

Outcome envelope_bracketing() {
  std::mt19937_64 g(1010);
  int specs = 0, step_violations = 0, enclosure_violations = 0, points = 0, overflowed = 0;
  while (specs < 500) {
    RawSpec raw;
    raw.a = CoefficientModel::constant(uniform(g, 1, 3));
    const int q = uniform_int(g, 1, 3);
    for (int i = 0; i < q; ++i) {
      const double r = uniform(g, 0, 2);
      raw.terms.push_back({r - uniform(g, 0.05, 2), r, uniform_int(g, 1, 4), uniform_int(g, 1, 4),
                           CoefficientModel::constant(uniform(g, 0.05, 1.5))});
    }
    const auto spec = build_spec(raw);
    const auto rd = rho_delta(spec);
    if (!(std::max(rd.rho, rd.delta) < 0)) continue;
    ++specs;
    std::vector<double> window;
    for (int j = 0; j < spec.window_size(); ++j) window.push_back(uniform(g, 0.5, 4));
    const auto init = InitialConditions::from_values(window);
    const auto env = windowed_envelope(spec, EnvelopeBands::from_spec(spec), init, 1000);
    // Differing lags can make x overflow even with max(rho, delta) < 0; the
    // bracket is then checked over every finite step.
    std::size_t horizon = 1000;
    Trajectory traj;
    for (;;) {
      try {
        traj = simulate(spec, init, horizon);
        break;
      } catch (const SimulationError& e) {
        horizon = static_cast<std::size_t>(e.step() - 1);
      }
    }
    if (horizon < 1000) ++overflowed;
    for (int k = 1; k <= static_cast<int>(horizon); ++k) {
      if (!(env.omega.at(k) <= traj.at(k) && traj.at(k) <= env.v.at(k))) ++step_violations;
    }
    const auto limits = LimitSpec::from_spec(spec);
    const auto bounds = equilibrium_interval_bounds(limits);
    if (!bounds.omega || !bounds.v) {
      ++enclosure_violations;
      continue;
    }
    const double lo = std::max(limits.a, *bounds.omega);
    for (const auto& pt : find_equilibria(limits, default_search_range(limits))) {
      ++points;
      if (pt.x < lo - kEnclosureSlack || pt.x > *bounds.v + kEnclosureSlack) ++enclosure_violations;
    }
  }
  return {step_violations == 0 && enclosure_violations == 0,
          fmt("%d specs (%d overflow before step 1000), %d step violations, %d equilibria checked, %d outside "
              "[max(A,omega), v]",
              specs, overflowed, step_violations, points, enclosure_violations)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"equilibrium closed forms", closed_forms},
      {"Amleh stability threshold", amleh_threshold},
      {"certificate soundness", certificate_soundness},
      {"square-root bound", square_root_cap},
      {"exponent case table", case_table},
      {"Schur oracle", schur_oracle},
      {"Rouche soundness", rouche_soundness},
      {"duality", duality},
      {"structural regimes", structural_regimes},
      {"envelope bracketing", envelope_bracketing},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("%s %2zu %-28s %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(),
                secs);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
