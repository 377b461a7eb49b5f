#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rdeq/dynamics.hpp"

using namespace rdeq;
using fixture::uniform;
using fixture::uniform_int;

namespace {

Trajectory make_trajectory(int start, std::vector<double> values) {
  Trajectory t;
  t.start_index = start;
  t.values = std::move(values);
  return t;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace

TEST_CASE("simulate: zero exponents give a constant sequence") {
  const auto spec = fixture::single(0, 0, 2, 1, 1.0, 1.0);
  const auto traj = simulate(spec, InitialConditions::from_values({0.0, 5.0}), 20);
  CHECK(traj.start_index == -1);
  CHECK(traj.size() == 22);
  for (int k = 1; k <= 20; ++k) CHECK(traj.at(k) == 2.0);
}

TEST_CASE("simulate: equal lags cancel") {
  const auto spec = fixture::single(1, 1, 1, 1, 0.5, 0.5);
  const auto traj = simulate(spec, InitialConditions::from_values({7.0}), 20);
  for (int k = 1; k <= 20; ++k) CHECK(traj.at(k) == 1.0);
}

TEST_CASE("simulate: delayed ratio recurrence against exact rationals") {
  const auto exact = oracle::amleh_exact(2, 1, 1, 8);
  CHECK(exact[0] == oracle::Fraction(3));
  CHECK(exact[1] == oracle::Fraction(7, 3));
  CHECK(exact[2] == oracle::Fraction(23, 7));

  const auto traj = simulate(fixture::amleh(2.0), InitialConditions::from_values({1.0, 1.0}), 8);
  CHECK(traj.at(1) == 3.0);
  CHECK(traj.at(2) == 2.3333333333333335);
  for (int k = 1; k <= 8; ++k) CHECK(rel(traj.at(k), exact[static_cast<std::size_t>(k - 1)].value()) <= 1e-14);
}

TEST_CASE("simulate records the coefficient trace and is reproducible") {
  RawSpec raw;
  raw.a = CoefficientModel::banded(1, 2);
  raw.terms.push_back({0.5, 1, 2, 1, CoefficientModel::banded(0.5, 1)});
  raw.terms.push_back({1, 1, 1, 3, CoefficientModel::convergent(2, 1, 0.5)});
  const auto spec = build_spec(raw);
  const auto init = InitialConditions::constant(spec, 1.5);
  const auto a = simulate(spec, init, 500, 99);
  const auto b = simulate(spec, init, 500, 99);
  const auto c = simulate(spec, init, 500, 100);
  CHECK(a.values == b.values);
  CHECK(a.coefficients == b.coefficients);
  CHECK(a.values != c.values);
  REQUIRE(a.coefficients.steps() == 500);
  for (std::size_t k = 0; k < 500; ++k) {
    CHECK(a.coefficients.a[k] >= 1.0);
    CHECK(a.coefficients.a[k] <= 2.0);
    CHECK(a.coefficients.b[k][0] >= 0.5);
    CHECK(a.coefficients.b[k][0] <= 1.0);
    CHECK(a.coefficients.b[k][1] == 1.0 + std::pow(0.5, static_cast<double>(k)));
  }
  // Replaying the trace reproduces the run bit for bit.
  CHECK(simulate(spec, init, a.coefficients).values == a.values);
}

TEST_CASE("simulate: errors") {
  const auto amleh = fixture::amleh(2.0);
  CHECK_THROWS_AS(simulate(amleh, InitialConditions::from_values({1.0, 1.0}), 0), SpecError);
  CHECK_THROWS_AS(simulate(amleh, InitialConditions::from_values({1.0, 0.0}), 5), SpecError);

  SUBCASE("zero raised to a negative power") {
    const auto spec = fixture::single(-1, 0, 2, 1, 1.0, 1.0);
    try {
      simulate(spec, InitialConditions::from_values({0.0, 1.0}), 5);
      FAIL("expected a simulation error");
    } catch (const SimulationError& e) {
      CHECK(e.reason() == SimulationError::Reason::kZeroDenominator);
      CHECK(e.step() == 1);
    }
  }
  SUBCASE("overflow") {
    const auto spec = fixture::single(2, 0, 1, 1, 1.0, 1.0);
    try {
      simulate(spec, InitialConditions::from_values({1e200}), 5);
      FAIL("expected a simulation error");
    } catch (const SimulationError& e) {
      CHECK(e.reason() == SimulationError::Reason::kNonFinite);
      CHECK(e.step() == 1);
    }
  }
}

TEST_CASE("simulate_inverse") {
  SUBCASE("zero exponents") {
    const auto spec = fixture::single(0, 0, 1, 1, 1.0, 1.0);
    const auto traj = simulate_inverse(spec, InitialConditions::from_values({3.0}), 10);
    for (int k = 1; k <= 10; ++k) CHECK(traj.at(k) == 0.5);
  }
  SUBCASE("reciprocal of the exact rational sequence") {
    const auto traj = simulate_inverse(fixture::amleh(2.0), InitialConditions::from_values({1.0, 1.0}), 3);
    CHECK(rel(traj.at(1), 1.0 / 3.0) <= 1e-15);
    CHECK(rel(traj.at(2), 3.0 / 7.0) <= 1e-15);
    CHECK(rel(traj.at(3), 7.0 / 23.0) <= 1e-15);
  }
  SUBCASE("needs a strictly positive window") {
    CHECK_THROWS_AS(simulate_inverse(fixture::amleh(2.0), InitialConditions::from_values({0.0, 1.0}), 3),
                    SpecError);
  }
}

TEST_CASE("property: duality over 100 steps") {
  std::mt19937_64 g(5);
  for (int trial = 0; trial < 100; ++trial) {
    RawSpec raw;
    raw.a = CoefficientModel::banded(1.0, 1.0 + uniform(g, 0, 2));
    const int q = uniform_int(g, 1, 3);
    for (int i = 0; i < q; ++i) {
      raw.terms.push_back({uniform(g, -0.5, 0.5), uniform(g, -0.5, 0.5), uniform_int(g, 1, 4), uniform_int(g, 1, 4),
                           CoefficientModel::banded(0.0, uniform(g, 0.1, 1.0))});
    }
    const auto spec = build_spec(raw);
    std::vector<double> window;
    for (int j = 0; j < spec.window_size(); ++j) window.push_back(uniform(g, 0.5, 3));
    std::vector<double> reciprocal;
    for (double x : window) reciprocal.push_back(1.0 / x);

    const auto trace = sample_coefficients(spec, 100, static_cast<std::uint64_t>(trial));
    const auto y = simulate_inverse(spec, InitialConditions::from_values(window), trace);
    const auto x = simulate(spec, InitialConditions::from_values(reciprocal), trace);
    double worst = 0;
    for (int k = 1; k <= 100; ++k) worst = std::max(worst, rel(y.at(k), 1.0 / x.at(k)));
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("property: positivity and finiteness of simulated values") {
  std::mt19937_64 g(17);
  for (int trial = 0; trial < 200; ++trial) {
    RawSpec raw;
    raw.a = CoefficientModel::banded(0.1, 2.0);
    const int q = uniform_int(g, 1, 3);
    for (int i = 0; i < q; ++i) {
      raw.terms.push_back({uniform(g, 0, 1), uniform(g, 0, 1), uniform_int(g, 1, 5), uniform_int(g, 1, 5),
                           CoefficientModel::banded(0.0, 1.0)});
    }
    const auto spec = build_spec(raw);
    const auto traj = simulate(spec, InitialConditions::constant(spec, uniform(g, 0.1, 5)), 300,
                               static_cast<std::uint64_t>(trial));
    for (int k = 1; k <= 300; ++k) {
      CHECK(traj.at(k) > 0.0);
      CHECK(std::isfinite(traj.at(k)));
    }
  }
}

TEST_CASE("scalar envelope") {
  SUBCASE("converges to the fixed point of w = 2 + 1/w") {
    const auto roots = oracle::quadratic_roots(1, -2, -1);
    const double fixed = std::max(roots[0].real(), roots[1].real());
    CHECK(fixed == doctest::Approx(1 + std::sqrt(2.0)).epsilon(1e-15));
    const auto env = scalar_envelope(2, 1, -1, -1, 1, 1, 200);
    CHECK(std::abs(env.omega.values.back() - fixed) <= 1e-12);
    CHECK(std::abs(env.v.values.back() - fixed) <= 1e-12);
  }
  SUBCASE("equal exponents give identical sequences") {
    const auto env = scalar_envelope(1.5, 0.7, -0.3, -0.3, 2, 2, 100);
    CHECK(env.omega.values == env.v.values);
  }
  SUBCASE("first lower step") {
    const auto env = scalar_envelope(2, 1, -0.5, -1, 1, 1, 3);
    CHECK(env.omega.at(1) == 3.0);
    for (std::size_t k = 0; k < env.omega.size(); ++k) CHECK(env.omega.values[k] <= env.v.values[k]);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(scalar_envelope(2, 1, -1, -1, 0, 1, 3), SpecError);
    CHECK_THROWS_AS(scalar_envelope(2, 1, -1, -1, 1, -1, 3), SpecError);
  }
}

TEST_CASE("property: windowed envelope brackets trajectories with banded coefficients") {
  std::mt19937_64 g(23);
  for (int trial = 0; trial < 100; ++trial) {
    RawSpec raw;
    const double a_lo = uniform(g, 0.2, 2);
    raw.a = CoefficientModel::banded(a_lo, a_lo + uniform(g, 0, 1));
    const int q = uniform_int(g, 1, 3);
    for (int i = 0; i < q; ++i) {
      // p - r <= 1 keeps every trajectory finite over the horizon.
      raw.terms.push_back({uniform(g, -0.5, 1), uniform(g, 0, 1), uniform_int(g, 1, 4), uniform_int(g, 1, 4),
                           CoefficientModel::banded(0.0, uniform(g, 0.1, 1))});
    }
    const auto spec = build_spec(raw);
    std::vector<double> window;
    for (int j = 0; j < spec.window_size(); ++j) window.push_back(uniform(g, 0.5, 2));
    const auto init = InitialConditions::from_values(window);
    const auto env = windowed_envelope(spec, EnvelopeBands::from_spec(spec), init, 60);
    const auto traj = simulate(spec, init, 60, static_cast<std::uint64_t>(trial));
    for (int k = 1; k <= 60; ++k) {
      if (!std::isfinite(env.v.at(k))) break;
      CHECK(env.omega.at(k) <= traj.at(k));
      CHECK(traj.at(k) <= env.v.at(k));
    }
  }
}

TEST_CASE("oscillation detection") {
  OscillationOptions opts;
  opts.window_cap = 8;
  opts.scan = 32;
  SUBCASE("constant sequence") {
    const auto rep = detect_oscillation(make_trajectory(0, std::vector<double>(100, 2.0)), opts);
    CHECK_FALSE(rep.oscillatory);
    CHECK(rep.witnesses.empty());
  }
  SUBCASE("alternation around the equilibrium") {
    const auto traj = simulate(fixture::amleh(2.0), InitialConditions::from_values({1.0, 1.0}), 200);
    const auto rep = detect_oscillation(traj, opts);
    CHECK(rep.oscillatory);
    CHECK(rep.scanned > 0);
    for (const auto& w : rep.witnesses) {
      const double d1 = traj.at(w.k + w.n) - traj.at(w.k);
      const double d2 = traj.at(w.k + w.n + w.m) - traj.at(w.k + w.n);
      CHECK(d1 != 0.0);
      CHECK(d2 != 0.0);
      CHECK((d1 > 0) != (d2 > 0));
      CHECK(w.n <= opts.window_cap);
      CHECK(w.m <= opts.window_cap);
    }
  }
  SUBCASE("increasing sequence") {
    std::vector<double> v;
    for (int k = 0; k < 100; ++k) v.push_back(k);
    CHECK_FALSE(detect_oscillation(make_trajectory(0, v), opts).oscillatory);
  }
  SUBCASE("too short") {
    CHECK_THROWS_AS(detect_oscillation(make_trajectory(0, std::vector<double>(10, 1.0)), opts), SpecError);
  }
}

TEST_CASE("divergence detection") {
  SUBCASE("linear growth") {
    const auto spec = fixture::single(1, 0, 1, 1, 1.0, 1.0);
    const auto traj = simulate(spec, InitialConditions::from_values({1.0}), 1000);
    CHECK(traj.at(1000) == 1001.0);
    const auto rep = detect_divergence(traj);
    CHECK(rep.divergent);
    CHECK(rep.growth_fallback);
  }
  SUBCASE("threshold exceedance") {
    const auto traj = make_trajectory(0, {1, 10, 100, 1e13, 1e14});
    const auto rep = detect_divergence(traj);
    CHECK(rep.divergent);
    CHECK(*rep.first_exceedance == 3);
  }
  SUBCASE("constant") {
    CHECK_FALSE(detect_divergence(make_trajectory(0, std::vector<double>(100, 3.0))).divergent);
  }
  SUBCASE("convergent oscillation stays bounded") {
    const auto traj = simulate(fixture::amleh(2.0), InitialConditions::from_values({1.0, 1.0}), 10000);
    CHECK_FALSE(detect_divergence(traj).divergent);
    CHECK(*std::max_element(traj.values.begin(), traj.values.end()) < 4.0);
  }
  SUBCASE("monotone convergence is not growth") {
    std::vector<double> v;
    for (int k = 1; k < 1000; ++k) v.push_back(5.0 - 4.0 / k);
    CHECK_FALSE(detect_divergence(make_trajectory(0, v)).divergent);
  }
}

TEST_CASE("csv export") {
  const auto traj = simulate(fixture::amleh(2.0), InitialConditions::from_values({1.0, 1.0}), 2);
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  CHECK(os.str() == "k,x\n-1,1\n0,1\n1,3\n2,2.3333333333333335\n");

  const auto env = scalar_envelope(2, 1, -1, -1, 1, 1, 1);
  std::ostringstream es;
  write_envelope_csv(es, env);
  CHECK(es.str() == "k,omega,v\n0,1,1\n1,3,3\n");
  CHECK(format_double(0.1) == "0.10000000000000001");
}
