#pragma once

#include <optional>
#include <random>
#include <vector>

#include "rdeq/equilibrium.hpp"
#include "rdeq/model.hpp"

namespace fixture {

using rdeq::CoefficientModel;

inline rdeq::RecurrenceSpec single(double p, double r, int ell, int s, CoefficientModel a,
                                   CoefficientModel b) {
  rdeq::RawSpec raw;
  raw.a = a;
  raw.terms.push_back({p, r, ell, s, b});
  return rdeq::build_spec(raw);
}

inline rdeq::RecurrenceSpec single(double p, double r, int ell, int s, double a, double b) {
  return single(p, r, ell, s, CoefficientModel::constant(a), CoefficientModel::constant(b));
}

/// x_{k+1} = alpha + x_{k-1} / x_k
inline rdeq::RecurrenceSpec amleh(double alpha) { return single(1, 1, 2, 1, alpha, 1); }

inline rdeq::LimitSpec limits(double a, std::vector<double> b, std::vector<double> p,
                              std::vector<double> r, std::vector<int> ell, std::vector<int> s) {
  rdeq::LimitSpec l;
  l.a = a;
  l.b = std::move(b);
  l.p = std::move(p);
  l.r = std::move(r);
  l.ell = std::move(ell);
  l.s = std::move(s);
  return l;
}

inline rdeq::LimitSpec limits1(double a, double b, double p, double r, int ell = 1, int s = 1) {
  return limits(a, {b}, {p}, {r}, {ell}, {s});
}

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline int uniform_int(std::mt19937_64& g, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(g);
}

}  // namespace fixture
