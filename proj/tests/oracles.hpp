#pragma once

// Reference computations that share no code with the library: exact
// rationals, brute-force scans, closed-form roots, Durand-Kerner root finding.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracle {

struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Fraction(std::int64_t n = 0, std::int64_t d = 1) : num(n), den(d) {
    if (den == 0) throw std::domain_error("zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
  friend Fraction operator+(Fraction a, Fraction b) { return {a.num * b.den + b.num * a.den, a.den * b.den}; }
  friend Fraction operator*(Fraction a, Fraction b) { return {a.num * b.num, a.den * b.den}; }
  friend Fraction operator/(Fraction a, Fraction b) { return {a.num * b.den, a.den * b.num}; }
  friend bool operator==(Fraction a, Fraction b) { return a.num == b.num && a.den == b.den; }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// x_{k+1} = a + x_{k-1} / x_k in exact arithmetic; returns x_1..x_n.
inline std::vector<Fraction> amleh_exact(Fraction a, Fraction x_minus1, Fraction x0, int n) {
  std::vector<Fraction> out;
  Fraction prev = x_minus1, cur = x0;
  for (int i = 0; i < n; ++i) {
    const Fraction next = a + prev / cur;
    out.push_back(next);
    prev = cur;
    cur = next;
  }
  return out;
}

/// Roots of a z^2 + b z + c.
inline std::array<std::complex<double>, 2> quadratic_roots(double a, double b, double c) {
  const std::complex<double> disc = std::sqrt(std::complex<double>(b * b - 4 * a * c, 0));
  return {(-b + disc) / (2 * a), (-b - disc) / (2 * a)};
}

/// Durand-Kerner iteration on a monic polynomial, coefficients highest first.
inline std::vector<std::complex<double>> durand_kerner(const std::vector<double>& monic) {
  const std::size_t n = monic.size() - 1;
  std::vector<std::complex<double>> z(n);
  const std::complex<double> seed(0.4, 0.9);
  for (std::size_t i = 0; i < n; ++i) z[i] = std::pow(seed, static_cast<double>(i));
  auto eval = [&](std::complex<double> x) {
    std::complex<double> acc = 0;
    for (double c : monic) acc = acc * x + c;
    return acc;
  };
  for (int it = 0; it < 5000; ++it) {
    double moved = 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::complex<double> den = 1;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) den *= z[i] - z[j];
      }
      if (std::abs(den) == 0) den = 1e-300;
      const std::complex<double> step = eval(z[i]) / den;
      z[i] -= step;
      moved = std::max(moved, std::abs(step));
    }
    if (moved < 1e-15) break;
  }
  return z;
}

inline double max_modulus(const std::vector<std::complex<double>>& roots) {
  double m = 0;
  for (auto r : roots) m = std::max(m, std::abs(r));
  return m;
}

/// Expands prod (z - root) into real monic coefficients, highest first.
/// Complex roots must come in conjugate pairs.
inline std::vector<double> from_roots(const std::vector<std::complex<double>>& roots) {
  std::vector<std::complex<double>> c{1.0};
  for (auto r : roots) {
    std::vector<std::complex<double>> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i] += c[i];
      next[i + 1] -= r * c[i];
    }
    c = next;
  }
  std::vector<double> out;
  for (auto x : c) out.push_back(x.real());
  return out;
}

/// Uniform linear scan with n cells, bisection on every sign change.
inline std::vector<double> scan_roots(const std::function<double(double)>& f, double lo, double hi,
                                      int n) {
  std::vector<double> roots;
  double x0 = lo, f0 = f(lo);
  for (int i = 1; i <= n; ++i) {
    const double x1 = lo + (hi - lo) * i / n;
    const double f1 = f(x1);
    if (f0 == 0) roots.push_back(x0);
    if (f0 != 0 && f1 != 0 && (f0 < 0) != (f1 < 0)) {
      double a = x0, b = x1, fa = f0;
      for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (a + b);
        const double fm = f(mid);
        if ((fm < 0) == (fa < 0)) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    x0 = x1;
    f0 = f1;
  }
  return roots;
}

/// Index of the first maximum / minimum of values[i].
inline std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}
inline std::size_t argmin(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
}

}  // namespace oracle
