#pragma once

// Dense real polynomials stored highest degree first, and the three Schur
// stability routes used by the library: companion-matrix eigenvalues, the
// Schur-Cohn reduction (Jury table), and a sampled Rouche comparison.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace rdeq {

template <typename Scalar>
using Polynomial = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using ComplexVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

/// Horner evaluation at a complex point; coefficients highest degree first.
template <typename Derived>
std::complex<typename Derived::Scalar> evaluate(const Eigen::MatrixBase<Derived>& coeffs,
                                                std::complex<typename Derived::Scalar> z) {
  std::complex<typename Derived::Scalar> acc(0);
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) acc = acc * z + coeffs(i);
  return acc;
}

/// Frobenius companion matrix of a monic polynomial z^n + c_1 z^{n-1} + ... + c_n.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> companion_matrix(
    const Eigen::MatrixBase<Derived>& monic) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = monic.size() - 1;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> c =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
  c.row(0) = -monic.tail(n).transpose() / monic(0);
  if (n > 1) c.diagonal(-1).setOnes();
  return c;
}

/// All roots as eigenvalues of the companion matrix.
template <typename Derived>
ComplexVector<typename Derived::Scalar> companion_roots(const Eigen::MatrixBase<Derived>& monic) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = monic.size() - 1;
  if (n <= 0) return ComplexVector<Scalar>(0);
  if (n == 1) {
    ComplexVector<Scalar> root(1);
    root(0) = std::complex<Scalar>(-monic(1) / monic(0), Scalar(0));
    return root;
  }
  Eigen::EigenSolver<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> solver(
      companion_matrix(monic), /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw std::runtime_error("companion eigenvalue solve failed");
  return solver.eigenvalues();
}

template <typename Derived>
typename Derived::Scalar max_root_modulus(const Eigen::MatrixBase<Derived>& monic) {
  const auto roots = companion_roots(monic);
  return roots.size() == 0 ? typename Derived::Scalar(0) : roots.cwiseAbs().maxCoeff();
}

struct JuryResult {
  bool stable = false;
  /// A reduction step met |a_0| ~ |a_n| (relative 1e-14); the verdict is then
  /// not decided by the table.
  bool degenerate = false;
};

/// Schur-Cohn reduction: p is Schur stable iff |a_0| < |a_n| and
/// (a_n p(z) - a_0 p*(z)) / z is Schur stable, with p* the reversed polynomial.
template <typename Derived>
JuryResult jury_test(const Eigen::MatrixBase<Derived>& coeffs_high_first,
                     typename Derived::Scalar degenerate_tol = typename Derived::Scalar(1e-14)) {
  using Scalar = typename Derived::Scalar;
  Polynomial<Scalar> a = coeffs_high_first.reverse();  // ascending: a(0) constant term
  Eigen::Index n = a.size() - 1;
  while (n >= 1) {
    const Scalar lead = a(n);
    const Scalar k = a(0) / lead;
    const Scalar gap = Scalar(1) - k * k;
    if (std::abs(gap) <= degenerate_tol) return {false, true};
    if (gap < Scalar(0)) return {false, false};
    Polynomial<Scalar> next(n);
    for (Eigen::Index j = 0; j < n; ++j) next(j) = a(j + 1) - k * a(n - 1 - j);
    a = next / next(n - 1);
    --n;
  }
  return {true, false};
}

enum class RoucheVerdict { kStableByRouche, kInconclusive };

struct RoucheSample {
  RoucheVerdict verdict = RoucheVerdict::kInconclusive;
  /// max over samples of |T - Tref| / |Tref|.
  double max_ratio = 0.0;
  int samples = 0;
};

/// Sampled comparison |T(z) - Tref(z)| < |Tref(z)| (1 - slack) on |z| = 1.
/// Both polynomials must have the same length; stability of Tref is the
/// caller's responsibility.
template <typename DerivedT, typename DerivedRef>
RoucheSample rouche_sample(const Eigen::MatrixBase<DerivedT>& t,
                           const Eigen::MatrixBase<DerivedRef>& ref, int samples,
                           double slack = 1e-12) {
  using Scalar = typename DerivedT::Scalar;
  const Polynomial<Scalar> diff = t - ref;
  RoucheSample out;
  out.samples = samples;
  bool strict = true;
  for (int k = 0; k < samples; ++k) {
    const Scalar theta = Scalar(2) * std::numbers::pi_v<Scalar> * Scalar(k) / Scalar(samples);
    const std::complex<Scalar> z = std::polar(Scalar(1), theta);
    const Scalar err = std::abs(evaluate(diff, z));
    const Scalar base = std::abs(evaluate(ref, z));
    const double ratio = base > Scalar(0) ? static_cast<double>(err / base) : std::numeric_limits<double>::infinity();
    out.max_ratio = std::max(out.max_ratio, ratio);
    strict = strict && err < base * Scalar(1.0 - slack);
  }
  out.verdict = strict ? RoucheVerdict::kStableByRouche : RoucheVerdict::kInconclusive;
  return out;
}

}  // namespace rdeq
