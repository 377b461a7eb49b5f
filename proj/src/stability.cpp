#include "rdeq/stability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace rdeq {

const char* to_string(Pairing p) {
  switch (p) {
    case Pairing::kDerivative: return "derivative";
    case Pairing::kPaperLiteral: return "literal";
  }
  return "unknown";
}

const char* to_string(Stability s) {
  switch (s) {
    case Stability::kStable: return "stable";
    case Stability::kUnstable: return "unstable";
    case Stability::kMarginal: return "marginal";
  }
  return "unknown";
}

const char* to_string(StabilityMethod m) {
  switch (m) {
    case StabilityMethod::kEigenvalue: return "eigenvalue";
    case StabilityMethod::kJury: return "jury";
    case StabilityMethod::kRouche: return "rouche";
  }
  return "unknown";
}

const char* to_string(RoucheVerdict v) {
  return v == RoucheVerdict::kStableByRouche ? "stable-by-rouche" : "inconclusive";
}

namespace {

// Adds the contribution of one term to a monic polynomial of degree n:
// sign * c * (p z^{n-lag_p} - r z^{n-lag_r}).
void add_term(Eigen::VectorXd& coeffs, double sign, double c, double p, int lag_p, double r,
              int lag_r) {
  coeffs(lag_p) += sign * c * p;
  coeffs(lag_r) -= sign * c * r;
}

void add_pair(Eigen::VectorXd& coeffs, Pairing pairing, double c, double p, double r, int ell,
              int s) {
  if (pairing == Pairing::kDerivative) {
    add_term(coeffs, -1.0, c, p, ell, r, s);
  } else {
    add_term(coeffs, +1.0, c, p, s, r, ell);
  }
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

CharPolynomial characteristic_polynomial(const LimitSpec& limits, double x, Pairing pairing) {
  limits.validate(true);
  if (!(x > 0.0) || !std::isfinite(x)) throw SpecError("characteristic polynomial needs x > 0");
  int n = 0;
  for (std::size_t i = 0; i < limits.q(); ++i) n = std::max({n, limits.ell[i], limits.s[i]});

  CharPolynomial out;
  out.point = x;
  out.coeffs = Eigen::VectorXd::Zero(n + 1);
  out.coeffs(0) = 1.0;
  for (std::size_t i = 0; i < limits.q(); ++i) {
    const double c = limits.b[i] * std::pow(x, limits.p[i] - limits.r[i] - 1.0);
    add_pair(out.coeffs, pairing, c, limits.p[i], limits.r[i], limits.ell[i], limits.s[i]);
  }
  out.formula = pairing == Pairing::kDerivative
                    ? "z^n - sum B_i x^(p_i-r_i-1) (p_i z^(n-ell_i) - r_i z^(n-s_i))"
                    : "z^n + sum B_i x^(p_i-r_i-1) (p_i z^(n-s_i) - r_i z^(n-ell_i))";
  out.formula += " at x=" + num(x);
  return out;
}

std::vector<CharPolynomial> envelope_polynomials(const LimitSpec& limits, EnvelopeSide side,
                                                 std::optional<double> point, Pairing pairing) {
  limits.validate();
  const char* name = side == EnvelopeSide::kRho ? "rho" : "delta";
  if (!point) throw SpecError(std::string("envelope point for ") + name + " is unavailable");
  if (!(*point > 0.0) || !std::isfinite(*point)) throw SpecError("envelope point must be positive");

  const auto rd = rho_delta(limits.p, limits.r);
  const double e = side == EnvelopeSide::kRho ? rd.rho : rd.delta;
  const double c = std::pow(*point, e - 1.0) * limits.b_sum();

  std::vector<CharPolynomial> out;
  for (std::size_t j = 0; j < limits.q(); ++j) {
    if (limits.p[j] - limits.r[j] != e) continue;
    const int n = std::max(limits.ell[j], limits.s[j]);
    CharPolynomial poly;
    poly.point = *point;
    poly.coeffs = Eigen::VectorXd::Zero(n + 1);
    poly.coeffs(0) = 1.0;
    add_pair(poly.coeffs, pairing, c, limits.p[j], limits.r[j], limits.ell[j], limits.s[j]);
    poly.formula = std::string(name) + " envelope, term " + std::to_string(j + 1) +
                   " at point=" + num(*point);
    out.push_back(std::move(poly));
  }
  return out;
}

StabilityVerdict schur_stable(const Eigen::VectorXd& monic, double margin_band) {
  if (monic.size() == 0) throw SpecError("empty polynomial");
  if (!monic.allFinite()) throw SpecError("polynomial has non-finite coefficients");
  if (monic(0) != 1.0) throw SpecError("polynomial must be monic");
  if (!(margin_band >= 0.0)) throw SpecError("margin band must be nonnegative");

  StabilityVerdict v;
  v.margin_band = margin_band;
  if (monic.size() == 1) {
    v.stable = Stability::kStable;
    v.jury_stable = true;
    v.note = "degree 0";
    return v;
  }

  v.max_root_modulus = max_root_modulus(monic);
  const JuryResult jury = jury_test(monic);
  v.jury_stable = jury.stable;
  v.jury_degenerate = jury.degenerate;

  const double rho = v.max_root_modulus;
  if (rho < 1.0 - margin_band) {
    v.stable = Stability::kStable;
  } else if (rho > 1.0 + margin_band) {
    v.stable = Stability::kUnstable;
  } else {
    v.stable = Stability::kMarginal;
    v.note = "root modulus within margin band of 1";
  }

  if (jury.degenerate) {
    if (v.note.empty()) v.note = "jury table degenerate; eigenvalue verdict used";
    return v;
  }
  const bool eigen_stable = rho < 1.0;
  if (jury.stable != eigen_stable && std::abs(rho - 1.0) > margin_band) {
    throw ConsistencyError("jury and eigenvalue verdicts disagree (max |root| = " + num(rho) + ")");
  }
  return v;
}

StabilityVerdict schur_stable(const CharPolynomial& poly, double margin_band) {
  return schur_stable(poly.coeffs, margin_band);
}

RoucheResult rouche_compare(const Eigen::VectorXd& t, const Eigen::VectorXd& reference, int samples) {
  if (t.size() != reference.size()) throw SpecError("rouche comparison needs equal degrees");
  if (samples < 1) throw SpecError("rouche comparison needs at least one sample");
  if (!t.allFinite()) throw SpecError("polynomial has non-finite coefficients");
  if (schur_stable(reference).stable != Stability::kStable) {
    throw SpecError("rouche reference polynomial is not Schur stable");
  }
  const RoucheSample s = rouche_sample(t, reference, samples);
  return {s.verdict, s.max_ratio, s.samples};
}

EquilibriumPartition classify_equilibria(const LimitSpec& limits,
                                         const std::vector<EquilibriumPoint>& points,
                                         Pairing pairing, double margin_band) {
  EquilibriumPartition out;
  for (const auto& pt : points) {
    ClassifiedPoint c;
    c.point = pt;
    c.polynomial = characteristic_polynomial(limits, pt.x, pairing);
    c.verdict = schur_stable(c.polynomial, margin_band);
    (c.verdict.stable == Stability::kStable ? out.stable : out.unstable).push_back(std::move(c));
  }
  return out;
}

}  // namespace rdeq
