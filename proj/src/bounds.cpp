#include "rdeq/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rdeq/dynamics.hpp"

namespace rdeq {

CoefficientBands CoefficientBands::from_spec(const RecurrenceSpec& spec) {
  CoefficientBands bands;
  bands.a_low = spec.a().low;
  bands.a_high = spec.a().high;
  for (const auto& t : spec.terms()) {
    bands.b_low.push_back(t.b.low);
    bands.b_high.push_back(t.b.high);
  }
  return bands;
}

double CoefficientBands::b_low_sum() const {
  double s = 0.0;
  for (double b : b_low) s += b;
  return s;
}

double CoefficientBands::b_high_sum() const {
  double s = 0.0;
  for (double b : b_high) s += b;
  return s;
}

bool CoefficientBands::consistent() const {
  if (!(a_low > 0.0 && a_low <= a_high)) return false;
  if (b_low.size() != b_high.size() || b_low.empty()) return false;
  for (std::size_t i = 0; i < b_low.size(); ++i) {
    if (!(b_low[i] >= 0.0 && b_low[i] <= b_high[i])) return false;
  }
  return true;
}

bool CoefficientBands::encloses(const RecurrenceSpec& spec) const {
  if (b_low.size() != spec.q()) return false;
  if (spec.a().low < a_low || spec.a().high > a_high) return false;
  for (std::size_t i = 0; i < spec.q(); ++i) {
    if (spec.term(i).b.low < b_low[i] || spec.term(i).b.high > b_high[i]) return false;
  }
  return true;
}

const char* to_string(CertificateVariant v) {
  switch (v) {
    case CertificateVariant::kSingleTerm: return "single-term";
    case CertificateVariant::kFixedLower: return "fixed-lower";
    case CertificateVariant::kCoefficientBand: return "coefficient-band";
    case CertificateVariant::kGeneral: return "general";
  }
  return "unknown";
}

const char* to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::kPass: return "pass";
    case VerdictStatus::kFail: return "fail";
    case VerdictStatus::kNotApplicable: return "n/a";
  }
  return "unknown";
}

const char* to_string(ExponentVerdict v) {
  return v == ExponentVerdict::kBounded ? "bounded-by-exponent" : "inconclusive";
}

namespace {

bool leq(double lhs, double rhs) {
  return lhs <= rhs + kCertificateTolerance * std::max({std::abs(lhs), std::abs(rhs), 1.0});
}

std::string show(double lhs, const char* op, double rhs) {
  std::ostringstream os;
  os << format_double(lhs) << ' ' << op << ' ' << format_double(rhs);
  return os.str();
}

ConstraintVerdict verdict(bool ok, std::string detail) {
  return {ok ? VerdictStatus::kPass : VerdictStatus::kFail, std::move(detail)};
}

ConstraintVerdict not_applicable(std::string why) {
  return {VerdictStatus::kNotApplicable, std::move(why)};
}

void check_interval(double m, double big_m) {
  if (!(m > 0.0) || !std::isfinite(m)) throw SpecError("certificate needs m > 0");
  if (!(big_m >= m) || !std::isfinite(big_m)) throw SpecError("certificate needs m <= M < inf");
}

ConstraintVerdict band_verdict(const CoefficientBands& bands, std::size_t q) {
  if (bands.b_low.size() != q) return verdict(false, "band count does not match term count");
  return verdict(bands.consistent(), "0 < a_m <= a_M, 0 <= b_m <= b_M");
}

// Range of one recurrence step when every delayed value lies in [m, M] and
// the coefficients lie in their bands. Tight when each term reads two
// different lags; an enclosure otherwise.
void interval_step(const RecurrenceSpec& spec, const CoefficientBands& bands, double m,
                   double big_m, BoundCertificate& cert) {
  double low = bands.a_low;
  double high = bands.a_high;
  for (std::size_t i = 0; i < spec.q(); ++i) {
    const Term& t = spec.term(i);
    const double num_m = safe_pow(m, t.p);
    const double num_big = safe_pow(big_m, t.p);
    const double den_m = safe_pow(m, -t.r);
    const double den_big = safe_pow(big_m, -t.r);
    low += bands.b_low[i] * std::min(num_m, num_big) * std::min(den_m, den_big);
    high += bands.b_high[i] * std::max(num_m, num_big) * std::max(den_m, den_big);
  }
  cert.step_low = low;
  cert.step_high = high;
  cert.verdicts["interval"] =
      verdict(leq(m, low) && leq(high, big_m),
              show(m, "<=", low) + " and " + show(high, "<=", big_m));
}

// The 1/r-power necessary conditions; meaningful only for a positive power.
void necessary_power_conditions(const char* key, double m, double big_m, double b_low,
                                double b_high, double p_low, double r_low, double p_high,
                                double r_high, BoundCertificate& cert) {
  if (r_low <= 0.0 || r_high <= 0.0) {
    cert.verdicts[key] = not_applicable(r_low == 0.0 || r_high == 0.0
                                            ? "1/r power undefined for r = 0"
                                            : "inequality direction reverses for r < 0");
    return;
  }
  const double lower_req = std::max(m, std::pow(b_low, 1.0 / r_low) * std::pow(m, (p_low - 1.0) / r_low));
  const double upper_req = std::pow(b_high, 1.0 / r_high) * std::pow(big_m, (p_high - 1.0) / r_high);
  cert.verdicts[key] = verdict(leq(lower_req, big_m) && leq(upper_req, m),
                               show(big_m, ">=", lower_req) + " and " + show(m, ">=", upper_req));
}

// (b_M/b_m)^{p-1} >= M/m >= 1.
void band_ratio_condition(double m, double big_m, double b_low, double b_high, double p,
                          BoundCertificate& cert) {
  if (b_low == 0.0) {
    cert.verdicts["2.6"] = not_applicable("b_m = 0: zero lower band extension");
    return;
  }
  const double lhs = std::pow(b_high / b_low, p - 1.0);
  cert.verdicts["2.6"] =
      verdict(leq(big_m / m, lhs) && leq(1.0, big_m / m), show(lhs, ">=", big_m / m) + " >= 1");
}

// m(1 - b_m m^{p-1}/M^r) <= a_m <= a_M <= M(1 - b_M M^{p-1}/m^r)
ConstraintVerdict sandwich(double m, double big_m, double a_low, double a_high, double b_low,
                           double b_high, double p_low, double r_low, double p_high,
                           double r_high) {
  const double left = m * (1.0 - b_low * std::pow(m, p_low - 1.0) / std::pow(big_m, r_low));
  const double right = big_m * (1.0 - b_high * std::pow(big_m, p_high - 1.0) / std::pow(m, r_high));
  return verdict(leq(left, a_low) && leq(a_low, a_high) && leq(a_high, right),
                 show(left, "<=", a_low) + " <= " + format_double(a_high) + " <= " +
                     format_double(right));
}

void require_single_term(const RecurrenceSpec& spec) {
  if (spec.q() != 1) throw SpecError("single-term certificate needs q = 1");
}

bool all_pass(const BoundCertificate& cert, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    const auto it = cert.verdicts.find(k);
    if (it == cert.verdicts.end() || it->second.failed()) return false;
  }
  return true;
}

}  // namespace

BoundCertificate check_certificate_q1(const RecurrenceSpec& spec, double m, double big_m,
                                      const CoefficientBands& bands) {
  require_single_term(spec);
  check_interval(m, big_m);

  BoundCertificate cert;
  cert.variant = CertificateVariant::kSingleTerm;
  cert.m = m;
  cert.big_m = big_m;
  cert.bands = bands;
  cert.selection = exponent_extremes(spec, m, big_m);
  cert.verdicts["2.2"] = band_verdict(bands, 1);
  if (!cert.verdicts["2.2"].passed()) return cert;

  const double p = spec.term(0).p;
  const double r = spec.term(0).r;
  const double b_low = bands.b_low[0];
  const double b_high = bands.b_high[0];

  cert.verdicts["2.3"] = verdict(leq(bands.a_low, m), show(bands.a_low, "<=", m));
  cert.verdicts["2.4"] = sandwich(m, big_m, bands.a_low, bands.a_high, b_low, b_high, p, r, p, r);
  necessary_power_conditions("2.5", m, big_m, b_low, b_high, p, r, p, r, cert);
  band_ratio_condition(m, big_m, b_low, b_high, p, cert);
  interval_step(spec, bands, m, big_m, cert);

  cert.accepted = all_pass(cert, {"2.2", "2.3", "2.4", "2.5", "interval"});
  return cert;
}

BoundCertificate check_certificate_fixed_lower(const RecurrenceSpec& spec, double big_m,
                                               const CoefficientBands& bands) {
  require_single_term(spec);
  const double m = bands.a_low;
  check_interval(m, big_m);

  BoundCertificate cert;
  cert.variant = CertificateVariant::kFixedLower;
  cert.m = m;
  cert.big_m = big_m;
  cert.bands = bands;
  cert.selection = exponent_extremes(spec, m, big_m);
  cert.verdicts["2.2"] = band_verdict(bands, 1);
  if (!cert.verdicts["2.2"].passed()) return cert;

  const double p = spec.term(0).p;
  const double r = spec.term(0).r;
  const double b_high = bands.b_high[0];
  const double cap = big_m * (1.0 - b_high * std::pow(big_m, p - 1.0) / std::pow(m, r));
  const double b_cap = std::pow(m, r) / std::pow(big_m, p - 1.0);
  cert.verdicts["2.10"] =
      verdict(leq(bands.a_high, cap) && b_high > 0.0 && leq(b_high, b_cap),
              show(bands.a_high, "<=", cap) + " and " + show(b_high, "<=", b_cap));
  interval_step(spec, bands, m, big_m, cert);

  cert.accepted = all_pass(cert, {"2.2", "2.10", "interval"});
  return cert;
}

BoundCertificate check_certificate_band(const RecurrenceSpec& spec, double m, double big_m,
                                        const CoefficientBands& bands) {
  require_single_term(spec);
  check_interval(m, big_m);

  BoundCertificate cert;
  cert.variant = CertificateVariant::kCoefficientBand;
  cert.m = m;
  cert.big_m = big_m;
  cert.bands = bands;
  cert.selection = exponent_extremes(spec, m, big_m);
  cert.verdicts["2.2"] = band_verdict(bands, 1);
  if (!cert.verdicts["2.2"].passed()) return cert;

  const double p = spec.term(0).p;
  const double r = spec.term(0).r;
  const double b_low = bands.b_low[0];
  const double b_high = bands.b_high[0];
  cert.verdicts["2.11"] = sandwich(m, big_m, bands.a_low, bands.a_high, b_low, b_high, p, r, p, r);
  necessary_power_conditions("2.5", m, big_m, b_low, b_high, p, r, p, r, cert);
  band_ratio_condition(m, big_m, b_low, b_high, p, cert);
  interval_step(spec, bands, m, big_m, cert);

  cert.accepted = all_pass(cert, {"2.2", "2.11", "2.5", "interval"});
  return cert;
}

BoundCertificate check_certificate_general(const RecurrenceSpec& spec, double m, double big_m,
                                           const CoefficientBands& bands) {
  check_interval(m, big_m);

  BoundCertificate cert;
  cert.variant = CertificateVariant::kGeneral;
  cert.m = m;
  cert.big_m = big_m;
  cert.bands = bands;
  cert.selection = exponent_extremes(spec, m, big_m);
  cert.verdicts["2.2"] = band_verdict(bands, spec.q());
  if (!cert.verdicts["2.2"].passed()) return cert;

  const auto& sel = cert.selection;
  const double b_low = bands.b_low_sum();
  const double b_high = bands.b_high_sum();

  cert.verdicts["2.15"] = verdict(leq(bands.a_low, m), show(bands.a_low, "<=", m) + " (window assumed)");

  const double low_end = bands.a_low + b_low * std::pow(m, sel.nu_p) / std::pow(big_m, sel.mu_r);
  const double high_end = bands.a_high + b_high * std::pow(big_m, sel.mu_p) / std::pow(m, sel.nu_r);
  cert.verdicts["2.16"] = sandwich(m, big_m, bands.a_low, bands.a_high, b_low, b_high, sel.nu_p,
                                   sel.mu_r, sel.mu_p, sel.nu_r);
  cert.verdicts["2.16a"] = verdict(leq(low_end, bands.a_low),
                                   show(low_end, "<=", bands.a_low) + " (reported, not enforced)");
  necessary_power_conditions("2.17", m, big_m, b_low, b_high, sel.nu_p, sel.mu_r, sel.mu_p,
                             sel.nu_r, cert);
  cert.verdicts["2.18"] = verdict(leq(m, low_end) && leq(low_end, high_end) && leq(high_end, big_m),
                                  show(m, "<=", low_end) + " <= " + format_double(high_end) +
                                      " <= " + format_double(big_m));
  interval_step(spec, bands, m, big_m, cert);

  cert.accepted = all_pass(cert, {"2.2", "2.18", "interval"});
  return cert;
}

SearchBox SearchBox::around(const CoefficientBands& bands) {
  SearchBox box;
  const double reach = std::max(1.0, bands.a_high + bands.b_high_sum());
  box.m_low = 1e-2 * bands.a_low;
  box.m_high = std::max(bands.a_high, 1.0) * 10.0;
  box.big_m_low = bands.a_low;
  box.big_m_high = 1e3 * reach;
  return box;
}

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g;
  if (n == 1 || lo == hi) return {lo};
  g.reserve(static_cast<std::size_t>(n));
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < n; ++i) {
    g.push_back(i == 0 ? lo : i == n - 1 ? hi : std::exp(a + (b - a) * i / (n - 1)));
  }
  return g;
}

}  // namespace

std::optional<BoundCertificate> search_certificate(const RecurrenceSpec& spec,
                                                   const CoefficientBands& bands,
                                                   const SearchBox& box) {
  if (!(box.m_low > 0.0) || !(box.m_low <= box.m_high) || !(box.big_m_low > 0.0) ||
      !(box.big_m_low <= box.big_m_high) || box.grid < 1) {
    throw SpecError("empty or non-positive search box");
  }
  const auto ms = log_grid(box.m_low, box.m_high, box.grid);
  const auto big_ms = log_grid(box.big_m_low, box.big_m_high, box.grid);

  std::optional<BoundCertificate> best;
  for (double m : ms) {
    for (double big_m : big_ms) {
      if (big_m < m) continue;
      if (best && big_m / m <= best->big_m / best->m) continue;
      auto cert = check_certificate_general(spec, m, big_m, bands);
      if (cert.accepted) best = std::move(cert);
    }
  }
  return best;
}

std::pair<double, double> inverse_bounds(const BoundCertificate& cert) {
  if (!cert.accepted) throw SpecError("inverse bounds need an accepted certificate");
  if (!(cert.m > 0.0)) throw SpecError("inverse bounds need m > 0");
  return {1.0 / cert.big_m, 1.0 / cert.m};
}

ExponentVerdict boundedness_by_exponent(const RecurrenceSpec& spec) {
  for (const auto& t : spec.terms()) {
    if (!(t.p > 0.0 && t.p < 1.0)) return ExponentVerdict::kInconclusive;
  }
  return ExponentVerdict::kBounded;
}

}  // namespace rdeq
