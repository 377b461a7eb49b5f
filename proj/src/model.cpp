#include "rdeq/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace rdeq {

CoefficientModel CoefficientModel::constant(double value) {
  CoefficientModel c;
  c.kind = CoefficientKind::kConstant;
  c.low = c.high = c.start = value;
  c.limit = value;
  return c;
}

CoefficientModel CoefficientModel::convergent(double start, double limit, double decay) {
  if (!(decay >= 0.0 && decay < 1.0)) {
    throw SpecError("convergent coefficient: decay must lie in [0, 1)");
  }
  CoefficientModel c;
  c.kind = CoefficientKind::kConvergent;
  c.start = start;
  c.decay = decay;
  c.limit = limit;
  c.low = std::min(start, limit);
  c.high = std::max(start, limit);
  return c;
}

CoefficientModel CoefficientModel::banded(double low, double high,
                                          std::optional<double> limit) {
  if (!(low <= high)) throw SpecError("banded coefficient: low > high");
  if (limit && (*limit < low || *limit > high)) {
    throw SpecError("banded coefficient: declared limit outside the band");
  }
  CoefficientModel c;
  c.kind = CoefficientKind::kBanded;
  c.low = low;
  c.high = high;
  c.start = 0.5 * (low + high);
  c.limit = limit;
  return c;
}

double CoefficientModel::deterministic_value(std::int64_t k) const {
  switch (kind) {
    case CoefficientKind::kConstant:
      return start;
    case CoefficientKind::kConvergent:
      return *limit + (start - *limit) * std::pow(decay, static_cast<double>(k));
    case CoefficientKind::kBanded:
      break;
  }
  return 0.5 * (low + high);
}

std::vector<double> RecurrenceSpec::p() const {
  std::vector<double> out;
  out.reserve(terms_.size());
  for (const auto& t : terms_) out.push_back(t.p);
  return out;
}

std::vector<double> RecurrenceSpec::r() const {
  std::vector<double> out;
  out.reserve(terms_.size());
  for (const auto& t : terms_) out.push_back(t.r);
  return out;
}

namespace {

void validate_band(const CoefficientModel& c, const std::string& name) {
  if (!std::isfinite(c.low) || !std::isfinite(c.high)) {
    throw SpecError(name + ": band must be finite");
  }
  if (c.low > c.high) throw SpecError(name + ": low > high");
  if (c.limit && (*c.limit < c.low || *c.limit > c.high)) {
    throw SpecError(name + ": limit outside the band");
  }
}

}  // namespace

RecurrenceSpec build_spec(const RawSpec& raw) {
  if (raw.terms.empty()) throw SpecError("term list is empty (q must be >= 1)");

  validate_band(raw.a, "A");
  if (!(raw.a.low > 0.0)) throw SpecError("A: band must be strictly positive");

  bool any_b = false;
  for (std::size_t i = 0; i < raw.terms.size(); ++i) {
    const Term& t = raw.terms[i];
    const std::string name = "term " + std::to_string(i + 1);
    if (t.ell < 1) throw SpecError(name + ": delay ell must be >= 1");
    if (t.s < 1) throw SpecError(name + ": delay s must be >= 1");
    if (!std::isfinite(t.p) || !std::isfinite(t.r)) {
      throw SpecError(name + ": exponents must be finite");
    }
    validate_band(t.b, name + " B");
    if (t.b.low < 0.0) throw SpecError(name + " B: band must be nonnegative");
    any_b = any_b || !t.b.identically_zero();
  }
  if (!any_b) throw SpecError("all B coefficients are identically zero");

  RecurrenceSpec spec;
  spec.a_ = raw.a;
  spec.terms_ = raw.terms;
  spec.max_ell_ = 1;
  spec.max_s_ = 1;
  for (const auto& t : raw.terms) {
    spec.max_ell_ = std::max(spec.max_ell_, t.ell);
    spec.max_s_ = std::max(spec.max_s_, t.s);
  }
  return spec;
}

InitialConditions InitialConditions::from_values(std::vector<double> oldest_first) {
  InitialConditions init;
  init.start = 1 - static_cast<int>(oldest_first.size());
  init.values = std::move(oldest_first);
  return init;
}

InitialConditions InitialConditions::constant(const RecurrenceSpec& spec, double value) {
  return from_values(std::vector<double>(static_cast<std::size_t>(spec.window_size()), value));
}

AdmissibilityReport check_admissible(const InitialConditions& init,
                                     const RecurrenceSpec& spec) {
  if (init.end() != 0) throw SpecError("initial window must end at index 0");
  if (init.start > spec.window_start()) {
    throw SpecError("initial window too short: need " + std::to_string(spec.window_size()) +
                    " values, got " + std::to_string(init.values.size()));
  }

  AdmissibilityReport report;
  for (int j = 0; init.start <= -j; ++j) {
    const double x = init.at(-j);
    const bool in_denominator_zone = j < spec.max_s();
    const bool ok = std::isfinite(x) && (in_denominator_zone ? x > 0.0 : x >= 0.0);
    if (!ok) {
      report.admissible = false;
      report.first_violation = -j;
      report.message = "x_" + std::to_string(-j) +
                       (in_denominator_zone ? " must be strictly positive"
                                            : " must be nonnegative");
      return report;
    }
  }
  return report;
}

double ExponentSelection::slot(ExponentSlot s) const {
  switch (s) {
    case ExponentSlot::kMuP: return mu_p;
    case ExponentSlot::kNuP: return nu_p;
    case ExponentSlot::kMuR: return mu_r;
    case ExponentSlot::kNuR: return nu_r;
  }
  return 0.0;
}

namespace {

enum class Extremum { kMax, kMin };

// First index whose value is the extremum of key(i).
std::size_t arg_extremum(std::size_t n, Extremum e, const std::function<double(std::size_t)>& key) {
  std::size_t best = 0;
  double best_value = key(0);
  for (std::size_t i = 1; i < n; ++i) {
    const double v = key(i);
    if ((e == Extremum::kMax && v > best_value) || (e == Extremum::kMin && v < best_value)) {
      best = i;
      best_value = v;
    }
  }
  return best;
}

// Partition flags of an exponent set around a pivot (1 for p, 0 for r).
struct SplitFlags {
  bool has_upper = false;  // some exponent >= pivot
  bool has_lower = false;  // some exponent < pivot
};

SplitFlags split(std::span<const double> e, double pivot) {
  SplitFlags f;
  for (double x : e) (x >= pivot ? f.has_upper : f.has_lower) = true;
  return f;
}

// The decomposition selects, per slot, an extremum over one side of the
// split. `take_upper` says which side holds the extremum.
struct CaseChoice {
  const char* tag;
  bool take_upper;
  Extremum extremum;
};

// mu_p: maximize M^{p-1}.
CaseChoice mu_p_case(SplitFlags f, double big_m) {
  if (big_m >= 1.0) {
    return f.has_upper ? CaseChoice{"i.1", true, Extremum::kMax}
                       : CaseChoice{"iii.1", false, Extremum::kMax};
  }
  if (!f.has_upper) return {"iii.2", false, Extremum::kMin};
  return f.has_lower ? CaseChoice{"i.3", false, Extremum::kMin}
                     : CaseChoice{"i.2", true, Extremum::kMin};
}

// nu_r: minimize M^{r}.
CaseChoice nu_r_case(SplitFlags f, double big_m) {
  if (big_m >= 1.0) {
    if (!f.has_upper) return {"iii.3", false, Extremum::kMin};
    // With negative exponents present the minimum sits among them.
    return {"i.4", !f.has_lower, Extremum::kMin};
  }
  if (!f.has_upper) return {"iii.4", false, Extremum::kMax};
  return f.has_lower ? CaseChoice{"i.6", true, Extremum::kMax}
                     : CaseChoice{"i.5", true, Extremum::kMax};
}

// nu_p: minimize m^{p-1}.
CaseChoice nu_p_case(SplitFlags f, double m) {
  if (m >= 1.0) {
    if (!f.has_upper) return {"iv.1", false, Extremum::kMin};
    return {"ii.1", !f.has_lower, Extremum::kMin};
  }
  if (!f.has_upper) return {"iv.2", false, Extremum::kMax};
  return f.has_lower ? CaseChoice{"ii.3", true, Extremum::kMax}
                     : CaseChoice{"ii.2", true, Extremum::kMax};
}

// mu_r: maximize m^{r}.
CaseChoice mu_r_case(SplitFlags f, double m) {
  if (m >= 1.0) {
    return f.has_upper ? CaseChoice{"ii.4", true, Extremum::kMax}
                       : CaseChoice{"iv.3", false, Extremum::kMax};
  }
  if (!f.has_upper) return {"iv.4", false, Extremum::kMin};
  return f.has_lower ? CaseChoice{"ii.6", false, Extremum::kMin}
                     : CaseChoice{"ii.5", true, Extremum::kMin};
}

std::size_t select_by_case(std::span<const double> e, double pivot, const CaseChoice& c) {
  std::size_t best = e.size();
  for (std::size_t i = 0; i < e.size(); ++i) {
    if ((e[i] >= pivot) != c.take_upper) continue;
    if (best == e.size() ||
        (c.extremum == Extremum::kMax && e[i] > e[best]) ||
        (c.extremum == Extremum::kMin && e[i] < e[best])) {
      best = i;
    }
  }
  return best;
}

void check_exponent_inputs(std::span<const double> p, std::span<const double> r, double m,
                           double big_m) {
  if (p.empty() || p.size() != r.size()) {
    throw SpecError("exponent sets must be nonempty and of equal size");
  }
  if (!(m > 0.0)) throw SpecError("m must be strictly positive");
  if (!(big_m >= m)) throw SpecError("M must be >= m");
}

}  // namespace

ExponentSelection exponent_extremes(std::span<const double> p, std::span<const double> r,
                                    double m, double big_m) {
  check_exponent_inputs(p, r, m, big_m);
  const std::size_t n = p.size();

  ExponentSelection sel;
  sel.index[0] = arg_extremum(n, Extremum::kMax, [&](std::size_t i) { return std::pow(big_m, p[i] - 1.0); });
  sel.index[1] = arg_extremum(n, Extremum::kMin, [&](std::size_t i) { return std::pow(m, p[i] - 1.0); });
  sel.index[2] = arg_extremum(n, Extremum::kMax, [&](std::size_t i) { return std::pow(m, r[i]); });
  sel.index[3] = arg_extremum(n, Extremum::kMin, [&](std::size_t i) { return std::pow(big_m, r[i]); });
  sel.mu_p = p[sel.index[0]];
  sel.nu_p = p[sel.index[1]];
  sel.mu_r = r[sel.index[2]];
  sel.nu_r = r[sel.index[3]];

  const SplitFlags fp = split(p, 1.0);
  const SplitFlags fr = split(r, 0.0);
  sel.case_tag = {mu_p_case(fp, big_m).tag, nu_p_case(fp, m).tag, mu_r_case(fr, m).tag,
                  nu_r_case(fr, big_m).tag};
  return sel;
}

ExponentSelection exponent_extremes(const RecurrenceSpec& spec, double m, double big_m) {
  const auto p = spec.p();
  const auto r = spec.r();
  return exponent_extremes(p, r, m, big_m);
}

ExponentSelection exponent_extremes_by_cases(std::span<const double> p,
                                             std::span<const double> r, double m,
                                             double big_m) {
  check_exponent_inputs(p, r, m, big_m);
  const SplitFlags fp = split(p, 1.0);
  const SplitFlags fr = split(r, 0.0);
  const std::array<CaseChoice, 4> cases = {mu_p_case(fp, big_m), nu_p_case(fp, m),
                                           mu_r_case(fr, m), nu_r_case(fr, big_m)};

  ExponentSelection sel;
  sel.index[0] = select_by_case(p, 1.0, cases[0]);
  sel.index[1] = select_by_case(p, 1.0, cases[1]);
  sel.index[2] = select_by_case(r, 0.0, cases[2]);
  sel.index[3] = select_by_case(r, 0.0, cases[3]);
  sel.mu_p = p[sel.index[0]];
  sel.nu_p = p[sel.index[1]];
  sel.mu_r = r[sel.index[2]];
  sel.nu_r = r[sel.index[3]];
  for (std::size_t i = 0; i < 4; ++i) sel.case_tag[i] = cases[i].tag;
  return sel;
}

RhoDelta rho_delta(std::span<const double> p, std::span<const double> r) {
  if (p.empty() || p.size() != r.size()) {
    throw SpecError("exponent sets must be nonempty and of equal size");
  }
  RhoDelta out{p[0] - r[0], p[0] - r[0]};
  for (std::size_t i = 1; i < p.size(); ++i) {
    out.rho = std::max(out.rho, p[i] - r[i]);
    out.delta = std::min(out.delta, p[i] - r[i]);
  }
  return out;
}

RhoDelta rho_delta(const RecurrenceSpec& spec) {
  const auto p = spec.p();
  const auto r = spec.r();
  return rho_delta(p, r);
}

}  // namespace rdeq
