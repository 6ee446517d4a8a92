#include "symdyn/ct_conditions.hpp"

#include <cmath>
#include <limits>

#include "symdyn/error.hpp"
#include "symdyn/gluing.hpp"
#include "symdyn/log_sum.hpp"

namespace symdyn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : "-inf";
}

// P(C, phi, delta, eps) < P, decided with the enumeration spread as tolerance.
ConditionResult pressure_below(const std::string& name, const ShiftSystem& sys, const Potential& phi,
                               const SegmentClass& c, Resolution delta, Resolution eps, double p, int n_cap,
                               const EnumerationOptions& options) {
  ConditionResult r;
  r.name = name;
  r.data["class"] = c.label();
  r.data["delta_level"] = delta.level;
  r.data["eps_level"] = eps.level;
  if (c.kind() == SegmentClass::Kind::kEmpty) {
    r.margin = kInf;
    r.detail = "class is empty: pressure -inf";
    r.data["pressure"] = "-inf";
    return r;
  }
  if (c.kind() == SegmentClass::Kind::kAll) {
    // The class is everything, so its pressure is P itself.
    r.margin = 0.0;
    r.status = ConditionStatus::kFail;
    r.detail = "class contains every segment: pressure equals P";
    r.data["pressure"] = p;
    return r;
  }
  const int n_min = std::max(2, n_cap / 2);
  const PressureReport est = pressure_enumerate(sys, phi, c, delta, eps, n_min, std::max(n_min, n_cap), options);
  r.data["pressure"] = number(est.value);
  r.data["estimate"] = est.to_json();
  r.margin = p - est.value;
  const double err = est.error_bound;
  if (est.value == kNegInf) {
    r.detail = "class empty on the sampled range";
  } else if (r.margin > err) {
    r.detail = "margin exceeds enumeration spread";
  } else if (r.margin < -err || (r.margin <= 0.0 && err == 0.0)) {
    r.status = ConditionStatus::kFail;
    r.detail = "class pressure is not below P";
  } else {
    r.status = ConditionStatus::kInconclusive;
    r.detail = "|margin| within enumeration spread";
  }
  return r;
}

}  // namespace

void CTResolutions::validate() const {
  if (eps.level < 1 || gamma.level < 1 || delta.level < 1) throw ConfigError("resolution levels must be >= 1");
  if (gamma.level < eps.level + 4) {
    throw ConfigError("8*gamma < eps needs gamma level >= eps level + 4 (got " + std::to_string(gamma.level) +
                      " vs " + std::to_string(eps.level) + ")");
  }
  if (delta.level < gamma.level + 2) {
    throw ConfigError("16*delta < 8*gamma needs delta level >= gamma level + 2 (got " +
                      std::to_string(delta.level) + " vs " + std::to_string(gamma.level) + ")");
  }
}

nlohmann::json CTResolutions::to_json() const {
  return {{"eps_level", eps.level}, {"gamma_level", gamma.level}, {"delta_level", delta.level}};
}

std::string to_string(ConditionStatus s) {
  switch (s) {
    case ConditionStatus::kPass: return "pass";
    case ConditionStatus::kFail: return "fail";
    case ConditionStatus::kInconclusive: return "inconclusive";
  }
  return "?";
}

bool CTReport::all_pass() const {
  for (const auto& c : conditions) {
    if (c.status != ConditionStatus::kPass) return false;
  }
  return true;
}

bool CTReport::any_fail() const {
  for (const auto& c : conditions) {
    if (c.status == ConditionStatus::kFail) return true;
  }
  return false;
}

nlohmann::json CTReport::to_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& c : conditions) {
    list.push_back({{"name", c.name},
                    {"status", to_string(c.status)},
                    {"margin", number(c.margin)},
                    {"detail", c.detail},
                    {"data", c.data}});
  }
  return {{"pressure", pressure}, {"all_pass", all_pass()}, {"conditions", list}};
}

CTReport check_ct_conditions(const ShiftSystem& sys, const Potential& phi, const CTDecomposition& dec,
                             const CTResolutions& res, int n_cap, std::uint64_t seed,
                             const EnumerationOptions& options) {
  res.validate();
  if (n_cap < 2 || n_cap > 16) throw ConfigError("condition checks need 2 <= n_cap <= 16");
  CTReport report;
  const double p = pressure_oracle(sys, phi).value;
  report.pressure = p;

  ConditionResult& glue = report.conditions[0];
  glue.name = "gluing on G_M";
  glue.margin = kInf;
  for (int m : {0, 1, 2}) {
    const SegmentClass gm = restrict_gm(dec, m);
    try {
      const auto cert = check_gluing(sys, gm, res.delta, 1, std::nullopt, seed + static_cast<std::uint64_t>(m));
      glue.data["M" + std::to_string(m)] = cert.to_json();
    } catch (const StructuralError& e) {
      glue.status = ConditionStatus::kFail;
      glue.margin = 0.0;
      glue.detail = "M=" + std::to_string(m) + ": " + e.what();
      glue.data["M" + std::to_string(m)] = e.what();
    }
  }
  if (glue.status == ConditionStatus::kPass) glue.detail = "certificates for M = 0, 1, 2";

  report.conditions[1] = pressure_below("P(D^c, 2gamma, 2gamma) < P", sys, phi, dec.d.complement(),
                                        res.gamma.scaled(2), res.gamma.scaled(2), p, n_cap, options);
  report.conditions[2] = pressure_below("P(P u S, gamma, 3gamma) < P", sys, phi, dec.p | dec.s, res.gamma,
                                        res.gamma.scaled(3), p, n_cap, options);

  ConditionResult& bowen = report.conditions[3];
  bowen.name = "Bowen property on G at 3gamma";
  const Resolution three_gamma = res.gamma.scaled(3);
  const BowenBound b = bowen_bound(sys, phi, dec.g, three_gamma, n_cap, options);
  bowen.data = {{"V", b.certified}, {"sampled", b.sampled}, {"level", three_gamma.level}, {"n_cap", n_cap}};
  bowen.margin = b.certified - b.sampled;
  if (b.sampled > b.certified + 1e-12) {
    bowen.status = ConditionStatus::kFail;
    bowen.detail = "ball enumeration exceeds the locally constant bound";
  } else {
    bowen.detail = "V = " + std::to_string(b.certified) + ", uniform in n";
  }

  ConditionResult& exp = report.conditions[4];
  exp.name = "P_exp^perp(eps) < P";
  const ExpansivityReport e = expansivity_report(sys, res.eps);
  exp.margin = p - e.p_exp_bot;
  exp.data = {{"h_star", e.h_star}, {"non_expansive_set_empty", e.ne_empty}, {"p_exp_perp", number(e.p_exp_bot)}};
  exp.detail = "shifts are expansive: the non-expansive set is empty";
  return report;
}

}  // namespace symdyn
