#include "symdyn/construction.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <sstream>

#include "symdyn/error.hpp"
#include "symdyn/gluing.hpp"
#include "symdyn/log_sum.hpp"

namespace symdyn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

InequalityCheck greater(std::string name, double lhs, double rhs, bool informational = false) {
  return {std::move(name), lhs, rhs, lhs > rhs, informational};
}

MeasuredConstants measure_constants(const ShiftSystem& sys, const Potential& phi, const CTDecomposition& dec,
                                    double pressure, const ConstructionConfig& config,
                                    std::optional<GluingCertificate>& cert) {
  MeasuredConstants out;
  out.scan = nlohmann::json::array();
  const Resolution two_gamma = config.res.gamma.scaled(2);
  for (int m : {0, 1, 2, 4}) {
    nlohmann::json entry = {{"M", m}};
    const SegmentClass gm = restrict_gm(dec, m);
    std::optional<GluingCertificate> c;
    try {
      c = check_gluing(sys, gm, config.res.delta, 1, std::nullopt, config.seed + static_cast<std::uint64_t>(m));
      // Uniform gaps keep every Y-prefix uniquely parsed, so Lambda's automaton stays near |E| N states.
      c = uniform_gap_certificate(sys, gm, *c, config.seed + static_cast<std::uint64_t>(m));
    } catch (const StructuralError& e) {
      entry["gluing"] = e.what();
      out.scan.push_back(entry);
      continue;
    }
    std::vector<double> log_c;
    for (int n = 1; n <= config.n_cap; ++n) {
      log_c.push_back(log_partition_function(sys, phi, gm, n, two_gamma, std::nullopt, config.options) - n * pressure);
    }
    // First n after which c_n stays within 0.1 of c_n.
    int n1 = config.n_cap;
    for (int n = 1; n <= config.n_cap; ++n) {
      bool stable = std::isfinite(log_c[n - 1]);
      for (int k = n; k <= config.n_cap && stable; ++k) stable = std::abs(log_c[k - 1] - log_c[n - 1]) <= 0.1;
      if (stable) {
        n1 = n;
        break;
      }
    }
    double log_c0 = kInf;
    for (int n = n1; n <= config.n_cap; ++n) log_c0 = std::min(log_c0, log_c[n - 1]);
    nlohmann::json cs = nlohmann::json::array();
    for (double v : log_c) cs.push_back(number(v));
    entry["gluing"] = "pass";
    entry["log_c"] = cs;
    entry["N1"] = n1;
    entry["log_C0"] = number(log_c0);
    out.scan.push_back(entry);
    if (std::isfinite(log_c0)) {
      out.M = m;
      out.N1 = n1;
      out.log_C0 = log_c0;
      out.log_c = log_c;
      cert = std::move(c);
      return out;
    }
  }
  throw PreconditionError("no M in {0,1,2,4} gives a gluing class G_M with measurable C0: " + out.scan.dump());
}

}  // namespace

nlohmann::json ConstructionConfig::to_json() const {
  return {{"resolutions", res.to_json()},
          {"N_cap", n_cap_search},
          {"n_cap", n_cap},
          {"seed", seed},
          {"word_budget", options.word_budget},
          {"enum_n_max", enum_n_max},
          {"enum_budget", enum_budget}};
}

nlohmann::json InequalityCheck::to_json() const {
  return {{"name", name},
          {"lhs", number(lhs)},
          {"rhs", number(rhs)},
          {"margin", number(lhs - rhs)},
          {"holds", holds},
          {"informational", informational}};
}

nlohmann::json NCandidate::to_json() const {
  nlohmann::json c = nlohmann::json::array();
  for (const auto& x : checks) c.push_back(x.to_json());
  nlohmann::json j = {{"N", N}, {"feasible", feasible}, {"checks", c}};
  if (!note.empty()) j["note"] = note;
  return j;
}

nlohmann::json MeasuredConstants::to_json() const {
  nlohmann::json cs = nlohmann::json::array();
  for (double v : log_c) cs.push_back(number(v));
  return {{"M", M}, {"N1", N1}, {"log_C0", number(log_C0)}, {"log_c", cs}, {"scan", scan}};
}

ESelection select_e_set(const ShiftSystem& sys, const Potential& phi, const SegmentClass& gm, double alpha,
                        double eta, int N, Resolution gamma, const EnumerationOptions& options) {
  (void)gamma;
  if (N < 1) throw PreconditionError("select_e_set needs N >= 1");
  if (eta <= 0.0) throw PreconditionError("select_e_set needs eta > 0");
  const double lower = N * (alpha - eta), upper = N * (alpha + eta);
  struct Cand {
    double phi;
    Word word;
  };
  // Ranks a before b: larger Phi first, then lexicographic.
  auto before = [](const Cand& a, const Cand& b) {
    if (a.phi != b.phi) return a.phi > b.phi;
    return a.word < b.word;
  };
  // Top of the queue is the last-ranked candidate kept.
  std::priority_queue<Cand, std::vector<Cand>, decltype(before)> kept(before);
  long double mass = 0.0L;  // sum of e^{Phi - lower} over kept
  LogSumExp available;
  double sup_phi = kNegInf;
  std::size_t candidates = 0;
  enumerate_words(
      sys, N,
      [&](std::span<const Symbol> w) {
        if (!gm.contains(w, N)) return;
        const double v = max_birkhoff_sum(sys, phi, w, N);
        ++candidates;
        available.add(v);
        sup_phi = std::max(sup_phi, v);
        kept.push({v, Word(w.begin(), w.end())});
        mass += std::exp(static_cast<long double>(v - lower));
        // Drop the last-ranked word while the rest still exceeds the threshold.
        while (kept.size() > 1) {
          const long double worst = std::exp(static_cast<long double>(kept.top().phi - lower));
          if (mass - worst <= 1.0L) break;
          mass -= worst;
          kept.pop();
        }
      },
      options.word_budget);
  if (candidates == 0) throw PreconditionError("E* is empty: no admissible " + std::to_string(N) + "-word lies in G_M");
  if (!(sup_phi < lower)) {
    throw PreconditionError("sup Phi(x,N) < N(alpha-eta) fails: " + fmt(sup_phi) + " >= " + fmt(lower));
  }
  if (!(available.value() > lower)) {
    throw PreconditionError("E* mass too small: ln sum e^Phi = " + fmt(available.value()) +
                            " <= N(alpha-eta) = " + fmt(lower));
  }
  ESelection out;
  out.candidates = candidates;
  out.log_available = available.value();
  out.log_mass = lower + static_cast<double>(std::log(mass));
  if (!(out.log_mass < upper)) {
    throw PreconditionError("selected mass too large: ln sum e^Phi = " + fmt(out.log_mass) +
                            " >= N(alpha+eta) = " + fmt(upper));
  }
  out.words.resize(kept.size());
  for (std::size_t i = kept.size(); i-- > 0;) {
    out.words[i] = kept.top().word;
    kept.pop();
  }
  return out;
}

ConstructionResult construct_intermediate(const ShiftSystem& sys, const Potential& phi, const CTDecomposition& dec,
                                          double alpha, double eta0, const ConstructionConfig& config) {
  config.res.validate();
  sys.require_strongly_connected();
  if (!(eta0 > 0.0)) throw ConfigError("eta0 must be positive");
  if (config.n_cap < 2) throw ConfigError("n_cap must be >= 2");
  const double p = pressure_oracle(sys, phi).value;
  const double p_star = pstar(sys, phi);
  if (!(alpha > p_star && alpha < p)) {
    throw PreconditionError("alpha = " + fmt(alpha) + " must lie strictly between P*(phi) = " + fmt(p_star) +
                            " and P(phi) = " + fmt(p));
  }
  const double eta0_used = std::min({eta0, 0.99 * (alpha - p_star), 0.99 * (p - alpha)});

  // Work with phi - min phi >= 0; alpha moves with it.
  const double shift = phi.min();
  const Potential phi_n = phi.shifted(-shift);
  const double alpha_n = alpha - shift;
  const double eta = std::min(eta0_used / 5.0, alpha_n / 5.0);
  const double phi_plus = phi_n.max();
  const double var = phi_n.max() - phi_n.min();

  std::optional<GluingCertificate> cert;
  MeasuredConstants constants = measure_constants(sys, phi, dec, p, config, cert);
  const int tau = cert->tau;
  const int n0 = cert->n0;
  const double v_bowen = bowen_bound(sys, phi_n, dec.g, Resolution{1}, config.n_cap, config.options).certified;
  const double log_s = std::log(count_words_approx(sys, tau + config.res.delta.level - 1));
  const int first_n = std::max(n0, constants.N1) + 1;
  const std::vector<double> averages =
      max_birkhoff_averages(sys, phi_n, std::max(first_n, config.n_cap_search));
  const SegmentClass gm = restrict_gm(dec, constants.M);

  std::vector<NCandidate> search;
  std::optional<ESelection> selection;
  int chosen = 0;
  for (int n = first_n; n <= config.n_cap_search; ++n) {
    NCandidate c;
    c.N = n;
    const double sup_phi = n * averages[n - 1];
    c.checks.push_back(greater("single word below target: N(alpha-eta) > sup Phi(x,N)", n * (alpha_n - eta), sup_phi));
    c.checks.push_back(greater("length: N > max(N0,N1)", n, std::max(n0, constants.N1)));
    c.checks.push_back(greater("mass constant: ln C0 + N eta > 0", constants.log_C0 + n * eta, 0.0));
    c.checks.push_back(greater("mass doubling: 2 N eta > ln 2", 2.0 * n * eta, std::log(2.0)));
    c.checks.push_back(greater("gap cost: N > alpha tau / eta", n, alpha_n * tau / eta));
    c.checks.push_back(greater("gap cost: N > tau", n, tau));
    c.checks.push_back(greater("gap cost: alpha > eta", alpha_n, eta));
    c.checks.push_back(greater("gap rate: N(alpha-eta) > (N+tau)(alpha-2eta)", n * (alpha_n - eta),
                               (n + tau) * (alpha_n - 2.0 * eta)));
    c.checks.push_back(greater("distortion: N eta > V + 2M var", n * eta, v_bowen + 2.0 * constants.M * var));
    c.checks.push_back(greater("gap weight: N eta > tau phi+", n * eta, tau * phi_plus));
    c.checks.push_back(greater("gap count, literal form: N eta > ln tau + ln s(X,tau,delta)", n * eta,
                               tau == 0 ? kNegInf : std::log(static_cast<double>(tau)) + log_s, true));
    c.feasible = true;
    for (const auto& x : c.checks) c.feasible = c.feasible && (x.holds || x.informational);
    if (c.feasible) {
      try {
        selection = select_e_set(sys, phi_n, gm, alpha_n, eta, n, config.res.gamma, config.options);
      } catch (const PreconditionError& e) {
        c.feasible = false;
        c.note = e.what();
      }
    }
    search.push_back(c);
    if (c.feasible) {
      chosen = n;
      break;
    }
  }
  if (chosen == 0) {
    std::ostringstream msg;
    msg << "no N in [" << first_n << ", " << config.n_cap_search << "] satisfies the construction inequalities";
    for (const auto& c : search) {
      msg << "\n  N=" << c.N << ":";
      for (const auto& x : c.checks) {
        if (!x.holds && !x.informational) msg << " [" << x.name << " margin " << fmt(x.lhs - x.rhs) << "]";
      }
      if (!c.note.empty()) msg << " [" << c.note << "]";
    }
    throw PreconditionError(msg.str());
  }

  LambdaParams params;
  params.alpha = alpha;
  params.eta0 = eta0_used;
  params.eta = eta;
  params.N = chosen;
  params.M = constants.M;
  params.tau = tau;
  params.phi_shift = shift;
  ConstructionResult r(build_lambda(sys, phi, selection->words, *cert, params));
  r.alpha = alpha;
  r.eta0_requested = eta0;
  r.pressure = p;
  r.pstar = p_star;
  r.constants = std::move(constants);
  r.search = std::move(search);
  r.selection = std::move(*selection);
  r.lower = r.lambda.oracle_pressure();
  r.lower.delta_level = config.res.gamma.level;
  r.upper = r.lambda.oracle_pressure();
  r.upper.delta_level = config.res.delta.scaled(2).level;
  r.certified = r.lower.value >= alpha - eta0 && r.upper.value <= alpha + eta0;
  if (config.enum_n_max >= 2) {
    try {
      r.lower_enumeration = r.lambda.enumerate_y(config.res.gamma, 2, config.enum_n_max, config.enum_budget);
      r.upper_enumeration =
          r.lambda.enumerate_lambda(config.res.delta.scaled(2), 2, config.enum_n_max, config.enum_budget);
    } catch (const ResourceError& e) {
      r.enumeration_note = e.what();
    }
  }
  return r;
}

nlohmann::json ConstructionResult::to_json() const {
  nlohmann::json search_json = nlohmann::json::array();
  for (const auto& c : search) search_json.push_back(c.to_json());
  nlohmann::json j = {{"alpha", alpha},
                      {"eta0", eta0_requested},
                      {"eta0_used", lambda.params().eta0},
                      {"pressure", number(pressure)},
                      {"pstar", number(pstar)},
                      {"certified", certified},
                      {"lambda_pressure", number(lower.value)},
                      {"gap", number(std::abs(lower.value - alpha))},
                      {"lower", lower.to_json()},
                      {"upper", upper.to_json()},
                      {"lower_target", alpha - eta0_requested},
                      {"upper_target", alpha + eta0_requested},
                      {"constants", constants.to_json()},
                      {"N_search", search_json},
                      {"selection",
                       {{"E_size", selection.words.size()},
                        {"E_star_size", selection.candidates},
                        {"log_mass", selection.log_mass},
                        {"log_available", selection.log_available}}},
                      {"lambda", lambda.to_json()}};
  j["lower_enumeration"] = lower_enumeration ? lower_enumeration->to_json() : nlohmann::json(nullptr);
  j["upper_enumeration"] = upper_enumeration ? upper_enumeration->to_json() : nlohmann::json(nullptr);
  if (!enumeration_note.empty()) j["enumeration_note"] = enumeration_note;
  return j;
}

std::size_t DensityReport::certified_rows() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.certified;
  return n;
}

double DensityReport::max_gap() const {
  double g = 0.0;
  for (const auto& r : rows) {
    if (r.error.empty()) g = std::max(g, r.gap);
  }
  return g;
}

void DensityReport::write_csv(std::ostream& out) const {
  out << "alpha,certified,pressure,gap,N,tau,E_size\n";
  char buf[256];
  for (const auto& r : rows) {
    if (r.error.empty()) {
      std::snprintf(buf, sizeof buf, "%.12f,%s,%.12f,%.12f,%d,%d,%zu\n", r.alpha, r.certified ? "true" : "false",
                    r.pressure, r.gap, r.N, r.tau, r.e_size);
    } else {
      std::snprintf(buf, sizeof buf, "%.12f,false,nan,nan,0,0,0\n", r.alpha);
    }
    out << buf;
  }
}

nlohmann::json DensityReport::to_json() const {
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j = {{"alpha", r.alpha}, {"certified", r.certified}, {"pressure", number(r.pressure)},
                        {"gap", number(r.gap)}, {"N", r.N}, {"tau", r.tau}, {"E_size", r.e_size}};
    if (!r.error.empty()) j["error"] = r.error;
    rs.push_back(j);
  }
  return {{"rows", rs},
          {"interval", {lo, hi}},
          {"eta0", eta0},
          {"certified_rows", certified_rows()},
          {"max_gap", max_gap()},
          {"tail_bound", {{"h_star_2delta", 0.0}, {"var_phi_2delta", var_two_delta}}},
          {"conditions", conditions.to_json()}};
}

DensityReport density_experiment(const ShiftSystem& sys, const Potential& phi, const CTDecomposition& dec, int grid,
                                 double eta0, const ConstructionConfig& config) {
  if (grid < 1) throw ConfigError("grid must be >= 1");
  if (!(eta0 > 0.0)) throw ConfigError("eta0 must be positive");
  DensityReport report;
  report.eta0 = eta0;
  report.conditions = check_ct_conditions(sys, phi, dec, config.res, config.n_cap, config.seed, config.options);
  if (report.conditions.any_fail()) {
    std::ostringstream msg;
    msg << "CT conditions fail:";
    for (const auto& c : report.conditions.conditions) {
      msg << "\n  " << c.name << ": " << to_string(c.status) << " (margin " << fmt(c.margin) << ") " << c.detail;
    }
    throw PreconditionError(msg.str());
  }
  report.var_two_delta = variation(phi, config.res.delta.scaled(2));
  const double p = report.conditions.pressure;
  const double p_star = pstar(sys, phi);
  report.lo = p_star + eta0;
  report.hi = p - eta0;
  if (!(report.hi > report.lo)) {
    throw PreconditionError("interval (P* + eta0, P - eta0) = (" + fmt(report.lo) + ", " + fmt(report.hi) +
                            ") is empty");
  }
  for (int i = 0; i < grid; ++i) {
    DensityRow row;
    row.alpha = report.lo + (i + 0.5) * (report.hi - report.lo) / grid;
    try {
      const ConstructionResult c = construct_intermediate(sys, phi, dec, row.alpha, eta0, config);
      row.certified = c.certified;
      row.pressure = c.lower.value;
      row.gap = std::abs(c.lower.value - row.alpha);
      row.N = c.lambda.params().N;
      row.tau = c.lambda.params().tau;
      row.e_size = c.lambda.words().size();
    } catch (const ComputationError& e) {
      row.error = e.what();
      row.pressure = std::nan("");
      row.gap = std::nan("");
    }
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace symdyn
