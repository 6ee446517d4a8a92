// symdyn: command-line front end. Exit codes: 0 success, 2 config/parse
// error, 3 computation error or a result that does not hold.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "symdyn/construction.hpp"
#include "symdyn/ct_conditions.hpp"
#include "symdyn/error.hpp"
#include "symdyn/lambda.hpp"
#include "symdyn/measures.hpp"
#include "symdyn/thermo.hpp"

#ifndef SYMDYN_VERSION
#define SYMDYN_VERSION "0.0.0"
#endif

using namespace symdyn;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitComputation = 3;

struct RunConfig {
  std::string command;
  std::string system;
  std::string potential;
  std::string decomposition;
  std::string out;
  double alpha = 0.35;
  double eta0 = 0.1;
  int grid = 8;
  int n_min = 8;
  int n_max = 16;
  int res_eps = 1;
  int res_gamma = 5;
  int res_delta = 7;
  int n_cap = 24;
  int max_cycle = 10;
  std::uint64_t budget_words = 50'000'000;
  std::uint64_t seed = 0;
  int workers = 1;

  // Loaded before any computation starts.
  std::optional<ShiftSystem> sys;
  std::optional<Potential> phi;
  std::optional<CTDecomposition> dec;
  nlohmann::json inputs;

  [[nodiscard]] nlohmann::json to_json() const {
    // Workers and output path do not change results, so they stay out of the hash.
    nlohmann::json j = {{"command", command},       {"alpha", alpha},          {"eta0", eta0},
                        {"grid", grid},             {"n_min", n_min},          {"n_max", n_max},
                        {"res_eps", res_eps},       {"res_gamma", res_gamma},  {"res_delta", res_delta},
                        {"n_cap", n_cap},           {"max_cycle", max_cycle},  {"budget_words", budget_words},
                        {"seed", seed},             {"inputs", inputs}};
    return j;
  }

  [[nodiscard]] EnumerationOptions options() const { return {budget_words, workers}; }

  [[nodiscard]] CTResolutions resolutions() const {
    CTResolutions r{Resolution{res_eps}, Resolution{res_gamma}, Resolution{res_delta}};
    r.validate();
    return r;
  }

  [[nodiscard]] ConstructionConfig construction() const {
    ConstructionConfig c;
    c.res = resolutions();
    c.n_cap_search = n_cap;
    c.seed = seed;
    c.options = options();
    return c;
  }
};

nlohmann::json read_json(const std::string& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + what + " file " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse " + what + " file " + path + ": " + e.what());
  }
}

void load_inputs(RunConfig& cfg, bool zero_potential) {
  if (cfg.system.empty()) throw ConfigError("--system is required");
  const auto sj = read_json(cfg.system, "system");
  cfg.sys = ShiftSystem::from_json(sj);
  cfg.inputs["system"] = sj;
  nlohmann::json pj = {{"constant", 0}};
  if (!zero_potential && !cfg.potential.empty()) pj = read_json(cfg.potential, "potential");
  cfg.phi = Potential::from_json(*cfg.sys, pj);
  cfg.inputs["potential"] = pj;
  nlohmann::json dj = {{"type", "trivial"}};
  if (!cfg.decomposition.empty()) dj = read_json(cfg.decomposition, "decomposition");
  cfg.dec = CTDecomposition::from_json(dj);
  cfg.inputs["decomposition"] = dj;
  if (cfg.n_min < 1 || cfg.n_max < cfg.n_min) throw ConfigError("need 1 <= n-min <= n-max");
  if (cfg.workers < 1) throw ConfigError("--workers must be >= 1");
  if (!(cfg.eta0 > 0.0)) throw ConfigError("--eta0 must be positive");
}

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json header(const RunConfig& cfg) {
  const auto c = cfg.to_json();
  return {{"tool", "symdyn"},
          {"version", SYMDYN_VERSION},
          {"command", cfg.command},
          {"config_hash", fnv1a_hex(c.dump())},
          {"seed", cfg.seed},
          {"timestamp", utc_timestamp()},
          {"config", c}};
}

// CSV artifacts carry the header as leading "# key=value" lines.
std::string csv_header(const RunConfig& cfg) {
  const auto h = header(cfg);
  std::ostringstream out;
  for (const char* key : {"tool", "version", "command", "config_hash", "seed", "timestamp"}) {
    const auto& v = h[key];
    out << "# " << key << '=' << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
  }
  return out.str();
}

void emit(const RunConfig& cfg, const std::string& text) {
  if (cfg.out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(cfg.out);
  if (!f) throw ConfigError("cannot write " + cfg.out);
  f << text;
}

void emit_json(const RunConfig& cfg, nlohmann::json result) {
  nlohmann::json doc = {{"header", header(cfg)}, {"result", std::move(result)}};
  emit(cfg, doc.dump(2) + "\n");
}

int cmd_pressure(const RunConfig& cfg) {
  const auto oracle = pressure_oracle(*cfg.sys, *cfg.phi);
  const auto est = pressure_enumerate(*cfg.sys, *cfg.phi, SegmentClass::all(), Resolution{cfg.res_delta}, std::nullopt,
                                      cfg.n_min, cfg.n_max, cfg.options());
  emit_json(cfg, {{"pressure", oracle.value},
                  {"oracle", oracle.to_json()},
                  {"enumeration", est.to_json()},
                  {"gap", std::abs(oracle.value - est.value)}});
  return 0;
}

int cmd_pstar(const RunConfig& cfg) {
  const double ps = pstar(*cfg.sys, *cfg.phi);
  const double p = pressure_oracle(*cfg.sys, *cfg.phi).value;
  emit_json(cfg, {{"pstar", ps}, {"pressure", p}, {"interval_width", p - ps}});
  return 0;
}

int cmd_spectrum(const RunConfig& cfg) {
  SpectrumBudget b;
  b.max_cycle_length = cfg.max_cycle;
  b.grid = cfg.grid;
  b.workers = cfg.workers;
  const auto sample = spectrum_sample(*cfg.sys, *cfg.phi, b);
  std::ostringstream out;
  out << csv_header(cfg);
  out.precision(12);
  out << "# pstar=" << sample.pstar << "\n# pressure=" << sample.oracle_pressure
      << "\n# max_gap=" << sample.max_gap(sample.pstar, sample.oracle_pressure) << "\n# points=" << sample.points.size()
      << "\n# partial=" << (sample.partial ? "true" : "false") << '\n';
  if (sample.partial) out << "# partial_reason=" << sample.partial_reason << '\n';
  write_spectrum_csv(out, sample);
  emit(cfg, out.str());
  return 0;
}

int cmd_check(const RunConfig& cfg) {
  const auto rep = check_ct_conditions(*cfg.sys, *cfg.phi, *cfg.dec, cfg.resolutions(), 12, cfg.seed, cfg.options());
  emit_json(cfg, rep.to_json());
  if (!rep.all_pass()) {
    std::cerr << "CT conditions do not all pass:";
    for (const auto& c : rep.conditions) std::cerr << "\n  " << c.name << ": " << to_string(c.status) << " (" << c.detail << ")";
    std::cerr << '\n';
    return kExitComputation;
  }
  return 0;
}

int cmd_construct(const RunConfig& cfg) {
  const auto r = construct_intermediate(*cfg.sys, *cfg.phi, *cfg.dec, cfg.alpha, cfg.eta0, cfg.construction());
  emit_json(cfg, r.to_json());
  if (!r.certified) {
    std::cerr << "construction not certified: oracle pressure " << r.lower.value << " vs alpha " << r.alpha
              << " +- " << r.lambda.params().eta0 << '\n';
    return kExitComputation;
  }
  return 0;
}

int cmd_density(const RunConfig& cfg) {
  if (cfg.grid < 1) throw ConfigError("--grid must be >= 1");
  const auto rep = density_experiment(*cfg.sys, *cfg.phi, *cfg.dec, cfg.grid, cfg.eta0, cfg.construction());
  std::ostringstream out;
  out << csv_header(cfg);
  out.precision(12);
  out << "# interval=(" << rep.lo << "," << rep.hi << ")\n# eta0=" << rep.eta0
      << "\n# var_phi_2delta=" << rep.var_two_delta << "\n# certified_rows=" << rep.certified_rows() << "/"
      << rep.rows.size() << "\n# max_gap=" << rep.max_gap() << '\n';
  rep.write_csv(out);
  emit(cfg, out.str());
  return rep.certified_rows() == rep.rows.size() ? 0 : kExitComputation;
}

int cmd_verify_bounds(const RunConfig& cfg) {
  const auto r = construct_intermediate(*cfg.sys, *cfg.phi, *cfg.dec, cfg.alpha, cfg.eta0, cfg.construction());
  const Resolution delta{cfg.res_delta};
  const Resolution gamma{cfg.res_gamma};
  bool ok = r.certified;
  nlohmann::json counting = nlohmann::json::array();
  for (int n = std::max(2, cfg.n_min); n <= std::min(8, cfg.n_max); ++n) {
    const auto rep = verify_counting_bound(r.lambda, n, delta, 1'000'000, cfg.seed);
    ok = ok && rep.holds;
    counting.push_back(rep.to_json());
  }
  nlohmann::json tracing = nlohmann::json::array();
  for (int n = 1; n <= 3; ++n) {
    try {
      const auto rep = check_tracing_separation(r.lambda, n, gamma);
      ok = ok && rep.tracing && rep.separation;
      auto j = rep.to_json();
      j["n"] = n;
      tracing.push_back(j);
    } catch (const ResourceError& e) {
      tracing.push_back({{"n", n}, {"skipped", e.what()}});
    }
  }
  emit_json(cfg, {{"certified", r.certified},
                  {"lower", r.lower.to_json()},
                  {"upper", r.upper.to_json()},
                  {"alpha", r.alpha},
                  {"eta0", r.lambda.params().eta0},
                  {"counting", counting},
                  {"tracing", tracing},
                  {"all_hold", ok}});
  return ok ? 0 : kExitComputation;
}

void add_common(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--system", cfg.system, "Shift system JSON")->required();
  sub->add_option("--potential", cfg.potential, "Potential JSON (default: zero)");
  sub->add_option("--decomposition", cfg.decomposition, "CT-decomposition JSON (default: trivial)");
  sub->add_option("--out", cfg.out, "Write the report here instead of stdout");
  sub->add_option("--seed", cfg.seed, "Seed for randomized sampling")->capture_default_str();
  sub->add_option("--workers", cfg.workers, "Worker threads")->capture_default_str();
  sub->add_option("--budget-words", cfg.budget_words, "Word enumeration budget")->capture_default_str();
  sub->add_option("--n-min", cfg.n_min, "Smallest n")->capture_default_str();
  sub->add_option("--n-max", cfg.n_max, "Largest n")->capture_default_str();
  sub->add_option("--res-eps", cfg.res_eps, "Level of eps = 2^-level")->capture_default_str();
  sub->add_option("--res-gamma", cfg.res_gamma, "Level of gamma")->capture_default_str();
  sub->add_option("--res-delta", cfg.res_delta, "Level of delta")->capture_default_str();
  sub->add_option("--alpha", cfg.alpha, "Target pressure")->capture_default_str();
  sub->add_option("--eta0", cfg.eta0, "Tolerance around alpha")->capture_default_str();
  sub->add_option("--grid", cfg.grid, "Grid size")->capture_default_str();
  sub->add_option("--n-cap", cfg.n_cap, "Largest N tried by the construction")->capture_default_str();
  sub->add_option("--max-cycle", cfg.max_cycle, "Longest periodic orbit in the spectrum")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pressure, CT conditions and intermediate-pressure constructions on subshifts of finite type"};
  app.set_version_flag("--version", SYMDYN_VERSION);
  app.require_subcommand(1);

  RunConfig cfg;
  struct Command {
    const char* name;
    const char* help;
    int (*run)(const RunConfig&);
    int n_min, n_max, res_delta;
  };
  const Command commands[] = {
      {"pressure", "Oracle and enumerated pressure", cmd_pressure, 8, 16, 1},
      {"entropy", "Topological entropy (pressure of the zero potential)", cmd_pressure, 8, 16, 1},
      {"pstar", "Largest periodic Birkhoff average and P", cmd_pstar, 8, 16, 1},
      {"spectrum", "Sampled pressures of invariant measures (CSV)", cmd_spectrum, 8, 16, 7},
      {"check", "Evaluate the five CT conditions", cmd_check, 8, 16, 7},
      {"construct", "Build Lambda with P(Lambda) within eta0 of alpha", cmd_construct, 8, 16, 7},
      {"density", "Construction sweep over alpha (CSV)", cmd_density, 8, 16, 7},
      {"verify-bounds", "Construct, then check counting, tracing and separation", cmd_verify_bounds, 3, 5, 7},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& c : commands) subs.emplace_back(app.add_subcommand(c.name, c.help), &c);
  for (auto& [sub, c] : subs) add_common(sub, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  const Command* chosen = nullptr;
  CLI::App* chosen_app = nullptr;
  for (auto& [sub, c] : subs) {
    if (sub->parsed()) {
      chosen = c;
      chosen_app = sub;
    }
  }
  cfg.command = chosen->name;
  // Per-command defaults for options the user left unset.
  if (chosen_app->count("--n-min") == 0) cfg.n_min = chosen->n_min;
  if (chosen_app->count("--n-max") == 0) cfg.n_max = chosen->n_max;
  if (chosen_app->count("--res-delta") == 0) cfg.res_delta = chosen->res_delta;
  if (cfg.command == "spectrum" && chosen_app->count("--grid") == 0) cfg.grid = 50;

  try {
    load_inputs(cfg, cfg.command == "entropy");
    return chosen->run(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ComputationError& e) {
    std::cerr << "computation error: " << e.what() << '\n';
    return kExitComputation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitComputation;
  }
}
