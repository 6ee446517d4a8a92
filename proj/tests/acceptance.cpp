// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "symdyn/construction.hpp"
#include "symdyn/lambda.hpp"
#include "symdyn/measures.hpp"
#include "symdyn/thermo.hpp"

using namespace symdyn;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (!pass) detail << "; ";
      pass = false;
      detail << what;
    }
  }
};

LambdaSystem lambda_of(const ShiftSystem& sys, const Potential& phi, const std::vector<Word>& e) {
  LambdaParams params;
  params.N = static_cast<int>(e.front().size());
  const auto cert = check_gluing(sys, SegmentClass::all(), Resolution{7}, 1);
  params.tau = cert.tau;
  return build_lambda(sys, phi, e, cert, params);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Outcome oracle_correctness() {
  Outcome o;
  const double golden = std::log((1 + std::sqrt(5.0)) / 2);
  const std::vector<std::pair<ShiftSystem, double>> cases = {
      {ShiftSystem::full(2), std::log(2.0)}, {ShiftSystem::full(3), std::log(3.0)}, {oracle::golden(), golden}};
  double worst = 0.0;
  for (const auto& [sys, expected] : cases) {
    worst = std::max(worst, std::abs(pressure_oracle(sys, Potential::constant(sys, 0.0)).value - expected));
  }
  o.require(worst < 1e-9, "error " + fmt(worst));
  o.detail << (o.pass ? "max error " + fmt(worst) : "");
  return o;
}

Outcome estimator_convergence() {
  Outcome o;
  double worst = 0.0;
  auto check = [&](const ShiftSystem& sys, const Potential& phi) {
    const double p = pressure_oracle(sys, phi).value;
    const auto est = pressure_enumerate(sys, phi, SegmentClass::all(), Resolution{1}, std::nullopt, 2, 20);
    worst = std::max(worst, std::abs(est.value - p));
  };
  for (const auto& sys : {ShiftSystem::full(2), ShiftSystem::full(3), oracle::golden()}) {
    check(sys, Potential::constant(sys, 0.0));
  }
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 20; ++i) {
    const auto sys = oracle::random_sft(rng, 2 + i % 3);
    check(sys, oracle::random_potential(rng, sys, 1 + i % 2));
  }
  o.require(worst < 0.05, "max gap " + fmt(worst));
  if (o.pass) o.detail << "23 systems, max gap " << fmt(worst);
  return o;
}

Outcome pstar_correctness() {
  Outcome o;
  std::mt19937_64 rng(77);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto sys = oracle::random_sft(rng, 2 + i % 5, 0.3);
    const auto phi = oracle::random_potential(rng, sys, 1 + i % 2);
    worst = std::max(worst, std::abs(pstar(sys, phi) - oracle::brute_max_cycle_mean(sys, phi)));
  }
  o.require(worst <= 1e-12, "max difference " + fmt(worst));
  if (o.pass) o.detail << "50 digraphs, max difference " << fmt(worst);
  return o;
}

Outcome variational_principle() {
  Outcome o;
  std::mt19937_64 rng(5);
  std::size_t measures = 0;
  for (int i = 0; i < 6; ++i) {
    const auto sys = i == 0 ? ShiftSystem::full(2) : oracle::random_sft(rng, 2 + i % 3);
    const auto phi = oracle::random_potential(rng, sys, 1);
    const double p = pressure_oracle(sys, phi).value;
    SpectrumBudget b;
    b.max_cycle_length = 8;
    b.grid = 10;
    const auto sample = spectrum_sample(sys, phi, b);
    for (const auto& pt : sample.points) {
      ++measures;
      o.require(pt.pressure <= p + 1e-9, pt.kind + " " + pt.parameter + " exceeds P");
    }
    const double gibbs = measure_pressure(phi, gibbs_chain(sys, phi));
    o.require(std::abs(gibbs - p) < 1e-9, "Gibbs chain off by " + fmt(gibbs - p));
  }
  if (o.pass) o.detail << measures << " measures below P, Gibbs chains attain P";
  return o;
}

Outcome construction_sandwich() {
  Outcome o;
  const auto sys = ShiftSystem::full(2);
  const auto zero = Potential::constant(sys, 0.0);
  for (double alpha : {0.2, 0.35, 0.5, 0.6}) {
    const auto r = construct_intermediate(sys, zero, CTDecomposition::trivial(), alpha, 0.1);
    const std::string tag = "alpha " + fmt(alpha);
    o.require(r.certified, tag + " not certified");
    o.require(std::abs(r.lower.value - alpha) < 0.1, tag + " pressure " + fmt(r.lower.value));
    o.require(r.lower.value >= alpha - r.lambda.params().eta0, tag + " lower bound");
    o.require(r.upper.value <= alpha + r.lambda.params().eta0, tag + " upper bound");
    o.detail << (o.pass ? tag + " -> " + fmt(r.lower.value) + "  " : "");
  }
  return o;
}

Outcome density_sweep() {
  Outcome o;
  const auto full2 = ShiftSystem::full(2);
  const auto golden = oracle::golden();
  const std::vector<std::pair<ShiftSystem, Potential>> cases = {
      {full2, Potential::constant(full2, 0.0)}, {golden, Potential::by_symbol(golden, {0.0, 0.2})}};
  for (const auto& [sys, phi] : cases) {
    const auto rep = density_experiment(sys, phi, CTDecomposition::trivial(), 8, 0.1);
    o.require(rep.certified_rows() >= 7, std::to_string(rep.certified_rows()) + "/8 certified");
    o.require(rep.max_gap() < 0.1, "max gap " + fmt(rep.max_gap()));
    if (o.pass) o.detail << rep.certified_rows() << "/8 certified, max gap " << fmt(rep.max_gap()) << "  ";
  }
  return o;
}

Outcome counting_bound() {
  Outcome o;
  const auto full2 = ShiftSystem::full(2);
  const auto golden = oracle::golden();
  struct Case {
    ShiftSystem sys;
    Potential phi;
    double alpha;
  };
  const std::vector<Case> cases = {{full2, Potential::constant(full2, 0.0), 0.2},
                                   {full2, Potential::constant(full2, 0.0), 0.35},
                                   {full2, Potential::constant(full2, 0.0), 0.5},
                                   {golden, Potential::by_symbol(golden, {0.0, 0.2}), 0.25},
                                   {golden, Potential::by_symbol(golden, {0.0, 0.2}), 0.35}};
  std::uint64_t classes = 0;
  for (const auto& c : cases) {
    const auto r = construct_intermediate(c.sys, c.phi, CTDecomposition::trivial(), c.alpha, 0.1);
    for (int n : {3, 4, 5}) {
      const auto rep = verify_counting_bound(r.lambda, n, Resolution{7});
      classes += rep.classes;
      o.require(rep.holds, "alpha " + fmt(c.alpha) + " n=" + std::to_string(n) + ": " + rep.violation);
    }
  }
  if (o.pass) o.detail << "5 constructions, n = 3..5, " << classes << " classes";
  return o;
}

Outcome tracing_separation() {
  Outcome o;
  const auto golden = oracle::golden();
  const auto base = check_gluing(golden, SegmentClass::all(), Resolution{7}, 1);
  const auto uniform = uniform_gap_certificate(golden, SegmentClass::all(), base);
  std::mt19937_64 rng(8);
  std::uint64_t sequences = 0;
  for (const auto& cert : {base, uniform}) {
    for (int n_len = 3; n_len <= 6; ++n_len) {
      auto words = oracle::brute_words(golden, n_len);
      for (std::size_t size = 1; size <= 4; ++size) {
        std::shuffle(words.begin(), words.end(), rng);
        const std::vector<Word> e(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(size));
        LambdaParams params;
        params.N = n_len;
        params.tau = cert.tau;
        const auto l = build_lambda(golden, Potential::constant(golden, 0.0), e, cert, params);
        for (int n = 1; n <= 3; ++n) {
          const auto rep = check_tracing_separation(l, n, Resolution{5});
          sequences += rep.sequences;
          o.require(rep.tracing && rep.separation, rep.violation);
        }
      }
    }
  }
  if (o.pass) o.detail << sequences << " glued sequences traced and separated";
  return o;
}

Outcome degenerate_cases() {
  Outcome o;
  const auto full2 = ShiftSystem::full(2);
  const auto golden = oracle::golden();
  const auto phi2 = Potential::by_symbol(full2, {0.3, 0.9});
  const auto phig = Potential::by_symbol(golden, {0.1, 0.5});
  double worst = 0.0;
  for (const char* w : {"0", "01", "01101", "1110100"}) {
    const Word word = word_from_string(w, 2);
    const double expected = birkhoff_sum(phi2, word, static_cast<int>(word.size())) / static_cast<double>(word.size());
    worst = std::max(worst, std::abs(lambda_of(full2, phi2, {word}).oracle_pressure().value - expected));
  }
  for (const auto& [sys, phi] : {std::pair{full2, phi2}, std::pair{golden, phig}}) {
    for (int n : {3, 6}) {
      const double p = lambda_of(sys, phi, list_words(sys, n)).oracle_pressure().value;
      worst = std::max(worst, std::abs(p - pressure_oracle(sys, phi).value));
    }
  }
  o.require(worst < 1e-9, "max error " + fmt(worst));
  if (o.pass) o.detail << "max error " << fmt(worst);
  return o;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string without_timestamp(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.rfind("# timestamp=", 0) != 0) out += line + "\n";
  }
  return out;
}

Outcome determinism() {
  Outcome o;
  const std::string dir = SYMDYN_TEST_TMP;
  const std::string args = std::string(SYMDYN_CLI) + " density --system " + SYMDYN_DATA_DIR + "/golden.json" +
                           " --potential " + SYMDYN_DATA_DIR + "/golden_phi.json --grid 8 --seed 3 --out ";
  for (const char* name : {"/acc_density_a.csv", "/acc_density_b.csv"}) {
    const int status = std::system((args + dir + name).c_str());
    o.require(WIFEXITED(status) && WEXITSTATUS(status) == 0, "density run failed");
  }
  const std::string a = slurp(dir + "/acc_density_a.csv");
  const std::string b = slurp(dir + "/acc_density_b.csv");
  o.require(!a.empty() && without_timestamp(a) == without_timestamp(b), "outputs differ");
  o.require(a.find("# timestamp=") != std::string::npos, "no timestamp field");
  if (o.pass) o.detail << a.size() << " bytes identical apart from the timestamp line";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"oracle correctness", oracle_correctness},
      {"estimator convergence", estimator_convergence},
      {"P* correctness", pstar_correctness},
      {"variational principle", variational_principle},
      {"construction sandwich", construction_sandwich},
      {"density sweep", density_sweep},
      {"counting bound", counting_bound},
      {"tracing and separation", tracing_separation},
      {"degenerate E", degenerate_cases},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << (i + 1) << " (" << criteria[i].first
              << "): " << o.detail.str() << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
