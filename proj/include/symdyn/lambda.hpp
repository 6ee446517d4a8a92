#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "symdyn/gluing.hpp"
#include "symdyn/potential.hpp"
#include "symdyn/shift_system.hpp"
#include "symdyn/thermo.hpp"

namespace symdyn {

struct LambdaParams {
  double alpha = 0.0;
  double eta0 = 0.0;  // tolerance actually used (may be shrunk below the requested one)
  double eta = 0.0;
  int N = 0;
  int M = 0;
  int tau = 0;
  /// min phi, subtracted before the construction's inequalities are checked.
  double phi_shift = 0.0;
  [[nodiscard]] nlohmann::json to_json() const;
};

/// Explicit vertex-shift presentation. Word vertices come first (word i,
/// offset j at id i*N + j), then one chain of vertices per nonempty connector.
struct Presentation {
  std::vector<Symbol> label;
  std::vector<std::vector<int>> out;
  std::vector<std::string> name;
  [[nodiscard]] int size() const { return static_cast<int>(label.size()); }
  [[nodiscard]] std::size_t edge_count() const;
  [[nodiscard]] nlohmann::json to_json() const;
};

/// Deterministic automaton reading the prefixes of Y: every state is a set of
/// positions (inside a range of E-words sharing a prefix, at a word end, or
/// inside a connector), so each Y-prefix labels exactly one path from root.
struct YAutomaton {
  int alphabet = 0;
  int root = 0;
  /// next[q * alphabet + s], -1 when s cannot follow.
  std::vector<int> next;
  /// State reached right after a word ending in a; -1 when no word ends in a.
  std::vector<int> after_word;
  [[nodiscard]] int size() const { return alphabet == 0 ? 0 : static_cast<int>(next.size()) / alphabet; }
  /// Number of distinct words of length k readable from q.
  [[nodiscard]] double count_paths(int q, int k) const;
};

/// Lambda: the closure under the shift of the set Y of infinite
/// concatenations w_1 c w_2 c' ... of E-words joined by certificate connectors.
class LambdaSystem {
 public:
  /// E must be nonempty, of one common length, admissible; duplicates are
  /// dropped and the words sorted. Throws StructuralError when a connector
  /// of the certificate does not join the words admissibly.
  LambdaSystem(ShiftSystem sys, Potential phi, std::vector<Word> e, GluingCertificate cert, LambdaParams params);

  [[nodiscard]] const ShiftSystem& system() const { return sys_; }
  [[nodiscard]] const Potential& potential() const { return phi_; }
  [[nodiscard]] const std::vector<Word>& words() const { return e_; }
  [[nodiscard]] const GluingCertificate& certificate() const { return cert_; }
  [[nodiscard]] const LambdaParams& params() const { return params_; }
  [[nodiscard]] int word_length() const { return static_cast<int>(e_.front().size()); }
  [[nodiscard]] const YAutomaton& automaton() const { return *automaton_; }
  /// Longest connector actually used between E-words.
  [[nodiscard]] int max_gap() const { return max_gap_; }

  /// Concatenation of E[indices...] through the certificate connectors.
  [[nodiscard]] Word glue(const std::vector<int>& indices, std::vector<std::size_t>* starts = nullptr) const;

  /// Throws ResourceError when the presentation would exceed the limits.
  [[nodiscard]] Presentation presentation(std::size_t max_vertices = 200'000,
                                          std::size_t max_edges = 2'000'000) const;

  /// Growth rate of the weighted language: log spectral radius of the
  /// automaton lifted by the last memory-1 symbols, edges weighted by phi.
  [[nodiscard]] const PressureReport& oracle_pressure() const { return oracle_; }

  /// ln Theta over Y-prefixes: words of length n + res.level - 1 starting a
  /// point of Y, each weighted by the largest Phi(y, n) over its Y-extensions.
  [[nodiscard]] double log_theta_y(int n, Resolution res, std::uint64_t budget = 20'000'000) const;
  /// Same over all factors of Lambda.
  [[nodiscard]] double log_theta_lambda(int n, Resolution res, std::uint64_t budget = 20'000'000) const;
  /// Enumeration estimates over n = n_min.. while the word budget allows,
  /// stopping at n_max. The report's n_max is the last n evaluated.
  [[nodiscard]] PressureReport enumerate_y(Resolution res, int n_min, int n_max,
                                           std::uint64_t budget = 20'000'000) const;
  [[nodiscard]] PressureReport enumerate_lambda(Resolution res, int n_min, int n_max,
                                                std::uint64_t budget = 20'000'000) const;

  /// Presentation included only when it has at most `presentation_limit` vertices.
  [[nodiscard]] nlohmann::json to_json(std::size_t presentation_limit = 2000) const;

 private:
  ShiftSystem sys_;
  Potential phi_;
  std::vector<Word> e_;
  GluingCertificate cert_;
  LambdaParams params_;
  int max_gap_ = 0;
  std::shared_ptr<const YAutomaton> automaton_;
  PressureReport oracle_;
};

LambdaSystem build_lambda(const ShiftSystem& sys, const Potential& phi, const std::vector<Word>& e,
                          const GluingCertificate& cert, const LambdaParams& params);

/// Largest Phi(x, n) over admissible points x starting with `w` (|w| >= n).
double max_birkhoff_sum(const ShiftSystem& sys, const Potential& phi, std::span<const Symbol> w, int n);

struct CountingReport {
  bool holds = true;
  int n = 0;
  /// ln s(X, tau, delta), s = number of words of length tau + level(delta) - 1.
  double log_s = 0.0;
  /// "exhaustive" walks every class in E^n; "reduced" walks the achievable
  /// (last symbol, total gap) pairs, on which the class count depends.
  std::string mode;
  std::uint64_t classes = 0;
  double worst_log_count = 0.0;
  /// Cylinder partition function bound, checked for every shift r < N + tau
  /// and l < N on `theta_classes` classes.
  std::uint64_t theta_classes = 0;
  std::uint64_t theta_checks = 0;
  double worst_theta_margin = 0.0;  // min of ln(bound) - ln(Theta)
  std::string violation;
  [[nodiscard]] nlohmann::json to_json() const;
};

/// Checks that each class Y(C1_{y_1..y_n}, C2_{w_1..w_{n-1}}) has at most
/// s(X,tau,delta)^{n-1} points that are (nN, 2 delta)-separated, and that the
/// shifted cylinder partition functions at length (n-3)N + l obey the
/// theta_n bound. Requires 2 <= n <= 8.
CountingReport verify_counting_bound(const LambdaSystem& lambda, int n, Resolution delta,
                                     std::uint64_t class_budget = 1'000'000, std::uint64_t seed = 0,
                                     std::uint64_t theta_class_limit = 256);

struct TracingReport {
  bool tracing = true;
  bool separation = true;
  std::uint64_t sequences = 0;
  std::uint64_t pairs = 0;
  std::string violation;
  [[nodiscard]] nlohmann::json to_json() const;
};

/// Exhaustive over E^n: every glued word is admissible and equals y_k at t_k;
/// sequences with equal t_n and different n-th words are
/// (n(N+tau), gamma)-separated. Throws ResourceError when |E|^n > budget.
TracingReport check_tracing_separation(const LambdaSystem& lambda, int n, Resolution gamma,
                                       std::uint64_t budget = 100'000);

}  // namespace symdyn
