#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "symdyn/ct_conditions.hpp"
#include "symdyn/decomposition.hpp"
#include "symdyn/lambda.hpp"

namespace symdyn {

struct ConstructionConfig {
  CTResolutions res;
  /// Largest N tried by the search.
  int n_cap_search = 24;
  /// Range n = 1..n_cap used to measure C0 and N1, and for the condition checks.
  int n_cap = 12;
  std::uint64_t seed = 0;
  EnumerationOptions options;
  /// Enumeration cross-checks of Lambda run over n = 2..enum_n_max while
  /// the per-n word budget allows.
  int enum_n_max = 48;
  std::uint64_t enum_budget = 2'000'000;
  [[nodiscard]] nlohmann::json to_json() const;
};

struct ESelection {
  /// In selection order: Phi descending, then lexicographic.
  std::vector<Word> words;
  double log_mass = 0.0;      // ln sum over E of e^{Phi(x,N)}
  double log_available = 0.0; // same over E*
  std::size_t candidates = 0; // |E*|
};

/// E* = admissible N-words whose segment lies in `gm`, Phi(x, N) = largest
/// Birkhoff sum over the points starting with x. Returns the shortest prefix
/// of E* in the order (Phi descending, lexicographic) whose mass exceeds
/// e^{N(alpha-eta)}, and checks that the mass stays below e^{N(alpha+eta)}.
/// Throws PreconditionError naming the failed inequality and both sides.
/// `gamma` is recorded only: distinct N-words are (N, 2 gamma)-separated
/// cylinders in this word model.
ESelection select_e_set(const ShiftSystem& sys, const Potential& phi, const SegmentClass& gm, double alpha,
                        double eta, int N, Resolution gamma, const EnumerationOptions& options = {});

struct InequalityCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  /// Logged for reference, not required.
  bool informational = false;
  [[nodiscard]] nlohmann::json to_json() const;
};

struct NCandidate {
  int N = 0;
  std::vector<InequalityCheck> checks;
  bool feasible = false;
  std::string note;
  [[nodiscard]] nlohmann::json to_json() const;
};

/// C0, N1 and M measured rather than derived: for each M in {0,1,2,4} the
/// class G_M must pass check_gluing, c_n = ln Theta(G_M, 2gamma, n) - nP is
/// computed for n <= n_cap, N1 is the first n after which c stays within 0.1,
/// and C0 = min over n >= N1 of e^{c_n}.
struct MeasuredConstants {
  int M = 0;
  int N1 = 1;
  double log_C0 = 0.0;
  std::vector<double> log_c;
  nlohmann::json scan;
  [[nodiscard]] nlohmann::json to_json() const;
};

struct ConstructionResult {
  explicit ConstructionResult(LambdaSystem l) : lambda(std::move(l)) {}

  LambdaSystem lambda;
  /// Oracle pressure of Lambda's language, tagged with resolution gamma
  /// (lower) and 2 delta (upper). Both resolutions see the same growth rate.
  PressureReport lower;
  PressureReport upper;
  std::optional<PressureReport> lower_enumeration;
  std::optional<PressureReport> upper_enumeration;
  std::string enumeration_note;
  bool certified = false;
  double alpha = 0.0;
  double eta0_requested = 0.0;
  double pressure = 0.0;  // P(phi)
  double pstar = 0.0;     // P*(phi)
  MeasuredConstants constants;
  std::vector<NCandidate> search;
  ESelection selection;
  [[nodiscard]] nlohmann::json to_json() const;
};

/// Builds Lambda with |P(Lambda, phi) - alpha| < eta0. Requires
/// P*(phi) < alpha < P(phi); eta0 is shrunk to 0.99 of the distance to either
/// end when needed. Throws PreconditionError when no N <= n_cap_search
/// satisfies the inequalities (message lists every candidate's failures).
ConstructionResult construct_intermediate(const ShiftSystem& sys, const Potential& phi, const CTDecomposition& dec,
                                          double alpha, double eta0, const ConstructionConfig& config = {});

struct DensityRow {
  double alpha = 0.0;
  bool certified = false;
  double pressure = 0.0;
  double gap = 0.0;
  int N = 0;
  int tau = 0;
  std::size_t e_size = 0;
  std::string error;
};

struct DensityReport {
  std::vector<DensityRow> rows;
  CTReport conditions;
  double lo = 0.0;
  double hi = 0.0;
  double eta0 = 0.0;
  /// For shifts h*(f, 2delta) = 0, so the tail bound needs var(phi, 2delta) < eta.
  double var_two_delta = 0.0;
  [[nodiscard]] std::size_t certified_rows() const;
  [[nodiscard]] double max_gap() const;
  /// Columns alpha,certified,pressure,gap,N,tau,E_size.
  void write_csv(std::ostream& out) const;
  [[nodiscard]] nlohmann::json to_json() const;
};

/// Runs construct_intermediate at the midpoints of `grid` equal cells of
/// (P* + eta0, P - eta0). Requires that no CT condition fails; per-row
/// failures are recorded and the sweep continues.
DensityReport density_experiment(const ShiftSystem& sys, const Potential& phi, const CTDecomposition& dec, int grid,
                                 double eta0, const ConstructionConfig& config = {});

}  // namespace symdyn
