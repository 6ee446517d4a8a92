#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "symdyn/digraph.hpp"
#include "symdyn/potential.hpp"
#include "symdyn/segment_class.hpp"
#include "symdyn/shift_system.hpp"

namespace symdyn {

/// Knobs shared by everything that enumerates words.
struct EnumerationOptions {
  std::uint64_t word_budget = 50'000'000;
  /// Worker threads for word enumeration. Chunking is fixed by the word
  /// prefix, so results do not depend on this value.
  int workers = 1;
};

struct PressureReport {
  enum class Method { kEnumeration, kOracle };

  double value = 0.0;  // nats; -inf for classes that are eventually empty
  Method method = Method::kOracle;
  int n_min = 0;
  int n_max = 0;
  int delta_level = 0;  // 0 when not applicable
  int eps_level = 0;    // 0 means eps = 0
  /// +inf stands for "unbounded".
  double error_bound = 0.0;
  /// Enumeration: (1/n) ln Theta for n = n_min..n_max.
  std::vector<double> sequence;
  /// Enumeration: max of `sequence` over the top half of the range. `value`
  /// is the growth rate of ln Theta across that half, falling back to this
  /// when an endpoint is empty.
  double tail_max = 0.0;
  /// Oracle: the weighted matrix was periodic and the period-averaged
  /// iteration was used.
  bool periodic_fallback = false;
  int period = 1;
  bool converged = true;
  std::int64_t iterations = 0;

  [[nodiscard]] nlohmann::json to_json() const;
};

/// Sum of phi along the first n shifts of w. Requires |w| >= n + m - 1.
double birkhoff_sum(const Potential& phi, std::span<const Symbol> w, int n);

/// The (m-1)-block presentation (blocks of length max(1, m-1)); the edge
/// u -> v carries phi of the first m symbols of u followed by v's last symbol.
/// A walk of n edges starting at block u has weight Phi(x, n) for any x
/// following that walk.
struct BlockGraph {
  int block_length = 1;
  std::vector<Word> blocks;
  WeightedDigraph graph;
};
BlockGraph block_graph(const ShiftSystem& sys, const Potential& phi);

/// ln Theta(Y, phi, n, delta, eps): the log of the sum, over admissible
/// words of length n + level(delta) - 1 whose segment (w, n) lies in Y, of
/// exp of the largest Birkhoff sum Phi(y, n) over points y agreeing with w on
/// its first min(|w|, n + level(eps) - 1) symbols. `eps = nullopt` is eps = 0.
/// Returns -inf when no word qualifies.
double log_partition_function(const ShiftSystem& sys, const Potential& phi, const SegmentClass& y,
                              int n, Resolution delta, std::optional<Resolution> eps,
                              const EnumerationOptions& options = {});

/// Finite-range estimate of the limsup of (1/n) ln Theta. The spread of the
/// sequence over the top half of the range is the error bound.
PressureReport pressure_enumerate(const ShiftSystem& sys, const Potential& phi,
                                  const SegmentClass& y, Resolution delta,
                                  std::optional<Resolution> eps, int n_min, int n_max,
                                  const EnumerationOptions& options = {});

/// Builds an enumeration report from ln Theta_n for n = n_min, n_min+1, ...
/// using the same value and error rules as pressure_enumerate.
PressureReport summarize_log_theta(int n_min, const std::vector<double>& log_theta);

/// ln of the Perron root of the block presentation's weighted matrix.
PressureReport pressure_oracle(const ShiftSystem& sys, const Potential& phi);

/// Maximum mean cycle weight of the block presentation (Karp).
double pstar(const ShiftSystem& sys, const Potential& phi);
/// sup_x (1/n) Phi(x, n) for n = 1..n_max, by max-plus dynamic programming.
std::vector<double> max_birkhoff_averages(const ShiftSystem& sys, const Potential& phi, int n_max);

/// max |phi(x) - phi(y)| over x, y agreeing on their first `level` symbols.
double variation(const Potential& phi, Resolution eps);

struct BowenBound {
  /// Upper bound on V(C, phi, eps) over segments with n <= n_cap.
  double certified = 0.0;
  /// Largest |Phi(x,n) - Phi(y,n)| found by exhaustive ball enumeration.
  double sampled = 0.0;
  int n_cap = 0;
};
BowenBound bowen_bound(const ShiftSystem& sys, const Potential& phi, const SegmentClass& c,
                       Resolution eps, int n_cap, const EnumerationOptions& options = {});

struct ExpansivityReport {
  double h_star = 0.0;
  bool ne_empty = true;
  double p_exp_bot = 0.0;  // -inf
};
/// One-sided subshifts are expansive at every dyadic scale: the set of points
/// shadowing x at scale 2^-level forever is {x}.
ExpansivityReport expansivity_report(const ShiftSystem& sys, Resolution eps);

}  // namespace symdyn
