#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "symdyn/potential.hpp"
#include "symdyn/shift_system.hpp"

namespace symdyn {

/// Stationary Markov chain on the k-block presentation of an SFT. Block
/// indices follow list_words(sys, k). With k = 1 this is an ordinary
/// symbol-level chain.
class MarkovMeasure {
 public:
  /// Validates Q (row-stochastic within 1e-12, support inside the block
  /// graph) and computes the stationary vector. Throws ComputationError if
  /// the chain has more than one recurrent class.
  MarkovMeasure(const ShiftSystem& sys, int block_length, std::vector<std::vector<double>> q);

  /// Bernoulli measure with the given symbol weights on a full shift.
  static MarkovMeasure bernoulli(const ShiftSystem& sys, const std::vector<double>& p);

  [[nodiscard]] int block_length() const { return block_length_; }
  [[nodiscard]] const std::vector<Word>& blocks() const { return blocks_; }
  [[nodiscard]] const std::vector<std::vector<double>>& stochastic() const { return q_; }
  [[nodiscard]] const std::vector<double>& stationary() const { return pi_; }

  /// mu([w]) for an admissible word with |w| >= block_length.
  [[nodiscard]] double cylinder(std::span<const Symbol> w) const;

 private:
  int block_length_;
  std::vector<Word> blocks_;
  std::vector<std::vector<double>> q_;
  std::vector<double> pi_;
};

/// Invariant measure on a periodic orbit. The cycle must be admissible,
/// close up (last -> first allowed) and be primitive (not a proper power).
class PeriodicOrbitMeasure {
 public:
  PeriodicOrbitMeasure(const ShiftSystem& sys, Word cycle);
  [[nodiscard]] const Word& cycle() const { return cycle_; }
  [[nodiscard]] int period() const { return static_cast<int>(cycle_.size()); }

 private:
  Word cycle_;
};

/// -sum_u pi_u sum_v Q_uv ln Q_uv.
double markov_entropy(const MarkovMeasure& mu);
/// Integral of phi against mu.
double markov_integral(const Potential& phi, const MarkovMeasure& mu);
/// h_mu + integral of phi.
double measure_pressure(const Potential& phi, const MarkovMeasure& mu);
/// (1/p) times the sum of phi along the cycle.
double measure_pressure(const Potential& phi, const PeriodicOrbitMeasure& mu);

/// Equilibrium chain on the (m-1)-block presentation built from the left and
/// right Perron vectors of the weighted transfer matrix: Q_uv = L_uv r_v / (lambda r_u).
/// Requires a strongly connected system.
MarkovMeasure gibbs_chain(const ShiftSystem& sys, const Potential& phi);

/// Primitive admissible cycles (Lyndon representatives) of length 1..max_length,
/// ordered by length then lexicographically. Throws ResourceError past `limit`.
std::vector<Word> primitive_cycles(const ShiftSystem& sys, int max_length,
                                   std::uint64_t limit = 5'000'000);

struct SpectrumBudget {
  int max_cycle_length = 10;  // at most 12
  int grid = 50;              // interpolation points per cycle
  std::uint64_t max_measures = 1'000'000;
  int workers = 1;
};

struct SpectrumPoint {
  std::string kind;       // cycle | gibbs | interpolation
  std::string parameter;  // cycle word, or "word@t"
  double entropy = 0.0;
  double integral = 0.0;
  double pressure = 0.0;
};

struct SpectrumSample {
  std::vector<SpectrumPoint> points;  // sorted by pressure, near-duplicates merged
  bool partial = false;
  std::string partial_reason;
  double oracle_pressure = 0.0;
  double pstar = 0.0;

  /// Largest gap between consecutive sampled pressures inside [lo, hi],
  /// counting the distance from lo to the first and from the last to hi.
  [[nodiscard]] double max_gap(double lo, double hi) const;
};

/// Pressures of: every primitive cycle up to the length cap, the Gibbs chain,
/// and for each cycle that is simple in the block presentation the chains
/// (1-t) Q_gibbs + t Q_cycle at t = 1 - (1 - i/grid)^2, 0 < i < grid.
SpectrumSample spectrum_sample(const ShiftSystem& sys, const Potential& phi,
                               const SpectrumBudget& budget = {});

void write_spectrum_csv(std::ostream& out, const SpectrumSample& sample);

}  // namespace symdyn
