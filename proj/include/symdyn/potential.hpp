#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "symdyn/shift_system.hpp"

namespace symdyn {

/// Locally constant potential phi(x) = table[x_0 ... x_{m-1}].
class Potential {
 public:
  /// Every admissible length-m word must be present and no other key.
  /// Throws ConfigError listing the offending words otherwise.
  Potential(const ShiftSystem& sys, int memory, const std::map<Word, double>& table);

  static Potential constant(const ShiftSystem& sys, double c);
  /// Memory-1 potential phi(x) = values[x_0].
  static Potential by_symbol(const ShiftSystem& sys, const std::vector<double>& values);

  [[nodiscard]] int memory() const { return memory_; }
  [[nodiscard]] int alphabet_size() const { return alphabet_size_; }

  /// phi evaluated on the first `memory()` symbols of `window`.
  [[nodiscard]] double operator()(std::span<const Symbol> window) const {
    std::size_t code = 0;
    for (int i = 0; i < memory_; ++i) code = code * alphabet_size_ + window[i];
    return values_[code];
  }

  /// min / max of phi over X.
  [[nodiscard]] double min() const { return min_; }
  [[nodiscard]] double max() const { return max_; }
  [[nodiscard]] bool is_constant() const { return min_ == max_; }

  /// phi + c.
  [[nodiscard]] Potential shifted(double c) const;
  [[nodiscard]] const std::vector<Word>& words() const { return words_; }

  [[nodiscard]] nlohmann::json to_json() const;
  /// {"memory": m, "table": {"word": value, ...}} covering every admissible
  /// m-word, or {"constant": c}.
  static Potential from_json(const ShiftSystem& sys, const nlohmann::json& j);
  static Potential load(const ShiftSystem& sys, const std::string& path);

 private:
  Potential() = default;
  void finish();

  int alphabet_size_ = 0;
  int memory_ = 1;
  std::vector<double> values_;  // indexed by base-A code, NaN when inadmissible
  std::vector<Word> words_;     // admissible length-m words, lexicographic
  double min_ = 0.0;
  double max_ = 0.0;
};

}  // namespace symdyn
