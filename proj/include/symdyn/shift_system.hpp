#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <nlohmann/json.hpp>

namespace symdyn {

using Symbol = std::uint8_t;
using Word = std::vector<Symbol>;
using BigInt = boost::multiprecision::cpp_int;

/// Dyadic scale eps = 2^-level in the metric d(x,y) = 2^-min{k : x_k != y_k}.
///
/// Two points are more than 2^-level apart iff their first `level` symbols
/// differ, so an (n, 2^-level)-separated set is a set of distinct words of
/// length n + level - 1.
struct Resolution {
  int level = 1;

  [[nodiscard]] double epsilon() const;
  /// Dyadic level of the scale factor * 2^-level, i.e. the largest k with
  /// 2^-k <= factor * 2^-level, clamped to 1. Distances only take dyadic
  /// values, so both "d <= c" and "d > c" tests reduce to this level.
  [[nodiscard]] Resolution scaled(double factor) const;

  friend bool operator==(Resolution, Resolution) = default;
};

/// One-sided subshift of finite type on the alphabet {0, ..., A-1}.
class ShiftSystem {
 public:
  /// Throws ConfigError on A < 2, a non-square matrix, or a symbol with an
  /// empty row or column.
  explicit ShiftSystem(std::vector<std::vector<bool>> transitions);

  static ShiftSystem full(int alphabet_size);

  [[nodiscard]] int alphabet_size() const { return alphabet_size_; }
  [[nodiscard]] bool allowed(Symbol a, Symbol b) const {
    return transitions_[static_cast<std::size_t>(a) * alphabet_size_ + b] != 0;
  }
  [[nodiscard]] const std::vector<Symbol>& successors(Symbol a) const { return successors_[a]; }
  [[nodiscard]] bool strongly_connected() const { return strongly_connected_; }
  /// Some power of T is entrywise positive.
  [[nodiscard]] bool primitive() const { return primitive_; }
  [[nodiscard]] bool is_full() const;

  [[nodiscard]] bool admissible(std::span<const Symbol> w) const;
  /// Throws StructuralError naming an unreachable pair when not strongly connected.
  void require_strongly_connected() const;

  [[nodiscard]] nlohmann::json to_json() const;
  static ShiftSystem from_json(const nlohmann::json& j);
  static ShiftSystem load(const std::string& path);

 private:
  int alphabet_size_;
  std::vector<char> transitions_;
  std::vector<std::vector<Symbol>> successors_;
  bool strongly_connected_ = false;
  bool primitive_ = false;
};

/// Number of admissible words of length n (sum of the entries of T^(n-1)).
/// count_words(sys, 0) is 1 (the empty word).
BigInt count_words(const ShiftSystem& sys, int n);
/// count_words as a double, for logarithms.
double count_words_approx(const ShiftSystem& sys, int n);

using WordVisitor = std::function<void(std::span<const Symbol>)>;

/// Visits every admissible word of length n once, in lexicographic order.
/// Throws ResourceError before emitting anything when the count exceeds budget.
void enumerate_words(const ShiftSystem& sys, int n, const WordVisitor& visit,
                     std::uint64_t budget = 50'000'000);
std::vector<Word> list_words(const ShiftSystem& sys, int n, std::uint64_t budget = 50'000'000);

/// Maximal (n, eps)-separated set: all admissible words of length n + level - 1.
std::vector<Word> separated_set(const ShiftSystem& sys, int n, Resolution eps,
                                std::uint64_t budget = 50'000'000);

/// Length of the shortest nonempty path from a to b in the transition digraph.
std::vector<std::vector<int>> shortest_path_lengths(const ShiftSystem& sys);
/// Max over ordered pairs (a, b) of the shortest path length from a to b.
int digraph_diameter(const ShiftSystem& sys);
/// Interior symbols of a shortest a -> b path (empty when T[a][b]).
/// Lexicographically smallest among shortest paths.
Word shortest_connector(const ShiftSystem& sys, Symbol a, Symbol b);

std::string word_to_string(std::span<const Symbol> w);
Word word_from_string(const std::string& s, int alphabet_size);

}  // namespace symdyn
