#pragma once

#include <functional>
#include <string>

#include <nlohmann/json.hpp>

#include "symdyn/segment_class.hpp"
#include "symdyn/shift_system.hpp"

namespace symdyn {

struct Split {
  int p = 0;
  int g = 0;
  int s = 0;
};

/// Splits each segment (x, n) of D into a prefix in P, a good core in G and a
/// suffix in S with p + g + s = n.
struct CTDecomposition {
  using SplitFn = std::function<Split(std::span<const Symbol> word, int n)>;

  std::string name;
  SegmentClass d = SegmentClass::all();
  SegmentClass p = SegmentClass::empty();
  SegmentClass g = SegmentClass::all();
  SegmentClass s = SegmentClass::empty();
  SplitFn split;
  nlohmann::json config;

  /// D = G = all, P = S = empty, split (0, n, 0).
  static CTDecomposition trivial();
  /// p = length of the leading run of `symbol`, capped at `cap`; P = runs of
  /// `symbol`; G = all; S = empty.
  static CTDecomposition prefix_run(Symbol symbol, int cap);
  /// P = all segments with p = min(n, cap) (cap < 0 means no cap); G = all.
  static CTDecomposition p_all(int cap = -1);
  /// Explicit finite table of (word, n) -> (p, g, s). D is the listed
  /// segments; P, G, S are the induced pieces.
  static CTDecomposition table(const nlohmann::json& rows);

  static CTDecomposition from_json(const nlohmann::json& j);
  static CTDecomposition load(const std::string& path);

  /// True when (x, n) in D splits with (x, p) in P, (s^p x, g) in G and
  /// (s^{p+g} x, s) in S. `word` must have length >= n.
  [[nodiscard]] bool split_valid(std::span<const Symbol> word, int n) const;
};

/// G_M = {(x, n) in D : p(x, n) <= M and s(x, n) <= M}.
SegmentClass restrict_gm(const CTDecomposition& dec, int m);

}  // namespace symdyn
