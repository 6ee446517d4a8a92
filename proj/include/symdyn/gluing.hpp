#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "symdyn/segment_class.hpp"
#include "symdyn/shift_system.hpp"

namespace symdyn {

/// Gluing witness: one fixed connector word per (last symbol, first symbol)
/// pair, so any sequence of segments concatenates with gaps of length <= tau.
struct GluingCertificate {
  Resolution delta{1};
  int n0 = 1;
  int tau = 0;
  std::map<std::pair<Symbol, Symbol>, Word> connectors;
  /// Number of sampled segment sequences that were glued and traced.
  int sequences_checked = 0;

  [[nodiscard]] const Word& connector(Symbol last, Symbol first) const;
  /// w1 c w2 c' ... with the certificate connectors; `starts` receives t_k.
  [[nodiscard]] Word glue(const std::vector<Word>& segments, std::vector<std::size_t>* starts = nullptr) const;
  [[nodiscard]] nlohmann::json to_json() const;
};

/// Builds BFS-shortest connectors for every symbol pair and checks them on
/// `samples` seeded random sequences of up to 8 segments drawn from `g`, with
/// lengths in [n0, n0 + 4]: the concatenation must be admissible and must
/// reproduce each segment exactly at its start time. `tau`, when given, must
/// be at least the longest connector. Throws StructuralError on failure.
GluingCertificate check_gluing(const ShiftSystem& sys, const SegmentClass& g, Resolution delta, int n0,
                               std::optional<int> tau = std::nullopt, std::uint64_t seed = 0,
                               int samples = 200);

/// Same gluing with connectors re-chosen so the gap after a segment depends
/// only on its last symbol: for each a, the shortest length L for which every
/// b is reachable through exactly L interior symbols (lexicographically
/// smallest path). Symbols admitting no common length keep their base
/// connectors. With uniform gaps a concatenation parses in one way only.
GluingCertificate uniform_gap_certificate(const ShiftSystem& sys, const SegmentClass& g,
                                          const GluingCertificate& base, std::uint64_t seed = 0,
                                          int samples = 200);

}  // namespace symdyn
