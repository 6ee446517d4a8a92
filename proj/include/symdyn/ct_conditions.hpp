#pragma once

#include <array>
#include <string>

#include <nlohmann/json.hpp>

#include "symdyn/decomposition.hpp"
#include "symdyn/potential.hpp"
#include "symdyn/thermo.hpp"

namespace symdyn {

/// Dyadic scales eps = 2^-eps.level etc. Valid when 16 delta < 8 gamma < eps,
/// i.e. gamma.level >= eps.level + 4 and delta.level >= gamma.level + 2.
struct CTResolutions {
  Resolution eps{1};
  Resolution gamma{5};
  Resolution delta{7};

  /// Throws ConfigError naming the violated comparison.
  void validate() const;
  [[nodiscard]] nlohmann::json to_json() const;
};

enum class ConditionStatus { kPass, kFail, kInconclusive };
std::string to_string(ConditionStatus s);

struct ConditionResult {
  std::string name;
  ConditionStatus status = ConditionStatus::kPass;
  /// Positive when the condition holds with room to spare; +inf for vacuous passes.
  double margin = 0.0;
  std::string detail;
  nlohmann::json data;
};

struct CTReport {
  std::array<ConditionResult, 5> conditions;
  double pressure = 0.0;  // oracle P(phi)
  [[nodiscard]] bool all_pass() const;
  [[nodiscard]] bool any_fail() const;
  [[nodiscard]] nlohmann::json to_json() const;
};

/// Evaluates the five conditions: (1) gluing for G_M, M in {0,1,2};
/// (2) P(D^c, 2gamma, 2gamma) < P; (3) P(P u S, gamma, 3gamma) < P;
/// (4) Bowen property on G at 3gamma; (5) P_exp^perp(eps) < P.
/// Pressures (2), (3) are enumerated over n in [n_cap/2, n_cap].
CTReport check_ct_conditions(const ShiftSystem& sys, const Potential& phi, const CTDecomposition& dec,
                             const CTResolutions& res, int n_cap = 12, std::uint64_t seed = 0,
                             const EnumerationOptions& options = {});

}  // namespace symdyn
