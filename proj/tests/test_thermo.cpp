#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "symdyn/error.hpp"
#include "symdyn/log_sum.hpp"
#include "symdyn/thermo.hpp"

using namespace symdyn;

namespace {

const double kGolden = std::log((1.0 + std::sqrt(5.0)) / 2.0);

Potential golden_m2(const ShiftSystem& g) {
  return Potential(g, 2, {{{0, 0}, 0.0}, {{0, 1}, 1.0}, {{1, 0}, -1.0}});
}

}  // namespace

TEST_CASE("birkhoff_sum examples") {
  const auto full2 = ShiftSystem::full(2);
  const auto x0 = Potential::by_symbol(full2, {0.0, 1.0});
  CHECK(birkhoff_sum(x0, Word{0, 1, 0, 1}, 4) == doctest::Approx(2.0));
  const auto c = Potential::constant(full2, 0.7);
  CHECK(birkhoff_sum(c, Word{1, 1, 0, 1, 0}, 5) == doctest::Approx(3.5));
  const auto g = oracle::golden();
  // 1.0 (01) + -1.0 (10) + 0.0 (00)
  CHECK(birkhoff_sum(golden_m2(g), Word{0, 1, 0, 0}, 3) == doctest::Approx(0.0));
  CHECK_THROWS_AS(birkhoff_sum(golden_m2(g), Word{0, 1, 0}, 3), PreconditionError);
}

TEST_CASE("potential validation") {
  const auto g = oracle::golden();
  CHECK_THROWS_AS(Potential(g, 2, {{{0, 0}, 0.0}, {{0, 1}, 1.0}}), ConfigError);
  CHECK_THROWS_AS(Potential(g, 2, {{{0, 0}, 0.0}, {{0, 1}, 1.0}, {{1, 0}, 0.0}, {{1, 1}, 0.0}}), ConfigError);
  const auto j = nlohmann::json::parse(R"({"memory":2,"table":{"00":0,"01":1,"10":-1}})");
  const auto phi = Potential::from_json(g, j);
  CHECK(phi.min() == -1.0);
  CHECK(phi.max() == 1.0);
  try {
    Potential::from_json(g, nlohmann::json::parse(R"({"memory":2,"table":{"00":0,"01":1,"10":-1,"11":3}})"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("11") != std::string::npos);
  }
}

TEST_CASE("partition_function examples") {
  const auto full2 = ShiftSystem::full(2);
  const auto zero = Potential::constant(full2, 0.0);
  CHECK(std::exp(log_partition_function(full2, zero, SegmentClass::all(), 3, Resolution{1}, Resolution{1})) ==
        doctest::Approx(8.0));
  const auto ln2x0 = Potential::by_symbol(full2, {0.0, std::log(2.0)});
  CHECK(std::exp(log_partition_function(full2, ln2x0, SegmentClass::all(), 1, Resolution{1}, Resolution{1})) ==
        doctest::Approx(3.0));
  const auto g = oracle::golden();
  CHECK(std::exp(log_partition_function(g, Potential::constant(g, 0.0), SegmentClass::all(), 2, Resolution{2},
                                        Resolution{1})) == doctest::Approx(5.0));
  CHECK(list_words(g, 3).size() == 5);
  CHECK(log_partition_function(g, Potential::constant(g, 0.0), SegmentClass::empty(), 4, Resolution{1},
                               std::nullopt) == kNegInf);
}

TEST_CASE("partition function: transfer and enumeration paths agree with brute force") {
  std::mt19937_64 rng(17);
  const auto everything = SegmentClass::from_predicate("everything", [](auto, int) { return true; });
  for (int trial = 0; trial < 12; ++trial) {
    const auto sys = oracle::random_sft(rng, 2 + trial % 3);
    const int m = 1 + trial % 3;
    const auto phi = oracle::random_potential(rng, sys, m, -1.0, 1.0);
    for (int n = 1; n <= 4; ++n) {
      for (int ld = 1; ld <= 3; ++ld) {
        for (int le = 0; le <= 3; ++le) {
          const std::optional<Resolution> eps =
              le == 0 ? std::nullopt : std::optional<Resolution>(Resolution{le});
          const double expected = oracle::brute_log_partition(sys, phi, n, ld, le);
          CAPTURE(trial);
          CAPTURE(n);
          CAPTURE(ld);
          CAPTURE(le);
          CHECK(log_partition_function(sys, phi, SegmentClass::all(), n, Resolution{ld}, eps) ==
                doctest::Approx(expected).epsilon(1e-12));
          CHECK(log_partition_function(sys, phi, everything, n, Resolution{ld}, eps) ==
                doctest::Approx(expected).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("partition function with a predicate class matches brute force") {
  const auto g = oracle::golden();
  const auto phi = golden_m2(g);
  auto starts_zero = [](const Word& w, int) { return w[0] == 0; };
  const auto cls = SegmentClass::from_predicate("starts-0", [](std::span<const Symbol> w, int) { return w[0] == 0; });
  for (int n = 1; n <= 6; ++n) {
    CHECK(log_partition_function(g, phi, cls, n, Resolution{2}, std::nullopt) ==
          doctest::Approx(oracle::brute_log_partition(g, phi, n, 2, 0, starts_zero)));
  }
}

TEST_CASE("partition function is independent of the worker count") {
  const auto sys = ShiftSystem::full(3);
  std::mt19937_64 rng(2);
  const auto phi = oracle::random_potential(rng, sys, 2);
  const auto cls = SegmentClass::from_predicate("not-22", [](std::span<const Symbol> w, int) {
    return !(w[0] == 2 && w[1] == 2);
  });
  EnumerationOptions one, four;
  four.workers = 4;
  const double a = log_partition_function(sys, phi, cls, 8, Resolution{2}, std::nullopt, one);
  const double b = log_partition_function(sys, phi, cls, 8, Resolution{2}, std::nullopt, four);
  CHECK(a == b);
}

TEST_CASE("partition function budget") {
  const auto cls = SegmentClass::from_predicate("p", [](auto, int) { return true; });
  EnumerationOptions tiny;
  tiny.word_budget = 1000;
  try {
    log_partition_function(ShiftSystem::full(2), Potential::constant(ShiftSystem::full(2), 0.0), cls, 12,
                           Resolution{1}, std::nullopt, tiny);
    FAIL("expected ResourceError");
  } catch (const ResourceError& e) {
    CHECK(std::string(e.what()).find("n=12") != std::string::npos);
  }
}

TEST_CASE("pressure_enumerate examples") {
  const auto full2 = ShiftSystem::full(2);
  const auto zero2 = Potential::constant(full2, 0.0);
  const auto r = pressure_enumerate(full2, zero2, SegmentClass::all(), Resolution{1}, std::nullopt, 2, 12);
  for (double a : r.sequence) CHECK(a == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(r.error_bound == doctest::Approx(0.0).epsilon(1e-12));

  const auto g = oracle::golden();
  const auto rg = pressure_enumerate(g, Potential::constant(g, 0.0), SegmentClass::all(), Resolution{1},
                                     std::nullopt, 2, 20);
  CHECK(std::abs(rg.value - kGolden) < 0.05);

  const auto phi = golden_m2(g);
  const auto base = pressure_enumerate(g, phi, SegmentClass::all(), Resolution{2}, std::nullopt, 2, 10);
  const auto moved = pressure_enumerate(g, phi.shifted(0.8), SegmentClass::all(), Resolution{2}, std::nullopt, 2, 10);
  for (std::size_t i = 0; i < base.sequence.size(); ++i) {
    CHECK(moved.sequence[i] - base.sequence[i] == doctest::Approx(0.8).epsilon(1e-12));
  }
}

TEST_CASE("pressure_oracle examples") {
  CHECK(pressure_oracle(ShiftSystem::full(2), Potential::constant(ShiftSystem::full(2), 0.0)).value ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  const auto g = oracle::golden();
  // lambda^2 = lambda + 1
  CHECK(pressure_oracle(g, Potential::constant(g, 0.0)).value == doctest::Approx(kGolden).epsilon(1e-12));
  const auto full2 = ShiftSystem::full(2);
  CHECK(pressure_oracle(full2, Potential::by_symbol(full2, {0.0, std::log(2.0)})).value ==
        doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("pressure_oracle handles periodic systems") {
  const auto r = pressure_oracle(oracle::cycle3(), Potential::constant(oracle::cycle3(), 0.0));
  CHECK(r.value == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.periodic_fallback);
  CHECK(r.period == 3);
  CHECK(r.converged);
  // Period-2 system with positive entropy: {0,1} -> {2}, {2} -> {0,1}.
  ShiftSystem bip({{false, false, true}, {false, false, true}, {true, true, false}});
  const auto rb = pressure_oracle(bip, Potential::constant(bip, 0.0));
  CHECK(rb.value == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-12));
  CHECK(rb.period == 2);
}

TEST_CASE("pressure shifts by constants") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 8; ++trial) {
    const auto sys = oracle::random_sft(rng, 2 + trial % 3);
    const auto phi = oracle::random_potential(rng, sys, 1 + trial % 2);
    const double base = pressure_oracle(sys, phi).value;
    for (double c : {-1.0, 0.5, 2.0}) {
      CHECK(std::abs(pressure_oracle(sys, phi.shifted(c)).value - base - c) < 1e-9);
    }
  }
}

TEST_CASE("property: enumeration converges to the oracle") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const auto sys = oracle::random_sft(rng, 2 + trial % 3);
    const auto phi = oracle::random_potential(rng, sys, 1 + trial % 2);
    const double p = pressure_oracle(sys, phi).value;
    const auto short_run = pressure_enumerate(sys, phi, SegmentClass::all(), Resolution{1}, std::nullopt, 2, 10);
    const auto long_run = pressure_enumerate(sys, phi, SegmentClass::all(), Resolution{1}, std::nullopt, 2, 20);
    CHECK(std::abs(long_run.value - p) < 0.05);
    // Average gap over the top half of the range shrinks with n_max.
    auto top_half_gap = [&](const PressureReport& r) {
      double s = 0.0;
      const std::size_t h = r.sequence.size() / 2;
      for (std::size_t i = h; i < r.sequence.size(); ++i) s += std::abs(r.sequence[i] - p);
      return s / static_cast<double>(r.sequence.size() - h);
    };
    CHECK(top_half_gap(long_run) <= top_half_gap(short_run) + 1e-12);
  }
}

TEST_CASE("theta grows as delta refines") {
  const auto g = oracle::golden();
  const auto zero = Potential::constant(g, 0.0);
  for (int n = 1; n <= 8; ++n) {
    for (int level = 1; level < 5; ++level) {
      CHECK(count_words(g, n + level - 1) <= count_words(g, n + level));
      CHECK(log_partition_function(g, zero, SegmentClass::all(), n, Resolution{level}, std::nullopt) <=
            log_partition_function(g, zero, SegmentClass::all(), n, Resolution{level + 1}, std::nullopt) + 1e-12);
    }
  }
  // Coarser eps (smaller level) can only raise Theta.
  std::mt19937_64 rng(4);
  const auto phi = oracle::random_potential(rng, g, 3);
  for (int n = 1; n <= 6; ++n) {
    CHECK(log_partition_function(g, phi, SegmentClass::all(), n, Resolution{1}, Resolution{1}) >=
          log_partition_function(g, phi, SegmentClass::all(), n, Resolution{1}, Resolution{3}) - 1e-12);
  }
}

TEST_CASE("pstar examples") {
  const auto full2 = ShiftSystem::full(2);
  CHECK(pstar(full2, Potential::by_symbol(full2, {0.0, 1.0})) == doctest::Approx(1.0));
  const auto g = oracle::golden();
  CHECK(pstar(g, Potential::by_symbol(g, {0.0, 1.0})) == doctest::Approx(0.5));
  CHECK(pstar(oracle::cycle3(), Potential::constant(oracle::cycle3(), -2.5)) == doctest::Approx(-2.5));
}

TEST_CASE("property: pstar equals exhaustive simple-cycle maximum") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    const auto sys = oracle::random_sft(rng, 2 + trial % 5, 0.3);
    const auto phi = oracle::random_potential(rng, sys, 1 + trial % 2, -1.0, 1.0);
    CHECK(std::abs(pstar(sys, phi) - oracle::brute_max_cycle_mean(sys, phi)) < 1e-12);
    CHECK(pstar(sys, phi) <= pressure_oracle(sys, phi).value + 1e-12);
    const auto seq = max_birkhoff_averages(sys, phi, 20);
    CHECK(seq.back() >= pstar(sys, phi) - 1e-12);
  }
}

TEST_CASE("variation examples") {
  const auto full2 = ShiftSystem::full(2);
  CHECK(variation(Potential::by_symbol(full2, {0.0, 1.0}), Resolution{1}) == 0.0);
  const Potential m2(full2, 2, {{{0, 0}, 0.0}, {{0, 1}, 1.0}, {{1, 0}, -1.0}, {{1, 1}, 0.0}});
  // Classes "0." = {0, 1} and "1." = {-1, 0}: largest in-class difference is 1.
  CHECK(variation(m2, Resolution{1}) == doctest::Approx(1.0));
  std::mt19937_64 rng(1);
  const auto m3 = oracle::random_potential(rng, full2, 3);
  CHECK(variation(m3, Resolution{5}) == 0.0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto sys = oracle::random_sft(rng, 2 + trial % 3);
    const int m = 1 + trial % 4;
    const auto phi = oracle::random_potential(rng, sys, m, -3.0, 3.0);
    for (int level = m; level < m + 3; ++level) CHECK(variation(phi, Resolution{level}) == 0.0);
  }
}

TEST_CASE("bowen_bound") {
  const auto full2 = ShiftSystem::full(2);
  CHECK(bowen_bound(full2, Potential::by_symbol(full2, {0.0, 1.0}), SegmentClass::all(), Resolution{1}, 6).certified ==
        0.0);
  const Potential m2(full2, 2, {{{0, 0}, 0.0}, {{0, 1}, 1.0}, {{1, 0}, -1.0}, {{1, 1}, 0.0}});
  CHECK(bowen_bound(full2, m2, SegmentClass::all(), Resolution{3}, 6).certified == 0.0);
  const auto b = bowen_bound(full2, m2, SegmentClass::all(), Resolution{1}, 6);
  CHECK(b.certified == doctest::Approx(variation(m2, Resolution{1})));
  // Only the last window can differ inside an (n, 1/2)-ball; its spread is 1.
  CHECK(b.sampled == doctest::Approx(1.0));
  CHECK(b.sampled <= b.certified);
}

TEST_CASE("expansivity_report") {
  for (int level : {1, 3, 7}) {
    const auto r = expansivity_report(oracle::golden(), Resolution{level});
    CHECK(r.h_star == 0.0);
    CHECK(r.ne_empty);
    CHECK(r.p_exp_bot == kNegInf);
  }
}
