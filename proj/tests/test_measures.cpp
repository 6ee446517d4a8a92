#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "symdyn/error.hpp"
#include "symdyn/measures.hpp"
#include "symdyn/thermo.hpp"

using namespace symdyn;

namespace {

const double kGolden = std::log((1.0 + std::sqrt(5.0)) / 2.0);

// Direct evaluation of -sum p ln p, independent of the chain code.
double bernoulli_entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0) h -= x * std::log(x);
  }
  return h;
}

}  // namespace

TEST_CASE("markov_entropy examples") {
  const auto full2 = ShiftSystem::full(2);
  CHECK(markov_entropy(MarkovMeasure::bernoulli(full2, {0.5, 0.5})) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(markov_entropy(MarkovMeasure::bernoulli(full2, {1.0, 0.0})) == 0.0);
  const double h = markov_entropy(MarkovMeasure::bernoulli(full2, {0.25, 0.75}));
  CHECK(h == doctest::Approx(bernoulli_entropy({0.25, 0.75})).epsilon(1e-14));
  CHECK(std::abs(h - 0.562335) < 1e-6);
}

TEST_CASE("MarkovMeasure validation") {
  const auto g = oracle::golden();
  CHECK_THROWS_AS(MarkovMeasure(g, 1, {{0.5, 0.5}, {0.5, 0.5}}), ConfigError);  // 1 -> 1 forbidden
  CHECK_THROWS_AS(MarkovMeasure(g, 1, {{0.5, 0.6}, {1.0, 0.0}}), ConfigError);
  CHECK_THROWS_AS(MarkovMeasure(ShiftSystem::full(2), 1, {{1.0, 0.0}, {0.0, 1.0}}), ComputationError);
  const MarkovMeasure mu(g, 1, {{0.5, 0.5}, {1.0, 0.0}});
  CHECK(mu.stationary()[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(mu.stationary()[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(mu.cylinder(Word{0, 1, 0}) == doctest::Approx(1.0 / 3.0));
  CHECK(mu.cylinder(Word{1, 1}) == 0.0);
}

TEST_CASE("property: stationary vectors are invariant and normalized") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto sys = oracle::random_sft(rng, 2 + trial % 4);
    const int k = 1 + trial % 2;
    const auto blocks = list_words(sys, k);
    std::vector<std::vector<double>> q(blocks.size(), std::vector<double>(blocks.size(), 0.0));
    for (std::size_t a = 0; a < blocks.size(); ++a) {
      double s = 0.0;
      for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (std::equal(blocks[a].begin() + 1, blocks[a].end(), blocks[b].begin()) &&
            sys.allowed(blocks[a].back(), blocks[b].back())) {
          q[a][b] = u(rng);
          s += q[a][b];
        }
      }
      for (double& x : q[a]) x /= s;
    }
    const MarkovMeasure mu(sys, k, q);
    double total = 0.0;
    for (double p : mu.stationary()) {
      CHECK(p >= 0.0);
      total += p;
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      double in = 0.0;
      for (std::size_t a = 0; a < blocks.size(); ++a) in += mu.stationary()[a] * q[a][b];
      CHECK(std::abs(in - mu.stationary()[b]) < 1e-12);
    }
    // Cylinder probabilities of length-4 words form a distribution.
    double mass = 0.0;
    for (const auto& w : oracle::brute_words(sys, 4)) mass += mu.cylinder(w);
    CHECK(std::abs(mass - 1.0) < 1e-12);
  }
}

TEST_CASE("measure_pressure examples") {
  const auto full2 = ShiftSystem::full(2);
  CHECK(measure_pressure(Potential::constant(full2, 0.0), MarkovMeasure::bernoulli(full2, {0.5, 0.5})) ==
        doctest::Approx(std::log(2.0)));
  CHECK(measure_pressure(Potential::by_symbol(full2, {0.0, 1.0}), PeriodicOrbitMeasure(full2, Word{1})) ==
        doctest::Approx(1.0));
  const auto g = oracle::golden();
  // Parry measure from the Perron vectors of [[1,1],[1,0]].
  const auto parry = gibbs_chain(g, Potential::constant(g, 0.0));
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  CHECK(parry.stochastic()[0][0] == doctest::Approx(1.0 / phi).epsilon(1e-12));
  CHECK(measure_pressure(Potential::constant(g, 0.0), parry) == doctest::Approx(kGolden).epsilon(1e-12));
  CHECK(std::abs(measure_pressure(Potential::constant(g, 0.0), parry) - pressure_oracle(g, Potential::constant(g, 0.0)).value) <
        1e-9);
}

TEST_CASE("integral of a memory-2 potential against a symbol chain") {
  const auto g = oracle::golden();
  const Potential phi(g, 2, {{{0, 0}, 0.5}, {{0, 1}, 1.0}, {{1, 0}, -1.0}});
  const MarkovMeasure mu(g, 1, {{0.25, 0.75}, {1.0, 0.0}});
  // Independent: sum over length-2 words of pi_a Q_ab phi(ab).
  const double pi0 = 1.0 / 1.75, pi1 = 0.75 / 1.75;
  const double expected = pi0 * 0.25 * 0.5 + pi0 * 0.75 * 1.0 + pi1 * 1.0 * -1.0;
  CHECK(markov_integral(phi, mu) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("periodic orbit validation") {
  const auto g = oracle::golden();
  CHECK_THROWS_AS(PeriodicOrbitMeasure(g, Word{1}), ConfigError);
  CHECK_THROWS_AS(PeriodicOrbitMeasure(g, Word{0, 1, 0, 1}), ConfigError);
  CHECK_THROWS_AS(PeriodicOrbitMeasure(g, Word{1, 0, 1}), ConfigError);  // wrap 1 -> 1
  CHECK_NOTHROW(PeriodicOrbitMeasure(g, Word{0, 0, 1}));
}

TEST_CASE("primitive cycles") {
  // Necklace counts on the full 2-shift: 2, 1, 2, 3, 6, 9.
  std::vector<std::size_t> per_length(7, 0);
  for (const auto& c : primitive_cycles(ShiftSystem::full(2), 6)) ++per_length[c.size()];
  CHECK(per_length == std::vector<std::size_t>{0, 2, 1, 2, 3, 6, 9});
  // Golden mean: primitive orbits number 1, 1, 1, 1, 2, 2 (Lucas numbers via Mobius).
  std::vector<std::size_t> g(7, 0);
  for (const auto& c : primitive_cycles(oracle::golden(), 6)) ++g[c.size()];
  CHECK(g == std::vector<std::size_t>{0, 1, 1, 1, 1, 2, 2});
  CHECK(primitive_cycles(oracle::cycle3(), 9).size() == 1);
}

TEST_CASE("gibbs chain attains the oracle pressure") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const auto sys = oracle::random_sft(rng, 2 + trial % 4);
    const int m = 1 + trial % 3;
    const auto phi = oracle::random_potential(rng, sys, m, -1.0, 2.0);
    const double p = pressure_oracle(sys, phi).value;
    CAPTURE(trial);
    CHECK(std::abs(measure_pressure(phi, gibbs_chain(sys, phi)) - p) < 1e-9);
  }
  CHECK(std::abs(measure_pressure(Potential::constant(oracle::cycle3(), 0.3), gibbs_chain(oracle::cycle3(),
                                  Potential::constant(oracle::cycle3(), 0.3))) - 0.3) < 1e-9);
}

TEST_CASE("spectrum_sample examples") {
  const auto full2 = ShiftSystem::full(2);
  const auto s = spectrum_sample(full2, Potential::constant(full2, 0.0), {2, 10, 1000, 1});
  CHECK(s.points.front().pressure == doctest::Approx(0.0));
  CHECK(s.points.back().pressure == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  const auto x0 = Potential::by_symbol(full2, {0.0, 1.0});
  const auto t = spectrum_sample(full2, x0, {6, 10, 100000, 1});
  double hi = -1e9, best_cycle = -1e9;
  for (const auto& p : t.points) {
    hi = std::max(hi, p.pressure);
    if (p.kind == "cycle") best_cycle = std::max(best_cycle, p.pressure);
  }
  CHECK(hi <= std::log(1.0 + std::exp(1.0)) + 1e-9);
  CHECK(best_cycle == doctest::Approx(1.0));
  CHECK(t.pstar == doctest::Approx(1.0));
}

TEST_CASE("property: variational inequality and attainment") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const auto sys = oracle::random_sft(rng, 2 + trial % 3);
    const int m = 1 + trial % 2;
    const auto phi = oracle::random_potential(rng, sys, m);
    const auto s = spectrum_sample(sys, phi, {6, 8, 100000, 1});
    double hi = -1e300, cycle_lo = 1e300, cycle_hi = -1e300;
    for (const auto& p : s.points) {
      CHECK(p.pressure <= s.oracle_pressure + 1e-9);
      hi = std::max(hi, p.pressure);
      if (p.kind == "cycle") {
        cycle_lo = std::min(cycle_lo, p.pressure);
        cycle_hi = std::max(cycle_hi, p.pressure);
      }
    }
    CHECK(hi >= s.oracle_pressure - 1e-9);
    CHECK(cycle_lo <= s.pstar + 1e-12);
    CHECK(cycle_hi <= s.pstar + 1e-12);
  }
}

TEST_CASE("cycle maximum equals pstar once cycles cover the block graph") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const auto sys = oracle::random_sft(rng, 2 + trial % 3);
    const auto phi = oracle::random_potential(rng, sys, 1 + trial % 2, -1.0, 1.0);
    double best = -1e300;
    for (const auto& c : primitive_cycles(sys, sys.alphabet_size())) {
      best = std::max(best, measure_pressure(phi, PeriodicOrbitMeasure(sys, c)));
    }
    CHECK(std::abs(best - pstar(sys, phi)) < 1e-12);
  }
}

TEST_CASE("density on the full 2-shift") {
  const auto full2 = ShiftSystem::full(2);
  const auto s = spectrum_sample(full2, Potential::constant(full2, 0.0), {10, 50, 1'000'000, 1});
  CHECK_FALSE(s.partial);
  CHECK(s.max_gap(0.0, std::log(2.0)) < 0.05);
}

TEST_CASE("spectrum is independent of the worker count and CSV is stable") {
  const auto g = oracle::golden();
  const auto phi = Potential::by_symbol(g, {0.0, 0.2});
  std::ostringstream a, b;
  write_spectrum_csv(a, spectrum_sample(g, phi, {8, 20, 100000, 1}));
  write_spectrum_csv(b, spectrum_sample(g, phi, {8, 20, 100000, 3}));
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("kind,parameter,entropy,integral,pressure\n", 0) == 0);
}

TEST_CASE("spectrum budget flags partial results") {
  const auto full2 = ShiftSystem::full(2);
  const auto s = spectrum_sample(full2, Potential::constant(full2, 0.0), {4, 50, 20, 1});
  CHECK(s.partial);
  const auto capped = spectrum_sample(full2, Potential::constant(full2, 0.0), {14, 2, 100000, 1});
  CHECK(capped.partial);
}
