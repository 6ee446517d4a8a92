#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "symdyn/error.hpp"
#include "symdyn/shift_system.hpp"

using namespace symdyn;

using Rows = std::vector<std::vector<bool>>;

TEST_CASE("construction rejects degenerate systems") {
  CHECK_THROWS_AS(ShiftSystem(Rows{{true}}), ConfigError);
  CHECK_THROWS_AS(ShiftSystem({{true, true}, {false, false}}), ConfigError);
  CHECK_THROWS_AS(ShiftSystem({{true, false}, {true, false}}), ConfigError);
  CHECK_THROWS_AS(ShiftSystem({{true, true}, {true}}), ConfigError);
  CHECK_THROWS_AS(ShiftSystem::full(1), ConfigError);
}

TEST_CASE("connectivity and primitivity flags") {
  CHECK(ShiftSystem::full(2).primitive());
  CHECK(oracle::golden().primitive());
  CHECK(oracle::cycle3().strongly_connected());
  CHECK_FALSE(oracle::cycle3().primitive());
  ShiftSystem split({{true, true}, {false, true}});
  CHECK_FALSE(split.strongly_connected());
  CHECK_THROWS_AS(split.require_strongly_connected(), StructuralError);
}

TEST_CASE("count_words examples") {
  CHECK(count_words(ShiftSystem::full(2), 3) == 8);
  CHECK(count_words(oracle::golden(), 4) == 8);
  CHECK(count_words(ShiftSystem::full(3), 1) == 3);
  CHECK(count_words(ShiftSystem::full(2), 0) == 1);
  // Well past 64 bits.
  CHECK(count_words(ShiftSystem::full(2), 100) == (BigInt(1) << 100));
}

TEST_CASE("count_words matches brute-force filtering") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const auto sys = oracle::random_sft(rng, 2 + trial % 3);
    for (int n = 1; n <= 6; ++n) {
      CHECK(count_words(sys, n) == oracle::brute_words(sys, n).size());
    }
  }
}

TEST_CASE("enumerate_words examples") {
  auto strings = [](const std::vector<Word>& ws) {
    std::vector<std::string> out;
    for (const auto& w : ws) out.push_back(word_to_string(w));
    return out;
  };
  CHECK(strings(list_words(oracle::golden(), 2)) == std::vector<std::string>{"00", "01", "10"});
  CHECK(strings(list_words(ShiftSystem::full(2), 2)) == std::vector<std::string>{"00", "01", "10", "11"});
  CHECK(strings(list_words(oracle::golden(), 3)) ==
        std::vector<std::string>{"000", "001", "010", "100", "101"});
  CHECK(list_words(oracle::golden(), 3) == oracle::brute_words(oracle::golden(), 3));
}

TEST_CASE("enumerate_words refuses to exceed its budget") {
  int emitted = 0;
  CHECK_THROWS_AS(enumerate_words(ShiftSystem::full(2), 10, [&](auto) { ++emitted; }, 100),
                  ResourceError);
  CHECK(emitted == 0);
}

TEST_CASE("property: enumeration is admissible, sorted, duplicate-free, complete") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const int a = 2 + static_cast<int>(rng() % 3);
    const auto sys = oracle::random_sft(rng, a, 0.3);
    const int n = 1 + static_cast<int>(rng() % 6);
    const auto words = list_words(sys, n);
    CHECK(std::is_sorted(words.begin(), words.end()));
    CHECK(std::adjacent_find(words.begin(), words.end()) == words.end());
    for (const auto& w : words) CHECK(sys.admissible(w));
    CHECK(words.size() == count_words(sys, n));
  }
}

TEST_CASE("property: language is submultiplicative") {
  std::mt19937_64 rng(3);
  std::vector<ShiftSystem> systems{ShiftSystem::full(2), ShiftSystem::full(3), oracle::golden(),
                                   oracle::cycle3()};
  for (int i = 0; i < 4; ++i) systems.push_back(oracle::random_sft(rng, 2 + i % 3));
  for (const auto& sys : systems) {
    for (int m = 1; m <= 12; ++m) {
      for (int n = 1; n <= 12; ++n) {
        CHECK(count_words(sys, m + n) <= count_words(sys, m) * count_words(sys, n));
      }
    }
  }
}

TEST_CASE("separated_set examples") {
  const auto full2 = ShiftSystem::full(2);
  const auto s1 = separated_set(full2, 1, Resolution{1});
  CHECK(s1.size() == 2);
  CHECK(separated_set(oracle::golden(), 2, Resolution{2}).size() == 5);
  CHECK(oracle::brute_separated_cardinality(oracle::golden(), 2, 2) == 5);
  CHECK(separated_set(full2, 3, Resolution{2}).size() == 16);
}

TEST_CASE("property: separated_set cardinality is the brute-force maximum") {
  std::vector<ShiftSystem> systems{ShiftSystem::full(2), oracle::golden(), oracle::cycle3()};
  for (const auto& sys : systems) {
    for (int n = 1; n <= 8; ++n) {
      for (int level = 1; level <= 4; ++level) {
        if (n + level > 10) continue;  // keeps the quadratic oracle quick
        CAPTURE(n);
        CAPTURE(level);
        CHECK(separated_set(sys, n, Resolution{level}).size() ==
              oracle::brute_separated_cardinality(sys, n, level));
      }
    }
  }
}

TEST_CASE("digraph_diameter examples") {
  CHECK(digraph_diameter(ShiftSystem::full(2)) == 1);
  CHECK(digraph_diameter(oracle::golden()) == 2);
  CHECK(digraph_diameter(oracle::cycle3()) == 3);
  for (int a = 2; a <= 6; ++a) CHECK(digraph_diameter(ShiftSystem::full(a)) == 1);
  CHECK_THROWS_AS(digraph_diameter(ShiftSystem({{true, true}, {false, true}})), StructuralError);
}

TEST_CASE("shortest connectors") {
  CHECK(shortest_connector(oracle::golden(), 1, 1) == Word{0});
  CHECK(shortest_connector(oracle::golden(), 0, 1).empty());
  const auto c3 = oracle::cycle3();
  for (Symbol a = 0; a < 3; ++a) {
    for (Symbol b = 0; b < 3; ++b) {
      const auto c = shortest_connector(c3, a, b);
      CHECK(static_cast<int>(c.size()) == ((b - a - 1) % 3 + 3) % 3);
      Word joined{a};
      joined.insert(joined.end(), c.begin(), c.end());
      joined.push_back(b);
      CHECK(c3.admissible(joined));
    }
  }
}

TEST_CASE("resolution scaling") {
  CHECK(Resolution{5}.scaled(2.0).level == 4);
  CHECK(Resolution{5}.scaled(3.0).level == 4);
  CHECK(Resolution{5}.scaled(16.0).level == 1);
  CHECK(Resolution{7}.scaled(16.0).level == 3);
  CHECK(Resolution{2}.scaled(8.0).level == 1);
}

TEST_CASE("system JSON") {
  const auto g = ShiftSystem::from_json(nlohmann::json::parse(R"({"alphabet":2,"transitions":[[1,1],[1,0]]})"));
  CHECK(count_words(g, 4) == 8);
  CHECK(ShiftSystem::from_json(nlohmann::json::parse(R"({"alphabet":3,"full":true})")).is_full());
  CHECK_THROWS_AS(ShiftSystem::from_json(nlohmann::json::parse(R"({"alphabet":2,"transitions":[[1,1],[0,0]]})")),
                  ConfigError);
  CHECK_THROWS_WITH_AS(
      ShiftSystem::from_json(nlohmann::json::parse(R"({"alphabet":2,"transitions":[[1,0],[1,0]]})")),
      "transition column 1 has no predecessor", ConfigError);
  CHECK_THROWS_AS(ShiftSystem::from_json(nlohmann::json::parse(R"({"alphabet":2,"transitions":[[1,2],[1,0]]})")),
                  ConfigError);
  CHECK(ShiftSystem::from_json(g.to_json()).to_json() == g.to_json());
}
