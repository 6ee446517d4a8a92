#include "symdyn/shift_system.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "symdyn/error.hpp"

namespace symdyn {

double Resolution::epsilon() const { return std::ldexp(1.0, -level); }

Resolution Resolution::scaled(double factor) const {
  const double c = factor * epsilon();
  const int k = static_cast<int>(std::ceil(-std::log2(c) - 1e-12));
  return Resolution{std::max(1, k)};
}

namespace {

std::vector<int> bfs_distances(const ShiftSystem& sys, Symbol from) {
  const int a = sys.alphabet_size();
  std::vector<int> dist(a, -1);
  std::deque<Symbol> queue;
  // Distances count edges of nonempty paths, so `from` itself is only
  // reached again through a cycle.
  for (Symbol s : sys.successors(from)) {
    if (dist[s] < 0) {
      dist[s] = 1;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    Symbol u = queue.front();
    queue.pop_front();
    for (Symbol v : sys.successors(u)) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

}  // namespace

ShiftSystem::ShiftSystem(std::vector<std::vector<bool>> transitions)
    : alphabet_size_(static_cast<int>(transitions.size())) {
  if (alphabet_size_ < 2) throw ConfigError("alphabet must have at least 2 symbols");
  if (alphabet_size_ > 255) throw ConfigError("alphabet larger than 255 symbols");
  transitions_.assign(static_cast<std::size_t>(alphabet_size_) * alphabet_size_, 0);
  successors_.resize(alphabet_size_);
  for (int a = 0; a < alphabet_size_; ++a) {
    if (static_cast<int>(transitions[a].size()) != alphabet_size_) {
      throw ConfigError("transition row " + std::to_string(a) + " has length " +
                        std::to_string(transitions[a].size()) + ", expected " +
                        std::to_string(alphabet_size_));
    }
    for (int b = 0; b < alphabet_size_; ++b) {
      if (transitions[a][b]) {
        transitions_[static_cast<std::size_t>(a) * alphabet_size_ + b] = 1;
        successors_[a].push_back(static_cast<Symbol>(b));
      }
    }
    if (successors_[a].empty()) {
      throw ConfigError("transition row " + std::to_string(a) + " has no allowed successor");
    }
  }
  for (int b = 0; b < alphabet_size_; ++b) {
    bool any = false;
    for (int a = 0; a < alphabet_size_; ++a) any = any || transitions[a][b];
    if (!any) throw ConfigError("transition column " + std::to_string(b) + " has no predecessor");
  }

  strongly_connected_ = true;
  for (int a = 0; a < alphabet_size_ && strongly_connected_; ++a) {
    auto dist = bfs_distances(*this, static_cast<Symbol>(a));
    for (int d : dist) strongly_connected_ = strongly_connected_ && d > 0;
  }
  if (strongly_connected_) {
    // Period = gcd of cycle lengths = gcd over edges of level(u) + 1 - level(v).
    auto level = bfs_distances(*this, 0);
    level[0] = 0;
    int period = 0;
    for (int u = 0; u < alphabet_size_; ++u) {
      for (Symbol v : successors_[u]) period = std::gcd(period, std::abs(level[u] + 1 - level[v]));
    }
    primitive_ = period == 1;
  }
}

ShiftSystem ShiftSystem::full(int alphabet_size) {
  if (alphabet_size < 2) throw ConfigError("alphabet must have at least 2 symbols");
  return ShiftSystem(std::vector<std::vector<bool>>(
      alphabet_size, std::vector<bool>(alphabet_size, true)));
}

bool ShiftSystem::is_full() const {
  return std::all_of(transitions_.begin(), transitions_.end(), [](char c) { return c != 0; });
}

bool ShiftSystem::admissible(std::span<const Symbol> w) const {
  for (Symbol s : w) {
    if (s >= alphabet_size_) return false;
  }
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (!allowed(w[i - 1], w[i])) return false;
  }
  return true;
}

void ShiftSystem::require_strongly_connected() const {
  if (strongly_connected_) return;
  for (int a = 0; a < alphabet_size_; ++a) {
    auto dist = bfs_distances(*this, static_cast<Symbol>(a));
    for (int b = 0; b < alphabet_size_; ++b) {
      if (dist[b] < 0) {
        throw StructuralError("transition digraph is not strongly connected: symbol " +
                              std::to_string(b) + " is unreachable from symbol " +
                              std::to_string(a));
      }
    }
  }
}

nlohmann::json ShiftSystem::to_json() const {
  if (is_full()) return {{"alphabet", alphabet_size_}, {"full", true}};
  nlohmann::json rows = nlohmann::json::array();
  for (int a = 0; a < alphabet_size_; ++a) {
    nlohmann::json row = nlohmann::json::array();
    for (int b = 0; b < alphabet_size_; ++b) row.push_back(allowed(a, b) ? 1 : 0);
    rows.push_back(row);
  }
  return {{"alphabet", alphabet_size_}, {"transitions", rows}};
}

ShiftSystem ShiftSystem::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("alphabet") || !j["alphabet"].is_number_integer()) {
    throw ConfigError("system definition needs an integer \"alphabet\" field");
  }
  const int a = j["alphabet"].get<int>();
  if (a < 2) throw ConfigError("alphabet must have at least 2 symbols");
  if (j.value("full", false)) return full(a);
  if (!j.contains("transitions") || !j["transitions"].is_array()) {
    throw ConfigError("system definition needs \"transitions\" or \"full\": true");
  }
  const auto& rows = j["transitions"];
  if (static_cast<int>(rows.size()) != a) {
    throw ConfigError("transitions has " + std::to_string(rows.size()) + " rows, expected " +
                      std::to_string(a));
  }
  std::vector<std::vector<bool>> t(a);
  for (int r = 0; r < a; ++r) {
    if (!rows[r].is_array()) throw ConfigError("transition row " + std::to_string(r) + " is not an array");
    for (const auto& v : rows[r]) {
      if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1)) {
        throw ConfigError("transition row " + std::to_string(r) + " has an entry other than 0/1");
      }
      t[r].push_back(v.get<int>() == 1);
    }
  }
  return ShiftSystem(std::move(t));
}

ShiftSystem ShiftSystem::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open system file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse system file " + path + ": " + e.what());
  }
  return from_json(j);
}

BigInt count_words(const ShiftSystem& sys, int n) {
  if (n < 0) throw PreconditionError("count_words: negative length");
  if (n == 0) return 1;
  const int a = sys.alphabet_size();
  std::vector<BigInt> ending(a, 1);
  for (int len = 1; len < n; ++len) {
    std::vector<BigInt> next(a, 0);
    for (int u = 0; u < a; ++u) {
      for (Symbol v : sys.successors(static_cast<Symbol>(u))) next[v] += ending[u];
    }
    ending.swap(next);
  }
  return std::accumulate(ending.begin(), ending.end(), BigInt(0));
}

double count_words_approx(const ShiftSystem& sys, int n) {
  return count_words(sys, n).convert_to<double>();
}

void enumerate_words(const ShiftSystem& sys, int n, const WordVisitor& visit,
                     std::uint64_t budget) {
  if (n < 1) throw PreconditionError("enumerate_words: length must be >= 1");
  const BigInt total = count_words(sys, n);
  if (total > budget) {
    throw ResourceError("enumerating " + total.str() + " words of length " + std::to_string(n) +
                        " exceeds the budget of " + std::to_string(budget));
  }
  Word w(n);
  // Iterative depth-first walk; successor lists are sorted, so output is lexicographic.
  std::vector<std::size_t> choice(n, 0);
  int depth = 0;
  while (depth >= 0) {
    const std::size_t options =
        depth == 0 ? static_cast<std::size_t>(sys.alphabet_size()) : sys.successors(w[depth - 1]).size();
    if (choice[depth] == options) {
      choice[depth] = 0;
      --depth;
      if (depth >= 0) ++choice[depth];
      continue;
    }
    w[depth] = depth == 0 ? static_cast<Symbol>(choice[0]) : sys.successors(w[depth - 1])[choice[depth]];
    if (depth == n - 1) {
      visit(w);
      ++choice[depth];
    } else {
      ++depth;
    }
  }
}

std::vector<Word> list_words(const ShiftSystem& sys, int n, std::uint64_t budget) {
  std::vector<Word> out;
  enumerate_words(sys, n, [&](std::span<const Symbol> w) { out.emplace_back(w.begin(), w.end()); },
                  budget);
  return out;
}

std::vector<Word> separated_set(const ShiftSystem& sys, int n, Resolution eps,
                                std::uint64_t budget) {
  if (n < 1 || eps.level < 1) throw PreconditionError("separated_set: n and level must be >= 1");
  return list_words(sys, n + eps.level - 1, budget);
}

std::vector<std::vector<int>> shortest_path_lengths(const ShiftSystem& sys) {
  std::vector<std::vector<int>> out;
  for (int a = 0; a < sys.alphabet_size(); ++a) out.push_back(bfs_distances(sys, static_cast<Symbol>(a)));
  return out;
}

int digraph_diameter(const ShiftSystem& sys) {
  sys.require_strongly_connected();
  int diameter = 0;
  for (const auto& row : shortest_path_lengths(sys)) {
    for (int d : row) diameter = std::max(diameter, d);
  }
  return diameter;
}

Word shortest_connector(const ShiftSystem& sys, Symbol a, Symbol b) {
  if (sys.allowed(a, b)) return {};
  // dist_to[u] = shortest path length from u to b (nonempty paths).
  const int n = sys.alphabet_size();
  std::vector<int> dist_to(n, -1);
  std::deque<Symbol> queue;
  for (int u = 0; u < n; ++u) {
    if (sys.allowed(static_cast<Symbol>(u), b)) {
      dist_to[u] = 1;
      queue.push_back(static_cast<Symbol>(u));
    }
  }
  while (!queue.empty()) {
    Symbol v = queue.front();
    queue.pop_front();
    for (int u = 0; u < n; ++u) {
      if (dist_to[u] < 0 && sys.allowed(static_cast<Symbol>(u), v)) {
        dist_to[u] = dist_to[v] + 1;
        queue.push_back(static_cast<Symbol>(u));
      }
    }
  }
  int best = -1;
  for (Symbol s : sys.successors(a)) {
    if (dist_to[s] > 0 && (best < 0 || dist_to[s] < best)) best = dist_to[s];
  }
  if (best < 0) {
    throw StructuralError("no path from symbol " + std::to_string(a) + " to symbol " +
                          std::to_string(b));
  }
  Word path;
  Symbol cur = a;
  int remaining = best;  // edges still needed from the next symbol to b
  while (remaining > 0) {
    for (Symbol s : sys.successors(cur)) {
      if (dist_to[s] == remaining) {
        path.push_back(s);
        cur = s;
        break;
      }
    }
    --remaining;
  }
  return path;
}

std::string word_to_string(std::span<const Symbol> w) {
  std::string out;
  bool wide = false;
  for (Symbol s : w) wide = wide || s > 9;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (wide && i > 0) out += ',';
    out += std::to_string(static_cast<int>(w[i]));
  }
  return out;
}

Word word_from_string(const std::string& s, int alphabet_size) {
  Word w;
  auto push = [&](int v) {
    if (v < 0 || v >= alphabet_size) {
      throw ConfigError("symbol " + std::to_string(v) + " in word \"" + s + "\" is outside the alphabet");
    }
    w.push_back(static_cast<Symbol>(v));
  };
  if (s.find(',') != std::string::npos) {
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        push(std::stoi(tok));
      } catch (const std::logic_error&) {
        throw ConfigError("bad symbol \"" + tok + "\" in word \"" + s + "\"");
      }
    }
    return w;
  }
  for (char c : s) {
    if (c < '0' || c > '9') throw ConfigError("bad character in word \"" + s + "\"");
    push(c - '0');
  }
  return w;
}

}  // namespace symdyn
