#include "symdyn/gluing.hpp"

#include <map>
#include <random>

#include "symdyn/error.hpp"

namespace symdyn {

namespace {

// Glues `samples` random sequences of segments drawn from g and checks
// admissibility, exact tracing and gap lengths. Counts into cert.
void verify_certificate(const ShiftSystem& sys, const SegmentClass& g, GluingCertificate& cert, std::uint64_t seed,
                        int samples) {
  const int a = sys.alphabet_size();
  const int n0 = cert.n0;
  std::mt19937_64 rng(seed);
  auto random_word = [&](int length) {
    Word w(length);
    w[0] = static_cast<Symbol>(rng() % static_cast<std::uint64_t>(a));
    for (int i = 1; i < length; ++i) {
      const auto& next = sys.successors(w[i - 1]);
      w[i] = next[rng() % next.size()];
    }
    return w;
  };
  auto draw_segment = [&](Word& out) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      const int length = n0 + static_cast<int>(rng() % 5);
      Word w = random_word(length);
      if (g.contains(w, length)) {
        out = std::move(w);
        return true;
      }
    }
    return false;
  };

  for (int s = 0; s < samples; ++s) {
    const int count = 1 + static_cast<int>(rng() % 8);
    std::vector<Word> segments;
    for (int k = 0; k < count; ++k) {
      Word w;
      if (draw_segment(w)) segments.push_back(std::move(w));
    }
    if (segments.empty()) continue;
    std::vector<std::size_t> starts;
    const Word z = cert.glue(segments, &starts);
    if (!sys.admissible(z)) {
      throw StructuralError("gluing counterexample: concatenation " + word_to_string(z) + " is not admissible");
    }
    for (std::size_t k = 0; k < segments.size(); ++k) {
      if (!std::equal(segments[k].begin(), segments[k].end(), z.begin() + static_cast<std::ptrdiff_t>(starts[k]))) {
        throw StructuralError("gluing counterexample: segment " + word_to_string(segments[k]) +
                              " is not traced at time " + std::to_string(starts[k]));
      }
      if (k + 1 < segments.size() &&
          starts[k + 1] - starts[k] - segments[k].size() > static_cast<std::size_t>(cert.tau)) {
        throw StructuralError("gluing counterexample: gap longer than tau after segment " + std::to_string(k));
      }
    }
    ++cert.sequences_checked;
  }
}

// Lexicographically smallest admissible a x_1 ... x_len b, or nullopt.
std::optional<Word> exact_connector(const ShiftSystem& sys, Symbol a, Symbol b, int len) {
  const int n = sys.alphabet_size();
  // reach[k][v]: v reaches b in exactly k steps.
  std::vector<std::vector<bool>> reach(len + 2, std::vector<bool>(n, false));
  reach[0][b] = true;
  for (int k = 1; k <= len + 1; ++k) {
    for (int v = 0; v < n; ++v) {
      for (Symbol w : sys.successors(static_cast<Symbol>(v))) {
        if (reach[k - 1][w]) {
          reach[k][v] = true;
          break;
        }
      }
    }
  }
  if (!reach[len + 1][a]) return std::nullopt;
  Word c;
  Symbol prev = a;
  for (int i = 1; i <= len; ++i) {
    for (Symbol x : sys.successors(prev)) {
      if (reach[len + 1 - i][x]) {
        c.push_back(x);
        prev = x;
        break;
      }
    }
  }
  return c;
}

}  // namespace

const Word& GluingCertificate::connector(Symbol last, Symbol first) const {
  const auto it = connectors.find({last, first});
  if (it == connectors.end()) {
    throw StructuralError("no connector for the pair (" + std::to_string(last) + ", " + std::to_string(first) + ")");
  }
  return it->second;
}

Word GluingCertificate::glue(const std::vector<Word>& segments, std::vector<std::size_t>* starts) const {
  Word z;
  if (starts) starts->clear();
  for (std::size_t k = 0; k < segments.size(); ++k) {
    if (k > 0) {
      const Word& c = connector(segments[k - 1].back(), segments[k].front());
      z.insert(z.end(), c.begin(), c.end());
    }
    if (starts) starts->push_back(z.size());
    z.insert(z.end(), segments[k].begin(), segments[k].end());
  }
  return z;
}

nlohmann::json GluingCertificate::to_json() const {
  nlohmann::json c = nlohmann::json::object();
  for (const auto& [pair, word] : connectors) {
    c[std::to_string(pair.first) + "," + std::to_string(pair.second)] = word_to_string(word);
  }
  return {{"delta_level", delta.level},
          {"N0", n0},
          {"tau", tau},
          {"connectors", c},
          {"sequences_checked", sequences_checked}};
}

GluingCertificate check_gluing(const ShiftSystem& sys, const SegmentClass& g, Resolution delta, int n0,
                               std::optional<int> tau, std::uint64_t seed, int samples) {
  sys.require_strongly_connected();
  if (n0 < 1) throw ConfigError("gluing needs N0 >= 1");
  GluingCertificate cert;
  cert.delta = delta;
  cert.n0 = n0;
  const int a = sys.alphabet_size();
  int longest = 0;
  for (int x = 0; x < a; ++x) {
    for (int y = 0; y < a; ++y) {
      Word c = shortest_connector(sys, static_cast<Symbol>(x), static_cast<Symbol>(y));
      longest = std::max(longest, static_cast<int>(c.size()));
      cert.connectors[{static_cast<Symbol>(x), static_cast<Symbol>(y)}] = std::move(c);
    }
  }
  if (tau && *tau < longest) {
    throw StructuralError("gap bound tau=" + std::to_string(*tau) + " is below the longest shortest connector (" +
                          std::to_string(longest) + ")");
  }
  cert.tau = tau.value_or(longest);

  verify_certificate(sys, g, cert, seed, samples);
  return cert;
}

}  // namespace symdyn

namespace symdyn {

GluingCertificate uniform_gap_certificate(const ShiftSystem& sys, const SegmentClass& g,
                                          const GluingCertificate& base, std::uint64_t seed, int samples) {
  GluingCertificate cert = base;
  cert.sequences_checked = 0;
  const int n = sys.alphabet_size();
  const int longest = base.tau;
  int tau = 0;
  for (int a = 0; a < n; ++a) {
    int shortest = 0;
    for (int b = 0; b < n; ++b) {
      shortest = std::max(shortest, static_cast<int>(base.connector(static_cast<Symbol>(a), static_cast<Symbol>(b)).size()));
    }
    // Primitive digraphs have exact-length paths between all pairs beyond
    // (n-1)^2 + 1 steps; periodic ones never do, and keep their connectors.
    bool found = false;
    for (int len = shortest; len <= longest + (n - 1) * (n - 1) + 1 && !found; ++len) {
      std::map<Symbol, Word> row;
      for (int b = 0; b < n; ++b) {
        auto c = exact_connector(sys, static_cast<Symbol>(a), static_cast<Symbol>(b), len);
        if (!c) break;
        row[static_cast<Symbol>(b)] = std::move(*c);
      }
      if (static_cast<int>(row.size()) != n) continue;
      for (auto& [b, c] : row) cert.connectors[{static_cast<Symbol>(a), b}] = std::move(c);
      found = true;
    }
    for (int b = 0; b < n; ++b) {
      tau = std::max(tau, static_cast<int>(cert.connector(static_cast<Symbol>(a), static_cast<Symbol>(b)).size()));
    }
  }
  cert.tau = tau;
  verify_certificate(sys, g, cert, seed, samples);
  return cert;
}

}  // namespace symdyn
