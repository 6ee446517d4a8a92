#include "symdyn/lambda.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <limits>
#include <random>
#include <set>
#include <unordered_map>

#include "symdyn/error.hpp"
#include "symdyn/log_sum.hpp"

namespace symdyn {

namespace {

// Positions of the nondeterministic reader of Y.
// kRange (lo, hi, d): inside E[lo, hi), which share their first d + 1 symbols.
// kEnd (a): just finished a word whose last symbol is a.
// kConn (a, b, j): read j + 1 symbols of connector(a, b).
// kRoot: nothing read yet.
enum ItemKind : int { kRange = 0, kEnd = 1, kConn = 2, kRoot = 3 };
using Item = std::array<int, 4>;
using ItemSet = std::vector<Item>;

class AutomatonBuilder {
 public:
  AutomatonBuilder(const ShiftSystem& sys, const std::vector<Word>& e, const GluingCertificate& cert)
      : a_(sys.alphabet_size()), n_(static_cast<int>(e.front().size())), e_(e), cert_(cert) {
    std::vector<bool> first(a_, false);
    for (const auto& w : e_) first[w.front()] = true;
    for (int s = 0; s < a_; ++s) {
      if (first[s]) firsts_.push_back(static_cast<Symbol>(s));
    }
  }

  YAutomaton build() {
    YAutomaton out;
    out.alphabet = a_;
    out.root = intern({{kRoot, 0, 0, 0}});
    out.after_word.assign(a_, -1);
    for (std::size_t q = 0; q < sets_.size(); ++q) {
      for (int s = 0; s < a_; ++s) {
        ItemSet next;
        for (const Item& it : ItemSet(sets_[q])) step(it, static_cast<Symbol>(s), next);
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        out.next.push_back(next.empty() ? -1 : intern(next));
      }
    }
    for (int s = 0; s < a_; ++s) {
      const auto it = ids_.find(ItemSet{{kEnd, s, 0, 0}});
      if (it != ids_.end()) out.after_word[s] = it->second;
    }
    return out;
  }

 private:
  int intern(const ItemSet& set) {
    // Ambiguous gap lengths let the subset construction grow exponentially.
    if (sets_.size() >= kMaxStates) {
      throw ResourceError("Lambda automaton exceeds " + std::to_string(kMaxStates) +
                          " states; connectors with uniform gaps avoid this");
    }
    const auto [it, inserted] = ids_.emplace(set, static_cast<int>(sets_.size()));
    if (inserted) sets_.push_back(set);
    return it->second;
  }

  void start(Symbol s, ItemSet& out) const {
    const auto lo = std::lower_bound(e_.begin(), e_.end(), s, [](const Word& w, Symbol v) { return w[0] < v; });
    const auto hi = std::upper_bound(e_.begin(), e_.end(), s, [](Symbol v, const Word& w) { return v < w[0]; });
    if (lo == hi) return;
    if (n_ == 1) {
      out.push_back({kEnd, s, 0, 0});
    } else {
      out.push_back({kRange, static_cast<int>(lo - e_.begin()), static_cast<int>(hi - e_.begin()), 0});
    }
  }

  void step(const Item& it, Symbol s, ItemSet& out) const {
    switch (it[0]) {
      case kRoot:
        start(s, out);
        return;
      case kRange: {
        const int pos = it[3] + 1;
        const auto b = e_.begin() + it[1], e = e_.begin() + it[2];
        const auto lo = std::lower_bound(b, e, s, [pos](const Word& w, Symbol v) { return w[pos] < v; });
        const auto hi = std::upper_bound(lo, e, s, [pos](Symbol v, const Word& w) { return v < w[pos]; });
        if (lo == hi) return;
        if (pos == n_ - 1) {
          out.push_back({kEnd, s, 0, 0});
        } else {
          out.push_back({kRange, static_cast<int>(lo - e_.begin()), static_cast<int>(hi - e_.begin()), pos});
        }
        return;
      }
      case kEnd:
        for (Symbol b : firsts_) {
          const Word& c = cert_.connector(static_cast<Symbol>(it[1]), b);
          if (c.empty()) {
            if (b == s) start(s, out);
          } else if (c[0] == s) {
            out.push_back({kConn, it[1], b, 0});
          }
        }
        return;
      case kConn: {
        const Word& c = cert_.connector(static_cast<Symbol>(it[1]), static_cast<Symbol>(it[2]));
        const int j = it[3] + 1;
        if (j < static_cast<int>(c.size())) {
          if (c[j] == s) out.push_back({kConn, it[1], it[2], j});
        } else if (s == it[2]) {
          start(s, out);
        }
        return;
      }
      default:
        return;
    }
  }

  int a_;
  int n_;
  const std::vector<Word>& e_;
  const GluingCertificate& cert_;
  std::vector<Symbol> firsts_;
  static constexpr std::size_t kMaxStates = 400'000;
  std::map<ItemSet, int> ids_;
  std::deque<ItemSet> sets_;
};

PressureReport automaton_pressure(const YAutomaton& aut, const Potential& phi) {
  const int a = aut.alphabet;
  const int h = phi.memory() - 1;
  std::int64_t modulus = 1;
  for (int i = 0; i < h; ++i) modulus *= a;
  // Lifted state: automaton state, number of remembered symbols, their code.
  auto key = [&](int q, int len, std::int64_t code) {
    return (static_cast<std::int64_t>(q) * (h + 1) + len) * modulus + code;
  };
  std::unordered_map<std::int64_t, int> ids;
  std::vector<std::array<std::int64_t, 3>> states;
  auto intern = [&](int q, int len, std::int64_t code) {
    const auto [it, inserted] = ids.emplace(key(q, len, code), static_cast<int>(states.size()));
    if (inserted) states.push_back({q, len, code});
    return it->second;
  };
  intern(aut.root, 0, 0);
  std::vector<std::tuple<int, int, double>> edges;
  Word window(static_cast<std::size_t>(h + 1));
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto [q, len, code] = states[i];
    for (int s = 0; s < a; ++s) {
      const int q2 = aut.next[static_cast<std::size_t>(q) * a + s];
      if (q2 < 0) continue;
      if (len < h) {
        edges.emplace_back(static_cast<int>(i), intern(q2, static_cast<int>(len) + 1, code * a + s), 0.0);
        continue;
      }
      std::int64_t c = code;
      for (int k = h - 1; k >= 0; --k) {
        window[k] = static_cast<Symbol>(c % a);
        c /= a;
      }
      window[h] = static_cast<Symbol>(s);
      const std::int64_t shifted = h == 0 ? 0 : (code * a + s) % modulus;
      edges.emplace_back(static_cast<int>(i), intern(q2, h, shifted), phi(window));
    }
  }
  WeightedDigraph g(static_cast<int>(states.size()));
  for (const auto& [u, v, w] : edges) g.add_edge(u, v, w);
  const SpectralEstimate est = log_spectral_radius(g);
  PressureReport r;
  r.method = PressureReport::Method::kOracle;
  r.value = est.log_radius;
  r.error_bound = est.error_bound;
  r.period = est.period;
  r.periodic_fallback = est.period > 1;
  r.converged = est.converged;
  r.iterations = est.iterations;
  return r;
}

// Visits every word of length k readable from some state of `start`, in
// lexicographic order, each once.
class WordWalker {
 public:
  WordWalker(const YAutomaton& aut, std::uint64_t budget) : aut_(aut), budget_(budget) {}

  template <class Visit>
  void run(const std::vector<int>& start, int k, Visit&& visit) {
    word_.assign(static_cast<std::size_t>(k), 0);
    sets_.resize(static_cast<std::size_t>(k) + 1);
    sets_[0] = start;
    walk(0, k, visit);
  }

  [[nodiscard]] std::uint64_t leaves() const { return leaves_; }

 private:
  template <class Visit>
  void walk(int depth, int k, Visit& visit) {
    if (depth == k) {
      if (++leaves_ > budget_) throw ResourceError("word enumeration exceeds budget of " + std::to_string(budget_));
      visit(static_cast<const Word&>(word_));
      return;
    }
    const std::vector<int>& set = sets_[depth];
    std::vector<int>& next = sets_[depth + 1];
    for (int s = 0; s < aut_.alphabet; ++s) {
      next.clear();
      for (int q : set) {
        const int q2 = aut_.next[static_cast<std::size_t>(q) * aut_.alphabet + s];
        if (q2 >= 0) next.push_back(q2);
      }
      if (next.empty()) continue;
      if (next.size() > 1) {
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
      }
      word_[depth] = static_cast<Symbol>(s);
      walk(depth + 1, k, visit);
    }
  }

  const YAutomaton& aut_;
  std::uint64_t budget_;
  std::uint64_t leaves_ = 0;
  Word word_;
  std::vector<std::vector<int>> sets_;
};

// Words of length max(n + level - 1, n + m - 1) grouped by their first
// n + level - 1 symbols, each group weighted by its largest Phi(., n).
// `budget` is decreased by the number of words visited.
double grouped_log_theta(const YAutomaton& aut, const Potential& phi, const std::vector<int>& start, int n,
                         Resolution res, std::uint64_t& budget) {
  const int l = n + res.level - 1;
  const int k = std::max(l, n + phi.memory() - 1);
  LogSumExp total;
  Word key;
  double best = kNegInf;
  WordWalker walker(aut, budget);
  walker.run(start, k, [&](const Word& w) {
    if (key.empty() || !std::equal(key.begin(), key.end(), w.begin())) {
      total.add(best);
      key.assign(w.begin(), w.begin() + l);
      best = kNegInf;
    }
    best = std::max(best, birkhoff_sum(phi, w, n));
  });
  total.add(best);
  budget -= walker.leaves();
  return total.value();
}

std::vector<int> reachable_states(const YAutomaton& aut) {
  std::vector<bool> seen(static_cast<std::size_t>(aut.size()), false);
  std::vector<int> stack{aut.root}, out;
  seen[aut.root] = true;
  while (!stack.empty()) {
    const int q = stack.back();
    stack.pop_back();
    out.push_back(q);
    for (int s = 0; s < aut.alphabet; ++s) {
      const int q2 = aut.next[static_cast<std::size_t>(q) * aut.alphabet + s];
      if (q2 >= 0 && !seen[q2]) {
        seen[q2] = true;
        stack.push_back(q2);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

template <class LogTheta>
PressureReport enumerate_range(int n_min, int n_max, LogTheta&& log_theta) {
  if (n_min < 1 || n_max < n_min) throw PreconditionError("enumeration needs 1 <= n_min <= n_max");
  std::vector<double> values;
  std::string stop;
  // One budget for the whole range: stops at the first n that would exceed it.
  for (int n = n_min; n <= n_max; ++n) {
    try {
      values.push_back(log_theta(n));
    } catch (const ResourceError& e) {
      stop = e.what();
      break;
    }
  }
  if (values.empty()) throw ResourceError("enumeration budget exhausted at n=" + std::to_string(n_min) + ": " + stop);
  return summarize_log_theta(n_min, values);
}

}  // namespace

double YAutomaton::count_paths(int q, int k) const {
  std::vector<double> cur(static_cast<std::size_t>(size()), 1.0), nxt(cur.size());
  for (int step = 0; step < k; ++step) {
    for (int u = 0; u < size(); ++u) {
      double sum = 0.0;
      for (int s = 0; s < alphabet; ++s) {
        const int v = next[static_cast<std::size_t>(u) * alphabet + s];
        if (v >= 0) sum += cur[v];
      }
      nxt[u] = sum;
    }
    cur.swap(nxt);
  }
  return cur[q];
}

nlohmann::json LambdaParams::to_json() const {
  return {{"alpha", alpha}, {"eta0", eta0}, {"eta", eta}, {"N", N},
          {"M", M},         {"tau", tau},   {"phi_shift", phi_shift}};
}

std::size_t Presentation::edge_count() const {
  std::size_t n = 0;
  for (const auto& o : out) n += o.size();
  return n;
}

nlohmann::json Presentation::to_json() const {
  nlohmann::json vertices = nlohmann::json::array(), edges = nlohmann::json::array();
  for (int v = 0; v < size(); ++v) {
    vertices.push_back({{"id", v}, {"name", name[v]}, {"symbol", label[v]}});
    for (int w : out[v]) edges.push_back({v, w});
  }
  return {{"vertices", vertices}, {"edges", edges}};
}

double max_birkhoff_sum(const ShiftSystem& sys, const Potential& phi, std::span<const Symbol> w, int n) {
  const int need = n + phi.memory() - 1;
  if (static_cast<int>(w.size()) >= need) return birkhoff_sum(phi, w, n);
  Word buf(w.begin(), w.end());
  double best = kNegInf;
  auto extend = [&](auto&& self) -> void {
    if (static_cast<int>(buf.size()) == need) {
      best = std::max(best, birkhoff_sum(phi, buf, n));
      return;
    }
    for (Symbol s : sys.successors(buf.back())) {
      buf.push_back(s);
      self(self);
      buf.pop_back();
    }
  };
  extend(extend);
  return best;
}

LambdaSystem::LambdaSystem(ShiftSystem sys, Potential phi, std::vector<Word> e, GluingCertificate cert,
                           LambdaParams params)
    : sys_(std::move(sys)), phi_(std::move(phi)), e_(std::move(e)), cert_(std::move(cert)), params_(params) {
  if (e_.empty()) throw PreconditionError("Lambda needs a nonempty word set E");
  std::sort(e_.begin(), e_.end());
  e_.erase(std::unique(e_.begin(), e_.end()), e_.end());
  const std::size_t n = e_.front().size();
  if (n == 0) throw PreconditionError("E-words must be nonempty");
  for (const auto& w : e_) {
    if (w.size() != n) throw PreconditionError("all E-words must share one length");
    if (!sys_.admissible(w)) throw PreconditionError("E-word " + word_to_string(w) + " is not admissible");
  }
  if (params_.N == 0) params_.N = static_cast<int>(n);
  if (params_.N != static_cast<int>(n)) throw PreconditionError("params.N differs from the E-word length");
  std::vector<bool> first(sys_.alphabet_size(), false), last(sys_.alphabet_size(), false);
  for (const auto& w : e_) {
    first[w.front()] = true;
    last[w.back()] = true;
  }
  for (int a = 0; a < sys_.alphabet_size(); ++a) {
    for (int b = 0; b < sys_.alphabet_size(); ++b) {
      if (!last[a] || !first[b]) continue;
      const Word& c = cert_.connector(static_cast<Symbol>(a), static_cast<Symbol>(b));
      Word joined{static_cast<Symbol>(a)};
      joined.insert(joined.end(), c.begin(), c.end());
      joined.push_back(static_cast<Symbol>(b));
      if (!sys_.admissible(joined)) {
        throw StructuralError("connector " + word_to_string(c) + " does not join " + std::to_string(a) + " to " +
                              std::to_string(b) + " (stale certificate)");
      }
      if (static_cast<int>(c.size()) > cert_.tau) throw StructuralError("connector longer than the certificate's tau");
      max_gap_ = std::max(max_gap_, static_cast<int>(c.size()));
    }
  }
  automaton_ = std::make_shared<const YAutomaton>(AutomatonBuilder(sys_, e_, cert_).build());
  oracle_ = automaton_pressure(*automaton_, phi_);
}

Word LambdaSystem::glue(const std::vector<int>& indices, std::vector<std::size_t>* starts) const {
  std::vector<Word> segments;
  segments.reserve(indices.size());
  for (int i : indices) segments.push_back(e_.at(static_cast<std::size_t>(i)));
  return cert_.glue(segments, starts);
}

Presentation LambdaSystem::presentation(std::size_t max_vertices, std::size_t max_edges) const {
  const int a = sys_.alphabet_size();
  const int n = word_length();
  const std::size_t words = e_.size();
  // Word starts grouped by first symbol.
  std::vector<std::vector<int>> starting(a);
  for (std::size_t i = 0; i < words; ++i) starting[e_[i].front()].push_back(static_cast<int>(i) * n);
  std::map<std::pair<Symbol, Symbol>, int> chain;  // first vertex of each nonempty connector
  std::size_t vertices = words * n;
  std::size_t edges = words * (n - 1);
  for (int x = 0; x < a; ++x) {
    std::size_t ending = 0;
    for (const auto& w : e_) ending += w.back() == x;
    if (ending == 0) continue;
    for (int y = 0; y < a; ++y) {
      if (starting[y].empty()) continue;
      const Word& c = cert_.connector(static_cast<Symbol>(x), static_cast<Symbol>(y));
      if (c.empty()) {
        edges += ending * starting[y].size();
      } else {
        chain[{static_cast<Symbol>(x), static_cast<Symbol>(y)}] = static_cast<int>(vertices);
        vertices += c.size();
        edges += ending + c.size() - 1 + starting[y].size();
      }
    }
  }
  if (vertices > max_vertices || edges > max_edges) {
    throw ResourceError("presentation has " + std::to_string(vertices) + " vertices and " + std::to_string(edges) +
                        " edges, above the limit");
  }
  Presentation p;
  p.label.resize(vertices);
  p.out.resize(vertices);
  p.name.resize(vertices);
  for (std::size_t i = 0; i < words; ++i) {
    for (int j = 0; j < n; ++j) {
      const int v = static_cast<int>(i) * n + j;
      p.label[v] = e_[i][j];
      p.name[v] = "w" + std::to_string(i) + ":" + std::to_string(j);
      if (j + 1 < n) p.out[v].push_back(v + 1);
    }
  }
  for (const auto& [pair, v0] : chain) {
    const Word& c = cert_.connector(pair.first, pair.second);
    for (std::size_t j = 0; j < c.size(); ++j) {
      const int v = v0 + static_cast<int>(j);
      p.label[v] = c[j];
      p.name[v] = "c" + std::to_string(pair.first) + std::to_string(pair.second) + ":" + std::to_string(j);
      if (j + 1 < c.size()) {
        p.out[v].push_back(v + 1);
      } else {
        p.out[v] = starting[pair.second];
      }
    }
  }
  for (std::size_t i = 0; i < words; ++i) {
    const int end = static_cast<int>(i) * n + n - 1;
    for (int y = 0; y < a; ++y) {
      if (starting[y].empty()) continue;
      const auto it = chain.find({e_[i].back(), static_cast<Symbol>(y)});
      if (it != chain.end()) {
        p.out[end].push_back(it->second);
      } else {
        p.out[end].insert(p.out[end].end(), starting[y].begin(), starting[y].end());
      }
    }
  }
  return p;
}

double LambdaSystem::log_theta_y(int n, Resolution res, std::uint64_t budget) const {
  if (n < 1) throw PreconditionError("log_theta_y needs n >= 1");
  return grouped_log_theta(*automaton_, phi_, {automaton_->root}, n, res, budget);
}

double LambdaSystem::log_theta_lambda(int n, Resolution res, std::uint64_t budget) const {
  if (n < 1) throw PreconditionError("log_theta_lambda needs n >= 1");
  // Every reachable state reads factors of Lambda, and every factor is read
  // from some reachable state.
  return grouped_log_theta(*automaton_, phi_, reachable_states(*automaton_), n, res, budget);
}

PressureReport LambdaSystem::enumerate_y(Resolution res, int n_min, int n_max, std::uint64_t budget) const {
  PressureReport r = enumerate_range(n_min, n_max, [&](int n) {
    return grouped_log_theta(*automaton_, phi_, {automaton_->root}, n, res, budget);
  });
  r.delta_level = res.level;
  return r;
}

PressureReport LambdaSystem::enumerate_lambda(Resolution res, int n_min, int n_max, std::uint64_t budget) const {
  const std::vector<int> start = reachable_states(*automaton_);
  PressureReport r = enumerate_range(n_min, n_max, [&](int n) {
    return grouped_log_theta(*automaton_, phi_, start, n, res, budget);
  });
  r.delta_level = res.level;
  return r;
}

nlohmann::json LambdaSystem::to_json(std::size_t presentation_limit) const {
  nlohmann::json words = nlohmann::json::array();
  for (const auto& w : e_) words.push_back(word_to_string(w));
  nlohmann::json j = {{"params", params_.to_json()},
                      {"E", words},
                      {"E_size", e_.size()},
                      {"word_length", word_length()},
                      {"max_gap", max_gap_},
                      {"certificate", cert_.to_json()},
                      {"automaton_states", automaton_->size()},
                      {"oracle", oracle_.to_json()}};
  try {
    j["presentation"] = presentation(presentation_limit, presentation_limit * 64).to_json();
  } catch (const ResourceError& e) {
    j["presentation"] = {{"omitted", e.what()}};
  }
  return j;
}

LambdaSystem build_lambda(const ShiftSystem& sys, const Potential& phi, const std::vector<Word>& e,
                          const GluingCertificate& cert, const LambdaParams& params) {
  return LambdaSystem(sys, phi, e, cert, params);
}

nlohmann::json CountingReport::to_json() const {
  return {{"holds", holds},
          {"n", n},
          {"log_s", log_s},
          {"mode", mode},
          {"classes", classes},
          {"worst_log_count", worst_log_count},
          {"theta_classes", theta_classes},
          {"theta_checks", theta_checks},
          {"worst_theta_margin", worst_theta_margin},
          {"violation", violation}};
}

CountingReport verify_counting_bound(const LambdaSystem& lambda, int n, Resolution delta,
                                     std::uint64_t class_budget, std::uint64_t seed,
                                     std::uint64_t theta_class_limit) {
  if (n < 2 || n > 8) throw PreconditionError("verify_counting_bound needs 2 <= n <= 8");
  const ShiftSystem& sys = lambda.system();
  const Potential& phi = lambda.potential();
  const YAutomaton& aut = lambda.automaton();
  const auto& e = lambda.words();
  const int big_n = lambda.word_length();
  const int tau = lambda.certificate().tau;
  const Resolution two_delta = delta.scaled(2);
  const double eta = lambda.params().eta;
  const double phi_lo = phi.min(), phi_hi = phi.max() - phi.min();

  CountingReport r;
  r.n = n;
  r.log_s = std::log(count_words_approx(sys, tau + delta.level - 1));
  r.worst_log_count = kNegInf;
  r.worst_theta_margin = std::numeric_limits<double>::infinity();
  const double log_bound = (n - 1) * r.log_s;
  const int sep_length = n * big_n + two_delta.level - 1;

  auto gap = [&](int i, int j) {
    return static_cast<int>(lambda.certificate().connector(e[i].back(), e[j].front()).size());
  };
  // Points of a class agree on their first t_n + N = nN + G symbols; past that
  // they continue freely from the state after a word ending in `last`.
  std::map<std::pair<int, int>, double> count_cache;
  auto class_log_count = [&](int last, int total_gap) {
    const int extra = sep_length - (n * big_n + total_gap);
    if (extra <= 0) return 0.0;
    const auto key = std::make_pair(last, extra);
    auto it = count_cache.find(key);
    if (it == count_cache.end()) {
      it = count_cache.emplace(key, std::log(aut.count_paths(aut.after_word[last], extra))).first;
    }
    return it->second;
  };
  auto record = [&](int last, int total_gap, const std::string& what) {
    const double c = class_log_count(last, total_gap);
    r.worst_log_count = std::max(r.worst_log_count, c);
    ++r.classes;
    if (c > log_bound + 1e-9 && r.holds) {
      r.holds = false;
      r.violation = what + ": ln count " + std::to_string(c) + " > " + std::to_string(log_bound);
    }
  };

  const double classes_total = std::pow(static_cast<double>(e.size()), n);
  if (classes_total <= static_cast<double>(class_budget)) {
    r.mode = "exhaustive";
    std::vector<int> idx(n, 0);
    while (true) {
      int total_gap = 0;
      for (int k = 0; k + 1 < n; ++k) total_gap += gap(idx[k], idx[k + 1]);
      std::string what = "class";
      for (int i : idx) what += " " + word_to_string(e[i]);
      record(e[idx[n - 1]].back(), total_gap, what);
      int k = n - 1;
      while (k >= 0 && ++idx[k] == static_cast<int>(e.size())) idx[k--] = 0;
      if (k < 0) break;
    }
  } else {
    r.mode = "reduced";
    // Achievable (last symbol, total gap) after k words.
    std::map<std::pair<Symbol, Symbol>, bool> kinds;  // (first, last) pairs present in E
    for (const auto& w : e) kinds[{w.front(), w.back()}] = true;
    std::set<std::pair<int, int>> layer;
    for (const auto& [fl, _] : kinds) layer.insert({fl.second, 0});
    for (int k = 1; k < n; ++k) {
      std::set<std::pair<int, int>> next;
      for (const auto& [last, g] : layer) {
        for (const auto& [fl, _] : kinds) {
          const int c = static_cast<int>(
              lambda.certificate().connector(static_cast<Symbol>(last), fl.first).size());
          next.insert({fl.second, g + c});
        }
      }
      layer.swap(next);
    }
    for (const auto& [last, g] : layer) {
      record(last, g, "classes ending in " + std::to_string(last) + " with total gap " + std::to_string(g));
    }
  }

  // Cylinder partition functions of f^r(class) at length (n-3)N + l, with phi
  // normalized to phi - min phi.
  std::vector<std::vector<int>> sample;
  if (classes_total <= static_cast<double>(theta_class_limit)) {
    std::vector<int> idx(n, 0);
    while (true) {
      sample.push_back(idx);
      int k = n - 1;
      while (k >= 0 && ++idx[k] == static_cast<int>(e.size())) idx[k--] = 0;
      if (k < 0) break;
    }
  } else {
    std::mt19937_64 rng(seed);
    for (std::uint64_t i = 0; i < theta_class_limit; ++i) {
      std::vector<int> idx(n);
      for (int& x : idx) x = static_cast<int>(rng() % e.size());
      sample.push_back(std::move(idx));
    }
  }
  const int theta_n = static_cast<int>(std::floor(static_cast<double>((n - 4) * big_n) / (big_n + tau)));
  const int m = phi.memory();
  for (const auto& idx : sample) {
    ++r.theta_classes;
    const Word fixed = lambda.glue(idx);
    double sum_phi = 0.0;
    for (int k = 3; k <= theta_n; ++k) {
      sum_phi += max_birkhoff_sum(sys, phi, e[idx[k - 1]], big_n) - big_n * phi_lo;
    }
    const double bound = log_bound + sum_phi + 2.0 * n * big_n * eta + 5.0 * big_n * phi_hi;
    const int after = aut.after_word[e[idx.back()].back()];
    for (int rr = 0; rr < big_n + tau; ++rr) {
      for (int l = 0; l < big_n; ++l) {
        const int len = (n - 3) * big_n + l;
        if (len < 1) continue;
        const int key_len = len + two_delta.level - 1;
        const int need = rr + std::max(key_len, len + m - 1);
        const int extra = std::max(0, need - static_cast<int>(fixed.size()));
        std::map<Word, double> best;
        auto visit = [&](const Word& tail) {
          Word full(fixed);
          full.insert(full.end(), tail.begin(), tail.end());
          const std::span<const Symbol> view(full.data() + rr, full.size() - rr);
          const Word key(view.begin(), view.begin() + key_len);
          const double v = birkhoff_sum(phi, view, len) - len * phi_lo;
          auto [it, inserted] = best.emplace(key, v);
          if (!inserted) it->second = std::max(it->second, v);
        };
        if (extra == 0) {
          visit(Word{});
        } else {
          WordWalker(aut, 50'000'000).run({after}, extra, visit);
        }
        LogSumExp theta;
        for (const auto& [_, v] : best) theta.add(v);
        const double margin = bound - theta.value();
        ++r.theta_checks;
        r.worst_theta_margin = std::min(r.worst_theta_margin, margin);
        if (margin < -1e-9 && r.holds) {
          r.holds = false;
          r.violation = "theta bound fails at r=" + std::to_string(rr) + " l=" + std::to_string(l);
        }
      }
    }
  }
  return r;
}

nlohmann::json TracingReport::to_json() const {
  return {{"tracing", tracing}, {"separation", separation}, {"sequences", sequences},
          {"pairs", pairs},     {"violation", violation}};
}

TracingReport check_tracing_separation(const LambdaSystem& lambda, int n, Resolution gamma, std::uint64_t budget) {
  if (n < 1) throw PreconditionError("check_tracing_separation needs n >= 1");
  const auto& e = lambda.words();
  if (std::pow(static_cast<double>(e.size()), n) > static_cast<double>(budget)) {
    throw ResourceError("|E|^n exceeds the tracing budget");
  }
  const int big_n = lambda.word_length();
  const int horizon = n * (big_n + lambda.certificate().tau) + gamma.level - 1;
  TracingReport r;
  // t_n -> (n-th word index, glued word)
  std::map<std::size_t, std::vector<std::pair<int, Word>>> by_time;
  std::vector<int> idx(n, 0);
  while (true) {
    std::vector<std::size_t> starts;
    const Word z = lambda.glue(idx, &starts);
    ++r.sequences;
    if (!lambda.system().admissible(z) && r.tracing) {
      r.tracing = false;
      r.violation = "glued word " + word_to_string(z) + " is not admissible";
    }
    for (int k = 0; k < n; ++k) {
      const Word& w = e[idx[k]];
      if (!std::equal(w.begin(), w.end(), z.begin() + static_cast<std::ptrdiff_t>(starts[k])) && r.tracing) {
        r.tracing = false;
        r.violation = "word " + word_to_string(w) + " not traced at t=" + std::to_string(starts[k]);
      }
    }
    by_time[starts.back()].emplace_back(idx.back(), z);
    int k = n - 1;
    while (k >= 0 && ++idx[k] == static_cast<int>(e.size())) idx[k--] = 0;
    if (k < 0) break;
  }
  for (const auto& [t, group] : by_time) {
    for (std::size_t i = 0; i < group.size(); ++i) {
      for (std::size_t j = i + 1; j < group.size(); ++j) {
        if (group[i].first == group[j].first) continue;
        ++r.pairs;
        const Word& a = group[i].second;
        const Word& b = group[j].second;
        const std::size_t limit = std::min({a.size(), b.size(), static_cast<std::size_t>(horizon)});
        if (std::equal(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(limit), b.begin()) && r.separation) {
          r.separation = false;
          r.violation = "sequences ending at t=" + std::to_string(t) + " agree on " + std::to_string(limit) +
                        " symbols: " + word_to_string(a) + " / " + word_to_string(b);
        }
      }
    }
  }
  return r;
}

}  // namespace symdyn
