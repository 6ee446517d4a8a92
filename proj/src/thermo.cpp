#include "symdyn/thermo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <thread>
#include <unordered_map>

#include "symdyn/error.hpp"
#include "symdyn/log_sum.hpp"

namespace symdyn {

nlohmann::json PressureReport::to_json() const {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
  };
  nlohmann::json j{{"value", num(value)},
                   {"method", method == Method::kOracle ? "oracle" : "enumeration"},
                   {"error_bound", std::isinf(error_bound) ? nlohmann::json("unbounded") : num(error_bound)}};
  if (method == Method::kEnumeration) {
    j["n_min"] = n_min;
    j["n_max"] = n_max;
    j["delta_level"] = delta_level;
    j["eps_level"] = eps_level;
    j["tail_max"] = num(tail_max);
    nlohmann::json seq = nlohmann::json::array();
    for (double v : sequence) seq.push_back(num(v));
    j["sequence"] = seq;
  } else {
    j["periodic_fallback"] = periodic_fallback;
    j["period"] = period;
    j["converged"] = converged;
    j["iterations"] = iterations;
  }
  return j;
}

double birkhoff_sum(const Potential& phi, std::span<const Symbol> w, int n) {
  const int need = n + phi.memory() - 1;
  if (n < 0 || static_cast<int>(w.size()) < need) {
    throw PreconditionError("birkhoff_sum: need a word of length at least " + std::to_string(need) +
                            ", got " + std::to_string(w.size()));
  }
  CompensatedSum sum;
  for (int k = 0; k < n; ++k) sum.add(phi(w.subspan(k)));
  return sum.value();
}

BlockGraph block_graph(const ShiftSystem& sys, const Potential& phi) {
  BlockGraph out;
  const int m = phi.memory();
  out.block_length = std::max(1, m - 1);
  out.blocks = list_words(sys, out.block_length);
  const int k = out.block_length;
  std::map<Word, int> index;
  for (std::size_t i = 0; i < out.blocks.size(); ++i) index[out.blocks[i]] = static_cast<int>(i);
  out.graph = WeightedDigraph(static_cast<int>(out.blocks.size()));
  Word edge(k + 1);
  for (std::size_t u = 0; u < out.blocks.size(); ++u) {
    const Word& b = out.blocks[u];
    std::copy(b.begin(), b.end(), edge.begin());
    for (Symbol c : sys.successors(b.back())) {
      edge[k] = c;
      Word next(edge.begin() + 1, edge.end());
      out.graph.add_edge(static_cast<int>(u), index.at(next), phi(edge));
    }
  }
  return out;
}

namespace {

// Evaluates, for words of length `length`, the largest Birkhoff sum Phi(y, n)
// over points y agreeing with the word on its first `known` symbols.
class CylinderMaximizer {
 public:
  CylinderMaximizer(const ShiftSystem& sys, const Potential& phi, int n, int known)
      : sys_(sys), phi_(phi), n_(n), known_(known), m_(phi.memory()),
        need_(n + phi.memory() - 1) {}

  double operator()(std::span<const Symbol> w) {
    if (known_ >= need_) return birkhoff_sum(phi_, w, n_);
    CompensatedSum sum;
    // Windows lying entirely inside the known prefix.
    const int inside = std::min(n_, known_ - m_ + 1);
    for (int i = 0; i < inside; ++i) sum.add(phi_(w.subspan(i)));
    const int t = std::min(known_, m_ - 1);
    sum.add(tail(w.subspan(known_ - t, t)));
    return sum.value();
  }

  // Best total of the windows that reach past the known prefix, given the
  // last min(known, m-1) known symbols.
  double tail(std::span<const Symbol> suffix) {
    if (known_ >= need_) return 0.0;
    std::uint64_t key = 0;
    for (Symbol s : suffix) key = key * sys_.alphabet_size() + s;
    auto it = tail_.find(key);
    if (it == tail_.end()) {
      buffer_.assign(suffix.begin(), suffix.end());
      base_ = known_ - static_cast<int>(suffix.size());
      const int first_window = std::max(0, known_ - m_ + 1) - base_;
      it = tail_.emplace(key, best_tail(first_window)).first;
    }
    return it->second;
  }

 private:
  // Max over admissible completions of buffer_ to the full length of the
  // windows starting at positions >= first_window (relative to buffer_).
  double best_tail(int first_window) {
    if (base_ + static_cast<int>(buffer_.size()) == need_) {
      double s = 0.0;
      for (int i = first_window; i + base_ < n_; ++i) s += phi_(std::span<const Symbol>(buffer_).subspan(i));
      return s;
    }
    double best = kNegInf;
    const Symbol last = buffer_.back();
    for (Symbol c : sys_.successors(last)) {
      buffer_.push_back(c);
      best = std::max(best, best_tail(first_window));
      buffer_.pop_back();
    }
    return best;
  }

  const ShiftSystem& sys_;
  const Potential& phi_;
  int n_, known_, m_, need_;
  int base_ = 0;
  Word buffer_;
  std::unordered_map<std::uint64_t, double> tail_;
};

// Calls visit(word) for every admissible word of length `length` extending `prefix`.
template <class Visit>
void for_each_extension(const ShiftSystem& sys, Word& word, int length, Visit&& visit) {
  if (static_cast<int>(word.size()) == length) {
    visit(std::span<const Symbol>(word));
    return;
  }
  for (Symbol c : sys.successors(word.back())) {
    word.push_back(c);
    for_each_extension(sys, word, length, visit);
    word.pop_back();
  }
}

double enumerate_partition(const ShiftSystem& sys, const Potential& phi, const SegmentClass& y,
                           int n, int length, int known, const EnumerationOptions& options) {
  const BigInt total = count_words(sys, length);
  if (total > options.word_budget) {
    throw ResourceError("partition function at n=" + std::to_string(n) + " needs " + total.str() +
                        " words, over the budget of " + std::to_string(options.word_budget));
  }
  const int chunk_len = std::min(length, 2);
  const std::vector<Word> chunks = list_words(sys, chunk_len);
  std::vector<LogSumExp> partial(chunks.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    CylinderMaximizer maximize(sys, phi, n, known);
    for (std::size_t c = next++; c < chunks.size(); c = next++) {
      Word w = chunks[c];
      for_each_extension(sys, w, length, [&](std::span<const Symbol> word) {
        if (y.contains(word, n)) partial[c].add(maximize(word));
      });
    }
  };
  const int workers = std::max(1, std::min<int>(options.workers, static_cast<int>(chunks.size())));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  LogSumExp total_sum;
  for (const auto& p : partial) total_sum.merge(p);
  return total_sum.value();
}

// ln of the number of admissible continuations of length j after each symbol.
std::vector<double> log_continuations(const ShiftSystem& sys, int j) {
  const int a = sys.alphabet_size();
  std::vector<BigInt> count(a, 1);
  for (int step = 0; step < j; ++step) {
    std::vector<BigInt> next(a, 0);
    for (int u = 0; u < a; ++u) {
      for (Symbol v : sys.successors(static_cast<Symbol>(u))) next[u] += count[v];
    }
    count.swap(next);
  }
  std::vector<double> out(a);
  for (int u = 0; u < a; ++u) out[u] = std::log(count[u].convert_to<double>());
  return out;
}

// Same sum as enumerate_partition for Y = everything, by dynamic programming
// over the last max(1, m-1) symbols of the known prefix.
double transfer_partition(const ShiftSystem& sys, const Potential& phi, int n, int length,
                          int known) {
  const int m = phi.memory();
  const std::size_t state_len = static_cast<std::size_t>(std::max(1, m - 1));
  std::map<Word, LogSumExp> layer;
  for (int a = 0; a < sys.alphabet_size(); ++a) {
    const Word single{static_cast<Symbol>(a)};
    layer[single].add(m == 1 ? phi(single) : 0.0);
  }
  for (int len = 1; len < known; ++len) {
    std::map<Word, LogSumExp> next;
    const int start = len + 1 - m;  // window completed by the appended symbol
    for (const auto& [state, acc] : layer) {
      for (Symbol c : sys.successors(state.back())) {
        Word grown = state;
        grown.push_back(c);
        double w = acc.value();
        if (start >= 0 && start < n) w += phi(std::span<const Symbol>(grown).subspan(grown.size() - m));
        if (grown.size() > state_len) grown.erase(grown.begin());
        next[grown].add(w);
      }
    }
    layer.swap(next);
  }
  const std::vector<double> extra = log_continuations(sys, length - known);
  CylinderMaximizer maximize(sys, phi, n, known);
  const std::size_t t = static_cast<std::size_t>(std::min(known, m - 1));
  LogSumExp total;
  for (const auto& [state, acc] : layer) {
    const double tail = maximize.tail(std::span<const Symbol>(state).subspan(state.size() - t));
    total.add(acc.value() + tail + extra[state.back()]);
  }
  return total.value();
}

}  // namespace

double log_partition_function(const ShiftSystem& sys, const Potential& phi, const SegmentClass& y,
                              int n, Resolution delta, std::optional<Resolution> eps,
                              const EnumerationOptions& options) {
  if (n < 1) throw PreconditionError("partition function needs n >= 1");
  if (delta.level < 1 || (eps && eps->level < 1)) throw PreconditionError("resolution levels must be >= 1");
  const int length = n + delta.level - 1;
  const int known = eps ? std::min(length, n + eps->level - 1) : length;
  switch (y.kind()) {
    case SegmentClass::Kind::kEmpty:
      return kNegInf;
    case SegmentClass::Kind::kAll:
      return transfer_partition(sys, phi, n, length, known);
    case SegmentClass::Kind::kPredicate:
      break;
  }
  return enumerate_partition(sys, phi, y, n, length, known, options);
}

PressureReport pressure_enumerate(const ShiftSystem& sys, const Potential& phi,
                                  const SegmentClass& y, Resolution delta,
                                  std::optional<Resolution> eps, int n_min, int n_max,
                                  const EnumerationOptions& options) {
  if (n_min < 2 || n_max < n_min) throw PreconditionError("pressure_enumerate needs 2 <= n_min <= n_max");
  std::vector<double> log_theta;
  for (int n = n_min; n <= n_max; ++n) {
    log_theta.push_back(log_partition_function(sys, phi, y, n, delta, eps, options));
  }
  PressureReport r = summarize_log_theta(n_min, log_theta);
  r.delta_level = delta.level;
  r.eps_level = eps ? eps->level : 0;
  return r;
}

PressureReport summarize_log_theta(int n_min, const std::vector<double>& log_theta) {
  if (n_min < 1 || log_theta.empty()) throw PreconditionError("summarize_log_theta needs n_min >= 1 and values");
  PressureReport r;
  r.method = PressureReport::Method::kEnumeration;
  r.n_min = n_min;
  r.n_max = n_min + static_cast<int>(log_theta.size()) - 1;
  for (std::size_t i = 0; i < log_theta.size(); ++i) r.sequence.push_back(log_theta[i] / (n_min + static_cast<int>(i)));
  const std::size_t half = r.sequence.size() / 2;
  double lo = std::numeric_limits<double>::infinity(), hi = kNegInf;
  for (std::size_t i = half; i < r.sequence.size(); ++i) {
    lo = std::min(lo, r.sequence[i]);
    hi = std::max(hi, r.sequence[i]);
  }
  r.tail_max = hi;
  if (hi == kNegInf) {
    r.error_bound = 0.0;  // empty at every sampled n in the top half
  } else if (lo == kNegInf) {
    r.error_bound = std::numeric_limits<double>::infinity();
  } else {
    r.error_bound = hi - lo;
  }
  // Theta_n ~ c e^{nP}: the increment over the top half cancels ln c, which
  // otherwise biases (1/n) ln Theta_n by ln(c)/n.
  const double first = log_theta[half], last = log_theta.back();
  const int span = r.n_max - (n_min + static_cast<int>(half));
  if (span > 0 && std::isfinite(first) && std::isfinite(last)) {
    r.value = (last - first) / span;
  } else {
    r.value = hi;
  }
  return r;
}

PressureReport pressure_oracle(const ShiftSystem& sys, const Potential& phi) {
  sys.require_strongly_connected();
  const BlockGraph bg = block_graph(sys, phi);
  const SpectralEstimate est = log_spectral_radius(bg.graph);
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

double pstar(const ShiftSystem& sys, const Potential& phi) {
  sys.require_strongly_connected();
  return max_mean_cycle(block_graph(sys, phi).graph);
}

std::vector<double> max_birkhoff_averages(const ShiftSystem& sys, const Potential& phi, int n_max) {
  const BlockGraph bg = block_graph(sys, phi);
  const int v = bg.graph.size();
  std::vector<double> best(v, 0.0), next(v);
  std::vector<double> out;
  for (int n = 1; n <= n_max; ++n) {
    // best[u]: max weight of an n-edge walk starting at u.
    for (int u = 0; u < v; ++u) {
      double b = kNegInf;
      for (const auto& e : bg.graph.out[u]) b = std::max(b, e.weight + best[e.to]);
      next[u] = b;
    }
    best.swap(next);
    out.push_back(*std::max_element(best.begin(), best.end()) / n);
  }
  return out;
}

double variation(const Potential& phi, Resolution eps) {
  const int m = phi.memory();
  const std::size_t agree = static_cast<std::size_t>(std::min(eps.level, m));
  if (agree >= static_cast<std::size_t>(m)) return 0.0;
  std::map<Word, std::pair<double, double>> range;
  for (const auto& w : phi.words()) {
    Word key(w.begin(), w.begin() + static_cast<long>(agree));
    const double v = phi(w);
    auto [it, inserted] = range.try_emplace(key, v, v);
    if (!inserted) {
      it->second.first = std::min(it->second.first, v);
      it->second.second = std::max(it->second.second, v);
    }
  }
  double out = 0.0;
  for (const auto& [key, r] : range) out = std::max(out, r.second - r.first);
  return out;
}

BowenBound bowen_bound(const ShiftSystem& sys, const Potential& phi, const SegmentClass& c,
                       Resolution eps, int n_cap, const EnumerationOptions& options) {
  BowenBound out;
  out.n_cap = n_cap;
  const int m = phi.memory();
  if (eps.level >= m || c.kind() == SegmentClass::Kind::kEmpty) return out;
  // Points agreeing on n + level - 1 symbols share every window that starts
  // before n + level - m; the remaining min(n, m - level) windows each agree
  // on at least `level` symbols.
  out.certified = std::min(n_cap, m - eps.level) * variation(phi, eps);
  for (int n = 1; n <= n_cap; ++n) {
    const int need = n + m - 1;
    const int agree = n + eps.level - 1;
    enumerate_words(
        sys, need,
        [&](std::span<const Symbol> x) {
          if (!c.contains(x, n)) return;
          const double base = birkhoff_sum(phi, x, n);
          Word y(x.begin(), x.begin() + agree);
          for_each_extension(sys, y, need, [&](std::span<const Symbol> z) {
            out.sampled = std::max(out.sampled, std::abs(birkhoff_sum(phi, z, n) - base));
          });
        },
        options.word_budget);
  }
  return out;
}

ExpansivityReport expansivity_report(const ShiftSystem& sys, Resolution eps) {
  (void)sys;
  if (eps.level < 1) throw PreconditionError("expansivity_report needs level >= 1");
  return ExpansivityReport{0.0, true, kNegInf};
}

}  // namespace symdyn
