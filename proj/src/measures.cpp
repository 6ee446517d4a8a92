#include "symdyn/measures.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

#include "symdyn/error.hpp"
#include "symdyn/log_sum.hpp"
#include "symdyn/thermo.hpp"

namespace symdyn {

namespace {

using Matrix = std::vector<std::vector<double>>;

// Solves pi Q = pi, sum pi = 1 by Gaussian elimination with partial
// pivoting. The system is singular exactly when Q has several recurrent classes.
std::vector<double> stationary_vector(const Matrix& q) {
  const std::size_t n = q.size();
  Matrix a(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i][j] = q[j][i] - (i == j ? 1.0 : 0.0);
  }
  for (std::size_t j = 0; j < n; ++j) a[n - 1][j] = 1.0;
  a[n - 1][n] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-13) {
      throw ComputationError("Markov chain has no unique stationary vector (several recurrent classes)");
    }
    std::swap(a[col], a[pivot]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0.0) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c <= n; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::vector<double> pi(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    pi[i] = std::max(0.0, a[i][n] / a[i][i]);
    total += pi[i];
  }
  for (double& p : pi) p /= total;
  return pi;
}

std::map<Word, int> index_of(const std::vector<Word>& blocks) {
  std::map<Word, int> index;
  for (std::size_t i = 0; i < blocks.size(); ++i) index[blocks[i]] = static_cast<int>(i);
  return index;
}

// Block transition u -> v exists when the blocks overlap and the joined word is admissible.
bool block_edge(const ShiftSystem& sys, const Word& u, const Word& v) {
  if (!std::equal(u.begin() + 1, u.end(), v.begin())) return false;
  return sys.allowed(u.back(), v.back());
}

std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(12) << v;
  return s.str();
}

bool lyndon(const Word& w) {
  const std::size_t p = w.size();
  for (std::size_t r = 1; r < p; ++r) {
    for (std::size_t i = 0; i < p; ++i) {
      const Symbol a = w[i], b = w[(i + r) % p];
      if (a < b) break;
      if (a > b) return false;
      if (i + 1 == p) return false;  // equal rotation: a proper power
    }
  }
  return true;
}

}  // namespace

MarkovMeasure::MarkovMeasure(const ShiftSystem& sys, int block_length, Matrix q)
    : block_length_(block_length), blocks_(list_words(sys, block_length)), q_(std::move(q)) {
  const std::size_t n = blocks_.size();
  if (q_.size() != n) {
    throw ConfigError("stochastic matrix has " + std::to_string(q_.size()) + " rows, expected " +
                      std::to_string(n));
  }
  for (std::size_t u = 0; u < n; ++u) {
    if (q_[u].size() != n) throw ConfigError("stochastic matrix row " + std::to_string(u) + " has wrong length");
    double sum = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      if (q_[u][v] < 0.0) throw ConfigError("stochastic matrix has a negative entry");
      if (q_[u][v] > 0.0 && !block_edge(sys, blocks_[u], blocks_[v])) {
        throw ConfigError("stochastic matrix charges the forbidden transition " + word_to_string(blocks_[u]) +
                          " -> " + word_to_string(blocks_[v]));
      }
      sum += q_[u][v];
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw ConfigError("stochastic matrix row " + std::to_string(u) + " sums to " + format_double(sum));
    }
  }
  pi_ = stationary_vector(q_);
}

MarkovMeasure MarkovMeasure::bernoulli(const ShiftSystem& sys, const std::vector<double>& p) {
  if (static_cast<int>(p.size()) != sys.alphabet_size()) throw ConfigError("Bernoulli weights must cover the alphabet");
  return MarkovMeasure(sys, 1, Matrix(p.size(), p));
}

double MarkovMeasure::cylinder(std::span<const Symbol> w) const {
  const auto k = static_cast<std::size_t>(block_length_);
  if (w.size() < k) throw PreconditionError("cylinder word shorter than the block length");
  auto find = [&](std::size_t at) {
    const Word b(w.begin() + static_cast<std::ptrdiff_t>(at), w.begin() + static_cast<std::ptrdiff_t>(at + k));
    const auto it = std::lower_bound(blocks_.begin(), blocks_.end(), b);
    return (it == blocks_.end() || *it != b) ? -1 : static_cast<int>(it - blocks_.begin());
  };
  int u = find(0);
  if (u < 0) return 0.0;
  double p = pi_[u];
  for (std::size_t i = 1; i + k <= w.size() && p > 0.0; ++i) {
    const int v = find(i);
    if (v < 0) return 0.0;
    p *= q_[u][v];
    u = v;
  }
  return p;
}

PeriodicOrbitMeasure::PeriodicOrbitMeasure(const ShiftSystem& sys, Word cycle) : cycle_(std::move(cycle)) {
  if (cycle_.empty()) throw ConfigError("periodic orbit needs a nonempty cycle");
  if (!sys.admissible(cycle_) || !sys.allowed(cycle_.back(), cycle_.front())) {
    throw ConfigError("cycle " + word_to_string(cycle_) + " is not an admissible closed orbit");
  }
  // Primitive iff no proper rotation equals the word.
  const std::size_t p = cycle_.size();
  for (std::size_t r = 1; r < p; ++r) {
    if (p % r == 0 && std::equal(cycle_.begin(), cycle_.end() - static_cast<std::ptrdiff_t>(r),
                                 cycle_.begin() + static_cast<std::ptrdiff_t>(r))) {
      throw ConfigError("cycle " + word_to_string(cycle_) + " is a proper power");
    }
  }
}

double markov_entropy(const MarkovMeasure& mu) {
  CompensatedSum h;
  const auto& q = mu.stochastic();
  const auto& pi = mu.stationary();
  for (std::size_t u = 0; u < q.size(); ++u) {
    for (double x : q[u]) {
      if (x > 0.0) h.add(-pi[u] * x * std::log(x));
    }
  }
  return h.value();
}

double markov_integral(const Potential& phi, const MarkovMeasure& mu) {
  const auto& blocks = mu.blocks();
  const auto& q = mu.stochastic();
  const auto& pi = mu.stationary();
  const int k = mu.block_length();
  const int length = std::max(phi.memory(), k);
  CompensatedSum total;
  // Depth-first over block paths until `length` symbols are fixed.
  Word w;
  auto visit = [&](auto&& self, int u, double p) -> void {
    if (static_cast<int>(w.size()) >= length) {
      total.add(p * phi(w));
      return;
    }
    for (std::size_t v = 0; v < q[u].size(); ++v) {
      if (q[u][v] <= 0.0) continue;
      w.push_back(blocks[v].back());
      self(self, static_cast<int>(v), p * q[u][v]);
      w.pop_back();
    }
  };
  for (std::size_t u = 0; u < blocks.size(); ++u) {
    if (pi[u] <= 0.0) continue;
    w = blocks[u];
    visit(visit, static_cast<int>(u), pi[u]);
  }
  return total.value();
}

double measure_pressure(const Potential& phi, const MarkovMeasure& mu) {
  return markov_entropy(mu) + markov_integral(phi, mu);
}

double measure_pressure(const Potential& phi, const PeriodicOrbitMeasure& mu) {
  const Word& c = mu.cycle();
  const int p = mu.period();
  Word unrolled;
  for (int i = 0; i < p + phi.memory(); ++i) unrolled.push_back(c[i % p]);
  return birkhoff_sum(phi, unrolled, p) / p;
}

MarkovMeasure gibbs_chain(const ShiftSystem& sys, const Potential& phi) {
  sys.require_strongly_connected();
  const BlockGraph bg = block_graph(sys, phi);
  const std::size_t n = bg.blocks.size();
  const double top = phi.max();
  Matrix l(n, std::vector<double>(n, 0.0));
  for (std::size_t u = 0; u < n; ++u) {
    for (const auto& e : bg.graph.out[u]) l[u][e.to] += std::exp(e.weight - top);
  }
  const double lambda = std::exp(pressure_oracle(sys, phi).value - top);
  // Power iteration on (L + lambda I), which shares the Perron vectors of L
  // and is aperiodic even when L is not.
  auto perron = [&](bool left) {
    std::vector<double> x(n, 1.0), y(n);
    for (int it = 0; it < 1'000'000; ++it) {
      for (std::size_t i = 0; i < n; ++i) y[i] = lambda * x[i];
      for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = 0; v < n; ++v) {
          if (l[u][v] == 0.0) continue;
          if (left) {
            y[v] += x[u] * l[u][v];
          } else {
            y[u] += l[u][v] * x[v];
          }
        }
      }
      double norm = 0.0;
      for (double t : y) norm = std::max(norm, t);
      double change = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        y[i] /= norm;
        change = std::max(change, std::abs(y[i] - x[i]));
      }
      x.swap(y);
      if (change < 1e-15) break;
    }
    return x;
  };
  const auto r = perron(false);
  Matrix q(n, std::vector<double>(n, 0.0));
  for (std::size_t u = 0; u < n; ++u) {
    double sum = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      q[u][v] = l[u][v] * r[v] / (lambda * r[u]);
      sum += q[u][v];
    }
    for (double& x : q[u]) x /= sum;  // absorbs rounding in r and lambda
  }
  return MarkovMeasure(sys, bg.block_length, std::move(q));
}

std::vector<Word> primitive_cycles(const ShiftSystem& sys, int max_length, std::uint64_t limit) {
  if (max_length < 1) return {};
  BigInt work = 0;
  for (int p = 1; p <= max_length; ++p) work += count_words(sys, p);
  if (work > BigInt(limit) * 16) {
    throw ResourceError("cycle search up to length " + std::to_string(max_length) + " visits " + work.str() +
                        " words, above the limit");
  }
  std::vector<Word> out;
  for (int p = 1; p <= max_length; ++p) {
    enumerate_words(
        sys, p,
        [&](std::span<const Symbol> w) {
          if (!sys.allowed(w.back(), w.front())) return;
          Word word(w.begin(), w.end());
          if (!lyndon(word)) return;
          if (out.size() >= limit) {
            throw ResourceError("more than " + std::to_string(limit) + " primitive cycles");
          }
          out.push_back(std::move(word));
        },
        std::numeric_limits<std::uint64_t>::max());
  }
  return out;
}

double SpectrumSample::max_gap(double lo, double hi) const {
  double prev = lo, gap = 0.0;
  for (const auto& p : points) {
    if (p.pressure < lo || p.pressure > hi) continue;
    gap = std::max(gap, p.pressure - prev);
    prev = p.pressure;
  }
  return std::max(gap, hi - prev);
}

SpectrumSample spectrum_sample(const ShiftSystem& sys, const Potential& phi, const SpectrumBudget& budget) {
  SpectrumSample out;
  out.oracle_pressure = pressure_oracle(sys, phi).value;
  out.pstar = pstar(sys, phi);
  if (budget.grid < 1) throw ConfigError("interpolation grid must be >= 1");

  int cap = budget.max_cycle_length;
  if (cap > 12) {
    cap = 12;
    out.partial = true;
    out.partial_reason = "cycle length capped at 12";
  }
  std::vector<Word> cycles;
  for (; cap >= 1; --cap) {
    try {
      cycles = primitive_cycles(sys, cap, budget.max_measures);
      break;
    } catch (const ResourceError&) {
      out.partial = true;
      out.partial_reason = "cycle search truncated";
    }
  }

  std::vector<SpectrumPoint> points;
  for (const auto& c : cycles) {
    SpectrumPoint pt{"cycle", word_to_string(c), 0.0, 0.0, 0.0};
    pt.integral = measure_pressure(phi, PeriodicOrbitMeasure(sys, c));
    pt.pressure = pt.integral;
    points.push_back(pt);
  }

  const MarkovMeasure gibbs = gibbs_chain(sys, phi);
  const double gh = markov_entropy(gibbs), gi = markov_integral(phi, gibbs);
  points.push_back({"gibbs", "", gh, gi, gh + gi});

  // Cycles that visit each block of the presentation at most once are
  // deterministic chains on that presentation.
  const int k = gibbs.block_length();
  const auto index = index_of(gibbs.blocks());
  std::vector<std::pair<const Word*, std::vector<int>>> simple;
  for (const auto& c : cycles) {
    const int p = static_cast<int>(c.size());
    std::vector<int> path;
    for (int i = 0; i < p; ++i) {
      Word b(k);
      for (int j = 0; j < k; ++j) b[j] = c[(i + j) % p];
      path.push_back(index.at(b));
    }
    auto sorted = path;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end()) simple.emplace_back(&c, path);
  }
  const std::uint64_t per_cycle = static_cast<std::uint64_t>(budget.grid - 1);
  std::size_t usable = simple.size();
  if (points.size() + usable * per_cycle > budget.max_measures) {
    usable = per_cycle == 0 ? usable : (budget.max_measures - std::min<std::uint64_t>(budget.max_measures, points.size())) / per_cycle;
    out.partial = true;
    out.partial_reason = "interpolation family truncated to " + std::to_string(usable) + " cycles";
  }

  std::vector<std::vector<SpectrumPoint>> family(usable);
  auto work = [&](std::size_t idx) {
    const auto& [word, path] = simple[idx];
    Matrix qc = gibbs.stochastic();
    for (std::size_t i = 0; i < path.size(); ++i) {
      std::fill(qc[path[i]].begin(), qc[path[i]].end(), 0.0);
      qc[path[i]][path[(i + 1) % path.size()]] = 1.0;
    }
    for (int g = 1; g < budget.grid; ++g) {
      // Pressure has infinite slope in t at t = 1 (entropy ~ -(1-t) ln(1-t)),
      // so the grid is quadratic in 1 - t.
      const double s = 1.0 - static_cast<double>(g) / budget.grid;
      const double t = 1.0 - s * s;
      Matrix q = gibbs.stochastic();
      for (std::size_t u = 0; u < q.size(); ++u) {
        double sum = 0.0;
        for (std::size_t v = 0; v < q.size(); ++v) {
          q[u][v] = (1.0 - t) * q[u][v] + t * qc[u][v];
          sum += q[u][v];
        }
        for (double& x : q[u]) x /= sum;
      }
      const MarkovMeasure mu(sys, k, std::move(q));
      const double h = markov_entropy(mu), in = markov_integral(phi, mu);
      family[idx].push_back({"interpolation", word_to_string(*word) + "@" + format_double(t), h, in, h + in});
    }
  };
  const int workers = std::max(1, budget.workers);
  if (workers == 1 || usable < 2) {
    for (std::size_t i = 0; i < usable; ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = static_cast<std::size_t>(w); i < usable; i += static_cast<std::size_t>(workers)) work(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& f : family) points.insert(points.end(), f.begin(), f.end());

  std::sort(points.begin(), points.end(), [](const SpectrumPoint& a, const SpectrumPoint& b) {
    if (a.pressure != b.pressure) return a.pressure < b.pressure;
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.parameter < b.parameter;
  });
  for (const auto& p : points) {
    if (!out.points.empty() && std::abs(p.pressure - out.points.back().pressure) <= 1e-12) continue;
    out.points.push_back(p);
  }
  return out;
}

void write_spectrum_csv(std::ostream& out, const SpectrumSample& sample) {
  out << "kind,parameter,entropy,integral,pressure\n";
  out << std::setprecision(12);
  for (const auto& p : sample.points) {
    out << p.kind << ',' << p.parameter << ',' << p.entropy << ',' << p.integral << ',' << p.pressure << '\n';
  }
}

}  // namespace symdyn
