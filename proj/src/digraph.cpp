#include "symdyn/digraph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "symdyn/log_sum.hpp"

namespace symdyn {

std::size_t WeightedDigraph::edge_count() const {
  std::size_t total = 0;
  for (const auto& edges : out) total += edges.size();
  return total;
}

std::vector<std::vector<int>> strongly_connected_components(const WeightedDigraph& g) {
  const int n = g.size();
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<int> stack;
  std::vector<std::pair<int, std::size_t>> calls;
  std::vector<std::vector<int>> components;
  int counter = 0;

  for (int root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    calls.emplace_back(root, 0);
    while (!calls.empty()) {
      auto& [v, pos] = calls.back();
      if (pos < g.out[v].size()) {
        const int w = g.out[v][pos++].to;
        if (index[w] < 0) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          calls.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const int done = v;
      calls.pop_back();
      if (low[done] == index[done]) {
        std::vector<int> comp;
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp.push_back(w);
        } while (w != done);
        std::sort(comp.begin(), comp.end());
        components.push_back(std::move(comp));
      }
      if (!calls.empty()) {
        const int parent = calls.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
    }
  }
  return components;
}

namespace {

// Local copy of one component with dense indices 0..k-1.
struct Component {
  std::vector<int> offsets;  // CSR
  std::vector<int> targets;
  std::vector<double> weights;  // log-weights
  int size = 0;
};

Component extract(const WeightedDigraph& g, const std::vector<int>& vertices,
                  std::vector<int>& local) {
  Component c;
  c.size = static_cast<int>(vertices.size());
  for (int i = 0; i < c.size; ++i) local[vertices[i]] = i;
  c.offsets.push_back(0);
  for (int v : vertices) {
    for (const auto& e : g.out[v]) {
      if (local[e.to] >= 0) {
        c.targets.push_back(local[e.to]);
        c.weights.push_back(e.weight);
      }
    }
    c.offsets.push_back(static_cast<int>(c.targets.size()));
  }
  for (int v : vertices) local[v] = -1;
  return c;
}

int period_of(const Component& c) {
  if (c.targets.empty()) return 0;
  std::vector<int> level(c.size, -1);
  std::deque<int> queue{0};
  level[0] = 0;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int k = c.offsets[u]; k < c.offsets[u + 1]; ++k) {
      const int v = c.targets[k];
      if (level[v] < 0) {
        level[v] = level[u] + 1;
        queue.push_back(v);
      }
    }
  }
  int period = 0;
  for (int u = 0; u < c.size; ++u) {
    for (int k = c.offsets[u]; k < c.offsets[u + 1]; ++k) {
      period = std::gcd(period, std::abs(level[u] + 1 - level[c.targets[k]]));
    }
  }
  return period;
}

}  // namespace

int component_period(const WeightedDigraph& g, const std::vector<int>& component) {
  std::vector<int> local(g.size(), -1);
  return period_of(extract(g, component, local));
}

SpectralEstimate log_spectral_radius(const WeightedDigraph& g, double tolerance,
                                     std::int64_t max_iterations) {
  SpectralEstimate best;
  best.log_radius = kNegInf;
  best.converged = true;
  std::vector<int> local(g.size(), -1);

  for (const auto& vertices : strongly_connected_components(g)) {
    const Component c = extract(g, vertices, local);
    const int period = period_of(c);
    if (period == 0) continue;

    const double shift = *std::max_element(c.weights.begin(), c.weights.end());
    std::vector<double> matrix(c.weights.size());
    for (std::size_t k = 0; k < matrix.size(); ++k) matrix[k] = std::exp(c.weights[k] - shift);

    std::vector<double> x(c.size, 1.0), y(c.size), tmp(c.size);
    double lo = 0.0, hi = 0.0;
    std::int64_t iterations = 0;
    bool converged = false;
    // After a short plain phase the iteration runs on B = M^p + cI with c the
    // current upper bound on rho^p. Eigenvalues of M^p close to rho^p in
    // modulus but not in argument (renewal structures with nearly
    // commensurate cycle lengths) are damped by the shift, and the
    // Collatz-Wielandt ratios of B bracket rho^p + c.
    double c_shift = 0.0;
    std::int64_t rounds = 0;
    while (iterations < max_iterations) {
      y = x;
      for (int step = 0; step < period; ++step) {
        for (int u = 0; u < c.size; ++u) {
          double s = 0.0;
          for (int k = c.offsets[u]; k < c.offsets[u + 1]; ++k) s += matrix[k] * y[c.targets[k]];
          tmp[u] = s;
        }
        y.swap(tmp);
      }
      for (int u = 0; u < c.size; ++u) y[u] += c_shift * x[u];
      iterations += period;
      ++rounds;
      double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0, ymax = 0.0;
      for (int u = 0; u < c.size; ++u) {
        const double r = y[u] / x[u];
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
        ymax = std::max(ymax, y[u]);
      }
      lo = std::log(std::max(rmin - c_shift, 0.0)) / period;
      hi = std::log(rmax - c_shift) / period;
      for (int u = 0; u < c.size; ++u) x[u] = y[u] / ymax;
      if (hi - lo < tolerance) {
        converged = true;
        break;
      }
      if (rounds == 64 && c_shift == 0.0) c_shift = rmax;
    }
    const double estimate = 0.5 * (lo + hi) + shift;
    best.iterations += iterations;
    best.converged = best.converged && converged;
    if (estimate > best.log_radius) {
      best.log_radius = estimate;
      best.error_bound = 0.5 * (hi - lo);
      best.period = period;
    }
  }
  return best;
}

double max_mean_cycle(const WeightedDigraph& g) {
  double best = kNegInf;
  std::vector<int> local(g.size(), -1);
  for (const auto& vertices : strongly_connected_components(g)) {
    const Component c = extract(g, vertices, local);
    if (c.targets.empty()) continue;
    const int n = c.size;
    // walk[k][v]: max weight of a k-edge walk from vertex 0 to v.
    std::vector<std::vector<double>> walk(n + 1, std::vector<double>(n, kNegInf));
    walk[0][0] = 0.0;
    for (int k = 1; k <= n; ++k) {
      for (int u = 0; u < n; ++u) {
        if (walk[k - 1][u] == kNegInf) continue;
        for (int e = c.offsets[u]; e < c.offsets[u + 1]; ++e) {
          const int v = c.targets[e];
          walk[k][v] = std::max(walk[k][v], walk[k - 1][u] + c.weights[e]);
        }
      }
    }
    for (int v = 0; v < n; ++v) {
      if (walk[n][v] == kNegInf) continue;
      double worst = std::numeric_limits<double>::infinity();
      for (int k = 0; k < n; ++k) {
        if (walk[k][v] == kNegInf) continue;
        worst = std::min(worst, (walk[n][v] - walk[k][v]) / (n - k));
      }
      best = std::max(best, worst);
    }
  }
  return best;
}

}  // namespace symdyn
