#pragma once

#include <cstdint>
#include <vector>

namespace symdyn {

/// Directed graph with real edge weights interpreted additively (log-scale):
/// a walk's weight is the sum of its edge weights.
struct WeightedDigraph {
  struct Edge {
    int to;
    double weight;
  };
  std::vector<std::vector<Edge>> out;

  explicit WeightedDigraph(int vertices = 0) : out(static_cast<std::size_t>(vertices)) {}
  [[nodiscard]] int size() const { return static_cast<int>(out.size()); }
  void add_edge(int from, int to, double weight) { out[from].push_back({to, weight}); }
  [[nodiscard]] std::size_t edge_count() const;
};

/// Strongly connected components, each listed in increasing vertex order.
/// Iterative, safe on graphs with millions of vertices.
std::vector<std::vector<int>> strongly_connected_components(const WeightedDigraph& g);

/// gcd of cycle lengths of the strongly connected component `component`.
int component_period(const WeightedDigraph& g, const std::vector<int>& component);

struct SpectralEstimate {
  /// log of the spectral radius of the matrix M[u][v] = sum of exp(weight) over u->v edges.
  double log_radius = 0.0;
  /// Half-width of the Collatz-Wielandt bracket on log_radius.
  double error_bound = 0.0;
  std::int64_t iterations = 0;
  int period = 1;  // largest period among the components that attain the radius
  bool converged = false;
};

/// Power iteration per strongly connected component from the all-ones vector.
/// A component of period p is iterated with M^p, whose blocks are primitive,
/// and the Collatz-Wielandt bounds min_i (M^p x)_i / x_i <= rho^p <= max_i ...
/// bracket the radius; iteration stops when the bracket's log-width drops
/// below `tolerance` or after `max_iterations` matrix-vector products.
/// Returns log_radius = -inf when the graph has no cycle.
SpectralEstimate log_spectral_radius(const WeightedDigraph& g, double tolerance = 1e-12,
                                     std::int64_t max_iterations = 1'000'000);

/// Maximum over cycles of (cycle weight / cycle length), via Karp's algorithm
/// run on each strongly connected component. -inf when acyclic.
double max_mean_cycle(const WeightedDigraph& g);

}  // namespace symdyn
